//! Cross-checks between closed-form expressions and Monte Carlo estimates.

use serde::Serialize;

use crate::analytic;
use crate::error::Result;
use crate::model::{Scheme, SystemConfig};
use crate::montecarlo::{self, derive_seed, EstimateResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Passes when `|z| <= threshold`.
    Agreement,
    /// Passes when the analytic bound exceeds the estimate by more than `threshold` standard errors.
    StrictBound,
    /// Passes when `|analytic / reference - 1| <= threshold`.
    RelativeTolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyCheck {
    pub name: String,
    pub kind: CheckKind,
    pub m_users: usize,
    pub n_eves: usize,
    pub lambda_me_db: f64,
    pub analytic: f64,
    /// Monte Carlo estimate, or the exact expression for tolerance checks.
    pub reference: f64,
    pub std_error: f64,
    pub z: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Where a check was evaluated.
#[derive(Debug, Clone, Copy)]
pub struct Site {
    pub m_users: usize,
    pub n_eves: usize,
    pub lambda_me_db: f64,
}

impl Site {
    pub fn of(config: &SystemConfig) -> Self {
        Self {
            m_users: config.m_users,
            n_eves: config.n_eves,
            lambda_me_db: montecarlo::linear_to_db(config.lambda_me),
        }
    }
}

/// An exact probability against a binomial estimate. The standard error is
/// taken under the exact value, so estimates of zero events stay testable.
pub fn probability_check(name: &str, site: Site, exact: f64, estimate: &EstimateResult, threshold: f64) -> VerifyCheck {
    let se = (exact * (1.0 - exact) / estimate.trials as f64).sqrt();
    mean_check(name, site, exact, estimate.value, se, threshold)
}

/// An exact mean against a sample mean with its own standard error.
pub fn mean_check(name: &str, site: Site, exact: f64, estimate: f64, std_error: f64, threshold: f64) -> VerifyCheck {
    let diff = estimate - exact;
    let z = if std_error > 0.0 {
        diff / std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY.copysign(diff)
    };
    VerifyCheck {
        name: name.to_string(),
        kind: CheckKind::Agreement,
        m_users: site.m_users,
        n_eves: site.n_eves,
        lambda_me_db: site.lambda_me_db,
        analytic: exact,
        reference: estimate,
        std_error,
        z,
        threshold,
        pass: z.abs() <= threshold,
    }
}

pub fn strict_bound_check(name: &str, site: Site, bound: f64, estimate: &EstimateResult, threshold: f64) -> VerifyCheck {
    let z = if estimate.std_error > 0.0 {
        (bound - estimate.value) / estimate.std_error
    } else {
        f64::INFINITY.copysign(bound - estimate.value)
    };
    VerifyCheck {
        name: name.to_string(),
        kind: CheckKind::StrictBound,
        m_users: site.m_users,
        n_eves: site.n_eves,
        lambda_me_db: site.lambda_me_db,
        analytic: bound,
        reference: estimate.value,
        std_error: estimate.std_error,
        z,
        threshold,
        pass: z > threshold,
    }
}

pub fn tolerance_check(name: &str, site: Site, value: f64, reference: f64, tolerance: f64) -> VerifyCheck {
    let rel = value / reference - 1.0;
    VerifyCheck {
        name: name.to_string(),
        kind: CheckKind::RelativeTolerance,
        m_users: site.m_users,
        n_eves: site.n_eves,
        lambda_me_db: site.lambda_me_db,
        analytic: value,
        reference,
        std_error: 0.0,
        z: rel,
        threshold: tolerance,
        pass: rel.abs() <= tolerance,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<VerifyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerifyCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

/// `t = N_b max_j(|h_ie_j|^2 / N_e_j) / sigma_ib^2` for `user`.
pub fn moment_statistic(config: &SystemConfig, user: usize) -> impl Fn(&crate::model::ChannelRealization) -> f64 + Sync + '_ {
    move |r| {
        let x = (0..config.n_eves)
            .map(|j| r.g_eve(user, j) / config.noise_eve[j])
            .fold(0.0, f64::max);
        config.noise_cbs * x / config.main_gain(user)
    }
}

/// Every check that applies to one configuration:
/// the proposed closed form against simulation, the single-user
/// traditional closed form and artificial-noise bound, the high-MER
/// approximation at 60 dB, and the first two moments of `t`.
pub fn verify_config(config: &SystemConfig, trials: u64, seed: u64) -> Result<Vec<VerifyCheck>> {
    let site = Site::of(config);
    let mut checks = Vec::new();
    let mut next_seed = {
        let mut k = 0u64;
        move || {
            k += 1;
            derive_seed(seed, k)
        }
    };

    let closed = analytic::intercept_proposed_closed(config)?;
    let mc = montecarlo::estimate_intercept(config, Scheme::Proposed, trials, next_seed())?;
    checks.push(probability_check("proposed_closed_form", site, closed, &mc, 3.0));

    if config.m_users == 1 {
        let closed = analytic::intercept_traditional_m1(config)?;
        let mc = montecarlo::estimate_intercept(config, Scheme::Traditional, trials, next_seed())?;
        checks.push(probability_check("traditional_closed_form", site, closed, &mc, 3.0));

        let bound = analytic::intercept_an_upper_bound_m1(config)?;
        let an = montecarlo::estimate_an_formula_intercept(config, trials, next_seed())?;
        checks.push(strict_bound_check("an_intercept_bound", site, bound, &an, 3.0));
    }

    let far = config.with_lambda_me(1e6);
    let ratio_site = Site::of(&far);
    checks.push(tolerance_check(
        "asymptotic_over_exact",
        ratio_site,
        analytic::intercept_proposed_asymptotic(&far)?,
        analytic::intercept_proposed_closed(&far)?,
        0.01,
    ));

    let t = moment_statistic(config, 0);
    let mean = analytic::moment_t_mean(config, 0)?;
    let sample = montecarlo::estimate_mean(config, trials, next_seed(), &t)?;
    checks.push(mean_check("moment_t", site, mean, sample.mean, sample.std_error, 4.0));

    let sq = analytic::moment_t_sq_mean(config, 0)?;
    let sample = montecarlo::estimate_mean(config, trials, next_seed(), |r| t(r).powi(2))?;
    checks.push(mean_check("moment_t_sq", site, sq, sample.mean, sample.std_error, 4.0));

    Ok(checks)
}
