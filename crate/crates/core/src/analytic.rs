//! Closed-form and asymptotic intercept probabilities.
//!
//! The wiretap CDF `Pr(max_j |h_ie_j|^2 / N_e_j < x)` is a product of
//! exponential CDFs. Expanding the product turns every expectation below into
//! an alternating sum over the nonempty subsets of eavesdroppers, with sign
//! `(-1)^(|S|+1)`. Each term depends only on the subset's summed rate weight.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::SystemConfig;
use crate::numeric::CompensatedSum;

/// Largest eavesdropper count for which the `2^N - 1` term expansion is evaluated.
pub const MAX_SUBSET_EVES: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetTerm {
    pub members: Vec<usize>,
    /// `+1` for odd-sized subsets, `-1` for even-sized ones.
    pub sign: i8,
}

fn check_subset_count(n_eves: usize) -> Result<()> {
    if (1..=MAX_SUBSET_EVES).contains(&n_eves) {
        Ok(())
    } else {
        Err(Error::SubsetCount(n_eves))
    }
}

/// Every nonempty subset of `0..n_eves`, in bitmask order.
pub fn enumerate_subsets(n_eves: usize) -> Result<Vec<SubsetTerm>> {
    check_subset_count(n_eves)?;
    Ok((1u32..(1u32 << n_eves))
        .map(|mask| {
            let members: Vec<usize> = (0..n_eves).filter(|j| mask & (1 << j) != 0).collect();
            let sign = if members.len() % 2 == 1 { 1 } else { -1 };
            SubsetTerm { members, sign }
        })
        .collect())
}

/// Depth-first walk over nonempty subsets, handing `(size, summed weight)` to `visit`.
/// Each subset sum extends its parent's by one weight, so the walk is `O(2^N)`.
fn walk_subsets(weights: &[f64], visit: &mut impl FnMut(usize, f64)) {
    fn go(weights: &[f64], start: usize, size: usize, sum: f64, visit: &mut impl FnMut(usize, f64)) {
        for j in start..weights.len() {
            let s = sum + weights[j];
            visit(size + 1, s);
            go(weights, j + 1, size + 1, s, visit);
        }
    }
    go(weights, 0, 0, 0.0, visit);
}

/// `sum_S (-1)^(|S|+1) term(sum_{j in S} weights[j])`, with odd and even
/// subsets accumulated separately before differencing.
fn alternating_subset_sum(weights: &[f64], term: impl Fn(f64) -> f64) -> f64 {
    let mut odd = CompensatedSum::new();
    let mut even = CompensatedSum::new();
    walk_subsets(weights, &mut |size, s| {
        if size % 2 == 1 {
            odd.add(term(s));
        } else {
            even.add(term(s));
        }
    });
    odd.value() - even.value()
}

/// Per-eavesdropper weights `N_e_j theta_ib / (N_b theta_ie_j)`, free of the MER.
fn theta_weights(config: &SystemConfig, user: usize) -> Result<Vec<f64>> {
    check_subset_count(config.n_eves)?;
    Ok((0..config.n_eves)
        .map(|j| config.noise_eve[j] * config.theta_main[user] / (config.noise_cbs * config.theta_eve[user][j]))
        .collect())
}

/// Weights written with absolute gains, `N_e_j sigma_ib^2 / (N_b sigma_ie_j^2)`.
fn gain_weights(config: &SystemConfig, user: usize) -> Result<Vec<f64>> {
    check_subset_count(config.n_eves)?;
    Ok((0..config.n_eves)
        .map(|j| config.noise_eve[j] * config.main_gain(user) / (config.noise_cbs * config.eve_gain(user, j)))
        .collect())
}

/// Probability that user `user` alone is intercepted, i.e. its main SNR
/// falls below the best wiretap SNR.
pub fn per_user_intercept_term(config: &SystemConfig, user: usize) -> Result<f64> {
    let lambda = config.lambda_me;
    let weights = theta_weights(config, user)?;
    let p = alternating_subset_sum(&weights, |s| 1.0 / (1.0 + s * lambda));
    Ok(p.clamp(0.0, 1.0))
}

/// Intercept probability of secrecy-optimal scheduling. Users fade
/// independently, so the event "every user is intercepted" factorizes.
pub fn intercept_proposed_closed(config: &SystemConfig) -> Result<f64> {
    (0..config.m_users).try_fold(1.0, |acc, i| Ok(acc * per_user_intercept_term(config, i)?))
}

/// Intercept probability of rate-optimal scheduling for a single user,
/// evaluated from the absolute channel gains.
pub fn intercept_traditional_m1(config: &SystemConfig) -> Result<f64> {
    if config.m_users != 1 {
        return Err(Error::SingleUserOnly {
            operation: "traditional closed form",
            got: config.m_users,
        });
    }
    let weights = gain_weights(config, 0)?;
    Ok(alternating_subset_sum(&weights, |s| 1.0 / (1.0 + s)).clamp(0.0, 1.0))
}

/// Strict upper bound on the single-user artificial-noise intercept
/// probability. It coincides with the single-user traditional value.
pub fn intercept_an_upper_bound_m1(config: &SystemConfig) -> Result<f64> {
    if config.m_users != 1 {
        return Err(Error::SingleUserOnly {
            operation: "artificial-noise bound",
            got: config.m_users,
        });
    }
    intercept_traditional_m1(config)
}

/// Per-user high-MER coefficient `c_i`, so that the intercept term behaves as `c_i / lambda_me`.
fn asymptotic_coefficient(config: &SystemConfig, user: usize) -> Result<f64> {
    let weights = theta_weights(config, user)?;
    Ok(alternating_subset_sum(&weights, |s| 1.0 / s))
}

/// High-MER approximation `prod_i c_i * lambda_me^(-M)`.
pub fn intercept_proposed_asymptotic(config: &SystemConfig) -> Result<f64> {
    let mut p = 1.0;
    for i in 0..config.m_users {
        p *= asymptotic_coefficient(config, i)? / config.lambda_me;
    }
    Ok(p)
}

/// `E[t]` for `t = N_b X / sigma_ib^2`, `X = max_j |h_ie_j|^2 / N_e_j`.
pub fn moment_t_mean(config: &SystemConfig, user: usize) -> Result<f64> {
    Ok(asymptotic_coefficient(config, user)? / config.lambda_me)
}

/// `E[t^2]` for the same `t` as [`moment_t_mean`].
pub fn moment_t_sq_mean(config: &SystemConfig, user: usize) -> Result<f64> {
    let weights = theta_weights(config, user)?;
    let sum = alternating_subset_sum(&weights, |s| 1.0 / (s * s));
    Ok(2.0 * sum / (config.lambda_me * config.lambda_me))
}

/// Least-squares line through `(log10 lambda_me, log10 p)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiversityFit {
    pub slope: f64,
    pub intercept: f64,
    pub mer_grid_db: Vec<f64>,
    /// Largest absolute log10 deviation of a point from the fitted line.
    pub residual: f64,
}

impl DiversityFit {
    pub fn diversity_order(&self) -> f64 {
        -self.slope
    }
}

pub fn diversity_fit(points: &[(f64, f64)]) -> Result<DiversityFit> {
    if points.len() < 3 {
        return Err(Error::Fit(format!("need ≥ 3 points, got {}", points.len())));
    }
    for (k, &(lambda, p)) in points.iter().enumerate() {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::Fit(format!("point {k}: lambda_me must be > 0, got {lambda}")));
        }
        if !(p.is_finite() && p > 0.0 && p <= 1.0) {
            return Err(Error::Fit(format!("point {k}: probability must lie in (0, 1], got {p}")));
        }
        if k > 0 && lambda <= points[k - 1].0 {
            return Err(Error::Fit("lambda_me values must be strictly increasing".into()));
        }
    }

    let xs: Vec<f64> = points.iter().map(|&(l, _)| l.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, p)| p.log10()).collect();
    let n = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (sxy, sxx) = xs.iter().zip(&ys).fold((0.0, 0.0), |(sxy, sxx), (x, y)| {
        let dx = x - x_mean;
        (sxy + dx * (y - y_mean), sxx + dx * dx)
    });
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - (intercept + slope * x)).abs())
        .fold(0.0, f64::max);

    Ok(DiversityFit {
        slope,
        intercept,
        mer_grid_db: xs.iter().map(|x| 10.0 * x).collect(),
        residual,
    })
}
