//! Scenario parameters, Rayleigh channel sampling and per-realization rates.
//!
//! Every quantity here is in linear units. Rates are in bits/s/Hz. A cognitive
//! user `i` transmits with the power that pins its interference at the primary
//! receiver to exactly `I`, so its transmit power is `I / |h_ip|^2`.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All scenario parameters of one cognitive network.
///
/// `theta_eve` is indexed `[user][eve]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    pub m_users: usize,
    pub n_eves: usize,
    /// Maximum tolerable interference at the primary receiver.
    pub interference_cap: f64,
    /// Interference-plus-noise power at the cognitive base station.
    pub noise_cbs: f64,
    pub noise_eve: Vec<f64>,
    /// Reference main-link gain.
    pub sigma_m_sq: f64,
    /// Main-to-eavesdropper ratio of reference gains.
    pub lambda_me: f64,
    pub theta_main: Vec<f64>,
    pub theta_eve: Vec<Vec<f64>>,
    pub sigma_ip_sq: Vec<f64>,
}

fn check_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be finite and > 0, got {value}")))
    }
}

fn uniform_value(values: &[f64]) -> Option<f64> {
    let first = *values.first()?;
    values.iter().all(|&v| v == first).then_some(first)
}

impl SystemConfig {
    /// Unit powers, unit gains and the given user/eavesdropper counts.
    pub fn symmetric(m_users: usize, n_eves: usize, lambda_me: f64) -> Self {
        UniformParams {
            lambda_me,
            ..UniformParams::default()
        }
        .build(m_users, n_eves)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m_users < 1 {
            return Err(Error::Config("m_users must be ≥ 1".into()));
        }
        if self.n_eves < 1 {
            return Err(Error::Config("n_eves must be ≥ 1".into()));
        }
        check_positive("interference_cap", self.interference_cap)?;
        check_positive("noise_cbs", self.noise_cbs)?;
        check_positive("sigma_m_sq", self.sigma_m_sq)?;
        check_positive("lambda_me", self.lambda_me)?;
        check_positive("sigma_e_sq", self.sigma_e_sq())?;

        let dim = |name: &str, got: usize, want: usize| {
            if got == want {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} has length {got}, expected {want}")))
            }
        };
        dim("noise_eve", self.noise_eve.len(), self.n_eves)?;
        dim("theta_main", self.theta_main.len(), self.m_users)?;
        dim("sigma_ip_sq", self.sigma_ip_sq.len(), self.m_users)?;
        dim("theta_eve", self.theta_eve.len(), self.m_users)?;
        for (i, row) in self.theta_eve.iter().enumerate() {
            dim(&format!("theta_eve[{i}]"), row.len(), self.n_eves)?;
            for (j, &v) in row.iter().enumerate() {
                check_positive(&format!("theta_eve[{i}][{j}]"), v)?;
            }
        }
        for (j, &v) in self.noise_eve.iter().enumerate() {
            check_positive(&format!("noise_eve[{j}]"), v)?;
        }
        for i in 0..self.m_users {
            check_positive(&format!("theta_main[{i}]"), self.theta_main[i])?;
            check_positive(&format!("sigma_ip_sq[{i}]"), self.sigma_ip_sq[i])?;
        }
        Ok(())
    }

    /// Reference wiretap gain, `sigma_m_sq / lambda_me`.
    pub fn sigma_e_sq(&self) -> f64 {
        self.sigma_m_sq / self.lambda_me
    }

    /// Mean of `|h_ib|^2`.
    pub fn main_gain(&self, user: usize) -> f64 {
        self.theta_main[user] * self.sigma_m_sq
    }

    /// Mean of `|h_ie_j|^2`.
    pub fn eve_gain(&self, user: usize, eve: usize) -> f64 {
        self.theta_eve[user][eve] * self.sigma_e_sq()
    }

    pub fn primary_gain(&self, user: usize) -> f64 {
        self.sigma_ip_sq[user]
    }

    pub fn with_lambda_me(&self, lambda_me: f64) -> Self {
        Self {
            lambda_me,
            ..self.clone()
        }
    }

    /// Multiplies `I`, `N_b` and every `N_e` by `factor`.
    pub fn with_scaled_powers(&self, factor: f64) -> Self {
        Self {
            interference_cap: self.interference_cap * factor,
            noise_cbs: self.noise_cbs * factor,
            noise_eve: self.noise_eve.iter().map(|v| v * factor).collect(),
            ..self.clone()
        }
    }

    /// Resizes to a new user/eavesdropper count. Only possible when every
    /// per-user and per-eavesdropper field is uniform.
    pub fn with_dimensions(&self, m_users: usize, n_eves: usize) -> Result<Self> {
        if m_users == self.m_users && n_eves == self.n_eves {
            return Ok(self.clone());
        }
        let params = self.uniform_params().ok_or_else(|| {
            Error::Config(
                "cannot change m_users/n_eves of a configuration with per-user or per-eavesdropper values".into(),
            )
        })?;
        Ok(params.build(m_users, n_eves))
    }

    /// The broadcast parameters, if every vector and matrix field is uniform.
    pub fn uniform_params(&self) -> Option<UniformParams> {
        let theta_eve: Vec<f64> = self.theta_eve.iter().flatten().copied().collect();
        Some(UniformParams {
            interference_cap: self.interference_cap,
            noise_cbs: self.noise_cbs,
            noise_eve: uniform_value(&self.noise_eve)?,
            sigma_m_sq: self.sigma_m_sq,
            lambda_me: self.lambda_me,
            theta_main: uniform_value(&self.theta_main)?,
            theta_eve: uniform_value(&theta_eve)?,
            sigma_ip_sq: uniform_value(&self.sigma_ip_sq)?,
        })
    }
}

/// Scenario parameters that are identical for every user and eavesdropper.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UniformParams {
    pub interference_cap: f64,
    pub noise_cbs: f64,
    pub noise_eve: f64,
    pub sigma_m_sq: f64,
    pub lambda_me: f64,
    pub theta_main: f64,
    pub theta_eve: f64,
    pub sigma_ip_sq: f64,
}

impl Default for UniformParams {
    fn default() -> Self {
        Self {
            interference_cap: 1.0,
            noise_cbs: 1.0,
            noise_eve: 1.0,
            sigma_m_sq: 1.0,
            lambda_me: 1.0,
            theta_main: 1.0,
            theta_eve: 1.0,
            sigma_ip_sq: 1.0,
        }
    }
}

impl UniformParams {
    pub fn build(&self, m_users: usize, n_eves: usize) -> SystemConfig {
        SystemConfig {
            m_users,
            n_eves,
            interference_cap: self.interference_cap,
            noise_cbs: self.noise_cbs,
            noise_eve: vec![self.noise_eve; n_eves],
            sigma_m_sq: self.sigma_m_sq,
            lambda_me: self.lambda_me,
            theta_main: vec![self.theta_main; m_users],
            theta_eve: vec![vec![self.theta_eve; n_eves]; m_users],
            sigma_ip_sq: vec![self.sigma_ip_sq; m_users],
        }
    }
}

/// One joint draw of every fading coefficient in the network.
///
/// Eavesdropper fields are stored row-major, `[user * n_eves + eve]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    m_users: usize,
    n_eves: usize,
    pub h_main: Vec<Complex64>,
    pub h_primary: Vec<Complex64>,
    pub h_eve: Vec<Complex64>,
    pub g_main: Vec<f64>,
    pub g_primary: Vec<f64>,
    pub g_eve: Vec<f64>,
}

/// Circularly-symmetric complex Gaussian with total variance `variance`.
/// Draws whose squared modulus underflows to zero are discarded.
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> (Complex64, f64) {
    let sd = (0.5 * variance).sqrt();
    loop {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let h = Complex64::new(sd * re, sd * im);
        let g = h.norm_sqr();
        if g > 0.0 {
            return (h, g);
        }
    }
}

impl ChannelRealization {
    fn zeroed(m_users: usize, n_eves: usize) -> Self {
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m_users,
            n_eves,
            h_main: vec![zero; m_users],
            h_primary: vec![zero; m_users],
            h_eve: vec![zero; m_users * n_eves],
            g_main: vec![0.0; m_users],
            g_primary: vec![0.0; m_users],
            g_eve: vec![0.0; m_users * n_eves],
        }
    }

    /// Builds a realization with real, positive coefficients `sqrt(g)`.
    /// `g_eve` is indexed `[user][eve]`.
    pub fn from_gains(g_main: &[f64], g_primary: &[f64], g_eve: &[Vec<f64>]) -> Self {
        let m_users = g_main.len();
        assert_eq!(g_primary.len(), m_users, "g_primary length");
        assert_eq!(g_eve.len(), m_users, "g_eve rows");
        let n_eves = g_eve.first().map_or(0, Vec::len);
        let mut r = Self::zeroed(m_users, n_eves);
        let real = |g: f64| Complex64::new(g.sqrt(), 0.0);
        for i in 0..m_users {
            r.g_main[i] = g_main[i];
            r.g_primary[i] = g_primary[i];
            r.h_main[i] = real(g_main[i]);
            r.h_primary[i] = real(g_primary[i]);
            assert_eq!(g_eve[i].len(), n_eves, "g_eve row length");
            for (j, &g) in g_eve[i].iter().enumerate() {
                r.g_eve[i * n_eves + j] = g;
                r.h_eve[i * n_eves + j] = real(g);
            }
        }
        r
    }

    pub fn m_users(&self) -> usize {
        self.m_users
    }

    pub fn n_eves(&self) -> usize {
        self.n_eves
    }

    pub fn h_eve(&self, user: usize, eve: usize) -> Complex64 {
        self.h_eve[user * self.n_eves + eve]
    }

    pub fn g_eve(&self, user: usize, eve: usize) -> f64 {
        self.g_eve[user * self.n_eves + eve]
    }

    /// Overwrites this realization with a fresh draw, reusing its buffers.
    ///
    /// Draw order is fixed: for each user, the main coefficient, the primary
    /// coefficient, then one coefficient per eavesdropper.
    pub fn resample<R: Rng + ?Sized>(&mut self, config: &SystemConfig, rng: &mut R) {
        if self.m_users != config.m_users || self.n_eves != config.n_eves {
            *self = Self::zeroed(config.m_users, config.n_eves);
        }
        let n = self.n_eves;
        for i in 0..self.m_users {
            (self.h_main[i], self.g_main[i]) = complex_gaussian(rng, config.main_gain(i));
            (self.h_primary[i], self.g_primary[i]) = complex_gaussian(rng, config.primary_gain(i));
            for j in 0..n {
                (self.h_eve[i * n + j], self.g_eve[i * n + j]) =
                    complex_gaussian(rng, config.eve_gain(i, j));
            }
        }
    }
}

pub fn sample_realization<R: Rng + ?Sized>(config: &SystemConfig, rng: &mut R) -> ChannelRealization {
    let mut r = ChannelRealization::zeroed(config.m_users, config.n_eves);
    r.resample(config, rng);
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Proposed,
    Traditional,
    #[serde(rename = "an")]
    ArtificialNoise,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::Traditional, Scheme::ArtificialNoise];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Traditional => "traditional",
            Scheme::ArtificialNoise => "an",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "proposed" => Ok(Scheme::Proposed),
            "traditional" => Ok(Scheme::Traditional),
            "an" | "artificial-noise" | "artificial_noise" => Ok(Scheme::ArtificialNoise),
            other => Err(Error::Usage(format!(
                "unknown scheme '{other}' (expected proposed, traditional or an)"
            ))),
        }
    }
}

/// Rates of one scheme on one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub selected_user: Option<usize>,
    pub rate_main: f64,
    pub rate_eve: f64,
    pub secrecy_rate: f64,
    pub intercept: bool,
}

impl SchemeOutcome {
    pub fn new(scheme: Scheme, selected_user: Option<usize>, rate_main: f64, rate_eve: f64) -> Self {
        Self {
            scheme,
            selected_user,
            rate_main,
            rate_eve,
            secrecy_rate: (rate_main - rate_eve).max(0.0),
            intercept: rate_main < rate_eve,
        }
    }
}

fn log2_1p(snr: f64) -> f64 {
    snr.ln_1p() / LN_2
}

/// Transmit power that caps the interference at the primary receiver to `I`.
pub fn transmit_power(config: &SystemConfig, realization: &ChannelRealization, user: usize) -> f64 {
    config.interference_cap / realization.g_primary[user]
}

pub fn rate_main(config: &SystemConfig, realization: &ChannelRealization, user: usize) -> f64 {
    let snr = config.interference_cap * realization.g_main[user]
        / (realization.g_primary[user] * config.noise_cbs);
    log2_1p(snr)
}

pub fn rate_eve(config: &SystemConfig, realization: &ChannelRealization, user: usize, eve: usize) -> f64 {
    let snr = config.interference_cap * realization.g_eve(user, eve)
        / (realization.g_primary[user] * config.noise_eve[eve]);
    log2_1p(snr)
}

/// Wiretap rate of the strongest eavesdropper.
pub fn rate_eve_max(config: &SystemConfig, realization: &ChannelRealization, user: usize) -> f64 {
    (0..config.n_eves)
        .map(|j| rate_eve(config, realization, user, j))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Schedules the user with the largest secrecy margin, using both main and
/// wiretap channel state. Ties go to the lowest index.
pub fn schedule_proposed(config: &SystemConfig, realization: &ChannelRealization) -> SchemeOutcome {
    let mut best = (0, rate_main(config, realization, 0), rate_eve_max(config, realization, 0));
    for i in 1..config.m_users {
        let main = rate_main(config, realization, i);
        let eve = rate_eve_max(config, realization, i);
        if main - eve > best.1 - best.2 {
            best = (i, main, eve);
        }
    }
    SchemeOutcome::new(Scheme::Proposed, Some(best.0), best.1, best.2)
}

/// Schedules the user with the best main link, ignoring eavesdroppers.
pub fn schedule_traditional(config: &SystemConfig, realization: &ChannelRealization) -> SchemeOutcome {
    let mut best = (0, rate_main(config, realization, 0));
    for i in 1..config.m_users {
        let main = rate_main(config, realization, i);
        if main > best.1 {
            best = (i, main);
        }
    }
    let eve = rate_eve_max(config, realization, best.0);
    SchemeOutcome::new(Scheme::Traditional, Some(best.0), best.1, eve)
}

/// Artificial-noise beamforming rates. All users transmit jointly with half
/// their power on the signal and half on noise in the main channel's null space.
pub fn artificial_noise_rates(config: &SystemConfig, realization: &ChannelRealization) -> Result<SchemeOutcome> {
    if config.m_users < 2 {
        return Err(Error::ArtificialNoiseUsers(config.m_users));
    }
    Ok(artificial_noise_formula(config, realization))
}

/// The artificial-noise rate expressions evaluated for any user count,
/// including the single-user case where no null-space noise exists. Used
/// for the single-user intercept bound.
pub fn artificial_noise_formula(config: &SystemConfig, realization: &ChannelRealization) -> SchemeOutcome {
    let m = config.m_users;
    let i_cap = config.interference_cap;
    let scale = 2.0 * m as f64;

    let coherent = |h: &dyn Fn(usize) -> Complex64| -> f64 {
        (0..m)
            .map(|i| h(i) / realization.g_primary[i].sqrt())
            .sum::<Complex64>()
            .norm_sqr()
    };

    let s_main = coherent(&|i| realization.h_main[i]);
    let rate_main = log2_1p(i_cap * s_main / (scale * config.noise_cbs));

    let rate_eve = (0..config.n_eves)
        .map(|j| {
            let s = coherent(&|i| realization.h_eve(i, j));
            let signal = i_cap * s;
            log2_1p(signal / (signal + scale * config.noise_eve[j]))
        })
        .fold(f64::NEG_INFINITY, f64::max);

    SchemeOutcome::new(Scheme::ArtificialNoise, None, rate_main, rate_eve)
}

pub fn evaluate(scheme: Scheme, config: &SystemConfig, realization: &ChannelRealization) -> Result<SchemeOutcome> {
    match scheme {
        Scheme::Proposed => Ok(schedule_proposed(config, realization)),
        Scheme::Traditional => Ok(schedule_traditional(config, realization)),
        Scheme::ArtificialNoise => artificial_noise_rates(config, realization),
    }
}

/// Per-user transmit power when all users transmit jointly.
fn joint_power(config: &SystemConfig, realization: &ChannelRealization, user: usize) -> f64 {
    config.interference_cap / (config.m_users as f64 * realization.g_primary[user])
}

/// Effective main-channel coefficients `sqrt(P_i / 2) h_ib` seen by the noise vector.
pub fn noise_constraint_coefficients(config: &SystemConfig, realization: &ChannelRealization) -> Vec<Complex64> {
    (0..config.m_users)
        .map(|i| (0.5 * joint_power(config, realization, i)).sqrt() * realization.h_main[i])
        .collect()
}

/// Interference `sum_i sqrt(P_i / 2) h_ie_j w_i` that a noise vector produces
/// at eavesdropper `eve`.
pub fn noise_at_eve(
    config: &SystemConfig,
    realization: &ChannelRealization,
    w: &[Complex64],
    eve: usize,
) -> Complex64 {
    (0..config.m_users)
        .map(|i| (0.5 * joint_power(config, realization, i)).sqrt() * realization.h_eve(i, eve) * w[i])
        .sum()
}

/// Draws an artificial-noise vector `w` with `sum_i a_i w_i = 0`, where
/// `a_i = sqrt(P_i / 2) h_ib`, scaled so that the mean of `|w_i|^2` is one.
pub fn construct_noise_vector<R: Rng + ?Sized>(
    config: &SystemConfig,
    realization: &ChannelRealization,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let m = config.m_users;
    if m < 2 {
        return Err(Error::ArtificialNoiseUsers(m));
    }
    let a = noise_constraint_coefficients(config, realization);
    // The constraint is <conj(a), w> = 0, so project a random direction off conj(a).
    let b: Vec<Complex64> = a.iter().map(Complex64::conj).collect();
    let b_norm_sq: f64 = b.iter().map(Complex64::norm_sqr).sum();
    loop {
        let v: Vec<Complex64> = (0..m).map(|_| complex_gaussian(rng, 1.0).0).collect();
        let proj: Complex64 = b.iter().zip(&v).map(|(bi, vi)| bi.conj() * vi).sum::<Complex64>() / b_norm_sq;
        let mut w: Vec<Complex64> = v.iter().zip(&b).map(|(vi, bi)| vi - bi * proj).collect();
        let w_norm_sq: f64 = w.iter().map(Complex64::norm_sqr).sum();
        if w_norm_sq > f64::MIN_POSITIVE * m as f64 {
            let scale = (m as f64 / w_norm_sq).sqrt();
            w.iter_mut().for_each(|wi| *wi *= scale);
            return Ok(w);
        }
    }
}
