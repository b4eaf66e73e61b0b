//! Seeded, block-parallel Monte Carlo estimation.
//!
//! Trials are cut into fixed blocks of [`BLOCK_TRIALS`]. Block `k` draws from
//! ChaCha8 stream `k` of the master seed and its partial sums are merged in
//! block order, so an estimate depends only on `(config, scheme, trials,
//! seed)` and never on how many rayon workers ran the blocks.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::model::{self, ChannelRealization, Scheme, SchemeOutcome, SystemConfig};
use crate::numeric::CompensatedSum;

pub const BLOCK_TRIALS: u64 = 10_000;
pub const DEFAULT_INTERCEPT_TRIALS: u64 = 1_000_000;
pub const DEFAULT_SECRECY_TRIALS: u64 = 200_000;
/// Intercept estimates backed by fewer events than this are reported as unresolved.
pub const MIN_RESOLVED_EVENTS: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    #[serde(rename = "secrecy_rate")]
    ErgodicSecrecyRate,
    #[serde(rename = "intercept_probability")]
    InterceptProbability,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::ErgodicSecrecyRate => "secrecy_rate",
            Metric::InterceptProbability => "intercept_probability",
        }
    }

    pub fn default_trials(self) -> u64 {
        match self {
            Metric::ErgodicSecrecyRate => DEFAULT_SECRECY_TRIALS,
            Metric::InterceptProbability => DEFAULT_INTERCEPT_TRIALS,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Unresolved,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateResult {
    pub metric: Metric,
    pub scheme: Scheme,
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
    pub master_seed: u64,
}

impl EstimateResult {
    /// Probabilities resting on fewer than [`MIN_RESOLVED_EVENTS`] intercepts are unresolved.
    pub fn status(&self) -> Status {
        match self.metric {
            Metric::InterceptProbability if self.value * (self.trials as f64) < MIN_RESOLVED_EVENTS => Status::Unresolved,
            _ => Status::Ok,
        }
    }
}

/// Running sums of a per-trial statistic and an event indicator.
#[derive(Debug, Clone, Default)]
struct Tally {
    trials: u64,
    sum: CompensatedSum,
    sum_sq: CompensatedSum,
    hits: u64,
}

impl Tally {
    fn push(&mut self, value: f64, hit: bool) {
        self.trials += 1;
        self.sum.add(value);
        self.sum_sq.add(value * value);
        self.hits += u64::from(hit);
    }

    fn merge(&mut self, other: &Tally) {
        self.trials += other.trials;
        self.sum.merge(&other.sum);
        self.sum_sq.merge(&other.sum_sq);
        self.hits += other.hits;
    }

    fn mean(&self) -> f64 {
        self.sum.value() / self.trials as f64
    }

    /// Standard deviation of the sample mean.
    fn std_error(&self) -> f64 {
        if self.trials < 2 {
            return 0.0;
        }
        let n = self.trials as f64;
        let mean = self.mean();
        let var = ((self.sum_sq.value() - n * mean * mean) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }

    fn fraction(&self) -> f64 {
        self.hits as f64 / self.trials as f64
    }

    fn binomial_std_error(&self) -> f64 {
        let p = self.fraction();
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

/// Independent stream for trial block `block` of `master_seed`.
pub fn block_rng(master_seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(block);
    rng
}

/// SplitMix64 finalizer, used to derive per-point seeds in a sweep.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    let mut z = master_seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn run_blocks<F>(config: &SystemConfig, trials: u64, master_seed: u64, trial: F) -> Tally
where
    F: Fn(&ChannelRealization) -> (f64, bool) + Sync,
{
    let blocks = trials.div_ceil(BLOCK_TRIALS);
    let partials: Vec<Tally> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let n = BLOCK_TRIALS.min(trials - block * BLOCK_TRIALS);
            let mut rng = block_rng(master_seed, block);
            let mut realization = model::sample_realization(config, &mut rng);
            let mut tally = Tally::default();
            for k in 0..n {
                if k > 0 {
                    realization.resample(config, &mut rng);
                }
                let (value, hit) = trial(&realization);
                tally.push(value, hit);
            }
            tally
        })
        .collect();
    partials.iter().fold(Tally::default(), |mut acc, t| {
        acc.merge(t);
        acc
    })
}

fn check_run(config: &SystemConfig, scheme: Scheme, trials: u64) -> Result<()> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::Usage("trials must be ≥ 1".into()));
    }
    if scheme == Scheme::ArtificialNoise && config.m_users < 2 {
        return Err(Error::ArtificialNoiseUsers(config.m_users));
    }
    Ok(())
}

fn outcome_fn(scheme: Scheme, config: &SystemConfig) -> impl Fn(&ChannelRealization) -> SchemeOutcome + Sync + '_ {
    move |r| match scheme {
        Scheme::Proposed => model::schedule_proposed(config, r),
        Scheme::Traditional => model::schedule_traditional(config, r),
        Scheme::ArtificialNoise => model::artificial_noise_formula(config, r),
    }
}

fn simulate_scheme(config: &SystemConfig, scheme: Scheme, trials: u64, master_seed: u64) -> Result<Tally> {
    check_run(config, scheme, trials)?;
    let outcome = outcome_fn(scheme, config);
    Ok(run_blocks(config, trials, master_seed, |r| {
        let o = outcome(r);
        (o.secrecy_rate, o.intercept)
    }))
}

fn secrecy_result(tally: &Tally, scheme: Scheme, master_seed: u64) -> EstimateResult {
    EstimateResult {
        metric: Metric::ErgodicSecrecyRate,
        scheme,
        value: tally.mean(),
        std_error: tally.std_error(),
        trials: tally.trials,
        master_seed,
    }
}

fn intercept_result(tally: &Tally, scheme: Scheme, master_seed: u64) -> EstimateResult {
    EstimateResult {
        metric: Metric::InterceptProbability,
        scheme,
        value: tally.fraction(),
        std_error: tally.binomial_std_error(),
        trials: tally.trials,
        master_seed,
    }
}

/// Ergodic secrecy rate: the mean of the clamped secrecy rate over fading.
pub fn estimate_secrecy_rate(config: &SystemConfig, scheme: Scheme, trials: u64, master_seed: u64) -> Result<EstimateResult> {
    let tally = simulate_scheme(config, scheme, trials, master_seed)?;
    Ok(secrecy_result(&tally, scheme, master_seed))
}

/// Fraction of realizations in which the scheme's main rate falls below its wiretap rate.
pub fn estimate_intercept(config: &SystemConfig, scheme: Scheme, trials: u64, master_seed: u64) -> Result<EstimateResult> {
    let tally = simulate_scheme(config, scheme, trials, master_seed)?;
    Ok(intercept_result(&tally, scheme, master_seed))
}

/// Both metrics from one pass over the same realizations.
pub fn estimate_both(
    config: &SystemConfig,
    scheme: Scheme,
    trials: u64,
    master_seed: u64,
) -> Result<(EstimateResult, EstimateResult)> {
    let tally = simulate_scheme(config, scheme, trials, master_seed)?;
    Ok((secrecy_result(&tally, scheme, master_seed), intercept_result(&tally, scheme, master_seed)))
}

/// Intercept probability of the artificial-noise rate expressions at any user
/// count, including `m_users = 1` where the single-user bound applies.
pub fn estimate_an_formula_intercept(config: &SystemConfig, trials: u64, master_seed: u64) -> Result<EstimateResult> {
    config.validate()?;
    if trials == 0 {
        return Err(Error::Usage("trials must be ≥ 1".into()));
    }
    let tally = run_blocks(config, trials, master_seed, |r| {
        let o = model::artificial_noise_formula(config, r);
        (o.secrecy_rate, o.intercept)
    });
    Ok(intercept_result(&tally, Scheme::ArtificialNoise, master_seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

/// Sample mean of an arbitrary per-realization statistic, with the same
/// seeding and block contract as the scheme estimators.
pub fn estimate_mean<F>(config: &SystemConfig, trials: u64, master_seed: u64, statistic: F) -> Result<MeanEstimate>
where
    F: Fn(&ChannelRealization) -> f64 + Sync,
{
    config.validate()?;
    if trials == 0 {
        return Err(Error::Usage("trials must be ≥ 1".into()));
    }
    let tally = run_blocks(config, trials, master_seed, |r| (statistic(r), false));
    Ok(MeanEstimate {
        mean: tally.mean(),
        std_error: tally.std_error(),
        trials,
    })
}

/// One point of a parameter sweep. Unset dimensions keep the base configuration's.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub m_users: Option<usize>,
    pub n_eves: Option<usize>,
    pub lambda_me_db: f64,
}

impl GridPoint {
    pub fn mer_db(lambda_me_db: f64) -> Self {
        Self {
            m_users: None,
            n_eves: None,
            lambda_me_db,
        }
    }

    pub fn apply(&self, base: &SystemConfig) -> Result<SystemConfig> {
        let m = self.m_users.unwrap_or(base.m_users);
        let n = self.n_eves.unwrap_or(base.n_eves);
        let config = base.with_dimensions(m, n)?.with_lambda_me(db_to_linear(self.lambda_me_db));
        config.validate()?;
        Ok(config)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

fn serialize_value<S: Serializer>(value: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match value {
        Some(v) => s.serialize_f64(*v),
        None => s.serialize_none(),
    }
}

/// One emitted `(scheme, grid point, metric)` record. `value` is empty when
/// the estimate is unresolved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub scheme: Scheme,
    pub m_users: usize,
    pub n_eves: usize,
    pub lambda_me_db: f64,
    pub metric: Metric,
    #[serde(serialize_with = "serialize_value")]
    pub value: Option<f64>,
    pub std_error: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub status: Status,
}

impl SweepRow {
    fn from_estimate(config: &SystemConfig, point: &GridPoint, estimate: &EstimateResult) -> Self {
        let status = estimate.status();
        Self {
            scheme: estimate.scheme,
            m_users: config.m_users,
            n_eves: config.n_eves,
            lambda_me_db: point.lambda_me_db,
            metric: estimate.metric,
            value: (status == Status::Ok).then_some(estimate.value),
            std_error: estimate.std_error,
            trials: estimate.trials,
            master_seed: estimate.master_seed,
            status,
        }
    }
}

/// Estimates every requested metric for every scheme at every grid point.
///
/// Rows are ordered by scheme, then grid point, then metric. Grid point `k`
/// uses seed `derive_seed(master_seed, k)` for all schemes, so schemes are
/// compared on common channel draws.
pub fn run_sweep(
    base: &SystemConfig,
    schemes: &[Scheme],
    grid: &[GridPoint],
    metrics: &[Metric],
    trials: u64,
    master_seed: u64,
) -> Result<Vec<SweepRow>> {
    let mut configs = Vec::with_capacity(grid.len());
    for (index, point) in grid.iter().enumerate() {
        let annotate = |source: Error| Error::GridPoint { index, source: Box::new(source) };
        let config = point.apply(base).map_err(annotate)?;
        for &scheme in schemes {
            check_run(&config, scheme, trials).map_err(annotate)?;
        }
        configs.push(config);
    }

    let mut rows = Vec::with_capacity(schemes.len() * grid.len() * metrics.len());
    for &scheme in schemes {
        for (index, (point, config)) in grid.iter().zip(&configs).enumerate() {
            let seed = derive_seed(master_seed, index as u64);
            let (secrecy, intercept) = estimate_both(config, scheme, trials, seed)?;
            for &metric in metrics {
                let estimate = match metric {
                    Metric::ErgodicSecrecyRate => &secrecy,
                    Metric::InterceptProbability => &intercept,
                };
                rows.push(SweepRow::from_estimate(config, point, estimate));
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_cover_partial_tail() {
        let c = SystemConfig::symmetric(2, 1, 1.0);
        let e = estimate_intercept(&c, Scheme::Proposed, BLOCK_TRIALS + 7, 1).unwrap();
        assert_eq!(e.trials, BLOCK_TRIALS + 7);
    }

    #[test]
    fn single_trial_has_zero_spread() {
        let c = SystemConfig::symmetric(2, 1, 1.0);
        let e = estimate_secrecy_rate(&c, Scheme::Traditional, 1, 4).unwrap();
        assert_eq!(e.std_error, 0.0);
    }

    #[test]
    fn rejects_zero_trials_and_single_user_an() {
        let c = SystemConfig::symmetric(1, 1, 1.0);
        assert!(estimate_intercept(&c, Scheme::Proposed, 0, 1).is_err());
        assert!(matches!(
            estimate_secrecy_rate(&c, Scheme::ArtificialNoise, 10, 1),
            Err(Error::ArtificialNoiseUsers(1))
        ));
        assert!(estimate_an_formula_intercept(&c, 10, 1).is_ok());
    }

    #[test]
    fn unresolved_below_ten_events() {
        let e = EstimateResult {
            metric: Metric::InterceptProbability,
            scheme: Scheme::Proposed,
            value: 9.0 / 1e6,
            std_error: 0.0,
            trials: 1_000_000,
            master_seed: 0,
        };
        assert_eq!(e.status(), Status::Unresolved);
        assert_eq!(EstimateResult { value: 1e-5, ..e }.status(), Status::Ok);
        assert_eq!(EstimateResult { metric: Metric::ErgodicSecrecyRate, value: 0.0, ..e }.status(), Status::Ok);
    }

    #[test]
    fn derived_seeds_differ() {
        let seeds: std::collections::HashSet<u64> = (0..1000).map(|k| derive_seed(42, k)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_eq!(derive_seed(42, 3), derive_seed(42, 3));
    }

    #[test]
    fn empty_grid_gives_no_rows() {
        let c = SystemConfig::symmetric(2, 1, 1.0);
        let rows = run_sweep(&c, &Scheme::ALL, &[], &[Metric::InterceptProbability], 100, 1).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn bad_grid_point_is_annotated() {
        let c = SystemConfig::symmetric(2, 1, 1.0);
        let grid = [
            GridPoint::mer_db(0.0),
            GridPoint { m_users: Some(1), ..GridPoint::mer_db(5.0) },
        ];
        let err = run_sweep(&c, &Scheme::ALL, &grid, &[Metric::InterceptProbability], 100, 1).unwrap_err();
        assert!(matches!(err, Error::GridPoint { index: 1, .. }), "{err}");
    }

    #[test]
    fn sweep_rows_are_ordered_and_repeatable() {
        let c = SystemConfig::symmetric(2, 2, 1.0);
        let grid: Vec<GridPoint> = [0.0, 10.0].into_iter().map(GridPoint::mer_db).collect();
        let metrics = [Metric::ErgodicSecrecyRate, Metric::InterceptProbability];
        let a = run_sweep(&c, &Scheme::ALL, &grid, &metrics, 2_000, 9).unwrap();
        let b = run_sweep(&c, &Scheme::ALL, &grid, &metrics, 2_000, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 3 * 2 * 2);
        assert_eq!(a[0].scheme, Scheme::Proposed);
        assert_eq!(a[0].metric, Metric::ErgodicSecrecyRate);
        assert_eq!(a[1].metric, Metric::InterceptProbability);
        assert_eq!(a[2].lambda_me_db, 10.0);
        assert_eq!(a[4].scheme, Scheme::Traditional);
    }
}
