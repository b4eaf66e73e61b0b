use cogsec::model::{self, sample_realization, ChannelRealization, Scheme, SystemConfig};
use cogsec::montecarlo::{self, block_rng, BLOCK_TRIALS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn arb_config() -> impl Strategy<Value = SystemConfig> {
    (1usize..=5, 1usize..=4)
        .prop_flat_map(|(m, n)| {
            (
                Just((m, n)),
                -20.0..40.0f64,
                prop::collection::vec(0.1..3.0f64, m),
                prop::collection::vec(prop::collection::vec(0.1..3.0f64, n), m),
                prop::collection::vec(0.1..3.0f64, m),
                prop::collection::vec(-10.0..10.0f64, n),
                -10.0..10.0f64,
            )
        })
        .prop_map(|((m, n), mer, theta_main, theta_eve, sigma_ip_sq, noise_eve_db, noise_cbs_db)| {
            let mut c = SystemConfig::symmetric(m, n, 10f64.powf(mer / 10.0));
            c.theta_main = theta_main;
            c.theta_eve = theta_eve;
            c.sigma_ip_sq = sigma_ip_sq;
            c.noise_eve = noise_eve_db.iter().map(|d| 10f64.powf(d / 10.0)).collect();
            c.noise_cbs = 10f64.powf(noise_cbs_db / 10.0);
            c
        })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn outcomes_ignore_common_power_scale(config in arb_config(), seed in any::<u64>(), exp in -3.0..3.0f64) {
        let r = sample_realization(&config, &mut ChaCha8Rng::seed_from_u64(seed));
        let scaled = config.with_scaled_powers(10f64.powf(exp));
        for scheme in Scheme::ALL {
            if scheme == Scheme::ArtificialNoise && config.m_users < 2 {
                continue;
            }
            let a = model::evaluate(scheme, &config, &r).unwrap();
            let b = model::evaluate(scheme, &scaled, &r).unwrap();
            prop_assert!(close(a.secrecy_rate, b.secrecy_rate), "{scheme}: {} vs {}", a.secrecy_rate, b.secrecy_rate);
            prop_assert_eq!(a.selected_user, b.selected_user);
            prop_assert_eq!(a.intercept, b.intercept);
        }
    }

    #[test]
    fn scheduling_intercept_ignores_interference_cap(config in arb_config(), seed in any::<u64>(), cap_db in -30.0..30.0f64) {
        let r = sample_realization(&config, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut other = config.clone();
        other.interference_cap = 10f64.powf(cap_db / 10.0);
        prop_assert_eq!(model::schedule_proposed(&config, &r).intercept, model::schedule_proposed(&other, &r).intercept);
        let t = model::schedule_traditional(&config, &r);
        let u = model::schedule_traditional(&other, &r);
        prop_assert_eq!(t.selected_user, u.selected_user);
        prop_assert_eq!(t.intercept, u.intercept);
    }

    #[test]
    fn proposed_never_below_traditional(config in arb_config(), seed in any::<u64>()) {
        let r = sample_realization(&config, &mut ChaCha8Rng::seed_from_u64(seed));
        let p = model::schedule_proposed(&config, &r);
        let t = model::schedule_traditional(&config, &r);
        prop_assert!(p.secrecy_rate >= t.secrecy_rate);
        prop_assert!(!p.intercept || t.intercept);
    }
}

/// The block estimator equals a plain sequential pass over the same streams.
#[test]
fn blocked_mean_matches_sequential_pass() {
    let config = SystemConfig::symmetric(3, 2, 5.0);
    let trials = 2 * BLOCK_TRIALS + 1234;
    let statistic = |r: &ChannelRealization| model::schedule_proposed(&config, r).secrecy_rate;
    let estimate = montecarlo::estimate_mean(&config, trials, 42, statistic).unwrap();
    let by_scheme = montecarlo::estimate_secrecy_rate(&config, Scheme::Proposed, trials, 42).unwrap();

    let mut sum = 0.0;
    let mut count = 0u64;
    for block in 0..trials.div_ceil(BLOCK_TRIALS) {
        let mut rng = block_rng(42, block);
        let n = BLOCK_TRIALS.min(trials - block * BLOCK_TRIALS);
        for _ in 0..n {
            sum += statistic(&sample_realization(&config, &mut rng));
            count += 1;
        }
    }
    let naive = sum / count as f64;
    assert_eq!(count, trials);
    assert!((estimate.mean - naive).abs() <= 1e-12 * naive, "{} vs {naive}", estimate.mean);
    assert_eq!(estimate.mean, by_scheme.value);
    assert_eq!(estimate.std_error, by_scheme.std_error);
}

#[test]
fn standard_error_halves_with_four_times_the_trials() {
    let config = SystemConfig::symmetric(4, 2, 10.0);
    let small = montecarlo::estimate_secrecy_rate(&config, Scheme::Proposed, 100_000, 5).unwrap();
    let large = montecarlo::estimate_secrecy_rate(&config, Scheme::Proposed, 400_000, 6).unwrap();
    let ratio = large.std_error / small.std_error;
    assert!((ratio - 0.5).abs() < 0.025, "ratio {ratio}");
    assert!((large.value - small.value).abs() < 4.0 * small.std_error.hypot(large.std_error));

    let small = montecarlo::estimate_intercept(&config, Scheme::Traditional, 100_000, 5).unwrap();
    let large = montecarlo::estimate_intercept(&config, Scheme::Traditional, 400_000, 6).unwrap();
    let ratio = large.std_error / small.std_error;
    assert!((ratio - 0.5).abs() < 0.025, "ratio {ratio}");
}

#[test]
fn channel_gains_are_exponential() {
    let mut config = SystemConfig::symmetric(1, 1, 1.0);
    config.sigma_m_sq = 2.0;
    config.sigma_ip_sq = vec![0.5];
    let trials = 1_000_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut s_main, mut s_main_sq, mut s_primary, mut s_eve) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..trials {
        let r = sample_realization(&config, &mut rng);
        s_main += r.g_main[0];
        s_main_sq += r.g_main[0] * r.g_main[0];
        s_primary += r.g_primary[0];
        s_eve += r.g_eve(0, 0);
    }
    let n = trials as f64;
    let mean = s_main / n;
    let var = s_main_sq / n - mean * mean;
    // An exponential gain has standard deviation equal to its mean, so the
    // sample mean of a gain with mean mu has standard error mu / sqrt(n).
    let within = |sample: f64, mu: f64| (sample - mu).abs() <= 4.0 * mu / n.sqrt();
    assert!(within(mean, 2.0), "mean {mean}");
    assert!((var - 4.0).abs() < 0.05, "variance {var}");
    assert!(within(s_primary / n, 0.5));
    // sigma_e^2 = sigma_m^2 / lambda = 2.
    assert!(within(s_eve / n, 2.0));
}

#[test]
fn noise_vector_stays_in_null_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for k in 0..1000 {
        let m = 2 + k % 7;
        let config = SystemConfig::symmetric(m, 2, 1.0);
        let r = sample_realization(&config, &mut rng);
        let w = model::construct_noise_vector(&config, &r, &mut rng).unwrap();
        let a = model::noise_constraint_coefficients(&config, &r);
        let residual: num_complex::Complex64 = a.iter().zip(&w).map(|(a, w)| a * w).sum();
        let norm = |v: &[num_complex::Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(residual.norm() / (norm(&a) * norm(&w)) < 1e-10, "M={m}");
        let mean_power = w.iter().map(|z| z.norm_sqr()).sum::<f64>() / m as f64;
        assert!((mean_power - 1.0).abs() < 1e-12);
    }
}
