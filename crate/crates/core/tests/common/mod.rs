#![allow(dead_code)]

use std::io::Write;

use cogsec::SystemConfig;

/// Prints one line straight to stderr so it shows even when the harness
/// captures output of passing tests.
pub fn report(label: &str, pass: bool, detail: &str) {
    let line = format!("{label}: {} {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
}

#[allow(clippy::too_many_arguments)]
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// P(main SNR of `user` below its best eavesdropper SNR).
///
/// With X ~ Exp(mean mu_b) and independent Z_j ~ Exp(mean mu_j), substituting
/// u = exp(-s / mu_b) turns P(X > max Z) into the integral over [0, 1] of
/// prod_j (1 - u^(mu_b / mu_j)).
pub fn user_intercept_quadrature(config: &SystemConfig, user: usize) -> f64 {
    let mu_b = config.main_gain(user) / config.noise_cbs;
    let exponents: Vec<f64> = (0..config.n_eves)
        .map(|j| mu_b / (config.eve_gain(user, j) / config.noise_eve[j]))
        .collect();
    let safe = integrate(&|u: f64| exponents.iter().map(|c| 1.0 - u.powf(*c)).product(), 0.0, 1.0, 1e-13);
    1.0 - safe
}

/// Probability that every user is intercepted, the proposed scheme's intercept event.
pub fn proposed_intercept_quadrature(config: &SystemConfig) -> f64 {
    (0..config.m_users).map(|i| user_intercept_quadrature(config, i)).product()
}

pub fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}
