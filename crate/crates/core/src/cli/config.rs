//! Scenario files and the built-in presets.
//!
//! A scenario file is TOML. Powers are given in dBm and converted to linear
//! milliwatts on load; channel gains are linear. Any per-user or
//! per-eavesdropper field may be a single number, broadcast to every entry.
//!
//! ```toml
//! m_users = 4
//! n_eves = 2
//! interference_cap_dbm = 0.0
//! noise_cbs_dbm = 0.0
//! noise_eve_dbm = 0.0          # or [0.0, 3.0]
//! sigma_m_sq = 0.8
//! lambda_me_db = 0.0           # optional, defaults to 0 dB
//! theta_main = 1.0             # or one value per user
//! theta_eve = 0.6              # or a user-by-eavesdropper matrix
//! sigma_ip_sq = 0.5            # or one value per user
//! ```

use std::fs;
use std::path::Path;

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Scheme, SystemConfig, UniformParams};
use crate::montecarlo::{db_to_linear, linear_to_db, Metric};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorField {
    Scalar(f64),
    Vector(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixField {
    Scalar(f64),
    Matrix(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub m_users: i64,
    pub n_eves: i64,
    pub interference_cap_dbm: f64,
    pub noise_cbs_dbm: f64,
    pub noise_eve_dbm: VectorField,
    pub sigma_m_sq: f64,
    #[serde(default)]
    pub lambda_me_db: f64,
    pub theta_main: VectorField,
    pub theta_eve: MatrixField,
    pub sigma_ip_sq: VectorField,
}

fn expand(name: &str, field: &VectorField, len: usize) -> Result<Vec<f64>> {
    match field {
        VectorField::Scalar(v) => Ok(vec![*v; len]),
        VectorField::Vector(v) if v.len() == len => Ok(v.clone()),
        VectorField::Vector(v) => Err(Error::Config(format!("{name} has {} entries, expected {len}", v.len()))),
    }
}

impl ConfigFile {
    pub fn to_config(&self) -> Result<SystemConfig> {
        if self.m_users < 1 {
            return Err(Error::Config("m_users must be ≥ 1".into()));
        }
        if self.n_eves < 1 {
            return Err(Error::Config("n_eves must be ≥ 1".into()));
        }
        let m = self.m_users as usize;
        let n = self.n_eves as usize;
        let theta_eve = match &self.theta_eve {
            MatrixField::Scalar(v) => vec![vec![*v; n]; m],
            MatrixField::Matrix(rows) => rows.clone(),
        };
        let config = SystemConfig {
            m_users: m,
            n_eves: n,
            interference_cap: db_to_linear(self.interference_cap_dbm),
            noise_cbs: db_to_linear(self.noise_cbs_dbm),
            noise_eve: expand("noise_eve_dbm", &self.noise_eve_dbm, n)?
                .into_iter()
                .map(db_to_linear)
                .collect(),
            sigma_m_sq: self.sigma_m_sq,
            lambda_me: db_to_linear(self.lambda_me_db),
            theta_main: expand("theta_main", &self.theta_main, m)?,
            theta_eve,
            sigma_ip_sq: expand("sigma_ip_sq", &self.sigma_ip_sq, m)?,
        };
        config.validate()?;
        Ok(config)
    }

    /// Scalar-valued file for a configuration whose fields are all uniform.
    pub fn from_uniform(m_users: usize, n_eves: usize, p: &UniformParams) -> Self {
        Self {
            m_users: m_users as i64,
            n_eves: n_eves as i64,
            interference_cap_dbm: linear_to_db(p.interference_cap),
            noise_cbs_dbm: linear_to_db(p.noise_cbs),
            noise_eve_dbm: VectorField::Scalar(linear_to_db(p.noise_eve)),
            sigma_m_sq: p.sigma_m_sq,
            lambda_me_db: linear_to_db(p.lambda_me),
            theta_main: VectorField::Scalar(p.theta_main),
            theta_eve: MatrixField::Scalar(p.theta_eve),
            sigma_ip_sq: VectorField::Scalar(p.sigma_ip_sq),
        }
    }
}

pub fn parse_config(path: &Path, text: &str) -> Result<SystemConfig> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    file.to_config().map_err(|e| match e {
        Error::Config(msg) => Error::Parse {
            path: path.to_path_buf(),
            message: msg,
        },
        other => other,
    })
}

/// Reads and validates a scenario file.
pub fn load_config(path: &Path) -> Result<SystemConfig> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(path, &text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
}

/// One preset: shared parameters, the `(M, N)`
/// curves drawn, and the plotted schemes and metric.
#[derive(Debug, Clone, PartialEq)]
pub struct PresetSpec {
    pub params: UniformParams,
    pub variants: Vec<(usize, usize)>,
    pub schemes: Vec<Scheme>,
    pub metric: Metric,
    pub mer_grid: super::MerGrid,
}

impl PresetSpec {
    pub fn base_config(&self) -> SystemConfig {
        let (m, n) = self.variants[0];
        self.params.build(m, n)
    }
}

impl Preset {
    pub fn spec(self) -> PresetSpec {
        // Secrecy-rate presets: I = N_b = N_e = 0 dBm, sigma_m^2 = 0.8,
        // sigma_ip^2 = 0.5, theta_ib = 1, theta_ie = 0.6.
        let secrecy = UniformParams {
            sigma_m_sq: 0.8,
            sigma_ip_sq: 0.5,
            theta_main: 1.0,
            theta_eve: 0.6,
            ..UniformParams::default()
        };
        // Intercept presets: unit powers, gains and thetas.
        let intercept = UniformParams::default();
        let secrecy_grid = super::MerGrid { start: -10.0, stop: 30.0, step: 5.0 };
        let intercept_grid = super::MerGrid { start: 0.0, stop: 30.0, step: 5.0 };
        let all = Scheme::ALL.to_vec();
        match self {
            Preset::Fig2 => PresetSpec {
                params: secrecy,
                variants: vec![(4, 2)],
                schemes: all,
                metric: Metric::ErgodicSecrecyRate,
                mer_grid: secrecy_grid,
            },
            Preset::Fig3 => PresetSpec {
                params: secrecy,
                variants: vec![(4, 2), (4, 8)],
                schemes: all,
                metric: Metric::ErgodicSecrecyRate,
                mer_grid: secrecy_grid,
            },
            Preset::Fig4 => PresetSpec {
                params: secrecy,
                variants: vec![(2, 2), (8, 2)],
                schemes: all,
                metric: Metric::ErgodicSecrecyRate,
                mer_grid: secrecy_grid,
            },
            Preset::Fig5 => PresetSpec {
                params: intercept,
                variants: vec![(4, 4)],
                schemes: all,
                metric: Metric::InterceptProbability,
                mer_grid: intercept_grid,
            },
            Preset::Fig6 => PresetSpec {
                params: intercept,
                variants: vec![(4, 4), (6, 4), (8, 4)],
                schemes: vec![Scheme::Proposed, Scheme::Traditional],
                metric: Metric::InterceptProbability,
                mer_grid: intercept_grid,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG2: &str = r#"
m_users = 4
n_eves = 2
interference_cap_dbm = 0.0
noise_cbs_dbm = 0.0
noise_eve_dbm = 0.0
sigma_m_sq = 0.8
theta_main = 1.0
theta_eve = 0.6
sigma_ip_sq = 0.5
"#;

    #[test]
    fn fig2_file_matches_preset() {
        let c = parse_config(Path::new("fig2.toml"), FIG2).unwrap();
        assert_eq!(c, Preset::Fig2.spec().base_config());
        assert_eq!(c.interference_cap, 1.0);
        assert_eq!(c.lambda_me, 1.0);
    }

    #[test]
    fn dbm_is_converted() {
        let text = FIG2.replace("noise_cbs_dbm = 0.0", "noise_cbs_dbm = 10.0");
        let c = parse_config(Path::new("x.toml"), &text).unwrap();
        assert!((c.noise_cbs - 10.0).abs() < 1e-12);
    }

    #[test]
    fn negative_users_fail_validation() {
        let text = FIG2.replace("m_users = 4", "m_users = -4");
        let err = parse_config(Path::new("x.toml"), &text).unwrap_err();
        assert!(err.to_string().contains("m_users must be ≥ 1"), "{err}");
    }

    #[test]
    fn parse_errors_carry_line() {
        let text = FIG2.replace("sigma_m_sq = 0.8", "sigma_m_sq = = 0.8");
        let err = parse_config(Path::new("x.toml"), &text).unwrap_err();
        assert!(err.to_string().contains("line 7"), "{err}");
    }

    #[test]
    fn vectors_and_matrices() {
        let text = FIG2
            .replace("theta_main = 1.0", "theta_main = [1.0, 1.1, 1.2, 1.3]")
            .replace("theta_eve = 0.6", "theta_eve = [[0.6, 0.7], [0.6, 0.7], [0.6, 0.7], [0.6, 0.7]]")
            .replace("noise_eve_dbm = 0.0", "noise_eve_dbm = [0.0, 10.0]");
        let c = parse_config(Path::new("x.toml"), &text).unwrap();
        assert_eq!(c.theta_main[3], 1.3);
        assert_eq!(c.theta_eve[2][1], 0.7);
        assert!((c.noise_eve[1] - 10.0).abs() < 1e-12);

        let short = FIG2.replace("theta_main = 1.0", "theta_main = [1.0, 1.1]");
        assert!(parse_config(Path::new("x.toml"), &short).unwrap_err().to_string().contains("theta_main"));
    }

    #[test]
    fn missing_file_is_reported() {
        let err = load_config(Path::new("/nonexistent/cogsec.toml")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
    }

    #[test]
    fn preset_files_round_trip() {
        for preset in Preset::value_variants() {
            let spec = preset.spec();
            let (m, n) = spec.variants[0];
            let text = toml::to_string(&ConfigFile::from_uniform(m, n, &spec.params)).unwrap();
            let c = parse_config(Path::new("p.toml"), &text).unwrap();
            assert_eq!(c, spec.base_config(), "{preset:?}");
        }
    }

    #[test]
    fn captions() {
        let fig5 = Preset::Fig5.spec().base_config();
        assert_eq!((fig5.m_users, fig5.n_eves), (4, 4));
        assert_eq!(fig5.sigma_ip_sq, vec![1.0; 4]);
        assert_eq!(fig5.theta_eve, vec![vec![1.0; 4]; 4]);
        let fig6 = Preset::Fig6.spec();
        assert_eq!(fig6.variants, vec![(4, 4), (6, 4), (8, 4)]);
        let fig3 = Preset::Fig3.spec();
        assert_eq!(fig3.variants, vec![(4, 2), (4, 8)]);
        assert_eq!(fig3.params.theta_eve, 0.6);
        assert_eq!(Preset::Fig4.spec().variants, vec![(2, 2), (8, 2)]);
    }
}
