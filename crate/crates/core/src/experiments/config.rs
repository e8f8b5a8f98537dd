//! Experiment configuration: a flat `key = value` file with `#` comments.
//!
//! ```text
//! # power-law sweep, zeta = 1.5
//! alpha_grid = 0.5, 1.0, 1.5, 2.0
//! zeta = 1.5
//! exposure_coef = 30
//! exposure_b = 1.1
//! d_max = 20
//! output_path = sweep.csv
//! ```
//!
//! An `exposure_coef` of zero selects the decoupled zero exposure map.

use std::path::{Path, PathBuf};

use crate::equilibrium::FixedPointSettings;
use crate::error::{Error, Result};
use crate::model::{ExposureModel, Game, GameParams, InfectionModel};

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub alpha_grid: Vec<f64>,
    /// Power-law exponent for single-census commands.
    pub alpha: f64,
    pub zeta: f64,
    pub exposure_coef: f64,
    pub exposure_b: f64,
    pub params: GameParams,
    pub loss: f64,
    pub d_max: usize,
    pub output_path: Option<PathBuf>,
    pub rho_tolerance: f64,
    /// Attach per-degree profiles to JSON sweep output.
    pub profiles: bool,
}

/// `0.5, 0.75, ..., 3.0`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| 0.5 + 0.25 * i as f64).collect()
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            alpha_grid: default_alpha_grid(),
            alpha: 1.5,
            zeta: 1.5,
            exposure_coef: 30.0,
            exposure_b: 1.1,
            params: GameParams {
                tau_a: 0.7,
                beta_ia: 1.0,
                i_min: 0.0,
                i_max: 1000.0,
            },
            loss: 10.0,
            d_max: 20,
            output_path: None,
            rho_tolerance: FixedPointSettings::default().rho_tolerance,
            profiles: false,
        }
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut config = Self::default();
        config.apply_text(&text)?;
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        config.apply_text(text)?;
        Ok(config)
    }

    fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        match key {
            "alpha_grid" => {
                self.alpha_grid = value
                    .split(',')
                    .map(|v| parse_f64(key, v.trim()))
                    .collect::<std::result::Result<_, _>>()?
            }
            "alpha" => self.alpha = parse_f64(key, value)?,
            "zeta" => self.zeta = parse_f64(key, value)?,
            "exposure_coef" | "coef" => self.exposure_coef = parse_f64(key, value)?,
            "exposure_b" | "b" => self.exposure_b = parse_f64(key, value)?,
            "tau_a" => self.params.tau_a = parse_f64(key, value)?,
            "beta_ia" => self.params.beta_ia = parse_f64(key, value)?,
            "i_min" => self.params.i_min = parse_f64(key, value)?,
            "i_max" => self.params.i_max = parse_f64(key, value)?,
            "loss" => self.loss = parse_f64(key, value)?,
            "d_max" => self.d_max = value.parse().map_err(|_| format!("d_max: not an integer: {value}"))?,
            "output_path" => self.output_path = Some(PathBuf::from(value)),
            "tolerance" => self.rho_tolerance = parse_f64(key, value)?,
            "profiles" => self.profiles = value.parse().map_err(|_| format!("profiles: not a boolean: {value}"))?,
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha_grid.is_empty() {
            return Err(Error::Config("alpha_grid is empty".into()));
        }
        if self.alpha_grid.iter().chain([&self.alpha]).any(|a| !(*a >= 0.0 && a.is_finite())) {
            return Err(Error::Config("alpha values must be nonnegative".into()));
        }
        if self.d_max < 1 {
            return Err(Error::Config("d_max must be at least 1".into()));
        }
        if !(self.rho_tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        self.game().map(|_| ())
    }

    pub fn game(&self) -> Result<Game> {
        let p = self.params;
        let params = GameParams::new(p.tau_a, p.beta_ia, p.i_min, p.i_max)?;
        let infection = InfectionModel::power_law(self.zeta, self.loss)?;
        let exposure = if self.exposure_coef == 0.0 {
            ExposureModel::decoupled()
        } else {
            ExposureModel::power(self.exposure_coef, self.exposure_b)?
        };
        Game::new(params, infection, exposure)
    }

    pub fn settings(&self) -> FixedPointSettings {
        FixedPointSettings {
            rho_tolerance: self.rho_tolerance,
            ..FixedPointSettings::default()
        }
    }
}

fn parse_f64(key: &str, value: &str) -> std::result::Result<f64, String> {
    value
        .parse::<f64>()
        .map_err(|_| format!("{key}: not a number: {value}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid() {
        let g = default_alpha_grid();
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.5);
        assert_eq!(g[10], 3.0);
    }

    #[test]
    fn parses_flat_file() {
        let c = ExperimentConfig::parse(
            "# comment\nalpha_grid = 0.5, 1.0 ,2\nzeta=2.5\nexposure_b = 2.0 # inline\n\nd_max = 7\noutput_path = out.csv\n",
        )
        .unwrap();
        assert_eq!(c.alpha_grid, vec![0.5, 1.0, 2.0]);
        assert_eq!(c.zeta, 2.5);
        assert_eq!(c.exposure_b, 2.0);
        assert_eq!(c.d_max, 7);
        assert_eq!(c.output_path, Some(PathBuf::from("out.csv")));
        assert_eq!(c.exposure_coef, 30.0);
        c.validate().unwrap();
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(ExperimentConfig::parse("zeta 1.5"), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("colour = red"), Err(Error::Config(_))));
        assert!(matches!(ExperimentConfig::parse("zeta = fast"), Err(Error::Config(_))));
        let c = ExperimentConfig::parse("tau_a = 1.5").unwrap();
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_coefficient_decouples() {
        let c = ExperimentConfig::parse("exposure_coef = 0").unwrap();
        assert!(c.game().unwrap().exposure.is_decoupled(1.0));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = ExperimentConfig::from_file(Path::new("/nonexistent/missing.cfg")).unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(!err.is_solver_error());
    }
}
