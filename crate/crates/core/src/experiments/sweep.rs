use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::solve_ne;
use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::model::power_law_census;
use crate::social::solve_social_optimum;

pub const CSV_HEADER: &str = "alpha,e_ne,e_so,cost_ne,cost_so,poa,rho_ne,rho_so";

/// Slack for the per-row invariants `poa ≥ 1` and `e_so ≤ e_ne`.
pub const ROW_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub e_ne: f64,
    pub e_so: f64,
    pub cost_ne: f64,
    pub cost_so: f64,
    pub poa: f64,
    pub rho_ne: f64,
    pub rho_so: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_ne: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile_so: Option<Vec<f64>>,
}

impl SweepRow {
    fn check(&self) -> Result<()> {
        if self.poa < 1.0 - ROW_SLACK {
            return Err(Error::RowInvariant {
                alpha: self.alpha,
                what: format!("poa = {} < 1", self.poa),
            });
        }
        if self.e_so > self.e_ne + ROW_SLACK {
            return Err(Error::RowInvariant {
                alpha: self.alpha,
                what: format!("e_so = {} exceeds e_ne = {}", self.e_so, self.e_ne),
            });
        }
        Ok(())
    }

    fn csv_line(&self) -> String {
        [
            self.alpha,
            self.e_ne,
            self.e_so,
            self.cost_ne,
            self.cost_so,
            self.poa,
            self.rho_ne,
            self.rho_so,
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Solves the equilibrium and the social optimum for each power-law exponent
/// on the grid. Points run in parallel; rows come back sorted by `alpha`.
pub fn run_sweep(config: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    config.validate()?;
    let game = config.game()?;
    let settings = config.settings();
    let mut rows = config
        .alpha_grid
        .par_iter()
        .map(|&alpha| {
            let point = || -> Result<SweepRow> {
                let s = power_law_census(alpha, config.d_max)?;
                let ne = solve_ne(&s, &game, &settings)?;
                let so = solve_social_optimum(&s, &game, &settings)?;
                let row = SweepRow {
                    alpha,
                    e_ne: ne.exposure,
                    e_so: so.exposure,
                    cost_ne: ne.social_cost,
                    cost_so: so.social_cost,
                    poa: ne.social_cost / so.social_cost,
                    rho_ne: ne.rho,
                    rho_so: so.rho,
                    profile_ne: config.profiles.then(|| ne.profile.into_inner()),
                    profile_so: config.profiles.then(|| so.profile.into_inner()),
                };
                row.check()?;
                Ok(row)
            };
            point().map_err(|source| Error::Sweep {
                alpha,
                source: Box::new(source),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    Ok(rows)
}

/// Renders rows as CSV: fixed header, 17 significant digits, LF endings.
pub fn csv_string(rows: &[SweepRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

pub fn write_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut file = std::fs::File::create(path).map_err(io)?;
    file.write_all(csv_string(rows).as_bytes()).map_err(io)?;
    file.flush().map_err(io)
}
