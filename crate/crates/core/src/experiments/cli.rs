//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on bad input (flags, config, census files),
//! 2 when a solver fails.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::dominance::{fosd_unweighted, fosd_weighted, likelihood_ratio_condition, DominanceVerdict};
use crate::equilibrium::solve_ne;
use crate::error::{Error, Result};
use crate::experiments::sweep::csv_string;
use crate::experiments::{run_sweep, ExperimentConfig};
use crate::model::{power_law_census, EquilibriumResult, PopulationVector};
use crate::social::{penalty_schedule, price_of_anarchy, solve_social_optimum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_SOLVER: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ids-popgame", version, about = "Interdependent-security population game solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the Nash equilibrium for one census
    Ne(Common),
    /// Solve the social optimum for one census
    So(Common),
    /// Price of anarchy for one census
    Poa(Common),
    /// Penalty schedule that aligns the equilibrium with the optimum
    Penalty(Common),
    /// Run the power-law sweep
    Sweep(Common),
    /// Compare two census CSV files for stochastic dominance
    CheckDominance {
        first: PathBuf,
        second: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Flat `key = value` config file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    /// Exposure exponent
    #[arg(long)]
    b: Option<f64>,
    /// Exposure coefficient; 0 selects the decoupled zero map
    #[arg(long)]
    coef: Option<f64>,
    #[arg(long)]
    dmax: Option<usize>,
    #[arg(long = "tau-a")]
    tau_a: Option<f64>,
    #[arg(long = "beta-ia")]
    beta_ia: Option<f64>,
    #[arg(long)]
    loss: Option<f64>,
    #[arg(long)]
    imin: Option<f64>,
    #[arg(long)]
    imax: Option<f64>,
    /// Census CSV with header `degree,mass`; replaces the power-law census
    #[arg(long)]
    census: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bisection tolerance on the neighbor vulnerability
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

impl Common {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.alpha {
            c.alpha = v;
        }
        if let Some(v) = self.zeta {
            c.zeta = v;
        }
        if let Some(v) = self.b {
            c.exposure_b = v;
        }
        if let Some(v) = self.coef {
            c.exposure_coef = v;
        }
        if let Some(v) = self.dmax {
            c.d_max = v;
        }
        if let Some(v) = self.tau_a {
            c.params.tau_a = v;
        }
        if let Some(v) = self.beta_ia {
            c.params.beta_ia = v;
        }
        if let Some(v) = self.loss {
            c.loss = v;
        }
        if let Some(v) = self.imin {
            c.params.i_min = v;
        }
        if let Some(v) = self.imax {
            c.params.i_max = v;
        }
        if let Some(v) = &self.out {
            c.output_path = Some(v.clone());
        }
        if let Some(v) = self.tol {
            c.rho_tolerance = v;
        }
        c.validate()?;
        Ok(c)
    }

    fn census(&self, config: &ExperimentConfig) -> Result<PopulationVector> {
        match &self.census {
            Some(path) => read_census(path, self.dmax),
            None => power_law_census(config.alpha, config.d_max),
        }
    }
}

#[derive(Debug, Deserialize)]
struct CensusRecord {
    degree: usize,
    mass: f64,
}

/// Reads a `degree,mass` CSV. Unlisted degrees get zero mass; `d_max`, when
/// given, pads the census beyond the largest listed degree.
pub fn read_census(path: &Path, d_max: Option<usize>) -> Result<PopulationVector> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(csv_err)?;
    let records = reader
        .deserialize::<CensusRecord>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(csv_err)?;
    let largest = records.iter().map(|r| r.degree).max().unwrap_or(0);
    if records.iter().any(|r| r.degree == 0) {
        return Err(Error::invalid(format!("{}: degrees start at 1", path.display())));
    }
    let len = match d_max {
        Some(d) if d < largest => {
            return Err(Error::invalid(format!(
                "{}: degree {largest} exceeds d_max {d}",
                path.display()
            )))
        }
        Some(d) => d,
        None => largest,
    };
    let mut masses = vec![0.0; len];
    for r in records {
        masses[r.degree - 1] += r.mass;
    }
    PopulationVector::new(masses)
}

/// Parses `args` (including the program name) and runs the command, writing
/// results to `out` and diagnostics to `err`. Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_solver_error() {
                EXIT_SOLVER
            } else {
                EXIT_INPUT
            }
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    let text = match command {
        Command::Ne(common) => {
            let config = common.config()?;
            let s = common.census(&config)?;
            let result = solve_ne(&s, &config.game()?, &config.settings())?;
            render_equilibrium(&result, common.format)?
        }
        Command::So(common) => {
            let config = common.config()?;
            let s = common.census(&config)?;
            let result = solve_social_optimum(&s, &config.game()?, &config.settings())?;
            render_equilibrium(&result, common.format)?
        }
        Command::Poa(common) => {
            let config = common.config()?;
            let s = common.census(&config)?;
            let poa = price_of_anarchy(&s, &config.game()?, &config.settings())?;
            match common.format {
                Format::Csv => format!("poa\n{poa:?}\n"),
                Format::Json => json(&serde_json::json!({ "poa": poa }))?,
            }
        }
        Command::Penalty(common) => {
            let config = common.config()?;
            let s = common.census(&config)?;
            let schedule = penalty_schedule(&s, &config.game()?, &config.settings())?;
            match common.format {
                Format::Csv => {
                    let mut text = String::from("degree,investment,penalty,indirect_loss,rho\n");
                    for (i, (p, l)) in schedule.penalties.iter().zip(&schedule.indirect_losses).enumerate() {
                        let a = schedule.profile.at(i + 1);
                        text.push_str(&format!("{},{a:?},{p:?},{l:?},{:?}\n", i + 1, schedule.rho));
                    }
                    text
                }
                Format::Json => json(&schedule)?,
            }
        }
        Command::Sweep(common) => {
            let config = common.config()?;
            let rows = run_sweep(&config)?;
            let text = match common.format {
                Format::Csv => csv_string(&rows),
                Format::Json => json(&rows)?,
            };
            if let Some(path) = &config.output_path {
                write_file(path, &text)?;
                return Ok(());
            }
            text
        }
        Command::CheckDominance { first, second, format } => {
            let s1 = read_census(&first, None)?;
            let s2 = read_census(&second, None)?;
            let (s1, s2) = pad_pair(s1, s2)?;
            let checks = [
                ("weighted_fosd", fosd_weighted(&s1, &s2)?),
                ("unweighted_fosd", fosd_unweighted(&s1, &s2)?),
                ("likelihood_ratio", likelihood_ratio_condition(&s1, &s2)?),
            ];
            render_dominance(&checks, format)?
        }
    };
    out.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn pad_pair(s1: PopulationVector, s2: PopulationVector) -> Result<(PopulationVector, PopulationVector)> {
    let len = s1.d_max().max(s2.d_max());
    let pad = |s: PopulationVector| {
        let mut m = s.masses().to_vec();
        m.resize(len, 0.0);
        PopulationVector::new(m)
    };
    Ok((pad(s1)?, pad(s2)?))
}

fn render_equilibrium(result: &EquilibriumResult, format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => {
            let mut text = String::from("degree,investment,cost,rho,exposure,social_cost\n");
            for (i, (a, c)) in result
                .profile
                .investments()
                .iter()
                .zip(&result.per_degree_cost)
                .enumerate()
            {
                text.push_str(&format!(
                    "{},{a:?},{c:?},{:?},{:?},{:?}\n",
                    i + 1,
                    result.rho,
                    result.exposure,
                    result.social_cost
                ));
            }
            text
        }
        Format::Json => json(result)?,
    })
}

#[derive(Serialize)]
struct DominanceLine<'a> {
    check: &'a str,
    #[serde(flatten)]
    verdict: DominanceVerdict,
}

fn render_dominance(checks: &[(&str, DominanceVerdict)], format: Format) -> Result<String> {
    Ok(match format {
        Format::Csv => {
            let mut text = String::from("check,holds,first_violation_degree,strict_somewhere\n");
            for (name, v) in checks {
                let first = v.first_violation_degree.map(|d| d.to_string()).unwrap_or_default();
                text.push_str(&format!("{name},{},{first},{}\n", v.holds, v.strict_somewhere));
            }
            text
        }
        Format::Json => json(
            &checks
                .iter()
                .map(|(check, verdict)| DominanceLine { check, verdict: *verdict })
                .collect::<Vec<_>>(),
        )?,
    })
}

fn json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value)
        .map(|mut s| {
            s.push('\n');
            s
        })
        .map_err(|e| Error::invalid(format!("json encoding failed: {e}")))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
