//! Social cost, the modified game that internalizes externalities, and the
//! quantities built on it.
//!
//! Raising the perceived exposure from `g⁺(ρ)` to
//! `ϑ(ρ) = g⁺(ρ) + ġ⁺(ρ)·ρ` makes each agent pay for the harm its
//! vulnerability does to its neighbors. Every local minimizer of social cost
//! is an equilibrium of this modified game, and when `ϑ` is strictly
//! increasing that equilibrium is unique and is the global social optimum.
//! [`solve_social_optimum`] computes it with the same scalar bisection used
//! for the Nash equilibrium; [`brute_force_minimizer`] is an independent
//! grid-search oracle for small degree ranges.

use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{check_degree, cost_at, neighbor_vulnerability, solve_ne, solve_with, FixedPointSettings};
use crate::error::{Error, Result};
use crate::model::{weighted_fraction, EquilibriumResult, ExposureModel, Game, PopulationVector, StrategyProfile};

/// Grid used by [`is_vartheta_increasing`].
pub const VARTHETA_GRID_POINTS: usize = 1000;

/// Default cap on grid points for [`brute_force_minimizer`].
pub const DEFAULT_GRID_BUDGET: u64 = 50_000_000;

/// Coordinates within this distance of a bound count as active.
const BOUND_TOL: f64 = 1e-9;

pub fn vartheta(z: f64, exposure: &ExposureModel) -> f64 {
    exposure.vartheta(z)
}

/// Whether `ϑ` is strictly increasing on a uniform grid over `(0, z_max]`.
pub fn is_vartheta_increasing(exposure: &ExposureModel, z_max: f64) -> bool {
    if !(z_max > 0.0 && z_max.is_finite()) {
        return false;
    }
    let n = VARTHETA_GRID_POINTS;
    let mut prev = f64::NEG_INFINITY;
    for i in 1..=n {
        let v = exposure.vartheta(z_max * i as f64 / n as f64);
        if !(v > prev) {
            return false;
        }
        prev = v;
    }
    true
}

/// Accepts maps whose `ϑ` is strictly increasing on `(0, 1]`, and the
/// decoupled zero map, for which the social cost separates by degree.
fn certify_vartheta(exposure: &ExposureModel) -> Result<()> {
    if is_vartheta_increasing(exposure, 1.0) || exposure.is_decoupled(1.0) {
        Ok(())
    } else {
        Err(Error::VarthetaNotMonotone { z_max: 1.0 })
    }
}

/// Mass-weighted sum of per-degree costs over the normalized census.
pub fn social_cost(a: &StrategyProfile, s: &PopulationVector, game: &Game) -> Result<f64> {
    let s = s.normalize();
    let rho = neighbor_vulnerability(a, &s, &game.infection)?;
    let e = game.exposure.gplus(rho);
    Ok(s
        .masses()
        .iter()
        .enumerate()
        .map(|(i, m)| m * cost_at(game, i + 1, e, a.at(i + 1)))
        .sum())
}

/// Cost of a degree-`d` agent in the modified game,
/// `(τ_A + d·ϑ(ρ))·L·p(a_d) + a_d`.
pub fn modified_cost(a: &StrategyProfile, d: usize, s: &PopulationVector, game: &Game) -> Result<f64> {
    check_degree(d, a.d_max())?;
    let rho = neighbor_vulnerability(a, s, &game.infection)?;
    Ok(cost_at(game, d, game.exposure.vartheta(rho), a.at(d)))
}

/// Analytic gradient of [`social_cost`]:
/// `∂/∂a_d = s_d·((τ_A + d·ϑ(ρ))·L·ṗ(a_d) + 1)` on the normalized census.
pub fn social_cost_gradient(a: &StrategyProfile, s: &PopulationVector, game: &Game) -> Result<Vec<f64>> {
    let s = s.normalize();
    let rho = neighbor_vulnerability(a, &s, &game.infection)?;
    Ok(stationarity(a, &s, game, rho))
}

fn stationarity(a: &StrategyProfile, s: &PopulationVector, game: &Game, rho: f64) -> Vec<f64> {
    let theta = game.exposure.vartheta(rho);
    let tau = game.params.tau_a;
    let loss = game.loss();
    s.masses()
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let d = (i + 1) as f64;
            m * ((tau + d * theta) * loss * game.infection.dp(a.at(i + 1)) + 1.0)
        })
        .collect()
}

/// The global minimizer of social cost, computed as the equilibrium of the
/// modified game.
///
/// Refuses with [`Error::VarthetaNotMonotone`] when `ϑ` is not strictly
/// increasing: the modified game may then have several equilibria and none is
/// certified optimal.
pub fn solve_social_optimum(
    s: &PopulationVector,
    game: &Game,
    settings: &FixedPointSettings,
) -> Result<EquilibriumResult> {
    certify_vartheta(&game.exposure)?;
    solve_with(s, game, |z| game.exposure.vartheta(z), settings)
}

/// Exhaustive grid search over all profiles followed by coordinate-descent
/// refinement. Only practical for a handful of degrees; uses
/// [`DEFAULT_GRID_BUDGET`].
pub fn brute_force_minimizer(s: &PopulationVector, game: &Game, grid_step: f64) -> Result<StrategyProfile> {
    brute_force_minimizer_with_budget(s, game, grid_step, DEFAULT_GRID_BUDGET)
}

pub fn brute_force_minimizer_with_budget(
    s: &PopulationVector,
    game: &Game,
    grid_step: f64,
    budget: u64,
) -> Result<StrategyProfile> {
    let params = &game.params;
    if !(grid_step > 0.0 && grid_step.is_finite()) {
        return Err(Error::invalid(format!("grid step must be positive, got {grid_step}")));
    }
    let s = s.normalize();
    let d_max = s.d_max();
    if d_max > 64 {
        return Err(Error::invalid("grid search supports at most 64 degrees"));
    }
    let per_axis = ((params.i_max - params.i_min) / grid_step).ceil() as u128 + 1;
    let points = per_axis
        .checked_pow(d_max as u32)
        .filter(|p| *p <= budget as u128)
        .ok_or(Error::BudgetExceeded {
            points: per_axis.saturating_pow(d_max as u32),
            budget,
        })?;

    let grid: Vec<f64> = (0..per_axis as usize)
        .map(|k| (params.i_min + k as f64 * grid_step).min(params.i_max))
        .collect();
    let probs: Vec<f64> = grid.iter().map(|&a| game.infection.p(a)).collect();
    let weights = weighted_fraction(&s);
    let masses = s.masses();
    let n = per_axis as u64;

    // Flat index decodes with degree 1 as the most significant digit, so the
    // smallest flat index among ties is the lexicographically smallest profile.
    let cost_of = |flat: u64| -> f64 {
        let mut rest = flat;
        let mut idx = [0usize; 64];
        for d in (0..d_max).rev() {
            idx[d] = (rest % n) as usize;
            rest /= n;
        }
        let rho: f64 = (0..d_max).map(|d| weights[d] * probs[idx[d]]).sum();
        let e = game.exposure.gplus(rho);
        (0..d_max)
            .map(|d| {
                let r = params.tau_a + (d + 1) as f64 * e;
                masses[d] * (r * game.loss() * probs[idx[d]] + grid[idx[d]])
            })
            .sum()
    };

    let (_, best) = (0..points as u64)
        .into_par_iter()
        .map(|flat| (cost_of(flat), flat))
        .min_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)))
        .expect("grid is nonempty");

    let mut profile = vec![0.0; d_max];
    let mut rest = best;
    for d in (0..d_max).rev() {
        profile[d] = grid[(rest % n) as usize];
        rest /= n;
    }
    coordinate_descent(&mut profile, &s, game, grid_step);
    StrategyProfile::new(profile, params)
}

/// Cyclic golden-section line searches, one coordinate at a time, until no
/// coordinate moves by more than `1e-10`.
fn coordinate_descent(profile: &mut [f64], s: &PopulationVector, game: &Game, step: f64) {
    const MAX_SWEEPS: usize = 20_000;
    const STOP: f64 = 1e-10;
    let weights = weighted_fraction(s);
    let params = game.params;
    let mut probs: Vec<f64> = profile.iter().map(|&a| game.infection.p(a)).collect();
    let mut widths = vec![step; profile.len()];

    for _ in 0..MAX_SWEEPS {
        let mut largest = 0.0_f64;
        for d in 0..profile.len() {
            if s.masses()[d] == 0.0 {
                continue;
            }
            let line = |x: f64| {
                let p_x = game.infection.p(x);
                let rho: f64 = weights
                    .iter()
                    .zip(&probs)
                    .enumerate()
                    .map(|(j, (w, p))| w * if j == d { p_x } else { *p })
                    .sum();
                let e = game.exposure.gplus(rho);
                s.masses()
                    .iter()
                    .enumerate()
                    .map(|(j, m)| {
                        let (a, p) = if j == d { (x, p_x) } else { (profile[j], probs[j]) };
                        m * ((params.tau_a + (j + 1) as f64 * e) * game.loss() * p + a)
                    })
                    .sum::<f64>()
            };
            let lo = (profile[d] - widths[d]).max(params.i_min);
            let hi = (profile[d] + widths[d]).min(params.i_max);
            let current = line(profile[d]);
            let candidate = golden_section(&line, lo, hi, 1e-12);
            let moved = if line(candidate) < current {
                let delta = (candidate - profile[d]).abs();
                profile[d] = candidate;
                probs[d] = game.infection.p(candidate);
                delta
            } else {
                0.0
            };
            widths[d] = (4.0 * moved).clamp(1e-7, step);
            largest = largest.max(moved);
        }
        if largest < STOP {
            break;
        }
    }
}

fn golden_section<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        if x1 >= x2 {
            break;
        }
    }
    // endpoints matter when the minimum sits on a bound
    [lo, 0.5 * (lo + hi), hi]
        .into_iter()
        .min_by(|a, b| f(*a).total_cmp(&f(*b)))
        .unwrap()
}

/// First-order conditions of the social-cost minimization at a profile.
#[derive(Debug, Clone, Serialize)]
pub struct KktReport {
    /// `∂/∂a_d` of social cost.
    pub stationarity: Vec<f64>,
    /// Stationarity left over after crediting bound multipliers; zero wherever
    /// the KKT conditions hold.
    pub residuals: Vec<f64>,
    pub at_lower: Vec<bool>,
    pub at_upper: Vec<bool>,
    /// Lower-bound multipliers, normalized by population mass.
    pub lambda: Vec<f64>,
    /// Upper-bound multipliers, normalized by population mass.
    pub mu: Vec<f64>,
}

impl KktReport {
    pub fn max_abs_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0, |acc, r| acc.max(r.abs()))
    }
}

pub fn kkt_residual(a: &StrategyProfile, s: &PopulationVector, game: &Game) -> Result<KktReport> {
    let s = s.normalize();
    let rho = neighbor_vulnerability(a, &s, &game.infection)?;
    let stationarity = stationarity(a, &s, game, rho);
    let params = &game.params;
    let n = a.d_max();
    let mut report = KktReport {
        residuals: Vec::with_capacity(n),
        at_lower: Vec::with_capacity(n),
        at_upper: Vec::with_capacity(n),
        lambda: vec![0.0; n],
        mu: vec![0.0; n],
        stationarity,
    };
    for (i, &g) in report.stationarity.iter().enumerate() {
        let x = a.investments()[i];
        let mass = s.masses()[i];
        let lower = (x - params.i_min).abs() <= BOUND_TOL * (1.0 + params.i_min.abs());
        let upper = (params.i_max - x).abs() <= BOUND_TOL * (1.0 + params.i_max.abs());
        let residual = if lower && g >= 0.0 {
            report.lambda[i] = if mass > 0.0 { g / mass } else { 0.0 };
            0.0
        } else if upper && g <= 0.0 {
            report.mu[i] = if mass > 0.0 { -g / mass } else { 0.0 };
            0.0
        } else {
            g
        };
        report.residuals.push(residual);
        report.at_lower.push(lower);
        report.at_upper.push(upper);
    }
    Ok(report)
}

/// Per-degree penalties that turn the Nash equilibrium into the social
/// optimum: the extra exposure `ġ⁺(ρ)·ρ` times a node's degree and expected
/// loss, evaluated at the optimum.
#[derive(Debug, Clone, Serialize)]
pub struct PenaltySchedule {
    pub penalties: Vec<f64>,
    /// Expected losses from indirect attacks at the optimum, `d·g⁺(ρ)·L·p(a_d)`.
    pub indirect_losses: Vec<f64>,
    pub rho: f64,
    pub profile: StrategyProfile,
}

pub fn penalty_schedule(s: &PopulationVector, game: &Game, settings: &FixedPointSettings) -> Result<PenaltySchedule> {
    let optimum = solve_social_optimum(s, game, settings)?;
    let rho = optimum.rho;
    let extra = game.exposure.dgplus(rho) * rho;
    let exposure = game.exposure.gplus(rho);
    let (penalties, indirect_losses) = optimum
        .profile
        .investments()
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let d = (i + 1) as f64;
            let loss = game.infection.expected_loss(a);
            (d * extra * loss, d * exposure * loss)
        })
        .unzip();
    Ok(PenaltySchedule {
        penalties,
        indirect_losses,
        rho,
        profile: optimum.profile,
    })
}

/// Social cost at the Nash equilibrium over the minimum social cost. The
/// equilibrium is unique, so no search over equilibria is needed.
pub fn price_of_anarchy(s: &PopulationVector, game: &Game, settings: &FixedPointSettings) -> Result<f64> {
    let ne = solve_ne(s, game, settings)?;
    let so = solve_social_optimum(s, game, settings)?;
    Ok(ne.social_cost / so.social_cost)
}
