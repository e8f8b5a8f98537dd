//! Nash equilibrium of the population game.
//!
//! Populations interact only through the neighbor vulnerability
//! `ρ = w(s)ᵀp(a)`. Given `ρ`, every degree class best-responds to
//! `τ_A + d·g⁺(ρ)` expected attacks, which yields a profile and a new
//! vulnerability `Φ(ρ)`. `Φ` is nonincreasing, so `ρ − Φ(ρ)` is increasing,
//! nonpositive at 0 and nonnegative at 1, and the equilibrium is its unique
//! root. Bisection on `[0, 1]` always has a valid bracket.

use crate::error::{Error, Result};
use crate::model::{
    weighted_fraction, EquilibriumResult, Game, InfectionModel, PopulationVector, StrategyProfile,
};
use crate::response::{optimal_investment, power_law_investment};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointSettings {
    pub rho_tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FixedPointSettings {
    fn default() -> Self {
        Self {
            rho_tolerance: 1e-12,
            max_iterations: 400,
        }
    }
}

/// `ρ(a; s) = Σ_d w_d(s)·p(a_d)`.
pub fn neighbor_vulnerability(a: &StrategyProfile, s: &PopulationVector, infection: &InfectionModel) -> Result<f64> {
    s.check_len(a.d_max())?;
    Ok(weighted_fraction(s)
        .iter()
        .zip(a.investments())
        .map(|(w, &x)| w * infection.p(x))
        .sum())
}

/// Expected one-hop indirect attacks per directed edge, `τ_A·β_IA·ρ`.
pub fn gamma_avg(a: &StrategyProfile, s: &PopulationVector, game: &Game) -> Result<f64> {
    let rho = neighbor_vulnerability(a, s, &game.infection)?;
    Ok(game.params.tau_a * game.params.beta_ia * rho)
}

/// `e(a; s) = g⁺(ρ(a; s))`.
pub fn risk_exposure(a: &StrategyProfile, s: &PopulationVector, game: &Game) -> Result<f64> {
    let rho = neighbor_vulnerability(a, s, &game.infection)?;
    Ok(game.exposure.gplus(rho))
}

/// Cost of a degree-`d` agent playing its profile entry:
/// `(τ_A + d·e)·L·p(a_d) + a_d`.
pub fn agent_cost(a: &StrategyProfile, d: usize, s: &PopulationVector, game: &Game) -> Result<f64> {
    check_degree(d, a.d_max())?;
    let e = risk_exposure(a, s, game)?;
    Ok(cost_at(game, d, e, a.at(d)))
}

/// Cost of every degree class at the given profile.
pub fn per_degree_costs(a: &StrategyProfile, s: &PopulationVector, game: &Game) -> Result<Vec<f64>> {
    let e = risk_exposure(a, s, game)?;
    Ok((1..=a.d_max()).map(|d| cost_at(game, d, e, a.at(d))).collect())
}

pub(crate) fn cost_at(game: &Game, d: usize, exposure: f64, a: f64) -> f64 {
    (game.params.tau_a + d as f64 * exposure) * game.infection.expected_loss(a) + a
}

pub(crate) fn check_degree(d: usize, d_max: usize) -> Result<()> {
    if d == 0 || d > d_max {
        return Err(Error::invalid(format!("degree {d} outside 1..={d_max}")));
    }
    Ok(())
}

/// Best responses of all degree classes to a per-neighbor exposure.
pub fn best_response_profile(exposure: f64, d_max: usize, game: &Game) -> Result<StrategyProfile> {
    let investments = (1..=d_max)
        .map(|d| best_response(game, game.params.tau_a + d as f64 * exposure))
        .collect::<Result<Vec<_>>>()?;
    StrategyProfile::new(investments, &game.params)
}

fn best_response(game: &Game, r: f64) -> Result<f64> {
    match game.infection.zeta() {
        Some(zeta) => Ok(power_law_investment(r, zeta, game.loss(), &game.params)),
        None => optimal_investment(r, &game.infection, &game.params),
    }
}

/// `Φ(ρ)`: vulnerability induced when every class best-responds to
/// `τ_A + d·g⁺(ρ)`.
pub fn induced_vulnerability(rho: f64, s: &PopulationVector, game: &Game) -> Result<f64> {
    Map::new(s, game, |z| game.exposure.gplus(z)).eval(rho)
}

/// Fixed-point map in `ρ` for a given effective exposure function.
pub(crate) struct Map<'a, E: Fn(f64) -> f64> {
    weights: Vec<f64>,
    game: &'a Game,
    effective: E,
}

impl<'a, E: Fn(f64) -> f64> Map<'a, E> {
    pub(crate) fn new(s: &PopulationVector, game: &'a Game, effective: E) -> Self {
        Self {
            weights: weighted_fraction(s),
            game,
            effective,
        }
    }

    pub(crate) fn eval(&self, rho: f64) -> Result<f64> {
        let e = (self.effective)(rho);
        let tau = self.game.params.tau_a;
        let mut total = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            if *w == 0.0 {
                continue;
            }
            let a = best_response(self.game, tau + (i + 1) as f64 * e)?;
            total += w * self.game.infection.p(a);
        }
        Ok(total)
    }

    /// Bisection on `ρ − Φ(ρ)` over `[0, 1]`. Returns `(ρ*, iterations, width)`.
    pub(crate) fn solve(&self, settings: &FixedPointSettings) -> Result<(f64, usize, f64)> {
        if !(settings.rho_tolerance > 0.0) {
            return Err(Error::invalid("rho_tolerance must be positive"));
        }
        let h = |rho: f64| self.eval(rho).map(|phi| rho - phi);
        let (h_lo, h_hi) = (h(0.0)?, h(1.0)?);
        if !(h_lo <= 0.0 && h_hi >= 0.0) {
            return Err(Error::SolverDiverged(format!(
                "fixed-point bracket failed: h(0) = {h_lo}, h(1) = {h_hi}"
            )));
        }
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        let mut iterations = 0;
        while hi - lo > settings.rho_tolerance {
            if iterations == settings.max_iterations {
                return Err(Error::SolverDiverged(format!(
                    "bracket width {} after {} iterations",
                    hi - lo,
                    iterations
                )));
            }
            iterations += 1;
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let value = h(mid)?;
            if value.is_nan() {
                return Err(Error::SolverDiverged(format!("fixed-point map is NaN at {mid}")));
            }
            if value > 0.0 {
                hi = mid;
            } else if value < 0.0 {
                lo = mid;
            } else {
                lo = mid;
                hi = mid;
            }
        }
        Ok((0.5 * (lo + hi), iterations, hi - lo))
    }
}

/// Solves the fixed point for an arbitrary effective exposure map and packages
/// the result with original-game exposure and costs.
pub(crate) fn solve_with<E: Fn(f64) -> f64>(
    s: &PopulationVector,
    game: &Game,
    effective: E,
    settings: &FixedPointSettings,
) -> Result<EquilibriumResult> {
    let s = s.normalize();
    let map = Map::new(&s, game, &effective);
    let (root, iterations, residual) = map.solve(settings)?;
    let profile = best_response_profile(effective(root), s.d_max(), game)?;
    let rho = neighbor_vulnerability(&profile, &s, &game.infection)?;
    let exposure = game.exposure.gplus(rho);
    let per_degree_cost: Vec<f64> = (1..=s.d_max())
        .map(|d| cost_at(game, d, exposure, profile.at(d)))
        .collect();
    let social_cost = s.masses().iter().zip(&per_degree_cost).map(|(m, c)| m * c).sum();
    Ok(EquilibriumResult {
        profile,
        rho,
        exposure,
        per_degree_cost,
        social_cost,
        iterations,
        residual,
    })
}

/// The unique pure-strategy Nash equilibrium.
///
/// The profile is the best response to the bisection root; `rho`, `exposure`
/// and the costs are then evaluated at that profile.
pub fn solve_ne(s: &PopulationVector, game: &Game, settings: &FixedPointSettings) -> Result<EquilibriumResult> {
    solve_with(s, game, |z| game.exposure.gplus(z), settings)
}

/// Largest deviation of a profile from the best response to its own exposure:
/// `max_d |a_d − I_opt(τ_A + d·e(a; s))|`. Zero at a Nash equilibrium.
pub fn verify_ne(a: &StrategyProfile, s: &PopulationVector, game: &Game) -> Result<f64> {
    let e = risk_exposure(a, s, game)?;
    best_response_deviation(a, e, game)
}

pub(crate) fn best_response_deviation(a: &StrategyProfile, exposure: f64, game: &Game) -> Result<f64> {
    let best = best_response_profile(exposure, a.d_max(), game)?;
    Ok(a
        .investments()
        .iter()
        .zip(best.investments())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}
