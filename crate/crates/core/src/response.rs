//! Best response of a single agent.
//!
//! An agent expecting `r` attacks minimizes `r·L·p(a) + a` over the
//! investment interval. The objective is strictly convex, so the minimizer is
//! unique and nondecreasing in `r`.

use crate::error::{Error, Result};
use crate::model::{GameParams, InfectionModel};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSolveSettings {
    /// Convergence tolerance on the argument.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for ScalarSolveSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 200,
        }
    }
}

/// Minimizes a strictly convex function on `[lo, hi]` given its derivative,
/// by bisecting on the derivative's sign. Returns a boundary point when the
/// derivative does not change sign.
pub fn minimize_scalar_convex<F>(
    derivative: F,
    lo: f64,
    hi: f64,
    settings: &ScalarSolveSettings,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(lo < hi) {
        return Err(Error::invalid(format!("empty interval [{lo}, {hi}]")));
    }
    if !(settings.tolerance > 0.0) || settings.max_iterations == 0 {
        return Err(Error::invalid("scalar solver needs tolerance > 0 and max_iterations >= 1"));
    }
    if derivative(lo) >= 0.0 {
        return Ok(lo);
    }
    if derivative(hi) <= 0.0 {
        return Ok(hi);
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..settings.max_iterations {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= settings.tolerance || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        let slope = derivative(mid);
        if slope.is_nan() {
            return Err(Error::SolverDiverged(format!("derivative is NaN at {mid}")));
        }
        if slope > 0.0 {
            hi = mid;
        } else if slope < 0.0 {
            lo = mid;
        } else {
            return Ok(mid);
        }
    }
    if hi - lo <= settings.tolerance {
        return Ok(0.5 * (lo + hi));
    }
    Err(Error::SolverDiverged(format!(
        "bisection did not reach width {} in {} iterations",
        settings.tolerance, settings.max_iterations
    )))
}

/// Unique minimizer of `r·L·p(a) + a` over the investment interval.
///
/// Power-law infection models use the closed form
/// `a = (r·L·ζ)^(1/(ζ+1)) − 1`, clamped to the interval.
pub fn optimal_investment(r: f64, infection: &InfectionModel, params: &GameParams) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::invalid(format!("expected attacks must be nonnegative, got {r}")));
    }
    Ok(match infection.zeta() {
        Some(zeta) => power_law_investment(r, zeta, infection.loss(), params),
        None => minimize_scalar_convex(
            |a| r * infection.loss() * infection.dp(a) + 1.0,
            params.i_min,
            params.i_max,
            &ScalarSolveSettings::default(),
        )?,
    })
}

pub(crate) fn power_law_investment(r: f64, zeta: f64, loss: f64, params: &GameParams) -> f64 {
    let interior = (r * loss * zeta).powf(1.0 / (zeta + 1.0)) - 1.0;
    params.clamp(interior)
}

/// Infection probability at the best response, `p(I_opt(r))`.
pub fn p_star(r: f64, infection: &InfectionModel, params: &GameParams) -> Result<f64> {
    optimal_investment(r, infection, params).map(|a| infection.p(a))
}
