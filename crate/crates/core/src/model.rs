//! Domain types shared by every solver: the degree census, game parameters,
//! the infection and exposure maps, and pure strategy profiles.
//!
//! Degrees run from 1 to `d_max`. Vectors are stored 0-based, so degree `d`
//! lives at index `d - 1`.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Tolerance for "sums to one" on normalized censuses.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Smallest argument at which exposure derivatives are evaluated. Power maps
/// with exponent below one are not differentiable at zero.
pub const DERIVATIVE_FLOOR: f64 = 1e-300;

/// Number of points used when checking a custom infection model for strict
/// monotonicity and midpoint convexity.
const INFECTION_CHECK_POINTS: usize = 100;

/// Population masses indexed by degree.
///
/// Masses are kept as given; solvers normalize on use, so two censuses that
/// differ by a positive factor describe the same game.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct PopulationVector {
    masses: Vec<f64>,
}

impl PopulationVector {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::invalid("census needs at least one degree"));
        }
        if masses.iter().any(|m| !m.is_finite() || *m < 0.0) {
            return Err(Error::DegenerateCensus);
        }
        if !masses.iter().any(|m| *m > 0.0) {
            return Err(Error::DegenerateCensus);
        }
        Ok(Self { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn d_max(&self) -> usize {
        self.masses.len()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// Rescales so the masses sum to one.
    pub fn normalize(&self) -> Self {
        let total = self.total();
        Self {
            masses: self.masses.iter().map(|m| m / total).collect(),
        }
    }

    pub fn is_normalized(&self) -> bool {
        (self.total() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::invalid(format!("scale factor must be positive, got {factor}")));
        }
        Self::new(self.masses.iter().map(|m| m * factor).collect())
    }

    pub(crate) fn check_len(&self, len: usize) -> Result<()> {
        if self.d_max() != len {
            return Err(Error::DimensionMismatch {
                expected: self.d_max(),
                found: len,
            });
        }
        Ok(())
    }
}

/// Fraction of the population at each degree.
pub fn degree_fraction(s: &PopulationVector) -> Vec<f64> {
    s.normalize().masses
}

/// Degree distribution of a randomly chosen neighbor: `w_d ∝ d·s_d`.
pub fn weighted_fraction(s: &PopulationVector) -> Vec<f64> {
    let weights: Vec<f64> = s
        .masses
        .iter()
        .enumerate()
        .map(|(i, m)| (i + 1) as f64 * m)
        .collect();
    let total: f64 = weights.iter().sum();
    weights.into_iter().map(|x| x / total).collect()
}

pub fn avg_degree(s: &PopulationVector) -> f64 {
    degree_fraction(s)
        .iter()
        .enumerate()
        .map(|(i, f)| (i + 1) as f64 * f)
        .sum()
}

/// Truncated power-law census, `s_d ∝ d^(-alpha)` for `d = 1..=d_max`.
pub fn power_law_census(alpha: f64, d_max: usize) -> Result<PopulationVector> {
    if d_max < 1 {
        return Err(Error::invalid("d_max must be at least 1"));
    }
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must be nonnegative, got {alpha}")));
    }
    let raw: Vec<f64> = (1..=d_max).map(|d| (d as f64).powf(-alpha)).collect();
    Ok(PopulationVector::new(raw)?.normalize())
}

/// Attack probabilities and the investment interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameParams {
    pub tau_a: f64,
    pub beta_ia: f64,
    pub i_min: f64,
    pub i_max: f64,
}

impl GameParams {
    pub fn new(tau_a: f64, beta_ia: f64, i_min: f64, i_max: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&tau_a) {
            return Err(Error::invalid(format!("tau_a must lie in [0, 1], got {tau_a}")));
        }
        if !(beta_ia > 0.0 && beta_ia <= 1.0) {
            return Err(Error::invalid(format!("beta_ia must lie in (0, 1], got {beta_ia}")));
        }
        if !(i_min >= 0.0 && i_min < i_max && i_max.is_finite()) {
            return Err(Error::invalid(format!(
                "investment bounds must satisfy 0 <= i_min < i_max < inf, got [{i_min}, {i_max}]"
            )));
        }
        Ok(Self {
            tau_a,
            beta_ia,
            i_min,
            i_max,
        })
    }

    pub fn clamp(&self, a: f64) -> f64 {
        a.clamp(self.i_min, self.i_max)
    }

    pub fn contains(&self, a: f64) -> bool {
        (self.i_min..=self.i_max).contains(&a)
    }
}

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum InfectionForm {
    PowerLaw { zeta: f64 },
    Custom { p: ScalarFn, dp: ScalarFn },
}

/// Infection probability `p(a)` of an agent investing `a`, together with the
/// loss `L` it suffers per infection.
#[derive(Clone)]
pub struct InfectionModel {
    form: InfectionForm,
    loss: f64,
}

impl fmt::Debug for InfectionModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            InfectionForm::PowerLaw { zeta } => f
                .debug_struct("InfectionModel::PowerLaw")
                .field("zeta", zeta)
                .field("loss", &self.loss)
                .finish(),
            InfectionForm::Custom { .. } => f
                .debug_struct("InfectionModel::Custom")
                .field("loss", &self.loss)
                .finish_non_exhaustive(),
        }
    }
}

impl InfectionModel {
    /// `p(a) = (1 + a)^(-zeta)`.
    pub fn power_law(zeta: f64, loss: f64) -> Result<Self> {
        if !(zeta > 0.0 && zeta.is_finite()) {
            return Err(Error::invalid(format!("zeta must be positive, got {zeta}")));
        }
        check_loss(loss)?;
        Ok(Self {
            form: InfectionForm::PowerLaw { zeta },
            loss,
        })
    }

    /// A user-supplied infection probability and its exact derivative. Shape
    /// requirements are checked against the investment interval when the
    /// model is placed in a [`Game`].
    pub fn custom<P, D>(p: P, dp: D, loss: f64) -> Result<Self>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_loss(loss)?;
        Ok(Self {
            form: InfectionForm::Custom {
                p: Arc::new(p),
                dp: Arc::new(dp),
            },
            loss,
        })
    }

    pub fn loss(&self) -> f64 {
        self.loss
    }

    pub fn zeta(&self) -> Option<f64> {
        match self.form {
            InfectionForm::PowerLaw { zeta } => Some(zeta),
            InfectionForm::Custom { .. } => None,
        }
    }

    pub fn p(&self, a: f64) -> f64 {
        match &self.form {
            InfectionForm::PowerLaw { zeta } => (1.0 + a).powf(-zeta),
            InfectionForm::Custom { p, .. } => p(a),
        }
    }

    pub fn dp(&self, a: f64) -> f64 {
        match &self.form {
            InfectionForm::PowerLaw { zeta } => -zeta * (1.0 + a).powf(-zeta - 1.0),
            InfectionForm::Custom { dp, .. } => dp(a),
        }
    }

    /// `L(a) = L·p(a)`.
    pub fn expected_loss(&self, a: f64) -> f64 {
        self.loss * self.p(a)
    }

    /// Grid check of the shape assumptions on `[lo, hi]`: values in `[0, 1]`,
    /// strictly decreasing, strictly midpoint-convex.
    pub fn check_shape(&self, lo: f64, hi: f64) -> Result<()> {
        let n = INFECTION_CHECK_POINTS;
        let grid: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        let values: Vec<f64> = grid.iter().map(|&a| self.p(a)).collect();
        for (a, v) in grid.iter().zip(&values) {
            if !(0.0..=1.0).contains(v) {
                return Err(Error::invalid(format!("p({a}) = {v} is not a probability")));
            }
        }
        for i in 0..n - 1 {
            let (a1, a2) = (grid[i], grid[i + 1]);
            let (p1, p2) = (values[i], values[i + 1]);
            if p2 >= p1 {
                return Err(Error::invalid(format!(
                    "p is not strictly decreasing between {a1} and {a2}"
                )));
            }
            if self.p(0.5 * (a1 + a2)) >= 0.5 * (p1 + p2) {
                return Err(Error::invalid(format!(
                    "p is not strictly convex between {a1} and {a2}"
                )));
            }
        }
        Ok(())
    }
}

fn check_loss(loss: f64) -> Result<()> {
    if !(loss > 0.0 && loss.is_finite()) {
        return Err(Error::invalid(format!("loss must be positive, got {loss}")));
    }
    Ok(())
}

#[derive(Clone)]
enum ExposureForm {
    Power { coef: f64, exponent: f64 },
    Log { coef: f64 },
    Custom { g: ScalarFn, dg: ScalarFn },
}

/// Risk exposure `g⁺(ρ)`: indirect attacks a node sees per neighbor as a
/// function of neighbor vulnerability `ρ`. Attack probabilities are already
/// folded into the map.
#[derive(Clone)]
pub struct ExposureModel {
    form: ExposureForm,
}

impl fmt::Debug for ExposureModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.form {
            ExposureForm::Power { coef, exponent } => f
                .debug_struct("ExposureModel::Power")
                .field("coef", coef)
                .field("exponent", exponent)
                .finish(),
            ExposureForm::Log { coef } => f
                .debug_struct("ExposureModel::Log")
                .field("coef", coef)
                .finish(),
            ExposureForm::Custom { .. } => f.debug_struct("ExposureModel::Custom").finish_non_exhaustive(),
        }
    }
}

impl ExposureModel {
    /// `g⁺(z) = coef·z^exponent`.
    pub fn power(coef: f64, exponent: f64) -> Result<Self> {
        if !(coef > 0.0 && coef.is_finite()) {
            return Err(Error::invalid(format!("exposure coefficient must be positive, got {coef}")));
        }
        if !(exponent > 0.0 && exponent.is_finite()) {
            return Err(Error::invalid(format!("exposure exponent must be positive, got {exponent}")));
        }
        Ok(Self {
            form: ExposureForm::Power { coef, exponent },
        })
    }

    /// `g⁺(z) = coef·ln(1 + z)`.
    pub fn log(coef: f64) -> Result<Self> {
        if !(coef > 0.0 && coef.is_finite()) {
            return Err(Error::invalid(format!("exposure coefficient must be positive, got {coef}")));
        }
        Ok(Self {
            form: ExposureForm::Log { coef },
        })
    }

    /// A user-supplied exposure map and its exact derivative. Only `g(0) = 0`
    /// is enforced here; monotonicity is the caller's responsibility, which
    /// lets tests build degenerate maps.
    pub fn custom<G, D>(g: G, dg: D) -> Result<Self>
    where
        G: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let at_zero = g(0.0);
        if at_zero != 0.0 {
            return Err(Error::invalid(format!("exposure map must vanish at zero, got {at_zero}")));
        }
        Ok(Self {
            form: ExposureForm::Custom {
                g: Arc::new(g),
                dg: Arc::new(dg),
            },
        })
    }

    /// The zero map. Populations no longer interact, so equilibrium and
    /// social optimum coincide.
    pub fn decoupled() -> Self {
        Self {
            form: ExposureForm::Custom {
                g: Arc::new(|_| 0.0),
                dg: Arc::new(|_| 0.0),
            },
        }
    }

    pub fn exponent(&self) -> Option<f64> {
        match self.form {
            ExposureForm::Power { exponent, .. } => Some(exponent),
            _ => None,
        }
    }

    pub fn gplus(&self, z: f64) -> f64 {
        match &self.form {
            ExposureForm::Power { coef, exponent } => coef * z.powf(*exponent),
            ExposureForm::Log { coef } => coef * z.ln_1p(),
            ExposureForm::Custom { g, .. } => g(z),
        }
    }

    /// Derivative of `g⁺`, evaluated at `max(z, DERIVATIVE_FLOOR)`.
    pub fn dgplus(&self, z: f64) -> f64 {
        let z = z.max(DERIVATIVE_FLOOR);
        match &self.form {
            ExposureForm::Power { coef, exponent } => coef * exponent * z.powf(exponent - 1.0),
            ExposureForm::Log { coef } => coef / (1.0 + z),
            ExposureForm::Custom { dg, .. } => dg(z),
        }
    }

    /// Exposure perceived in the externality-internalizing game,
    /// `ϑ(z) = g⁺(z) + ġ⁺(z)·z`.
    pub fn vartheta(&self, z: f64) -> f64 {
        match &self.form {
            ExposureForm::Power { coef, exponent } => coef * (1.0 + exponent) * z.powf(*exponent),
            _ => self.gplus(z) + self.dgplus(z) * z,
        }
    }

    /// True when `g⁺` vanishes on a grid over `(0, z_max]`.
    pub fn is_decoupled(&self, z_max: f64) -> bool {
        match self.form {
            ExposureForm::Power { .. } | ExposureForm::Log { .. } => false,
            ExposureForm::Custom { .. } => {
                let n = 1000;
                (1..=n).all(|i| self.gplus(z_max * i as f64 / n as f64) == 0.0)
            }
        }
    }
}

/// Everything that defines a game apart from the census.
#[derive(Debug, Clone)]
pub struct Game {
    pub params: GameParams,
    pub infection: InfectionModel,
    pub exposure: ExposureModel,
}

impl Game {
    /// Bundles the models, rejecting custom infection maps that fail the
    /// shape check on the investment interval.
    pub fn new(params: GameParams, infection: InfectionModel, exposure: ExposureModel) -> Result<Self> {
        if infection.zeta().is_none() {
            infection.check_shape(params.i_min, params.i_max)?;
        }
        Ok(Self {
            params,
            infection,
            exposure,
        })
    }

    pub fn with_exposure(&self, exposure: ExposureModel) -> Self {
        Self {
            exposure,
            ..self.clone()
        }
    }

    pub fn loss(&self) -> f64 {
        self.infection.loss()
    }
}

/// One investment per degree.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct StrategyProfile {
    investments: Vec<f64>,
}

impl StrategyProfile {
    pub fn new(investments: Vec<f64>, params: &GameParams) -> Result<Self> {
        if investments.is_empty() {
            return Err(Error::invalid("profile needs at least one degree"));
        }
        if let Some((i, a)) = investments
            .iter()
            .enumerate()
            .find(|(_, a)| !params.contains(**a))
        {
            return Err(Error::invalid(format!(
                "investment {a} for degree {} lies outside [{}, {}]",
                i + 1,
                params.i_min,
                params.i_max
            )));
        }
        Ok(Self { investments })
    }

    pub fn uniform(a: f64, d_max: usize, params: &GameParams) -> Result<Self> {
        Self::new(vec![a; d_max], params)
    }

    pub fn investments(&self) -> &[f64] {
        &self.investments
    }

    pub fn d_max(&self) -> usize {
        self.investments.len()
    }

    /// Investment of degree `d` (1-based).
    pub fn at(&self, d: usize) -> f64 {
        self.investments[d - 1]
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.investments
    }

    /// Whether every investment lies strictly inside the interval.
    pub fn is_interior(&self, params: &GameParams) -> bool {
        self.investments
            .iter()
            .all(|&a| a > params.i_min && a < params.i_max)
    }
}

/// Outcome of an equilibrium solve.
#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumResult {
    pub profile: StrategyProfile,
    /// Neighbor vulnerability at the solution.
    pub rho: f64,
    /// Risk exposure `g⁺(rho)` of the original game.
    pub exposure: f64,
    /// Original-game cost of each degree class.
    pub per_degree_cost: Vec<f64>,
    pub social_cost: f64,
    pub iterations: usize,
    /// Width of the final bracket on `rho`.
    pub residual: f64,
}
