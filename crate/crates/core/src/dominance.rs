//! First-order stochastic dominance of weighted degree distributions, the
//! likelihood-ratio condition that implies it, and a driver that checks the
//! resulting monotonicity of equilibrium and optimal exposures.

use serde::Serialize;

use crate::equilibrium::{solve_ne, FixedPointSettings};
use crate::error::{Error, Result};
use crate::model::{weighted_fraction, Game, PopulationVector};
use crate::social::solve_social_optimum;

/// Slack absorbing normalization rounding in prefix-sum comparisons.
pub const DOMINANCE_SLACK: f64 = 1e-12;

/// Slack for the exposure and investment orderings in a sweep.
pub const SWEEP_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DominanceVerdict {
    pub holds: bool,
    /// Degree of the first failing comparison.
    pub first_violation_degree: Option<usize>,
    pub strict_somewhere: bool,
}

fn same_len(s1: &PopulationVector, s2: &PopulationVector) -> Result<()> {
    if s1.d_max() != s2.d_max() {
        return Err(Error::DimensionMismatch {
            expected: s1.d_max(),
            found: s2.d_max(),
        });
    }
    Ok(())
}

/// Whether `w(s1)` first-order stochastically dominates `w(s2)`:
/// `Σ_{ℓ≤d} w_ℓ(s1) ≤ Σ_{ℓ≤d} w_ℓ(s2)` for every `d`.
pub fn fosd_weighted(s1: &PopulationVector, s2: &PopulationVector) -> Result<DominanceVerdict> {
    same_len(s1, s2)?;
    Ok(prefix_dominance(&weighted_fraction(s1), &weighted_fraction(s2)))
}

/// Same comparison on the unweighted degree distributions.
pub fn fosd_unweighted(s1: &PopulationVector, s2: &PopulationVector) -> Result<DominanceVerdict> {
    same_len(s1, s2)?;
    Ok(prefix_dominance(s1.normalize().masses(), s2.normalize().masses()))
}

fn prefix_dominance(f1: &[f64], f2: &[f64]) -> DominanceVerdict {
    let (mut c1, mut c2) = (0.0, 0.0);
    let mut strict = false;
    for (i, (x, y)) in f1.iter().zip(f2).enumerate() {
        c1 += x;
        c2 += y;
        if c1 > c2 + DOMINANCE_SLACK {
            return DominanceVerdict {
                holds: false,
                first_violation_degree: Some(i + 1),
                strict_somewhere: strict,
            };
        }
        strict |= c1 < c2 - DOMINANCE_SLACK;
    }
    DominanceVerdict {
        holds: true,
        first_violation_degree: None,
        strict_somewhere: strict,
    }
}

/// Whether `s2_d / s1_d` is nonincreasing in `d`, the sufficient condition
/// for [`fosd_weighted`].
///
/// Zero masses: `x/0` with `x > 0` is `+∞`, which only passes when nothing
/// finite precedes it; `0/0` entries are skipped.
pub fn likelihood_ratio_condition(s1: &PopulationVector, s2: &PopulationVector) -> Result<DominanceVerdict> {
    same_len(s1, s2)?;
    let mut prev: Option<(usize, f64)> = None;
    let mut strict = false;
    for (i, (a, b)) in s1.masses().iter().zip(s2.masses()).enumerate() {
        let ratio = match (*a == 0.0, *b == 0.0) {
            (true, true) => continue,
            (true, false) => f64::INFINITY,
            _ => b / a,
        };
        if let Some((d, r)) = prev {
            let exceeds = if r.is_infinite() {
                false
            } else {
                ratio > r * (1.0 + DOMINANCE_SLACK) + DOMINANCE_SLACK
            };
            if exceeds {
                return Ok(DominanceVerdict {
                    holds: false,
                    first_violation_degree: Some(d),
                    strict_somewhere: strict,
                });
            }
            strict |= ratio < r * (1.0 - DOMINANCE_SLACK) - DOMINANCE_SLACK || (r.is_infinite() && ratio.is_finite());
        }
        prev = Some((i + 1, ratio));
    }
    Ok(DominanceVerdict {
        holds: true,
        first_violation_degree: None,
        strict_somewhere: strict,
    })
}

/// For sequences whose ratios `b_ℓ/a_ℓ` are nonincreasing, every prefix-sum
/// ratio is at least the full-sum ratio. Checks that conclusion:
/// `Σ_{ℓ≤k} b_ℓ / Σ_{ℓ≤k} a_ℓ ≥ Σ b / Σ a` for all `k`.
pub fn prefix_ratio_check(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::invalid("sequences need length at least 2"));
    }
    if a.iter().chain(b).any(|x| !(*x >= 0.0)) {
        return Err(Error::invalid("sequences must be nonnegative"));
    }
    let total_a: f64 = a.iter().sum();
    let total_b: f64 = b.iter().sum();
    let (mut pa, mut pb) = (0.0, 0.0);
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        pa += x;
        pb += y;
        if pa == 0.0 {
            return Err(Error::invalid(format!("prefix of length {} has zero denominator", k + 1)));
        }
        // pb/pa >= total_b/total_a, cross-multiplied
        if pb * total_a < total_b * pa - DOMINANCE_SLACK * (total_b * pa).abs() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Checks on one consecutive pair of a census family.
#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    /// Index of the first census of the pair.
    pub index: usize,
    pub dominance: DominanceVerdict,
    /// Exposures `(first, second)` at the Nash equilibria.
    pub e_ne: (f64, f64),
    /// Exposures `(first, second)` at the social optima.
    pub e_so: (f64, f64),
    pub ne_exposure_ordered: bool,
    pub so_exposure_ordered: bool,
    /// `a_NE(first) ≤ a_NE(second)` elementwise.
    pub ne_profile_ordered: bool,
    /// Dominance is strict and the second profile is interior, so the
    /// exposure orderings should be strict.
    pub strict_expected: bool,
    pub ne_strict: bool,
    pub so_strict: bool,
}

impl PairCheck {
    pub fn holds(&self) -> bool {
        self.ne_exposure_ordered
            && self.so_exposure_ordered
            && self.ne_profile_ordered
            && (!self.strict_expected || (self.ne_strict && self.so_strict))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MonotonicityReport {
    /// Pairs where the first census dominates the second.
    pub checked: Vec<PairCheck>,
    /// Indices of pairs skipped because dominance failed.
    pub flagged: Vec<usize>,
}

impl MonotonicityReport {
    pub fn all_hold(&self) -> bool {
        self.checked.iter().all(PairCheck::holds)
    }
}

/// For each consecutive pair `(s_i, s_{i+1})` in which `w(s_i)` dominates
/// `w(s_{i+1})`, checks that exposures at the equilibrium and at the optimum
/// do not decrease and that equilibrium investments do not decrease
/// elementwise. Pairs failing the dominance precondition are flagged.
pub fn monotonicity_sweep(
    family: &[PopulationVector],
    game: &Game,
    settings: &FixedPointSettings,
) -> Result<MonotonicityReport> {
    let solved = family
        .iter()
        .map(|s| Ok((solve_ne(s, game, settings)?, solve_social_optimum(s, game, settings)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = MonotonicityReport {
        checked: Vec::new(),
        flagged: Vec::new(),
    };
    for (i, pair) in family.windows(2).enumerate() {
        let dominance = fosd_weighted(&pair[0], &pair[1])?;
        if !dominance.holds {
            report.flagged.push(i);
            continue;
        }
        let (ne1, so1) = &solved[i];
        let (ne2, so2) = &solved[i + 1];
        let strict_expected = dominance.strict_somewhere
            && ne2.profile.is_interior(&game.params)
            && so2.profile.is_interior(&game.params);
        report.checked.push(PairCheck {
            index: i,
            dominance,
            e_ne: (ne1.exposure, ne2.exposure),
            e_so: (so1.exposure, so2.exposure),
            ne_exposure_ordered: ne1.exposure <= ne2.exposure + SWEEP_SLACK,
            so_exposure_ordered: so1.exposure <= so2.exposure + SWEEP_SLACK,
            ne_profile_ordered: ne1
                .profile
                .investments()
                .iter()
                .zip(ne2.profile.investments())
                .all(|(x, y)| *x <= y + SWEEP_SLACK),
            strict_expected,
            ne_strict: ne1.exposure < ne2.exposure,
            so_strict: so1.exposure < so2.exposure,
        });
    }
    Ok(report)
}
