//! Reference computations for the integration and acceptance tests.
//!
//! Everything here is written against the model definitions directly, not
//! against library internals: best responses come from bisection on a
//! hand-written marginal cost, equilibria from damped iteration on the
//! vulnerability map, and social costs from the plain mass-weighted sum.

#![allow(dead_code)]

use ids_popgame::model::{power_law_census, ExposureModel, Game, GameParams, InfectionModel, PopulationVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A power-law game with a power exposure map.
#[derive(Debug, Clone, Copy)]
pub struct Setup {
    pub zeta: f64,
    pub b: f64,
    pub coef: f64,
    pub tau: f64,
    pub loss: f64,
    pub i_min: f64,
    pub i_max: f64,
    pub alpha: f64,
    pub d_max: usize,
}

impl Setup {
    pub fn table(alpha: f64, b: f64, zeta: f64) -> Self {
        Self {
            zeta,
            b,
            coef: 30.0,
            tau: 0.7,
            loss: 10.0,
            i_min: 0.0,
            i_max: 1000.0,
            alpha,
            d_max: 20,
        }
    }

    /// ζ ∈ [1.1, 3], b ∈ [0.5, 2.5], τ_A ∈ (0, 1], α ∈ [0, 3], D ≤ 20.
    pub fn random(rng: &mut ChaCha8Rng) -> Self {
        Self {
            zeta: rng.gen_range(1.1..=3.0),
            b: rng.gen_range(0.5..=2.5),
            coef: rng.gen_range(1.0..=40.0),
            tau: 1.0 - rng.gen_range(0.0..1.0),
            loss: rng.gen_range(2.0..=20.0),
            i_min: 0.0,
            i_max: 1000.0,
            alpha: rng.gen_range(0.0..=3.0),
            d_max: rng.gen_range(1..=20),
        }
    }

    pub fn game(&self) -> Game {
        Game::new(
            GameParams::new(self.tau, 1.0, self.i_min, self.i_max).unwrap(),
            InfectionModel::power_law(self.zeta, self.loss).unwrap(),
            ExposureModel::power(self.coef, self.b).unwrap(),
        )
        .unwrap()
    }

    pub fn census(&self) -> PopulationVector {
        power_law_census(self.alpha, self.d_max).unwrap()
    }

    pub fn p(&self, a: f64) -> f64 {
        (1.0 + a).powf(-self.zeta)
    }

    pub fn g(&self, z: f64) -> f64 {
        self.coef * z.powf(self.b)
    }

    /// `g(z) + z·g'(z)` from the product rule, computed term by term.
    pub fn modified_g(&self, z: f64) -> f64 {
        let derivative = if z > 0.0 {
            self.coef * self.b * z.powf(self.b - 1.0)
        } else {
            0.0
        };
        self.g(z) + z * derivative
    }

    /// Minimizer of `r·L·p(a) + a` over `[i_min, i_max]` by bisection on the
    /// sign of `1 − r·L·ζ·(1+a)^{−ζ−1}`.
    pub fn best_response(&self, r: f64) -> f64 {
        let marginal = |a: f64| 1.0 - r * self.loss * self.zeta / (1.0 + a).powf(self.zeta + 1.0);
        if marginal(self.i_min) >= 0.0 {
            return self.i_min;
        }
        if marginal(self.i_max) <= 0.0 {
            return self.i_max;
        }
        let (mut lo, mut hi) = (self.i_min, self.i_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if marginal(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    pub fn profile_for(&self, exposure: f64) -> Vec<f64> {
        (1..=self.d_max)
            .map(|d| self.best_response(self.tau + d as f64 * exposure))
            .collect()
    }
}

/// `w_d = d·s_d / Σ d'·s_d'`.
pub fn weights(masses: &[f64]) -> Vec<f64> {
    let total: f64 = masses.iter().enumerate().map(|(i, m)| (i + 1) as f64 * m).sum();
    masses.iter().enumerate().map(|(i, m)| (i + 1) as f64 * m / total).collect()
}

pub fn rho_of(setup: &Setup, masses: &[f64], a: &[f64]) -> f64 {
    weights(masses).iter().zip(a).map(|(w, x)| w * setup.p(*x)).sum()
}

/// Mass-weighted total cost with masses normalized to one.
pub fn social_cost(setup: &Setup, masses: &[f64], a: &[f64]) -> f64 {
    let total: f64 = masses.iter().sum();
    let e = setup.g(rho_of(setup, masses, a));
    masses
        .iter()
        .zip(a)
        .enumerate()
        .map(|(i, (m, x))| m / total * ((setup.tau + (i + 1) as f64 * e) * setup.loss * setup.p(*x) + x))
        .sum()
}

/// Fixed point of `ρ ↦ Σ w_d p(BR(τ + d·effective(ρ)))` by damped iteration.
/// The damping factor is re-estimated every step from a finite-difference
/// slope and halved until the residual shrinks.
pub fn damped_fixed_point(setup: &Setup, masses: &[f64], effective: impl Fn(f64) -> f64, start: f64) -> f64 {
    let w = weights(masses);
    let phi = |rho: f64| -> f64 {
        let e = effective(rho);
        w.iter()
            .enumerate()
            .filter(|(_, w)| **w > 0.0)
            .map(|(i, w)| w * setup.p(setup.best_response(setup.tau + (i + 1) as f64 * e)))
            .sum()
    };
    let mut rho = start;
    for _ in 0..10_000 {
        let f = phi(rho) - rho;
        if f.abs() < 1e-15 {
            break;
        }
        let h = 1e-7;
        let (lo, hi) = ((rho - h).max(0.0), (rho + h).min(1.0));
        let slope = ((phi(hi) - phi(lo)) / (hi - lo)).min(0.0);
        let mut lambda = 1.0 / (1.0 - slope);
        let mut next = (rho + lambda * f).clamp(0.0, 1.0);
        let mut halvings = 0;
        while (phi(next) - next).abs() >= f.abs() && halvings < 60 {
            lambda *= 0.5;
            next = (rho + lambda * f).clamp(0.0, 1.0);
            halvings += 1;
        }
        if next == rho {
            break;
        }
        rho = next;
    }
    rho
}

/// Equilibrium vulnerability from the three starting points 0, ½ and 1.
pub fn ne_rho_multistart(setup: &Setup, masses: &[f64]) -> [f64; 3] {
    [0.0, 0.5, 1.0].map(|start| damped_fixed_point(setup, masses, |z| setup.g(z), start))
}

pub fn so_rho_multistart(setup: &Setup, masses: &[f64]) -> [f64; 3] {
    [0.0, 0.5, 1.0].map(|start| damped_fixed_point(setup, masses, |z| setup.modified_g(z), start))
}

/// Central finite-difference gradient of [`social_cost`].
pub fn fd_gradient(setup: &Setup, masses: &[f64], a: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|d| {
            let h = 1e-6 * (1.0 + a[d].abs());
            let mut up = a.to_vec();
            let mut down = a.to_vec();
            up[d] += h;
            down[d] -= h;
            (social_cost(setup, masses, &up) - social_cost(setup, masses, &down)) / (2.0 * h)
        })
        .collect()
}

pub fn max_abs_diff(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

/// A random nonnegative census of length `d_max` with at least one positive
/// entry; roughly a third of the entries are zero.
pub fn random_masses(rng: &mut ChaCha8Rng, d_max: usize) -> Vec<f64> {
    loop {
        let m: Vec<f64> = (0..d_max)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..1.0) })
            .collect();
        if m.iter().any(|x| *x > 0.0) {
            return m;
        }
    }
}

/// A pair `(s1, s2)` with `s2_d / s1_d` nonincreasing in `d`, built from a
/// strictly positive `s1` and a nonincreasing positive ratio sequence.
pub fn likelihood_ratio_pair(rng: &mut ChaCha8Rng, d_max: usize) -> (Vec<f64>, Vec<f64>) {
    let s1: Vec<f64> = (0..d_max).map(|_| rng.gen_range(0.01..1.0)).collect();
    let mut ratios: Vec<f64> = (0..d_max).map(|_| rng.gen_range(0.01..5.0)).collect();
    ratios.sort_by(|a, b| b.total_cmp(a));
    let s2 = s1.iter().zip(&ratios).map(|(a, r)| a * r).collect();
    (s1, s2)
}

/// A unweighted-dominance counterexample: the unweighted distribution of
/// `s1` dominates that of `s2`, the weighted one does not, and the
/// equilibrium exposure of `s1` is strictly larger.
pub fn counterexample() -> (Setup, Vec<f64>, Vec<f64>) {
    let setup = Setup {
        zeta: 3.0,
        b: 2.5,
        coef: 30.0,
        tau: 0.7,
        loss: 10.0,
        i_min: 0.0,
        i_max: 1000.0,
        alpha: 0.0,
        d_max: 4,
    };
    (setup, vec![0.0, 0.5, 0.0, 0.5], vec![0.5, 0.0, 0.0, 0.5])
}
