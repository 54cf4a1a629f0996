//! The homogeneous functionals `‖w‖^p`, `A(w)`, `B(w)`, the energy, its
//! exact discrete gradient, weight norms, and the discrete Sobolev constant.
//!
//! The discrete Gagliardo energy is the collocation double sum
//!
//! ```text
//! ‖w‖_h^p = Σ_{i≠j} h² |w_i − w_j|^p |x_i − x_j|^{−(1+ps)} + 2 Σ_i h |w_i|^p κ_ext(x_i)
//! ```
//!
//! where `κ_ext(x) = ∫_{ℝ∖Ω} |x − y|^{−(1+ps)} dy` is evaluated in closed form.
//! The sum is exactly `p`-homogeneous in `w`.

mod sobolev;

pub use sobolev::{rayleigh_quotient, sobolev_estimate, SobolevConfig, SobolevEstimate};

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::{lp_norm, Grid, GridFunction, ProblemParams, WeightPair};
use crate::error::{Error, Result};
use crate::sum::{dot, ordered_sum, CompensatedSum};

/// Rows per rayon task; below this the double sums stay on one thread.
const ROW_CHUNK: usize = 16;

/// `∫_{ℝ∖(−1,1)} |x − y|^{−(1+ps)} dy = (1/ps)·[(1+x)^{−ps} + (1−x)^{−ps}]`.
pub fn exterior_kernel_weight(x: f64, ps: f64) -> Result<f64> {
    if !(x > -1.0 && x < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "exterior kernel weight diverges at x = {x} (need -1 < x < 1)"
        )));
    }
    Ok(((1.0 + x).powf(-ps) + (1.0 - x).powf(-ps)) / ps)
}

/// Precomputed kernel tables for one grid and one `(p, s)` pair.
#[derive(Debug, Clone)]
pub struct NonlocalOperator {
    grid: Arc<Grid>,
    p: f64,
    /// Row-major `h²·|x_i − x_j|^{−(1+ps)}`, zero on the diagonal.
    pair: Vec<f64>,
    /// `2·h·κ_ext(x_i)`.
    exterior: Vec<f64>,
}

impl NonlocalOperator {
    pub fn new(grid: Arc<Grid>, p: f64, s: f64) -> Self {
        let n = grid.num_nodes();
        let h = grid.spacing();
        let ps = p * s;
        let x = grid.nodes();
        let mut pair = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    pair[i * n + j] = h * h * (x[i] - x[j]).abs().powf(-(1.0 + ps));
                }
            }
        }
        let exterior = x
            .iter()
            .map(|&xi| 2.0 * h * exterior_kernel_weight(xi, ps).expect("interior node"))
            .collect();
        Self {
            grid,
            p,
            pair,
            exterior,
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn n(&self) -> usize {
        self.exterior.len()
    }

    #[inline]
    fn pow_p(&self, d: f64) -> f64 {
        if self.p == 2.0 {
            d * d
        } else {
            d.abs().powf(self.p)
        }
    }

    /// `|d|^{p−2}·d`, continuous at 0 for `p > 1`.
    #[inline]
    fn signed_pow(&self, d: f64) -> f64 {
        if self.p == 2.0 {
            d
        } else if d == 0.0 {
            0.0
        } else {
            d.signum() * d.abs().powf(self.p - 1.0)
        }
    }

    fn row_energy(&self, w: &[f64], i: usize) -> f64 {
        let n = self.n();
        let row = &self.pair[i * n..(i + 1) * n];
        let mut acc = CompensatedSum::new();
        for j in 0..n {
            if j != i {
                acc.add(row[j] * self.pow_p(w[i] - w[j]));
            }
        }
        acc.add(self.exterior[i] * self.pow_p(w[i]));
        acc.value()
    }

    fn row_gradient(&self, w: &[f64], i: usize) -> f64 {
        let n = self.n();
        let row = &self.pair[i * n..(i + 1) * n];
        let mut acc = CompensatedSum::new();
        for j in 0..n {
            if j != i {
                acc.add(2.0 * row[j] * self.signed_pow(w[i] - w[j]));
            }
        }
        acc.add(self.exterior[i] * self.signed_pow(w[i]));
        acc.value()
    }

    /// Discrete `‖w‖_h^p`. Rows may be evaluated in parallel; the partials are
    /// folded in index order, so the result does not depend on thread count.
    pub fn seminorm_p(&self, w: &[f64]) -> f64 {
        assert_eq!(w.len(), self.n());
        let rows: Vec<f64> = (0..self.n())
            .into_par_iter()
            .with_min_len(ROW_CHUNK)
            .map(|i| self.row_energy(w, i))
            .collect();
        ordered_sum(rows)
    }

    /// Gradient of `(1/p)·‖w‖_h^p`.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.n());
        (0..self.n())
            .into_par_iter()
            .with_min_len(ROW_CHUNK)
            .map(|i| self.row_gradient(w, i))
            .collect()
    }

    /// Hessian of `(1/p)·‖w‖_h^p`. For `p < 2` the factor `|d|^{p−2}` is
    /// evaluated at `max(|d|, floor)`.
    pub fn hessian(&self, w: &[f64], floor: f64) -> DMatrix<f64> {
        let n = self.n();
        let p = self.p;
        let weight = |d: f64| -> f64 {
            if p == 2.0 {
                1.0
            } else {
                d.abs().max(floor).powf(p - 2.0)
            }
        };
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut diag = CompensatedSum::new();
            for j in 0..n {
                if j != i {
                    let c = 2.0 * (p - 1.0) * self.pair[i * n + j] * weight(w[i] - w[j]);
                    hess[(i, j)] = -c;
                    diag.add(c);
                }
            }
            diag.add((p - 1.0) * self.exterior[i] * weight(w[i]));
            hess[(i, i)] = diag.value();
        }
        hess
    }
}

/// `(‖w‖^p, A(w), B(w))` with `A = ∫ a w₊^{1−q}` and `B = ∫ b w₊^{r+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalTriple {
    pub seminorm_p: f64,
    pub a_integral: f64,
    pub b_integral: f64,
}

impl FunctionalTriple {
    pub fn new(seminorm_p: f64, a_integral: f64, b_integral: f64) -> Self {
        Self {
            seminorm_p,
            a_integral,
            b_integral,
        }
    }

    /// Triple of `t·w` from the triple of `w`.
    pub fn scaled(&self, t: f64, params: &ProblemParams) -> Self {
        Self {
            seminorm_p: t.powf(params.p()) * self.seminorm_p,
            a_integral: t.powf(1.0 - params.q()) * self.a_integral,
            b_integral: t.powf(params.r() + 1.0) * self.b_integral,
        }
    }

    /// `‖w‖`, the p-th root of the seminorm.
    pub fn norm(&self, params: &ProblemParams) -> f64 {
        self.seminorm_p.powf(1.0 / params.p())
    }

    /// `‖w‖^p − A − λB`; zero exactly on the Nehari manifold.
    pub fn nehari_defect(&self, lambda: f64) -> f64 {
        self.seminorm_p - self.a_integral - lambda * self.b_integral
    }

    /// `J_λ` evaluated from the triple.
    pub fn energy(&self, params: &ProblemParams) -> f64 {
        self.seminorm_p / params.p()
            - self.a_integral / (1.0 - params.q())
            - params.lambda() * self.b_integral / (params.r() + 1.0)
    }
}

/// Energy model for fixed parameters and weights on one grid.
#[derive(Debug, Clone)]
pub struct EnergyModel {
    params: ProblemParams,
    weights: WeightPair,
    op: Arc<NonlocalOperator>,
}

impl EnergyModel {
    pub fn new(params: ProblemParams, weights: WeightPair) -> Self {
        let op = Arc::new(NonlocalOperator::new(
            Arc::clone(weights.grid()),
            params.p(),
            params.s(),
        ));
        Self {
            params,
            weights,
            op,
        }
    }

    /// Same weights and grid, new parameters. The kernel tables are reused
    /// when `p` and `s` are unchanged.
    pub fn with_params(&self, params: ProblemParams) -> Self {
        let op = if params.p() == self.params.p() && params.s() == self.params.s() {
            Arc::clone(&self.op)
        } else {
            Arc::new(NonlocalOperator::new(
                Arc::clone(self.weights.grid()),
                params.p(),
                params.s(),
            ))
        };
        Self {
            params,
            weights: self.weights.clone(),
            op,
        }
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    pub fn weights(&self) -> &WeightPair {
        &self.weights
    }

    pub fn operator(&self) -> &NonlocalOperator {
        &self.op
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.weights.grid()
    }

    pub fn seminorm_p(&self, w: &GridFunction) -> f64 {
        self.op.seminorm_p(w.values())
    }

    pub fn a_integral(&self, w: &[f64]) -> f64 {
        let h = self.grid().spacing();
        let e = 1.0 - self.params.q();
        ordered_sum(
            w.iter()
                .zip(self.weights.a().values())
                .filter(|(v, _)| **v > 0.0)
                .map(|(v, a)| h * a * v.powf(e)),
        )
    }

    pub fn b_integral(&self, w: &[f64]) -> f64 {
        let h = self.grid().spacing();
        let e = self.params.r() + 1.0;
        ordered_sum(
            w.iter()
                .zip(self.weights.b().values())
                .filter(|(v, _)| **v > 0.0)
                .map(|(v, b)| h * b * v.powf(e)),
        )
    }

    pub fn triple(&self, w: &GridFunction) -> FunctionalTriple {
        self.triple_of(w.values())
    }

    pub fn triple_of(&self, w: &[f64]) -> FunctionalTriple {
        FunctionalTriple {
            seminorm_p: self.op.seminorm_p(w),
            a_integral: self.a_integral(w),
            b_integral: self.b_integral(w),
        }
    }

    /// `J_λ(w) = (1/p)‖w‖^p − (1/(1−q))A(w) − (λ/(r+1))B(w)`.
    pub fn energy(&self, w: &GridFunction) -> f64 {
        self.triple(w).energy(&self.params)
    }

    /// Singularity floor `δ = 1e-8·max(1, ‖w‖_∞)`.
    pub fn singular_floor(w: &[f64]) -> f64 {
        let m = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        1e-8 * m.max(1.0)
    }

    /// Exact gradient of the discrete energy (with the singular term floored),
    /// for the generalized form with coefficients `a_coef·a` and `b_coef·b`.
    pub fn gradient_with(&self, w: &[f64], a_coef: f64, b_coef: f64) -> Vec<f64> {
        let h = self.grid().spacing();
        let q = self.params.q();
        let r = self.params.r();
        let delta = Self::singular_floor(w);
        let mut g = self.op.gradient(w);
        let a = self.weights.a().values();
        let b = self.weights.b().values();
        for i in 0..g.len() {
            if w[i] > 0.0 {
                g[i] -= a_coef * h * a[i] * w[i].max(delta).powf(-q);
                g[i] -= b_coef * h * b[i] * w[i].powf(r);
            }
        }
        g
    }

    /// Gradient of `J_λ` at `w`.
    pub fn first_variation(&self, w: &GridFunction) -> GridFunction {
        w.with_values(self.gradient_with(w.values(), 1.0, self.params.lambda()))
    }

    /// Hessian of `J_λ` at `w` (singular term floored as in the gradient).
    pub fn hessian(&self, w: &[f64]) -> DMatrix<f64> {
        let h = self.grid().spacing();
        let q = self.params.q();
        let r = self.params.r();
        let lambda = self.params.lambda();
        let delta = Self::singular_floor(w);
        let mut hess = self.op.hessian(w, delta);
        let a = self.weights.a().values();
        let b = self.weights.b().values();
        for i in 0..w.len() {
            if w[i] > 0.0 {
                hess[(i, i)] += q * h * a[i] * w[i].max(delta).powf(-q - 1.0);
                hess[(i, i)] -= lambda * r * h * b[i] * w[i].powf(r - 1.0);
            }
        }
        hess
    }

    /// `(Σ h |w_i|^{p_s^*})^{1/p_s^*}`.
    pub fn critical_norm(&self, w: &[f64]) -> f64 {
        lp_norm(w, self.grid().spacing(), self.params.p_star())
    }

    pub fn weight_norms(&self) -> (f64, f64) {
        weight_norms(&self.weights, &self.params)
    }
}

/// Euclidean pairing of a gradient vector with a perturbation. Gradient
/// components already carry the quadrature weight.
pub fn pairing(g: &GridFunction, v: &GridFunction) -> f64 {
    dot(g.values(), v.values())
}

/// Hölder exponents `(m_a, m_b) = (p*/(p*−1+q), p*/(p*−1−r))`.
pub fn weight_exponents(params: &ProblemParams) -> (f64, f64) {
    let ps = params.p_star();
    (ps / (ps - 1.0 + params.q()), ps / (ps - 1.0 - params.r()))
}

/// `(‖a‖_{m_a}, ‖b‖_{m_b})` as discrete Lebesgue norms.
pub fn weight_norms(weights: &WeightPair, params: &ProblemParams) -> (f64, f64) {
    let (ma, mb) = weight_exponents(params);
    let h = weights.grid().spacing();
    (
        lp_norm(weights.a().values(), h, ma),
        lp_norm(weights.b().values(), h, mb),
    )
}
