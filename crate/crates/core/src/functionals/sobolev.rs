//! Numerical estimate of the discrete Sobolev constant
//! `S_h = inf ‖w‖_h^p / (Σ h |w_i|^{p*})^{p/p*}`.
//!
//! The quotient is invariant under `w ↦ c·w` and, on the lattice, under
//! dilations as well, so minimizers concentrate to a few nodes. Descent is
//! started from the domain-wide hat and from narrower hats at the centre node;
//! the smallest quotient found is returned. A descent only ever yields an
//! upper bound on the infimum, which is why callers use `s_used()`.

use serde::Serialize;

use super::NonlocalOperator;
use crate::domain::{GridFunction, ProblemParams};
use crate::sum::{dot, ordered_sum};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SobolevConfig {
    pub max_iters: usize,
    /// Stop when `‖∇ ln R‖·‖w‖ ≤ tol`.
    pub tol: f64,
    pub margin: f64,
}

impl Default for SobolevConfig {
    fn default() -> Self {
        Self {
            max_iters: 20_000,
            tol: 1e-10,
            margin: 1e-3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SobolevEstimate {
    pub s_value: f64,
    pub minimizer: GridFunction,
    pub margin: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Quotient of the domain-wide hat `1 − |x|`.
    pub hat_quotient: f64,
}

impl SobolevEstimate {
    /// `S·(1 − margin)`, the value used inside inequalities.
    pub fn s_used(&self) -> f64 {
        self.s_value * (1.0 - self.margin)
    }
}

fn critical_sum(w: &[f64], h: f64, p_star: f64) -> f64 {
    ordered_sum(w.iter().map(|v| h * v.abs().powf(p_star)))
}

/// `R(w) = ‖w‖_h^p / (Σ h|w_i|^{p*})^{p/p*}`.
pub fn rayleigh_quotient(op: &NonlocalOperator, w: &[f64], params: &ProblemParams) -> f64 {
    let h = op.grid().spacing();
    let ps = params.p_star();
    op.seminorm_p(w) / critical_sum(w, h, ps).powf(params.p() / ps)
}

/// Returns `(ln R, ∇ ln R)`.
fn log_quotient_and_grad(op: &NonlocalOperator, w: &[f64], params: &ProblemParams) -> (f64, Vec<f64>) {
    let h = op.grid().spacing();
    let p = params.p();
    let ps = params.p_star();
    let num = op.seminorm_p(w);
    let den = critical_sum(w, h, ps);
    // ∇‖w‖^p = p·∇((1/p)‖w‖^p)
    let gnum = op.gradient(w);
    let grad = w
        .iter()
        .zip(&gnum)
        .map(|(&v, &gn)| {
            let gd = ps * h * v.abs().powf(ps - 1.0) * v.signum();
            p * gn / num - (p / ps) * gd / den
        })
        .collect();
    (num.ln() - (p / ps) * den.ln(), grad)
}

fn normalize(w: &mut [f64]) {
    let m = w.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        w.iter_mut().for_each(|v| *v /= m);
    }
}

/// Armijo descent on `ln R` with Barzilai–Borwein trial steps.
fn descend(
    op: &NonlocalOperator,
    start: Vec<f64>,
    params: &ProblemParams,
    config: &SobolevConfig,
) -> (f64, Vec<f64>, bool, usize) {
    let mut w = start;
    normalize(&mut w);
    let (mut f, mut g) = log_quotient_and_grad(op, &w, params);
    let mut step = 1e-2;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    for it in 0..config.max_iters {
        let gnorm = dot(&g, &g).sqrt();
        let wnorm = dot(&w, &w).sqrt();
        if gnorm * wnorm <= config.tol {
            return (f.exp(), w, true, it);
        }
        if let Some((pw, pg)) = &prev {
            let sv: Vec<f64> = w.iter().zip(pw).map(|(a, b)| a - b).collect();
            let yv: Vec<f64> = g.iter().zip(pg).map(|(a, b)| a - b).collect();
            let sy = dot(&sv, &yv);
            if sy > 0.0 {
                step = dot(&sv, &sv) / sy;
            }
        }
        let g2 = gnorm * gnorm;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = w.iter().zip(&g).map(|(a, b)| a - step * b).collect();
            if trial.iter().all(|v| *v == 0.0) {
                step *= 0.5;
                continue;
            }
            let (ft, gt) = log_quotient_and_grad(op, &trial, params);
            if ft.is_finite() && ft <= f - 1e-4 * step * g2 {
                accepted = Some((trial, ft, gt));
                break;
            }
            step *= 0.5;
        }
        match accepted {
            Some((mut trial, ft, gt)) => {
                // rescaling w by c rescales ∇ ln R by 1/c
                let m = trial.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
                normalize(&mut trial);
                let gt: Vec<f64> = gt.iter().map(|v| v * m).collect();
                step /= m * m;
                prev = Some((
                    w.iter().map(|v| v / m).collect(),
                    g.iter().map(|v| v * m).collect(),
                ));
                w = trial;
                f = ft;
                g = gt;
            }
            None => return (f.exp(), w, false, it),
        }
    }
    (f.exp(), w, false, config.max_iters)
}

/// Minimizes the discrete Rayleigh quotient. Deterministic for a given
/// grid, parameters and config.
pub fn sobolev_estimate(
    op: &NonlocalOperator,
    params: &ProblemParams,
    config: &SobolevConfig,
) -> SobolevEstimate {
    let grid = op.grid().clone();
    let n = grid.num_nodes();
    let mid = n / 2;
    let x = grid.nodes();
    let hat: Vec<f64> = x.iter().map(|v| 1.0 - v.abs()).collect();
    let hat_quotient = rayleigh_quotient(op, &hat, params);

    let mut starts = vec![hat];
    let mut half_width = 1usize;
    while half_width < n / 2 {
        let c = x[mid];
        let hw = half_width as f64 * grid.spacing();
        starts.push(x.iter().map(|v| (1.0 - (v - c).abs() / hw).max(0.0)).collect());
        half_width *= 2;
    }

    let mut best: Option<(f64, Vec<f64>, bool, usize)> = None;
    let mut total_iters = 0;
    for start in starts {
        let (value, w, converged, iters) = descend(op, start, params, config);
        total_iters += iters;
        if best.as_ref().is_none_or(|b| value < b.0) {
            best = Some((value, w, converged, iters));
        }
    }
    let (s_value, w, converged, _) = best.expect("at least one start");
    SobolevEstimate {
        s_value,
        minimizer: GridFunction::new(grid, w).expect("finite minimizer"),
        margin: config.margin,
        converged,
        iterations: total_iters,
        hat_quotient,
    }
}
