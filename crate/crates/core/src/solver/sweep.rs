//! Gap verification for a solution pair and the blow-up sweep as `r ↓ p − 1`.

use serde::Serialize;

use super::{minimize_branch, Branch, SolutionReport, SolveConfig};
use crate::domain::ProblemParams;
use crate::error::Result;
use crate::functionals::EnergyModel;
use crate::thresholds::{blowup_constant, ThresholdReport};

#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub a_lambda: f64,
    pub a_zero: f64,
    /// `‖W‖ > A_λ > A_0 > ‖w‖`, all strict.
    pub ordering_ok: bool,
    pub energy_plus: f64,
    pub energy_minus: f64,
}

pub fn verify_solution_pair(plus: &SolutionReport, minus: &SolutionReport, thresholds: &ThresholdReport) -> GapReport {
    let (a_lambda, a_zero) = (thresholds.a_lambda, thresholds.a_zero);
    GapReport {
        norm_plus: plus.norm,
        norm_minus: minus.norm,
        a_lambda,
        a_zero,
        ordering_ok: minus.norm > a_lambda && a_lambda > a_zero && a_zero > plus.norm,
        energy_plus: plus.energy,
        energy_minus: minus.energy,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub r: f64,
    pub lambda: f64,
    pub lambda_star: f64,
    pub norm_w: f64,
    pub c_eps: f64,
    /// `C_ε·(Λ/λ)^{1/ε}`
    pub bound: f64,
    pub satisfied: bool,
    pub converged: bool,
}

/// For each `ε`, sets `r = p − 1 + ε`, `λ = θ·Λ(ε)`, solves the `N^-` branch
/// and compares `‖W_ε‖` with `C_ε·(1/θ)^{1/ε}`. Rows are independent.
pub fn blowup_sweep(
    base: &EnergyModel,
    epsilons: &[f64],
    theta: f64,
    s_value: f64,
    s_used: f64,
    config: &SolveConfig,
) -> Result<Vec<SweepRow>> {
    let config = SolveConfig {
        branch: Branch::Minus,
        ..*config
    };
    let mut rows = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let bp = base.params();
        let c_eps = blowup_constant(eps, bp, base.weight_norms().0, s_used)?;
        let probe = ProblemParams::new(bp.s(), bp.p(), bp.q(), bp.p() - 1.0 + eps, bp.lambda())?;
        let probe_model = base.with_params(probe);
        let (na, nb) = probe_model.weight_norms();
        let lambda_star = ThresholdReport::new(&probe, na, nb, s_value, s_used)?.lambda_star;
        let params = probe.with_lambda(theta * lambda_star)?;
        let model = probe_model.with_params(params);
        let thresholds = ThresholdReport::new(&params, na, nb, s_value, s_used)?;
        let rep = minimize_branch(&model, &thresholds, &config)?;
        let bound = c_eps * (1.0 / theta).powf(1.0 / eps);
        rows.push(SweepRow {
            epsilon: eps,
            r: params.r(),
            lambda: params.lambda(),
            lambda_star,
            norm_w: rep.norm,
            c_eps,
            bound,
            satisfied: rep.norm > bound,
            converged: rep.converged,
        });
    }
    Ok(rows)
}

/// Least-squares fits of `log(bound)` against `1/ε`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlowupFit {
    /// Slope of the straight-line fit `log(bound) ≈ a/ε + c`.
    pub linear_slope: f64,
    /// Coefficient of `1/ε` in `log(bound) ≈ a/ε + b·log(1/ε) + c`, the
    /// model that separates the exponential rate from the `log(1/ε)` growth
    /// of `C_ε`.
    pub model_slope: f64,
    pub log_coefficient: f64,
    /// `log(1/θ)`, the predicted rate.
    pub target: f64,
}

pub fn fit_blowup_slope(rows: &[SweepRow], theta: f64) -> Option<BlowupFit> {
    if rows.len() < 3 {
        return None;
    }
    let x: Vec<f64> = rows.iter().map(|r| 1.0 / r.epsilon).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.bound.ln()).collect();

    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let linear_slope = sxy / sxx;

    let design = nalgebra::DMatrix::from_fn(x.len(), 3, |i, j| match j {
        0 => x[i],
        1 => x[i].ln(),
        _ => 1.0,
    });
    let rhs = nalgebra::DVector::from_vec(y);
    let normal = design.transpose() * &design;
    let coef = normal.lu().solve(&(design.transpose() * rhs))?;
    Some(BlowupFit {
        linear_slope,
        model_slope: coef[0],
        log_coefficient: coef[1],
        target: (1.0 / theta).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(eps: f64, bound: f64) -> SweepRow {
        SweepRow {
            epsilon: eps,
            r: 1.0 + eps,
            lambda: 0.0,
            lambda_star: 0.0,
            norm_w: 0.0,
            c_eps: 0.0,
            bound,
            satisfied: false,
            converged: false,
        }
    }

    #[test]
    fn fit_recovers_exact_model() {
        let rows: Vec<SweepRow> = [0.5, 0.25, 0.125, 0.0625]
            .iter()
            .map(|&e| row(e, (0.7 / e + 0.3 * (1.0 / e).ln() + 1.1).exp()))
            .collect();
        let fit = fit_blowup_slope(&rows, 0.5).unwrap();
        assert!((fit.model_slope - 0.7).abs() < 1e-10);
        assert!((fit.log_coefficient - 0.3).abs() < 1e-9);
        assert!((fit.target - 2.0_f64.ln()).abs() < 1e-15);
        assert!(fit_blowup_slope(&rows[..2], 0.5).is_none());
    }

    #[test]
    fn swapped_pair_fails_ordering() {
        use crate::domain::{build_grid, GridFunction};
        use crate::fiber::NehariClass;
        use crate::functionals::FunctionalTriple;
        let g = build_grid(3).unwrap();
        let mk = |norm: f64, branch| SolutionReport {
            w: GridFunction::zeros(g.clone()),
            branch,
            energy: 0.0,
            triple: FunctionalTriple::new(0.0, 0.0, 0.0),
            norm,
            classification: NehariClass::Plus,
            residual: 0.0,
            full_residual: 0.0,
            iterations: 0,
            newton_steps: 0,
            converged: true,
            floor_violations: 0,
            min_value: 1.0,
            min_observed_energy: 0.0,
            projected_points: 0,
            sobolev_violations: 0,
            descent_monotone: true,
            branch_margin: 0.0,
            start_index: 0,
        };
        let params = ProblemParams::new(0.4, 2.0, 0.5, 3.0, 0.05).unwrap();
        let th = ThresholdReport::new(&params, 1.0, 1.0, 1.0, 1.0).unwrap();
        let small = mk(0.5 * th.a_zero, Branch::Plus);
        let large = mk(2.0 * th.a_lambda, Branch::Minus);
        assert!(verify_solution_pair(&small, &large, &th).ordering_ok);
        assert!(!verify_solution_pair(&large, &small, &th).ordering_ok);
    }
}
