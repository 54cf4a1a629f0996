//! Closed-form constants: the threshold `Λ`, the margin `E_λ`, the gap radii
//! `A_λ` and `A_0`, the blow-up constant `C_ε`, and the rescaling onto the
//! problem with the parameter moved to the singular term.
//!
//! `S` is always injected. Nothing in here touches a grid except
//! [`q_lambda_transform`].

use serde::Serialize;

use crate::domain::{GridFunction, ProblemParams};
use crate::error::{Error, Result};
use crate::fiber::{coercivity_bound, CoercivityBound};
use crate::functionals::EnergyModel;

/// Weight norms and Sobolev constant that every constant depends on.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Constants {
    pub norm_a: f64,
    pub norm_b: f64,
    /// Sobolev constant as used in inequalities (after the safety margin).
    pub sobolev: f64,
}

/// `K = ((p−1+q)/(r+q))·((r−p+1)/(r+q))^{(r−p+1)/(p−1+q)}`.
fn k_factor(params: &ProblemParams) -> f64 {
    let g = params.sub_gap();
    let sg = params.super_gap();
    let rq = params.r() + params.q();
    (g / rq) * (sg / rq).powf(sg / g)
}

/// `Λ = K·(1/‖b‖)·(S^{r+q}/‖a‖^{r−p+1})^{1/(p−1+q)}`.
pub fn lambda_star(params: &ProblemParams, c: &Constants) -> f64 {
    let g = params.sub_gap();
    let sg = params.super_gap();
    let rq = params.r() + params.q();
    k_factor(params) / c.norm_b * (c.sobolev.powf(rq / g) / c.norm_a.powf(sg / g))
}

/// `E_λ = K·(S^{(1−q)/p}/‖a‖)^{(r−p+1)/(p−1+q)} − λ‖b‖·S^{−(r+1)/p}`; affine and
/// decreasing in `λ`, zero exactly at `Λ`.
pub fn e_lambda(lambda: f64, params: &ProblemParams, c: &Constants) -> f64 {
    let (p, q, r) = (params.p(), params.q(), params.r());
    let g = params.sub_gap();
    let sg = params.super_gap();
    let root_s = c.sobolev.powf(1.0 / p);
    k_factor(params) * (root_s.powf(1.0 - q) / c.norm_a).powf(sg / g)
        - lambda * c.norm_b * root_s.powf(-(r + 1.0))
}

/// `(A_λ, A_0)`: every `N^+` point has norm below `A_0`, every `N^-` point
/// above `A_λ`.
pub fn gap_radii(lambda: f64, params: &ProblemParams, c: &Constants) -> Result<(f64, f64)> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("λ must be positive (got {lambda})")));
    }
    let (p, q, r) = (params.p(), params.q(), params.r());
    let g = params.sub_gap();
    let sg = params.super_gap();
    let rq = r + q;
    let root_s = c.sobolev.powf(1.0 / p);
    let a_lambda = (g / (lambda * rq * c.norm_b) * root_s.powf(r + 1.0)).powf(1.0 / sg);
    let a_zero = (rq / sg * c.norm_a * root_s.powf(-(1.0 - q))).powf(1.0 / g);
    Ok((a_lambda, a_zero))
}

/// `C_ε = (1 + (p−1+q)/ε)^{1/(p−1+q)}·‖a‖^{1/(p−1+q)}·S^{−(1−q)/(p(p−1+q))}`
/// for `r = p − 1 + ε`.
pub fn blowup_constant(eps: f64, params: &ProblemParams, norm_a: f64, sobolev: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidArgument(format!("ε must be positive (got {eps})")));
    }
    let r = params.p() - 1.0 + eps;
    if !(r < params.p_star() - 1.0) {
        return Err(Error::InvalidArgument(format!(
            "ε = {eps} gives r = {r} ≥ p_s^* − 1 = {}",
            params.p_star() - 1.0
        )));
    }
    let (p, q) = (params.p(), params.q());
    let g = params.sub_gap();
    Ok((1.0 + g / eps).powf(1.0 / g) * norm_a.powf(1.0 / g) * sobolev.powf(-(1.0 - q) / (p * g)))
}

/// Everything reported by the `thresholds` command.
#[derive(Debug, Clone, Serialize)]
pub struct ThresholdReport {
    pub lambda: f64,
    pub lambda_star: f64,
    pub e_lambda: f64,
    pub e_zero: f64,
    pub a_lambda: f64,
    pub a_zero: f64,
    pub s_value: f64,
    pub s_used: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub rho_min: f64,
    pub coercivity: CoercivityBound,
    /// `1/(r − p + 1)`, the exponent of the rescaling `u = λ^{(.)}·w`.
    pub q_scaling_exponent: f64,
    pub in_theorem_range: bool,
}

impl ThresholdReport {
    pub fn new(params: &ProblemParams, norm_a: f64, norm_b: f64, s_value: f64, s_used: f64) -> Result<Self> {
        let c = Constants {
            norm_a,
            norm_b,
            sobolev: s_used,
        };
        let lambda = params.lambda();
        let lambda_star = lambda_star(params, &c);
        let (a_lambda, a_zero) = gap_radii(lambda, params, &c)?;
        let coercivity = coercivity_bound(params, norm_a, s_used);
        Ok(Self {
            lambda,
            lambda_star,
            e_lambda: e_lambda(lambda, params, &c),
            e_zero: e_lambda(0.0, params, &c),
            a_lambda,
            a_zero,
            s_value,
            s_used,
            norm_a,
            norm_b,
            rho_min: coercivity.rho_min,
            coercivity,
            q_scaling_exponent: q_scaling_exponent(params),
            in_theorem_range: lambda < lambda_star,
        })
    }

    pub fn constants(&self) -> Constants {
        Constants {
            norm_a: self.norm_a,
            norm_b: self.norm_b,
            sobolev: self.s_used,
        }
    }
}

/// Exponent of the rescaling `u = λ^{μ_exp}·w`: `1/(r − p + 1)`.
///
/// Substituting `u = μw` into the equation with the parameter on the
/// singular term forces this exponent; `1/(r − 1 + p)` does not balance the
/// two sides unless `p = 1`.
pub fn q_scaling_exponent(params: &ProblemParams) -> f64 {
    1.0 / params.super_gap()
}

#[derive(Debug, Clone)]
pub struct QTransform {
    pub u: GridFunction,
    pub scale: f64,
    /// Coefficient `λ^{(p−1+q)/(r−p+1)}` of `a·u^{−q}` in the rescaled problem.
    pub a_coefficient: f64,
}

/// Maps a solution `w` of the problem with `λ` on the `b` term to `u = μw`,
/// `μ = λ^{1/(r−p+1)}`, a solution of the problem with coefficient
/// `λ^{(p−1+q)/(r−p+1)}` on the `a` term and 1 on the `b` term.
pub fn q_lambda_transform(w: &GridFunction, lambda: f64, params: &ProblemParams) -> Result<QTransform> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument(format!("λ must be positive (got {lambda})")));
    }
    let scale = lambda.powf(q_scaling_exponent(params));
    Ok(QTransform {
        u: w.scaled(scale),
        scale,
        a_coefficient: lambda.powf(params.sub_gap() / params.super_gap()),
    })
}

/// Residual of the rescaled problem at `u`, i.e. the gradient of its energy.
pub fn q_form_residual(model: &EnergyModel, t: &QTransform) -> Vec<f64> {
    model.gradient_with(t.u.values(), t.a_coefficient, 1.0)
}
