//! Two-branch constrained minimization of `J_λ` on the Nehari manifold.
//!
//! A direction `u` is mapped onto the requested branch by scaling with the
//! fiber root (`t1` for `N^+`, `t2` for `N^-`). The reduced functional
//! `F(u) = J_λ(t(u)·u)` is minimized by Armijo descent; since `φ'(t) = 0` at the
//! projected point, `∇F` at a Nehari point is the energy gradient itself and
//! its ray component vanishes. Once the tangential residual is small, or the
//! line search can no longer resolve a decrease in `J_λ`, Newton steps on the
//! full gradient (each followed by re-projection) drive the residual down to
//! the requested tolerance.

mod starts;
mod sweep;

pub use starts::{bump_mixture, start_rng};
pub use sweep::{blowup_sweep, fit_blowup_slope, verify_solution_pair, BlowupFit, GapReport, SweepRow};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::domain::GridFunction;
use crate::error::{Error, Result};
use crate::fiber::{nehari_classify, Fiber, NehariClass};
use crate::functionals::{EnergyModel, FunctionalTriple};
use crate::sum::{dot, norm2, ordered_sum};
use crate::thresholds::ThresholdReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn class(&self) -> NehariClass {
        match self {
            Self::Plus => NehariClass::Plus,
            Self::Minus => NehariClass::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Set per run by the caller; not part of a run configuration.
    #[serde(skip_serializing)]
    pub branch: Branch,
    pub max_iters: usize,
    /// First trial step, as a fraction of `‖w‖₂` moved along the gradient.
    pub step0: f64,
    pub shrink: f64,
    pub armijo_c: f64,
    pub grad_tol: f64,
    pub seed: u64,
    pub num_starts: usize,
    /// Tangential residual below which Newton polishing takes over.
    pub newton_switch: f64,
    pub max_newton: usize,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            branch: Branch::Plus,
            max_iters: 4000,
            step0: 0.1,
            shrink: 0.5,
            armijo_c: 1e-4,
            grad_tol: 1e-8,
            seed: 42,
            num_starts: 4,
            newton_switch: 1e-3,
            max_newton: 60,
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(Error::Config("solver.max_iters must be ≥ 1".into()));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(Error::Config("solver.shrink must lie in (0, 1)".into()));
        }
        if !(self.grad_tol > 0.0) {
            return Err(Error::Config("solver.grad_tol must be positive".into()));
        }
        if !(self.step0 > 0.0) || !(self.armijo_c > 0.0 && self.armijo_c < 1.0) {
            return Err(Error::Config("solver.step0 > 0 and 0 < solver.armijo_c < 1 required".into()));
        }
        if self.num_starts < 1 {
            return Err(Error::Config("solver.num_starts must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolutionReport {
    #[serde(skip)]
    pub w: GridFunction,
    pub branch: Branch,
    pub energy: f64,
    pub triple: FunctionalTriple,
    pub norm: f64,
    pub classification: NehariClass,
    /// Tangential gradient norm over `‖w‖^{p−1}`.
    pub residual: f64,
    /// Full gradient norm over `‖w‖^{p−1}`.
    pub full_residual: f64,
    pub iterations: usize,
    pub newton_steps: usize,
    pub converged: bool,
    pub floor_violations: usize,
    pub min_value: f64,
    /// Lowest `J_λ` seen at any projected point, trial or accepted.
    pub min_observed_energy: f64,
    pub projected_points: usize,
    /// Accepted iterates whose Rayleigh quotient fell below `S_used`.
    pub sobolev_violations: usize,
    /// Whether `J_λ` never increased across accepted line-search steps.
    pub descent_monotone: bool,
    /// `(p−1+q)A − λ(r−p+1)B`; positive on the `N^+` solution, negative on `N^-`.
    pub branch_margin: f64,
    pub start_index: usize,
}

#[derive(Debug, Clone)]
struct Projected {
    w: Vec<f64>,
    t: f64,
    triple: FunctionalTriple,
    energy: f64,
}

fn project_values(model: &EnergyModel, v: &[f64], branch: Branch) -> Result<Projected> {
    let params = model.params();
    let triple = model.triple_of(v);
    if !(triple.a_integral > 0.0) {
        return Err(Error::NoPositivePart);
    }
    if branch == Branch::Minus && !(triple.b_integral > 0.0) {
        return Err(Error::NoMinusPoint(triple.b_integral));
    }
    let report = Fiber::new(triple, params).roots()?;
    let t = match branch {
        Branch::Plus => report.case.t1(),
        Branch::Minus => report.case.t2(),
    }
    .ok_or(Error::NoPositivePart)?;
    let scaled = triple.scaled(t, params);
    Ok(Projected {
        w: v.iter().map(|x| t * x).collect(),
        t,
        triple: scaled,
        energy: scaled.energy(params),
    })
}

/// Scales `w` onto the requested branch of the Nehari manifold; returns the
/// projected function and the scale factor.
pub fn project_to_nehari(model: &EnergyModel, w: &GridFunction, branch: Branch) -> Result<(GridFunction, f64)> {
    let p = project_values(model, w.values(), branch)?;
    Ok((w.with_values(p.w), p.t))
}

/// Full gradient norm at `w` over `‖w‖^{p−1}`. The boolean is true when some
/// node sits at or below ten times the singularity floor.
pub fn residual_norm(model: &EnergyModel, w: &GridFunction) -> (f64, bool) {
    let g = model.first_variation(w);
    let n = model.seminorm_p(w).powf((model.params().p() - 1.0) / model.params().p());
    let delta = EnergyModel::singular_floor(w.values());
    let floored = w.values().iter().any(|&v| v <= 10.0 * delta);
    (norm2(g.values()) / n, floored)
}

fn tangential(g: &[f64], w: &[f64]) -> Vec<f64> {
    let c = dot(g, w) / dot(w, w);
    g.iter().zip(w).map(|(gi, wi)| gi - c * wi).collect()
}

fn critical_sum(model: &EnergyModel, w: &[f64]) -> f64 {
    let h = model.grid().spacing();
    let ps = model.params().p_star();
    ordered_sum(w.iter().map(|v| h * v.abs().powf(ps)))
}

struct Tracker {
    min_energy: f64,
    projected: usize,
    sobolev_violations: usize,
    monotone: bool,
}

impl Tracker {
    fn see(&mut self, p: &Projected) {
        self.projected += 1;
        self.min_energy = self.min_energy.min(p.energy);
    }
}

struct Run {
    w: Vec<f64>,
    iterations: usize,
    newton_steps: usize,
    tracker: Tracker,
}

fn run_start(model: &EnergyModel, start: &[f64], config: &SolveConfig, s_used: f64) -> Result<Run> {
    let params = *model.params();
    let p = params.p();
    let lambda = params.lambda();
    let branch = config.branch;
    let mut tracker = Tracker {
        min_energy: f64::INFINITY,
        projected: 0,
        sobolev_violations: 0,
        monotone: true,
    };

    let mut cur = project_values(model, start, branch)?;
    tracker.see(&cur);
    let accept = |tracker: &mut Tracker, x: &Projected| {
        if x.triple.seminorm_p < s_used * critical_sum(model, &x.w).powf(p / params.p_star()) {
            tracker.sobolev_violations += 1;
        }
    };
    accept(&mut tracker, &cur);

    let residual_of = |x: &Projected, g: &[f64]| -> f64 {
        norm2(&tangential(g, &x.w)) / x.triple.seminorm_p.powf((p - 1.0) / p)
    };

    let mut g = model.gradient_with(&cur.w, 1.0, lambda);
    let mut res = residual_of(&cur, &g);
    let mut step: Option<f64> = None;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;
    let mut newton_steps = 0;
    let mut newton_mode = false;

    while iterations < config.max_iters && res > config.grad_tol {
        iterations += 1;
        if newton_mode {
            if newton_steps >= config.max_newton {
                break;
            }
            newton_steps += 1;
            let hess = model.hessian(&cur.w);
            let rhs = nalgebra::DVector::from_iterator(g.len(), g.iter().map(|v| -v));
            let Some(delta) = hess.lu().solve(&rhs) else {
                newton_mode = false;
                continue;
            };
            let mut tau = 1.0;
            let mut improved = None;
            for _ in 0..30 {
                let trial: Vec<f64> = cur.w.iter().zip(delta.iter()).map(|(a, d)| a + tau * d).collect();
                if let Ok(x) = project_values(model, &trial, branch) {
                    tracker.see(&x);
                    if nehari_classify(&x.triple, &params, lambda) == branch.class() {
                        let gx = model.gradient_with(&x.w, 1.0, lambda);
                        let rx = residual_of(&x, &gx);
                        if rx < (1.0 - 1e-4 * tau) * res {
                            improved = Some((x, gx, rx));
                            break;
                        }
                    }
                }
                tau *= 0.5;
            }
            match improved {
                Some((x, gx, rx)) => {
                    accept(&mut tracker, &x);
                    cur = x;
                    g = gx;
                    res = rx;
                }
                None => break,
            }
            continue;
        }

        let gt = tangential(&g, &cur.w);
        let gt2 = dot(&gt, &gt);
        let mut alpha = match (step, &prev) {
            (Some(a), Some((pw, pg))) => {
                let s: Vec<f64> = cur.w.iter().zip(pw).map(|(a, b)| a - b).collect();
                let y: Vec<f64> = gt.iter().zip(pg).map(|(a, b)| a - b).collect();
                let sy = dot(&s, &y);
                if sy > 0.0 {
                    dot(&s, &s) / sy
                } else {
                    a
                }
            }
            (Some(a), None) => a,
            _ => config.step0 * norm2(&cur.w) / gt2.sqrt(),
        };

        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = cur.w.iter().zip(&gt).map(|(a, b)| a - alpha * b).collect();
            if let Ok(x) = project_values(model, &trial, branch) {
                tracker.see(&x);
                if x.energy <= cur.energy - config.armijo_c * alpha * gt2 {
                    accepted = Some(x);
                    break;
                }
            }
            alpha *= config.shrink;
        }
        match accepted {
            Some(x) => {
                if x.energy > cur.energy {
                    tracker.monotone = false;
                }
                accept(&mut tracker, &x);
                prev = Some((cur.w.clone(), gt));
                step = Some(alpha);
                g = model.gradient_with(&x.w, 1.0, lambda);
                cur = x;
                res = residual_of(&cur, &g);
                if res <= config.newton_switch {
                    newton_mode = true;
                }
            }
            // the line search can no longer resolve a decrease
            None => newton_mode = true,
        }
    }

    Ok(Run {
        w: cur.w,
        iterations,
        newton_steps,
        tracker,
    })
}

fn build_report(model: &EnergyModel, run: Run, config: &SolveConfig, start_index: usize) -> SolutionReport {
    let params = model.params();
    let p = params.p();
    let w = GridFunction::new(model.grid().clone(), run.w).expect("finite iterate");
    let triple = model.triple(&w);
    let g = model.first_variation(&w);
    let scale = triple.seminorm_p.powf((p - 1.0) / p);
    let residual = norm2(&tangential(g.values(), w.values())) / scale;
    let full_residual = norm2(g.values()) / scale;
    let delta = EnergyModel::singular_floor(w.values());
    let floor_violations = w.values().iter().filter(|&&v| v <= 10.0 * delta).count();
    let classification = nehari_classify(&triple, params, params.lambda());
    let converged = residual <= config.grad_tol && floor_violations == 0 && classification == config.branch.class();
    SolutionReport {
        branch: config.branch,
        energy: triple.energy(params),
        norm: triple.norm(params),
        triple,
        classification,
        residual,
        full_residual,
        iterations: run.iterations,
        newton_steps: run.newton_steps,
        converged,
        floor_violations,
        min_value: w.min_value(),
        min_observed_energy: run.tracker.min_energy,
        projected_points: run.tracker.projected,
        sobolev_violations: run.tracker.sobolev_violations,
        descent_monotone: run.tracker.monotone,
        branch_margin: params.sub_gap() * triple.a_integral
            - params.lambda() * params.super_gap() * triple.b_integral,
        start_index,
        w,
    }
}

/// Initial directions for a multi-start run; `Minus` starts are rejection
/// sampled until `B > 0` (at most 1000 draws per start).
pub fn initial_directions(model: &EnergyModel, config: &SolveConfig) -> Result<Vec<GridFunction>> {
    let mut starts = Vec::with_capacity(config.num_starts);
    for k in 0..config.num_starts {
        let mut rng = start_rng(config.seed, k);
        let mut found = None;
        for _ in 0..1000 {
            let w = bump_mixture(model.grid(), &mut rng, 0.05);
            if config.branch == Branch::Plus || model.b_integral(w.values()) > 0.0 {
                found = Some(w);
                break;
            }
        }
        match found {
            Some(w) => starts.push(w),
            None => {
                return Err(Error::NoAdmissibleStart(format!(
                    "no direction with B > 0 after 1000 draws (start {k}); b may have no positive part"
                )))
            }
        }
    }
    Ok(starts)
}

/// Multi-start minimization of `J_λ` over one branch of the Nehari manifold.
///
/// Converged runs beat non-converged ones; then lowest energy wins, with ties
/// (relative 1e-12) going to the lower start index.
pub fn minimize_branch(model: &EnergyModel, thresholds: &ThresholdReport, config: &SolveConfig) -> Result<SolutionReport> {
    config.validate()?;
    let lambda = model.params().lambda();
    if !(lambda < thresholds.lambda_star) {
        return Err(Error::OutsideTheoremRange {
            lambda,
            lambda_star: thresholds.lambda_star,
        });
    }
    let starts = initial_directions(model, config)?;
    let runs: Vec<Result<SolutionReport>> = starts
        .par_iter()
        .enumerate()
        .map(|(k, start)| {
            run_start(model, start.values(), config, thresholds.s_used).map(|run| build_report(model, run, config, k))
        })
        .collect();

    let mut best: Option<SolutionReport> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(rep) => {
                let better = match &best {
                    None => true,
                    Some(b) if rep.converged != b.converged => rep.converged,
                    Some(b) => {
                        let tol = 1e-12 * b.energy.abs().max(rep.energy.abs());
                        rep.energy < b.energy - tol
                    }
                };
                if better {
                    best = Some(rep);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_err.expect("at least one start"))
}
