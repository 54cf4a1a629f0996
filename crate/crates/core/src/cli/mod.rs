//! Batch commands behind the `frac-nehari` binary. Each command resolves the
//! config, computes, writes its files into the output directory and returns
//! what it wrote so callers can decide the exit status.

pub mod config;
pub mod report;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{LambdaPolicy, RunConfig};
pub use report::{to_json_string, write_json, Envelope, VERSION};

use crate::domain::{build_grid, load_weight, GridFunction, WeightPair};
use crate::error::{Error, Result};
use crate::fiber::{Fiber, FiberReport};
use crate::functionals::{sobolev_estimate, EnergyModel, SobolevEstimate};
use crate::solver::{
    blowup_sweep, fit_blowup_slope, minimize_branch, verify_solution_pair, BlowupFit, Branch, GapReport,
    SolutionReport, SolveConfig, SweepRow,
};
use crate::thresholds::ThresholdReport;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const FAILURE: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const OUT_OF_RANGE: i32 = 3;
    pub const NOT_CONVERGED: i32 = 4;
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidParams(_)
        | Error::InvalidGrid(_)
        | Error::InvalidWeight(_)
        | Error::InvalidArgument(_)
        | Error::Config(_)
        | Error::NoPositivePart
        | Error::NoMinusPoint(_) => exit::CONFIG,
        Error::OutsideTheoremRange { .. } => exit::OUT_OF_RANGE,
        Error::NoAdmissibleStart(_) => exit::NOT_CONVERGED,
        Error::Bracketing(_) | Error::Io(_) | Error::Json(_) => exit::FAILURE,
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SobolevSummary {
    pub s_value: f64,
    pub s_used: f64,
    /// False when the value came from `sobolev.value`.
    pub estimated: bool,
    pub converged: bool,
    pub iterations: usize,
}

/// Grid, weights, `S`, `Λ` and the resolved `λ` for one config.
pub struct Setup {
    pub model: EnergyModel,
    pub sobolev: SobolevSummary,
    pub thresholds: ThresholdReport,
}

pub fn prepare(cfg: &RunConfig) -> Result<Setup> {
    cfg.validate()?;
    let grid = build_grid(cfg.num_nodes)?;
    let weights = WeightPair::from_specs(&cfg.weights.a, &cfg.weights.b, &grid)?;
    let probe = cfg.params.with_lambda(1.0)?;
    let model = EnergyModel::new(probe, weights);
    let sobolev = match cfg.sobolev.value {
        Some(v) => SobolevSummary {
            s_value: v,
            s_used: v * (1.0 - cfg.sobolev.margin),
            estimated: false,
            converged: true,
            iterations: 0,
        },
        None => {
            let est = sobolev_estimate(model.operator(), &probe, &cfg.sobolev.estimator_config());
            SobolevSummary {
                s_value: est.s_value,
                s_used: est.s_used(),
                estimated: true,
                converged: est.converged,
                iterations: est.iterations,
            }
        }
    };
    let (na, nb) = model.weight_norms();
    let lambda_star = ThresholdReport::new(&probe, na, nb, sobolev.s_value, sobolev.s_used)?.lambda_star;
    let params = cfg.params.with_lambda(cfg.lambda.resolve(lambda_star))?;
    let thresholds = ThresholdReport::new(&params, na, nb, sobolev.s_value, sobolev.s_used)?;
    Ok(Setup {
        model: model.with_params(params),
        sobolev,
        thresholds,
    })
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(&cfg.output.dir)?;
    Ok(cfg.output.dir.clone())
}

fn emit<P: Serialize>(cfg: &RunConfig, dir: &Path, file: &str, command: &str, payload: P) -> Result<PathBuf> {
    let path = dir.join(file);
    let env = Envelope {
        version: VERSION,
        command,
        config: cfg,
        payload,
    };
    write_json(&path, &env, cfg.output.pretty)?;
    Ok(path)
}

#[derive(Serialize)]
struct ThresholdPayload<'a> {
    sobolev: &'a SobolevSummary,
    thresholds: &'a ThresholdReport,
}

pub fn cmd_thresholds(cfg: &RunConfig) -> Result<ThresholdReport> {
    let setup = prepare(cfg)?;
    let dir = out_dir(cfg)?;
    emit(
        cfg,
        &dir,
        "thresholds.json",
        "thresholds",
        ThresholdPayload {
            sobolev: &setup.sobolev,
            thresholds: &setup.thresholds,
        },
    )?;
    Ok(setup.thresholds)
}

#[derive(Serialize)]
struct SobolevPayload<'a> {
    sobolev: &'a SobolevSummary,
    margin: f64,
    hat_quotient: f64,
}

pub fn cmd_sobolev(cfg: &RunConfig) -> Result<SobolevEstimate> {
    cfg.validate()?;
    let grid = build_grid(cfg.num_nodes)?;
    let weights = WeightPair::from_specs(&cfg.weights.a, &cfg.weights.b, &grid)?;
    let params = cfg.params.with_lambda(1.0)?;
    let model = EnergyModel::new(params, weights);
    let est = sobolev_estimate(model.operator(), &params, &cfg.sobolev.estimator_config());
    let dir = out_dir(cfg)?;
    let summary = SobolevSummary {
        s_value: est.s_value,
        s_used: est.s_used(),
        estimated: true,
        converged: est.converged,
        iterations: est.iterations,
    };
    emit(
        cfg,
        &dir,
        "sobolev.json",
        "sobolev",
        SobolevPayload {
            sobolev: &summary,
            margin: est.margin,
            hat_quotient: est.hat_quotient,
        },
    )?;
    est.minimizer.write_csv(&dir.join("sobolev_minimizer.csv"), "w")?;
    Ok(est)
}

/// `n` log-spaced points on `[lo, hi]` with `extra` merged in, sorted.
pub fn curve_points(lo: f64, hi: f64, n: usize, extra: &[f64]) -> Vec<f64> {
    let ratio = (hi / lo).ln();
    let mut ts: Vec<f64> = (0..n)
        .map(|k| lo * (ratio * k as f64 / (n - 1) as f64).exp())
        .chain(extra.iter().copied())
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    ts
}

#[derive(Serialize)]
struct FiberPayload<'a> {
    lambda_star: f64,
    fiber: &'a FiberReport,
}

pub fn cmd_fiber(cfg: &RunConfig) -> Result<FiberReport> {
    let setup = prepare(cfg)?;
    let th = &setup.thresholds;
    if !th.in_theorem_range {
        return Err(Error::OutsideTheoremRange {
            lambda: th.lambda,
            lambda_star: th.lambda_star,
        });
    }
    let dir_fn = load_weight(&cfg.fiber.direction, setup.model.grid())?;
    let triple = setup.model.triple(&dir_fn);
    if !(triple.a_integral > 0.0) {
        return Err(Error::NoPositivePart);
    }
    let fiber = Fiber::new(triple, setup.model.params());
    let report = fiber.roots()?;

    let mut special = report.case.roots();
    special.push(report.t_max);
    let lo = special.iter().copied().fold(f64::INFINITY, f64::min) / 100.0;
    let hi = special.iter().copied().fold(0.0, f64::max) * 100.0;
    let mut csv = String::from("t,phi,dphi,d2phi,psi\n");
    for t in curve_points(lo, hi, cfg.fiber.curve_points, &special) {
        let (phi, d1, d2) = fiber.phi(t)?;
        let psi = fiber.psi(t)?;
        writeln!(csv, "{t:.16e},{phi:.16e},{d1:.16e},{d2:.16e},{psi:.16e}").expect("write to String");
    }
    let dir = out_dir(cfg)?;
    std::fs::write(dir.join("fiber_curve.csv"), csv)?;
    emit(
        cfg,
        &dir,
        "fiber.json",
        "fiber",
        FiberPayload {
            lambda_star: th.lambda_star,
            fiber: &report,
        },
    )?;
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub thresholds: ThresholdReport,
    pub plus: SolutionReport,
    pub minus: SolutionReport,
    pub gap: GapReport,
}

impl SolveOutcome {
    pub fn converged(&self) -> bool {
        self.plus.converged && self.minus.converged
    }
}

#[derive(Serialize)]
struct SolvePayload<'a> {
    sobolev: &'a SobolevSummary,
    thresholds: &'a ThresholdReport,
    plus: &'a SolutionReport,
    minus: &'a SolutionReport,
    gap: &'a GapReport,
}

fn branch_config(cfg: &RunConfig, branch: Branch) -> SolveConfig {
    SolveConfig { branch, ..cfg.solver }
}

pub fn cmd_solve(cfg: &RunConfig) -> Result<SolveOutcome> {
    let setup = prepare(cfg)?;
    let th = &setup.thresholds;
    let plus = minimize_branch(&setup.model, th, &branch_config(cfg, Branch::Plus))?;
    let minus = minimize_branch(&setup.model, th, &branch_config(cfg, Branch::Minus))?;
    let gap = verify_solution_pair(&plus, &minus, th);

    let dir = out_dir(cfg)?;
    plus.w.write_csv(&dir.join("solution_plus.csv"), "w")?;
    minus.w.write_csv(&dir.join("solution_minus.csv"), "w")?;
    emit(
        cfg,
        &dir,
        "gap.json",
        "solve",
        SolvePayload {
            sobolev: &setup.sobolev,
            thresholds: th,
            plus: &plus,
            minus: &minus,
            gap: &gap,
        },
    )?;
    Ok(SolveOutcome {
        thresholds: setup.thresholds.clone(),
        plus,
        minus,
        gap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepOutcome {
    pub theta: f64,
    pub rows: Vec<SweepRow>,
    pub fit: Option<BlowupFit>,
}

impl SweepOutcome {
    pub fn converged(&self) -> bool {
        self.rows.iter().all(|r| r.converged)
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from("epsilon,lambda,norm_W,C_eps,bound,satisfied,converged\n");
    for r in rows {
        writeln!(
            csv,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
            r.epsilon, r.lambda, r.norm_w, r.c_eps, r.bound, r.satisfied, r.converged
        )
        .expect("write to String");
    }
    csv
}

pub fn cmd_sweep_blowup(cfg: &RunConfig) -> Result<SweepOutcome> {
    let setup = prepare(cfg)?;
    let theta = cfg.sweep.theta;
    let rows = blowup_sweep(
        &setup.model,
        &cfg.sweep.epsilons,
        theta,
        setup.sobolev.s_value,
        setup.sobolev.s_used,
        &cfg.solver,
    )?;
    let outcome = SweepOutcome {
        theta,
        fit: fit_blowup_slope(&rows, theta),
        rows,
    };
    let dir = out_dir(cfg)?;
    std::fs::write(dir.join("sweep.csv"), sweep_csv(&outcome.rows))?;
    emit(cfg, &dir, "sweep.json", "sweep-blowup", &outcome)?;
    Ok(outcome)
}

/// Reads a solution CSV written by `solve` back onto the grid of `cfg`.
pub fn read_solution(cfg: &RunConfig, path: &Path) -> Result<GridFunction> {
    let grid = build_grid(cfg.num_nodes)?;
    GridFunction::from_csv(grid, &std::fs::read_to_string(path)?)
}
