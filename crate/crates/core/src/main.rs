use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use frac_nehari::cli::{self, exit, RunConfig};
use frac_nehari::error::{Error, Result};

#[derive(Parser, Debug)]
#[command(name = "frac-nehari", version, about = "Nehari-manifold thresholds and two-branch solver")]
struct Opt {
    /// Run configuration (`key = value` lines); reference values when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overrides `output.dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Multi-start seed, overrides `solver.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; changes speed only.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Sobolev constant, Λ, E_λ and the gap radii.
    Thresholds,
    /// Fibering map along `fiber.direction`, with a plot-ready curve.
    Fiber,
    /// Both Nehari branches and the gap check.
    Solve,
    /// Blow-up of the N^- solution as r approaches p - 1.
    SweepBlowup,
    /// Discrete Sobolev constant only.
    Sobolev,
}

fn load(opt: &Opt) -> Result<RunConfig> {
    let mut cfg = match &opt.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &opt.out {
        cfg.output.dir = out.clone();
    }
    if let Some(seed) = opt.seed {
        cfg.solver.seed = seed;
    }
    Ok(cfg)
}

fn run(cmd: Cmd, cfg: &RunConfig) -> Result<i32> {
    let dir = cfg.output.dir.display();
    match cmd {
        Cmd::Thresholds => {
            let t = cli::cmd_thresholds(cfg)?;
            println!(
                "S = {:.10e}  Λ = {:.10e}  λ = {:.10e}  A_λ = {:.10e}  A_0 = {:.10e}  -> {dir}/thresholds.json",
                t.s_value, t.lambda_star, t.lambda, t.a_lambda, t.a_zero
            );
        }
        Cmd::Sobolev => {
            let s = cli::cmd_sobolev(cfg)?;
            println!(
                "S = {:.10e} (converged: {}, {} iterations)  -> {dir}/sobolev.json",
                s.s_value, s.converged, s.iterations
            );
        }
        Cmd::Fiber => {
            let f = cli::cmd_fiber(cfg)?;
            println!("{:?}  t_max = {:.10e}  -> {dir}/fiber.json, {dir}/fiber_curve.csv", f.case, f.t_max);
        }
        Cmd::Solve => {
            let s = cli::cmd_solve(cfg)?;
            for r in [&s.plus, &s.minus] {
                println!(
                    "{:?}: J = {:.10e}  ‖w‖ = {:.10e}  residual = {:.3e}  converged = {}",
                    r.branch, r.energy, r.norm, r.residual, r.converged
                );
            }
            println!("gap ordering: {}  -> {dir}/gap.json", s.gap.ordering_ok);
            if !s.converged() {
                return Ok(exit::NOT_CONVERGED);
            }
        }
        Cmd::SweepBlowup => {
            let s = cli::cmd_sweep_blowup(cfg)?;
            for r in &s.rows {
                println!(
                    "ε = {:<6} ‖W‖ = {:.6e}  bound = {:.6e}  satisfied = {}",
                    r.epsilon, r.norm_w, r.bound, r.satisfied
                );
            }
            if let Some(fit) = s.fit {
                println!(
                    "slope: model fit {:.6}, straight line {:.6}, log(1/θ) = {:.6}",
                    fit.model_slope, fit.linear_slope, fit.target
                );
            }
            if !s.converged() {
                return Ok(exit::NOT_CONVERGED);
            }
        }
    }
    Ok(exit::OK)
}

fn main() -> ExitCode {
    let opt = Opt::parse();
    let outcome = load(&opt).and_then(|cfg| match opt.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("--threads: {e}")))?
            .install(|| run(opt.cmd, &cfg)),
        None => run(opt.cmd, &cfg),
    });
    let code = match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            cli::exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
