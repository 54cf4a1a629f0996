//! Flat `key = value` run configuration with dotted section keys.
//!
//! ```text
//! # reference run
//! params.s = 0.4
//! params.p = 2
//! params.q = 0.5
//! params.r = 3
//! lambda.fraction = 0.5
//! grid.num_nodes = 255
//! weights.a = constant 1
//! weights.b = cos 1
//! ```
//!
//! Every key is optional; missing keys take the reference values above.
//! Unknown and repeated keys are errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::domain::{ProblemParams, WeightSpec};
use crate::error::{Error, Result};
use crate::functionals::SobolevConfig;
use crate::solver::SolveConfig;

/// How `λ` is chosen: a fixed value or a fraction of the computed `Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LambdaPolicy {
    Absolute { value: f64 },
    Fraction { fraction: f64 },
}

impl LambdaPolicy {
    pub fn resolve(&self, lambda_star: f64) -> f64 {
        match *self {
            Self::Absolute { value } => value,
            Self::Fraction { fraction } => fraction * lambda_star,
        }
    }
}

/// Exponents `(s, p, q, r)`; `λ` comes from the policy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Exponents {
    pub s: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

impl Exponents {
    pub fn with_lambda(&self, lambda: f64) -> Result<ProblemParams> {
        ProblemParams::new(self.s, self.p, self.q, self.r, lambda)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightsSection {
    pub a: WeightSpec,
    pub b: WeightSpec,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SobolevSection {
    /// Replaces the computed `S` when set.
    pub value: Option<f64>,
    pub margin: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl SobolevSection {
    pub fn estimator_config(&self) -> SobolevConfig {
        SobolevConfig {
            max_iters: self.max_iters,
            tol: self.tol,
            margin: self.margin,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberSection {
    /// Direction along which the fibering map is tabulated.
    pub direction: WeightSpec,
    pub curve_points: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSection {
    pub epsilons: Vec<f64>,
    pub theta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub pretty: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub params: Exponents,
    pub lambda: LambdaPolicy,
    pub num_nodes: usize,
    pub weights: WeightsSection,
    pub solver: SolveConfig,
    pub sobolev: SobolevSection,
    pub fiber: FiberSection,
    pub sweep: SweepSection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sobolev = SobolevConfig::default();
        Self {
            params: Exponents {
                s: 0.4,
                p: 2.0,
                q: 0.5,
                r: 3.0,
            },
            lambda: LambdaPolicy::Fraction { fraction: 0.5 },
            num_nodes: 255,
            weights: WeightsSection {
                a: WeightSpec::Constant { value: 1.0 },
                b: WeightSpec::Cosine { k: 1.0 },
            },
            solver: SolveConfig::default(),
            sobolev: SobolevSection {
                value: None,
                margin: sobolev.margin,
                max_iters: sobolev.max_iters,
                tol: sobolev.tol,
            },
            fiber: FiberSection {
                direction: WeightSpec::Gaussian {
                    center: 0.0,
                    width: 0.5,
                },
                curve_points: 1000,
            },
            sweep: SweepSection {
                epsilons: vec![0.5, 0.25, 0.125],
                theta: 0.5,
            },
            output: OutputSection {
                dir: PathBuf::from("out"),
                pretty: true,
            },
        }
    }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got `{value}`"))),
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text, path.parent())
    }

    /// Parses config text; relative `csv` weight paths resolve against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if entries.insert(key.to_string(), value.to_string()).is_some() {
                return Err(Error::Config(format!("line {}: `{key}` given twice", lineno + 1)));
            }
        }

        let mut cfg = Self::default();
        let mut lambda_keys = 0;
        for (key, value) in &entries {
            let (k, v) = (key.as_str(), value.as_str());
            match k {
                "params.s" => cfg.params.s = num(k, v)?,
                "params.p" => cfg.params.p = num(k, v)?,
                "params.q" => cfg.params.q = num(k, v)?,
                "params.r" => cfg.params.r = num(k, v)?,
                "lambda.value" => {
                    cfg.lambda = LambdaPolicy::Absolute { value: num(k, v)? };
                    lambda_keys += 1;
                }
                "lambda.fraction" => {
                    cfg.lambda = LambdaPolicy::Fraction { fraction: num(k, v)? };
                    lambda_keys += 1;
                }
                "grid.num_nodes" => cfg.num_nodes = num(k, v)?,
                "weights.a" => cfg.weights.a = WeightSpec::parse(v, base_dir)?,
                "weights.b" => cfg.weights.b = WeightSpec::parse(v, base_dir)?,
                "solver.max_iters" => cfg.solver.max_iters = num(k, v)?,
                "solver.step0" => cfg.solver.step0 = num(k, v)?,
                "solver.shrink" => cfg.solver.shrink = num(k, v)?,
                "solver.armijo_c" => cfg.solver.armijo_c = num(k, v)?,
                "solver.grad_tol" => cfg.solver.grad_tol = num(k, v)?,
                "solver.seed" => cfg.solver.seed = num(k, v)?,
                "solver.num_starts" => cfg.solver.num_starts = num(k, v)?,
                "solver.newton_switch" => cfg.solver.newton_switch = num(k, v)?,
                "solver.max_newton" => cfg.solver.max_newton = num(k, v)?,
                "sobolev.value" => cfg.sobolev.value = Some(num(k, v)?),
                "sobolev.margin" => cfg.sobolev.margin = num(k, v)?,
                "sobolev.max_iters" => cfg.sobolev.max_iters = num(k, v)?,
                "sobolev.tol" => cfg.sobolev.tol = num(k, v)?,
                "fiber.direction" => cfg.fiber.direction = WeightSpec::parse(v, base_dir)?,
                "fiber.curve_points" => cfg.fiber.curve_points = num(k, v)?,
                "sweep.epsilons" => {
                    cfg.sweep.epsilons = v
                        .split(',')
                        .map(|e| num(k, e.trim()))
                        .collect::<Result<_>>()?
                }
                "sweep.theta" => cfg.sweep.theta = num(k, v)?,
                "output.dir" => cfg.output.dir = PathBuf::from(v),
                "output.pretty" => cfg.output.pretty = flag(k, v)?,
                other => return Err(Error::Config(format!("unknown key `{other}`"))),
            }
        }
        if lambda_keys > 1 {
            return Err(Error::Config(
                "give either lambda.value or lambda.fraction, not both".into(),
            ));
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every invariant that does not need `Λ`.
    pub fn validate(&self) -> Result<()> {
        // λ is checked separately once the policy is resolved.
        self.params.with_lambda(1.0)?;
        match self.lambda {
            LambdaPolicy::Absolute { value } if !(value > 0.0) => {
                return Err(Error::InvalidParams(format!("λ > 0 violated: λ = {value}")));
            }
            LambdaPolicy::Fraction { fraction } if !(fraction > 0.0) => {
                return Err(Error::Config(format!(
                    "lambda.fraction must be positive (got {fraction})"
                )));
            }
            _ => {}
        }
        if self.num_nodes < 3 {
            return Err(Error::Config(format!(
                "grid.num_nodes must be ≥ 3 (got {})",
                self.num_nodes
            )));
        }
        self.solver.validate()?;
        if let Some(v) = self.sobolev.value {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("sobolev.value must be positive (got {v})")));
            }
        }
        if !(self.sobolev.margin >= 0.0 && self.sobolev.margin < 1.0) {
            return Err(Error::Config("sobolev.margin must lie in [0, 1)".into()));
        }
        if self.fiber.curve_points < 2 {
            return Err(Error::Config("fiber.curve_points must be ≥ 2".into()));
        }
        if !(self.sweep.theta > 0.0 && self.sweep.theta < 1.0) {
            return Err(Error::Config(format!(
                "sweep.theta must lie in (0, 1) (got {})",
                self.sweep.theta
            )));
        }
        for &eps in &self.sweep.epsilons {
            self.params
                .with_lambda(1.0)
                .and_then(|p| p.with_r(p.p() - 1.0 + eps))
                .map_err(|e| Error::Config(format!("sweep.epsilons: ε = {eps} not admissible ({e})")))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_reference() {
        let cfg = RunConfig::parse("", None).unwrap();
        assert_eq!(cfg.params, RunConfig::default().params);
        assert_eq!(cfg.num_nodes, 255);
        assert_eq!(cfg.lambda, LambdaPolicy::Fraction { fraction: 0.5 });
        assert_eq!(cfg.weights.b, WeightSpec::Cosine { k: 1.0 });
    }

    #[test]
    fn keys_and_comments() {
        let cfg = RunConfig::parse(
            "# header\nparams.r = 2.5  # trailing\nlambda.value = 0.01\n\ngrid.num_nodes=63\nweights.a = gaussian 0 0.3\nsweep.epsilons = 0.5, 0.25\noutput.pretty = false\n",
            None,
        )
        .unwrap();
        assert_eq!(cfg.params.r, 2.5);
        assert_eq!(cfg.lambda, LambdaPolicy::Absolute { value: 0.01 });
        assert_eq!(cfg.num_nodes, 63);
        assert_eq!(cfg.sweep.epsilons, vec![0.5, 0.25]);
        assert!(!cfg.output.pretty);
    }

    #[test]
    fn invalid_q_names_the_constraint() {
        let err = RunConfig::parse("params.q = 1.5", None).unwrap_err().to_string();
        assert!(err.contains("0 < q < 1"), "{err}");
    }

    #[test]
    fn supercritical_r_names_the_constraint() {
        let err = RunConfig::parse("params.r = 9.5", None).unwrap_err().to_string();
        assert!(err.contains("p_s^* − 1"), "{err}");
    }

    #[test]
    fn rejects_unknown_duplicate_and_conflicting_keys() {
        assert!(RunConfig::parse("params.x = 1", None).is_err());
        assert!(RunConfig::parse("params.s = 0.4\nparams.s = 0.3", None).is_err());
        assert!(RunConfig::parse("lambda.value = 0.1\nlambda.fraction = 0.5", None).is_err());
        assert!(RunConfig::parse("params.s", None).is_err());
        assert!(RunConfig::parse("solver.shrink = 1.5", None).is_err());
        assert!(RunConfig::parse("sweep.epsilons = 0.5, 12", None).is_err());
    }

    #[test]
    fn fraction_policy_resolves_against_threshold() {
        assert_eq!(LambdaPolicy::Fraction { fraction: 0.5 }.resolve(4.0), 2.0);
        assert_eq!(LambdaPolicy::Absolute { value: 0.3 }.resolve(4.0), 0.3);
    }
}
