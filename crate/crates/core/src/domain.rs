//! Problem parameters, the uniform grid on `Ω = (-1, 1)`, nodal functions with
//! implicit zero extension, and weight-function ingestion.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sum::ordered_sum;

/// Space dimension of the reference model.
pub const DIM: f64 = 1.0;

/// Exponent/coefficient tuple `(s, p, q, r, λ)` for the one-dimensional problem.
///
/// Constructed only through [`ProblemParams::new`], which enforces
/// `0 < s < 1`, `p·s < 1`, `0 < q < 1`, `q < p − 1 < r < p_s^* − 1`, `λ > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    s: f64,
    p: f64,
    q: f64,
    r: f64,
    lambda: f64,
}

impl ProblemParams {
    pub fn new(s: f64, p: f64, q: f64, r: f64, lambda: f64) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        for (name, v) in [("s", s), ("p", p), ("q", q), ("r", r), ("lambda", lambda)] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite (got {v})"));
            }
        }
        if !(s > 0.0 && s < 1.0) {
            return bad(format!("0 < s < 1 violated: s = {s}"));
        }
        if !(p > 1.0) {
            return bad(format!("p > 1 violated: p = {p}"));
        }
        if !(p * s < DIM) {
            return bad(format!("n = 1 > p·s violated: p·s = {}", p * s));
        }
        if !(q > 0.0 && q < 1.0) {
            return bad(format!("0 < q < 1 violated: q = {q}"));
        }
        if !(q < p - 1.0) {
            return bad(format!("q < p − 1 violated: q = {q}, p − 1 = {}", p - 1.0));
        }
        if !(r > p - 1.0) {
            return bad(format!("p − 1 < r violated: r = {r} ≤ p − 1 = {}", p - 1.0));
        }
        let p_star = DIM * p / (DIM - p * s);
        if !(r < p_star - 1.0) {
            return bad(format!(
                "r < p_s^* − 1 violated: r = {r} ≥ p_s^* − 1 = {}",
                p_star - 1.0
            ));
        }
        if !(lambda > 0.0) {
            return bad(format!("λ > 0 violated: λ = {lambda}"));
        }
        Ok(Self { s, p, q, r, lambda })
    }

    pub fn s(&self) -> f64 {
        self.s
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn r(&self) -> f64 {
        self.r
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `p·s`, the kernel's homogeneity offset.
    pub fn ps(&self) -> f64 {
        self.p * self.s
    }

    /// Fractional critical exponent `p_s^* = np/(n − ps)` with `n = 1`.
    pub fn p_star(&self) -> f64 {
        DIM * self.p / (DIM - self.ps())
    }

    /// `p − 1 + q`
    pub fn sub_gap(&self) -> f64 {
        self.p - 1.0 + self.q
    }

    /// `r − p + 1`
    pub fn super_gap(&self) -> f64 {
        self.r - self.p + 1.0
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<Self> {
        Self::new(self.s, self.p, self.q, self.r, lambda)
    }

    pub fn with_r(&self, r: f64) -> Result<Self> {
        Self::new(self.s, self.p, self.q, r, self.lambda)
    }
}

/// Uniform interior grid on `(-1, 1)`: `x_i = -1 + i·h`, `h = 2/(N+1)`,
/// `i = 1..=N`. Boundary nodes are excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    h: f64,
    nodes: Vec<f64>,
}

impl Grid {
    pub fn new(num_nodes: usize) -> Result<Self> {
        if num_nodes < 3 {
            return Err(Error::InvalidGrid(format!(
                "num_nodes must be at least 3 (got {num_nodes})"
            )));
        }
        let h = 2.0 / (num_nodes as f64 + 1.0);
        let nodes = (1..=num_nodes).map(|i| -1.0 + i as f64 * h).collect();
        Ok(Self { h, nodes })
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Per-node quadrature weight; uniform `h`.
    pub fn quad_weight(&self, _i: usize) -> f64 {
        self.h
    }

    /// Total quadrature mass `N·h`.
    pub fn total_weight(&self) -> f64 {
        self.num_nodes() as f64 * self.h
    }
}

/// Builds the uniform grid with `num_nodes` interior nodes.
pub fn build_grid(num_nodes: usize) -> Result<Arc<Grid>> {
    Grid::new(num_nodes).map(Arc::new)
}

/// Nodal values on a grid. The value is implicitly zero on `∂Ω` and outside
/// `Ω`; that extension is never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "expected {} nodal values, got {}",
                grid.num_nodes(),
                values.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite nodal value {} at node {i}",
                values[i]
            )));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.num_nodes();
        Self {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Replaces the values, keeping the grid. Panics on a length mismatch.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), self.values.len());
        Self {
            grid: Arc::clone(&self.grid),
            values,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m: f64, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Reflection `w(x) ↦ w(-x)`; exact on the symmetric grid.
    pub fn reflected(&self) -> Self {
        let mut values = self.values.clone();
        values.reverse();
        self.with_values(values)
    }

    /// Writes `x,value` rows with 17 significant digits.
    pub fn write_csv(&self, path: &Path, value_header: &str) -> Result<()> {
        std::fs::write(path, self.to_csv(value_header))?;
        Ok(())
    }

    pub fn to_csv(&self, value_header: &str) -> String {
        let mut out = format!("x,{value_header}\n");
        for (x, v) in self.grid.nodes().iter().zip(&self.values) {
            out.push_str(&format!("{x:.16e},{v:.16e}\n"));
        }
        out
    }

    /// Reads a CSV written by [`GridFunction::to_csv`] back onto `grid`. The
    /// abscissas must match the grid nodes exactly.
    pub fn from_csv(grid: Arc<Grid>, text: &str) -> Result<Self> {
        let table = parse_xy_csv(text)?;
        if table.len() != grid.num_nodes() {
            return Err(Error::InvalidArgument(format!(
                "CSV has {} rows, grid has {} nodes",
                table.len(),
                grid.num_nodes()
            )));
        }
        for ((x, _), node) in table.iter().zip(grid.nodes()) {
            if x != node {
                return Err(Error::InvalidArgument(format!(
                    "CSV abscissa {x} does not match grid node {node}"
                )));
            }
        }
        Self::new(grid, table.into_iter().map(|(_, v)| v).collect())
    }
}

/// Nodewise `max(w, 0)`.
pub fn positive_part(w: &GridFunction) -> GridFunction {
    w.map(|v| v.max(0.0))
}

/// `Σ_i h·f_i^m`, the discrete Lebesgue integral of `f^m`.
pub fn lp_weighted_sum(f: &GridFunction, exponent: f64) -> Result<f64> {
    if !(exponent > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "exponent must be positive (got {exponent})"
        )));
    }
    let integer = exponent.fract() == 0.0;
    if !integer {
        if let Some(v) = f.values().iter().find(|v| **v < 0.0) {
            return Err(Error::InvalidArgument(format!(
                "negative base {v} with fractional exponent {exponent}"
            )));
        }
    }
    let h = f.grid().spacing();
    Ok(ordered_sum(f.values().iter().map(|&v| h * v.powf(exponent))))
}

/// Discrete `(Σ h |f_i|^m)^{1/m}`.
pub fn lp_norm(values: &[f64], h: f64, m: f64) -> f64 {
    ordered_sum(values.iter().map(|v| h * v.abs().powf(m))).powf(1.0 / m)
}

/// A weight-function description that can be sampled on any grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightSpec {
    Constant { value: f64 },
    /// `cos(k·π·x)`
    Cosine { k: f64 },
    /// `exp(-((x - center)/width)^2)`
    Gaussian { center: f64, width: f64 },
    /// Linearly interpolated `(x, value)` table spanning `[-1, 1]`.
    Tabulated { points: Vec<(f64, f64)> },
}

impl WeightSpec {
    /// Parses the textual form used in config files:
    /// `constant <c>`, `cos <k>`, `gaussian <center> <width>`, `csv <path>`.
    /// A relative CSV path is resolved against `base_dir`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self> {
        let mut parts = text.split_whitespace();
        let kind = parts
            .next()
            .ok_or_else(|| Error::InvalidWeight("empty weight spec".into()))?;
        let rest: Vec<&str> = parts.collect();
        let nums = |expected: usize| -> Result<Vec<f64>> {
            if rest.len() != expected {
                return Err(Error::InvalidWeight(format!(
                    "`{kind}` takes {expected} argument(s), got {}",
                    rest.len()
                )));
            }
            rest.iter()
                .map(|s| {
                    s.parse::<f64>()
                        .map_err(|_| Error::InvalidWeight(format!("bad number `{s}` in `{text}`")))
                })
                .collect()
        };
        match kind {
            "constant" => Ok(Self::Constant { value: nums(1)?[0] }),
            "cos" => Ok(Self::Cosine { k: nums(1)?[0] }),
            "gaussian" => {
                let v = nums(2)?;
                Ok(Self::Gaussian {
                    center: v[0],
                    width: v[1],
                })
            }
            "csv" => {
                if rest.len() != 1 {
                    return Err(Error::InvalidWeight("`csv` takes one path".into()));
                }
                let path = Path::new(rest[0]);
                let path = match base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.to_path_buf(),
                };
                let text = std::fs::read_to_string(&path).map_err(|e| {
                    Error::InvalidWeight(format!("cannot read {}: {e}", path.display()))
                })?;
                Ok(Self::Tabulated {
                    points: parse_xy_csv(&text)?,
                })
            }
            other => Err(Error::InvalidWeight(format!("unknown weight spec `{other}`"))),
        }
    }
}

impl fmt::Display for WeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Constant { value } => write!(f, "constant {value}"),
            Self::Cosine { k } => write!(f, "cos {k}"),
            Self::Gaussian { center, width } => write!(f, "gaussian {center} {width}"),
            Self::Tabulated { points } => write!(f, "tabulated ({} points)", points.len()),
        }
    }
}

/// Parses two-column `x,value` CSV; a non-numeric first line is a header.
/// x must be strictly increasing.
pub fn parse_xy_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut points = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return Err(Error::InvalidWeight(format!(
                "line {}: expected 2 columns, got {}",
                lineno + 1,
                cols.len()
            )));
        }
        match (cols[0].parse::<f64>(), cols[1].parse::<f64>()) {
            (Ok(x), Ok(v)) => {
                if !x.is_finite() || !v.is_finite() {
                    return Err(Error::InvalidWeight(format!(
                        "line {}: non-finite entry",
                        lineno + 1
                    )));
                }
                if let Some(&(prev, _)) = points.last() {
                    if x <= prev {
                        return Err(Error::InvalidWeight(format!(
                            "line {}: x = {x} is not strictly increasing",
                            lineno + 1
                        )));
                    }
                }
                points.push((x, v));
            }
            _ if points.is_empty() => continue, // header
            _ => {
                return Err(Error::InvalidWeight(format!(
                    "line {}: cannot parse `{line}`",
                    lineno + 1
                )))
            }
        }
    }
    Ok(points)
}

/// Samples a weight spec at the grid nodes.
pub fn load_weight(spec: &WeightSpec, grid: &Arc<Grid>) -> Result<GridFunction> {
    let values: Vec<f64> = match spec {
        WeightSpec::Constant { value } => vec![*value; grid.num_nodes()],
        WeightSpec::Cosine { k } => grid
            .nodes()
            .iter()
            .map(|&x| (k * std::f64::consts::PI * x).cos())
            .collect(),
        WeightSpec::Gaussian { center, width } => {
            if !(*width > 0.0) {
                return Err(Error::InvalidWeight(format!(
                    "gaussian width must be positive (got {width})"
                )));
            }
            grid.nodes()
                .iter()
                .map(|&x| (-((x - center) / width).powi(2)).exp())
                .collect()
        }
        WeightSpec::Tabulated { points } => {
            let (first, last) = match (points.first(), points.last()) {
                (Some(f), Some(l)) if points.len() >= 2 => (f.0, l.0),
                _ => {
                    return Err(Error::InvalidWeight(
                        "tabulated weight needs at least two points".into(),
                    ))
                }
            };
            if first > -1.0 || last < 1.0 {
                return Err(Error::InvalidWeight(format!(
                    "table spans [{first}, {last}], must cover [-1, 1]"
                )));
            }
            if points.windows(2).any(|w| w[1].0 <= w[0].0) {
                return Err(Error::InvalidWeight("table x not strictly increasing".into()));
            }
            grid.nodes()
                .iter()
                .map(|&x| interpolate(points, x))
                .collect()
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidWeight(format!("{spec} produced non-finite values")));
    }
    GridFunction::new(Arc::clone(grid), values)
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let k = points.partition_point(|&(xi, _)| xi <= x);
    if k == 0 {
        return points[0].1;
    }
    if k == points.len() {
        return points[k - 1].1;
    }
    let (x0, y0) = points[k - 1];
    let (x1, y1) = points[k];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// The two coefficient functions: `a` multiplies the singular term, `b` the
/// sign-changing superlinear term.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightPair {
    a: GridFunction,
    b: GridFunction,
}

impl WeightPair {
    /// Checks `a > 0` at every node and that `b` has a strictly positive nodal value.
    pub fn new(a: GridFunction, b: GridFunction) -> Result<Self> {
        let pair = Self::new_unchecked(a, b)?;
        if let Some(i) = pair.a.values().iter().position(|&v| v <= 0.0) {
            return Err(Error::InvalidWeight(format!(
                "a must be strictly positive; a = {} at node {i}",
                pair.a.values()[i]
            )));
        }
        if !pair.b.values().iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidWeight(
                "b must have a nontrivial positive part (b⁺ ≢ 0)".into(),
            ));
        }
        Ok(pair)
    }

    /// Skips the sign checks on `a` and `b`; only grid agreement is enforced.
    /// Used to probe degenerate weights such as `b ≤ 0`.
    pub fn new_unchecked(a: GridFunction, b: GridFunction) -> Result<Self> {
        if a.grid() != b.grid() {
            return Err(Error::InvalidWeight("a and b live on different grids".into()));
        }
        Ok(Self { a, b })
    }

    pub fn from_specs(a: &WeightSpec, b: &WeightSpec, grid: &Arc<Grid>) -> Result<Self> {
        Self::new(load_weight(a, grid)?, load_weight(b, grid)?)
    }

    pub fn a(&self) -> &GridFunction {
        &self.a
    }

    pub fn b(&self) -> &GridFunction {
        &self.b
    }

    pub fn grid(&self) -> &Arc<Grid> {
        self.a.grid()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> ProblemParams {
        ProblemParams::new(0.4, 2.0, 0.5, 3.0, 0.1).unwrap()
    }

    #[test]
    fn grid_three_nodes() {
        let g = Grid::new(3).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.nodes(), &[-0.5, 0.0, 0.5]);
        assert_eq!(g.total_weight(), 1.5);
    }

    #[test]
    fn grid_255_spacing() {
        let g = Grid::new(255).unwrap();
        assert_eq!(g.spacing(), 0.0078125);
        assert!(g.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(g.nodes()[0] > -1.0 && *g.nodes().last().unwrap() < 1.0);
        assert!(g.total_weight() < 2.0);
    }

    #[test]
    fn grid_rejects_two_nodes() {
        assert!(matches!(Grid::new(2), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn params_reference_p_star() {
        let p = reference();
        assert!((p.p_star() - 10.0).abs() < 1e-12);
        assert!((p.ps() - 0.8).abs() < 1e-15);
    }

    #[test]
    fn params_violations_name_constraint() {
        let msg = |r: Result<ProblemParams>| match r {
            Err(Error::InvalidParams(m)) => m,
            other => panic!("expected InvalidParams, got {other:?}"),
        };
        assert!(msg(ProblemParams::new(0.4, 2.0, 1.5, 3.0, 0.1)).contains("0 < q < 1"));
        assert!(msg(ProblemParams::new(0.4, 2.0, 0.5, 9.5, 0.1)).contains("r < p_s^* − 1"));
        assert!(msg(ProblemParams::new(0.6, 2.0, 0.5, 3.0, 0.1)).contains("p·s"));
        assert!(msg(ProblemParams::new(0.4, 2.0, 0.5, 0.9, 0.1)).contains("p − 1 < r"));
        assert!(msg(ProblemParams::new(0.3, 1.4, 0.5, 3.0, 0.1)).contains("q < p − 1"));
        assert!(msg(ProblemParams::new(0.4, 2.0, 0.5, 3.0, 0.0)).contains("λ > 0"));
        assert!(msg(ProblemParams::new(1.0, 2.0, 0.5, 3.0, 0.1)).contains("0 < s < 1"));
    }

    #[test]
    fn weight_constant_and_cosine() {
        let g = build_grid(3).unwrap();
        let one = load_weight(&WeightSpec::Constant { value: 1.0 }, &g).unwrap();
        assert_eq!(one.values(), &[1.0, 1.0, 1.0]);
        let c = load_weight(&WeightSpec::Cosine { k: 1.0 }, &g).unwrap();
        assert!(c.values()[2].abs() < 1e-15);
        assert_eq!(c.values()[1], 1.0);
    }

    #[test]
    fn weight_csv_interpolates_midpoint() {
        let g = build_grid(3).unwrap();
        let spec = WeightSpec::Tabulated {
            points: parse_xy_csv("x,value\n-1,0\n1,2\n").unwrap(),
        };
        let w = load_weight(&spec, &g).unwrap();
        assert_eq!(w.values()[1], 1.0);
        assert_eq!(w.values()[0], 0.5);
    }

    #[test]
    fn weight_csv_must_cover_domain() {
        let g = build_grid(3).unwrap();
        let spec = WeightSpec::Tabulated {
            points: vec![(-0.5, 0.0), (1.0, 1.0)],
        };
        assert!(load_weight(&spec, &g).is_err());
    }

    #[test]
    fn weight_csv_rejects_unsorted_and_nonfinite() {
        assert!(parse_xy_csv("-1,0\n0.5,1\n0.2,1\n").is_err());
        assert!(parse_xy_csv("-1,0\n1,inf\n").is_err());
        assert!(parse_xy_csv("-1,0,3\n").is_err());
    }

    #[test]
    fn weight_spec_parse() {
        assert_eq!(
            WeightSpec::parse("cos 1", None).unwrap(),
            WeightSpec::Cosine { k: 1.0 }
        );
        assert_eq!(
            WeightSpec::parse("gaussian 0 0.3", None).unwrap(),
            WeightSpec::Gaussian {
                center: 0.0,
                width: 0.3
            }
        );
        assert!(matches!(
            WeightSpec::parse("sinc 1", None),
            Err(Error::InvalidWeight(_))
        ));
        assert!(WeightSpec::parse("constant", None).is_err());
    }

    #[test]
    fn weight_gaussian_nonfinite_width() {
        let g = build_grid(3).unwrap();
        assert!(load_weight(&WeightSpec::Gaussian { center: 0.0, width: 0.0 }, &g).is_err());
    }

    #[test]
    fn weight_pair_checks_signs() {
        let g = build_grid(5).unwrap();
        let one = load_weight(&WeightSpec::Constant { value: 1.0 }, &g).unwrap();
        let neg = load_weight(&WeightSpec::Constant { value: -1.0 }, &g).unwrap();
        assert!(WeightPair::new(one.clone(), one.clone()).is_ok());
        assert!(WeightPair::new(neg.clone(), one.clone()).is_err());
        assert!(WeightPair::new(one.clone(), neg.clone()).is_err());
        assert!(WeightPair::new_unchecked(one, neg).is_ok());
    }

    #[test]
    fn positive_part_cases() {
        let g = build_grid(3).unwrap();
        let w = GridFunction::new(g.clone(), vec![-1.0, 0.0, 2.0]).unwrap();
        assert_eq!(positive_part(&w).values(), &[0.0, 0.0, 2.0]);
        let pos = GridFunction::new(g.clone(), vec![1.0, 0.0, 3.0]).unwrap();
        assert_eq!(positive_part(&pos), pos);
        let neg = GridFunction::new(g, vec![-1.0, -2.0, -3.0]).unwrap();
        assert_eq!(positive_part(&neg).values(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn lp_sum_cases() {
        let g = build_grid(3).unwrap();
        let one = GridFunction::new(g.clone(), vec![1.0; 3]).unwrap();
        assert_eq!(lp_weighted_sum(&one, 1.0).unwrap(), 1.5);
        assert_eq!(lp_weighted_sum(&GridFunction::zeros(g.clone()), 2.5).unwrap(), 0.0);
        let two = GridFunction::new(g.clone(), vec![2.0; 3]).unwrap();
        assert_eq!(lp_weighted_sum(&two, 3.0).unwrap(), 12.0);
        let neg = GridFunction::new(g, vec![-1.0, 1.0, 1.0]).unwrap();
        assert!(lp_weighted_sum(&neg, 0.5).is_err());
        assert!(lp_weighted_sum(&neg, 2.0).is_ok());
    }

    #[test]
    fn grid_function_rejects_nan() {
        let g = build_grid(3).unwrap();
        assert!(GridFunction::new(g.clone(), vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(GridFunction::new(g, vec![0.0; 4]).is_err());
    }
}
