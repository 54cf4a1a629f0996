//! Fibering maps `φ_w(t) = J_λ(t·w)` and the ray function
//! `ψ_w(t) = t^{p−1−r}‖w‖^p − t^{−r−q}A − λB`, with `φ'_w(t) = t^r·ψ_w(t)`.
//!
//! Everything here is scalar algebra over a [`FunctionalTriple`]; the grid is
//! never touched.

use serde::Serialize;

use crate::domain::ProblemParams;
use crate::error::{Error, Result};
use crate::functionals::FunctionalTriple;

/// Expansion factor and cap for root bracketing around `t_max`.
const BRACKET_FACTOR: f64 = 10.0;
const BRACKET_CAP: f64 = 1e12;

/// Nehari-membership tolerance on `|‖w‖^p − A − λB| / ‖w‖^p`.
pub const NEHARI_TOL: f64 = 1e-8;
/// Relative width of the `N^0` band on `(p−1+q)‖w‖^p − λ(r+q)B`.
pub const ZERO_BAND: f64 = 1e-10;

/// The fibering map of one direction at one `λ`.
#[derive(Debug, Clone, Copy)]
pub struct Fiber {
    triple: FunctionalTriple,
    p: f64,
    q: f64,
    r: f64,
    lambda: f64,
}

fn check_t(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("fiber variable must be positive (got {t})")))
    }
}

impl Fiber {
    pub fn new(triple: FunctionalTriple, params: &ProblemParams) -> Self {
        Self::with_lambda(triple, params, params.lambda())
    }

    pub fn with_lambda(triple: FunctionalTriple, params: &ProblemParams, lambda: f64) -> Self {
        Self {
            triple,
            p: params.p(),
            q: params.q(),
            r: params.r(),
            lambda,
        }
    }

    pub fn triple(&self) -> &FunctionalTriple {
        &self.triple
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `(φ(t), φ'(t), φ''(t))`.
    pub fn phi(&self, t: f64) -> Result<(f64, f64, f64)> {
        check_t(t)?;
        let FunctionalTriple {
            seminorm_p: n,
            a_integral: a,
            b_integral: b,
        } = self.triple;
        let (p, q, r, l) = (self.p, self.q, self.r, self.lambda);
        let phi = t.powf(p) / p * n - t.powf(1.0 - q) / (1.0 - q) * a - l * t.powf(r + 1.0) / (r + 1.0) * b;
        let d1 = t.powf(p - 1.0) * n - t.powf(-q) * a - l * t.powf(r) * b;
        let d2 = (p - 1.0) * t.powf(p - 2.0) * n + q * t.powf(-q - 1.0) * a - l * r * t.powf(r - 1.0) * b;
        Ok((phi, d1, d2))
    }

    pub fn psi(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        Ok(self.psi_unchecked(t))
    }

    fn psi_unchecked(&self, t: f64) -> f64 {
        let FunctionalTriple {
            seminorm_p: n,
            a_integral: a,
            b_integral: b,
        } = self.triple;
        t.powf(self.p - 1.0 - self.r) * n - t.powf(-self.r - self.q) * a - self.lambda * b
    }

    /// Magnitude of the largest term of `ψ(t)`, the scale for relative checks.
    pub fn psi_scale(&self, t: f64) -> f64 {
        let FunctionalTriple {
            seminorm_p: n,
            a_integral: a,
            b_integral: b,
        } = self.triple;
        (t.powf(self.p - 1.0 - self.r) * n)
            .abs()
            .max((t.powf(-self.r - self.q) * a).abs())
            .max((self.lambda * b).abs())
    }

    /// `ψ'(t) = (p−1−r)t^{p−2−r}‖w‖^p + (r+q)t^{−r−q−1}A`.
    pub fn psi_prime(&self, t: f64) -> Result<f64> {
        check_t(t)?;
        let (p, q, r) = (self.p, self.q, self.r);
        Ok((p - 1.0 - r) * t.powf(p - 2.0 - r) * self.triple.seminorm_p
            + (r + q) * t.powf(-r - q - 1.0) * self.triple.a_integral)
    }

    /// `t_max = [(r+q)A / ((r−p+1)‖w‖^p)]^{1/(p−1+q)}`, the unique maximizer of ψ.
    pub fn t_max(&self) -> Result<f64> {
        let (p, q, r) = (self.p, self.q, self.r);
        let FunctionalTriple {
            seminorm_p: n,
            a_integral: a,
            ..
        } = self.triple;
        if !(a > 0.0) {
            return Err(Error::NoPositivePart);
        }
        if !(n > 0.0) {
            return Err(Error::InvalidArgument("zero seminorm".into()));
        }
        Ok(((r + q) * a / ((r - p + 1.0) * n)).powf(1.0 / (p - 1.0 + q)))
    }

    /// The `λ` at which `ψ(t_max) = 0` on this ray (`+∞` when `B ≤ 0`).
    pub fn ray_threshold(&self) -> Result<f64> {
        let t = self.t_max()?;
        let b = self.triple.b_integral;
        if b <= 0.0 {
            return Ok(f64::INFINITY);
        }
        let lead = t.powf(self.p - 1.0 - self.r) * self.triple.seminorm_p
            - t.powf(-self.r - self.q) * self.triple.a_integral;
        Ok(lead / b)
    }

    /// Finds the Nehari crossings of the ray by bracketed bisection.
    pub fn roots(&self) -> Result<FiberReport> {
        if !(self.triple.a_integral > 0.0) {
            return Ok(FiberReport {
                triple: self.triple,
                lambda: self.lambda,
                t_max: f64::NAN,
                psi_at_tmax: f64::NAN,
                case: FiberCase::NoPositivePart,
                phi_at_roots: vec![],
                phi_second_at_roots: vec![],
            });
        }
        let t_max = self.t_max()?;
        let psi_max = self.psi_unchecked(t_max);
        if !(psi_max > 0.0) {
            return Err(Error::Bracketing(format!(
                "ψ(t_max) = {psi_max} ≤ 0 (λ at or beyond this ray's threshold)"
            )));
        }
        let psi = |t: f64| self.psi_unchecked(t);

        let mut lo = t_max / BRACKET_FACTOR;
        let mut hi = t_max;
        while psi(lo) >= 0.0 {
            hi = lo;
            lo /= BRACKET_FACTOR;
            if lo < t_max / BRACKET_CAP {
                return Err(Error::Bracketing("no sign change below t_max".into()));
            }
        }
        let t1 = bisect(psi, lo, hi);

        let case = if self.triple.b_integral > 0.0 {
            let mut lo = t_max;
            let mut hi = t_max * BRACKET_FACTOR;
            while psi(hi) >= 0.0 {
                lo = hi;
                hi *= BRACKET_FACTOR;
                if hi > t_max * BRACKET_CAP {
                    return Err(Error::Bracketing("no sign change above t_max".into()));
                }
            }
            FiberCase::TwoRoots {
                t1,
                t2: bisect(psi, lo, hi),
            }
        } else {
            FiberCase::OneRoot { t1 }
        };

        let roots = case.roots();
        let mut phi_at_roots = Vec::with_capacity(roots.len());
        let mut phi_second_at_roots = Vec::with_capacity(roots.len());
        for t in roots {
            let (f, _, f2) = self.phi(t)?;
            phi_at_roots.push(f);
            phi_second_at_roots.push(f2);
        }
        Ok(FiberReport {
            triple: self.triple,
            lambda: self.lambda,
            t_max,
            psi_at_tmax: psi_max,
            case,
            phi_at_roots,
            phi_second_at_roots,
        })
    }
}

/// Bisection on a bracket where `f` changes sign, run to full precision.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    let mut fhi = f(hi);
    debug_assert!(flo.signum() != fhi.signum());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    if flo.abs() <= fhi.abs() {
        lo
    } else {
        hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FiberCase {
    /// `B > 0`: `t1·w ∈ N^+`, `t2·w ∈ N^-`.
    TwoRoots { t1: f64, t2: f64 },
    /// `B ≤ 0`: only `t1·w ∈ N^+`.
    OneRoot { t1: f64 },
    /// `A = 0`; the ray carries no Nehari point.
    NoPositivePart,
}

impl FiberCase {
    pub fn roots(&self) -> Vec<f64> {
        match *self {
            Self::TwoRoots { t1, t2 } => vec![t1, t2],
            Self::OneRoot { t1 } => vec![t1],
            Self::NoPositivePart => vec![],
        }
    }

    pub fn t1(&self) -> Option<f64> {
        match *self {
            Self::TwoRoots { t1, .. } | Self::OneRoot { t1 } => Some(t1),
            Self::NoPositivePart => None,
        }
    }

    pub fn t2(&self) -> Option<f64> {
        match *self {
            Self::TwoRoots { t2, .. } => Some(t2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberReport {
    pub triple: FunctionalTriple,
    pub lambda: f64,
    pub t_max: f64,
    pub psi_at_tmax: f64,
    pub case: FiberCase,
    pub phi_at_roots: Vec<f64>,
    pub phi_second_at_roots: Vec<f64>,
}

/// Convenience wrapper: roots of the ray through a direction with the given triple.
pub fn fiber_roots(triple: FunctionalTriple, params: &ProblemParams) -> Result<FiberReport> {
    Fiber::new(triple, params).roots()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NehariClass {
    Plus,
    Minus,
    Zero,
    Off,
}

/// Classifies a point by the Nehari defect and the sign of
/// `D = (p−1+q)‖w‖^p − λ(r+q)B`, which equals `φ''_w(1)` on `N_λ`.
pub fn nehari_classify(triple: &FunctionalTriple, params: &ProblemParams, lambda: f64) -> NehariClass {
    let n = triple.seminorm_p;
    if triple.nehari_defect(lambda).abs() > NEHARI_TOL * n {
        return NehariClass::Off;
    }
    let d = params.sub_gap() * n - lambda * (params.r() + params.q()) * triple.b_integral;
    let band = ZERO_BAND * n;
    if d > band {
        NehariClass::Plus
    } else if d < -band {
        NehariClass::Minus
    } else {
        NehariClass::Zero
    }
}

/// `ρ(t) = αt^p − βt^{1−q}`, the lower envelope of `J_λ` on `N_λ` as a
/// function of `‖w‖`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CoercivityBound {
    pub alpha: f64,
    pub beta: f64,
    pub t_min: f64,
    pub rho_min: f64,
    /// The simplified constant printed alongside `ρ(t_min)` in the source
    /// derivation. It drops the `‖a‖` and `S` factors of `β`, so it is
    /// reported for comparison only and never used as a bound.
    pub printed_constant: f64,
    #[serde(skip)]
    p: f64,
    #[serde(skip)]
    q: f64,
}

impl CoercivityBound {
    pub fn new(params: &ProblemParams, norm_a: f64, sobolev: f64) -> Self {
        let (p, q, r) = (params.p(), params.q(), params.r());
        let g = params.sub_gap();
        let alpha = 1.0 / p - 1.0 / (r + 1.0);
        let beta = (1.0 / (1.0 - q) - 1.0 / (r + 1.0)) * norm_a * sobolev.powf(-(1.0 - q) / p);
        let t_min = (beta * (1.0 - q) / (p * alpha)).powf(1.0 / g);
        let rho_min = -(g / p) * beta.powf(p / g) * ((1.0 - q) / (p * alpha)).powf((1.0 - q) / g);
        let printed_constant = -(g * (r + 1.0 - p)) / ((1.0 - q) * (r + 1.0))
            * ((r + q) / (p * (r + 1.0 - p))).powf(p / g);
        Self {
            alpha,
            beta,
            t_min,
            rho_min,
            printed_constant,
            p,
            q,
        }
    }

    pub fn rho(&self, t: f64) -> f64 {
        self.alpha * t.powf(self.p) - self.beta * t.powf(1.0 - self.q)
    }
}

pub fn coercivity_bound(params: &ProblemParams, norm_a: f64, sobolev: f64) -> CoercivityBound {
    CoercivityBound::new(params, norm_a, sobolev)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(lambda: f64) -> ProblemParams {
        ProblemParams::new(0.4, 2.0, 0.5, 3.0, lambda).unwrap()
    }

    fn unit() -> FunctionalTriple {
        FunctionalTriple::new(1.0, 1.0, 1.0)
    }

    #[test]
    fn phi_hand_value() {
        let f = Fiber::new(unit(), &params(0.1));
        let (phi, _, _) = f.phi(1.0).unwrap();
        assert!((phi - (-1.525)).abs() < 1e-15);
        assert!(f.phi(0.0).is_err());
        assert!(f.psi(-1.0).is_err());
    }

    #[test]
    fn phi_prime_is_t_r_psi() {
        let f = Fiber::new(FunctionalTriple::new(2.3, 0.7, -0.4), &params(0.3));
        for t in [0.01, 0.3, 1.0, 2.7, 40.0] {
            let (_, d1, _) = f.phi(t).unwrap();
            let want = t.powf(3.0) * f.psi(t).unwrap();
            assert!((d1 - want).abs() <= 1e-12 * d1.abs().max(want.abs()));
        }
    }

    #[test]
    fn psi_limits() {
        let f = Fiber::new(unit(), &params(0.1));
        assert!(f.psi(1e-8).unwrap() < -1e6);
        let lb = 0.1;
        assert!((f.psi(1e8).unwrap() + lb).abs() <= 1e-6 * lb);
    }

    #[test]
    fn t_max_closed_form() {
        let f = Fiber::new(unit(), &params(0.1));
        let t = f.t_max().unwrap();
        assert!((t - 1.75_f64.powf(1.0 / 1.5)).abs() < 1e-14);
        assert!((t - 1.4522).abs() < 1e-4);
        assert!(f.psi_prime(t).unwrap().abs() < 1e-12);
        let no_a = Fiber::new(FunctionalTriple::new(1.0, 0.0, 1.0), &params(0.1));
        assert!(matches!(no_a.t_max(), Err(Error::NoPositivePart)));
    }

    #[test]
    fn psi_at_tmax_with_zero_b() {
        // B = 0: ψ(t_max) = ((p−1+q)/(r+q))·((r−p+1)/(r+q))^{(r−p+1)/(p−1+q)}·N^{(r+q)/(p−1+q)}/A^{(r−p+1)/(p−1+q)}
        let p = params(0.2);
        let tr = FunctionalTriple::new(2.0, 0.6, 0.0);
        let f = Fiber::new(tr, &p);
        let got = f.psi(f.t_max().unwrap()).unwrap();
        let (g, sg, rq): (f64, f64, f64) = (1.5, 2.0, 3.5);
        let want = (g / rq) * (sg / rq).powf(sg / g) * 2.0_f64.powf(rq / g) / 0.6_f64.powf(sg / g);
        assert!((got - want).abs() <= 1e-13 * want);
    }

    #[test]
    fn t_max_scales_inversely() {
        let p = params(0.1);
        let base = FunctionalTriple::new(1.7, 0.9, 0.3);
        let c = 3.5;
        let t = Fiber::new(base, &p).t_max().unwrap();
        let tc = Fiber::new(base.scaled(c, &p), &p).t_max().unwrap();
        assert!((tc * c - t).abs() <= 1e-13 * t);
    }

    #[test]
    fn one_root_when_b_negative() {
        let f = Fiber::new(FunctionalTriple::new(1.0, 1.0, -1.0), &params(0.7));
        let rep = f.roots().unwrap();
        let t1 = match rep.case {
            FiberCase::OneRoot { t1 } => t1,
            other => panic!("{other:?}"),
        };
        assert!(t1 < rep.t_max);
        assert!(rep.phi_second_at_roots[0] > 0.0);
        assert!(f.psi(t1).unwrap().abs() <= 1e-12 * f.psi_scale(t1));
    }

    #[test]
    fn b_zero_is_one_root() {
        let f = Fiber::new(FunctionalTriple::new(1.0, 1.0, 0.0), &params(0.7));
        assert!(matches!(f.roots().unwrap().case, FiberCase::OneRoot { .. }));
    }

    #[test]
    fn two_roots_at_half_ray_threshold() {
        let base = Fiber::new(unit(), &params(1.0));
        let lam_ray = base.ray_threshold().unwrap();
        let k = (1.5 / 3.5) * (2.0_f64 / 3.5).powf(2.0 / 1.5);
        assert!((lam_ray - k).abs() < 1e-14);
        let f = Fiber::new(unit(), &params(0.5 * lam_ray));
        let rep = f.roots().unwrap();
        let (t1, t2) = match rep.case {
            FiberCase::TwoRoots { t1, t2 } => (t1, t2),
            other => panic!("{other:?}"),
        };
        assert!(t1 < rep.t_max && rep.t_max < t2);
        assert!(rep.phi_second_at_roots[0] > 0.0 && rep.phi_second_at_roots[1] < 0.0);

        // dense sign scan over 10^6 log-spaced points
        let (lo, hi): (f64, f64) = (1e-6, 1e6);
        let m = 1_000_000;
        let mut changes = 0;
        let mut prev = f.psi(lo).unwrap().signum();
        for k in 1..m {
            let t = lo * (hi / lo).powf(k as f64 / (m - 1) as f64);
            let s = f.psi(t).unwrap().signum();
            if s != prev {
                changes += 1;
            }
            prev = s;
        }
        assert_eq!(changes, 2);

        // Nehari identity at both scaled triples
        let p = params(0.5 * lam_ray);
        for t in [t1, t2] {
            let tr = unit().scaled(t, &p);
            assert!(tr.nehari_defect(p.lambda()).abs() <= 1e-10 * tr.seminorm_p);
        }
        assert_eq!(nehari_classify(&unit().scaled(t1, &p), &p, p.lambda()), NehariClass::Plus);
        assert_eq!(nehari_classify(&unit().scaled(t2, &p), &p, p.lambda()), NehariClass::Minus);
    }

    #[test]
    fn bracketing_fails_beyond_ray_threshold() {
        let lam = Fiber::new(unit(), &params(1.0)).ray_threshold().unwrap();
        let f = Fiber::new(unit(), &params(2.0 * lam));
        assert!(matches!(f.roots(), Err(Error::Bracketing(_))));
    }

    #[test]
    fn classify_zero_and_off() {
        let p = params(0.1);
        assert_eq!(
            nehari_classify(&FunctionalTriple::new(0.0, 0.0, 0.0), &p, 0.1),
            NehariClass::Zero
        );
        assert_eq!(nehari_classify(&unit(), &p, 0.1), NehariClass::Off);
    }

    #[test]
    fn no_positive_part_report() {
        let f = Fiber::new(FunctionalTriple::new(1.0, 0.0, 0.0), &params(0.1));
        assert_eq!(f.roots().unwrap().case, FiberCase::NoPositivePart);
    }

    #[test]
    fn coercivity_minimum() {
        let p = params(0.1);
        let c = coercivity_bound(&p, 1.3, 4.2);
        assert!(c.alpha > 0.0 && c.beta > 0.0 && c.rho_min < 0.0);
        assert!((c.rho(c.t_min) - c.rho_min).abs() <= 1e-13 * c.rho_min.abs());
        let hstep = 1e-5 * c.t_min;
        let d = (c.rho(c.t_min + hstep) - c.rho(c.t_min - hstep)) / (2.0 * hstep);
        let slope_scale = c.alpha * p.p() * c.t_min.powf(p.p() - 1.0);
        assert!(d.abs() <= 1e-8 * slope_scale);
        for t in [0.1, 0.5, 2.0, 10.0] {
            assert!(c.rho(t * c.t_min) >= c.rho_min);
        }
    }
}
