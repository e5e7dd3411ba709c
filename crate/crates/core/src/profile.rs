//! One-dimensional profiles `F` with certified norms, tails and oscillatory
//! transforms `∫F(x)e^{2πiφx}dx`.

use std::f64::consts::{E, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{filon_adaptive, integrate, integrate_oscillatory, QuadResult, Tolerance};

/// Largest `|φ|` handled by panelized Gauss–Kronrod.
pub const DIRECT_LIMIT: f64 = 1e3;
/// Largest `|φ|` handled by Filon; beyond it only analytic bounds are used.
pub const FILON_LIMIT: f64 = 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum Shape {
    /// `e^{−(x/σ)²}`
    Gaussian { sigma: f64 },
    /// `e^{−|x|/s}`
    Exponential { scale: f64 },
    /// `e^{−1/(1−(x/r)²)}` on `|x| < r`
    Bump { radius: f64 },
    /// `max(0, 1 − |x|/r)`
    Tent { radius: f64 },
    /// Half-plane Poisson kernel `h/(π(h² + x²))`.
    Poisson { height: f64 },
    /// Piecewise linear through the points, zero outside them.
    Tabulated { points: Vec<(f64, f64)> },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Whole,
    Ball { center: f64, radius: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    #[serde(flatten)]
    pub shape: Shape,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

impl Profile {
    pub fn new(shape: Shape, amplitude: f64) -> Result<Self> {
        let positive = |x: f64, what: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::Argument(format!("{what} must be positive, got {x}")))
            }
        };
        match &shape {
            Shape::Gaussian { sigma } => positive(*sigma, "sigma")?,
            Shape::Exponential { scale } => positive(*scale, "scale")?,
            Shape::Bump { radius } | Shape::Tent { radius } => positive(*radius, "radius")?,
            Shape::Poisson { height } => positive(*height, "height")?,
            Shape::Tabulated { points } => {
                if points.len() < 2 || points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    return Err(Error::Argument("tabulated profile needs ≥ 2 points with increasing x".into()));
                }
                if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
                    return Err(Error::Argument("tabulated profile has non-finite entries".into()));
                }
            }
        }
        if !amplitude.is_finite() {
            return Err(Error::Argument("amplitude must be finite".into()));
        }
        Ok(Profile { shape, amplitude })
    }

    pub fn gaussian(sigma: f64) -> Result<Self> {
        Self::new(Shape::Gaussian { sigma }, 1.0)
    }

    pub fn exponential(scale: f64) -> Result<Self> {
        Self::new(Shape::Exponential { scale }, 1.0)
    }

    pub fn bump(radius: f64) -> Result<Self> {
        Self::new(Shape::Bump { radius }, 1.0)
    }

    pub fn tent(radius: f64) -> Result<Self> {
        Self::new(Shape::Tent { radius }, 1.0)
    }

    pub fn poisson(height: f64) -> Result<Self> {
        Self::new(Shape::Poisson { height }, 1.0)
    }

    pub fn tabulated(points: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(Shape::Tabulated { points }, 1.0)
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.shape.clone(), self.amplitude * factor)
    }

    pub fn name(&self) -> String {
        self.to_string()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let a = self.amplitude;
        a * match &self.shape {
            Shape::Gaussian { sigma } => (-(x / sigma).powi(2)).exp(),
            Shape::Exponential { scale } => (-x.abs() / scale).exp(),
            Shape::Bump { radius } => {
                let u = x / radius;
                if u.abs() < 1.0 {
                    (-1.0 / (1.0 - u * u)).exp()
                } else {
                    0.0
                }
            }
            Shape::Tent { radius } => (1.0 - x.abs() / radius).max(0.0),
            Shape::Poisson { height } => height / (PI * (height * height + x * x)),
            Shape::Tabulated { points } => interpolate(points, x),
        }
    }

    /// Derivative away from kinks.
    pub fn deriv(&self, x: f64) -> f64 {
        let a = self.amplitude;
        a * match &self.shape {
            Shape::Gaussian { sigma } => -2.0 * x / (sigma * sigma) * (-(x / sigma).powi(2)).exp(),
            Shape::Exponential { scale } => -x.signum() / scale * (-x.abs() / scale).exp(),
            Shape::Bump { radius } => {
                let u = x / radius;
                if u.abs() < 1.0 {
                    let q = 1.0 - u * u;
                    -2.0 * u / (radius * q * q) * (-1.0 / q).exp()
                } else {
                    0.0
                }
            }
            Shape::Tent { radius } => {
                if x.abs() < *radius {
                    -x.signum() / radius
                } else {
                    0.0
                }
            }
            Shape::Poisson { height } => -2.0 * height * x / (PI * (height * height + x * x).powi(2)),
            Shape::Tabulated { points } => {
                let i = points.partition_point(|p| p.0 <= x);
                if i == 0 || i == points.len() {
                    0.0
                } else {
                    (points[i].1 - points[i - 1].1) / (points[i].0 - points[i - 1].0)
                }
            }
        }
    }

    pub fn support(&self) -> Support {
        match &self.shape {
            Shape::Gaussian { .. } | Shape::Exponential { .. } | Shape::Poisson { .. } => Support::Whole,
            Shape::Bump { radius } | Shape::Tent { radius } => Support::Ball { center: 0.0, radius: *radius },
            Shape::Tabulated { points } => {
                let (lo, hi) = (points[0].0, points[points.len() - 1].0);
                Support::Ball { center: 0.5 * (lo + hi), radius: 0.5 * (hi - lo) }
            }
        }
    }

    /// Integration window outside which `|F|` has mass below about `1e-19‖F‖₁`.
    fn window(&self) -> (f64, f64) {
        match (&self.shape, self.support()) {
            (_, Support::Ball { center, radius }) => (center - radius, center + radius),
            (Shape::Gaussian { sigma }, _) => (-6.5 * sigma, 6.5 * sigma),
            (Shape::Exponential { scale }, _) => (-45.0 * scale, 45.0 * scale),
            // transforms of the Poisson kernel are closed form
            (_, Support::Whole) => (-1e6, 1e6),
        }
    }

    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.shape {
            Shape::Tabulated { points } => points.iter().map(|p| p.0).collect(),
            _ => {
                let (lo, hi) = self.window();
                let mid = match self.support() {
                    Support::Ball { center, .. } => center,
                    Support::Whole => 0.0,
                };
                vec![lo, mid, hi]
            }
        }
    }

    /// Upper bound for `‖F‖₁`.
    pub fn l1_norm(&self) -> f64 {
        let a = self.amplitude.abs();
        match &self.shape {
            Shape::Gaussian { sigma } => a * sigma * PI.sqrt(),
            Shape::Exponential { scale } => 2.0 * a * scale,
            Shape::Tent { radius } => a * radius,
            Shape::Poisson { .. } => a,
            Shape::Bump { .. } => {
                let r = integrate(|x| self.eval(x).abs(), &self.breakpoints(), Tolerance::default());
                r.value + r.error
            }
            Shape::Tabulated { points } => a * abs_piecewise(points, f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// Total variation, an upper bound for `‖F′‖₁` that includes jumps.
    pub fn grad_l1(&self) -> f64 {
        let a = self.amplitude.abs();
        match &self.shape {
            Shape::Gaussian { .. } | Shape::Exponential { .. } | Shape::Tent { .. } => 2.0 * a,
            Shape::Bump { .. } => 2.0 * a / E,
            Shape::Poisson { height } => 2.0 * a / (PI * height),
            Shape::Tabulated { points } => {
                let inner: f64 = points.windows(2).map(|w| (w[1].1 - w[0].1).abs()).sum();
                a * (inner + points[0].1.abs() + points[points.len() - 1].1.abs())
            }
        }
    }

    pub fn sup_norm(&self) -> f64 {
        let a = self.amplitude.abs();
        match &self.shape {
            Shape::Gaussian { .. } | Shape::Exponential { .. } | Shape::Tent { .. } => a,
            Shape::Bump { .. } => a / E,
            Shape::Poisson { height } => a / (PI * height),
            Shape::Tabulated { points } => a * points.iter().map(|p| p.1.abs()).fold(0.0, f64::max),
        }
    }

    /// Upper bound for `∫_{|x|≥A} |F|`.
    pub fn tail_mass(&self, big_a: f64) -> f64 {
        let a = self.amplitude.abs();
        if big_a <= 0.0 {
            return self.l1_norm();
        }
        match &self.shape {
            Shape::Gaussian { sigma } => {
                let u = big_a / sigma;
                (a * sigma * (-u * u).exp() / u).min(self.l1_norm())
            }
            Shape::Exponential { scale } => 2.0 * a * scale * (-big_a / scale).exp(),
            Shape::Poisson { height } => a * 2.0 / PI * (height / big_a).atan(),
            Shape::Tent { radius } => a * (radius - big_a).max(0.0).powi(2) / radius,
            Shape::Bump { radius } => {
                if big_a >= *radius {
                    0.0
                } else {
                    let r = integrate(|x| self.eval(x).abs(), &[big_a, *radius], Tolerance::default());
                    2.0 * (r.value + r.error)
                }
            }
            Shape::Tabulated { points } => {
                a * (abs_piecewise(points, f64::NEG_INFINITY, -big_a) + abs_piecewise(points, big_a, f64::INFINITY))
            }
        }
    }

    /// `∫F` with an error bound.
    pub fn integral(&self) -> (f64, f64) {
        let a = self.amplitude;
        match &self.shape {
            Shape::Gaussian { sigma } => (a * sigma * PI.sqrt(), 0.0),
            Shape::Exponential { scale } => (2.0 * a * scale, 0.0),
            Shape::Tent { radius } => (a * radius, 0.0),
            Shape::Poisson { .. } => (a, 0.0),
            Shape::Tabulated { points } => (a * points.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum::<f64>(), 0.0),
            Shape::Bump { .. } => self.window_integral(f64::INFINITY),
        }
        .into_rounded()
    }

    /// `∫_{|x|≤A} F` with an error bound.
    pub fn window_integral(&self, big_a: f64) -> (f64, f64) {
        if let Shape::Poisson { height } = self.shape {
            return (self.amplitude * 2.0 / PI * (big_a / height).atan(), 4.0 * f64::EPSILON * self.amplitude.abs());
        }
        let (lo, hi) = self.window();
        let (lo, hi) = (lo.max(-big_a), hi.min(big_a));
        if lo >= hi {
            return (0.0, 0.0);
        }
        let mut breaks: Vec<f64> = self.breakpoints().into_iter().filter(|&x| x > lo && x < hi).collect();
        breaks.insert(0, lo);
        breaks.push(hi);
        let r = integrate(|x| self.eval(x), &breaks, Tolerance::default());
        let (wlo, whi) = self.window();
        // mass the window cut away from `[−A, A]`
        let truncated = match self.support() {
            Support::Whole if big_a > whi.min(-wlo) => self.tail_mass(whi.min(-wlo)),
            _ => 0.0,
        };
        (r.value, r.error + truncated + 4.0 * f64::EPSILON * r.value.abs())
    }

    /// `∫F(x)e^{2πiφx}dx` by quadrature, or `None` when `|φ|` is past
    /// [`FILON_LIMIT`]. The error includes the truncated tails.
    pub fn transform(&self, phi: f64) -> Option<QuadResult<Complex64>> {
        if let Shape::Poisson { height } = self.shape {
            let v = self.amplitude * (-2.0 * PI * height * phi.abs()).exp();
            return Some(QuadResult { value: Complex64::new(v, 0.0), error: 4.0 * f64::EPSILON * self.amplitude.abs(), evals: 1 });
        }
        let omega = 2.0 * PI * phi;
        let breaks = self.breakpoints();
        let l1 = self.l1_norm();
        let tol = Tolerance { abs: 1e-15 * l1.max(f64::MIN_POSITIVE), rel: 1e-13, max_panels: 20_000 };
        let mut r = if phi.abs() <= DIRECT_LIMIT {
            integrate_oscillatory(|x| self.eval(x), &breaks, omega, tol)
        } else if phi.abs() <= FILON_LIMIT {
            filon_adaptive(&|x| self.eval(x), &breaks, omega, tol.abs.max(1e-13 * l1), 1 << 22)
        } else {
            return None;
        };
        if self.support() == Support::Whole {
            let (lo, hi) = self.window();
            r.error += self.tail_mass(hi.min(-lo));
        }
        Some(r)
    }

    /// `TV(F)/(2π|φ|)`, valid for every `φ ≠ 0`, capped by `‖F‖₁`.
    pub fn ibp_bound(&self, phi: f64) -> f64 {
        if phi == 0.0 {
            self.l1_norm()
        } else {
            (self.grad_l1() / (2.0 * PI * phi.abs())).min(self.l1_norm())
        }
    }
}

trait Rounded {
    fn into_rounded(self) -> Self;
}

impl Rounded for (f64, f64) {
    fn into_rounded(self) -> Self {
        (self.0, self.1 + 4.0 * f64::EPSILON * self.0.abs())
    }
}

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    let i = points.partition_point(|p| p.0 <= x);
    if i == 0 || (i == points.len() && x > points[points.len() - 1].0) {
        return 0.0;
    }
    if i == points.len() {
        return points[i - 1].1;
    }
    let (x0, y0) = points[i - 1];
    let (x1, y1) = points[i];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// `∫_{lo}^{hi} |F|` for a piecewise linear `F`, exact up to rounding.
fn abs_piecewise(points: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        let (a, b) = (w[0].0.max(lo), w[1].0.min(hi));
        if a >= b {
            continue;
        }
        let (fa, fb) = (interpolate_segment(w[0], w[1], a), interpolate_segment(w[0], w[1], b));
        total += if fa * fb >= 0.0 {
            0.5 * (b - a) * (fa.abs() + fb.abs())
        } else {
            let z = a + (b - a) * fa.abs() / (fa.abs() + fb.abs());
            0.5 * ((z - a) * fa.abs() + (b - z) * fb.abs())
        };
    }
    total * (1.0 + 4.0 * f64::EPSILON)
}

fn interpolate_segment(p: (f64, f64), q: (f64, f64), x: f64) -> f64 {
    p.1 + (q.1 - p.1) * (x - p.0) / (q.0 - p.0)
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.shape {
            Shape::Gaussian { sigma } => write!(f, "gaussian:{sigma}")?,
            Shape::Exponential { scale } => write!(f, "exponential:{scale}")?,
            Shape::Bump { radius } => write!(f, "bump:{radius}")?,
            Shape::Tent { radius } => write!(f, "tent:{radius}")?,
            Shape::Poisson { height } => write!(f, "poisson:{height}")?,
            Shape::Tabulated { points } => write!(f, "tabulated[{}]", points.len())?,
        }
        if self.amplitude != 1.0 {
            write!(f, "*{}", self.amplitude)?;
        }
        Ok(())
    }
}

/// `name[:param][*amplitude]`, e.g. `gaussian`, `gaussian:2`, `bump:0.5*3`.
impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (body, amp) = match s.split_once('*') {
            Some((b, a)) => (b, a.trim().parse::<f64>().map_err(|_| Error::Argument(format!("bad amplitude in `{s}`")))?),
            None => (s, 1.0),
        };
        let (name, param) = match body.split_once(':') {
            Some((n, p)) => (n.trim(), Some(p.trim().parse::<f64>().map_err(|_| Error::Argument(format!("bad parameter in `{s}`")))?)),
            None => (body.trim(), None),
        };
        let p = param.unwrap_or(1.0);
        let shape = match name {
            "gaussian" => Shape::Gaussian { sigma: p },
            "exponential" => Shape::Exponential { scale: p },
            "bump" => Shape::Bump { radius: p },
            "tent" => Shape::Tent { radius: p },
            "poisson" => Shape::Poisson { height: p },
            _ => return Err(Error::Argument(format!("unknown profile `{name}`"))),
        };
        Profile::new(shape, amp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn all() -> Vec<Profile> {
        vec![
            Profile::gaussian(1.0).unwrap(),
            Profile::exponential(0.7).unwrap(),
            Profile::bump(1.5).unwrap(),
            Profile::tent(2.0).unwrap(),
            Profile::poisson(1.0).unwrap(),
            Profile::tabulated(vec![(-1.0, 0.5), (0.0, 2.0), (0.5, -1.0), (2.0, 0.0)]).unwrap(),
        ]
    }

    #[test]
    fn declared_norms_dominate_quadrature() {
        for p in all() {
            let (lo, hi) = p.window();
            let mut breaks: Vec<f64> = p.breakpoints();
            if p.support() == Support::Whole {
                breaks = vec![lo.max(-1e3), -1.0, 0.0, 1.0, hi.min(1e3)];
            }
            let tol = Tolerance { max_panels: 100_000, ..Tolerance::default() };
            let l1 = integrate(|x| p.eval(x).abs(), &breaks, tol).value;
            assert!(p.l1_norm() >= l1 * (1.0 - 1e-12), "{p}: {} < {l1}", p.l1_norm());
            let tv = integrate(|x| p.deriv(x).abs(), &breaks, tol).value;
            assert!(p.grad_l1() >= tv * (1.0 - 1e-9), "{p}: {} < {tv}", p.grad_l1());
            let grid_max = (0..=4000).map(|i| p.eval(-3.0 + 6.0 * i as f64 / 4000.0).abs()).fold(0.0, f64::max);
            assert!(p.sup_norm() >= grid_max);
        }
    }

    #[test]
    fn integrals_match_closed_forms() {
        let g = Profile::gaussian(1.0).unwrap();
        assert_relative_eq!(g.integral().0, PI.sqrt(), max_relative = 1e-15);
        let (w, err) = g.window_integral(2.0);
        // √π·erf(2)
        assert!((w - 1.764_162_781_524_843).abs() <= err + 1e-13);
        assert!(g.tail_mass(2.0) >= PI.sqrt() - 1.764_162_781_524_843);
        let b = Profile::bump(1.0).unwrap();
        // ∫ e^{-1/(1-x²)} over (-1, 1)
        assert_relative_eq!(b.integral().0, 0.443_993_816_168_079_4, max_relative = 1e-12);
        let t = Profile::tabulated(vec![(-1.0, 1.0), (1.0, -1.0)]).unwrap();
        assert!(t.integral().0.abs() < 1e-15);
        assert_relative_eq!(t.l1_norm(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn transforms_match_closed_forms() {
        let g = Profile::gaussian(1.0).unwrap();
        let e = Profile::exponential(1.0).unwrap();
        for &phi in &[0.0, 0.1, 0.7, 3.0] {
            let r = g.transform(phi).unwrap();
            let exact = PI.sqrt() * (-(PI * phi).powi(2)).exp();
            assert!((r.value.re - exact).abs() <= r.error.max(1e-14), "phi {phi}");
            assert!(r.value.im.abs() < 1e-13);
        }
        for &phi in &[0.5, 20.0, 900.0, 5e3, 2e4] {
            let r = e.transform(phi).unwrap();
            let exact = 2.0 / (1.0 + (2.0 * PI * phi).powi(2));
            assert!((r.value.re - exact).abs() <= 10.0 * r.error.max(1e-14), "phi {phi}: {} vs {exact}, err {}", r.value.re, r.error);
            assert!(r.value.norm() <= e.ibp_bound(phi));
        }
        assert!(e.transform(2e6).is_none());
        let p = Profile::poisson(0.5).unwrap();
        assert_relative_eq!(p.transform(1.0).unwrap().value.re, (-PI).exp(), max_relative = 1e-15);
    }

    #[test]
    fn parsing() {
        assert_eq!("gaussian".parse::<Profile>().unwrap(), Profile::gaussian(1.0).unwrap());
        assert_eq!("bump:0.5*3".parse::<Profile>().unwrap(), Profile::new(Shape::Bump { radius: 0.5 }, 3.0).unwrap());
        assert!("sinc".parse::<Profile>().is_err());
        assert!("tent:-1".parse::<Profile>().is_err());
        let p = Profile::tabulated(vec![(0.0, 1.0), (1.0, 0.0)]).unwrap();
        let back: Profile = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
    }

    proptest! {
        #[test]
        fn ibp_bound_dominates_transform(phi in 0.05f64..200.0, which in 0usize..6) {
            let p = &all()[which];
            let r = p.transform(phi).unwrap();
            prop_assert!(r.value.norm() <= p.ibp_bound(phi) + r.error + 1e-14);
        }

        #[test]
        fn tails_are_monotone(a in 0.01f64..5.0, b in 0.01f64..5.0, which in 0usize..6) {
            let p = &all()[which];
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(p.tail_mass(hi) <= p.tail_mass(lo) + 1e-15);
        }
    }
}
