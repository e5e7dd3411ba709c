//! Smooth convex planar domains: a prototype with a flat bottom glued to a
//! strictly curved cap, and a circle fixture. Curves are parameterized by arc
//! length and traversed counterclockwise.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gk15;

/// Shape parameters of the prototype domain.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrototypeParams {
    /// Length of the flat piece `Π₀` on `{x₂ = 0}`, centred at the origin.
    pub flat_len: f64,
    /// Extra curvature placed next to the two junctions; larger values give
    /// a flatter cap.
    pub corner_weight: f64,
    /// Width (as a fraction of the cap length) of the blend in which the
    /// curvature rises from zero.
    pub blend_width: f64,
}

impl Default for PrototypeParams {
    fn default() -> Self {
        PrototypeParams { flat_len: 1.0, corner_weight: 3.0, blend_width: 0.08 }
    }
}

/// `ψ(t)/(ψ(t) + ψ(1−t))` with `ψ(t) = e^{−1/t}`: smooth, 0 for `t ≤ 0`, 1 for
/// `t ≥ 1`, and `β(t) + β(1−t) = 1`.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

const KNOTS: usize = 2048;

#[derive(Debug)]
struct Prototype {
    params: PrototypeParams,
    half_flat: f64,
    /// Length of the curved cap.
    cap_len: f64,
    /// `∫₀¹ b`
    b_total: f64,
    /// `(∫₀^{u_i} b, x_i, y_i)` at `u_i = i/KNOTS`.
    knots: Vec<(f64, f64, f64)>,
}

impl Prototype {
    /// Unnormalized curvature profile on the cap, `u ∈ [0, 1]`.
    fn b(&self, u: f64) -> f64 {
        let w = self.params.blend_width;
        let bump = |v: f64| (-((v - 1.5 * w) / w).powi(2)).exp();
        smooth_step(u / w) * smooth_step((1.0 - u) / w) * (1.0 + self.params.corner_weight * (bump(u) + bump(1.0 - u)))
    }

    fn theta(&self, b_int: f64) -> f64 {
        2.0 * PI * b_int / self.b_total
    }

    /// `(∫_{u0}^{u} b, ∫_{u0}^{u} (cos θ, sin θ))` for a short interval, given
    /// `∫₀^{u0} b`. Both integrals are Gauss–Kronrod, the inner one nested.
    fn advance(&self, u0: f64, b0: f64, u: f64) -> (f64, f64, f64) {
        if u == u0 {
            return (0.0, 0.0, 0.0);
        }
        let (db, _) = gk15(&|v| self.b(v), u0, u);
        let (c, _) = gk15(
            &|v| {
                let (bi, _) = gk15(&|w| self.b(w), u0, v);
                let th = self.theta(b0 + bi);
                Complex::new(th.cos(), th.sin())
            },
            u0,
            u,
        );
        (db, c.re, c.im)
    }

    fn build(params: PrototypeParams) -> Result<Self> {
        let PrototypeParams { flat_len, corner_weight, blend_width } = params;
        if !(flat_len > 0.0 && flat_len.is_finite()) {
            return Err(Error::Geometry(format!("flat part must have positive length, got {flat_len}")));
        }
        if !(blend_width > 0.0 && blend_width < 0.25) {
            return Err(Error::Geometry(format!("blend width must lie in (0, 1/4), got {blend_width}")));
        }
        if !corner_weight.is_finite() {
            return Err(Error::Geometry("corner weight must be finite".into()));
        }
        let mut p = Prototype { params, half_flat: 0.5 * flat_len, cap_len: 1.0, b_total: 1.0, knots: Vec::new() };
        let probe: Vec<f64> = (1..400).map(|i| p.b(i as f64 / 400.0)).collect();
        if probe.iter().any(|&v| v <= 0.0) {
            return Err(Error::Geometry("blend produces non-positive curvature on the cap".into()));
        }
        let step = 1.0 / KNOTS as f64;
        p.b_total = (0..KNOTS).map(|i| gk15(&|v| p.b(v), i as f64 * step, (i + 1) as f64 * step).0).sum();
        // unit-length cap first, then rescale so that the midpoint sits above the origin
        let mut knots = Vec::with_capacity(KNOTS + 1);
        let (mut bi, mut x, mut y) = (0.0, 0.0, 0.0);
        knots.push((0.0, 0.0, 0.0));
        for i in 0..KNOTS {
            let (db, dx, dy) = p.advance(i as f64 * step, bi, (i + 1) as f64 * step);
            bi += db;
            x += dx;
            y += dy;
            knots.push((bi, x, y));
        }
        let mid_x = knots[KNOTS / 2].1;
        if mid_x >= 0.0 {
            return Err(Error::Geometry("cap cannot close over the flat part; increase the corner weight".into()));
        }
        let scale = p.half_flat / -mid_x;
        p.cap_len = scale;
        p.knots = knots.into_iter().map(|(b, x, y)| (b, p.half_flat + scale * x, scale * y)).collect();
        Ok(p)
    }

    fn cap_point(&self, u: f64) -> (Vector2<f64>, f64) {
        let u = u.clamp(0.0, 1.0);
        let i = ((u * KNOTS as f64).floor() as usize).min(KNOTS - 1);
        let u0 = i as f64 / KNOTS as f64;
        let (b0, x0, y0) = self.knots[i];
        let (db, dx, dy) = self.advance(u0, b0, u);
        (Vector2::new(x0 + self.cap_len * dx, y0 + self.cap_len * dy), self.theta(b0 + db))
    }
}

type Complex = num_complex::Complex64;

#[derive(Clone, Debug)]
enum Curve {
    Prototype(Arc<Prototype>),
    Circle { radius: f64 },
}

/// A point on the boundary with its frame and curvature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub s: f64,
    pub point: Vector2<f64>,
    pub tangent: Vector2<f64>,
    /// Outward unit normal.
    pub normal: Vector2<f64>,
    pub curvature: f64,
}

/// A curve placed in the plane by `y ↦ R y + shift`.
#[derive(Clone, Debug)]
pub struct Domain {
    curve: Curve,
    rotation: Matrix2<f64>,
    shift: Vector2<f64>,
}

impl Domain {
    pub fn prototype(params: PrototypeParams) -> Result<Self> {
        let d = Domain { curve: Curve::Prototype(Arc::new(Prototype::build(params)?)), rotation: Matrix2::identity(), shift: Vector2::zeros() };
        let gap = d.closure_error();
        if gap > 1e-10 {
            return Err(Error::Geometry(format!("curve does not close: endpoint mismatch {gap:e}")));
        }
        Ok(d)
    }

    pub fn circle(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::Geometry(format!("radius must be positive, got {radius}")));
        }
        Ok(Domain { curve: Curve::Circle { radius }, rotation: Matrix2::identity(), shift: Vector2::zeros() })
    }

    /// Applies `y ↦ R y + shift` on top of the current placement. `R` must be
    /// a rotation.
    pub fn transformed(&self, rotation: &Matrix2<f64>, shift: &Vector2<f64>) -> Result<Self> {
        let defect = (rotation.transpose() * rotation - Matrix2::identity()).abs().max();
        if defect > 1e-12 || rotation.determinant() < 0.0 {
            return Err(Error::Geometry(format!("not a rotation (orthogonality defect {defect:e})")));
        }
        Ok(Domain { curve: self.curve.clone(), rotation: rotation * self.rotation, shift: rotation * self.shift + shift })
    }

    pub fn rotation(&self) -> &Matrix2<f64> {
        &self.rotation
    }

    pub fn shift(&self) -> &Vector2<f64> {
        &self.shift
    }

    pub fn params(&self) -> Option<PrototypeParams> {
        match &self.curve {
            Curve::Prototype(p) => Some(p.params),
            Curve::Circle { .. } => None,
        }
    }

    /// Maps a point of the reference placement into this one.
    pub fn place(&self, y: &Vector2<f64>) -> Vector2<f64> {
        self.rotation * y + self.shift
    }

    /// Inverse of [`Self::place`].
    pub fn unplace(&self, x: &Vector2<f64>) -> Vector2<f64> {
        self.rotation.transpose() * (x - self.shift)
    }

    pub fn length(&self) -> f64 {
        match &self.curve {
            Curve::Prototype(p) => 2.0 * p.half_flat + p.cap_len,
            Curve::Circle { radius } => 2.0 * PI * radius,
        }
    }

    /// Arc-length range `[0, |Π₀|)` of the flat part, if any.
    pub fn flat_range(&self) -> Option<(f64, f64)> {
        match &self.curve {
            Curve::Prototype(p) => Some((0.0, 2.0 * p.half_flat)),
            Curve::Circle { .. } => None,
        }
    }

    pub fn is_flat(&self, s: f64) -> bool {
        self.flat_range().is_some_and(|(a, b)| {
            let s = s.rem_euclid(self.length());
            s >= a && s <= b
        })
    }

    fn local(&self, s: f64) -> (Vector2<f64>, f64, f64) {
        let s = s.rem_euclid(self.length());
        match &self.curve {
            Curve::Circle { radius } => {
                let t = s / radius;
                (Vector2::new(radius * t.cos(), radius * t.sin()), t + 0.5 * PI, 1.0 / radius)
            }
            Curve::Prototype(p) => {
                let flat = 2.0 * p.half_flat;
                if s <= flat {
                    (Vector2::new(-p.half_flat + s, 0.0), 0.0, 0.0)
                } else {
                    let u = (s - flat) / p.cap_len;
                    let (pt, th) = p.cap_point(u);
                    (pt, th, 2.0 * PI / (p.b_total * p.cap_len) * p.b(u))
                }
            }
        }
    }

    pub fn at(&self, s: f64) -> BoundaryPoint {
        let (pt, th, kappa) = self.local(s);
        let tangent = self.rotation * Vector2::new(th.cos(), th.sin());
        BoundaryPoint {
            s: s.rem_euclid(self.length()),
            point: self.place(&pt),
            tangent,
            normal: Vector2::new(tangent.y, -tangent.x),
            curvature: kappa,
        }
    }

    pub fn curvature(&self, s: f64) -> f64 {
        self.local(s).2
    }

    /// Distance between the end of the cap and the start of the flat part.
    pub fn closure_error(&self) -> f64 {
        match &self.curve {
            Curve::Circle { .. } => 0.0,
            Curve::Prototype(p) => {
                let (_, x, y) = p.knots[KNOTS];
                ((x + p.half_flat).powi(2) + y * y).sqrt()
            }
        }
    }

    /// Boundary samples at `n` equally spaced arc-length parameters.
    pub fn samples(&self, n: usize) -> Vec<BoundaryPoint> {
        let h = self.length() / n as f64;
        (0..n).map(|i| self.at(i as f64 * h)).collect()
    }

    /// Enclosed area and area centroid.
    pub fn area_centroid(&self) -> (f64, Vector2<f64>) {
        let n = 4096;
        let h = self.length() / n as f64;
        let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
        for b in self.samples(n) {
            let (p, t) = (b.point, b.tangent);
            let cross = p.x * t.y - p.y * t.x;
            a += 0.5 * cross * h;
            cx += p.x * cross * h / 3.0;
            cy += p.y * cross * h / 3.0;
        }
        (a, Vector2::new(cx / a, cy / a))
    }

    /// `(x − y)·ν(y) < 0` for every sampled boundary point: for a convex
    /// curve this is exactly interior membership.
    pub fn contains(&self, x: &Vector2<f64>) -> bool {
        self.samples(2048).iter().all(|b| (x - b.point).dot(&b.normal) < 0.0)
    }

    pub fn distance_to_boundary(&self, x: &Vector2<f64>) -> f64 {
        let samples = self.samples(4096);
        let (mut best, mut s_best) = (f64::INFINITY, 0.0);
        for b in &samples {
            let d = (x - b.point).norm();
            if d < best {
                best = d;
                s_best = b.s;
            }
        }
        // golden-section refinement around the nearest sample
        let h = self.length() / 4096.0;
        let (mut lo, mut hi) = (s_best - h, s_best + h);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let m1 = hi - g * (hi - lo);
            let m2 = lo + g * (hi - lo);
            if (x - self.at(m1).point).norm() < (x - self.at(m2).point).norm() {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        best.min((x - self.at(0.5 * (lo + hi)).point).norm())
    }

    /// Distance from a boundary point to the flat part `Π₀` (infinite when there is none).
    fn distance_to_flat(&self, b: &BoundaryPoint) -> f64 {
        match &self.curve {
            Curve::Circle { .. } => f64::INFINITY,
            Curve::Prototype(p) => {
                let y = self.unplace(&b.point);
                let dx = (y.x.abs() - p.half_flat).max(0.0);
                (dx * dx + y.y * y.y).sqrt()
            }
        }
    }

    /// `κ(δ)`: least curvature over boundary points at distance `≥ δ` from `Π₀`.
    pub fn kappa_delta(&self, delta: f64) -> Result<f64> {
        let k = self
            .samples(8192)
            .iter()
            .filter(|b| self.distance_to_flat(b) >= delta)
            .map(|b| b.curvature)
            .fold(f64::INFINITY, f64::min);
        if k.is_finite() {
            Ok(k)
        } else {
            Err(Error::Argument(format!("no boundary point lies at distance ≥ {delta} from the flat part")))
        }
    }

    /// Every sampled point lies on the inner side of every sampled tangent line.
    pub fn supporting_line_test(&self, n: usize) -> bool {
        let s = self.samples(n);
        let scale = self.length();
        s.iter().all(|a| s.iter().all(|b| (b.point - a.point).dot(&a.normal) <= 1e-12 * scale))
    }

    /// Largest curvature jump between neighbouring samples around the junctions.
    pub fn junction_curvature_jump(&self) -> f64 {
        let Some((_, flat_end)) = self.flat_range() else { return 0.0 };
        let eps = 1e-9;
        [flat_end, self.length()]
            .iter()
            .map(|&s| (self.curvature(s - eps) - self.curvature(s + eps)).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn proto() -> Domain {
        Domain::prototype(PrototypeParams::default()).unwrap()
    }

    #[test]
    fn prototype_invariants() {
        let d = proto();
        assert!(d.closure_error() <= 1e-10, "{}", d.closure_error());
        assert!(d.junction_curvature_jump() < 1e-6);
        assert!(d.supporting_line_test(1000));
        let (a, c) = d.area_centroid();
        assert!(a > 0.0 && d.contains(&c));
        assert!(d.contains(&Vector2::new(0.0, 1e-3)));
        assert!(!d.contains(&Vector2::new(0.0, -1e-3)));
        for b in d.samples(2000) {
            if d.is_flat(b.s) {
                assert_eq!(b.point.y, 0.0);
                assert_eq!(b.curvature, 0.0);
            } else {
                assert!(b.curvature > 0.0 || d.distance_to_flat(&b) < 1e-3);
            }
        }
        // the origin is an inner point of the flat part
        let (lo, hi) = d.flat_range().unwrap();
        assert!(d.at(lo).point.x < 0.0 && d.at(hi).point.x > 0.0);
    }

    #[test]
    fn tangents_match_finite_differences() {
        let d = proto();
        for &s in &[0.3, 1.2, 2.0, 3.3] {
            let h = 1e-5;
            let fd = (d.at(s + h).point - d.at(s - h).point) / (2.0 * h);
            assert!((fd - d.at(s).tangent).norm() < 1e-8, "s = {s}");
            let dt = (d.at(s + h).tangent - d.at(s - h).tangent) / (2.0 * h);
            assert!((dt.norm() - d.curvature(s)).abs() < 1e-6);
        }
    }

    #[test]
    fn degenerate_inputs() {
        let mut p = PrototypeParams::default();
        p.flat_len = 0.0;
        assert!(Domain::prototype(p).is_err());
        let mut p = PrototypeParams::default();
        p.corner_weight = -0.99;
        assert!(Domain::prototype(p).is_err());
        assert!(Domain::circle(-1.0).is_err());
    }

    #[test]
    fn kappa_delta_behaviour() {
        let c = Domain::circle(1.0).unwrap();
        for &d in &[1e-3, 0.5, 2.0] {
            assert_relative_eq!(c.kappa_delta(d).unwrap(), 1.0, max_relative = 1e-14);
        }
        let d = proto();
        let (a, b) = (d.kappa_delta(1e-3).unwrap(), d.kappa_delta(1e-1).unwrap());
        assert!(a < b);
        let mut prev = 0.0;
        for i in 0..20 {
            let k = d.kappa_delta(1e-4 * 1.6f64.powi(i)).unwrap();
            assert!(k >= prev);
            prev = k;
        }
        assert!(d.kappa_delta(100.0).is_err());
    }

    #[test]
    fn placement_roundtrip() {
        let t = 0.7f64;
        let r = Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
        let d = proto().transformed(&r, &Vector2::new(1.0, -2.0)).unwrap();
        let base = proto();
        for &s in &[0.1, 2.5] {
            assert!((d.at(s).point - (r * base.at(s).point + Vector2::new(1.0, -2.0))).norm() < 1e-14);
            assert!((d.at(s).normal - r * base.at(s).normal).norm() < 1e-14);
        }
        let x = Vector2::new(0.3, 0.4);
        assert!((d.unplace(&d.place(&x)) - x).norm() < 1e-14);
        assert!(proto().transformed(&Matrix2::new(1.0, 0.0, 0.0, -1.0), &Vector2::zeros()).is_err());
    }
}
