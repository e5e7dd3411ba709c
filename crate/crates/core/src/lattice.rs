//! Exact lattice arithmetic: projection gaps, Diophantine window tests and the
//! stage-by-stage construction of directions that lattice vectors approach
//! faster than a prescribed modulus.

use nalgebra::{DMatrix, DVector};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::logvalue::{decompose, ln_biguint, LogValue};
use crate::modulus::Modulus;

/// Integer lattice vector of dimension `d ≥ 2`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntVector {
    coords: Vec<BigInt>,
}

impl IntVector {
    pub fn new(coords: Vec<BigInt>) -> Result<Self> {
        if coords.len() < 2 {
            return Err(Error::Argument(format!("lattice vectors need d >= 2, got d = {}", coords.len())));
        }
        Ok(IntVector { coords })
    }

    /// Panics when `coords.len() < 2`; intended for literals.
    pub fn from_i64(coords: &[i64]) -> Self {
        Self::new(coords.iter().map(|&c| BigInt::from(c)).collect()).expect("dimension at least 2")
    }

    pub fn unit(d: usize, axis: usize) -> Self {
        let mut c = vec![BigInt::zero(); d];
        c[axis] = BigInt::one();
        IntVector { coords: c }
    }

    pub fn coords(&self) -> &[BigInt] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn dot(&self, other: &IntVector) -> BigInt {
        self.coords.iter().zip(&other.coords).map(|(a, b)| a * b).sum()
    }

    pub fn norm_sq(&self) -> BigUint {
        self.coords.iter().map(|c| c.magnitude() * c.magnitude()).sum()
    }

    pub fn ln_norm(&self) -> f64 {
        0.5 * ln_biguint(&self.norm_sq())
    }

    pub fn scaled(&self, m: &BigInt) -> IntVector {
        IntVector { coords: self.coords.iter().map(|c| c * m).collect() }
    }

    /// `m·self + w`
    pub fn axpy(&self, m: &BigInt, w: &IntVector) -> IntVector {
        IntVector { coords: self.coords.iter().zip(&w.coords).map(|(a, b)| a * m + b).collect() }
    }

    /// gcd of the coordinates.
    pub fn content(&self) -> BigInt {
        self.coords.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn primitive(&self) -> IntVector {
        let g = self.content();
        if g.is_zero() {
            return self.clone();
        }
        IntVector { coords: self.coords.iter().map(|c| c / &g).collect() }
    }

    /// Components of each coordinate relative to the norm, in log form.
    pub fn unit_log(&self) -> Vec<LogValue> {
        let half = LogValue::from_biguint(&self.norm_sq()).sqrt();
        self.coords.iter().map(|c| LogValue::from_bigint(c) / half).collect()
    }

    /// `self / |self|` in double precision; accurate for any size of entries.
    pub fn unit_f64(&self) -> Vec<f64> {
        self.unit_log().iter().map(LogValue::to_f64).collect()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.coords.iter().map(|c| LogValue::from_bigint(c).to_f64()).collect()
    }
}

impl Serialize for IntVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        let coords = v
            .iter()
            .map(|s| s.parse::<BigInt>().map_err(serde::de::Error::custom))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        IntVector::new(coords).map_err(serde::de::Error::custom)
    }
}

impl std::fmt::Display for IntVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            let s = c.to_string();
            if s.len() > 24 {
                write!(f, "{}…[{} digits]", &s[..12], s.len())?;
            } else {
                write!(f, "{s}")?;
            }
        }
        write!(f, ")")
    }
}

fn uint(x: BigUint) -> BigInt {
    BigInt::from_biguint(Sign::Plus, x)
}

/// `|ξ|² − (ξ·b)²/|b|²`, the squared distance from `ξ` to the line `ℝb`.
pub fn projection_gap_sq(base: &IntVector, xi: &IntVector) -> Result<BigRational> {
    if base.is_zero() {
        return Err(Error::Argument("projection base is the zero vector".into()));
    }
    if base.dim() != xi.dim() {
        return Err(Error::Argument("dimension mismatch".into()));
    }
    let nb = uint(base.norm_sq());
    let dot = base.dot(xi);
    let num = uint(xi.norm_sq()) * &nb - &dot * &dot;
    // Left unreduced: a gcd of million-bit operands costs more than every
    // later comparison combined.
    Ok(BigRational::new_raw(num, nb))
}

/// Finite-window test of `|P_{n⊥}ξ| ≥ κ|ξ|^{-l}` over `window`.
pub fn is_diophantine(base: &IntVector, kappa: &BigRational, l: &BigRational, window: &[IntVector]) -> Result<bool> {
    let d = BigRational::from_integer(BigInt::from(base.dim() - 1));
    if !(l.is_positive() && d * l > BigRational::one()) {
        return Err(Error::Argument(format!("need (d-1)·l > 1, got l = {l}")));
    }
    if !kappa.is_positive() {
        return Err(Error::Argument("kappa must be positive".into()));
    }
    let p = l.numer().to_u32().ok_or_else(|| Error::Argument("l numerator too large".into()))?;
    let q = l.denom().to_u32().ok_or_else(|| Error::Argument("l denominator too large".into()))?;
    for xi in window {
        if xi.is_zero() {
            return Err(Error::Argument("window contains the zero vector".into()));
        }
        // gap² ≥ κ² N^{-p/q}  ⟺  gap^{2q} N^p ≥ κ^{2q}
        let gap_sq = projection_gap_sq(base, xi)?;
        let n = BigRational::from_integer(uint(xi.norm_sq()));
        let lhs = num_traits::pow(gap_sq, q as usize) * num_traits::pow(n, p as usize);
        let rhs = num_traits::pow(kappa.clone(), 2 * q as usize);
        if lhs < rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `M = [N | n]` with `n = generator/|generator|`.
#[derive(Clone, Debug)]
pub struct OrthonormalFrame {
    matrix: DMatrix<f64>,
    generator: IntVector,
}

impl OrthonormalFrame {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn generator(&self) -> &IntVector {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn normal(&self) -> DVector<f64> {
        self.matrix.column(self.dim() - 1).into_owned()
    }

    /// The `d × (d−1)` block `N`.
    pub fn tangential(&self) -> DMatrix<f64> {
        self.matrix.columns(0, self.dim() - 1).into_owned()
    }

    /// `Nᵀv`
    pub fn tangential_coords(&self, v: &[f64]) -> DVector<f64> {
        self.tangential().transpose() * DVector::from_column_slice(v)
    }

    /// `M · diag(Q, 1)`: another frame completing the same generator.
    pub fn rotated(&self, q: &DMatrix<f64>) -> Result<Self> {
        let d = self.dim();
        if q.nrows() != d - 1 || q.ncols() != d - 1 {
            return Err(Error::Argument("rotation must be (d-1)×(d-1)".into()));
        }
        let mut block = DMatrix::identity(d, d);
        block.view_mut((0, 0), (d - 1, d - 1)).copy_from(q);
        Ok(OrthonormalFrame { matrix: &self.matrix * block, generator: self.generator.clone() })
    }

    /// Largest entry of `MᵀM − I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let d = self.dim();
        (self.matrix.transpose() * &self.matrix - DMatrix::<f64>::identity(d, d)).amax()
    }
}

/// Householder reflection sending `e_d` to `n`; identity when `n = e_d`.
pub fn complete_frame(base: &IntVector) -> Result<OrthonormalFrame> {
    if base.is_zero() {
        return Err(Error::Argument("cannot complete a frame from the zero vector".into()));
    }
    let d = base.dim();
    let n = base.unit_f64();
    let mut v: Vec<f64> = n.iter().map(|x| -x).collect();
    let tail: f64 = n[..d - 1].iter().map(|x| x * x).sum();
    v[d - 1] = if n[d - 1] > 0.0 { tail / (1.0 + n[d - 1]) } else { 1.0 - n[d - 1] };
    let vv: f64 = v.iter().map(|x| x * x).sum();
    let mut m = DMatrix::<f64>::identity(d, d);
    if vv > 0.0 {
        let v = DVector::from_vec(v);
        m -= (&v * v.transpose()) * (2.0 / vv);
    }
    Ok(OrthonormalFrame { matrix: m, generator: base.clone() })
}

/// Outcome of the exact test on `|ξ/|ξ| − η/|η||²` against a rational bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepTest {
    pub positive: bool,
    pub within: bool,
}

/// Exact comparison of `|r' − r|² = 2 − 2D/√P` with `q`, where `D = ξ·η` and
/// `P = |ξ|²|η|²`. No square root is ever formed.
pub fn step_test(xi: &IntVector, eta: &IntVector, q: &BigRational) -> StepTest {
    let dd = xi.dot(eta);
    let p = uint(xi.norm_sq() * eta.norm_sq());
    let d2 = &dd * &dd;
    let positive = !(dd.is_positive() && d2 == p);
    // c = 1 − q/2 = a/b with b > 0
    let (a, b) = half_complement(q);
    let lhs = &d2 * &b * &b;
    let rhs = &a * &a * &p;
    let within = if a.is_positive() {
        dd.is_positive() && lhs >= rhs
    } else {
        !dd.is_negative() || lhs <= rhs
    };
    StepTest { positive, within }
}

/// `1 − q/2` as an unreduced pair `(a, b)`, `b > 0`.
fn half_complement(q: &BigRational) -> (BigInt, BigInt) {
    let (qn, qd) = (q.numer(), q.denom());
    let (qn, qd) = if qd.is_negative() { (-qn, -qd) } else { (qn.clone(), qd.clone()) };
    let b = &qd * 2;
    (&b - qn, b)
}

/// Smallest integer `s ≥ 0` with `s²·den ≥ num`, for `den > 0`.
fn ceil_sqrt_ratio(num: &BigInt, den: &BigInt) -> BigInt {
    if !num.is_positive() {
        return BigInt::zero();
    }
    let mut s = (num / den).sqrt();
    while &s * &s * den < *num {
        s += 1;
    }
    s
}

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    a.div_ceil(b)
}

/// Extra side conditions imposed on the approximant.
struct LineConstraints<'a> {
    min_norm_sq: BigUint,
    /// `(|ξ|², ϱ)` requiring `|ξ| < ϱ|η|`
    gap: Option<(&'a BigUint, &'a BigRational)>,
    max_bits: u64,
}

impl LineConstraints<'_> {
    fn holds(&self, eta: &IntVector) -> bool {
        let n = eta.norm_sq();
        if n < self.min_norm_sq {
            return false;
        }
        match self.gap {
            Some((prev, rho)) => {
                // |ξ|² q² < p² |η|²
                let (p, q) = (rho.numer().magnitude(), rho.denom().magnitude());
                prev * q * q < p * p * n
            }
            None => true,
        }
    }
}

/// Finds `η = m·p + w` with `|η/|η| − p/|p||² ≤ q`, where `p` is primitive and
/// `w` is a fixed lattice vector off the line: a unimodular partner when
/// `d = 2`, else the coordinate axis closest to `p`. Both sides `±w` are
/// searched and the shorter result wins, counterclockwise on ties.
fn line_search(p: &IntVector, q: &BigRational, cons: &LineConstraints<'_>) -> std::result::Result<IntVector, String> {
    let w = partner(p);
    let neg = w.scaled(&BigInt::from(-1));
    let ccw = line_search_with(p, &w, q, cons)?;
    match line_search_with(p, &neg, q, cons) {
        Ok(cw) if cw.norm_sq() < ccw.norm_sq() => Ok(cw),
        _ => Ok(ccw),
    }
}

fn partner(p: &IntVector) -> IntVector {
    let d = p.dim();
    if d == 2 {
        let (a, b) = (&p.coords[0], &p.coords[1]);
        let e = a.extended_gcd(b);
        // a x + b y = 1  ⇒  cross(p, (−y, x)) = 1
        IntVector { coords: vec![-e.y, e.x] }
    } else {
        let np = uint(p.norm_sq());
        let j = (0..d)
            .filter(|&j| &p.coords[j] * &p.coords[j] != np)
            .max_by(|&i, &j| p.coords[i].magnitude().cmp(p.coords[j].magnitude()).then(j.cmp(&i)))
            .expect("nonzero p in d >= 3 has an axis off its line");
        IntVector::unit(d, j)
    }
}

fn line_search_with(
    p: &IntVector,
    w: &IntVector,
    q: &BigRational,
    cons: &LineConstraints<'_>,
) -> std::result::Result<IntVector, String> {
    let np = uint(p.norm_sq());
    let wp = w.dot(p);
    // |η|²|p|² − (η·p)² is the same for every m.
    let lag = uint(w.norm_sq()) * &np - &wp * &wp;
    let (a, b) = half_complement(q);
    if a >= b {
        return Err("non-positive tolerance".into());
    }
    let target = if a.is_positive() {
        // (η·p)² ≥ c²W/(1 − c²) with c = a/b
        let num = &a * &a * lag;
        let den = &b * &b - &a * &a;
        let bits = (LogValue::from_bigint(&num).ln() - LogValue::from_bigint(&den).ln()) / (2.0 * std::f64::consts::LN_2);
        if bits > cons.max_bits as f64 {
            return Err(format!("approximant needs about {bits:.3e} bits, budget is {}", cons.max_bits));
        }
        ceil_sqrt_ratio(&num, &den)
    } else {
        BigInt::zero()
    };
    let mut m = ceil_div(&(&target - &wp), &np);
    let mut eta = p.axpy(&m, w);
    if !cons.holds(&eta) {
        // Norm and ϱ-gap are monotone in m past the vertex; double, then bisect.
        let mut lo = m.clone();
        let mut step = BigInt::one().max(m.abs());
        let hi = loop {
            let cand = &lo + &step;
            if cons.holds(&p.axpy(&cand, w)) {
                break cand;
            }
            lo = cand;
            step *= 2;
            if step.bits() > cons.max_bits {
                return Err("norm floor not reached within budget".into());
            }
        };
        let mut hi = hi;
        while &hi - &lo > BigInt::one() {
            let mid: BigInt = (&lo + &hi) >> 1;
            if cons.holds(&p.axpy(&mid, w)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        m = hi;
        eta = p.axpy(&m, w);
    }
    for _ in 0..4 {
        let t = step_test(p, &eta, q);
        if t.positive && t.within && cons.holds(&eta) {
            return Ok(eta);
        }
        m += 1;
        eta = p.axpy(&m, w);
    }
    Err("exact post-check rejected the approximant".into())
}

/// Default bit budget for a single approximant.
pub const DEFAULT_MAX_BITS: u64 = 4_000_000;

const VERIFY_MAX_BITS: u64 = 64_000_000;

/// Lattice vector `ξ'` with `|ξ'| ≥ min_norm`, not parallel to `r`, and
/// `0 < |ξ'/|ξ'| − r/|r|| ≤ tol`, certified exactly.
pub fn approximate_direction(r: &IntVector, tol: &BigRational, min_norm: u64) -> Result<IntVector> {
    if r.is_zero() {
        return Err(Error::Argument("cannot approximate the zero direction".into()));
    }
    if !tol.is_positive() {
        return Err(Error::Argument("tolerance must be positive".into()));
    }
    let q = tol * tol;
    let cons = LineConstraints { min_norm_sq: BigUint::from(min_norm) * min_norm, gap: None, max_bits: DEFAULT_MAX_BITS };
    line_search(&r.primitive(), &q, &cons).map_err(|detail| Error::SearchExhausted { stage: 0, detail })
}

/// Fractional part in `[0, 1)` of `scale·(ξ·θ)`, computed exactly from the
/// binary expansion of each `θ_i`; `scale` defaults to 1.
pub fn frac_dot(xi: &IntVector, theta: &[f64], scale: Option<&BigRational>) -> f64 {
    let parts: Vec<(BigInt, i64)> = theta
        .iter()
        .map(|&t| {
            if t == 0.0 || !t.is_finite() {
                return (BigInt::zero(), 0);
            }
            let (m, e) = decompose(t.abs());
            let m = BigInt::from(m);
            (if t < 0.0 { -m } else { m }, e)
        })
        .collect();
    let shift = parts.iter().map(|&(_, e)| (-e).max(0)).max().unwrap_or(0) as usize;
    let mut num = BigInt::zero();
    for (c, (m, e)) in xi.coords.iter().zip(&parts) {
        if !m.is_zero() {
            num += (c * m) << ((e + shift as i64) as usize);
        }
    }
    let mut den = BigInt::one() << shift;
    if let Some(s) = scale {
        num *= s.numer();
        den *= s.denom();
        if den.is_negative() {
            num = -num;
            den = -den;
        }
    }
    let r = num.mod_floor(&den);
    if r.is_zero() {
        return 0.0;
    }
    let drop = den.bits().saturating_sub(64);
    let (r, den) = (r >> drop, den >> drop);
    (r.to_f64().unwrap_or(0.0) / den.to_f64().unwrap_or(1.0)).min(1.0 - f64::EPSILON / 2.0)
}

/// One row of a verification report, in the log domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageCheck {
    pub stage: usize,
    #[serde(serialize_with = "ser_ln", deserialize_with = "de_ln")]
    pub lhs_ln: f64,
    #[serde(serialize_with = "ser_ln", deserialize_with = "de_ln")]
    pub rhs_ln: f64,
    pub pass: bool,
}

fn ser_ln<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if x.is_finite() {
        s.serialize_f64(*x)
    } else {
        s.serialize_none()
    }
}

fn de_ln<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NEG_INFINITY))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepCheck {
    pub step: usize,
    pub positive: bool,
    pub within_bound: bool,
    pub norm_floor: bool,
    pub gap: bool,
    pub stored_bound_sound: bool,
}

impl StepCheck {
    pub fn pass(&self) -> bool {
        self.positive && self.within_bound && self.norm_floor && self.gap && self.stored_bound_sound
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub stage_checks: Vec<StageCheck>,
    pub step_checks: Vec<StepCheck>,
    pub passed: bool,
}

impl VerificationReport {
    /// First failing stage or step index.
    pub fn first_failure(&self) -> Option<usize> {
        let a = self.step_checks.iter().find(|c| !c.pass()).map(|c| c.step);
        let b = self.stage_checks.iter().find(|c| !c.pass).map(|c| c.stage);
        match (a, b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }
}

pub(crate) mod ratio_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

pub(crate) mod ratio_vec_str {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[BigRational], s: S) -> std::result::Result<S::Ok, S::Error> {
        v.iter().map(ToString::to_string).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<BigRational>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .collect()
    }
}

/// Stages `ξ^(1), …, ξ^(K+1)` with the per-step squared budgets actually used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionCertificate {
    pub omega1: Modulus,
    pub gap_base: u32,
    #[serde(with = "ratio_str")]
    pub rho: BigRational,
    pub stages: Vec<IntVector>,
    /// Lower bounds for `(ω₁²(|ξ^(k)|)/(b^k|ξ^(k)|²))²`, one per step.
    #[serde(with = "ratio_vec_str")]
    pub step_bounds_sq: Vec<BigRational>,
    #[serde(default)]
    pub checks: Vec<StageCheck>,
}

impl DirectionCertificate {
    /// Number of spectral stages `K`; the last stage only fixes the normal.
    pub fn k(&self) -> usize {
        self.stages.len().saturating_sub(1)
    }

    pub fn normal_generator(&self) -> &IntVector {
        self.stages.last().expect("certificate has at least one stage")
    }

    pub fn dim(&self) -> usize {
        self.normal_generator().dim()
    }

    /// Exact `|Nᵀξ^(k)|²` against the final stage (1-based `k`).
    pub fn gap_sq(&self, k: usize) -> Result<BigRational> {
        projection_gap_sq(self.normal_generator(), &self.stages[k - 1])
    }
}

/// `ω₁(√n)⁴` when exactly rational, else a rational lower bound for `ω₁(√n)²`.
enum OmegaSquared {
    Fourth(BigRational),
    Below(BigRational),
}

fn omega_squared(omega1: &Modulus, n: &BigUint, stage: usize, max_bits: u64) -> Result<OmegaSquared> {
    if let Some(w4) = omega1.exact_fourth_power_at_sqrt(n) {
        return Ok(OmegaSquared::Fourth(w4));
    }
    let ln = omega1.ln_at_sqrt(n, Some(stage))?;
    let bits = 2.0 * ln.abs() / std::f64::consts::LN_2;
    if !(bits <= max_bits as f64) {
        return Err(Error::SearchExhausted {
            stage,
            detail: format!("ω₁² at stage {stage} needs about {bits:.3e} bits, budget is {max_bits}"),
        });
    }
    Ok(OmegaSquared::Below(LogValue::from_ln(2.0 * ln).rational_below(1e-12)))
}

/// Rational lower bound for the squared step budget at stage `k`.
pub fn step_bound_sq(omega1: &Modulus, n: &BigUint, k: usize, gap_base: u32, max_bits: u64) -> Result<BigRational> {
    let scale = BigRational::from_integer(uint(num_traits::pow(BigUint::from(gap_base), 2 * k) * n * n));
    Ok(match omega_squared(omega1, n, k, max_bits)? {
        OmegaSquared::Fourth(w4) => w4 / scale,
        OmegaSquared::Below(w2) => &w2 * &w2 / scale,
    })
}

/// Result of the construction; on failure `certificate` holds the stages
/// built so far.
#[derive(Clone, Debug)]
pub struct Construction {
    pub certificate: DirectionCertificate,
    pub failure: Option<Error>,
}

#[derive(Clone, Debug)]
pub struct ConstructionParams {
    pub k: usize,
    pub gap_base: u32,
    pub rho: BigRational,
    pub max_bits: u64,
}

impl ConstructionParams {
    pub fn new(k: usize) -> Self {
        ConstructionParams { k, gap_base: 10, rho: BigRational::new(1.into(), 2.into()), max_bits: DEFAULT_MAX_BITS }
    }
}

pub fn construct_bad_direction(
    omega1: &Modulus,
    k: usize,
    seed: &IntVector,
    gap_base: u32,
    rho: &BigRational,
) -> Result<DirectionCertificate> {
    let params = ConstructionParams { k, gap_base, rho: rho.clone(), max_bits: DEFAULT_MAX_BITS };
    let c = construct_bad_direction_partial(omega1, seed, &params)?;
    match c.failure {
        None => Ok(c.certificate),
        Some(e) => Err(e),
    }
}

/// Builds `K+1` stages, stopping at the first step whose approximant does not
/// fit the bit budget.
pub fn construct_bad_direction_partial(omega1: &Modulus, seed: &IntVector, p: &ConstructionParams) -> Result<Construction> {
    if p.k < 1 {
        return Err(Error::Argument("K must be at least 1".into()));
    }
    if p.gap_base < 2 {
        return Err(Error::Argument("gap_base must be at least 2".into()));
    }
    if !(p.rho.is_positive() && p.rho < BigRational::one()) {
        return Err(Error::Argument(format!("rho must lie in (0, 1), got {}", p.rho)));
    }
    if seed.is_zero() {
        return Err(Error::Argument("seed must be nonzero".into()));
    }
    let mut cert = DirectionCertificate {
        omega1: omega1.clone(),
        gap_base: p.gap_base,
        rho: p.rho.clone(),
        stages: vec![seed.clone()],
        step_bounds_sq: vec![],
        checks: vec![],
    };
    for k in 1..=p.k {
        let xi = cert.stages[k - 1].clone();
        let n = xi.norm_sq();
        let q = match step_bound_sq(omega1, &n, k, p.gap_base, p.max_bits) {
            Ok(q) => q,
            Err(e) => return Ok(Construction { certificate: cert, failure: Some(e) }),
        };
        let cons = LineConstraints {
            min_norm_sq: BigUint::from((k + 1) as u64).pow(2),
            gap: Some((&n, &p.rho)),
            max_bits: p.max_bits,
        };
        match line_search(&xi.primitive(), &q, &cons) {
            Ok(eta) => {
                cert.stages.push(eta);
                cert.step_bounds_sq.push(q);
            }
            Err(detail) => {
                return Ok(Construction { certificate: cert, failure: Some(Error::SearchExhausted { stage: k, detail }) })
            }
        }
    }
    let report = verify_direction_certificate(&cert);
    cert.checks = report.stage_checks.clone();
    let failure = (!report.passed).then(|| Error::SearchExhausted {
        stage: report.first_failure().unwrap_or(0),
        detail: "constructed certificate failed verification".into(),
    });
    Ok(Construction { certificate: cert, failure })
}

/// Re-checks every step and every stage of a certificate exactly.
pub fn verify_direction_certificate(cert: &DirectionCertificate) -> VerificationReport {
    let kk = cert.k();
    let mut step_checks = Vec::with_capacity(kk);
    let mut stage_checks = Vec::with_capacity(kk);
    if kk == 0 {
        return VerificationReport { stage_checks, step_checks, passed: true };
    }
    let (rp, rq) = (cert.rho.numer().magnitude().clone(), cert.rho.denom().magnitude().clone());
    for k in 1..=kk {
        let (xi, eta) = (&cert.stages[k - 1], &cert.stages[k]);
        let nxi = xi.norm_sq();
        let neta = eta.norm_sq();
        let fresh = step_bound_sq(&cert.omega1, &nxi, k, cert.gap_base, VERIFY_MAX_BITS).ok();
        let stored = cert.step_bounds_sq.get(k - 1);
        let (test, sound) = match (&fresh, stored) {
            (Some(f), Some(s)) => (step_test(xi, eta, s), s <= f && s.is_positive()),
            _ => (StepTest { positive: false, within: false }, false),
        };
        step_checks.push(StepCheck {
            step: k,
            positive: test.positive,
            within_bound: test.within,
            norm_floor: neta >= BigUint::from((k + 1) as u64).pow(2) && nxi >= BigUint::from(k as u64).pow(2),
            gap: &nxi * &rq * &rq < &rp * &rp * &neta,
            stored_bound_sound: sound,
        });
    }
    let top = cert.normal_generator();
    for j in 1..=kk {
        let xi = &cert.stages[j - 1];
        let n = xi.norm_sq();
        let gap_sq = projection_gap_sq(top, xi).expect("nonzero generator");
        let lhs_ln = 0.5 * LogValue::from_ratio(&gap_sq).ln();
        let rhs_ln = cert.omega1.ln_at_sqrt(&n, Some(j)).unwrap_or(f64::NAN);
        let pass = match omega_squared(&cert.omega1, &n, j, VERIFY_MAX_BITS) {
            Ok(OmegaSquared::Fourth(w4)) => &gap_sq * &gap_sq <= w4,
            Ok(OmegaSquared::Below(w2)) => gap_sq <= w2,
            Err(_) => false,
        };
        stage_checks.push(StageCheck { stage: j, lhs_ln, rhs_ln, pass });
    }
    let passed = step_checks.iter().all(StepCheck::pass) && stage_checks.iter().all(|c| c.pass);
    VerificationReport { stage_checks, step_checks, passed }
}
