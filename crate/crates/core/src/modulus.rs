//! Moduli of continuity: strictly decreasing bijections `[c₀, ∞) → (0, ω(c₀)]`
//! that tend to zero. All evaluation happens in the log domain.

use std::f64::consts::{E, PI};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::logvalue::{ln_biguint, LogValue};

/// How the self-similar exponent `t^{-c·t}` inside a derived modulus is indexed.
///
/// `ByArgument` is the uniform modulus `t ↦ … t^{-2t} …`. `ByStage` replaces the
/// exponent by the stage index `k` of the direction construction, which is the
/// only place the exponent enters the slow-convergence inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Indexing {
    ByArgument,
    ByStage,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `t^{-p}`
    Power { p: f64 },
    /// `1 / ln(shift + t)`, `shift ≥ e`
    Log { shift: f64 },
    /// `e^{-c t}`
    Exp { c: f64 },
    /// Log-log linear interpolation through `(t_i, ω_i)`.
    Table { points: Vec<(f64, f64)> },
    /// `1 / (4π ω⁻¹(e⁻¹ t^{-2j}))` with `j = t` or the stage index.
    HalfspaceOmega1 { base: Box<Modulus>, indexing: Indexing },
    /// `δ₀/(2πA₀) / ω⁻¹((3/8) τ₀ t^{-j})` with `j = t` or the stage index.
    FamilyOmega1 { base: Box<Modulus>, delta0: f64, a0: f64, tau0: f64, indexing: Indexing },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Modulus {
    family: Family,
    domain_start: f64,
}

const BISECTION_STEPS: usize = 200;

impl Modulus {
    pub fn power(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(Error::Argument(format!("power exponent must be positive, got {p}")));
        }
        Ok(Modulus { family: Family::Power { p }, domain_start: 1.0 })
    }

    pub fn log() -> Self {
        Modulus { family: Family::Log { shift: E }, domain_start: 0.0 }
    }

    pub fn log_with_shift(shift: f64) -> Result<Self> {
        if !(shift >= E) {
            return Err(Error::Argument(format!("log shift must be at least e, got {shift}")));
        }
        Ok(Modulus { family: Family::Log { shift }, domain_start: 0.0 })
    }

    pub fn exp(c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::Argument(format!("exp rate must be positive, got {c}")));
        }
        Ok(Modulus { family: Family::Exp { c }, domain_start: 0.0 })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::Argument("table needs at least two samples".into()));
        }
        for w in points.windows(2) {
            let ((t0, v0), (t1, v1)) = (w[0], w[1]);
            if !(t0 > 0.0 && t1 > t0 && v0 > v1 && v1 > 0.0) {
                return Err(Error::Argument("table must be strictly increasing in t and strictly decreasing in value".into()));
            }
        }
        let domain_start = points[0].0;
        Ok(Modulus { family: Family::Table { points }, domain_start })
    }

    /// The derived modulus driving the half-space direction construction.
    /// The domain start is raised automatically until the argument of `ω⁻¹`
    /// lies in the range of `base`.
    pub fn halfspace_omega1(base: &Modulus, indexing: Indexing) -> Result<Self> {
        let sup = base.sup_ln();
        // ln arg = -1 - 2 j ln t  must be <= sup.
        let start = match indexing {
            Indexing::ByStage => ((-1.0 - sup) / 2.0).exp().max(1.0),
            Indexing::ByArgument => solve_t_ln_t((-1.0 - sup) / 2.0).max(1.0),
        };
        Ok(Modulus {
            family: Family::HalfspaceOmega1 { base: Box::new(base.clone()), indexing },
            domain_start: start,
        })
    }

    /// The derived modulus driving the family-of-integrals construction.
    pub fn family_omega1(base: &Modulus, delta0: f64, a0: f64, tau0: f64, indexing: Indexing) -> Result<Self> {
        for (name, v) in [("delta0", delta0), ("A0", a0), ("tau0", tau0)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Argument(format!("{name} must be positive, got {v}")));
            }
        }
        let sup = base.sup_ln();
        // ln arg = ln(3/8 τ₀) - j ln t  must be <= sup.
        let excess = (0.375 * tau0).ln() - sup;
        let start = match indexing {
            Indexing::ByStage => excess.exp().max(1.0),
            Indexing::ByArgument => solve_t_ln_t(excess).max(1.0),
        };
        Ok(Modulus {
            family: Family::FamilyOmega1 { base: Box::new(base.clone()), delta0, a0, tau0, indexing },
            domain_start: start,
        })
    }

    pub fn with_domain_start(mut self, start: f64) -> Result<Self> {
        if !(start >= 0.0) {
            return Err(Error::Argument(format!("domain start must be non-negative, got {start}")));
        }
        if let Family::Power { .. } = self.family {
            if start == 0.0 {
                return Err(Error::Argument("power modulus is unbounded at 0".into()));
            }
        }
        self.domain_start = self.domain_start.max(start);
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn domain_start(&self) -> f64 {
        self.domain_start
    }

    /// True when evaluation needs the stage index.
    pub fn is_stage_indexed(&self) -> bool {
        matches!(
            self.family,
            Family::HalfspaceOmega1 { indexing: Indexing::ByStage, .. }
                | Family::FamilyOmega1 { indexing: Indexing::ByStage, .. }
        )
    }

    /// `ln ω(domain_start)`, the supremum of the range.
    pub fn sup_ln(&self) -> f64 {
        match &self.family {
            Family::Power { p } => -p * self.domain_start.ln(),
            Family::Log { shift } => -(shift + self.domain_start).ln().ln(),
            Family::Exp { c } => -c * self.domain_start,
            Family::Table { .. } | Family::HalfspaceOmega1 { .. } | Family::FamilyOmega1 { .. } => self
                .eval_stage(LogValue::from_f64(self.domain_start), Some(1))
                .map(|v| v.ln())
                .unwrap_or(f64::INFINITY),
        }
    }

    pub fn eval(&self, t: LogValue) -> Result<LogValue> {
        self.eval_stage(t, None)
    }

    /// Evaluates `ω(t)`; `stage` is required for stage-indexed derived moduli
    /// and ignored otherwise.
    pub fn eval_stage(&self, t: LogValue, stage: Option<usize>) -> Result<LogValue> {
        if t.sign() < 0 || t < LogValue::from_f64(self.domain_start) {
            return Err(Error::Domain(t.to_string(), self.domain_start));
        }
        let ln_t = t.ln_abs();
        let ln = match &self.family {
            Family::Power { p } => -p * ln_t,
            Family::Log { shift } => -ln_shifted(*shift, t).ln(),
            Family::Exp { c } => -c * t.to_f64(),
            Family::Table { points } => table_ln(points, ln_t),
            Family::HalfspaceOmega1 { base, indexing } => {
                let j = exponent_index(*indexing, t, stage)?;
                let arg = LogValue::from_ln(-1.0 - 2.0 * j * ln_t);
                let inv = base.invert(arg)?;
                -(4.0 * PI).ln() - inv.ln()
            }
            Family::FamilyOmega1 { base, delta0, a0, tau0, indexing } => {
                let j = exponent_index(*indexing, t, stage)?;
                let arg = LogValue::from_ln((0.375 * tau0).ln() - j * ln_t);
                let inv = base.invert(arg)?;
                (delta0 / (2.0 * PI * a0)).ln() - inv.ln()
            }
        };
        Ok(LogValue::from_ln(ln))
    }

    pub fn invert(&self, s: LogValue) -> Result<LogValue> {
        self.invert_stage(s, None)
    }

    /// Solves `ω(t) = s`.
    pub fn invert_stage(&self, s: LogValue, stage: Option<usize>) -> Result<LogValue> {
        if !s.is_positive() || s.ln() > self.sup_ln() * (1.0 + 1e-14f64.copysign(self.sup_ln())) + 1e-14 {
            return Err(Error::Range(s.to_string()));
        }
        let ln_s = s.ln();
        match &self.family {
            Family::Power { p } => Ok(LogValue::from_ln(-ln_s / p)),
            Family::Log { shift } => {
                // ln(shift + t) = 1/s
                let inv_s = (-ln_s).exp();
                if !inv_s.is_finite() {
                    return Err(Error::Range(format!("{s}: inverse overflows the log domain")));
                }
                let ln_t = if inv_s > 30.0 {
                    inv_s + (-shift * (-inv_s).exp()).ln_1p()
                } else {
                    (inv_s.exp() - shift).max(0.0).ln()
                };
                Ok(LogValue::from_ln(ln_t))
            }
            Family::Exp { c } => Ok(LogValue::from_f64((-ln_s / c).max(0.0))),
            _ => self.bisect(ln_s, stage),
        }
    }

    fn bisect(&self, ln_s: f64, stage: Option<usize>) -> Result<LogValue> {
        let f = |u: f64| -> Result<f64> { Ok(self.eval_stage(LogValue::from_ln(u), stage)?.ln()) };
        let mut lo = self.domain_start.ln();
        if f(lo)? <= ln_s {
            return Ok(LogValue::from_f64(self.domain_start));
        }
        let mut width = 1.0;
        let mut hi = lo + width;
        let mut guard = 0;
        while f(hi)? > ln_s {
            lo = hi;
            width *= 2.0;
            hi = lo + width;
            guard += 1;
            if guard > 1100 || !hi.is_finite() {
                return Err(Error::Range(format!("no preimage found for ln s = {ln_s}")));
            }
        }
        for _ in 0..BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if f(mid)? > ln_s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(LogValue::from_ln(0.5 * (lo + hi)))
    }

    /// Checks positivity, finiteness and strict decrease on a geometric grid
    /// of `points ≥ 32` arguments starting at the domain start.
    pub fn check_invariants(&self, points: usize) -> Result<()> {
        let points = points.max(32);
        let start = self.domain_start.max(1e-3);
        let mut prev: Option<LogValue> = if self.domain_start == 0.0 {
            Some(self.eval_stage(LogValue::ZERO, Some(1))?)
        } else {
            None
        };
        for i in 0..points {
            let t = LogValue::from_ln(start.ln() + i as f64 * 0.7);
            let v = self.eval_stage(t, Some(1))?;
            if !v.is_positive() || !v.ln().is_finite() {
                return Err(Error::Argument(format!("modulus value {v} at t = {t} is not positive and finite")));
            }
            if let Some(p) = prev {
                if v >= p {
                    return Err(Error::Argument(format!("modulus not strictly decreasing at t = {t}")));
                }
            }
            prev = Some(v);
        }
        Ok(())
    }

    /// Grid check of `t ω(t) → ∞`: the product must grow along the tail of a
    /// geometric grid and exceed its starting value by a factor of 10.
    pub fn t_omega_diverges(&self) -> bool {
        let start = self.domain_start.max(1.0);
        let vals: Vec<f64> = (0..48)
            .map(|i| {
                let t = LogValue::from_ln(start.ln() + i as f64);
                self.eval_stage(t, Some(1)).map(|w| t.ln() + w.ln()).unwrap_or(f64::NEG_INFINITY)
            })
            .collect();
        vals.windows(2).skip(24).all(|w| w[1] > w[0]) && vals[47] > vals[0] + 10f64.ln()
    }

    /// `ω(√n)⁴` as an exact rational when the family makes it rational
    /// (power moduli with `2p ∈ ℤ`).
    pub fn exact_fourth_power_at_sqrt(&self, n: &BigUint) -> Option<BigRational> {
        match self.family {
            Family::Power { p } => {
                let two_p = 2.0 * p;
                if two_p.fract() != 0.0 || two_p > 64.0 {
                    return None;
                }
                let e = two_p as u32;
                Some(BigRational::new(BigInt::one(), BigInt::from(n.pow(e))))
            }
            _ => None,
        }
    }

    /// `ln ω(√n)` for an integer square norm.
    pub fn ln_at_sqrt(&self, n: &BigUint, stage: Option<usize>) -> Result<f64> {
        let t = LogValue::from_ln(0.5 * ln_biguint(n));
        Ok(self.eval_stage(t, stage)?.ln())
    }
}

fn exponent_index(indexing: Indexing, t: LogValue, stage: Option<usize>) -> Result<f64> {
    match indexing {
        Indexing::ByArgument => {
            let v = t.to_f64();
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Range(format!("argument {t} too large for a self-indexed exponent")))
            }
        }
        Indexing::ByStage => stage
            .map(|k| k as f64)
            .ok_or_else(|| Error::Argument("stage-indexed modulus evaluated without a stage".into())),
    }
}

/// Smallest `t ≥ 1` with `t ln t ≥ x`.
fn solve_t_ln_t(x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    while hi * hi.ln() < x {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid * mid.ln() < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `ln(shift + t)` for `t` possibly beyond double range.
fn ln_shifted(shift: f64, t: LogValue) -> f64 {
    let ln_t = t.ln_abs();
    if ln_t > 30.0 {
        ln_t + (shift * (-ln_t).exp()).ln_1p()
    } else {
        (shift + t.to_f64()).ln()
    }
}

fn table_ln(points: &[(f64, f64)], ln_t: f64) -> f64 {
    let seg = points
        .windows(2)
        .position(|w| ln_t <= w[1].0.ln())
        .unwrap_or(points.len() - 2);
    let (t0, v0) = points[seg];
    let (t1, v1) = points[seg + 1];
    let (x0, x1) = (t0.ln(), t1.ln());
    let (y0, y1) = (v0.ln(), v1.ln());
    y0 + (y1 - y0) * (ln_t - x0) / (x1 - x0)
}

#[derive(Serialize, Deserialize)]
struct ModulusRepr {
    family: String,
    params: Vec<f64>,
    domain_start: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<Box<ModulusRepr>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    indexing: Option<Indexing>,
}

impl From<&Modulus> for ModulusRepr {
    fn from(m: &Modulus) -> Self {
        let (family, params, base, indexing) = match &m.family {
            Family::Power { p } => ("power", vec![*p], None, None),
            Family::Log { shift } => ("log", vec![*shift], None, None),
            Family::Exp { c } => ("exp", vec![*c], None, None),
            Family::Table { points } => ("table", points.iter().flat_map(|&(t, v)| [t, v]).collect(), None, None),
            Family::HalfspaceOmega1 { base, indexing } => {
                ("omega1_halfspace", vec![], Some(Box::new(ModulusRepr::from(base.as_ref()))), Some(*indexing))
            }
            Family::FamilyOmega1 { base, delta0, a0, tau0, indexing } => (
                "omega1_family",
                vec![*delta0, *a0, *tau0],
                Some(Box::new(ModulusRepr::from(base.as_ref()))),
                Some(*indexing),
            ),
        };
        ModulusRepr { family: family.into(), params, domain_start: m.domain_start, base, indexing }
    }
}

impl TryFrom<ModulusRepr> for Modulus {
    type Error = Error;
    fn try_from(r: ModulusRepr) -> Result<Self> {
        let param = |i: usize| {
            r.params
                .get(i)
                .copied()
                .ok_or_else(|| Error::Argument(format!("modulus `{}` missing parameter {i}", r.family)))
        };
        let base = || -> Result<Modulus> {
            let b = r.base.as_ref().ok_or_else(|| Error::Argument("derived modulus without base".into()))?;
            Modulus::try_from(ModulusRepr {
                family: b.family.clone(),
                params: b.params.clone(),
                domain_start: b.domain_start,
                base: b.base.as_ref().map(|x| Box::new(clone_repr(x))),
                indexing: b.indexing,
            })
        };
        let indexing = r.indexing.unwrap_or(Indexing::ByArgument);
        let m = match r.family.as_str() {
            "power" => Modulus::power(param(0)?)?,
            "log" => Modulus::log_with_shift(r.params.first().copied().unwrap_or(E))?,
            "exp" => Modulus::exp(param(0)?)?,
            "table" => {
                if r.params.len() % 2 != 0 {
                    return Err(Error::Argument("table params must come in (t, value) pairs".into()));
                }
                Modulus::table(r.params.chunks(2).map(|c| (c[0], c[1])).collect())?
            }
            "omega1_halfspace" => Modulus::halfspace_omega1(&base()?, indexing)?,
            "omega1_family" => Modulus::family_omega1(&base()?, param(0)?, param(1)?, param(2)?, indexing)?,
            other => return Err(Error::Argument(format!("unknown modulus family `{other}`"))),
        };
        if r.domain_start > m.domain_start {
            m.with_domain_start(r.domain_start)
        } else {
            Ok(m)
        }
    }
}

fn clone_repr(r: &ModulusRepr) -> ModulusRepr {
    ModulusRepr {
        family: r.family.clone(),
        params: r.params.clone(),
        domain_start: r.domain_start,
        base: r.base.as_ref().map(|b| Box::new(clone_repr(b))),
        indexing: r.indexing,
    }
}

impl Serialize for Modulus {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        ModulusRepr::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Modulus {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = ModulusRepr::deserialize(d)?;
        Modulus::try_from(r).map_err(serde::de::Error::custom)
    }
}

impl std::str::FromStr for Modulus {
    type Err = Error;

    /// `power:0.5`, `log`, `log:3.0`, `exp:1`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        let num = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::Argument(format!("modulus `{name}` needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::Argument(format!("bad modulus parameter: {e}")))
        };
        match name {
            "power" => Modulus::power(num(arg)?),
            "log" => match arg {
                Some(_) => Modulus::log_with_shift(num(arg)?),
                None => Ok(Modulus::log()),
            },
            "exp" => Modulus::exp(num(arg)?),
            _ => Err(Error::Argument(format!("unknown modulus `{s}`"))),
        }
    }
}

/// `ω₁(t) = 1 / (4π ω⁻¹(e⁻¹ t^{-2t}))`.
pub fn omega1_halfspace(omega: &Modulus, t: LogValue) -> Result<LogValue> {
    Modulus::halfspace_omega1(omega, Indexing::ByArgument)?.eval(t)
}

/// `ω₁(t) = δ₀/(2πA₀) · 1/ω⁻¹((3/8) τ₀ t^{-t})`.
pub fn omega1_family(omega: &Modulus, t: LogValue, delta0: f64, a0: f64, tau0: f64) -> Result<LogValue> {
    Modulus::family_omega1(omega, delta0, a0, tau0, Indexing::ByArgument)?.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lv(x: f64) -> LogValue {
        LogValue::from_f64(x)
    }

    fn builtins() -> Vec<Modulus> {
        vec![
            Modulus::power(0.5).unwrap(),
            Modulus::power(1.0).unwrap(),
            Modulus::power(0.25).unwrap(),
            Modulus::log(),
            Modulus::exp(1.0).unwrap(),
            Modulus::table(vec![(1.0, 1.0), (10.0, 0.3), (100.0, 0.05), (1e4, 1e-3)]).unwrap(),
        ]
    }

    #[test]
    fn eval_examples() {
        let p = Modulus::power(0.5).unwrap();
        assert!((p.eval(lv(4.0)).unwrap().to_f64() - 0.5).abs() < 1e-15);
        assert!((Modulus::log().eval(LogValue::ZERO).unwrap().to_f64() - 1.0).abs() < 1e-15);
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let v = p.eval(lv(2f64.powi(i))).unwrap().to_f64();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn eval_below_domain_is_an_error() {
        let p = Modulus::power(0.5).unwrap();
        assert!(matches!(p.eval(lv(0.5)), Err(Error::Domain(..))));
    }

    #[test]
    fn invert_examples() {
        let p = Modulus::power(0.5).unwrap();
        assert!((p.invert(lv(0.5)).unwrap().to_f64() - 4.0).abs() < 1e-12);
        let e = Modulus::exp(1.0).unwrap();
        assert!((e.invert(LogValue::from_ln(-3.0)).unwrap().to_f64() - 3.0).abs() < 1e-12);
        assert!(matches!(p.invert(lv(2.0)), Err(Error::Range(_))));
    }

    #[test]
    fn roundtrip_on_builtins() {
        for m in builtins() {
            for &t in &[1.0, 10.0, 1e6] {
                let back = m.invert(m.eval(lv(t)).unwrap()).unwrap().to_f64();
                assert!(((back - t) / t).abs() <= 1e-12, "{m:?} at {t}: {back}");
            }
        }
    }

    #[test]
    fn invariants_hold_on_builtins() {
        for m in builtins() {
            m.check_invariants(32).unwrap();
        }
    }

    #[test]
    fn omega1_halfspace_closed_form() {
        let w = Modulus::power(1.0).unwrap();
        let v = omega1_halfspace(&w, lv(1.0)).unwrap().to_f64();
        assert!((v - 1.0 / (4.0 * PI * E)).abs() < 1e-15);
        assert!((v - 0.029275).abs() < 1e-6);
        for m in builtins() {
            let a = omega1_halfspace(&m, lv(1.0));
            let b = omega1_halfspace(&m, lv(2.0));
            if let (Ok(a), Ok(b)) = (a, b) {
                assert!(b < a);
            }
        }
    }

    #[test]
    fn omega1_halfspace_log_path_matches_float_path() {
        let w = Modulus::power(0.5).unwrap();
        for t in 1..=20 {
            let t = t as f64;
            // ω⁻¹(s) = s⁻², so ω₁(t) = 1 / (4π e² t^{4t}).
            let direct = 1.0 / (4.0 * PI * E * E * t.powf(4.0 * t));
            let via = omega1_halfspace(&w, lv(t)).unwrap();
            assert!((via.ln() - direct.ln()).abs() <= 1e-10 * direct.ln().abs().max(1.0));
        }
    }

    #[test]
    fn omega1_family_closed_form_and_scaling() {
        let w = Modulus::power(1.0).unwrap();
        let v = omega1_family(&w, lv(1.0), 1.0, 1.0, 1.0).unwrap().to_f64();
        assert!((v - 3.0 / (16.0 * PI)).abs() < 1e-15);
        let a = omega1_family(&w, lv(3.0), 1.0, 1.0, 1.0).unwrap().to_f64();
        let b = omega1_family(&w, lv(3.0), 2.0, 1.0, 1.0).unwrap().to_f64();
        assert!((b / a - 2.0).abs() < 1e-12);
        let mut prev = f64::INFINITY;
        for t in 1..=10 {
            let v = omega1_family(&w, lv(t as f64), 1.0, 1.0, 1.0).unwrap().to_f64();
            assert!(v < prev);
            prev = v;
        }
    }

    #[test]
    fn derived_domain_start_is_raised() {
        // sup ω = ω(c₀) = 0.1 for c₀ = 100, so e⁻¹ t^{-2} needs t ≥ e^{(ln 10 - 1)/2}.
        let w = Modulus::power(0.5).unwrap().with_domain_start(100.0).unwrap();
        let d = Modulus::halfspace_omega1(&w, Indexing::ByStage).unwrap();
        assert!(d.domain_start() > 1.0);
        assert!(d.eval_stage(lv(d.domain_start() * 1.0001), Some(1)).is_ok());
    }

    #[test]
    fn stage_indexed_needs_a_stage() {
        let d = Modulus::halfspace_omega1(&Modulus::power(0.5).unwrap(), Indexing::ByStage).unwrap();
        assert!(d.eval(lv(2.0)).is_err());
        // At t = k the two indexings agree.
        let u = Modulus::halfspace_omega1(&Modulus::power(0.5).unwrap(), Indexing::ByArgument).unwrap();
        let a = d.eval_stage(lv(3.0), Some(3)).unwrap();
        let b = u.eval(lv(3.0)).unwrap();
        assert!(a.log_distance(&b) < 1e-12);
    }

    #[test]
    fn t_omega_predicate() {
        assert!(Modulus::power(0.25).unwrap().t_omega_diverges());
        assert!(Modulus::log().t_omega_diverges());
        assert!(!Modulus::power(2.0).unwrap().t_omega_diverges());
        assert!(!Modulus::exp(1.0).unwrap().t_omega_diverges());
    }

    #[test]
    fn json_shape() {
        let m = Modulus::power(0.5).unwrap();
        let j = serde_json::to_value(&m).unwrap();
        assert_eq!(j["family"], "power");
        assert_eq!(j["params"][0], 0.5);
        assert_eq!(j["domain_start"], 1.0);
        let d = Modulus::family_omega1(&m, 0.7, 2.0, 1.7, Indexing::ByStage).unwrap();
        let back: Modulus = serde_json::from_value(serde_json::to_value(&d).unwrap()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn parse_cli_spec() {
        assert_eq!("power:0.5".parse::<Modulus>().unwrap(), Modulus::power(0.5).unwrap());
        assert_eq!("log".parse::<Modulus>().unwrap(), Modulus::log());
        assert!("cubic:1".parse::<Modulus>().is_err());
    }

    proptest! {
        #[test]
        fn eval_invert_identities(idx in 0usize..6, lt in 0.0f64..30.0) {
            let m = &builtins()[idx];
            let t = LogValue::from_ln(lt).max(LogValue::from_f64(m.domain_start()));
            let s = m.eval(t).unwrap();
            let back = m.invert(s).unwrap();
            // compare in log domain; exp needs t to stay representable
            if let Family::Exp { .. } = m.family() {
                prop_assume!(lt < 5.0);
            }
            let again = m.eval(back).unwrap();
            prop_assert!(again.log_distance(&s) <= 1e-12 * s.ln_abs().abs().max(1.0));
        }

        #[test]
        fn derived_moduli_decrease(k in 1usize..6, lt in 0.0f64..8.0) {
            let base = Modulus::power(0.5).unwrap();
            let d = Modulus::halfspace_omega1(&base, Indexing::ByStage).unwrap();
            let f = Modulus::family_omega1(&base, 0.7, 2.0, 1.77, Indexing::ByStage).unwrap();
            let t1 = LogValue::from_ln(lt);
            let t2 = LogValue::from_ln(lt + 0.1);
            prop_assert!(d.eval_stage(t2, Some(k)).unwrap() < d.eval_stage(t1, Some(k)).unwrap());
            prop_assert!(f.eval_stage(t2, Some(k)).unwrap() < f.eval_stage(t1, Some(k)).unwrap());
        }
    }
}
