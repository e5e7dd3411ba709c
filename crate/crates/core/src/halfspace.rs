//! Laplace boundary layers in the half-space `{y·n > 0}` with finitely many
//! Fourier modes on the boundary, the energy `S(t)` and the `t_k` schedule.

use std::f64::consts::{LN_2, PI};

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{complete_frame, frac_dot, projection_gap_sq, DirectionCertificate, IntVector, OrthonormalFrame};
use crate::logvalue::LogValue;
use crate::modulus::Modulus;

/// Slack for log-domain margins.
pub const MARGIN_SLACK: f64 = 1e-9;

const LN_FLOOR: f64 = -1e300;

/// A symmetric pair `±ξ` carrying the real coefficient `c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub xi: IntVector,
    /// Position of `ξ` in the direction construction (1-based).
    pub stage: usize,
    pub c: LogValue,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryData {
    pub modes: Vec<Mode>,
    /// Every stored pair stands for `c_ξ = c_{−ξ}`.
    pub symmetric: bool,
}

impl BoundaryData {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        let data = BoundaryData { modes, symmetric: true };
        data.check()?;
        Ok(data)
    }

    /// Symmetry, mean zero and the decay proxy.
    pub fn check(&self) -> Result<()> {
        if !self.symmetric {
            return Err(Error::Argument("boundary data must be a symmetric real spectrum".into()));
        }
        if self.modes.iter().any(|m| m.xi.is_zero()) {
            return Err(Error::Argument("the zero mode is excluded (mean-zero data)".into()));
        }
        if !self.decay_proxy_holds() {
            return Err(Error::Argument("coefficients do not decay faster than the norms grow".into()));
        }
        Ok(())
    }

    /// `c_k|ξ^(k)|^k ≤ 1` for every mode and `c_k|ξ^(k)|^{10}` decreasing once
    /// `k > 10`. Before that index the literal product can grow with the norms.
    pub fn decay_proxy_holds(&self) -> bool {
        let slack = 1e-12;
        let each = self.modes.iter().all(|m| m.c.ln_abs() + m.stage as f64 * m.xi.ln_norm() <= slack * (1.0 + m.c.ln_abs().abs()));
        let tail: Vec<f64> = self
            .modes
            .iter()
            .filter(|m| m.stage > 10)
            .map(|m| m.c.ln_abs() + 10.0 * m.xi.ln_norm())
            .collect();
        each && tail.windows(2).all(|w| w[1] < w[0])
    }

    pub fn dim(&self) -> Option<usize> {
        self.modes.first().map(|m| m.xi.dim())
    }
}

/// Modes `±ξ^(k)`, `k ≤ K`, with `c = |ξ^(k)|^{-k}`.
pub fn build_boundary_data(cert: &DirectionCertificate, k: usize) -> Result<BoundaryData> {
    if k == 0 || k + 1 > cert.stages.len() {
        return Err(Error::Argument(format!("K = {k} needs {} stages, certificate has {}", k + 1, cert.stages.len())));
    }
    let modes = (1..=k)
        .map(|j| {
            let xi = cert.stages[j - 1].clone();
            let c = LogValue::from_ln(-(j as f64) * xi.ln_norm());
            Mode { xi, stage: j, c }
        })
        .collect();
    BoundaryData::new(modes)
}

/// Per-mode quantities relative to a fixed normal.
#[derive(Clone, Debug)]
struct ModeGeometry {
    gap_sq: BigRational,
    gap: LogValue,
    /// `Nᵀξ = NᵀP_{n⊥}ξ` in the frame's tangential coordinates.
    tangential: Vec<LogValue>,
    /// `P_{n⊥}ξ` in ambient coordinates.
    projected: Vec<LogValue>,
}

/// Boundary data together with the generator of the normal `n`.
#[derive(Clone, Debug)]
pub struct Halfspace {
    data: BoundaryData,
    generator: IntVector,
    frame: OrthonormalFrame,
    geometry: Vec<ModeGeometry>,
}

impl Halfspace {
    pub fn new(data: BoundaryData, generator: &IntVector) -> Result<Self> {
        data.check()?;
        if generator.is_zero() {
            return Err(Error::Argument("zero normal generator".into()));
        }
        if data.dim().is_some_and(|d| d != generator.dim()) {
            return Err(Error::Argument("dimension mismatch between data and normal".into()));
        }
        let frame = complete_frame(generator)?;
        let nb = BigInt::from_biguint(num_bigint::Sign::Plus, generator.norm_sq());
        let n_mat = frame.tangential();
        let geometry = data
            .modes
            .iter()
            .map(|m| {
                let gap_sq = projection_gap_sq(generator, &m.xi)?;
                let dot = generator.dot(&m.xi);
                // (P⊥ξ)_i = (ξ_i|b|² − (ξ·b) b_i)/|b|²
                let projected: Vec<LogValue> = m
                    .xi
                    .coords()
                    .iter()
                    .zip(generator.coords())
                    .map(|(x, b)| LogValue::from_ratio(&BigRational::new_raw(x * &nb - &dot * b, nb.clone())))
                    .collect();
                let tangential = (0..n_mat.ncols())
                    .map(|j| LogValue::sum(projected.iter().enumerate().map(|(i, p)| *p * n_mat[(i, j)])))
                    .collect();
                Ok(ModeGeometry { gap: LogValue::from_ratio(&gap_sq).sqrt(), gap_sq, tangential, projected })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Halfspace { data, generator: generator.clone(), frame, geometry })
    }

    /// Uses the final certificate stage as the normal.
    pub fn from_certificate(data: BoundaryData, cert: &DirectionCertificate) -> Result<Self> {
        Self::new(data, cert.normal_generator())
    }

    pub fn data(&self) -> &BoundaryData {
        &self.data
    }

    pub fn generator(&self) -> &IntVector {
        &self.generator
    }

    pub fn frame(&self) -> &OrthonormalFrame {
        &self.frame
    }

    /// `|Nᵀξ|` for each mode.
    pub fn gaps(&self) -> Vec<LogValue> {
        self.geometry.iter().map(|g| g.gap).collect()
    }

    pub fn gap_sq(&self, i: usize) -> &BigRational {
        &self.geometry[i].gap_sq
    }

    /// `ln e^{−a·g·t}`, floored so that logs stay finite.
    fn ln_damping(a: f64, g: LogValue, t: LogValue) -> f64 {
        (-(g * t * a).to_f64()).max(LN_FLOOR)
    }

    /// `V(θ, t) = Σ 2c_k e^{−2πg_k t} cos(2πξ^(k)·θ)`; phases are exact.
    pub fn eval_v(&self, theta: &[f64], t: LogValue) -> LogValue {
        LogValue::sum(self.data.modes.iter().zip(&self.geometry).map(|(m, g)| {
            let phase = frac_dot(&m.xi, theta, None);
            let ln = LN_2 + m.c.ln_abs() + Self::ln_damping(2.0 * PI, g.gap, t);
            LogValue::from_ln(ln) * ((2.0 * PI * phase).cos() * f64::from(m.c.sign()))
        }))
    }

    /// `S(t) = Σ 2c_k² e^{−4πg_k t}`.
    pub fn eval_s(&self, t: LogValue) -> LogValue {
        LogValue::sum(
            self.data
                .modes
                .iter()
                .zip(&self.geometry)
                .map(|(m, g)| LogValue::from_ln(LN_2 + 2.0 * m.c.ln_abs() + Self::ln_damping(4.0 * PI, g.gap, t))),
        )
    }

    /// `v(y′ + λn)` for tangential `y′`, through `ξ·Nz′ = (Nᵀξ)·z′`, `z′ = Nᵀy′`.
    pub fn eval_solution(&self, y_tan: &[f64], lambda: LogValue) -> Result<LogValue> {
        let n = self.frame.normal();
        let norm: f64 = y_tan.iter().map(|x| x * x).sum::<f64>().sqrt();
        let dot: f64 = y_tan.iter().zip(n.iter()).map(|(a, b)| a * b).sum();
        if dot.abs() > 1e-12 * norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Argument(format!("y' is not tangential: y'·n = {dot:e}")));
        }
        let z = self.frame.tangential_coords(y_tan);
        Ok(LogValue::sum(self.data.modes.iter().zip(&self.geometry).map(|(m, g)| {
            let phase: f64 = g.tangential.iter().zip(z.iter()).map(|(a, &b)| a.to_f64() * b).sum();
            let ln = LN_2 + m.c.ln_abs() + Self::ln_damping(2.0 * PI, g.gap, lambda);
            LogValue::from_ln(ln) * ((2.0 * PI * phase).cos() * f64::from(m.c.sign()))
        })))
    }

    /// Ambient evaluation `v(y) = Σ 2c e^{−2πg(y·n)} cos(2π(P⊥ξ)·y)`, valid for
    /// moderate frequencies only.
    pub fn eval_ambient(&self, y: &[f64]) -> f64 {
        let n = self.frame.normal();
        let h: f64 = y.iter().zip(n.iter()).map(|(a, b)| a * b).sum();
        self.data
            .modes
            .iter()
            .zip(&self.geometry)
            .map(|(m, g)| {
                let phase: f64 = g.projected.iter().zip(y).map(|(p, &x)| p.to_f64() * x).sum();
                2.0 * m.c.to_f64() * (-2.0 * PI * g.gap.to_f64() * h).exp() * (2.0 * PI * phase).cos()
            })
            .sum()
    }

    /// Drops leading modes until `|Nᵀξ| ≤ 1/(8R)` for every remaining one.
    pub fn trim_for_radius(&self, r: f64) -> Result<Halfspace> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Argument(format!("radius must be positive, got {r}")));
        }
        let rr = BigRational::from_float(r).expect("finite radius");
        let limit = BigRational::from_integer(BigInt::from(1)) / (BigRational::from_integer(BigInt::from(64)) * &rr * &rr);
        let ok: Vec<bool> = self.geometry.iter().map(|g| g.gap_sq <= limit).collect();
        let first = (0..=ok.len()).find(|&i| ok[i..].iter().all(|&b| b)).unwrap_or(ok.len());
        if first == ok.len() {
            return Err(Error::EmptySpectrum);
        }
        Ok(Halfspace {
            data: BoundaryData { modes: self.data.modes[first..].to_vec(), symmetric: true },
            generator: self.generator.clone(),
            frame: self.frame.clone(),
            geometry: self.geometry[first..].to_vec(),
        })
    }

    /// Largest `8R|Nᵀξ|` over the modes, for `R` as given.
    pub fn max_phase_product(&self, r: f64) -> f64 {
        self.geometry.iter().map(|g| (g.gap * (8.0 * r)).to_f64()).fold(0.0, f64::max)
    }

    /// Central-difference Laplacian of [`Self::eval_ambient`] at each sample,
    /// together with its truncation-plus-roundoff envelope.
    pub fn harmonicity_residual(&self, samples: &[Vec<f64>], h: f64) -> Result<Residual> {
        let n = self.frame.normal();
        let d = self.frame.dim();
        let rows: Vec<(f64, f64)> = samples
            .par_iter()
            .map(|y| {
                let height: f64 = y.iter().zip(n.iter()).map(|(a, b)| a * b).sum();
                if height < 2.0 * h {
                    return Err(Error::Argument(format!("sample at height {height} is closer than 2h to the boundary")));
                }
                let centre = self.eval_ambient(y);
                let mut lap = -2.0 * d as f64 * centre;
                let mut p = y.clone();
                for i in 0..d {
                    p[i] = y[i] + h;
                    lap += self.eval_ambient(&p);
                    p[i] = y[i] - h;
                    lap += self.eval_ambient(&p);
                    p[i] = y[i];
                }
                let resid = (lap / (h * h)).abs();
                // |∂_i⁴| of one mode ≤ 2c(2πg)⁴(|n_i| + |u_i|)⁴ ≤ 4·2c(2πg)⁴ e^{−2πg(y·n − h)}
                let mut trunc = 0.0;
                let mut scale = 0.0;
                for (m, g) in self.data.modes.iter().zip(&self.geometry) {
                    let gg = g.gap.to_f64();
                    let amp = 2.0 * m.c.to_f64().abs() * (-2.0 * PI * gg * (height - h)).exp();
                    trunc += amp * (2.0 * PI * gg).powi(4);
                    scale += amp;
                }
                let envelope = d as f64 * h * h / 3.0 * trunc + 8.0 * (2 * d + 1) as f64 * f64::EPSILON * scale / (h * h);
                Ok((resid, envelope))
            })
            .collect::<Result<Vec<_>>>()?;
        let max_residual = rows.iter().map(|r| r.0).fold(0.0, f64::max);
        let envelope = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        let within = rows.iter().all(|(r, e)| r <= e);
        Ok(Residual { max_residual, envelope, within })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residual {
    pub max_residual: f64,
    pub envelope: f64,
    pub within: bool,
}

/// `t_k = ω⁻¹(e⁻¹|ξ^(k)|^{-2k})`.
pub fn schedule_tk(omega: &Modulus, xi: &IntVector, k: usize) -> Result<LogValue> {
    let target = LogValue::from_ln(-1.0 - 2.0 * k as f64 * xi.ln_norm());
    omega.invert(target)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleRow {
    pub k: usize,
    pub ln_t: f64,
    pub ln_s: f64,
    pub ln_omega: f64,
    /// `ln S(t_k) − ln ω(t_k)`
    pub margin: f64,
    /// `−4π·min(ω₁(|ξ|), |Nᵀξ|)·t_k − 2k ln|ξ| − ln ω(t_k)`
    pub analytic_margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleCertificate {
    pub omega: Modulus,
    pub rows: Vec<ScheduleRow>,
    pub passed: bool,
}

impl ScheduleCertificate {
    pub fn t_k(&self) -> Vec<LogValue> {
        self.rows.iter().map(|r| LogValue::from_ln(r.ln_t)).collect()
    }
}

/// Evaluates `S(t_k) ≥ ω(t_k)` for each mode. `omega1`, when present, is the
/// modulus the direction was built with and enters the analytic check.
pub fn certify_slow_convergence(hs: &Halfspace, omega: &Modulus, omega1: Option<&Modulus>) -> Result<ScheduleCertificate> {
    let mut rows = Vec::with_capacity(hs.data.modes.len());
    for (m, g) in hs.data.modes.iter().zip(&hs.geometry) {
        let k = m.stage;
        let t = schedule_tk(omega, &m.xi, k)?;
        let ln_s = hs.eval_s(t).ln();
        let ln_omega = omega.eval(t)?.ln();
        let mut rate = g.gap;
        if let Some(w1) = omega1 {
            if let Ok(v) = w1.eval_stage(LogValue::from_ln(m.xi.ln_norm()), Some(k)) {
                rate = rate.min(v);
            }
        }
        let analytic = -(rate * t * (4.0 * PI)).to_f64() - 2.0 * k as f64 * m.xi.ln_norm() - ln_omega;
        let margin = ln_s - ln_omega;
        let tol = MARGIN_SLACK * (1.0 + ln_omega.abs());
        rows.push(ScheduleRow {
            k,
            ln_t: t.ln(),
            ln_s,
            ln_omega,
            margin,
            analytic_margin: analytic,
            pass: margin >= -tol && analytic >= -tol,
        });
    }
    let increasing = rows.windows(2).all(|w| w[1].ln_t > w[0].ln_t);
    let passed = increasing && rows.iter().all(|r| r.pass);
    Ok(ScheduleCertificate { omega: omega.clone(), rows, passed })
}

/// `(ln t, ln S(t))` on a log-spaced grid of `t`.
pub fn decay_curve(hs: &Halfspace, ln_t_min: f64, ln_t_max: f64, points: usize) -> Vec<(f64, f64)> {
    let points = points.max(2);
    (0..points)
        .map(|i| {
            let lt = ln_t_min + (ln_t_max - ln_t_min) * i as f64 / (points - 1) as f64;
            (lt, hs.eval_s(LogValue::from_ln(lt)).ln())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::construct_bad_direction;
    use crate::modulus::Indexing;
    use proptest::prelude::*;

    fn small_model() -> Halfspace {
        // generator (1,2) with gaps² 4/5 and 1/5: moderate frequencies
        let modes = vec![
            Mode { xi: IntVector::from_i64(&[1, 0]), stage: 1, c: LogValue::ONE },
            Mode { xi: IntVector::from_i64(&[0, 1]), stage: 1, c: LogValue::from_f64(0.5) },
        ];
        Halfspace::new(BoundaryData::new(modes).unwrap(), &IntVector::from_i64(&[1, 2])).unwrap()
    }

    fn pipeline_cert(k: usize) -> DirectionCertificate {
        let w1 = Modulus::halfspace_omega1(&Modulus::power(0.5).unwrap(), Indexing::ByStage).unwrap();
        construct_bad_direction(&w1, k, &IntVector::from_i64(&[1, 0]), 10, &BigRational::new(1.into(), 2.into())).unwrap()
    }

    #[test]
    fn boundary_data_from_certificate() {
        let cert = pipeline_cert(2);
        let data = build_boundary_data(&cert, 2).unwrap();
        assert_eq!(data.modes[0].c, LogValue::ONE);
        assert!(data.decay_proxy_holds());
        assert!(build_boundary_data(&cert, 3).is_err());
    }

    #[test]
    fn v_at_origin_and_infinity() {
        let hs = small_model();
        let v0 = hs.eval_v(&[0.0, 0.0], LogValue::ZERO).to_f64();
        assert!((v0 - 3.0).abs() < 1e-15);
        let far = hs.eval_v(&[0.3, 0.1], LogValue::from_f64(1e6));
        assert!(far.ln_abs() < -1e6);
    }

    #[test]
    fn single_mode_is_exact() {
        let data = BoundaryData::new(vec![Mode { xi: IntVector::from_i64(&[2, 1]), stage: 1, c: LogValue::from_f64(0.25) }]).unwrap();
        let hs = Halfspace::new(data, &IntVector::from_i64(&[1, 1])).unwrap();
        let g = (0.5f64).sqrt(); // |(2,1) − (3/2)(1,1)|
        let (th, t) = ([0.17, -0.4], 0.3);
        let expect = 0.5 * (-2.0 * PI * g * t).exp() * (2.0 * PI * (2.0 * th[0] + th[1])).cos();
        assert!((hs.eval_v(&th, LogValue::from_f64(t)).to_f64() - expect).abs() < 1e-14);
        let s = hs.eval_s(LogValue::from_f64(t)).to_f64();
        assert!((s - 2.0 * 0.0625 * (-4.0 * PI * g * t).exp()).abs() < 1e-15);
    }

    #[test]
    fn s_at_zero_and_monotone() {
        let cert = pipeline_cert(2);
        let hs = Halfspace::from_certificate(build_boundary_data(&cert, 2).unwrap(), &cert).unwrap();
        let expect = LogValue::sum(hs.data().modes.iter().map(|m| LogValue::from_ln(LN_2 - 2.0 * m.stage as f64 * m.xi.ln_norm())));
        assert!(hs.eval_s(LogValue::ZERO).log_distance(&expect) < 1e-12);
        let mut prev = hs.eval_s(LogValue::ZERO);
        for i in 1..40 {
            let cur = hs.eval_s(LogValue::from_ln(i as f64));
            assert!(cur <= prev);
            prev = cur;
        }
    }

    #[test]
    fn schedule_closed_form() {
        let w = Modulus::power(1.0).unwrap();
        let xi = IntVector::from_i64(&[3, 4]);
        let t = schedule_tk(&w, &xi, 2).unwrap();
        // t = e·|ξ|^{2k} = e·5⁴
        assert!((t.ln() - (1.0 + 4.0 * 5f64.ln())).abs() < 1e-12);
        let back = w.eval(t).unwrap().ln() + 1.0 + 4.0 * 5f64.ln();
        assert!(back.abs() < 1e-12);
    }

    #[test]
    fn pipeline_certificate_and_mismatch() {
        let cert = pipeline_cert(3);
        let omega = Modulus::power(0.5).unwrap();
        let data = build_boundary_data(&cert, 3).unwrap();
        let hs = Halfspace::from_certificate(data.clone(), &cert).unwrap();
        let sc = certify_slow_convergence(&hs, &omega, Some(&cert.omega1)).unwrap();
        assert!(sc.passed, "{sc:?}");
        assert!(sc.rows.iter().all(|r| r.margin > 0.0));
        let wrong = Halfspace::new(data, &IntVector::from_i64(&[0, 1])).unwrap();
        let bad = certify_slow_convergence(&wrong, &omega, None).unwrap();
        assert!(!bad.passed);
        assert!(bad.rows.last().unwrap().margin < 0.0);
    }

    #[test]
    fn zero_gap_mode_never_decays() {
        let data = BoundaryData::new(vec![Mode { xi: IntVector::from_i64(&[2, 2]), stage: 1, c: LogValue::from_f64(0.3) }]).unwrap();
        let hs = Halfspace::new(data, &IntVector::from_i64(&[1, 1])).unwrap();
        let omega = Modulus::power(0.5).unwrap();
        let s0 = hs.eval_s(LogValue::ZERO);
        assert_eq!(hs.eval_s(LogValue::from_f64(1e30)), s0);
        let sc = certify_slow_convergence(&hs, &omega, None).unwrap();
        assert!(sc.rows[0].margin > 0.0);
    }

    #[test]
    fn solution_matches_v_at_mapped_point() {
        let hs = small_model();
        let n = hs.frame().normal();
        let t = hs.frame().tangential();
        for &s in &[0.0, 0.37, -1.2] {
            let y: Vec<f64> = (0..2).map(|i| s * t[(i, 0)]).collect();
            let theta = y.clone();
            let lam = LogValue::from_f64(0.2);
            let a = hs.eval_solution(&y, lam).unwrap().to_f64();
            let b = hs.eval_v(&theta, lam).to_f64();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            let amb: Vec<f64> = (0..2).map(|i| y[i] + 0.2 * n[i]).collect();
            assert!((hs.eval_ambient(&amb) - a).abs() < 1e-12);
        }
        assert!(hs.eval_solution(&[n[0], n[1]], LogValue::ONE).is_err());
        let origin = hs.eval_solution(&[0.0, 0.0], LogValue::from_f64(0.1)).unwrap().to_f64();
        let expect: f64 = hs.gaps().iter().zip(&hs.data().modes).map(|(g, m)| 2.0 * m.c.to_f64() * (-2.0 * PI * g.to_f64() * 0.1).exp()).sum();
        assert!((origin - expect).abs() < 1e-14);
    }

    #[test]
    fn trimming() {
        let hs = small_model();
        let same = hs.trim_for_radius(0.05).unwrap();
        assert_eq!(same.data().modes.len(), 2);
        assert!(same.max_phase_product(0.05) <= 1.0);
        let cut = hs.trim_for_radius(0.25).unwrap();
        // gap² 1/5 ≤ 1/4 keeps (0,1); gap² 4/5 drops (1,0)
        assert_eq!(cut.data().modes.len(), 1);
        assert!(cut.max_phase_product(0.25) <= 1.0);
        assert!(matches!(hs.trim_for_radius(10.0), Err(Error::EmptySpectrum)));
    }

    #[test]
    fn harmonicity_and_richardson() {
        let hs = small_model();
        let n = hs.frame().normal();
        let samples: Vec<Vec<f64>> =
            [(0.1, 0.5), (0.7, 0.2), (-0.3, 1.0)].iter().map(|&(a, b)| vec![a + b * n[0], -a * 0.5 + b * n[1]]).collect();
        let r1 = hs.harmonicity_residual(&samples, 1e-3).unwrap();
        let r2 = hs.harmonicity_residual(&samples, 5e-4).unwrap();
        assert!(r1.within && r2.within);
        let ratio = r1.max_residual / r2.max_residual;
        assert!((3.2..=4.8).contains(&ratio), "ratio {ratio}");
    }

    proptest! {
        #[test]
        fn s_never_increases(a in 0.0f64..20.0, b in 0.0f64..20.0) {
            let hs = small_model();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assert!(hs.eval_s(LogValue::from_f64(hi)) <= hs.eval_s(LogValue::from_f64(lo)));
        }

        #[test]
        fn trimmed_cosines_stay_above_root_half(x in -1.0f64..1.0) {
            let cert = pipeline_cert(2);
            let hs = Halfspace::from_certificate(build_boundary_data(&cert, 2).unwrap(), &cert).unwrap();
            let tr = hs.trim_for_radius(1.0).unwrap();
            let t = tr.frame().tangential();
            let y = [x * t[(0, 0)], x * t[(1, 0)]];
            let z = tr.frame().tangential_coords(&y);
            for g in &tr.geometry {
                let phase: f64 = g.tangential.iter().zip(z.iter()).map(|(a, &b)| a.to_f64() * b).sum();
                prop_assert!((2.0 * PI * phase).cos() >= 0.5f64.sqrt() - 1e-15);
            }
        }
    }
}
