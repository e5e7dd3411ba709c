//! Slow convergence for a family of boundary profiles: the constants
//! `τ₀, A₀, ε₀, δ₀, ϱ`, the `λ_k` schedule and per-stage margins for signed,
//! uniform and shifted spectra. Profiles are one-dimensional, so `d = 2`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{frac_dot, ratio_str, ratio_vec_str, DirectionCertificate, IntVector};
use crate::logvalue::LogValue;
use crate::modulus::Modulus;
use crate::profile::{Profile, Support, FILON_LIMIT};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RepSummary {
    pub name: String,
    pub integral: f64,
    pub integral_error: f64,
    pub l1_norm: f64,
    pub grad_l1: f64,
    /// `∫_{|x|≤A₀} F`
    pub window_integral: f64,
    /// Upper bound for `∫_{|x|≥A₀} |F|`.
    pub tail_mass: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyConstants {
    pub tau0: f64,
    pub eps0: f64,
    pub a0: f64,
    pub delta0: f64,
    #[serde(with = "ratio_str")]
    pub rho: BigRational,
    pub sup_l1: f64,
    pub sup_grad_l1: f64,
    pub reps: Vec<RepSummary>,
}

impl FamilyConstants {
    pub fn rho_f64(&self) -> f64 {
        self.rho.to_f64().unwrap_or(f64::NAN)
    }

    /// `2 sup‖F‖₁ ϱ/(1−ϱ) < (3/16)τ₀`
    pub fn rho_condition(&self) -> bool {
        let r = self.rho_f64();
        2.0 * self.sup_l1 * r / (1.0 - r) < 3.0 / 16.0 * self.tau0
    }
}

const MAX_A0_DOUBLINGS: u32 = 60;

/// Certified family constants for finitely many representatives.
pub fn compute_family_constants(reps: &[Profile]) -> Result<FamilyConstants> {
    if reps.is_empty() {
        return Err(Error::Argument("the family needs at least one representative".into()));
    }
    let mut tau0 = f64::INFINITY;
    for p in reps {
        let (i, err) = p.integral();
        let lower = i.abs() - err;
        if !(lower > 1e-12 * p.l1_norm()) || lower <= 0.0 {
            return Err(Error::DegenerateProfile(p.name()));
        }
        tau0 = tau0.min(lower);
    }
    let mut a0 = None;
    for j in 0..MAX_A0_DOUBLINGS {
        let a = 2f64.powi(j as i32);
        let ok = reps.iter().all(|p| {
            let (w, werr) = p.window_integral(a);
            let (i, ierr) = p.integral();
            w.abs() - werr >= 2.0 * p.tail_mass(a) + 0.5 * (i.abs() + ierr)
        });
        if ok {
            a0 = Some(a);
            break;
        }
    }
    let a0 = a0.ok_or_else(|| Error::Argument("no A₀ on the doubling grid satisfies the window inequality".into()))?;
    let mut eps0 = f64::INFINITY;
    let mut summaries = Vec::with_capacity(reps.len());
    for p in reps {
        let (w, werr) = p.window_integral(a0);
        let (i, ierr) = p.integral();
        eps0 = eps0.min(((w.abs() - werr) / p.l1_norm()).min(1.0));
        summaries.push(RepSummary {
            name: p.name(),
            integral: i,
            integral_error: ierr,
            l1_norm: p.l1_norm(),
            grad_l1: p.grad_l1(),
            window_integral: w,
            tail_mass: p.tail_mass(a0),
        });
    }
    let delta0 = (1.0 - eps0 / 4.0).acos();
    let sup_l1 = reps.iter().map(Profile::l1_norm).fold(0.0, f64::max);
    let sup_grad_l1 = reps.iter().map(Profile::grad_l1).fold(0.0, f64::max);
    let r = 3.0 * tau0 / (32.0 * sup_l1);
    let rho = dyadic_below(0.5 * r / (1.0 + r));
    let constants = FamilyConstants { tau0, eps0, a0, delta0, rho, sup_l1, sup_grad_l1, reps: summaries };
    debug_assert!(constants.rho_condition());
    Ok(constants)
}

/// Largest `m/2^20` not above `x`, or a finer dyadic when `x < 2^-20`.
fn dyadic_below(x: f64) -> BigRational {
    let mut bits = 20;
    loop {
        let m = (x * 2f64.powi(bits)).floor();
        if m >= 1.0 || bits > 1000 {
            return BigRational::new(BigInt::from(m as u64), BigInt::one() << bits as usize);
        }
        bits += 20;
    }
}

/// `Nᵀξ` for `d = 2` in the chart `z ↦ z·(−b₂, b₁)/|b|`.
pub fn tangential_coordinate(normal: &IntVector, xi: &IntVector) -> Result<LogValue> {
    if normal.dim() != 2 || xi.dim() != 2 {
        return Err(Error::Unsupported("profile families are one-dimensional; only d = 2 is supported".into()));
    }
    let (b, x) = (normal.coords(), xi.coords());
    let cross = &x[1] * &b[0] - &x[0] * &b[1];
    Ok(LogValue::from_bigint(&cross) / LogValue::from_biguint(&normal.norm_sq()).sqrt())
}

fn three_eighths_tau(tau0: f64) -> LogValue {
    LogValue::from_f64(0.375 * tau0)
}

/// `λ_k = ω⁻¹((3/8)τ₀|ξ^(k)|^{-k})`.
pub fn schedule_lambda(omega: &Modulus, tau0: f64, cert: &DirectionCertificate, k: usize) -> Result<LogValue> {
    if k == 0 || k > cert.k() {
        return Err(Error::Argument(format!("stage {k} outside 1..={}", cert.k())));
    }
    let target = three_eighths_tau(tau0) * LogValue::from_ln(-(k as f64) * cert.stages[k - 1].ln_norm());
    omega.invert(target)
}

/// `2πλA₀|Nᵀξ^(k)|`
pub fn phase_product(constants: &FamilyConstants, cert: &DirectionCertificate, k: usize, lambda: LogValue) -> Result<LogValue> {
    let g = tangential_coordinate(cert.normal_generator(), &cert.stages[k - 1])?;
    Ok(lambda * g.abs() * (2.0 * PI * constants.a0))
}

/// Exact rational stand-in for `λ`, used for phases modulo one.
pub fn lambda_rational(lambda: LogValue) -> BigRational {
    lambda.rational_below(1e-15)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumMode {
    pub xi: IntVector,
    pub stage: usize,
    /// Magnitude `|c_ξ|`.
    pub c: LogValue,
    /// `±1`
    pub sign: i8,
    /// Phase of `c_ξ` in turns; `c_{−ξ}` carries the opposite phase.
    pub phase: f64,
}

impl SpectrumMode {
    fn coefficient_turns(&self) -> f64 {
        self.phase + if self.sign < 0 { 0.5 } else { 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignedSpectrum {
    pub modes: Vec<SpectrumMode>,
    /// Shift point `X₀` and the rational `λ_m` used for its phases.
    #[serde(default)]
    pub x0: Option<Vec<f64>>,
    #[serde(default, with = "ratio_vec_str")]
    pub lambdas: Vec<BigRational>,
}

impl SignedSpectrum {
    /// Stage indices `i_k`.
    pub fn indices(&self) -> Vec<usize> {
        self.modes.iter().map(|m| m.stage).collect()
    }

    pub fn magnitudes(&self) -> Vec<LogValue> {
        self.modes.iter().map(|m| m.c).collect()
    }

    fn eval_turns(&self, m: usize, row: usize) -> f64 {
        match &self.x0 {
            Some(x0) => frac_dot(&self.modes[m].xi, x0, Some(&self.lambdas[row])),
            None => 0.0,
        }
    }
}

fn stage_mode(cert: &DirectionCertificate, s: usize) -> SpectrumMode {
    let xi = cert.stages[s - 1].clone();
    let c = LogValue::from_ln(-(s as f64) * xi.ln_norm());
    SpectrumMode { xi, stage: s, c, sign: 1, phase: 0.0 }
}

/// Multiplies `c_{ξ^(m)}` by `e^{−2πiλ_mξ^(m)·X₀}` (and conjugates on `−ξ`).
pub fn build_shifted_v0(spectrum: &SignedSpectrum, x0: &[f64], lambdas: &[BigRational]) -> Result<SignedSpectrum> {
    if spectrum.x0.is_some() {
        return Err(Error::Argument("spectrum is already shifted".into()));
    }
    if lambdas.len() != spectrum.modes.len() {
        return Err(Error::Argument(format!("{} λ values for {} modes", lambdas.len(), spectrum.modes.len())));
    }
    if spectrum.modes.iter().any(|m| m.xi.dim() != x0.len()) {
        return Err(Error::Argument("X₀ has the wrong dimension".into()));
    }
    if x0.iter().all(|&x| x == 0.0) {
        return Ok(spectrum.clone());
    }
    let modes = spectrum
        .modes
        .iter()
        .zip(lambdas)
        .map(|(m, l)| SpectrumMode { phase: (m.phase - frac_dot(&m.xi, x0, Some(l))).rem_euclid(1.0), ..m.clone() })
        .collect();
    Ok(SignedSpectrum { modes, x0: Some(x0.to_vec()), lambdas: lambdas.to_vec() })
}

/// Positive spectrum on a subsequence `i₁ = 1 < i₂ < …` of the stages, each
/// chosen minimal so that the cross terms it receives stay below
/// `(3/16)τ₀|ξ^(i_k)|^{-i_k}` by the integration-by-parts bound.
pub fn build_uniform_v0(
    reps: &[Profile],
    cert: &DirectionCertificate,
    omega: &Modulus,
    constants: &FamilyConstants,
    modes: usize,
) -> Result<SignedSpectrum> {
    if reps.iter().any(|p| !(p.grad_l1().is_finite())) {
        return Err(Error::Argument("every representative needs a finite gradient norm".into()));
    }
    if !omega.t_omega_diverges() {
        return Err(Error::Argument("t·ω(t) must diverge for the uniform construction".into()));
    }
    if modes == 0 || cert.k() == 0 {
        return Err(Error::Argument("need at least one mode and one stage".into()));
    }
    let grad = reps.iter().map(Profile::grad_l1).fold(0.0, f64::max);
    let mut chosen = vec![stage_mode(cert, 1)];
    let mut gaps = vec![tangential_coordinate(cert.normal_generator(), &cert.stages[0])?.abs()];
    let mut s = 1;
    while chosen.len() < modes {
        s += 1;
        if s > cert.k() {
            return Err(Error::SearchExhausted {
                stage: chosen.len() + 1,
                detail: format!("stages ran out after i = {:?}", chosen.iter().map(|m| m.stage).collect::<Vec<_>>()),
            });
        }
        let cand = stage_mode(cert, s);
        let lambda = schedule_lambda(omega, constants.tau0, cert, s)?;
        // a zero gap gives no decay at all and rules the candidate out
        let fits = gaps.iter().all(|g| !g.is_zero()) && {
            let cross = LogValue::sum(chosen.iter().zip(&gaps).map(|(m, g)| m.c * LogValue::from_f64(grad / PI) / (lambda * *g)));
            cross <= cand.c * (3.0 / 16.0 * constants.tau0)
        };
        if fits {
            gaps.push(tangential_coordinate(cert.normal_generator(), &cand.xi)?.abs());
            chosen.push(cand);
        }
    }
    Ok(SignedSpectrum { modes: chosen, x0: None, lambdas: Vec::new() })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// How the spectrum of `v₀` is obtained.
#[derive(Clone, Debug)]
pub enum SpectrumPolicy<'a> {
    /// Stages `1..=K`, signs picked one by one to enlarge the running sum.
    Signed,
    /// A given spectrum; cross terms are bounded mode by mode in absolute value.
    Fixed(&'a SignedSpectrum),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub k: usize,
    pub lambda: LogValue,
    pub phase_product: LogValue,
    pub phase_ok: bool,
    /// `2|c_k||Re I_k(λ_k)|`
    pub main: LogValue,
    /// `|Re I_k| ≥ (3/8)τ₀` within quadrature error.
    pub main_floor_ok: bool,
    pub sigma1_center: LogValue,
    pub sigma1_bound: LogValue,
    pub sigma2_bound: LogValue,
    /// Finite sum of the later modes' magnitudes, for comparison.
    pub sigma2_brute: LogValue,
    pub omega_lambda: LogValue,
    pub quad_error: LogValue,
    pub sign: i8,
    pub margin: LogValue,
    /// `margin / ω(λ_k)`
    pub margin_ratio: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub profile: Profile,
    pub rows: Vec<FamilyRow>,
    pub spectrum: SignedSpectrum,
    pub verdict: Verdict,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

/// One contribution `2|c_m| Re(e^{2πiψ} I_m)` together with its uncertainty.
struct Term {
    center: LogValue,
    uncertainty: LogValue,
    magnitude: LogValue,
    from_quadrature: bool,
}

fn cross_term(profile: &Profile, c: LogValue, turns: f64, phi: LogValue, lambda: LogValue, gap: LogValue) -> Term {
    let two_c = c * 2.0;
    let mut ibp = if phi.is_zero() {
        LogValue::from_f64(profile.l1_norm())
    } else {
        (LogValue::from_f64(profile.grad_l1() / (2.0 * PI)) / phi.abs()).min(LogValue::from_f64(profile.l1_norm()))
    };
    if let Support::Ball { .. } = profile.support() {
        if let Ok(b) = compact_support_crossterm_bound(profile, gap, lambda) {
            ibp = ibp.min(b);
        }
    }
    let quad = if phi.abs() <= LogValue::from_f64(FILON_LIMIT) { profile.transform(phi.to_f64()) } else { None };
    match quad {
        Some(r) if LogValue::from_f64(r.error) < ibp => {
            let rot = r.value * Complex64::from_polar(1.0, 2.0 * PI * turns);
            Term {
                center: two_c * rot.re,
                uncertainty: two_c * r.error,
                magnitude: two_c * (r.value.norm() + r.error),
                from_quadrature: true,
            }
        }
        _ => Term { center: LogValue::ZERO, uncertainty: two_c * ibp, magnitude: two_c * ibp, from_quadrature: false },
    }
}

fn verdict_of(margin: LogValue, quad_error: LogValue) -> Verdict {
    if quad_error * 2.0 >= margin.abs() {
        Verdict::Inconclusive
    } else if margin.sign() >= 0 {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

/// Margins `|∫F(x)v₀(λ_k N x)dx| − ω(λ_k)` at each stage of the spectrum.
pub fn certify_family_slow(
    profile: &Profile,
    cert: &DirectionCertificate,
    omega: &Modulus,
    constants: &FamilyConstants,
    k: usize,
    policy: SpectrumPolicy<'_>,
) -> Result<FamilyReport> {
    let mut spectrum = match policy {
        SpectrumPolicy::Signed => {
            if k == 0 || k > cert.k() {
                return Err(Error::Argument(format!("K = {k} needs {} stages, certificate has {}", k + 1, cert.stages.len())));
            }
            SignedSpectrum { modes: (1..=k).map(|s| stage_mode(cert, s)).collect(), x0: None, lambdas: Vec::new() }
        }
        SpectrumPolicy::Fixed(sp) => sp.clone(),
    };
    let signed = matches!(policy, SpectrumPolicy::Signed);
    let normal = cert.normal_generator();
    let gaps = spectrum.modes.iter().map(|m| tangential_coordinate(normal, &m.xi)).collect::<Result<Vec<_>>>()?;
    let rho = cert.rho.to_f64().unwrap_or(1.0);
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::Argument("certificate ϱ must lie in (0, 1)".into()));
    }
    let tail_factor = 2.0 * profile.l1_norm() * rho / (1.0 - rho);
    let mut rows = Vec::with_capacity(spectrum.modes.len());
    for j in 0..spectrum.modes.len() {
        let stage = spectrum.modes[j].stage;
        let lambda = schedule_lambda(omega, constants.tau0, cert, stage)?;
        let phase = phase_product(constants, cert, stage, lambda)?;
        let phase_ok = phase.to_f64() <= constants.delta0;
        let omega_lambda = omega.eval(lambda)?;

        let cj = spectrum.modes[j].c;
        let main_phi = lambda * gaps[j];
        let main = match profile.transform(main_phi.to_f64()) {
            Some(r) if main_phi.abs() <= LogValue::from_f64(FILON_LIMIT) => r,
            _ => crate::quadrature::QuadResult { value: Complex64::new(0.0, 0.0), error: profile.l1_norm(), evals: 0 },
        };
        // the shift cancels on the diagonal
        let diag_turns = if spectrum.x0.is_some() { spectrum.modes[j].phase + spectrum.eval_turns(j, j) } else { 0.0 };
        let main_re = (main.value * Complex64::from_polar(1.0, 2.0 * PI * diag_turns)).re;
        let main_mag = cj * (2.0 * main_re.abs());
        let main_err = cj * (2.0 * main.error);
        let main_floor_ok = main_re.abs() - main.error >= 0.375 * constants.tau0;

        let mut s1_center = Vec::new();
        let mut s1_unc = Vec::new();
        let mut s1_abs = Vec::new();
        let mut s2_abs = Vec::new();
        let mut quad_err = vec![main_err];
        for (m, mode) in spectrum.modes.iter().enumerate() {
            if m == j {
                continue;
            }
            let turns = mode.coefficient_turns() + spectrum.eval_turns(m, j);
            let t = cross_term(profile, mode.c, turns, lambda * gaps[m], lambda, gaps[m]);
            if t.from_quadrature {
                quad_err.push(t.uncertainty);
            }
            if m < j {
                s1_center.push(t.center);
                s1_unc.push(t.uncertainty);
                s1_abs.push(t.magnitude);
            } else {
                s2_abs.push(t.magnitude);
            }
        }
        let sigma2_bound = cj * tail_factor;
        let sigma2_brute = LogValue::sum(s2_abs);
        let quad_error = LogValue::sum(quad_err);
        let (sign, sigma1_center, sigma1_bound, lower) = if signed {
            let s = LogValue::sum(s1_center);
            let e = LogValue::sum(s1_unc);
            let b = cj * (2.0 * main_re);
            // ε with ε·b on the side of Σ₁, so |Σ₁ + εb| = |Σ₁| + |b|
            let eps: i8 = if s.sign() == 0 || s.sign() == b.sign() || b.sign() == 0 { 1 } else { -1 };
            let total = s + if eps > 0 { b } else { -b };
            (eps, s, e, total.abs() - e - main_err)
        } else {
            let a = LogValue::sum(s1_abs);
            (spectrum.modes[j].sign, LogValue::ZERO, a, main_mag - main_err - a)
        };
        spectrum.modes[j].sign = sign;
        let margin = lower - sigma2_bound - omega_lambda;
        let mut verdict = verdict_of(margin, quad_error);
        if !phase_ok && verdict == Verdict::Pass {
            verdict = Verdict::Fail;
        }
        rows.push(FamilyRow {
            k: stage,
            lambda,
            phase_product: phase,
            phase_ok,
            main: main_mag,
            main_floor_ok,
            sigma1_center,
            sigma1_bound,
            sigma2_bound,
            sigma2_brute,
            omega_lambda,
            quad_error,
            sign: spectrum.modes[j].sign,
            margin,
            margin_ratio: (margin / omega_lambda).to_f64(),
            verdict,
        });
    }
    let verdict = if rows.iter().any(|r| r.verdict == Verdict::Fail || !r.phase_ok) {
        Verdict::Fail
    } else if rows.iter().any(|r| r.verdict == Verdict::Inconclusive) {
        Verdict::Inconclusive
    } else {
        Verdict::Pass
    };
    Ok(FamilyReport { profile: profile.clone(), rows, spectrum, verdict })
}

/// Upper bound for `|∫F(x)e^{2πiλgx}dx|` when `F` lives on a ball of radius
/// `r`: integrate by parts against a cutoff that falls off over `1/λ` at the
/// edge, and bound the remaining annulus by `‖F‖_∞`.
pub fn compact_support_crossterm_bound(profile: &Profile, gap: LogValue, lambda: LogValue) -> Result<LogValue> {
    let Support::Ball { radius, .. } = profile.support() else {
        return Err(Error::Argument(format!("{profile} does not have compact support")));
    };
    let l1 = LogValue::from_f64(profile.l1_norm());
    if gap.is_zero() || lambda <= LogValue::from_f64(1.0 / radius) {
        return Ok(l1);
    }
    let sup = profile.sup_norm();
    let ibp = LogValue::from_f64((profile.grad_l1() + 2.0 * sup) / (2.0 * PI)) / (lambda * gap.abs());
    let annulus = LogValue::from_f64(2.0 * sup) / lambda;
    Ok((ibp + annulus).min(l1))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylRow {
    pub lambda: f64,
    pub value: f64,
    /// `|v(λ) − c₀(H)∫F|`
    pub deviation: f64,
    pub bound: f64,
    pub quad_error: f64,
    pub within: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeylReport {
    pub rows: Vec<WeylRow>,
    pub mean_term: f64,
}

/// `v(λ) = ∫F(z)H(λNz)dz` for `H = Σ c_ξ e^{2πiξ·θ}` given by its modes.
pub fn weyl_average_test(profile: &Profile, modes: &[(IntVector, Complex64)], normal: &IntVector, lambdas: &[f64]) -> Result<WeylReport> {
    let gaps = modes.iter().map(|(xi, _)| tangential_coordinate(normal, xi)).collect::<Result<Vec<_>>>()?;
    let (integral, _) = profile.integral();
    let c0: Complex64 = modes.iter().filter(|(xi, _)| xi.is_zero()).map(|(_, c)| *c).sum();
    let mean_term = (c0 * integral).re;
    let rows = lambdas
        .iter()
        .map(|&lambda| {
            let mut value = Complex64::new(0.0, 0.0);
            let mut quad_error = 0.0;
            let mut bound = 0.0;
            for ((xi, c), g) in modes.iter().zip(&gaps) {
                let phi = g.to_f64() * lambda;
                let r = profile
                    .transform(phi)
                    .ok_or_else(|| Error::Argument(format!("frequency {phi:e} is beyond quadrature reach")))?;
                value += c * r.value;
                quad_error += c.norm() * r.error;
                if !xi.is_zero() {
                    bound += c.norm() * profile.ibp_bound(phi);
                }
            }
            let deviation = (value - c0 * integral).norm();
            Ok(WeylRow { lambda, value: value.re, deviation, bound, quad_error, within: deviation <= bound + quad_error })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(WeylReport { rows, mean_term })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{construct_bad_direction, ConstructionParams};
    use crate::modulus::Indexing;
    use crate::quadrature::{integrate, Tolerance};
    use proptest::prelude::*;

    fn gaussian_setup(k: usize, gap_base: u32) -> (Profile, FamilyConstants, Modulus, DirectionCertificate) {
        let f = Profile::gaussian(1.0).unwrap();
        let c = compute_family_constants(std::slice::from_ref(&f)).unwrap();
        let omega = Modulus::power(0.25).unwrap();
        let w1 = Modulus::family_omega1(&omega, c.delta0, c.a0, c.tau0, Indexing::ByStage).unwrap();
        let cert = construct_bad_direction(&w1, k, &IntVector::from_i64(&[1, 0]), gap_base, &c.rho).unwrap();
        (f, c, omega, cert)
    }

    #[test]
    fn gaussian_constants() {
        let c = compute_family_constants(&[Profile::gaussian(1.0).unwrap()]).unwrap();
        assert!((c.tau0 - PI.sqrt()).abs() < 1e-12);
        assert_eq!(c.a0, 2.0);
        // independent oracle for the window integral at A₀ = 2
        let w = integrate(|x: f64| (-x * x).exp(), &[-2.0, 0.0, 2.0], Tolerance::default()).value;
        assert!((c.reps[0].window_integral - w).abs() < 1e-12);
        assert!((w - 1.7642).abs() < 1e-4);
        assert!(c.eps0 > 0.0 && c.eps0 <= 1.0);
        assert!(((1.0 - c.delta0.cos()) - c.eps0 / 4.0).abs() < 1e-12);
        assert!(c.rho_condition());
    }

    #[test]
    fn zero_profile_is_rejected() {
        let zero = Profile::gaussian(1.0).unwrap().scaled(0.0).unwrap();
        assert!(matches!(compute_family_constants(&[zero]), Err(Error::DegenerateProfile(_))));
        let odd = Profile::tabulated(vec![(-1.0, 1.0), (1.0, -1.0)]).unwrap();
        assert!(matches!(compute_family_constants(&[Profile::poisson(1.0).unwrap(), odd]), Err(Error::DegenerateProfile(_))));
    }

    #[test]
    fn family_of_several_profiles() {
        let reps = [Profile::gaussian(1.0).unwrap(), Profile::poisson(1.0).unwrap(), Profile::bump(1.5).unwrap()];
        let c = compute_family_constants(&reps).unwrap();
        assert!(c.tau0 <= reps.iter().map(|p| p.integral().0).fold(f64::INFINITY, f64::min));
        assert!(c.a0 >= 4.0, "the Poisson tail needs A₀ ≥ tan(5π/12)");
        assert!(c.rho_condition());
    }

    #[test]
    fn lambda_closed_form() {
        let (_, c, omega, cert) = gaussian_setup(2, 2);
        for k in 1..=2 {
            let l = schedule_lambda(&omega, c.tau0, &cert, k).unwrap();
            let expect = -4.0 * (0.375 * c.tau0).ln() + 4.0 * k as f64 * cert.stages[k - 1].ln_norm();
            assert!((l.ln() - expect).abs() < 1e-9 * (1.0 + expect.abs()));
        }
        let l1 = schedule_lambda(&omega, c.tau0, &cert, 1).unwrap();
        let l2 = schedule_lambda(&omega, c.tau0, &cert, 2).unwrap();
        assert!(l2 > l1);
    }

    #[test]
    fn signed_certificate_k1_and_k2() {
        let (f, c, omega, cert) = gaussian_setup(2, 2);
        let r1 = certify_family_slow(&f, &cert, &omega, &c, 1, SpectrumPolicy::Signed).unwrap();
        assert_eq!(r1.verdict, Verdict::Pass);
        let row = &r1.rows[0];
        // K = 1 lower estimate (3/4 − 3/8)τ₀/|ξ|, here |ξ^(1)| = 1
        assert!(row.margin.to_f64() + row.sigma2_bound.to_f64() >= 0.375 * c.tau0 - 1e-12);
        let r2 = certify_family_slow(&f, &cert, &omega, &c, 2, SpectrumPolicy::Signed).unwrap();
        assert_eq!(r2.verdict, Verdict::Pass, "{r2:#?}");
        assert!(r2.rows.iter().all(|r| r.phase_ok && r.main_floor_ok));
        assert!(r2.rows.iter().all(|r| r.sigma2_brute <= r.sigma2_bound));
    }

    #[test]
    fn broken_direction_is_flagged() {
        let (f, c, omega, mut cert) = gaussian_setup(2, 2);
        // a rational-aligned normal far from the stages
        cert.stages[2] = IntVector::from_i64(&[1, 1]);
        let r = certify_family_slow(&f, &cert, &omega, &c, 2, SpectrumPolicy::Signed).unwrap();
        assert!(r.rows.iter().any(|row| !row.phase_ok));
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn zero_gap_gives_the_full_integral() {
        let (f, c, omega, mut cert) = gaussian_setup(1, 2);
        cert.stages[1] = cert.stages[0].scaled(&BigInt::from(3));
        let r = certify_family_slow(&f, &cert, &omega, &c, 1, SpectrumPolicy::Signed).unwrap();
        assert!((r.rows[0].main.to_f64() - 2.0 * PI.sqrt()).abs() < 1e-12);
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn uniform_and_shifted() {
        let (f, c, omega, cert) = gaussian_setup(3, 2);
        let sp = build_uniform_v0(std::slice::from_ref(&f), &cert, &omega, &c, 3).unwrap();
        assert_eq!(sp.indices()[0], 1);
        assert!(sp.indices().windows(2).all(|w| w[1] > w[0]));
        assert!(sp.modes.iter().all(|m| m.sign == 1));
        let base = certify_family_slow(&f, &cert, &omega, &c, 3, SpectrumPolicy::Fixed(&sp)).unwrap();
        assert_eq!(base.verdict, Verdict::Pass);
        let lambdas: Vec<BigRational> =
            sp.modes.iter().map(|m| lambda_rational(schedule_lambda(&omega, c.tau0, &cert, m.stage).unwrap())).collect();
        assert_eq!(build_shifted_v0(&sp, &[0.0, 0.0], &lambdas).unwrap(), sp);
        let shifted = build_shifted_v0(&sp, &[0.3, -1.7], &lambdas).unwrap();
        assert_eq!(shifted.magnitudes(), sp.magnitudes());
        let moved = certify_family_slow(&f, &cert, &omega, &c, 3, SpectrumPolicy::Fixed(&shifted)).unwrap();
        for (a, b) in base.rows.iter().zip(&moved.rows) {
            assert!((a.margin_ratio - b.margin_ratio).abs() <= 2.0 * (a.quad_error / a.omega_lambda).to_f64().max(1e-15));
        }
        let k1 = build_uniform_v0(std::slice::from_ref(&f), &cert, &omega, &c, 1).unwrap();
        assert_eq!(k1.indices(), vec![1]);
        assert!(matches!(build_uniform_v0(&[f], &cert, &omega, &c, 4), Err(Error::SearchExhausted { .. })));
    }

    #[test]
    fn compact_bound_dominates_quadrature() {
        let bump = Profile::bump(1.0).unwrap();
        let g = LogValue::ONE;
        let b = compact_support_crossterm_bound(&bump, g, LogValue::from_f64(100.0)).unwrap();
        let q = bump.transform(100.0).unwrap();
        assert!(q.value.norm() + q.error <= b.to_f64());
        let b2 = compact_support_crossterm_bound(&bump, g, LogValue::from_f64(200.0)).unwrap();
        assert!((b.to_f64() / b2.to_f64() - 2.0).abs() < 1e-12);
        assert_eq!(compact_support_crossterm_bound(&bump, LogValue::ZERO, LogValue::from_f64(100.0)).unwrap().to_f64(), bump.l1_norm());
        assert_eq!(compact_support_crossterm_bound(&bump, g, LogValue::from_f64(0.5)).unwrap().to_f64(), bump.l1_norm());
        assert!(compact_support_crossterm_bound(&Profile::gaussian(1.0).unwrap(), g, LogValue::ONE).is_err());
    }

    #[test]
    fn weyl_baseline() {
        let w1 = Modulus::halfspace_omega1(&Modulus::power(0.5).unwrap(), Indexing::ByStage).unwrap();
        let mut p = ConstructionParams::new(2);
        p.gap_base = 10;
        let cert = construct_bad_direction(&w1, 2, &IntVector::from_i64(&[1, 0]), 10, &p.rho).unwrap();
        let f = Profile::exponential(1.0).unwrap();
        let h = [(IntVector::from_i64(&[0, 1]), Complex64::new(0.5, 0.0)), (IntVector::from_i64(&[0, -1]), Complex64::new(0.5, 0.0))];
        let r = weyl_average_test(&f, &h, cert.normal_generator(), &[10.0, 100.0, 1000.0]).unwrap();
        assert!(r.rows.iter().all(|row| row.within));
        assert!(r.rows[2].value.abs() < r.rows[0].value.abs());
        let constant = [(IntVector::from_i64(&[0, 0]), Complex64::new(2.5, 0.0))];
        let r = weyl_average_test(&f, &constant, cert.normal_generator(), &[10.0, 1000.0]).unwrap();
        assert!(r.rows.iter().all(|row| (row.value - 5.0).abs() < 1e-12));
    }

    proptest! {
        #[test]
        fn sign_choice_attains_the_max(a in -10.0f64..10.0, b in -10.0f64..10.0) {
            let (s, bb) = (LogValue::from_f64(a), LogValue::from_f64(b));
            let eps: i8 = if s.sign() == 0 || s.sign() == bb.sign() || bb.sign() == 0 { 1 } else { -1 };
            let chosen = (a + f64::from(eps) * b).abs();
            prop_assert!(chosen >= (a + b).abs().max((a - b).abs()) - 1e-12);
            prop_assert!(chosen >= b.abs() - 1e-12);
        }

        #[test]
        fn shift_keeps_magnitudes(x in -50.0f64..50.0, y in -50.0f64..50.0) {
            let (_, c, omega, cert) = gaussian_setup(2, 2);
            let sp = build_uniform_v0(&[Profile::gaussian(1.0).unwrap()], &cert, &omega, &c, 2).unwrap();
            let lambdas: Vec<BigRational> = sp.modes.iter().map(|m| lambda_rational(schedule_lambda(&omega, c.tau0, &cert, m.stage).unwrap())).collect();
            let sh = build_shifted_v0(&sp, &[x, y], &lambdas).unwrap();
            prop_assert_eq!(sh.magnitudes(), sp.magnitudes());
            prop_assert!(sh.modes.iter().all(|m| (0.0..1.0).contains(&m.phase)));
        }
    }
}
