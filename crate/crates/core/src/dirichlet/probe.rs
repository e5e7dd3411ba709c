//! Harmonic measure of boundary portions and oscillatory boundary integrals
//! over the curved part.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::bem::BemSolver;
use super::domain::{smooth_step, Domain};
use crate::error::{Error, Result};
use crate::lattice::IntVector;
use crate::quadrature::{integrate, Tolerance};

/// Finite Fourier series `Σ c_ξ e^{2πiξ·θ}` on the torus.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TorusFunction {
    pub modes: Vec<(IntVector, Complex64)>,
}

impl TorusFunction {
    pub fn new(modes: Vec<(IntVector, Complex64)>) -> Result<Self> {
        if modes.iter().any(|(xi, _)| xi.dim() != 2) {
            return Err(Error::Unsupported("torus functions are two-dimensional here".into()));
        }
        Ok(TorusFunction { modes })
    }

    /// `2c cos(2πξ·θ)`, the real pair `c(e^{2πiξ·θ} + e^{−2πiξ·θ})`.
    pub fn cosine(xi: &IntVector, c: f64) -> Result<Self> {
        let minus = xi.scaled(&(-1).into());
        Self::new(vec![(xi.clone(), Complex64::new(c, 0.0)), (minus, Complex64::new(c, 0.0))])
    }

    /// Mean value `c₀`.
    pub fn mean(&self) -> Complex64 {
        self.modes.iter().filter(|(xi, _)| xi.is_zero()).map(|(_, c)| *c).sum()
    }

    /// Largest `|ξ|` among nonzero coefficients.
    pub fn max_frequency(&self) -> f64 {
        self.modes.iter().filter(|(_, c)| c.norm() > 0.0).map(|(xi, _)| xi.ln_norm().exp()).fold(0.0, f64::max)
    }

    /// `Σ |c_ξ|`, a bound on the sup norm.
    pub fn coefficient_l1(&self) -> f64 {
        self.modes.iter().map(|(_, c)| c.norm()).sum()
    }

    pub fn eval(&self, theta: &Vector2<f64>) -> Complex64 {
        self.modes
            .iter()
            .map(|(xi, c)| {
                let x = xi.to_f64();
                c * Complex64::from_polar(1.0, 2.0 * PI * (x[0] * theta.x + x[1] * theta.y))
            })
            .sum()
    }
}

/// Smoothed indicator of the boundary arc `[start, start + len)` (arc length,
/// wrapping), with transitions of width `width` centred at the arc ends.
/// Indicators of complementary arcs sum to one exactly.
pub fn mollified_indicator(domain: &Domain, start: f64, len: f64, width: f64) -> impl Fn(f64) -> f64 {
    let total = domain.length();
    move |s: f64| {
        let mut t = (s - start).rem_euclid(total);
        if t > total - 0.5 * width {
            t -= total;
        }
        smooth_step(t / width + 0.5) * smooth_step((len - t) / width + 0.5)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortionMass {
    /// Richardson extrapolation `(4m(w/2) − m(w))/3`.
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
    pub width: f64,
}

/// Harmonic measure at `x` of the boundary arc `[start, start + len)`,
/// computed by solving with mollified indicator data at widths `w` and `w/2`.
/// `width = None` picks 32 node spacings.
pub fn poisson_portion_mass(solver: &BemSolver, x: &Vector2<f64>, start: f64, len: f64, width: Option<f64>) -> Result<PortionMass> {
    let weights = solver.harmonic_weights(x)?;
    portion_from_weights(solver, &weights, start, len, width)
}

fn portion_from_weights(solver: &BemSolver, weights: &[f64], start: f64, len: f64, width: Option<f64>) -> Result<PortionMass> {
    let domain = solver.domain();
    let total = domain.length();
    if !(len > 0.0) {
        return Err(Error::Argument("portion must have positive length".into()));
    }
    if len >= total {
        let m = weights.iter().sum();
        return Ok(PortionMass { value: m, coarse: m, fine: m, width: 0.0 });
    }
    let w = width.unwrap_or(32.0 * solver.spacing());
    if w + len >= total || w >= len {
        return Err(Error::Argument(format!("mollification width {w} does not fit the arc")));
    }
    let mass = |w: f64| {
        let ind = mollified_indicator(domain, start, len, w);
        solver.nodes().iter().zip(weights).map(|(p, r)| r * ind(p.s)).sum::<f64>()
    };
    let (coarse, fine) = (mass(w), mass(0.5 * w));
    Ok(PortionMass { value: (4.0 * fine - coarse) / 3.0, coarse, fine, width: w })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PortionInfimum {
    pub value: f64,
    pub argmin: [f64; 2],
    pub points: usize,
}

/// Minimum of the portion mass over a polar grid in the ball `B(center, radius)`.
pub fn portion_mass_infimum(solver: &BemSolver, center: &Vector2<f64>, radius: f64, start: f64, len: f64, rings: usize) -> Result<PortionInfimum> {
    let mut best = PortionInfimum { value: f64::INFINITY, argmin: [center.x, center.y], points: 0 };
    for r in 0..=rings {
        let rad = radius * r as f64 / rings.max(1) as f64;
        let count = if r == 0 { 1 } else { 8 * r };
        for k in 0..count {
            let t = 2.0 * PI * k as f64 / count as f64;
            let x = center + Vector2::new(t.cos(), t.sin()) * rad;
            let m = poisson_portion_mass(solver, &x, start, len, None)?.value;
            best.points += 1;
            if m < best.value {
                best.value = m;
                best.argmin = [x.x, x.y];
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecaySample {
    pub lambda: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
    pub error: f64,
    pub resolved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayProbe {
    pub samples: Vec<DecaySample>,
    /// Least-squares slope of `ln |I|` against `ln λ`.
    pub slope: f64,
    /// Intercept `ln C` of the same fit.
    pub ln_constant: f64,
    pub resolved: bool,
}

/// Least-squares line through `(x_i, y_i)`; returns `(slope, intercept)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// `I(λ) = ∫_{Γ∖Π₀} P(y) g(λMy + y₀) dσ(y)` over the curved part of the
/// (unplaced) domain, one quadrature panel per oscillation.
pub fn curved_decay_probe<P: Fn(&Vector2<f64>) -> f64>(
    domain: &Domain,
    weight: P,
    g: &TorusFunction,
    frame: &Matrix2<f64>,
    y0: &Vector2<f64>,
    lambdas: &[f64],
) -> Result<DecayProbe> {
    if g.mean().norm() != 0.0 {
        return Err(Error::Argument("torus function must have zero mean".into()));
    }
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Argument("λ grid must be nonempty and positive".into()));
    }
    let (a, b) = match domain.flat_range() {
        Some((_, end)) => (end, domain.length()),
        None => (0.0, domain.length()),
    };
    let mut samples = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        let panels = ((b - a) * lambda * g.max_frequency() * 2.0).ceil().max(8.0) as usize;
        let breaks: Vec<f64> = (0..=panels).map(|i| a + (b - a) * i as f64 / panels as f64).collect();
        let tol = Tolerance { abs: 1e-13, rel: 1e-11, max_panels: 40 * panels };
        let r = integrate(
            |s| {
                let p = domain.at(s).point;
                g.eval(&(frame * p * lambda + y0)) * weight(&p)
            },
            &breaks,
            tol,
        );
        let abs = r.value.norm();
        samples.push(DecaySample {
            lambda,
            re: r.value.re,
            im: r.value.im,
            abs,
            error: r.error,
            resolved: r.error <= 1e-6 * abs.max(1e-300),
        });
    }
    let fit: Vec<(f64, f64)> = samples.iter().filter(|s| s.abs > 0.0).map(|s| (s.lambda.ln(), s.abs.ln())).collect();
    let (slope, ln_constant) = if fit.len() >= 2 {
        let (x, y): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        fit_line(&x, &y)
    } else {
        (f64::NAN, f64::NEG_INFINITY)
    };
    let resolved = samples.iter().all(|s| s.resolved || s.abs == 0.0);
    Ok(DecayProbe { samples, slope, ln_constant, resolved })
}

/// Uniformly distributed rotation matrices from a seeded generator.
pub fn random_frames(count: usize, seed: u64) -> Vec<Matrix2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t = rng.random::<f64>() * 2.0 * PI;
            Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos())
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameInvariance {
    pub slopes: Vec<f64>,
    /// `max − min` of the fitted slopes.
    pub spread: f64,
    pub probes: Vec<DecayProbe>,
}

/// Runs [`curved_decay_probe`] in several random frames.
pub fn frame_invariance<P: Fn(&Vector2<f64>) -> f64>(
    domain: &Domain,
    weight: P,
    g: &TorusFunction,
    y0: &Vector2<f64>,
    lambdas: &[f64],
    frames: usize,
    seed: u64,
) -> Result<FrameInvariance> {
    let probes = random_frames(frames, seed)
        .iter()
        .map(|m| curved_decay_probe(domain, &weight, g, m, y0, lambdas))
        .collect::<Result<Vec<_>>>()?;
    let slopes: Vec<f64> = probes.iter().map(|p| p.slope).collect();
    let spread = slopes.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) - slopes.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    Ok(FrameInvariance { slopes, spread, probes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dirichlet::domain::PrototypeParams;

    fn weight(y: &Vector2<f64>) -> f64 {
        1.5 + 0.3 * y.x + 0.2 * y.y * y.y
    }

    #[test]
    fn disk_portions() {
        let d = Domain::circle(1.0).unwrap();
        let s = BemSolver::new(&d, 512).unwrap();
        let o = Vector2::zeros();
        let full = poisson_portion_mass(&s, &o, 0.3, d.length(), None).unwrap();
        assert!((full.value - 1.0).abs() < 1e-10);
        let half = poisson_portion_mass(&s, &o, 0.3, 0.5 * d.length(), None).unwrap();
        assert!((half.value - 0.5).abs() < 1e-10, "{half:?}");
        // off-centre: closed-form harmonic measure of an arc
        let x = Vector2::new(0.3, 0.1);
        let (a, b) = (0.4, 2.1);
        let exact = {
            let p = |t: f64| (1.0 - x.norm_squared()) / (2.0 * PI * (Vector2::new(t.cos(), t.sin()) - x).norm_squared());
            crate::quadrature::integrate_interval(p, a, b, Tolerance::default()).value
        };
        let m = poisson_portion_mass(&s, &x, a, b - a, None).unwrap();
        assert!((m.value - exact).abs() < 1e-6, "{m:?} vs {exact}");
        assert!((m.value - exact).abs() < (m.fine - exact).abs());
    }

    #[test]
    fn partitions_sum_to_one() {
        let d = Domain::prototype(PrototypeParams { flat_len: 0.5, ..Default::default() }).unwrap();
        let s = BemSolver::new(&d, 400).unwrap();
        let (_, c) = d.area_centroid();
        let cuts = [0.0, 0.5, 1.3, 2.0];
        let total = d.length();
        let w = Some(0.05);
        let sum: f64 = (0..cuts.len())
            .map(|i| {
                let end = if i + 1 < cuts.len() { cuts[i + 1] } else { total };
                poisson_portion_mass(&s, &c, cuts[i], end - cuts[i], w).unwrap().value
            })
            .sum();
        assert!((sum - 1.0).abs() < 1e-8);
        let inf = portion_mass_infimum(&s, &c, 0.05, 0.0, 0.5, 2).unwrap();
        assert!(inf.value > 0.0 && inf.value < 1.0);
        assert_eq!(inf.points, 1 + 8 + 16);
    }

    #[test]
    fn circle_probe_decays_like_inverse_sqrt() {
        let d = Domain::circle(1.0).unwrap();
        let g = TorusFunction::new(vec![(IntVector::from_i64(&[1, 0]), Complex64::new(1.0, 0.0))]).unwrap();
        let lambdas = [25.0, 50.0, 100.0, 200.0];
        let p = curved_decay_probe(&d, weight, &g, &Matrix2::identity(), &Vector2::zeros(), &lambdas).unwrap();
        assert!(p.resolved);
        assert!((p.slope + 0.5).abs() < 0.05, "{}", p.slope);
        let inv = frame_invariance(&d, weight, &g, &Vector2::zeros(), &lambdas, 3, 7).unwrap();
        assert!(inv.spread < 0.1);
        let zero = curved_decay_probe(&d, weight, &TorusFunction::default(), &Matrix2::identity(), &Vector2::zeros(), &lambdas).unwrap();
        assert!(zero.samples.iter().all(|s| s.abs == 0.0));
    }

    #[test]
    fn nonzero_mean_rejected() {
        let d = Domain::circle(1.0).unwrap();
        let g = TorusFunction::new(vec![(IntVector::from_i64(&[0, 0]), Complex64::new(1.0, 0.0))]).unwrap();
        assert!(curved_decay_probe(&d, weight, &g, &Matrix2::identity(), &Vector2::zeros(), &[10.0]).is_err());
    }
}
