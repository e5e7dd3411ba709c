//! End-to-end slow-convergence demo for the Dirichlet problem
//! `Δu = 0` in `D`, `u = g(x/ε)` on `∂D`, with `D` the prototype domain
//! rotated so that its flat side has a badly approximable lattice normal.

use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::bem::BemSolver;
use super::domain::{Domain, PrototypeParams};
use super::probe::{fit_line, portion_mass_infimum, PortionInfimum, TorusFunction};
use crate::error::{Error, Result};
use crate::family::{certify_family_slow, compute_family_constants, schedule_lambda, weyl_average_test, FamilyConstants, SpectrumPolicy, Verdict};
use crate::lattice::{construct_bad_direction, DirectionCertificate, IntVector};
use crate::logvalue::LogValue;
use crate::modulus::{Indexing, Modulus};
use crate::profile::Profile;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DemoConfig {
    pub domain: PrototypeParams,
    pub omega: Modulus,
    /// Relaxed step base `b` for the direction construction.
    pub gap_base: u32,
    /// Stages of the direction certificate; stage `k + 1` bounds the tail at stage `k`.
    pub stages: usize,
    /// Stages at which the inequality is checked.
    pub demo_stages: usize,
    /// Points in `B₀`: its centre plus the rest on a circle of half its radius.
    pub sample_points: usize,
    /// Height of the centre of `B₀` above the flat side, as a fraction of the centroid's height.
    pub b0_height: f64,
    /// Radius of `B₀` as a fraction of its centre's distance to the boundary.
    pub b0_fraction: f64,
    /// Multipliers of `λ_k` at which the curved part is sampled for its envelope.
    pub envelope_factors: Vec<f64>,
    /// `ε` grid for the convergence trend at the centroid.
    pub trend_eps: Vec<f64>,
    /// Single complex mode used for the trend.
    pub trend_mode: [i64; 2],
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Nyström nodes used for the Poisson profiles that fix the family constants.
    pub profile_nodes: usize,
}

impl Default for DemoConfig {
    fn default() -> Self {
        DemoConfig {
            domain: PrototypeParams { flat_len: 0.5, ..PrototypeParams::default() },
            omega: Modulus::power(0.5).expect("valid exponent"),
            gap_base: 2,
            stages: 2,
            demo_stages: 1,
            sample_points: 5,
            b0_height: 0.35,
            b0_fraction: 0.25,
            envelope_factors: (0..9).map(|i| 2f64.powf(-1.0 + 0.25 * i as f64)).collect(),
            trend_eps: vec![0.1, 0.05, 0.025],
            trend_mode: [0, 1],
            min_nodes: 400,
            max_nodes: 3000,
            profile_nodes: 600,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSummary {
    pub length: f64,
    pub area: f64,
    pub centroid: [f64; 2],
    pub inradius_at_centroid: f64,
    pub b0_center: [f64; 2],
    pub b0_radius: f64,
    pub closure_error: f64,
    /// `(δ, κ(δ))`
    pub kappa: Vec<(f64, f64)>,
    /// Infimum over a grid in `B₀` of the harmonic measure of the flat part.
    pub flat_mass_infimum: PortionInfimum,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    /// Sample point in the rotated domain.
    pub point: [f64; 2],
    pub u: Complex64,
    /// Flat-part contribution `I₁`.
    pub flat: Complex64,
    /// Curved-part contribution `I₂`.
    pub curved: Complex64,
    /// `|I₁ + I₂ − u|`
    pub split_defect: f64,
    /// Fitted `C λ^α` dominating `|I₂|` on the envelope grid, at `λ_k`.
    pub curved_envelope: f64,
    pub curved_slope: f64,
    /// Margin of the family certificate for this point's Poisson profile.
    pub family_margin: f64,
    /// `|u| − tail − ω(λ_k)`
    pub margin_direct: f64,
    /// `|I₁| − envelope − tail − ω(λ_k)`
    pub margin_split: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub k: usize,
    pub lambda: f64,
    pub omega_lambda: f64,
    /// Sup bound on the dropped modes `k+1, k+2, …` of the data.
    pub tail_bound: f64,
    pub nodes: usize,
    pub resolved: bool,
    pub points: Vec<PointReport>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub k: usize,
    pub point: usize,
    pub lambda: f64,
    pub abs_curved: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrendRow {
    pub eps: f64,
    pub lambda: f64,
    pub abs_u: f64,
    pub abs_flat: f64,
    pub abs_curved: f64,
    /// Integration-by-parts bound on the flat part from the Poisson profile.
    pub flat_bound: f64,
    pub resolved: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub config: DemoConfig,
    pub domain: DomainSummary,
    pub constants: FamilyConstants,
    pub certificate: DirectionCertificate,
    /// Rotation taking the reference domain to the demo domain.
    pub rotation: [[f64; 2]; 2],
    pub nodes: usize,
    pub stages: Vec<StageReport>,
    pub decay: Vec<DecayRow>,
    /// Exponent of the stationary-phase rate for a strictly curved arc.
    pub paper_curved_exponent: f64,
    pub trend: Vec<TrendRow>,
    pub trend_decreasing: bool,
    pub verdict: Verdict,
}

/// Poisson profile of `x` along the flat side: `z ↦ P(x, (−z, 0))` sampled at
/// the flat nodes, so that `z` is the tangential chart of the rotated domain.
fn flat_profile(solver: &BemSolver, weights: &[f64]) -> Result<Profile> {
    let h = solver.spacing();
    let mut pts: Vec<(f64, f64)> = solver
        .nodes()
        .iter()
        .zip(weights)
        .filter(|(p, _)| solver.domain().is_flat(p.s))
        .map(|(p, w)| (-solver.domain().unplace(&p.point).x, w / h))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    Profile::tabulated(pts)
}

fn sample_points(center: &Vector2<f64>, radius: f64, count: usize) -> Vec<Vector2<f64>> {
    let mut out = vec![*center];
    let ring = count.saturating_sub(1);
    for i in 0..ring {
        let t = 2.0 * PI * i as f64 / ring as f64;
        out.push(center + Vector2::new(t.cos(), t.sin()) * (0.5 * radius));
    }
    out
}

fn flat_and_curved(solver: &BemSolver, weights: &[f64], data: &[Complex64]) -> (Complex64, Complex64) {
    let mut flat = Complex64::new(0.0, 0.0);
    let mut curved = Complex64::new(0.0, 0.0);
    for ((p, w), g) in solver.nodes().iter().zip(weights).zip(data) {
        if solver.domain().is_flat(p.s) {
            flat += g * *w;
        } else {
            curved += g * *w;
        }
    }
    (flat, curved)
}

pub fn run_demo(config: &DemoConfig) -> Result<DemoReport> {
    if config.sample_points < 1 || config.demo_stages < 1 || config.stages <= config.demo_stages {
        return Err(Error::Argument("need sample points, at least one demo stage and one extra certificate stage".into()));
    }
    if !(config.b0_fraction > 0.0 && config.b0_fraction < 1.0 && config.b0_height > 0.0 && config.b0_height <= 1.0) {
        return Err(Error::Argument("B₀ radius fraction must lie in (0, 1) and its height in (0, 1]".into()));
    }
    let reference = Domain::prototype(config.domain)?;
    let (area, centroid) = reference.area_centroid();
    let inradius = reference.distance_to_boundary(&centroid);
    let b0_center = Vector2::new(centroid.x, config.b0_height * centroid.y);
    let b0_radius = config.b0_fraction * reference.distance_to_boundary(&b0_center);
    let (flat_start, flat_end) = reference.flat_range().expect("prototype has a flat side");

    // family constants from the Poisson profiles of the sample points
    let profile_solver = BemSolver::new(&reference, config.profile_nodes)?;
    let ref_points = sample_points(&b0_center, b0_radius, config.sample_points);
    let profiles = ref_points
        .iter()
        .map(|x| flat_profile(&profile_solver, &profile_solver.harmonic_weights(x)?))
        .collect::<Result<Vec<_>>>()?;
    let constants = compute_family_constants(&profiles)?;
    let flat_mass_infimum = portion_mass_infimum(&profile_solver, &b0_center, b0_radius, flat_start, flat_end - flat_start, 3)?;

    let omega1 = Modulus::family_omega1(&config.omega, constants.delta0, constants.a0, constants.tau0, Indexing::ByStage)?;
    let cert = construct_bad_direction(&omega1, config.stages, &IntVector::from_i64(&[1, 0]), config.gap_base, &constants.rho)?;
    let n = cert.normal_generator().unit_f64();
    let rotation = Matrix2::new(n[1], n[0], -n[0], n[1]);
    let domain = reference.transformed(&rotation, &Vector2::zeros())?;
    let points: Vec<Vector2<f64>> = ref_points.iter().map(|x| domain.place(x)).collect();
    let centre = domain.place(&centroid);
    let rho = cert.rho.to_f64().unwrap_or(1.0);

    // per-stage data: truncated signed spectrum from the centroid profile
    let family = certify_family_slow(&profiles[0], &cert, &config.omega, &constants, config.demo_stages, SpectrumPolicy::Signed)?;
    let lambdas = (1..=config.demo_stages)
        .map(|k| schedule_lambda(&config.omega, constants.tau0, &cert, k).map(|l| l.to_f64()))
        .collect::<Result<Vec<_>>>()?;
    let envelope_top = config.envelope_factors.iter().copied().fold(1.0, f64::max);
    let trend_freq = {
        let m = IntVector::from_i64(&config.trend_mode);
        m.ln_norm().exp() / config.trend_eps.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let needed: Vec<usize> = (1..=config.demo_stages)
        .map(|k| BemSolver::nodes_for(&domain, lambdas[k - 1] * envelope_top * cert.stages[k - 1].ln_norm().exp(), config.min_nodes))
        .collect();
    let node_count = needed.iter().copied().filter(|&m| m <= config.max_nodes).chain([BemSolver::nodes_for(&domain, trend_freq, config.min_nodes)]).max().unwrap_or(config.min_nodes).min(config.max_nodes);
    let solver = BemSolver::new(&domain, node_count)?;
    let weights = points.iter().map(|x| solver.harmonic_weights(x)).collect::<Result<Vec<_>>>()?;
    let point_profiles = weights.iter().map(|w| flat_profile(&solver, w)).collect::<Result<Vec<_>>>()?;
    let centre_weights = solver.harmonic_weights(&centre)?;

    let mut stages = Vec::new();
    let mut decay = Vec::new();
    for k in 1..=config.demo_stages {
        let lambda = lambdas[k - 1];
        let omega_lambda = config.omega.eval(LogValue::from_f64(lambda))?.to_f64();
        let c = |s: usize| (-(s as f64) * cert.stages[s - 1].ln_norm()).exp();
        let tail_bound = 2.0 * c(k + 1) / (1.0 - rho);
        let mut modes = Vec::new();
        for s in 1..=k {
            let sign = family.spectrum.modes[s - 1].sign as f64;
            modes.extend(TorusFunction::cosine(&cert.stages[s - 1], sign * c(s))?.modes);
        }
        let g = TorusFunction::new(modes)?;
        if needed[k - 1] > node_count {
            stages.push(StageReport { k, lambda, omega_lambda, tail_bound, nodes: needed[k - 1], resolved: false, points: Vec::new(), verdict: Verdict::Inconclusive });
            continue;
        }
        let solve_at = |lam: f64| solver.solve(|y| g.eval(&(y * lam)), lam * g.max_frequency());
        let main = solve_at(lambda);
        let resolved = main.resolved();
        let envelope_runs: Vec<(f64, Vec<Complex64>)> = config
            .envelope_factors
            .iter()
            .map(|f| {
                let s = solve_at(lambda * f);
                (lambda * f, s.data().to_vec())
            })
            .collect();
        let mut reports = Vec::new();
        for (i, x) in points.iter().enumerate() {
            let u = main.eval(x)?;
            let (flat, curved) = flat_and_curved(&solver, &weights[i], main.data());
            let (xs, ys): (Vec<f64>, Vec<f64>) = envelope_runs
                .iter()
                .map(|(lam, data)| {
                    let a = flat_and_curved(&solver, &weights[i], data).1.norm();
                    decay.push(DecayRow { k, point: i, lambda: *lam, abs_curved: a });
                    (lam.ln(), a.max(f64::MIN_POSITIVE).ln())
                })
                .unzip();
            let slope = fit_line(&xs, &ys).0.min(0.0);
            let ln_c = xs.iter().zip(&ys).map(|(x, y)| y - slope * x).fold(f64::NEG_INFINITY, f64::max);
            let curved_envelope = (ln_c + slope * lambda.ln()).exp();
            let fam = certify_family_slow(&point_profiles[i], &cert, &config.omega, &constants, k, SpectrumPolicy::Fixed(&family.spectrum))?;
            let margin_direct = u.norm() - tail_bound - omega_lambda;
            let margin_split = flat.norm() - curved_envelope - tail_bound - omega_lambda;
            let verdict = if !resolved {
                Verdict::Inconclusive
            } else if margin_split > 0.0 && margin_direct > 0.0 {
                Verdict::Pass
            } else {
                Verdict::Fail
            };
            reports.push(PointReport {
                point: [x.x, x.y],
                u,
                flat,
                curved,
                split_defect: (flat + curved - u).norm(),
                curved_envelope,
                curved_slope: slope,
                family_margin: fam.rows[k - 1].margin.to_f64(),
                margin_direct,
                margin_split,
                verdict,
            });
        }
        let verdict = combine(reports.iter().map(|r| r.verdict));
        stages.push(StageReport { k, lambda, omega_lambda, tail_bound, nodes: node_count, resolved, points: reports, verdict });
    }

    // convergence along a generic ε grid at the centroid
    let mode = IntVector::from_i64(&config.trend_mode);
    let h = TorusFunction::new(vec![(mode.clone(), Complex64::new(1.0, 0.0))])?;
    let weyl = weyl_average_test(&flat_profile(&solver, &centre_weights)?, &h.modes, cert.normal_generator(), &config.trend_eps.iter().map(|e| 1.0 / e).collect::<Vec<_>>())?;
    let mut trend = Vec::new();
    for (eps, row) in config.trend_eps.iter().zip(&weyl.rows) {
        let lambda = 1.0 / eps;
        let s = solver.solve(|y| h.eval(&(y * lambda)), lambda * h.max_frequency());
        let u = s.eval(&centre)?;
        let (flat, curved) = flat_and_curved(&solver, &centre_weights, s.data());
        trend.push(TrendRow {
            eps: *eps,
            lambda,
            abs_u: u.norm(),
            abs_flat: flat.norm(),
            abs_curved: curved.norm(),
            flat_bound: row.bound,
            resolved: s.resolved(),
        });
    }
    let trend_decreasing = trend.windows(2).all(|w| w[1].abs_u < w[0].abs_u);
    let trend_verdict = if trend.iter().any(|t| !t.resolved) {
        Verdict::Inconclusive
    } else if trend_decreasing {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let verdict = combine(stages.iter().map(|s| s.verdict).chain([trend_verdict]));

    let kappa = [1e-3, 1e-2, 1e-1].iter().filter_map(|&d| reference.kappa_delta(d).ok().map(|k| (d, k))).collect();
    Ok(DemoReport {
        config: config.clone(),
        domain: DomainSummary {
            length: reference.length(),
            area,
            centroid: [centroid.x, centroid.y],
            inradius_at_centroid: inradius,
            b0_center: [b0_center.x, b0_center.y],
            b0_radius,
            closure_error: reference.closure_error(),
            kappa,
            flat_mass_infimum,
        },
        constants,
        certificate: cert,
        rotation: [[rotation[(0, 0)], rotation[(0, 1)]], [rotation[(1, 0)], rotation[(1, 1)]]],
        nodes: node_count,
        stages,
        decay,
        paper_curved_exponent: -0.5,
        trend,
        trend_decreasing,
        verdict,
    })
}

fn combine<I: IntoIterator<Item = Verdict>>(verdicts: I) -> Verdict {
    let mut out = Verdict::Pass;
    for v in verdicts {
        match v {
            Verdict::Fail => return Verdict::Fail,
            Verdict::Inconclusive => out = Verdict::Inconclusive,
            Verdict::Pass => {}
        }
    }
    out
}
