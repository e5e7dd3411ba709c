use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;
use slowhom::dirichlet::{run_demo, DemoConfig};
use slowhom::family::{build_uniform_v0, certify_family_slow, compute_family_constants, FamilyConstants, SpectrumPolicy, Verdict};
use slowhom::halfspace::{build_boundary_data, certify_slow_convergence, decay_curve, Halfspace};
use slowhom::lattice::{construct_bad_direction_partial, verify_direction_certificate, ConstructionParams, IntVector};
use slowhom::profile::Profile;
use slowhom::{Indexing, Modulus};

use crate::config::RunConfig;
use crate::output::{read_artifact, write_artifact, Artifact, Metadata, SCHEMA_VERSION};
use crate::plot::{curve_table, decay_table, emit_plot_data, family_table, schedule_table, stages_table, trend_table, write_table, TableKind};
use crate::report::{DirectionOutput, FamilyOutput, HalfspaceOutput, KIND_DEMO, KIND_DIRECTION, KIND_FAMILY, KIND_HALFSPACE};
use crate::CliError;

const LINE_SEARCH: &str = "line-search";

#[derive(Args, Debug)]
pub struct DirectionArgs {
    /// Target modulus: power:P, log, log:SHIFT or exp:C.
    #[arg(long, default_value = "power:0.5")]
    pub omega: String,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Number of spectral stages K.
    #[arg(long, default_value_t = 4)]
    pub stages: usize,
    #[arg(long, default_value_t = 10)]
    pub gap_base: u32,
    /// Gap ratio as a fraction p/q. Defaults to 1/2, or the family value with --profile.
    #[arg(long)]
    pub rho: Option<String>,
    /// First stage, comma separated. Defaults to the first unit vector.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub seed_vector: Option<Vec<i64>>,
    /// Derive the stage modulus from this boundary profile instead of the half-space rule.
    #[arg(long)]
    pub profile: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Certificate JSON; printed to stdout when absent.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Stage table CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct HalfspaceArgs {
    #[arg(long, default_value = "power:0.5")]
    pub omega: String,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 4)]
    pub stages: usize,
    #[arg(long, default_value_t = 10)]
    pub gap_base: u32,
    #[arg(long)]
    pub rho: Option<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub seed_vector: Option<Vec<i64>>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Schedule CSV: k, ln_t_k, ln_S, ln_omega, margin.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Decay curve CSV: ln_t, ln_S.
    #[arg(long)]
    pub curve_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Spectrum {
    Signed,
    Uniform,
}

#[derive(Args, Debug)]
pub struct FamilyArgs {
    /// Boundary profile: name[:param][*amplitude].
    #[arg(long, default_value = "gaussian")]
    pub profile: String,
    #[arg(long, default_value = "power:0.25")]
    pub omega: String,
    #[arg(long, default_value_t = 3)]
    pub stages: usize,
    #[arg(long, default_value_t = 2)]
    pub gap_base: u32,
    #[arg(long, value_enum, default_value_t = Spectrum::Signed)]
    pub spectrum: Spectrum,
    /// Number of modes for the uniform spectrum.
    #[arg(long, default_value_t = 2)]
    pub modes: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Margin table CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct DemoArgs {
    /// JSON demo configuration; missing fields take their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured modulus.
    #[arg(long)]
    pub omega: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Trend CSV: eps, lambda, abs_u, ...
    #[arg(long)]
    pub trend_csv: Option<PathBuf>,
    /// Curved-part decay CSV: k, point, lambda, abs_curved.
    #[arg(long)]
    pub decay_csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PlotArgs {
    /// Artifact JSON written by another subcommand.
    #[arg(long)]
    pub input: PathBuf,
    /// Table to extract; defaults to the artifact's main table.
    #[arg(long, value_enum)]
    pub table: Option<TableKind>,
    #[arg(long, short)]
    pub out: PathBuf,
}

fn usage<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Usage(e.to_string())
}

fn parse_modulus(s: &str) -> Result<Modulus, CliError> {
    Modulus::from_str(s).map_err(usage)
}

fn parse_rho(s: &str) -> Result<BigRational, CliError> {
    BigRational::from_str(s.trim()).map_err(|e| CliError::Usage(format!("bad rho `{s}`: {e}")))
}

fn seed_vector(dim: usize, given: &Option<Vec<i64>>) -> Result<IntVector, CliError> {
    if dim < 2 {
        return Err(CliError::Usage(format!("dimension must be at least 2, got {dim}")));
    }
    match given {
        Some(v) if v.len() != dim => Err(CliError::Usage(format!("seed vector has {} entries, dimension is {dim}", v.len()))),
        Some(v) => Ok(IntVector::from_i64(v)),
        None => Ok(IntVector::unit(dim, 0)),
    }
}

fn seed_coords(dim: usize, given: &Option<Vec<i64>>) -> Vec<i64> {
    given.clone().unwrap_or_else(|| (0..dim).map(|i| i64::from(i == 0)).collect())
}

fn build_direction(omega1: &Modulus, seed: &IntVector, k: usize, gap_base: u32, rho: &BigRational) -> Result<DirectionOutput, CliError> {
    let params = ConstructionParams { k, gap_base, rho: rho.clone(), ..ConstructionParams::new(k) };
    let c = construct_bad_direction_partial(omega1, seed, &params).map_err(usage)?;
    let verification = verify_direction_certificate(&c.certificate);
    Ok(DirectionOutput { certificate: c.certificate, verification, failure: c.failure.map(|e| e.to_string()) })
}

fn artifact<T: Serialize>(kind: &str, verdict: Verdict, config: RunConfig, report: &T) -> Result<Artifact, CliError> {
    Ok(Artifact {
        schema_version: SCHEMA_VERSION,
        kind: kind.to_string(),
        verdict,
        run_config: config,
        report: serde_json::to_value(report).map_err(|e| CliError::Report(e.to_string()))?,
        metadata: Metadata::now(),
    })
}

fn publish(a: &Artifact) -> Result<(), CliError> {
    match &a.run_config.outputs.json {
        Some(p) => write_artifact(p, a),
        None => {
            use std::io::Write;
            let text = serde_json::to_string_pretty(a).map_err(|e| CliError::Report(e.to_string()))?;
            match writeln!(std::io::stdout().lock(), "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::Io("stdout".into(), e)),
                _ => Ok(()),
            }
        }
    }
}

fn record_csv(cfg: &mut RunConfig, table: TableKind, path: &Option<PathBuf>) {
    if let Some(p) = path {
        cfg.outputs.csv.push((table.name().to_string(), p.clone()));
    }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

pub fn direction(args: &DirectionArgs) -> Result<Verdict, CliError> {
    let omega = parse_modulus(&args.omega)?;
    let seed = seed_vector(args.dim, &args.seed_vector)?;
    let (omega1, default_rho) = match &args.profile {
        Some(spec) => {
            let c = compute_family_constants(&[Profile::from_str(spec).map_err(usage)?]).map_err(usage)?;
            (Modulus::family_omega1(&omega, c.delta0, c.a0, c.tau0, Indexing::ByStage).map_err(usage)?, c.rho)
        }
        None => (Modulus::halfspace_omega1(&omega, Indexing::ByStage).map_err(usage)?, parse_rho("1/2")?),
    };
    let rho = match &args.rho {
        Some(s) => parse_rho(s)?,
        None => default_rho,
    };
    let mut cfg = RunConfig::new("direction", LINE_SEARCH);
    cfg.modulus = Some(omega);
    cfg.dim = Some(args.dim);
    cfg.stages = Some(args.stages);
    cfg.gap_base = Some(args.gap_base);
    cfg.rho = Some(rho.to_string());
    cfg.seed_vector = Some(seed_coords(args.dim, &args.seed_vector));
    cfg.profile = args.profile.clone();
    cfg.seed = args.seed;
    cfg.outputs.json = args.out.clone();
    record_csv(&mut cfg, TableKind::Stages, &args.csv);

    let out = build_direction(&omega1, &seed, args.stages, args.gap_base, &rho)?;
    let verdict = pass_if(out.failure.is_none() && out.verification.passed);
    if let Some(p) = &args.csv {
        write_table(&stages_table(&out.certificate), p)?;
    }
    publish(&artifact(KIND_DIRECTION, verdict, cfg, &out)?)?;
    Ok(verdict)
}

pub fn halfspace(args: &HalfspaceArgs) -> Result<Verdict, CliError> {
    let omega = parse_modulus(&args.omega)?;
    let seed = seed_vector(args.dim, &args.seed_vector)?;
    let rho = parse_rho(args.rho.as_deref().unwrap_or("1/2"))?;
    let omega1 = Modulus::halfspace_omega1(&omega, Indexing::ByStage).map_err(usage)?;
    let mut cfg = RunConfig::new("halfspace-certify", LINE_SEARCH);
    cfg.modulus = Some(omega.clone());
    cfg.dim = Some(args.dim);
    cfg.stages = Some(args.stages);
    cfg.gap_base = Some(args.gap_base);
    cfg.rho = Some(rho.to_string());
    cfg.seed_vector = Some(seed_coords(args.dim, &args.seed_vector));
    cfg.seed = args.seed;
    cfg.outputs.json = args.out.clone();
    record_csv(&mut cfg, TableKind::Schedule, &args.csv);
    record_csv(&mut cfg, TableKind::Curve, &args.curve_csv);

    let direction = build_direction(&omega1, &seed, args.stages, args.gap_base, &rho)?;
    let mut out = HalfspaceOutput { direction, schedule: None, decay_curve: Vec::new(), failure: None };
    if out.direction.failure.is_none() {
        let certified = build_boundary_data(&out.direction.certificate, args.stages)
            .and_then(|data| Halfspace::from_certificate(data, &out.direction.certificate))
            .and_then(|hs| Ok((certify_slow_convergence(&hs, &omega, Some(&omega1))?, hs)));
        match certified {
            Ok((schedule, hs)) => {
                let lo = schedule.rows.iter().map(|r| r.ln_t).fold(f64::INFINITY, f64::min);
                let hi = schedule.rows.iter().map(|r| r.ln_t).fold(f64::NEG_INFINITY, f64::max);
                if lo.is_finite() && hi.is_finite() {
                    out.decay_curve = decay_curve(&hs, lo - 2.0, hi + 2.0, 200);
                }
                out.schedule = Some(schedule);
            }
            Err(e) => out.failure = Some(e.to_string()),
        }
    }
    let verdict = pass_if(
        out.direction.failure.is_none() && out.direction.verification.passed && out.failure.is_none() && out.schedule.as_ref().is_some_and(|s| s.passed),
    );
    if let Some(p) = &args.csv {
        write_table(&schedule_table(out.schedule.as_ref()), p)?;
    }
    if let Some(p) = &args.curve_csv {
        write_table(&curve_table(&out.decay_curve), p)?;
    }
    publish(&artifact(KIND_HALFSPACE, verdict, cfg, &out)?)?;
    Ok(verdict)
}

pub fn family(args: &FamilyArgs) -> Result<Verdict, CliError> {
    let omega = parse_modulus(&args.omega)?;
    let profile = Profile::from_str(&args.profile).map_err(usage)?;
    let constants: FamilyConstants = compute_family_constants(std::slice::from_ref(&profile)).map_err(usage)?;
    let omega1 = Modulus::family_omega1(&omega, constants.delta0, constants.a0, constants.tau0, Indexing::ByStage).map_err(usage)?;
    let mut cfg = RunConfig::new("family-certify", LINE_SEARCH);
    cfg.modulus = Some(omega.clone());
    cfg.dim = Some(2);
    cfg.stages = Some(args.stages);
    cfg.gap_base = Some(args.gap_base);
    cfg.rho = Some(constants.rho.to_string());
    cfg.seed_vector = Some(vec![1, 0]);
    cfg.profile = Some(profile.to_string());
    cfg.spectrum = Some(match args.spectrum {
        Spectrum::Signed => "signed".into(),
        Spectrum::Uniform => format!("uniform:{}", args.modes),
    });
    cfg.seed = args.seed;
    cfg.outputs.json = args.out.clone();
    record_csv(&mut cfg, TableKind::Family, &args.csv);

    let direction = build_direction(&omega1, &IntVector::unit(2, 0), args.stages, args.gap_base, &constants.rho)?;
    let mut out = FamilyOutput { constants: constants.clone(), direction, family: None, failure: None };
    if out.direction.failure.is_none() {
        let cert = &out.direction.certificate;
        let report = match args.spectrum {
            Spectrum::Signed => certify_family_slow(&profile, cert, &omega, &constants, args.stages, SpectrumPolicy::Signed),
            Spectrum::Uniform => build_uniform_v0(std::slice::from_ref(&profile), cert, &omega, &constants, args.modes)
                .and_then(|sp| certify_family_slow(&profile, cert, &omega, &constants, args.stages, SpectrumPolicy::Fixed(&sp))),
        };
        match report {
            Ok(r) => out.family = Some(r),
            Err(e) => out.failure = Some(e.to_string()),
        }
    }
    let verdict = match (&out.direction.failure, &out.failure, &out.family) {
        (None, None, Some(r)) if out.direction.verification.passed => r.verdict,
        _ => Verdict::Fail,
    };
    if let Some(p) = &args.csv {
        write_table(&family_table(out.family.as_ref()), p)?;
    }
    publish(&artifact(KIND_FAMILY, verdict, cfg, &out)?)?;
    Ok(verdict)
}

pub fn demo(args: &DemoArgs) -> Result<Verdict, CliError> {
    let mut config: DemoConfig = match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(p.display().to_string(), e))?;
            serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => DemoConfig::default(),
    };
    if let Some(s) = &args.omega {
        config.omega = parse_modulus(s)?;
    }
    let mut cfg = RunConfig::new("dirichlet-demo", "nystrom-double-layer");
    cfg.modulus = Some(config.omega.clone());
    cfg.dim = Some(2);
    cfg.stages = Some(config.stages);
    cfg.gap_base = Some(config.gap_base);
    cfg.seed_vector = Some(vec![1, 0]);
    cfg.seed = args.seed;
    cfg.demo = Some(config.clone());
    cfg.outputs.json = args.out.clone();
    record_csv(&mut cfg, TableKind::Trend, &args.trend_csv);
    record_csv(&mut cfg, TableKind::Decay, &args.decay_csv);

    match run_demo(&config) {
        Ok(report) => {
            if let Some(p) = &args.trend_csv {
                write_table(&trend_table(&report), p)?;
            }
            if let Some(p) = &args.decay_csv {
                write_table(&decay_table(&report), p)?;
            }
            let verdict = report.verdict;
            publish(&artifact(KIND_DEMO, verdict, cfg, &report)?)?;
            Ok(verdict)
        }
        Err(e @ slowhom::Error::SearchExhausted { .. }) => {
            publish(&artifact(KIND_DEMO, Verdict::Fail, cfg, &serde_json::json!({ "failure": e.to_string() }))?)?;
            Ok(Verdict::Fail)
        }
        Err(e) => Err(usage(e)),
    }
}

/// The exit status reflects the conversion only, not the artifact's verdict.
pub fn plot(args: &PlotArgs) -> Result<Verdict, CliError> {
    let a = read_artifact(&args.input)?;
    emit_plot_data(&a, args.table, &args.out)?;
    Ok(Verdict::Pass)
}
