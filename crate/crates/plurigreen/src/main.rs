use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use plurigreen::acceptance::{run_all, VerifyOptions};
use plurigreen::config::{validate_workers, ConfigError, ScheduleRecord, GeometricSchedule, SweepConfig, SweepFile};
use plurigreen::harness::{run_sweep, HarnessError};
use plurigreen::output::{csv_string, to_json, SweepSummary};
use plurigreen::schema::{BoundRecord, ClassificationRecord, FrameRecord, IdealRecord, PointRecord, PolyRecord};
use plurigreen_core::classify::{classify, geometric_schedule, FamilySpec};
use plurigreen_core::cxgeom::{CanonicalFrame, Complex2};
use plurigreen_core::green::{GreenConfig, GreenContext};
use plurigreen_core::ideals::{frame_to_standard, limit_ideal_ci, line_polys, line_product, maximal_square, q_generators};
use plurigreen_core::C64;

#[derive(Parser)]
#[command(name = "plurigreen", version, about = "Three-point ideals and Green function bounds in the bidisk")]
struct Cli {
    /// Seed for the randomized disk search and the verification suite.
    #[arg(long, global = true, env = "PLURIGREEN_SEED")]
    seed: Option<u64>,
    /// Log progress to stderr.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the limit regime of a family of triples.
    Classify(ClassifyArgs),
    /// Print the ideal generators, lines and limit ideals of one frame.
    Generators(FrameArgs),
    /// Print lower and upper Green bounds at one point.
    Bounds(BoundsArgs),
    /// Run an eps-sweep and write CSV rows plus a JSON summary.
    Sweep(SweepArgs),
    /// Run the built-in verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Powerlaw,
}

#[derive(Args)]
struct ScheduleArgs {
    /// Largest eps of a geometric schedule.
    #[arg(long)]
    eps_first: Option<f64>,
    /// Smallest eps of a geometric schedule.
    #[arg(long)]
    eps_last: Option<f64>,
    /// Number of schedule points.
    #[arg(long)]
    eps_count: Option<usize>,
}

impl ScheduleArgs {
    fn apply(&self, current: Option<ScheduleRecord>) -> Option<ScheduleRecord> {
        if self.eps_first.is_none() && self.eps_last.is_none() && self.eps_count.is_none() {
            return current;
        }
        let base = match current {
            Some(ScheduleRecord::Geometric(g)) => g,
            _ => GeometricSchedule {
                first: 1e-1,
                last: 1e-6,
                count: 6,
            },
        };
        Some(ScheduleRecord::Geometric(GeometricSchedule {
            first: self.eps_first.unwrap_or(base.first),
            last: self.eps_last.unwrap_or(base.last),
            count: self.eps_count.unwrap_or(base.count),
        }))
    }
}

#[derive(Args)]
struct ClassifyArgs {
    /// Sweep config file; only `family` and `eps_schedule` are used.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyKind>,
    /// Complex as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    rho_coeff: Option<C64>,
    #[arg(long)]
    rho_exp: Option<f64>,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    delta_coeff: Option<C64>,
    #[arg(long)]
    delta_exp: Option<f64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args)]
struct FrameArgs {
    #[arg(long)]
    eps: f64,
    /// Complex as `re` or `re,im`.
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    rho: C64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    delta: C64,
    /// Also print the generators in standard coordinates.
    #[arg(long)]
    standard: bool,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    eps: f64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    rho: C64,
    #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
    delta: C64,
    /// Point as `z1_re,z1_im,z2_re,z2_im` or `z1,z2` (real).
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    z: Complex2,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// JSON summary path; defaults to the CSV path with a `.json` extension.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    resolution: Option<usize>,
    #[arg(long)]
    target_band: Option<f64>,
    #[arg(long)]
    formula_band: Option<f64>,
    #[arg(long)]
    liminf_band: Option<f64>,
    #[command(flatten)]
    schedule: ScheduleArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_floats(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}")))
        .collect()
}

fn parse_complex(s: &str) -> Result<C64, String> {
    match parse_floats(s)?.as_slice() {
        [re] => Ok(C64::new(*re, 0.0)),
        [re, im] => Ok(C64::new(*re, *im)),
        _ => Err("expected `re` or `re,im`".into()),
    }
}

fn parse_point(s: &str) -> Result<Complex2, String> {
    match parse_floats(s)?.as_slice() {
        [a, b] => Ok(Complex2::real(*a, *b)),
        [a, b, c, d] => Ok(Complex2::new(C64::new(*a, *b), C64::new(*c, *d))),
        _ => Err("expected `z1_re,z1_im,z2_re,z2_im` or `z1,z2`".into()),
    }
}

enum Failure {
    Config(String),
    Numeric(String),
    Verify,
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Numeric(_) => 3,
            Failure::Verify => 4,
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<plurigreen_core::Error> for Failure {
    fn from(e: plurigreen_core::Error) -> Self {
        Failure::Numeric(e.to_string())
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(e) => Failure::Config(e.to_string()),
            e => Failure::Numeric(e.to_string()),
        }
    }
}

fn print_json<T: Serialize>(v: &T) {
    print!("{}", to_json(v));
}

fn frame_from(eps: f64, rho: C64, delta: C64) -> Result<CanonicalFrame, Failure> {
    let finite = [eps, rho.re, rho.im, delta.re, delta.im].iter().all(|x| x.is_finite());
    if !(finite && eps > 0.0 && eps < 0.5) {
        return Err(Failure::Config("eps must lie in (0, 0.5) and all parameters be finite".into()));
    }
    Ok(CanonicalFrame::from_params(eps, rho, delta)?)
}

fn cmd_classify(a: &ClassifyArgs) -> Result<(), Failure> {
    let file = a.config.as_deref().map(SweepFile::load).transpose()?;
    let inline = a.family.is_some()
        || a.rho_coeff.is_some()
        || a.rho_exp.is_some()
        || a.delta_coeff.is_some()
        || a.delta_exp.is_some();
    let family = match (&file, inline) {
        (Some(f), false) => f.family.to_spec().map_err(ConfigError::from)?,
        (file, _) => {
            let base = match file.as_ref().map(|f| f.family.to_spec()).transpose().map_err(ConfigError::from)? {
                Some(FamilySpec::PowerLaw {
                    rho_coeff,
                    rho_exp,
                    delta_coeff,
                    delta_exp,
                }) => (Some(rho_coeff), Some(rho_exp), Some(delta_coeff), Some(delta_exp)),
                Some(FamilySpec::SampleTable(_)) => {
                    return Err(Failure::Config("power-law flags cannot modify a sample table".into()))
                }
                None => (None, None, None, None),
            };
            let missing = || Failure::Config("power-law family needs --rho-coeff, --rho-exp, --delta-coeff, --delta-exp".into());
            FamilySpec::PowerLaw {
                rho_coeff: a.rho_coeff.or(base.0).ok_or_else(missing)?,
                rho_exp: a.rho_exp.or(base.1).ok_or_else(missing)?,
                delta_coeff: a.delta_coeff.or(base.2).ok_or_else(missing)?,
                delta_exp: a.delta_exp.or(base.3).ok_or_else(missing)?,
            }
        }
    };
    let schedule = a
        .schedule
        .apply(file.and_then(|f| f.eps_schedule))
        .map(|s| s.values())
        .unwrap_or_else(|| geometric_schedule(1e-1, 1e-6, 6));
    family.validate().map_err(|e| Failure::Config(e.to_string()))?;
    let c = classify(&family, &schedule)?;
    print_json(&ClassificationRecord::from(&c));
    Ok(())
}

#[derive(Serialize)]
struct GeneratorsOutput {
    frame: FrameRecord,
    ideal: IdealRecord,
    lines: Vec<PolyRecord>,
    line_product: PolyRecord,
    limit_ideals: Vec<IdealRecord>,
    standard: Option<Box<GeneratorsOutput>>,
}

fn cmd_generators(a: &FrameArgs) -> Result<(), Failure> {
    let frame = frame_from(a.eps, a.rho, a.delta)?;
    let ideal = q_generators(&frame)?;
    let lines = line_polys(&frame)?;
    let product = line_product(&frame)?;
    let mut limits = Vec::new();
    if let Ok(m) = frame.m_value() {
        limits.push(limit_ideal_ci(m));
    }
    limits.push(maximal_square());
    let standard = a.standard.then(|| {
        Box::new(GeneratorsOutput {
            frame: (&frame).into(),
            ideal: (&ideal.to_standard(&frame)).into(),
            lines: lines.iter().map(|l| (&frame_to_standard(l, &frame)).into()).collect(),
            line_product: (&frame_to_standard(&product, &frame)).into(),
            limit_ideals: limits.iter().map(|l| (&l.to_standard(&frame)).into()).collect(),
            standard: None,
        })
    });
    print_json(&GeneratorsOutput {
        frame: (&frame).into(),
        ideal: (&ideal).into(),
        lines: lines.iter().map(PolyRecord::from).collect(),
        line_product: (&product).into(),
        limit_ideals: limits.iter().map(IdealRecord::from).collect(),
        standard,
    });
    Ok(())
}

#[derive(Serialize)]
struct BoundsOutput {
    frame: FrameRecord,
    z: PointRecord,
    lower_candidates: Vec<BoundRecord>,
    lower: BoundRecord,
    upper_two_point: BoundRecord,
    upper_envelope: BoundRecord,
    sandwich_ok: bool,
}

fn cmd_bounds(a: &BoundsArgs, seed: u64) -> Result<(), Failure> {
    let frame = frame_from(a.eps, a.rho, a.delta)?;
    if !a.z.in_open_bidisk() {
        return Err(Failure::Config("--z must lie in the open bidisk".into()));
    }
    let mut cfg = GreenConfig::default();
    if let Some(b) = a.budget {
        if !(1..=plurigreen::config::MAX_BUDGET).contains(&b) {
            return Err(Failure::Config(format!("--budget must lie in 1..={}", plurigreen::config::MAX_BUDGET)));
        }
        cfg.envelope.budget = b;
    }
    if let Some(r) = a.resolution {
        let range = plurigreen_core::bipoly::MIN_RESOLUTION..=plurigreen::config::MAX_RESOLUTION;
        if !range.contains(&r) {
            return Err(Failure::Config(format!("--resolution must lie in {range:?}")));
        }
        cfg.sup_resolution = r;
    }
    cfg.envelope.seed = seed;
    let ctx = GreenContext::new(frame, cfg)?;
    let candidates = ctx.lower_bounds(a.z)?;
    let lower = ctx.lower_bound_best(a.z)?;
    let two = ctx.upper_bound_two_point(a.z)?;
    let env = ctx.upper_bound_disk_envelope(a.z)?;
    let sandwich_ok = lower.value <= two.value.min(env.value) + plurigreen_core::green::SANDWICH_TOL;
    print_json(&BoundsOutput {
        frame: (&frame).into(),
        z: a.z.into(),
        lower_candidates: candidates.iter().map(BoundRecord::from).collect(),
        lower: (&lower).into(),
        upper_two_point: (&two).into(),
        upper_envelope: (&env).into(),
        sandwich_ok,
    });
    if sandwich_ok {
        Ok(())
    } else {
        Err(Failure::Numeric("lower bound exceeds an upper bound".into()))
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Config(format!("cannot write {}: {e}", path.display())))
}

fn cmd_sweep(a: &SweepArgs, seed: Option<u64>) -> Result<(), Failure> {
    let mut file = SweepFile::load(&a.config)?;
    file.eps_schedule = a.schedule.apply(file.eps_schedule.take());
    let mut cfg = SweepConfig::from_file(&file)?;
    if let Some(b) = a.budget {
        cfg.envelope_budget = b;
    }
    if let Some(r) = a.resolution {
        cfg.sup_resolution = r;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(b) = a.target_band {
        cfg.tolerances.target_band = b;
    }
    if let Some(b) = a.formula_band {
        cfg.tolerances.formula_band = b;
    }
    if let Some(b) = a.liminf_band {
        cfg.tolerances.liminf_band = b;
    }
    let workers = a.workers.or(file.workers).unwrap_or(1);
    validate_workers(workers)?;
    cfg.validate()?;

    let report = run_sweep(&cfg, workers)?;
    let summary = SweepSummary::new(&report);
    if let Some(d) = &summary.diagnostics {
        if !d.passed {
            log::warn!("some convergence diagnostics failed; see the summary");
        }
    }
    let summary_path = a.summary.clone().unwrap_or_else(|| a.out.with_extension("json"));
    let csv = csv_string(&report);
    let json = to_json(&summary);
    write_file(&a.out, &csv)?;
    write_file(&summary_path, &json)?;
    log::info!("wrote {} rows to {}", report.rows.len(), a.out.display());
    Ok(())
}

fn cmd_verify(a: &VerifyArgs, seed: u64) -> Result<(), Failure> {
    let mut opts = VerifyOptions {
        seed,
        ..VerifyOptions::default()
    };
    if let Some(w) = a.workers {
        validate_workers(w)?;
        opts.workers = w;
    }
    let results = run_all(opts);
    for r in &results {
        println!("{r}");
    }
    if results.iter().all(|r| r.passed) {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match &cli.command {
        Command::Classify(a) => cmd_classify(a),
        Command::Generators(a) => cmd_generators(a),
        Command::Bounds(a) => cmd_bounds(a, cli.seed.unwrap_or(0)),
        Command::Sweep(a) => cmd_sweep(a, cli.seed),
        Command::Verify(a) => cmd_verify(a, cli.seed.unwrap_or(0)),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(m) => eprintln!("error: {m}"),
                Failure::Numeric(m) => eprintln!("numeric failure: {m}"),
                Failure::Verify => eprintln!("verification failed"),
            }
            ExitCode::from(f.code())
        }
    }
}
