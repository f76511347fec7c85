use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use num_rational::BigRational;
use serde::Serialize;

use deloc_core::cochain::ops::{build_delocalized_cocycle, periodicity_s, skew_symmetrize};
use deloc_core::cochain::rank::ComplexTruncation;
use deloc_core::cochain::{Flavor, UnitizedElement};
use deloc_core::group::{ClassHandle, Group, GroupRef};
use deloc_core::io::{self, LoadedCochain, Schema};
use deloc_core::pairings::{self, PairingReport};
use deloc_core::polygrowth::{growth_bound_estimate, lipschitz_check};
use deloc_core::quadrature::QuadConfig;
use deloc_core::report::{to_csv, to_json, CsvRow};
use deloc_core::spectral::{eigendecompose, load_spectrum, AlgebraElement, SpectralModel};
use deloc_core::verify::{self, Context, RunConfig, Section};
use deloc_core::{Error, Result};

const EXIT_CHECK_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 64;

#[derive(Parser, Debug)]
#[command(name = "deloc", version, about = "Delocalized cyclic cocycles and their pairings on finite models")]
struct Cli {
    #[command(flatten)]
    opts: Opts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Opts {
    /// Seed for random cochains.
    #[arg(long, global = true, default_value_t = verify::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, default_value_t = verify::DEFAULT_TOL)]
    tol: f64,
    /// Truncation radius; defaults to $DELOC_RADIUS or 8.
    #[arg(long, global = true)]
    radius: Option<usize>,
    #[arg(long, global = true, default_value_t = 40)]
    max_depth: usize,
    #[arg(long, global = true, default_value_t = 2_000_000)]
    max_evaluations: usize,
    /// Write the report here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Groups, balls and word lengths.
    Grp {
        #[command(subcommand)]
        cmd: GrpCmd,
    },
    /// Cohomology ranks of truncated complexes.
    Coh {
        #[command(subcommand)]
        cmd: CohCmd,
    },
    /// Cochain constructions.
    Cocycle {
        #[command(subcommand)]
        cmd: CocycleCmd,
    },
    /// Delocalized eta invariant of a model.
    Eta {
        #[command(subcommand)]
        cmd: EtaCmd,
    },
    /// Determinant map on an invertible path.
    Tau {
        #[command(subcommand)]
        cmd: TauCmd,
    },
    /// Chern character of an idempotent.
    Ch {
        #[command(subcommand)]
        cmd: ChCmd,
    },
    /// Identity checks.
    Verify {
        #[command(subcommand)]
        cmd: VerifyCmd,
    },
    /// Checks a file against a schema and prints diagnostics.
    Validate {
        #[arg(long, value_parser = parse_schema)]
        schema: Schema,
        file: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum GrpCmd {
    Describe {
        #[arg(long)]
        group: String,
    },
    Ball {
        #[arg(long)]
        group: String,
    },
}

#[derive(Subcommand, Debug)]
enum CohCmd {
    Rank {
        #[arg(long)]
        group: String,
        #[arg(long)]
        gamma: Option<String>,
        #[arg(long, value_parser = parse_flavor)]
        flavor: Flavor,
        #[arg(long, default_value_t = 3)]
        max_degree: usize,
    },
}

#[derive(Subcommand, Debug)]
enum CocycleCmd {
    /// Builds the delocalized cocycle of a relative cochain with a class.
    Build {
        #[arg(long)]
        alpha: PathBuf,
    },
    Skew {
        #[arg(long)]
        cochain: PathBuf,
    },
    Periodicity {
        #[arg(long)]
        cochain: PathBuf,
    },
    GrowthFit {
        #[arg(long)]
        cochain: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum EtaCmd {
    Compute {
        #[arg(long, required_unless_present = "spectrum", requires = "cocycle")]
        model: Option<PathBuf>,
        #[arg(long, requires = "model")]
        cocycle: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Externally computed spectrum, in place of a model; degree 0 only.
        #[arg(long, conflicts_with_all = ["model", "cocycle"], requires = "class")]
        spectrum: Option<PathBuf>,
        /// Class id from the spectrum file.
        #[arg(long, requires = "spectrum")]
        class: Option<String>,
    },
}

#[derive(Subcommand, Debug)]
enum TauCmd {
    Compute {
        #[arg(long)]
        path: PathBuf,
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
}

#[derive(Subcommand, Debug)]
enum ChCmd {
    Compute {
        #[arg(long)]
        idempotent: PathBuf,
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
}

#[derive(Subcommand, Debug)]
enum VerifyCmd {
    Lipschitz {
        #[arg(long)]
        group: String,
        #[arg(long)]
        gamma: String,
    },
    Transgression {
        #[arg(long)]
        model: PathBuf,
        /// Cochain of degree 2m-1.
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long, default_value_t = 1)]
        m: usize,
        #[arg(long, default_value_t = 1e-3)]
        step: f64,
    },
    SInvariance {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long, default_value_t = 0)]
        m: usize,
    },
    ApsModel {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        cocycle: PathBuf,
        #[arg(long, default_value_t = 0)]
        m: usize,
        /// Defaults to the negative spectral projection of the model.
        #[arg(long)]
        idempotent: Option<PathBuf>,
    },
    HomotopyIdentity {
        #[arg(long)]
        group: String,
        #[arg(long, default_value_t = 4)]
        max_degree: usize,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
    Averaging {
        #[arg(long)]
        group: String,
        #[arg(long)]
        gamma: String,
        #[arg(long, default_value_t = 2)]
        max_degree: usize,
        #[arg(long, default_value_t = 5)]
        count: usize,
    },
    /// Every check at desk scale from one seed.
    Suite,
}

fn parse_schema(s: &str) -> std::result::Result<Schema, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_flavor(s: &str) -> std::result::Result<Flavor, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// What a command produced: the text to write and its exit status.
struct Outcome {
    text: String,
    code: u8,
}

impl Outcome {
    fn new(text: String, passed: bool) -> Self {
        Outcome { text, code: if passed { 0 } else { EXIT_CHECK_FAILED } }
    }
}

impl Opts {
    fn config(&self) -> Result<RunConfig> {
        let c = RunConfig {
            seed: self.seed,
            tol: self.tol,
            radius: self.radius.unwrap_or_else(verify::default_radius),
            quadrature: QuadConfig { max_depth: self.max_depth, max_evaluations: self.max_evaluations },
        };
        c.validate()?;
        Ok(c)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn group(s: &str) -> Result<Group> {
    let r: GroupRef = if s.trim_start().starts_with('{') { io::parse_json(s)? } else { GroupRef::Shorthand(s.to_string()) };
    r.build()
}

fn class(g: &Group, gamma: &str, radius: usize) -> Result<ClassHandle> {
    let x = g.parse(gamma).map_err(|e| match e {
        Error::Validation { message, .. } => Error::validation("gamma", message),
        other => other,
    })?;
    g.conjugacy_class(&x, radius)
}

fn json_only(opts: &Opts) -> Result<()> {
    if opts.format == Format::Csv {
        return Err(Error::validation("format", "csv output is only available for pairing reports"));
    }
    Ok(())
}

fn section<T: Serialize>(config: &RunConfig, g: &Group, cl: Option<&ClassHandle>, report: T) -> String {
    to_json(&Section { context: Context::new(config, g, cl), report })
}

fn load_model(path: &Path) -> Result<(Group, SpectralModel)> {
    let (g, d) = io::load_element(&read(path)?)?;
    let model = eigendecompose(&g, &d)?;
    Ok((g, model))
}

fn load_cocycle(path: &Path, radius: usize, against: &Group) -> Result<LoadedCochain> {
    let l = io::load_cochain(&read(path)?, radius)?;
    if l.group.spec() != against.spec() {
        return Err(Error::validation("group", format!("cocycle group {} differs from {}", l.group.label(), against.label())));
    }
    Ok(l)
}

fn pairing_output(opts: &Opts, config: &RunConfig, g: &Group, cl: Option<&ClassHandle>, reports: Vec<PairingReport>) -> Outcome {
    let passed = reports.iter().all(|r| r.passed());
    let text = match opts.format {
        Format::Json if reports.len() == 1 => section(config, g, cl, reports.into_iter().next().expect("one report")),
        Format::Json => section(config, g, cl, reports),
        Format::Csv => to_csv(
            &reports
                .iter()
                .map(|r| CsvRow {
                    invariant: r.invariant.clone(),
                    group: g.label(),
                    gamma: cl.map(|c| g.name(&c.gamma)).unwrap_or_default(),
                    m: r.m,
                    value: r.value,
                    err: r.error,
                    t: r.truncation,
                    passed: (!r.checks.is_empty()).then(|| r.passed()),
                })
                .collect::<Vec<_>>(),
        ),
    };
    Outcome::new(text, passed)
}

#[derive(Serialize)]
struct SpectrumSection<'a> {
    config: &'a RunConfig,
    spectrum: String,
    report: &'a PairingReport,
}

#[derive(Serialize)]
struct Describe {
    label: String,
    finite: bool,
    order: Option<u64>,
    identity: String,
    generators: Vec<String>,
    ball_sizes: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    growth_degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    elements: Option<Vec<String>>,
}

#[derive(Serialize)]
struct BallEntry {
    element: String,
    length: usize,
}

#[derive(Serialize)]
struct Ball {
    radius: usize,
    size: usize,
    elements: Vec<BallEntry>,
}

#[derive(Serialize)]
struct ChReport {
    invariant: &'static str,
    m: usize,
    #[serde(serialize_with = "deloc_core::report::ser_complex")]
    value: Complex64,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<ExactValue>,
}

#[derive(Serialize)]
struct ExactValue {
    re: String,
    im: String,
}

fn exact_idempotent(a: &AlgebraElement) -> Option<UnitizedElement> {
    // Scalar (N = 1) elements with dyadic or small-denominator real entries.
    if a.n != 1 {
        return None;
    }
    let mut part = std::collections::BTreeMap::new();
    for (x, m) in &a.coeffs {
        let z = m[(0, 0)];
        let re = rational_of(z.re)?;
        let im = rational_of(z.im)?;
        part.insert(x.clone(), deloc_core::rational::qc(re, im));
    }
    let mut u = UnitizedElement::from_part(part);
    u.scalar = deloc_core::rational::qc(rational_of(a.unit.re)?, rational_of(a.unit.im)?);
    Some(u)
}

fn rational_of(x: f64) -> Option<BigRational> {
    for d in 1..=64i64 {
        let n = (x * d as f64).round();
        if (n / d as f64 - x).abs() == 0.0 {
            return Some(deloc_core::rational::q(n as i64, d));
        }
    }
    None
}

fn run_command(cli: &Cli) -> Result<Outcome> {
    let opts = &cli.opts;
    let config = opts.config()?;
    let ok = |text: String| Outcome::new(text, true);
    match &cli.command {
        Command::Grp { cmd } => {
            json_only(opts)?;
            match cmd {
                GrpCmd::Describe { group: s } => {
                    let g = group(s)?;
                    let radius = if g.is_finite() { config.radius } else { config.radius.min(6) };
                    let growth = if g.is_finite() { None } else { Some(g.growth_degree_fit(radius)?.1) };
                    let elements = match g.order() {
                        Some(n) if n <= 64 => Some(g.elements()?.iter().map(|x| g.name(x)).collect()),
                        _ => None,
                    };
                    let d = Describe {
                        label: g.label(),
                        finite: g.is_finite(),
                        order: g.order(),
                        identity: g.name(&g.identity()),
                        generators: g.generator_names(),
                        ball_sizes: g.ball_sizes(radius)?,
                        growth_degree: growth,
                        elements,
                    };
                    Ok(ok(section(&config, &g, None, d)))
                }
                GrpCmd::Ball { group: s } => {
                    let g = group(s)?;
                    let ball = g.ball(config.radius)?;
                    let elements =
                        ball.iter().map(|x| Ok(BallEntry { element: g.name(x), length: g.word_length(x)? })).collect::<Result<Vec<_>>>()?;
                    let b = Ball { radius: config.radius, size: elements.len(), elements };
                    Ok(ok(section(&config, &g, None, b)))
                }
            }
        }
        Command::Coh { cmd: CohCmd::Rank { group: s, gamma, flavor, max_degree } } => {
            json_only(opts)?;
            let g = group(s)?;
            let cl = gamma.as_deref().map(|x| class(&g, x, config.radius)).transpose()?;
            let t = ComplexTruncation::build(&g, *flavor, cl.as_ref(), *max_degree)?;
            Ok(ok(section(&config, &g, cl.as_ref(), t.report()?)))
        }
        Command::Cocycle { cmd } => {
            json_only(opts)?;
            let (path, build) = match cmd {
                CocycleCmd::Build { alpha } => (alpha, 0),
                CocycleCmd::Skew { cochain } => (cochain, 1),
                CocycleCmd::Periodicity { cochain } => (cochain, 2),
                CocycleCmd::GrowthFit { cochain } => (cochain, 3),
            };
            let l = io::load_cochain(&read(path)?, config.radius)?;
            let g = &l.group;
            let out = match build {
                0 => {
                    let cl = l.class.as_ref().ok_or_else(|| Error::validation("class", "required to build a cocycle"))?;
                    build_delocalized_cocycle(g, &l.cochain, cl)?.relabel(Flavor::CyclicDelocalized)
                }
                1 => skew_symmetrize(&l.cochain)?,
                2 => periodicity_s(g, &l.cochain, l.cochain.flavor == Flavor::CyclicDelocalized)?,
                _ => {
                    let b = growth_bound_estimate(&l.cochain, g, config.radius)?;
                    return Ok(ok(section(&config, g, l.class.as_ref(), b)));
                }
            };
            Ok(ok(io::cochain_to_json(&l.group_ref, g, &out, l.class.as_ref())))
        }
        Command::Eta { cmd: EtaCmd::Compute { spectrum: Some(path), class: Some(id), m, .. } } => {
            if *m != 0 {
                return Err(Error::validation("m", "spectrum files support m = 0 only"));
            }
            let s = load_spectrum(&read(path)?, true)?;
            let r = pairings::spectrum_eta(&s, id, config.tol, config.quadrature)?;
            let passed = r.passed();
            let text = match opts.format {
                Format::Json => to_json(&SpectrumSection { config: &config, spectrum: path.display().to_string(), report: &r }),
                Format::Csv => to_csv(&[CsvRow {
                    invariant: r.invariant.clone(),
                    group: String::new(),
                    gamma: id.clone(),
                    m: 0,
                    value: r.value,
                    err: r.error,
                    t: r.truncation,
                    passed: Some(passed),
                }]),
            };
            Ok(Outcome::new(text, passed))
        }
        Command::Eta { cmd: EtaCmd::Compute { model: Some(model), cocycle: Some(cocycle), m, .. } } => {
            let (g, model) = load_model(model)?;
            let l = load_cocycle(cocycle, config.radius, &g)?;
            let mut r = pairings::eta_invariant_with(&l.cochain, &model, *m, config.tol, config.quadrature)?;
            if *m == 0 {
                if let Some(cl) = &l.class {
                    if l.cochain == pairings::trace_cocycle(&g, cl) {
                        r.checks.push(pairings::CheckOutcome::new("sign-sum", r.value, pairings::sign_sum(&model, cl), config.tol));
                    }
                }
            }
            Ok(pairing_output(opts, &config, &g, l.class.as_ref(), vec![r]))
        }
        Command::Eta { .. } => Err(Error::validation("model", "give --model with --cocycle, or --spectrum with --class")),
        Command::Tau { cmd: TauCmd::Compute { path, cocycle, m } } => {
            let (g, p) = io::load_path(&read(path)?)?;
            let l = load_cocycle(cocycle, config.radius, &g)?;
            let r = pairings::determinant_tau_with(&g, &l.cochain, &p, *m, config.tol, config.quadrature)?;
            Ok(pairing_output(opts, &config, &g, l.class.as_ref(), vec![r]))
        }
        Command::Ch { cmd: ChCmd::Compute { idempotent, cocycle, m } } => {
            let (g, p) = io::load_element(&read(idempotent)?)?;
            let l = load_cocycle(cocycle, config.radius, &g)?;
            let value = pairings::chern_character(&g, &l.cochain, &p, *m)?;
            let exact = match exact_idempotent(&p) {
                Some(u) => {
                    let v = pairings::chern_character_exact(&g, &l.cochain, &u, *m)?;
                    Some(ExactValue { re: v.re.to_string(), im: v.im.to_string() })
                }
                None => None,
            };
            match opts.format {
                Format::Json => Ok(ok(section(&config, &g, l.class.as_ref(), ChReport { invariant: "ch", m: *m, value, exact }))),
                Format::Csv => {
                    let r = PairingReport {
                        invariant: "ch".into(),
                        m: *m,
                        value,
                        error: 0.0,
                        truncation: f64::NAN,
                        tolerance: config.tol,
                        checks: vec![],
                        provenance: Default::default(),
                    };
                    Ok(pairing_output(opts, &config, &g, l.class.as_ref(), vec![r]))
                }
            }
        }
        Command::Verify { cmd } => run_verify(cmd, opts, &config),
        Command::Validate { schema, file } => {
            json_only(opts)?;
            let diagnostics = io::validate(&read(file)?, *schema);
            let code = if diagnostics.is_empty() { 0 } else { 2 };
            let text = to_json(&serde_json::json!({ "file": file.display().to_string(), "schema": schema, "diagnostics": diagnostics }));
            Ok(Outcome { text, code })
        }
    }
}

fn run_verify(cmd: &VerifyCmd, opts: &Opts, config: &RunConfig) -> Result<Outcome> {
    let mut rng = config.rng();
    match cmd {
        VerifyCmd::Lipschitz { group: s, gamma } => {
            json_only(opts)?;
            let g = group(s)?;
            let cl = class(&g, gamma, config.radius)?;
            let r = lipschitz_check(&g, &cl.gamma, config.radius)?;
            let passed = r.passed;
            Ok(Outcome::new(section(config, &g, Some(&cl), r), passed))
        }
        VerifyCmd::Transgression { model, cocycle, m, step } => {
            let (g, model) = load_model(model)?;
            let l = load_cocycle(cocycle, config.radius, &g)?;
            let grid = [0.25, 0.5, 1.0, 1.5, 2.0];
            let r = pairings::verify_transgression(&g, &l.cochain, &model, *m, &grid, *step)?;
            Ok(pairing_output(opts, config, &g, l.class.as_ref(), vec![r]))
        }
        VerifyCmd::SInvariance { model, cocycle, m } => {
            json_only(opts)?;
            let (g, model) = load_model(model)?;
            let l = load_cocycle(cocycle, config.radius, &g)?;
            let r = pairings::verify_s_invariance(&g, &l.cochain, &model, *m, &model.projections, config.tol.max(1e-6))?;
            let passed = r.passed;
            Ok(Outcome::new(section(config, &g, l.class.as_ref(), r), passed))
        }
        VerifyCmd::ApsModel { model, cocycle, m, idempotent } => {
            let (g, model) = load_model(model)?;
            let l = load_cocycle(cocycle, config.radius, &g)?;
            let p = match idempotent {
                Some(path) => {
                    let (gp, p) = io::load_element(&read(path)?)?;
                    if gp.spec() != g.spec() {
                        return Err(Error::validation("group", "idempotent group differs from the model group"));
                    }
                    p
                }
                None => pairings::negative_projection(&model),
            };
            let r = pairings::aps_model_check(&g, &l.cochain, &p, &model, *m, config.tol.max(1e-6))?;
            Ok(pairing_output(opts, config, &g, l.class.as_ref(), vec![r]))
        }
        VerifyCmd::HomotopyIdentity { group: s, max_degree, count } => {
            json_only(opts)?;
            let g = group(s)?;
            let degrees: Vec<usize> = (1..=*max_degree).collect();
            if degrees.is_empty() {
                return Err(Error::validation("max_degree", "must be at least 1"));
            }
            let r = verify::homotopy_identity(&mut rng, &g, &degrees, *count)?;
            let passed = r.passed;
            Ok(Outcome::new(section(config, &g, None, r), passed))
        }
        VerifyCmd::Averaging { group: s, gamma, max_degree, count } => {
            json_only(opts)?;
            let g = group(s)?;
            let cl = class(&g, gamma, config.radius)?;
            let reports = (0..=*max_degree).map(|n| verify::averaging_check(&mut rng, &g, &cl, n, *count)).collect::<Result<Vec<_>>>()?;
            let passed = reports.iter().all(|r| r.passed);
            Ok(Outcome::new(section(config, &g, Some(&cl), reports), passed))
        }
        VerifyCmd::Suite => {
            json_only(opts)?;
            let r = verify::run_suite(config)?;
            let passed = r.passed;
            Ok(Outcome::new(to_json(&r), passed))
        }
    }
}

fn write(opts: &Opts, text: &str) -> Result<()> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match &opts.output {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(argv: Vec<String>) -> u8 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                ErrorKind::InvalidSubcommand
                | ErrorKind::UnknownArgument
                | ErrorKind::MissingSubcommand
                | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => 2,
            };
        }
    };
    match run_command(&cli).and_then(|o| write(&cli.opts, &o.text).map(|_| o.code)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code() as u8
        }
    }
}

fn main() -> ExitCode {
    ExitCode::from(run(std::env::args().collect()))
}
