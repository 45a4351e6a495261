//! Command-line surface: enumeration dumps, per-field class-group data, the
//! exact local mass table, moment reports, and the verification suite.
//!
//! Exit codes: 0 success, 1 verification failure, 2 bad input (or any
//! internal error), 3 compute budget exceeded.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use monocubic::acceptance::{self, VerifyOptions};
use monocubic::class_groups::{DirectConfig, MethodTag};
use monocubic::corpus::{survey_forms, FieldOutcome, FieldRecord, SurveyMethod};
use monocubic::cubic::{enumerate_by_height, CanonicalForm, EnumerateError};
use monocubic::local::{
    family_contains, local_mass, monte_carlo_mass_check, FamilySpec, Place, SelmerStructure,
    SignatureFilter,
};
use monocubic::moments::report_from_records;
use monocubic::orders::Signature;

/// Fixed CSV schema shared by `enumerate`, `classgroups`, and
/// `moments --format csv`. `enumerate` leaves the last four columns empty.
const CSV_HEADER: &str = "I,J,a,b,c,disc,signature,cl2,cl2_plus,method,flags";

/// Monte Carlo sample count per prime for the mass spot check.
const MC_SAMPLES: u64 = 4000;

#[derive(Parser)]
#[command(
    name = "monocubic",
    version,
    about = "Monogenized cubic fields by height: enumeration, 2-class groups by two methods, local masses, and moment statistics",
    long_about = None
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump every canonical class with height <= the bound as CSV/JSON.
    Enumerate(EnumerateArgs),
    /// Compute 2-class and narrow 2-class data for every field in range.
    Classgroups(ClassgroupsArgs),
    /// Print the exact local mass table with a Monte Carlo spot check.
    Masses(MassesArgs),
    /// Moment report for a family: empirical moments, predictions, and the
    /// running first-moment series for external convergence plots.
    Moments(MomentsArgs),
    /// Run the verification suite; exits 1 if any check fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SignatureArg {
    Real,
    Complex,
    All,
}

impl From<SignatureArg> for SignatureFilter {
    fn from(s: SignatureArg) -> SignatureFilter {
        match s {
            SignatureArg::Real => SignatureFilter::TotallyReal,
            SignatureArg::Complex => SignatureFilter::Complex,
            SignatureArg::All => SignatureFilter::All,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Quartic,
    Direct,
    Both,
}

impl From<MethodArg> for SurveyMethod {
    fn from(m: MethodArg) -> SurveyMethod {
        match m {
            MethodArg::Quartic => SurveyMethod::Quartic,
            MethodArg::Direct => SurveyMethod::Direct,
            MethodArg::Both => SurveyMethod::Both,
        }
    }
}

#[derive(Args)]
struct EnumerateArgs {
    /// Upper height bound (natural scale, max(|I|^3, J^2/4)).
    #[arg(long)]
    height_bound: u128,
    /// Keep only this signature.
    #[arg(long, value_enum, default_value_t = SignatureArg::All)]
    signature: SignatureArg,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Abort with exit code 3 if the run exceeds this many milliseconds.
    #[arg(long)]
    budget_ms: Option<u64>,
}

#[derive(Args)]
struct ClassgroupsArgs {
    /// Upper height bound (natural scale, max(|I|^3, J^2/4)).
    #[arg(long)]
    height_bound: u128,
    /// Keep only this signature.
    #[arg(long, value_enum, default_value_t = SignatureArg::All)]
    signature: SignatureArg,
    /// Class-group machinery: quartic-orbit counts, the direct
    /// relation-matrix oracle, or both cross-validated.
    #[arg(long, value_enum, default_value_t = MethodArg::Both)]
    method: MethodArg,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Abort with exit code 3 if the run exceeds this many milliseconds.
    #[arg(long)]
    budget_ms: Option<u64>,
}

#[derive(Args)]
struct MassesArgs {
    /// Seed for the Monte Carlo spot check of the finite-place identity.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// Only json is meaningful here.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Args)]
struct MomentsArgs {
    /// Upper height bound X (natural scale).
    #[arg(long)]
    height_bound: u128,
    /// Family specification JSON file; mutually exclusive with --signature.
    #[arg(long)]
    family: Option<PathBuf>,
    /// Shortcut for a family with only a signature condition.
    #[arg(long, value_enum)]
    signature: Option<SignatureArg>,
    /// Class-group machinery for the survey.
    #[arg(long, value_enum, default_value_t = MethodArg::Quartic)]
    method: MethodArg,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    output: Option<PathBuf>,
    /// json: the moment report; csv: the per-field rows behind it.
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Abort with exit code 3 if the run exceeds this many milliseconds.
    #[arg(long)]
    budget_ms: Option<u64>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Height bound for the cross-validated corpus checks.
    #[arg(long, default_value_t = 10_000)]
    height_bound: u128,
    /// Worker threads (defaults to all cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Abort with exit code 3 if the run exceeds this many milliseconds.
    #[arg(long)]
    budget_ms: Option<u64>,
}

// ---------------------------------------------------------------------------
// Error-to-exit-code plumbing.
// ---------------------------------------------------------------------------

enum CliError {
    /// Unusable flags, paths, or inputs out of supported range: exit 2.
    BadInput(String),
    /// The --budget-ms deadline passed: exit 3.
    BudgetExceeded,
    /// A verification criterion failed: exit 1.
    VerificationFailed,
}

impl CliError {
    fn exit(self) -> ExitCode {
        match self {
            CliError::BadInput(msg) => {
                eprintln!("error: {msg}");
                ExitCode::from(2)
            }
            CliError::BudgetExceeded => {
                eprintln!("error: compute budget exceeded");
                ExitCode::from(3)
            }
            CliError::VerificationFailed => ExitCode::from(1),
        }
    }
}

fn bad_input(e: impl std::fmt::Display) -> CliError {
    CliError::BadInput(e.to_string())
}

/// Soft deadline checked between work blocks and before output is written.
#[derive(Clone, Copy)]
struct Budget {
    deadline: Option<Instant>,
}

impl Budget {
    fn new(ms: Option<u64>) -> Budget {
        Budget {
            deadline: ms.map(|m| Instant::now() + Duration::from_millis(m)),
        }
    }

    fn check(&self) -> Result<(), CliError> {
        match self.deadline {
            Some(d) if Instant::now() > d => Err(CliError::BudgetExceeded),
            _ => Ok(()),
        }
    }
}

/// Run `f` inside a worker pool of the requested width. Without an explicit
/// --jobs the global default pool (all cores) is used.
fn with_pool<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> Result<T, CliError> + Send,
) -> Result<T, CliError> {
    match jobs {
        None => f(),
        Some(0) => Err(CliError::BadInput("--jobs must be >= 1".into())),
        Some(_n) => {
            #[cfg(feature = "parallel")]
            {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(_n)
                    .build()
                    .map_err(bad_input)?;
                pool.install(f)
            }
            #[cfg(not(feature = "parallel"))]
            f()
        }
    }
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| CliError::BadInput(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// Row rendering.
// ---------------------------------------------------------------------------

fn signature_label(disc: i128) -> &'static str {
    if disc > 0 {
        "real"
    } else {
        "complex"
    }
}

fn method_label(m: MethodTag) -> &'static str {
    match m {
        MethodTag::Quartic => "quartic",
        MethodTag::Direct => "direct",
        MethodTag::BothAgree => "both",
    }
}

#[derive(serde::Serialize)]
struct JsonRow<'a> {
    #[serde(rename = "I")]
    i: i128,
    #[serde(rename = "J")]
    j: i128,
    a: i128,
    b: i128,
    c: i128,
    disc: i128,
    signature: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    cl2: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cl2_plus: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<&'static str>,
    flags: Vec<&'a str>,
}

impl<'a> JsonRow<'a> {
    fn csv_line(&self) -> String {
        let opt_u64 = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.i,
            self.j,
            self.a,
            self.b,
            self.c,
            self.disc,
            self.signature,
            opt_u64(self.cl2),
            opt_u64(self.cl2_plus),
            self.method.unwrap_or(""),
            self.flags.join(";")
        )
    }
}

fn record_row(r: &FieldRecord) -> JsonRow<'_> {
    let (cl2, cl2_plus, method) = match &r.outcome {
        FieldOutcome::Included { data, .. } => (
            Some(data.cl2_size),
            Some(data.cl2_plus_size),
            Some(method_label(data.method)),
        ),
        FieldOutcome::Excluded(_) => (None, None, None),
    };
    JsonRow {
        i: r.i,
        j: r.j,
        a: r.a,
        b: r.b,
        c: r.c,
        disc: r.disc,
        signature: signature_label(r.disc),
        cl2,
        cl2_plus,
        method,
        flags: r.flags(),
    }
}

fn render_rows(rows: &[JsonRow<'_>], format: Format) -> Result<String, CliError> {
    match format {
        Format::Csv => {
            let mut out = String::with_capacity(32 * rows.len() + 64);
            out.push_str(CSV_HEADER);
            out.push('\n');
            for row in rows {
                let _ = writeln!(out, "{}", row.csv_line());
            }
            Ok(out)
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(rows).map_err(bad_input)?;
            s.push('\n');
            Ok(s)
        }
    }
}

// ---------------------------------------------------------------------------
// Subcommand bodies.
// ---------------------------------------------------------------------------

fn enumerate_classes(x: u128) -> Result<Vec<CanonicalForm>, CliError> {
    enumerate_by_height(x).map_err(|e| match e {
        EnumerateError::HeightTooLarge { .. } => bad_input(e),
        other => bad_input(other),
    })
}

fn signature_matches(filter: SignatureFilter, disc: i128) -> bool {
    let sig = if disc > 0 {
        Signature::TotallyReal
    } else {
        Signature::Complex
    };
    filter.matches(sig)
}

fn run_enumerate(args: EnumerateArgs) -> Result<(), CliError> {
    let budget = Budget::new(args.budget_ms);
    let classes = enumerate_classes(args.height_bound)?;
    budget.check()?;
    let filter: SignatureFilter = args.signature.into();
    let mut rows = Vec::new();
    for cf in &classes {
        let f = cf.form;
        let (i, j) = f.invariants().map_err(bad_input)?;
        let disc = f.disc().map_err(bad_input)?;
        if !signature_matches(filter, disc) {
            continue;
        }
        rows.push(JsonRow {
            i,
            j,
            a: f.a,
            b: f.b,
            c: f.c,
            disc,
            signature: signature_label(disc),
            cl2: None,
            cl2_plus: None,
            method: None,
            flags: Vec::new(),
        });
    }
    rows.sort_by_key(|r| (r.i, r.j));
    budget.check()?;
    emit(&args.output, &render_rows(&rows, args.format)?)
}

/// Survey in blocks of canonical classes so the budget deadline is honored
/// at block granularity; the merged output is sorted by (I, J) regardless of
/// block or thread scheduling.
fn budgeted_survey(
    classes: &[CanonicalForm],
    method: SurveyMethod,
    cfg: &DirectConfig,
    budget: Budget,
) -> Result<Vec<FieldRecord>, CliError> {
    const BLOCK: usize = 256;
    let mut records = Vec::with_capacity(classes.len());
    for block in classes.chunks(BLOCK) {
        budget.check()?;
        records.extend(survey_forms(block, method, cfg).map_err(bad_input)?);
    }
    records.sort_by_key(|r| (r.i, r.j));
    Ok(records)
}

fn run_classgroups(args: ClassgroupsArgs) -> Result<(), CliError> {
    let budget = Budget::new(args.budget_ms);
    let classes = enumerate_classes(args.height_bound)?;
    let cfg = DirectConfig::default();
    let method: SurveyMethod = args.method.into();
    let records = with_pool(args.jobs, || {
        budgeted_survey(&classes, method, &cfg, budget)
    })?;
    let filter: SignatureFilter = args.signature.into();
    let rows: Vec<JsonRow<'_>> = records
        .iter()
        .filter(|r| signature_matches(filter, r.disc))
        .map(record_row)
        .collect();
    budget.check()?;
    emit(&args.output, &render_rows(&rows, args.format)?)
}

fn rat_str(v: num_rational::Rational64) -> String {
    v.to_string()
}

fn run_masses(args: MassesArgs) -> Result<(), CliError> {
    if args.format == Format::Csv {
        return Err(CliError::BadInput(
            "masses is a nested exact-rational table; only --format json is supported".into(),
        ));
    }
    let mass = |s, sig, v| local_mass(s, sig, v).map_err(bad_input).map(rat_str);
    let unram_real = mass(
        SelmerStructure::Unramified,
        Signature::TotallyReal,
        Place::Infinity,
    )?;
    let unram_complex = mass(
        SelmerStructure::Unramified,
        Signature::Complex,
        Place::Infinity,
    )?;
    let relaxed_real = mass(
        SelmerStructure::SolubleAtInfinity,
        Signature::TotallyReal,
        Place::Infinity,
    )?;
    // Every finite place carries mass 1 for both structures; evaluate a few
    // primes and insist they agree before printing the common value.
    let mut finite = BTreeMap::new();
    for p in [2u64, 3, 5, 7, 11] {
        let m = mass(SelmerStructure::Unramified, Signature::Complex, Place::Finite(p))?;
        let m2 = mass(
            SelmerStructure::SolubleAtInfinity,
            Signature::TotallyReal,
            Place::Finite(p),
        )?;
        if m != m2 {
            return Err(CliError::BadInput(format!(
                "finite mass mismatch at p = {p}: {m} vs {m2}"
            )));
        }
        finite.insert(p.to_string(), m);
    }
    let mut mc = Vec::new();
    for p in [2u64, 3, 5] {
        let observed = monte_carlo_mass_check(p, MC_SAMPLES, args.seed).map_err(bad_input)?;
        mc.push(serde_json::json!({
            "p": p,
            "samples": MC_SAMPLES,
            "seed": args.seed,
            "observed": rat_str(observed),
            "expected": "1",
            "matches": rat_str(observed) == "1",
        }));
    }
    let doc = serde_json::json!({
        "masses": {
            "unramified": {
                "infinity": { "real": unram_real, "complex": unram_complex },
                "finite": finite,
            },
            "soluble_at_infinity": {
                "infinity": { "real": relaxed_real },
                "finite": "1",
            },
        },
        "total": {
            "unramified": { "real": unram_real, "complex": unram_complex },
            "soluble_at_infinity": { "real": relaxed_real },
        },
        "finite_place_identity_check": mc,
    });
    let mut s = serde_json::to_string_pretty(&doc).map_err(bad_input)?;
    s.push('\n');
    emit(&args.output, &s)
}

fn run_moments(args: MomentsArgs) -> Result<(), CliError> {
    let budget = Budget::new(args.budget_ms);
    let spec = match (&args.family, args.signature) {
        (Some(_), Some(_)) => {
            return Err(CliError::BadInput(
                "--family and --signature are mutually exclusive".into(),
            ))
        }
        (Some(path), None) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::BadInput(format!("reading {}: {e}", path.display())))?;
            FamilySpec::from_json_str(&text).map_err(bad_input)?
        }
        (None, sig) => FamilySpec {
            signature_filter: sig.unwrap_or(SignatureArg::All).into(),
            ..FamilySpec::default()
        },
    };
    let classes = enumerate_classes(args.height_bound)?;
    let cfg = DirectConfig::default();
    let method: SurveyMethod = args.method.into();
    let records = with_pool(args.jobs, || {
        budgeted_survey(&classes, method, &cfg, budget)
    })?;
    budget.check()?;
    let content = match args.format {
        Format::Json => {
            let report = report_from_records(args.height_bound, &spec, &cfg, &records)
                .map_err(bad_input)?;
            let mut s = serde_json::to_string_pretty(&report).map_err(bad_input)?;
            s.push('\n');
            s
        }
        Format::Csv => {
            // The per-field rows behind the report: family members only.
            let mut rows = Vec::new();
            for r in &records {
                let f = monocubic::cubic::MonicCubic::new(r.a, r.b, r.c);
                let cls = monocubic::orders::classify(&f, cfg.rho_budget).map_err(bad_input)?;
                if family_contains(&spec, &f, &cls).map_err(bad_input)? {
                    rows.push(record_row(r));
                }
            }
            render_rows(&rows, Format::Csv)?
        }
    };
    emit(&args.output, &content)
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let budget = Budget::new(args.budget_ms);
    let opts = VerifyOptions {
        height_bound: args.height_bound,
        ..VerifyOptions::default()
    };
    let reports = with_pool(args.jobs, || {
        let mut reports = Vec::new();
        for step in acceptance::CRITERIA {
            budget.check()?;
            let report = (step.run)(&opts);
            println!("{report}");
            reports.push(report);
        }
        Ok(reports)
    })?;
    if reports.iter().all(|r| r.passed) {
        println!("verification suite: all {} criteria passed", reports.len());
        Ok(())
    } else {
        let failed = reports.iter().filter(|r| !r.passed).count();
        println!("verification suite: {failed} criterion(s) FAILED");
        Err(CliError::VerificationFailed)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Enumerate(args) => run_enumerate(args),
        Command::Classgroups(args) => run_classgroups(args),
        Command::Masses(args) => run_masses(args),
        Command::Moments(args) => run_moments(args),
        Command::Verify(args) => run_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.exit(),
    }
}
