//! `loopchar`: batch verification runs and dimension sweeps.
//!
//! Exit status: 0 all cells pass, 1 some cell mismatches, 2 invalid input,
//! 3 internal instability (truncation cap or specialization).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use loopchar_core::cartan::{CartanData, CartanError, DegreeVector, SlopeVector};
use loopchar_core::characters::{
    a_from_b_dims, b_dim_series, dims_slope_geq0, key_dims, verify_theorem, word_span_dims, Mode, RunSettings,
    VerificationReport,
};
use loopchar_core::linalg::LinalgError;
use loopchar_core::literal::parse_poly;
use loopchar_core::pairing::{pair_word, pair_word_antipode};
use loopchar_core::scalars::ScalarError;
use loopchar_core::shuffle::{word_to_element, ShuffleElement, Sign, Word};
use loopchar_core::slopes::word_span_dim;
use loopchar_core::Error;
use serde_json::json;

#[derive(Parser, Debug)]
#[command(name = "loopchar", version, about = "Exact shuffle-algebra characters, pairings and slope dimensions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Compare Gram-rank characters of L^r with the product formula cell by cell.
    VerifyTheorem(VerifyArgs),
    /// Dimension sweeps compared with their product formulas.
    Dims(DimsArgs),
    /// Exact value of the pairing between an e-word and a minus element.
    Pair(PairArgs),
    /// Positive roots of a finite-type Cartan datum.
    Roots(RootsArgs),
    /// Exponents a_n of the dimension product.
    ATable(ATableArgs),
}

#[derive(Args, Debug, Clone)]
struct CartanSource {
    /// Catalog name: A_n, B_n, C_n, D_n, E6-E8, F4, G2 (e.g. A2).
    #[arg(long = "type", value_name = "NAME", conflicts_with = "cartan_file", required_unless_present = "cartan_file")]
    type_name: Option<String>,
    /// JSON file `{"d": [[...], ...]}` holding the symmetrized matrix.
    #[arg(long, value_name = "PATH")]
    cartan_file: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Numerics {
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    mode: ModeArg,
    /// Seed for the modular specialization points.
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated primes for the modular path.
    #[arg(long, value_delimiter = ',')]
    primes: Option<Vec<u64>>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    cartan: CartanSource,
    /// Shift vector r, comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    r: String,
    /// Upper corner of the horizontal window; a single value is repeated.
    #[arg(long)]
    max_n: String,
    #[arg(long)]
    max_d: i64,
    #[command(flatten)]
    numerics: Numerics,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct DimsArgs {
    #[command(flatten)]
    cartan: CartanSource,
    #[arg(long, value_enum)]
    space: Space,
    /// Slope vector; `band` takes it twice (lower end, then upper end). Coordinates
    /// accept `a+b√2`, rationals, and the sentinels `-inf` / `inf`.
    #[arg(long, allow_hyphen_values = true)]
    p: Vec<String>,
    #[arg(long)]
    max_n: String,
    #[arg(long, default_value_t = 0)]
    max_d: i64,
    #[command(flatten)]
    numerics: Numerics,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct PairArgs {
    #[command(flatten)]
    cartan: CartanSource,
    /// Word of e-letters, e.g. "e[1,0] e[2,-1]".
    #[arg(long, allow_hyphen_values = true)]
    word: String,
    /// Minus element: a word of f-letters or a symmetric polynomial in z[i,a].
    #[arg(long, allow_hyphen_values = true)]
    minus: String,
    /// Pair against the antipode of the minus element.
    #[arg(long)]
    antipode: bool,
}

#[derive(Args, Debug)]
struct RootsArgs {
    #[command(flatten)]
    cartan: CartanSource,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ATableArgs {
    #[command(flatten)]
    cartan: CartanSource,
    #[arg(long)]
    max_n: String,
    #[command(flatten)]
    output: Output,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    Exact,
    Modular,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Space {
    SlopeGeq0,
    BSubalgebra,
    Band,
    WordSpan,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{0}")]
    Input(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl From<CartanError> for CliError {
    fn from(e: CartanError) -> Self {
        CliError::Core(e.into())
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::CapInstability(..))
            | CliError::Core(Error::Linalg(LinalgError::AllSpecializationsBad))
            | CliError::Core(Error::Scalar(ScalarError::BadSpecialization)) => 3,
            CliError::Io(_) | CliError::Csv(_) => 1,
            _ => 2,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn load_cartan(src: &CartanSource) -> CliResult<(CartanData, String)> {
    match (&src.type_name, &src.cartan_file) {
        (Some(name), _) => Ok((CartanData::catalog(name)?, name.clone())),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            Ok((CartanData::from_json(&text)?, path.display().to_string()))
        }
        (None, None) => Err(CliError::Input("one of --type or --cartan-file is required".into())),
    }
}

fn parse_vector(text: &str, rank: usize, flag: &str) -> CliResult<DegreeVector> {
    let parts = text
        .split(',')
        .map(|s| s.trim().parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Input(format!("--{flag}: expected comma-separated integers, got `{text}`")))?;
    match parts.len() {
        1 => Ok(DegreeVector::splat(rank, parts[0])),
        k if k == rank => Ok(DegreeVector::new(parts)),
        k => Err(CliError::Input(format!("--{flag}: {k} entries for rank {rank}"))),
    }
}

fn parse_slope(text: &str, rank: usize) -> CliResult<SlopeVector> {
    let p: SlopeVector = text.parse().map_err(|e| CliError::Input(format!("--p: {e}")))?;
    match &p {
        SlopeVector::Finite(coords) if coords.len() != rank => Err(CliError::Input(format!("--p: {} coordinates for rank {rank}", coords.len()))),
        _ => Ok(p),
    }
}

fn settings(n: &Numerics) -> RunSettings {
    let mode = match n.mode {
        ModeArg::Exact => Mode::Exact,
        ModeArg::Modular => Mode::Modular,
        ModeArg::Both => Mode::Both,
    };
    let mut s = RunSettings::with_mode(mode);
    if let Some(seed) = n.seed {
        s.policy.seed = seed;
    }
    if let Some(primes) = &n.primes {
        s.policy.primes = primes.clone();
    }
    s
}

fn emit(output: &Output, text: &str) -> CliResult<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn emit_report(output: &Output, mut report: VerificationReport, config: serde_json::Value) -> CliResult<ExitCode> {
    report.config = Some(config);
    let unstable: Vec<String> = report.cells.iter().filter(|c| c.modular_unstable).map(|c| format!("n={} d={}", c.n, c.d)).collect();
    if !unstable.is_empty() {
        report.notes.push(format!("specialization points disagreed at {}; exact rank used", unstable.join(", ")));
    }
    let text = match output.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
    };
    emit(output, &text)?;
    Ok(if report.pass { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn config_echo(command: &str, cartan: &str, s: &RunSettings, extra: serde_json::Value) -> serde_json::Value {
    let mut v = json!({
        "command": command,
        "cartan": cartan,
        "mode": s.mode,
        "seed": s.policy.seed,
        "primes": s.policy.primes,
    });
    if let (Some(obj), serde_json::Value::Object(more)) = (v.as_object_mut(), extra) {
        obj.extend(more);
    }
    v
}

fn cmd_verify(a: &VerifyArgs) -> CliResult<ExitCode> {
    let (c, name) = load_cartan(&a.cartan)?;
    let r = parse_vector(&a.r, c.rank(), "r")?;
    let n_max = parse_vector(&a.max_n, c.rank(), "max-n")?;
    let s = settings(&a.numerics);
    let report = verify_theorem(&c, &r, &n_max, a.max_d, &s)?;
    let config = config_echo("verify-theorem", &name, &s, json!({"r": r, "max_n": n_max, "max_d": a.max_d}));
    emit_report(&a.output, report, config)
}

fn cmd_dims(a: &DimsArgs) -> CliResult<ExitCode> {
    let (c, name) = load_cartan(&a.cartan)?;
    let n_max = parse_vector(&a.max_n, c.rank(), "max-n")?;
    let s = settings(&a.numerics);
    let slopes = a.p.iter().map(|p| parse_slope(p, c.rank())).collect::<CliResult<Vec<_>>>()?;
    let want = |k: usize| {
        if slopes.len() == k {
            Ok(())
        } else {
            Err(CliError::Input(format!("this space takes --p exactly {k} time(s)")))
        }
    };
    let report = match a.space {
        Space::SlopeGeq0 => {
            want(0)?;
            dims_slope_geq0(&c, &n_max, a.max_d, &s)?
        }
        Space::BSubalgebra => {
            want(1)?;
            b_dim_series(&c, &slopes[0], &n_max, &s)?
        }
        Space::Band => {
            want(2)?;
            key_dims(&c, &slopes[0], &slopes[1], &n_max, a.max_d, &s)?
        }
        Space::WordSpan => {
            want(0)?;
            word_span_dims(&c, &n_max, a.max_d, &s)?
        }
    };
    let space = a.space.to_possible_value().expect("no skipped variants").get_name().to_string();
    let p: Vec<String> = slopes.iter().map(ToString::to_string).collect();
    let config = config_echo("dims", &name, &s, json!({"space": space, "p": p, "max_n": n_max, "max_d": a.max_d}));
    emit_report(&a.output, report, config)
}

fn parse_minus(c: &CartanData, text: &str) -> CliResult<ShuffleElement> {
    if text.trim_start().starts_with("f[") {
        let w = Word::parse(c, text)?;
        if w.sign != Sign::Minus {
            return Err(CliError::Input("--minus expects f-letters".into()));
        }
        return Ok(word_to_element(c, &w)?);
    }
    let poly = parse_poly(text, None, c.rank()).map_err(Error::from)?;
    Ok(ShuffleElement::new(Sign::Minus, poly)?)
}

fn cmd_pair(a: &PairArgs) -> CliResult<ExitCode> {
    let (c, _) = load_cartan(&a.cartan)?;
    let w = Word::parse(&c, &a.word)?;
    if w.sign != Sign::Plus {
        return Err(CliError::Input("--word expects e-letters".into()));
    }
    let f = parse_minus(&c, &a.minus)?;
    let value = if a.antipode { pair_word_antipode(&c, &w, &f)? } else { pair_word(&c, &w, &f)? };
    println!("{value}");
    Ok(ExitCode::SUCCESS)
}

fn write_records(output: &Output, kind: &str, cartan: &str, records: &[(DegreeVector, u64)], note: Option<&str>) -> CliResult<ExitCode> {
    let text = match output.format {
        Format::Json => {
            let rows: Vec<_> = records.iter().map(|(n, v)| json!({"n": n, "value": v})).collect();
            let mut doc = json!({"kind": kind, "cartan": cartan, "records": rows});
            if let Some(note) = note {
                doc["notes"] = json!([note]);
            }
            serde_json::to_string_pretty(&doc).expect("json value serializes") + "\n"
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["n", "value"])?;
            for (n, v) in records {
                let n: Vec<String> = n.entries().iter().map(i64::to_string).collect();
                w.write_record([n.join(";"), v.to_string()])?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Input(e.to_string()))?).expect("csv output is utf-8")
        }
    };
    emit(output, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_roots(a: &RootsArgs) -> CliResult<ExitCode> {
    let (c, name) = load_cartan(&a.cartan)?;
    c.require_finite_type()?;
    let roots: Vec<(DegreeVector, u64)> = c.positive_roots()?.positive_roots.into_iter().map(|n| (n, 1)).collect();
    write_records(&a.output, "roots", &name, &roots, None)
}

fn cmd_a_table(a: &ATableArgs) -> CliResult<ExitCode> {
    let (c, name) = load_cartan(&a.cartan)?;
    let bound = parse_vector(&a.max_n, c.rank(), "max-n")?;
    if c.is_finite_type() {
        let t = c.a_table(&bound)?;
        let rows: Vec<_> = t.entries.into_iter().collect();
        return write_records(&a.output, "a-table", &name, &rows, None);
    }
    // Beyond finite type: recursion fed with degree-zero word spans.
    let mut dims = BTreeMap::new();
    for n in bound.box_below() {
        let k = if n.is_zero() { 1 } else { word_span_dim(&c, &n, 0, &vec![0; c.rank()])? as u64 };
        dims.insert(n, k);
    }
    let t = a_from_b_dims(&bound, &dims)?;
    let rows: Vec<_> = t.entries.into_iter().collect();
    write_records(&a.output, "a-table", &name, &rows, Some("exploratory: recovered from word spans; unverified beyond finite type"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::VerifyTheorem(a) => cmd_verify(a),
        Command::Dims(a) => cmd_dims(a),
        Command::Pair(a) => cmd_pair(a),
        Command::Roots(a) => cmd_roots(a),
        Command::ATable(a) => cmd_a_table(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("loopchar: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
