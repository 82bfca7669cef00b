//! Command-line driver: local constants, the verification grid, global constants
//! and epsilon factors, printed as versioned JSON or as a plain table.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use triple_local::characters::{epsilon_factor, AdditiveCharacter, MultiplicativeCharacter, UnitChar};
use triple_local::global::{assemble_from_locals, global_constant, GlobalInput, Rational};
use triple_local::padic::{is_prime, set_precision_floor};
use triple_local::triple::{closed_i_prime, local_i_prime, local_i_prime_unchecked, Mode};
use triple_local::verify::{self, sample_spec, SampleKind, SuiteId, VerifyConfig, SCHEMA_VERSION};
use triple_local::{par, Error};

const EXIT_USAGE: u8 = 1;
const EXIT_MISMATCH: u8 = 2;

#[derive(Parser)]
#[command(name = "triple-local", version, about = "Local trilinear period constants for GL(2) over Q_p")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Report wall-clock timings instead of null, which makes output vary between runs.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Brute-force and closed-form I′ at one local datum.
    LocalConstant(LocalArgs),
    /// Run the verification suites.
    Verify(VerifyArgs),
    /// The global constant and its product-of-locals form.
    GlobalConstant(GlobalArgs),
    /// Epsilon factor of a ramified character.
    Epsilon(EpsilonArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    #[value(alias = "st", alias = "special")]
    Steinberg,
    #[value(alias = "sph")]
    Spherical,
    #[value(name = "sc", alias = "supercuspidal")]
    Supercuspidal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Bruteforce,
    Closed,
    Both,
}

#[derive(Args)]
struct LocalArgs {
    #[arg(long)]
    p: u64,
    /// Conductor of ω1.
    #[arg(long)]
    m: u32,
    #[arg(long, value_enum)]
    kind: Kind,
    /// Conductor of a supercuspidal π3.
    #[arg(long)]
    c: Option<u32>,
    /// Supercuspidal π3 with π3 ≃ π3 ⊗ η for the unramified quadratic η.
    #[arg(long)]
    unramified: bool,
    /// Take C_1 = −1 in the supercuspidal epsilon data.
    #[arg(long)]
    c1_negative: bool,
    #[arg(long, default_value_t = 0)]
    l1: u32,
    #[arg(long, default_value_t = 0)]
    l2: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    mode: ModeArg,
    /// Allow translates past the proven range.
    #[arg(long)]
    extended: bool,
    #[arg(long, default_value_t = verify::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Steinberg twist ω3(p) = −1.
    #[arg(long)]
    omega3_negative: bool,
    /// Spherical |ω3(p)|.
    #[arg(long, default_value_t = 1.0)]
    omega3_modulus: f64,
    /// Spherical arg ω3(p) in turns.
    #[arg(long, default_value_t = 0.0)]
    omega3_phase: f64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suites to run, by name or number, comma separated.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
    #[arg(long, default_value_t = verify::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Worker threads; 0 uses the default pool.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct GlobalArgs {
    /// Negative fundamental discriminant.
    #[arg(long = "D", allow_hyphen_values = true)]
    d: i64,
    #[arg(long)]
    q1: i64,
    /// 2 is an unramified dihedral supercuspidal prime.
    #[arg(long)]
    unramified2: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CharArg {
    Quadratic,
    Random,
}

#[derive(Args)]
struct EpsilonArgs {
    #[arg(long)]
    p: u64,
    #[arg(long)]
    conductor: u32,
    #[arg(long, default_value_t = 0.5)]
    s: f64,
    #[arg(long = "char", value_enum, default_value_t = CharArg::Quadratic)]
    character: CharArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Usage(String),
    Mismatch(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    if let Err(msg) = apply_precision_floor() {
        eprintln!("error: {msg}");
        return ExitCode::from(EXIT_USAGE);
    }
    let result = match &cli.command {
        Command::LocalConstant(a) => local_constant(a),
        Command::Verify(a) => run_verify(a),
        Command::GlobalConstant(a) => global(a),
        Command::Epsilon(a) => epsilon(a),
    };
    let (output, failure) = match result {
        Ok((v, f)) => (Some(v), f),
        Err(f) => (None, Some(f)),
    };
    if let Some(mut v) = output {
        if !cli.timings {
            strip_timings(&mut v);
        }
        let mut text = match cli.format {
            Format::Json => serde_json::to_string_pretty(&v).expect("serializable output"),
            Format::Table => {
                let mut out = String::new();
                write_table(&v, "", &mut out);
                out
            }
        };
        if !text.ends_with('\n') {
            text.push('\n');
        }
        let _ = std::io::stdout().write_all(text.as_bytes());
    }
    match failure {
        None => ExitCode::SUCCESS,
        Some(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Some(Failure::Mismatch(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_MISMATCH)
        }
    }
}

type Outcome = Result<(Value, Option<Failure>), Failure>;

fn apply_precision_floor() -> Result<(), String> {
    match std::env::var("PRECISION_FLOOR") {
        Ok(raw) => {
            let floor = raw
                .trim()
                .parse::<u32>()
                .map_err(|_| format!("PRECISION_FLOOR must be a non-negative integer, got {raw:?}"))?;
            set_precision_floor(floor);
            Ok(())
        }
        Err(_) => Ok(()),
    }
}

fn rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn check_tolerance(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("tolerance must be positive, got {tol}")))
    }
}

fn local_constant(a: &LocalArgs) -> Outcome {
    check_tolerance(a.tolerance)?;
    let kind = match a.kind {
        Kind::Steinberg => SampleKind::Steinberg { negative: a.omega3_negative },
        Kind::Spherical => SampleKind::Spherical { modulus: a.omega3_modulus, phase: a.omega3_phase },
        Kind::Supercuspidal => {
            let c = a.c.ok_or_else(|| Failure::Usage("--kind sc needs --c".into()))?;
            SampleKind::Supercuspidal { c, unramified: a.unramified, c1_negative: a.c1_negative }
        }
    };
    let spec = sample_spec(a.p, a.m, kind, a.l1, a.l2, a.seed)?;
    let mode = match a.mode {
        ModeArg::Bruteforce => Mode::Bruteforce,
        ModeArg::Closed => Mode::Closed,
        ModeArg::Both => Mode::Both,
    };
    let record = if a.extended { local_i_prime_unchecked(&spec, mode)? } else { local_i_prime(&spec, mode)? };
    let mut v = json!({ "schema_version": SCHEMA_VERSION });
    merge(&mut v, serde_json::to_value(&record).expect("serializable record"));
    v["I_prime_closed_exact"] = json!(rational(&closed_i_prime(&spec)));
    let failure = record
        .abs_err
        .filter(|e| e.is_nan() || *e > a.tolerance)
        .map(|e| Failure::Mismatch(format!("mismatch: |bruteforce − closed| = {e:.3e} > {:.1e}", a.tolerance)));
    Ok((v, failure))
}

fn run_verify(a: &VerifyArgs) -> Outcome {
    check_tolerance(a.tolerance)?;
    let only = if a.only.is_empty() {
        None
    } else {
        Some(a.only.iter().map(|s| s.trim().parse::<SuiteId>()).collect::<Result<BTreeSet<_>, _>>()?)
    };
    let config = VerifyConfig { tolerance: a.tolerance, seed: a.seed, only };
    let report = par::with_jobs(a.jobs, || verify::run(&config));
    let failure = (!report.passed).then(|| {
        let lines: Vec<String> = report
            .suites
            .iter()
            .flat_map(|s| s.failures.iter().map(move |f| format!("[{}] {}: {f}", s.id, s.name)))
            .collect();
        Failure::Mismatch(format!("{} failing points\n{}", lines.len(), lines.join("\n")))
    });
    Ok((serde_json::to_value(&report).expect("serializable report"), failure))
}

fn global(a: &GlobalArgs) -> Outcome {
    let g = GlobalInput::new(a.d, a.q1, a.unramified2)?;
    let theorem = global_constant(&g);
    let locals = assemble_from_locals(&g);
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "D": a.d,
        "q1": a.q1,
        "unramified2": a.unramified2,
        "global_constant": rational(&theorem),
        "assembled_from_locals": rational(&locals),
        "consistent": theorem == locals,
    });
    Ok((v, None))
}

fn epsilon(a: &EpsilonArgs) -> Outcome {
    if !is_prime(a.p) {
        return Err(Failure::Usage(format!("{} is not prime", a.p)));
    }
    if a.conductor == 0 {
        return Err(Failure::Usage("conductor must be at least 1".into()));
    }
    let omega = match a.character {
        CharArg::Quadratic => {
            let unit =
                UnitChar::all_of_level(a.p, a.conductor).into_iter().find(|chi| chi.pow(2).is_trivial()).ok_or_else(
                    || Failure::Usage(format!("no quadratic character of conductor {} at p = {}", a.conductor, a.p)),
                )?;
            MultiplicativeCharacter::from_unit(unit)
        }
        CharArg::Random => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(a.seed);
            verify::random_unitary(a.p, a.conductor, &mut rng)
                .ok_or_else(|| Failure::Usage(format!("no character of conductor {} at p = {}", a.conductor, a.p)))?
        }
    };
    let eps = epsilon_factor(a.s, &omega, &AdditiveCharacter::standard(a.p))?;
    let v = json!({
        "schema_version": SCHEMA_VERSION,
        "p": a.p,
        "s": a.s,
        "re": eps.re,
        "im": eps.im,
        "modulus": eps.norm(),
        "conductor": omega.conductor(),
    });
    Ok((v, None))
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn strip_timings(v: &mut Value) {
    match v {
        Value::Object(map) => {
            if let Some(t) = map.get_mut("wall_time_ms") {
                *t = Value::Null;
            }
            map.values_mut().for_each(strip_timings);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_timings),
        _ => {}
    }
}

fn write_table(v: &Value, prefix: &str, out: &mut String) {
    match v {
        Value::Object(map) => {
            for (k, x) in map {
                let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                write_table(x, &key, out);
            }
        }
        Value::Array(items) => {
            if items.is_empty() {
                let _ = writeln!(out, "{prefix:<40} []");
            }
            for (i, x) in items.iter().enumerate() {
                write_table(x, &format!("{prefix}[{i}]"), out);
            }
        }
        Value::String(s) => {
            let _ = writeln!(out, "{prefix:<40} {s}");
        }
        other => {
            let _ = writeln!(out, "{prefix:<40} {other}");
        }
    }
}
