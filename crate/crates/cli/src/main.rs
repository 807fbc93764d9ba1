//! `kloo`: evaluate, count, verify and tabulate matrix Kloosterman sums.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use kloo_core::campaign::{run_suite, table_rows, Grid, Suite};
use kloo_core::counting::{count_report, CountMethod};
use kloo_core::gaussmat::{gauss_bound, gauss_brute, gauss_closed_details};
use kloo_core::kloosterman::{eval_brute_with, eval_reduced_with, eval_salie_with, main_bounds, EvalResult};
use kloo_core::matrixcore::ModMatrix;
use kloo_core::modring::Modulus;
use kloo_core::par::Exec;
use kloo_core::Error;

#[derive(Parser)]
#[command(name = "kloo", version, about = "Exact matrix Kloosterman sums and their bounds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate K_n(A,B;p^k).
    Eval(EvalArgs),
    /// Count X in GL_n(Z/p^l) with XAX = B.
    Count(CountArgs),
    /// Matrix Gauss sum over U mod p of e(Tr(SU + TU²)/p).
    Gauss(GaussArgs),
    /// Upper-bound envelopes for an instance.
    Bounds(BoundsArgs),
    /// Run seeded verification suites.
    Verify(VerifyArgs),
    /// Write a CSV table over an instance grid.
    Table(TableArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum EvalMethodArg {
    Brute,
    Reduced,
    Salie,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Parser)]
struct EvalArgs {
    /// Matrix size; inferred from --a when omitted.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    /// Rows separated by ';', entries by ','.
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
    #[arg(long, value_enum, default_value = "brute")]
    method: EvalMethodArg,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountMethodArg {
    Brute,
    Closed,
    Lifted,
}

#[derive(Parser)]
struct CountArgs {
    #[arg(long)]
    p: u64,
    /// Level: count modulo p^l.
    #[arg(long, default_value_t = 1)]
    l: u32,
    /// Shorthand for --a C --b C.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, value_enum, default_value = "brute")]
    method: CountMethodArg,
}

#[derive(Parser)]
struct GaussArgs {
    #[arg(long)]
    p: u64,
    #[arg(long, allow_hyphen_values = true)]
    s: String,
    #[arg(long, allow_hyphen_values = true)]
    t: String,
}

#[derive(Parser)]
struct BoundsArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    p: u64,
    #[arg(long, default_value_t = 1)]
    k: u32,
    #[arg(long, allow_hyphen_values = true)]
    a: String,
    #[arg(long, allow_hyphen_values = true)]
    b: String,
}

#[derive(Parser)]
struct VerifyArgs {
    /// evaluators, counting, gauss, bounds, sylvester or all.
    #[arg(long, default_value = "all")]
    suite: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Skip the remaining suites once this much time has passed.
    #[arg(long)]
    budget_seconds: Option<u64>,
}

#[derive(Parser)]
struct TableArgs {
    /// For example "n=2;p=3,5;k=1..3;samples=20".
    #[arg(long, default_value = "")]
    grid: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Core(Error),
    Io(String),
    Verify,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::NotPrime(_) | Error::ModulusTooLarge { .. } | Error::DimensionMismatch(_) => 2,
        Error::TooLarge { .. } => 3,
        Error::NotRegularSemisimple
        | Error::EvenCharacteristic
        | Error::SingularLift
        | Error::BothZero
        | Error::InvalidInput(_)
        | Error::NotAUnit { .. }
        | Error::NotInvertible => 4,
        _ => 1,
    }
}

fn matrix(text: &str, r: Modulus, n: Option<usize>) -> Result<ModMatrix, Error> {
    let m = ModMatrix::parse(text, r)?;
    match n {
        Some(n) if n != m.n() => Err(Error::Parse(format!("{text:?} is {0}x{0}, expected n = {n}", m.n()))),
        _ => Ok(m),
    }
}

fn print_json(v: &impl Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn eval_one(method: EvalMethodArg, a: &ModMatrix, b: &ModMatrix) -> Result<EvalResult, Error> {
    match method {
        EvalMethodArg::Brute => eval_brute_with(Exec::Parallel, a, b),
        EvalMethodArg::Reduced => eval_reduced_with(Exec::Parallel, a, b),
        EvalMethodArg::Salie => eval_salie_with(Exec::Parallel, a, b),
        EvalMethodArg::All => unreachable!(),
    }
}

fn with_timing(res: &EvalResult, elapsed: f64) -> Value {
    let mut v = serde_json::to_value(res).expect("serializable");
    v["elapsed_ms"] = json!(elapsed);
    v
}

fn cmd_eval(args: EvalArgs) -> Result<(), Failure> {
    let r = Modulus::new(args.p, args.k)?;
    let (a, b) = (matrix(&args.a, r, args.n)?, matrix(&args.b, r, args.n)?);
    if a.n() != b.n() {
        return Err(Error::Parse("A and B differ in size".into()).into());
    }
    let methods = match args.method {
        EvalMethodArg::All => vec![EvalMethodArg::Brute, EvalMethodArg::Reduced, EvalMethodArg::Salie],
        m => vec![m],
    };
    let single = methods.len() == 1;
    let mut results = Vec::new();
    let mut skipped = Vec::new();
    for m in methods {
        let start = Instant::now();
        match eval_one(m, &a, &b) {
            Ok(res) => results.push((res, start.elapsed().as_secs_f64() * 1e3)),
            Err(e) if !single && exit_code(&e) == 4 => {
                skipped.push(json!({"method": format!("{:?}", m).to_lowercase(), "reason": e.to_string()}))
            }
            Err(e) => return Err(e.into()),
        }
    }
    if let Format::Csv = args.format {
        let mut w = csv::Writer::from_writer(std::io::stdout());
        w.write_record(["n", "p", "k", "A", "B", "method", "re", "im", "abs"])?;
        for (res, _) in &results {
            let i = &res.instance;
            let method = serde_json::to_value(res.method).expect("serializable");
            w.write_record([
                i.n.to_string(),
                i.p.to_string(),
                i.k.to_string(),
                i.a.clone(),
                i.b.clone(),
                method.as_str().unwrap_or_default().to_string(),
                kloo_core::campaign::sig15(res.value.re),
                kloo_core::campaign::sig15(res.value.im),
                kloo_core::campaign::sig15(res.value.abs),
            ])?;
        }
        w.flush()?;
        return Ok(());
    }
    if single {
        let (res, t) = &results[0];
        print_json(&with_timing(res, *t));
        return Ok(());
    }
    let mut pairs = Vec::new();
    for i in 0..results.len() {
        for j in i + 1..results.len() {
            let (x, y) = (&results[i].0, &results[j].0);
            pairs.push(json!({
                "a": x.method, "b": y.method, "agree": x.sum.value_eq(&y.sum),
            }));
        }
    }
    let agree = pairs.iter().all(|p| p["agree"] == json!(true));
    print_json(&json!({
        "results": results.iter().map(|(r, t)| with_timing(r, *t)).collect::<Vec<_>>(),
        "skipped": skipped,
        "pairs": pairs,
        "agree": agree,
    }));
    Ok(())
}

fn cmd_count(args: CountArgs) -> Result<(), Failure> {
    let r = Modulus::new(args.p, args.l)?;
    let (a, b) = match (&args.c, &args.a, &args.b) {
        (Some(c), None, None) => (matrix(c, r, None)?, matrix(c, r, None)?),
        (None, Some(a), Some(b)) => (matrix(a, r, None)?, matrix(b, r, None)?),
        _ => return Err(Error::Parse("give either --c or both --a and --b".into()).into()),
    };
    let method = match args.method {
        CountMethodArg::Brute => CountMethod::Brute,
        CountMethodArg::Closed => CountMethod::Closed,
        CountMethodArg::Lifted => CountMethod::Lifted,
    };
    print_json(&count_report(&a, &b, method, Exec::Parallel)?);
    Ok(())
}

fn cmd_gauss(args: GaussArgs) -> Result<(), Failure> {
    let r = Modulus::prime(args.p)?;
    let (s, t) = (matrix(&args.s, r, None)?, matrix(&args.t, r, None)?);
    let brute = gauss_brute(&s, &t)?;
    let mut out = serde_json::to_value(brute.to_json(true)).expect("serializable");
    if args.p != 2 {
        let closed = gauss_closed_details(&s, &t)?;
        out["closed"] = serde_json::to_value(closed.value).expect("serializable");
        out["rank"] = json!(closed.rank);
        out["agree"] = json!(closed.value.to_charsum(args.p)?.value_eq(&brute));
    }
    let env = gauss_bound(&t);
    out["envelope"] = json!({"name": env.name, "value": env.to_string(), "holds": env.dominates_magnitude(brute.magnitude())});
    print_json(&out);
    Ok(())
}

fn cmd_bounds(args: BoundsArgs) -> Result<(), Failure> {
    let r = Modulus::new(args.p, args.k)?;
    let (a, b) = (matrix(&args.a, r, args.n)?, matrix(&args.b, r, args.n)?);
    let env = main_bounds(&a, &b)?;
    let rows: Vec<Value> = env
        .iter()
        .map(|e| json!({"name": e.name, "envelope": e.to_string(), "value": e.value_f64(), "applicable": e.applicable}))
        .collect();
    print_json(&json!({"n": a.n(), "p": args.p, "k": args.k, "envelopes": rows}));
    Ok(())
}

fn cmd_verify(args: VerifyArgs) -> Result<(), Failure> {
    let suites = if args.suite == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![Suite::parse(&args.suite).ok_or_else(|| Error::Parse(format!("unknown suite {:?}", args.suite)))?]
    };
    let start = Instant::now();
    let mut ok = true;
    let mut out = std::io::stdout().lock();
    for suite in suites {
        if args.budget_seconds.is_some_and(|b| start.elapsed().as_secs() >= b) {
            writeln!(out, "suite {}: skipped, time budget exhausted", suite.name())?;
            continue;
        }
        let report = run_suite(suite, args.seed, Exec::Parallel)?;
        ok &= report.ok();
        writeln!(out, "{report}")?;
        out.flush()?;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

fn cmd_table(args: TableArgs) -> Result<(), Failure> {
    let grid = Grid::parse(&args.grid)?;
    let rows = table_rows(&grid, args.seed, Exec::Parallel)?;
    let mut w = csv::Writer::from_path(&args.out)?;
    if rows.is_empty() {
        w.write_record(["n", "p", "k", "A", "B", "method", "re", "im", "abs", "envelope_name", "envelope", "ratio", "status"])?;
    }
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("KLOO_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| Error::Parse(format!("KLOO_THREADS={v:?}")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build_global()
        .map_err(|e| Failure::Io(e.to_string()))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Eval(a) => cmd_eval(a),
        Command::Count(a) => cmd_count(a),
        Command::Gauss(a) => cmd_gauss(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Table(a) => cmd_table(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verify) => ExitCode::from(1),
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
