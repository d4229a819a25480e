//! `polycount`: generate polytope specs, solve for the maximum-entropy
//! distribution, evaluate the upper bounds and run the counting oracles.
//!
//! Reports are single JSON documents on stdout (or `--out`); a readable
//! summary goes to stderr.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use polycount::basis_bounds::{bound_cor1, bound_thm1, cover_by_bases};
use polycount::gaussian_bounds::{bound_thm2, optimize_gamma, partition_into_bases};
use polycount::model::parse_rational;
use polycount::oracles::{count_exact, estimate_count_mc};
use polycount::poset_bounds::{bound_thm3, detect_cyclic};
use polycount::{
    gen_simplex, gen_transportation, load_spec, solve_maxent, BoundReport, Error, LogNumber, MaxEntSolution,
    PolytopeSpec, SolveOptions,
};
use serde_json::{json, Map, Value};

const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser)]
#[command(name = "polycount", version, about = "Maximum-entropy bounds on integer points in polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated spec document.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
    },
    /// Solve for the maximum-entropy distribution.
    Solve(SolveArgs),
    /// Evaluate upper bounds on the number of integer points.
    Bounds(BoundsArgs),
    /// Count integer points exactly.
    Count(CommonArgs),
    /// Estimate the count by Monte Carlo sampling.
    Mc(McArgs),
}

#[derive(Subcommand)]
enum GenKind {
    /// {x >= 0 : x_1 + ... + x_n = r}
    Simplex {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        r: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Nonnegative matrices with the given row and column sums.
    #[command(alias = "transportation")]
    Transport {
        #[arg(long, value_delimiter = ',')]
        rows: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        cols: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long)]
    spec: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Thm1,
    Cor1,
    Thm2,
    Thm3,
    All,
}

#[derive(Args)]
struct BoundsArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, value_enum, default_value = "all")]
    method: MethodArg,
    /// "auto" or a positive number.
    #[arg(long, default_value = "auto")]
    gamma: String,
}

#[derive(Args)]
struct McArgs {
    #[command(flatten)]
    solve: SolveArgs,
    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// A failed run: exit code plus message.
struct Failure(u8, String);

impl Failure {
    fn input(e: impl std::fmt::Display) -> Self {
        Failure(EXIT_INPUT, e.to_string())
    }
}

fn solver_exit(e: &Error) -> u8 {
    match e {
        Error::DualDomain { .. } | Error::NoInitialPoint { .. } | Error::NotConverged { .. } | Error::SingularHessian => {
            EXIT_SOLVER
        }
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(Failure(code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<u8, Failure> {
    match command {
        Command::Gen { kind } => cmd_gen(kind),
        Command::Solve(args) => cmd_solve(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::Count(args) => cmd_count(args),
        Command::Mc(args) => cmd_mc(args),
    }
}

fn emit(doc: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, format!("{doc}\n")).map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            println!("{doc}");
            Ok(())
        }
    }
}

fn cmd_gen(kind: GenKind) -> Result<u8, Failure> {
    let parse_all = |v: &[String]| v.iter().map(|s| parse_rational(s.trim())).collect::<Result<Vec<_>, _>>();
    let (spec, out) = match kind {
        GenKind::Simplex { n, r, out } => {
            let r = parse_rational(&r).map_err(Failure::input)?;
            (gen_simplex(n, r).map_err(Failure::input)?, out)
        }
        GenKind::Transport { rows, cols, out } => {
            let rows = parse_all(&rows).map_err(Failure::input)?;
            let cols = parse_all(&cols).map_err(Failure::input)?;
            (gen_transportation(&rows, &cols).map_err(Failure::input)?, out)
        }
    };
    eprintln!("{}: m = {}, n = {}", spec.name(), spec.m(), spec.n());
    emit(&spec.to_json_string(), out.as_deref())?;
    Ok(0)
}

fn load(path: &Path) -> Result<PolytopeSpec, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    load_spec(&text).map_err(Failure::input)
}

fn solve(spec: &PolytopeSpec, tol: f64) -> Result<MaxEntSolution, Failure> {
    if !(tol > 0.0) {
        return Err(Failure::input("--tol must be positive"));
    }
    let opts = SolveOptions {
        tol_solve: tol,
        ..SolveOptions::default()
    };
    solve_maxent(spec, &opts).map_err(|e| Failure(solver_exit(&e), e.to_string()))
}

/// Report skeleton. Timings live under their own key so the rest of the
/// document is reproducible byte for byte.
struct Report {
    doc: Map<String, Value>,
    timings: Map<String, Value>,
}

impl Report {
    fn new(command: &str, spec: &PolytopeSpec) -> Self {
        let mut doc = Map::new();
        doc.insert("command".into(), json!(command));
        doc.insert("spec".into(), spec.to_json());
        Self {
            doc,
            timings: Map::new(),
        }
    }

    fn time(&mut self, key: &str, start: Instant) {
        self.timings.insert(key.into(), json!(start.elapsed().as_secs_f64() * 1e3));
    }

    fn finish(mut self, out: Option<&Path>) -> Result<(), Failure> {
        self.doc.insert("timings_ms".into(), Value::Object(self.timings));
        let text = serde_json::to_string_pretty(&Value::Object(self.doc)).expect("JSON values serialize");
        emit(&text, out)
    }
}

fn solution_summary(sol: &MaxEntSolution, full: bool) -> Value {
    let z_min = sol.z.iter().copied().fold(f64::INFINITY, f64::min);
    let z_max = sol.z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut v = json!({
        "entropy": sol.entropy,
        "exp_entropy_sci": LogNumber::from_ln(sol.entropy).to_sci(),
        "dual_value": sol.dual_value,
        "residual": sol.residual,
        "iterations": sol.iterations,
        "z_min": z_min,
        "z_max": z_max,
    });
    if full {
        v["lambda"] = json!(sol.lambda);
        v["z"] = json!(sol.z);
    }
    v
}

fn print_solution(sol: &MaxEntSolution) {
    eprintln!(
        "H = {:.6} nats, e^H = {}, {} Newton iterations, residual {:.1e}",
        sol.entropy,
        LogNumber::from_ln(sol.entropy).to_sci(),
        sol.iterations,
        sol.residual
    );
}

fn cmd_solve(args: SolveArgs) -> Result<u8, Failure> {
    let spec = load(&args.common.spec)?;
    let mut report = Report::new("solve", &spec);
    let start = Instant::now();
    let sol = solve(&spec, args.tol)?;
    report.time("solve", start);
    print_solution(&sol);
    report.doc.insert("solution".into(), solution_summary(&sol, true));
    report.finish(args.common.out.as_deref())?;
    Ok(0)
}

fn run_method(spec: &PolytopeSpec, sol: &MaxEntSolution, method: MethodArg, gamma: Option<f64>) -> polycount::Result<Vec<BoundReport>> {
    Ok(match method {
        MethodArg::Thm1 => vec![bound_thm1(sol, spec)?],
        MethodArg::Cor1 => vec![bound_cor1(sol, &cover_by_bases(spec)?)?],
        MethodArg::Thm2 => {
            let part = partition_into_bases(spec, sol)?;
            match gamma {
                Some(g) => vec![bound_thm2(spec, sol, &part, g)?],
                None => vec![optimize_gamma(spec, sol, &part)?.1],
            }
        }
        MethodArg::Thm3 => {
            let (a, b) = bound_thm3(sol, &detect_cyclic(spec)?)?;
            vec![a, b]
        }
        MethodArg::All => unreachable!("expanded by the caller"),
    })
}

fn method_name(m: MethodArg) -> &'static str {
    match m {
        MethodArg::Thm1 => "thm1",
        MethodArg::Cor1 => "cor1",
        MethodArg::Thm2 => "thm2",
        MethodArg::Thm3 => "thm3",
        MethodArg::All => "all",
    }
}

fn cmd_bounds(args: BoundsArgs) -> Result<u8, Failure> {
    let spec = load(&args.solve.common.spec)?;
    let gamma = match args.gamma.as_str() {
        "auto" => None,
        g => match g.parse::<f64>() {
            Ok(v) if v > 0.0 && v.is_finite() => Some(v),
            _ => return Err(Failure::input(format!("--gamma must be \"auto\" or a positive number, got {g}"))),
        },
    };
    let mut report = Report::new("bounds", &spec);
    let start = Instant::now();
    let sol = solve(&spec, args.solve.tol)?;
    report.time("solve", start);
    print_solution(&sol);
    report.doc.insert("solution".into(), solution_summary(&sol, false));

    let methods: Vec<MethodArg> = match args.method {
        MethodArg::All => vec![MethodArg::Thm1, MethodArg::Cor1, MethodArg::Thm2, MethodArg::Thm3],
        m => vec![m],
    };
    let mut sections = Vec::new();
    let mut code = 0;
    for m in methods {
        // "all" includes the chain-product bound only for cyclic systems.
        if args.method == MethodArg::All && m == MethodArg::Thm3 {
            if let Err(e) = detect_cyclic(&spec) {
                eprintln!("{:<16} skipped: {e}", "thm3");
                sections.push(json!({ "method": "thm3", "skipped": e.to_string() }));
                continue;
            }
        }
        let start = Instant::now();
        match run_method(&spec, &sol, m, gamma) {
            Ok(reports) => {
                for r in reports {
                    eprintln!("{:<16} {:>12}  {}", r.method.as_str(), r.bound.to_sci(), r.notes.join("; "));
                    sections.push(serde_json::to_value(&r).expect("reports serialize"));
                }
            }
            Err(e) => {
                eprintln!("{:<16} error: {e}", method_name(m));
                sections.push(json!({ "method": method_name(m), "error": e.to_string() }));
                code = code.max(solver_exit(&e));
            }
        }
        report.time(method_name(m), start);
    }
    report.doc.insert("bounds".into(), Value::Array(sections));
    report.finish(args.solve.common.out.as_deref())?;
    Ok(code)
}

fn cmd_count(args: CommonArgs) -> Result<u8, Failure> {
    let spec = load(&args.spec)?;
    let mut report = Report::new("count", &spec);
    let start = Instant::now();
    let result = count_exact(&spec);
    report.time("count", start);
    let code = match result {
        Ok(c) => {
            eprintln!("exact count = {} ({} states)", c.count, c.states_visited);
            let mut v = serde_json::to_value(&c).expect("counts serialize");
            v.as_object_mut().expect("object").remove("elapsed_ms");
            report.doc.insert("exact".into(), v);
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            report.doc.insert("exact".into(), json!({ "error": e.to_string() }));
            EXIT_ORACLE
        }
    };
    report.finish(args.out.as_deref())?;
    Ok(code)
}

fn cmd_mc(args: McArgs) -> Result<u8, Failure> {
    let spec = load(&args.solve.common.spec)?;
    if args.trials == 0 {
        return Err(Failure::input("--trials must be at least 1"));
    }
    let mut report = Report::new("mc", &spec);
    let start = Instant::now();
    let sol = solve(&spec, args.solve.tol)?;
    report.time("solve", start);
    print_solution(&sol);
    report.doc.insert("solution".into(), solution_summary(&sol, false));
    let start = Instant::now();
    let result = estimate_count_mc(&sol, &spec, args.trials, args.seed);
    report.time("mc", start);
    let code = match result {
        Ok(est) => {
            if est.hits > 0 {
                eprintln!(
                    "estimate = {:.6e} +/- {:.2e} ({} hits in {} trials, seed {})",
                    est.estimate(),
                    est.stderr(),
                    est.hits,
                    est.trials,
                    est.seed
                );
            } else {
                eprintln!("no hits in {} trials (seed {})", est.trials, est.seed);
            }
            report.doc.insert("mc".into(), serde_json::to_value(&est).expect("estimates serialize"));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            report.doc.insert("mc".into(), json!({ "error": e.to_string() }));
            EXIT_ORACLE
        }
    };
    report.finish(args.solve.common.out.as_deref())?;
    Ok(code)
}
