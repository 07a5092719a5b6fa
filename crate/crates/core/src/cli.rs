//! The `dpg` command line: `solve`, `generate`, `verify` and `bench`.
//!
//! Every command returns a [`CliResult`] instead of printing, so the binary is a
//! thin shell and tests can drive commands in-process. Exit codes: 0 success,
//! 1 verification or oracle failure, 2 bad input, 3 solver limit, 4 internal error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::conditioning::ConditioningReport;
use crate::constraints::{check_solution, offset, SolutionWitness};
use crate::game::{generate_random_game, parse_game, serialize_game, Game, GeneratorParams, JointStrategy, Player, Valuation};
use crate::improvement::{self, IterationRecord, NoisePolicy, PivotMode, SolveError, SolverConfig, TraceLevel};
use crate::oracles::{cross_check, CrossCheckOptions, OracleMethod, OracleReport, Verdict};
use crate::rational::{format_fraction, parse_rational, Fraction, Rational};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_LIMIT: i32 = 3;
pub const EXIT_INTERNAL: i32 = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct CliResult {
    pub command: String,
    pub exit_code: i32,
    pub stdout: String,
    pub stderr: String,
    /// Machine-readable payload; rationals are `p/q` strings.
    pub payload: Value,
}

impl CliResult {
    fn ok(command: &str, stdout: String, payload: Value) -> Self {
        CliResult { command: command.into(), exit_code: EXIT_OK, stdout, stderr: String::new(), payload }
    }

    fn fail(command: &str, exit_code: i32, stderr: String) -> Self {
        let payload = json!({ "command": command, "error": stderr.trim_end() });
        CliResult { command: command.into(), exit_code, stdout: String::new(), stderr, payload }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dpg", version, about = "Exact solver for discounted payoff games")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a game and print its valuation and co-optimal strategies.
    Solve(SolveArgs),
    /// Write a random game in .dpg format.
    Generate(GenerateArgs),
    /// Check a game file, and optionally a claimed valuation.
    Verify(VerifyArgs),
    /// Generate and solve a batch of games, reporting CSV rows.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseArg {
    Never,
    OnDegeneracy,
    Always,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PivotArg {
    LpFirst,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TraceArg {
    None,
    Summary,
    Full,
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolverFlags {
    /// Seed for random initial strategies (lowest edge ids when absent).
    #[arg(long)]
    pub initial_seed: Option<u64>,
    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub alpha: Switch,
    #[arg(long, value_enum, default_value_t = NoiseArg::OnDegeneracy)]
    pub noise: NoiseArg,
    #[arg(long, value_enum, default_value_t = PivotArg::LpFirst)]
    pub pivot: PivotArg,
    #[arg(long)]
    pub max_iterations: Option<usize>,
}

impl SolverFlags {
    fn config(&self, seed: u64, trace: TraceArg) -> SolverConfig {
        SolverConfig {
            seed,
            initial_seed: self.initial_seed,
            use_offset_factors: self.alpha == Switch::On,
            noise: match self.noise {
                NoiseArg::Never => NoisePolicy::Never,
                NoiseArg::OnDegeneracy => NoisePolicy::OnDegeneracy,
                NoiseArg::Always => NoisePolicy::Always,
            },
            pivot_mode: match self.pivot {
                PivotArg::LpFirst => PivotMode::LpFirst,
                PivotArg::Mixed => PivotMode::Mixed,
            },
            max_iterations: self.max_iterations,
            trace: match trace {
                TraceArg::None => TraceLevel::None,
                TraceArg::Summary => TraceLevel::Summary,
                TraceArg::Full => TraceLevel::Full,
            },
        }
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct SolveArgs {
    pub file: PathBuf,
    /// Seed for offset factors and weight noise.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long, value_enum, default_value_t = TraceArg::None)]
    pub trace: TraceArg,
    /// Cross-check the result against an independent oracle.
    #[arg(long)]
    pub check: bool,
    /// Print the JSON payload instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, clap::Args)]
pub struct GameFlags {
    #[arg(long)]
    pub vertices: usize,
    #[arg(long)]
    pub degree: usize,
    #[arg(long, default_value_t = 4)]
    pub weight_bound: i64,
    /// Comma-separated discount pool.
    #[arg(long, default_value = "1/2,2/3,3/4")]
    pub discounts: String,
}

impl GameFlags {
    fn params(&self, seed: u64) -> Result<GeneratorParams, String> {
        if self.vertices == 0 {
            return Err("--vertices must be at least 1".into());
        }
        if self.degree == 0 {
            return Err("--degree must be at least 1".into());
        }
        if self.weight_bound < 0 {
            return Err("--weight-bound must be nonnegative".into());
        }
        let discounts = self
            .discounts
            .split(',')
            .map(|s| {
                let l = parse_rational(s.trim()).map_err(|e| format!("--discounts: `{}`: {e}", s.trim()))?;
                if l < Rational::from_integer(0.into()) || l >= Rational::from_integer(1.into()) {
                    return Err(format!("--discounts: {} not in [0,1)", Fraction(&l)));
                }
                Ok(l)
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GeneratorParams {
            vertices: self.vertices,
            out_degree: self.degree,
            weight_bound: self.weight_bound,
            discounts,
            seed,
        })
    }
}

#[derive(Debug, Clone, clap::Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub game: GameFlags,
    #[arg(long)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
    /// Lines of `<vertex id or name> <rational>`.
    pub valuation: Option<PathBuf>,
    /// Check the game structure (implied when no valuation is given).
    #[arg(long)]
    pub structure: bool,
}

#[derive(Debug, Clone, clap::Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub count: usize,
    #[command(flatten)]
    pub game: GameFlags,
    /// Instance `i` uses seed `seed + i` for both generation and solving.
    #[arg(long)]
    pub seed: u64,
    #[command(flatten)]
    pub solver: SolverFlags,
    #[arg(long)]
    pub check: bool,
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> CliResult
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => dispatch(&cli.command),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let mut r = CliResult::fail("dpg", code, String::new());
            if code == EXIT_OK {
                r.stdout = text;
            } else {
                r.stderr = text;
            }
            r
        }
    }
}

pub fn dispatch(command: &Command) -> CliResult {
    match command {
        Command::Solve(a) => cmd_solve(a),
        Command::Generate(a) => cmd_generate(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Bench(a) => cmd_bench(a),
    }
}

fn load_game(path: &Path) -> Result<Game, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_game(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn valuation_json(g: &Game, val: &Valuation) -> Value {
    let map: Map<String, Value> = g.vertices().map(|v| (g.label(v), Value::from(format_fraction(&val[v])))).collect();
    Value::Object(map)
}

fn strategy_json(g: &Game, s: &JointStrategy) -> Value {
    let map: Map<String, Value> = g.vertices().map(|v| (g.label(v), Value::from(g.label(s.successor(g, v))))).collect();
    Value::Object(map)
}

fn report_json(r: &ConditioningReport) -> Value {
    json!({
        "contraction": format_fraction(&r.contraction),
        "gap_lower_bound": format_fraction(&r.gap_lower_bound),
        "epsilon": format_fraction(&r.epsilon),
        "noise_seed": r.noise_seed,
        "alpha_seed": r.alpha_seed,
        "resamples": r.resamples,
        "degenerate_after_noise": r.degenerate_after_noise,
    })
}

fn oracle_json(g: &Game, r: &OracleReport) -> Value {
    let method = match r.method {
        OracleMethod::BruteForce => "brute-force",
        OracleMethod::ValueIteration => "value-iteration",
    };
    match &r.verdict {
        Verdict::Pass => json!({ "method": method, "verdict": "PASS" }),
        Verdict::Fail { vertex, expected, got } => json!({
            "method": method,
            "verdict": "FAIL",
            "vertex": g.label(*vertex),
            "expected": format_fraction(expected),
            "got": format_fraction(got),
        }),
    }
}

fn trace_json(g: &Game, trace: &[IterationRecord]) -> Value {
    trace
        .iter()
        .map(|r| {
            let mut o = json!({
                "epoch": r.epoch,
                "kind": r.kind.to_string(),
                "objective": format_fraction(&r.objective),
                "basis": r.basis.edges(),
                "strategy": strategy_json(g, &r.lp_strategy),
                "pivots": r.pivots,
                "objective_switches": r.objective_switches,
                "lp_solved": r.lp_solved,
            });
            if let Some(next) = &r.next_strategy {
                o["next_strategy"] = strategy_json(g, next);
            }
            if let Some(val) = &r.valuation {
                o["valuation"] = valuation_json(g, val);
            }
            o
        })
        .collect()
}

fn trace_text(g: &Game, trace: &[IterationRecord]) -> String {
    let mut s = String::new();
    for (i, r) in trace.iter().enumerate() {
        writeln!(s, "iteration {}: {}", i + 1, r.describe(g)).unwrap();
    }
    s
}

pub fn cmd_solve(args: &SolveArgs) -> CliResult {
    const CMD: &str = "solve";
    let g = match load_game(&args.file) {
        Ok(g) => g,
        Err(e) => return CliResult::fail(CMD, EXIT_INPUT, e + "\n"),
    };
    let cfg = args.solver.config(args.seed, args.trace);
    let sol = match improvement::solve(&g, &cfg) {
        Ok(s) => s,
        Err(SolveError::Invalid(e)) => return CliResult::fail(CMD, EXIT_INPUT, format!("{}: {e}\n", args.file.display())),
        Err(e) => {
            let mut msg = format!("{e}\n");
            if let Some(trace) = e.trace() {
                msg.push_str(&trace_text(&g, trace));
            }
            let code = if e.trace().is_some() { EXIT_LIMIT } else { EXIT_INTERNAL };
            return CliResult::fail(CMD, code, msg);
        }
    };

    let oracle = if args.check {
        match cross_check(&g, &sol.valuation, &CrossCheckOptions::default()) {
            Ok(r) => Some(r),
            Err(e) => return CliResult::fail(CMD, EXIT_INTERNAL, format!("oracle: {e}\n")),
        }
    } else {
        None
    };

    let mut payload = json!({
        "command": CMD,
        "valuation": valuation_json(&g, &sol.valuation),
        "strategy": strategy_json(&g, &sol.strategies),
        "iterations": sol.iterations,
        "pivots": sol.pivots,
        "conditioning": report_json(&sol.report),
        "oracle": oracle.as_ref().map(|r| oracle_json(&g, r)),
    });
    if args.trace != TraceArg::None {
        payload["trace"] = trace_json(&g, &sol.trace);
    }

    let mut text = String::new();
    if args.json {
        text = serde_json::to_string_pretty(&payload).expect("json values serialize") + "\n";
    } else {
        text.push_str(&trace_text(&g, &sol.trace));
        writeln!(text, "{}; strategy: {}", sol.valuation.describe(&g), sol.strategies.describe(&g)).unwrap();
        if let Some(r) = &oracle {
            writeln!(text, "oracle: {}", r.describe(&g)).unwrap();
        }
    }
    let mut result = CliResult::ok(CMD, text, payload);
    if oracle.is_some_and(|r| !r.verdict.is_pass()) {
        result.exit_code = EXIT_FAILED;
    }
    result
}

pub fn cmd_generate(args: &GenerateArgs) -> CliResult {
    const CMD: &str = "generate";
    let params = match args.game.params(args.seed) {
        Ok(p) => p,
        Err(e) => return CliResult::fail(CMD, EXIT_INPUT, e + "\n"),
    };
    let g = generate_random_game(&params);
    let text = serialize_game(&g);
    let payload = json!({ "command": CMD, "vertices": g.num_vertices(), "edges": g.num_edges() });
    match &args.output {
        None => CliResult::ok(CMD, text, payload),
        Some(path) => match std::fs::write(path, &text) {
            Ok(()) => CliResult::ok(CMD, format!("wrote {}\n", path.display()), payload),
            Err(e) => CliResult::fail(CMD, EXIT_INPUT, format!("{}: {e}\n", path.display())),
        },
    }
}

/// Parses `<vertex id or name> <rational>` lines; `#` starts a comment.
/// Every vertex must appear exactly once.
pub fn parse_valuation(g: &Game, text: &str) -> Result<Valuation, String> {
    let mut vals: Vec<Option<Rational>> = vec![None; g.num_vertices()];
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let [key, value] = content.split_whitespace().collect::<Vec<_>>()[..] else {
            return Err(format!("line {line}: expected `<vertex> <rational>`"));
        };
        let v = g.find_vertex(key).ok_or_else(|| format!("line {line}: unknown vertex `{key}`"))?;
        if vals[v].is_some() {
            return Err(format!("line {line}: duplicate value for vertex {}", g.label(v)));
        }
        vals[v] = Some(parse_rational(value).map_err(|e| format!("line {line}: {e}"))?);
    }
    vals.into_iter()
        .enumerate()
        .map(|(v, x)| x.ok_or_else(|| format!("missing value for vertex {}", g.label(v))))
        .collect::<Result<Vec<_>, _>>()
        .map(Valuation)
}

fn violated_text(g: &Game, val: &Valuation, e: usize) -> String {
    let edge = g.edge(e);
    let (src, dst) = (g.label(edge.src), g.label(edge.dst));
    let op = match g.owner(edge.src) {
        Player::Max => ">=",
        Player::Min => "<=",
    };
    let mut values = format!("val({src}) = {}", Fraction(&val[edge.src]));
    if edge.dst != edge.src {
        write!(values, ", val({dst}) = {}", Fraction(&val[edge.dst])).unwrap();
    }
    format!(
        "inequation for edge {} violated: val({src}) {op} {} + {} * val({dst}) with {values} (offset {})",
        g.edge_label(e),
        Fraction(&edge.weight),
        Fraction(&edge.discount),
        Fraction(&offset(g, val, e)),
    )
}

pub fn cmd_verify(args: &VerifyArgs) -> CliResult {
    const CMD: &str = "verify";
    let g = match load_game(&args.file) {
        Ok(g) => g,
        Err(e) => return CliResult::fail(CMD, EXIT_INPUT, e + "\n"),
    };
    let mut text = String::new();
    if args.structure || args.valuation.is_none() {
        if let Err(violations) = g.validate() {
            let mut msg = String::new();
            for v in &violations {
                writeln!(msg, "{v}").unwrap();
            }
            return CliResult::fail(CMD, EXIT_FAILED, msg);
        }
        writeln!(text, "structure ok: {} vertices, {} edges", g.num_vertices(), g.num_edges()).unwrap();
    }
    let Some(path) = &args.valuation else {
        return CliResult::ok(CMD, text, json!({ "command": CMD, "structure": "ok" }));
    };
    let val = match std::fs::read_to_string(path)
        .map_err(|e| e.to_string())
        .and_then(|t| parse_valuation(&g, &t))
    {
        Ok(v) => v,
        Err(e) => return CliResult::fail(CMD, EXIT_INPUT, format!("{}: {e}\n", path.display())),
    };
    match check_solution(&g, &val) {
        Ok(sharp) => {
            let edges: Vec<String> = g.vertices().map(|v| g.edge_label(sharp.edge(v))).collect();
            writeln!(text, "valid: sharp edges {}", edges.join(", ")).unwrap();
            let sharp_map: Map<String, Value> =
                g.vertices().map(|v| (g.label(v), Value::from(sharp.edge(v)))).collect();
            CliResult::ok(CMD, text, json!({ "command": CMD, "valid": true, "sharp_edges": sharp_map }))
        }
        Err(SolutionWitness::Violated(e)) => {
            let mut r = CliResult::fail(CMD, EXIT_FAILED, violated_text(&g, &val, e) + "\n");
            r.payload = json!({ "command": CMD, "valid": false, "violated_edge": e });
            r
        }
        Err(SolutionWitness::NoSharpEdge(v)) => {
            let mut r = CliResult::fail(CMD, EXIT_FAILED, format!("vertex {} has no sharp outgoing edge\n", g.label(v)));
            r.payload = json!({ "command": CMD, "valid": false, "vertex": g.label(v) });
            r
        }
    }
}

#[derive(Debug, Serialize)]
struct BenchRow {
    seed: u64,
    vertices: usize,
    edges: usize,
    iterations: usize,
    pivots: usize,
    resamples: usize,
    wall_ms: f64,
    verdict: String,
}

pub fn cmd_bench(args: &BenchArgs) -> CliResult {
    const CMD: &str = "bench";
    if let Err(e) = args.game.params(args.seed) {
        return CliResult::fail(CMD, EXIT_INPUT, e + "\n");
    }
    let rows: Vec<BenchRow> = (0..args.count as u64)
        .into_par_iter()
        .map(|i| {
            let seed = args.seed.wrapping_add(i);
            let g = generate_random_game(&args.game.params(seed).expect("validated above"));
            let cfg = args.solver.config(seed, TraceArg::None);
            let started = Instant::now();
            let outcome = improvement::solve(&g, &cfg);
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            let mut row = BenchRow {
                seed,
                vertices: g.num_vertices(),
                edges: g.num_edges(),
                iterations: 0,
                pivots: 0,
                resamples: 0,
                wall_ms,
                verdict: "-".into(),
            };
            match outcome {
                Ok(sol) => {
                    row.iterations = sol.iterations;
                    row.pivots = sol.pivots;
                    row.resamples = sol.report.resamples;
                    if args.check {
                        row.verdict = match cross_check(&g, &sol.valuation, &CrossCheckOptions::default()) {
                            Ok(r) if r.verdict.is_pass() => "PASS".into(),
                            Ok(_) => "FAIL".into(),
                            Err(_) => "ERROR".into(),
                        };
                    }
                }
                Err(_) => row.verdict = "ERROR".into(),
            }
            row
        })
        .collect();

    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in &rows {
        writer.serialize(row).expect("rows serialize");
    }
    let stdout = String::from_utf8(writer.into_inner().expect("in-memory writer")).expect("csv is utf-8");
    let failed: Vec<u64> = rows.iter().filter(|r| r.verdict == "FAIL" || r.verdict == "ERROR").map(|r| r.seed).collect();
    let payload = json!({ "command": CMD, "count": rows.len(), "failed_seeds": failed });
    let mut result = CliResult::ok(CMD, stdout, payload);
    if !failed.is_empty() {
        result.exit_code = EXIT_FAILED;
        result.stderr = failed.iter().map(|s| format!("seed {s} failed\n")).collect();
    }
    result
}
