//! Command-line driver. `main.rs` forwards to [`execute`].

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::algebra::{dual, subtype_qualified, weight, TyVarSet};
use crate::checker::{typecheck, ProcVarEnv, TypeEnv, TypeError, Warning};
use crate::frontend::{parse_etype, parse_program, parse_type, ParseError, SourceProgram};
use crate::runtime::{explore, run_tracked, Configuration, EnvTracker, DEFAULT_STATE_BUDGET};
use crate::syntax::Process;
use crate::Symbol;

pub const SCHEMA: &str = "copyless-check/1";

pub const EXIT_OK: i32 = 0;
pub const EXIT_TYPE_ERROR: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "copyless", version, about = "Type checker and simulator for copyless message passing")]
struct Cli {
    /// Structured JSON output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Type check the main process.
    Check { file: PathBuf },
    /// Run with a seeded scheduler and monitor every step.
    Run {
        file: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        max_steps: usize,
        /// Write the trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Skip type checking.
        #[arg(long = "unsafe")]
        unsafe_: bool,
    },
    /// Exhaustive breadth-first exploration.
    Explore {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET)]
        budget: usize,
        #[arg(long = "unsafe")]
        unsafe_: bool,
    },
    /// Decide T1 <= T2.
    Subtype {
        /// Arguments are type expressions rather than files.
        #[arg(short = 'e', long = "expr")]
        expr: bool,
        t1: String,
        t2: String,
    },
    /// Weight of an endpoint type.
    Weight {
        #[arg(short = 'e', long = "expr")]
        expr: bool,
        t: String,
        /// Comma-separated type variables counted as weight 0.
        #[arg(long, value_delimiter = ',')]
        ctx: Vec<String>,
    },
    /// Dual of an endpoint type.
    Dual {
        #[arg(short = 'e', long = "expr")]
        expr: bool,
        t: String,
    },
}

/// What the driver produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Serialize)]
struct Report {
    schema: &'static str,
    command: &'static str,
    outcome: &'static str,
    #[serde(rename = "exitCode")]
    exit_code: i32,
    payload: Value,
}

fn outcome_name(code: i32) -> &'static str {
    match code {
        EXIT_OK => "Accepted",
        EXIT_TYPE_ERROR => "TypeError",
        EXIT_VIOLATION => "MonitorViolation",
        _ => "ParseError",
    }
}

struct Out {
    json: bool,
    command: &'static str,
}

impl Out {
    fn emit(&self, code: i32, text: String, payload: Value) -> Outcome {
        let stdout = if self.json {
            let r = Report { schema: SCHEMA, command: self.command, outcome: outcome_name(code), exit_code: code, payload };
            serde_json::to_string_pretty(&r).expect("serializable") + "\n"
        } else {
            text
        };
        Outcome { code, stdout, stderr: String::new() }
    }

    fn parse_error(&self, e: &ParseError) -> Outcome {
        self.emit(EXIT_USAGE, format!("parse error: {e}\n"), json!({ "line": e.line, "col": e.col, "message": e.msg }))
    }

    fn usage(&self, msg: String) -> Outcome {
        self.emit(EXIT_USAGE, format!("error: {msg}\n"), json!({ "message": msg }))
    }

    fn type_error(&self, e: &TypeError) -> Outcome {
        self.emit(EXIT_TYPE_ERROR, format!("rejected: {e}\n"), serde_json::to_value(e).expect("serializable"))
    }
}

/// Checks `main` under the program's `env` and `tyvars` directives.
pub fn check_program(prog: &SourceProgram) -> Result<Vec<Warning>, TypeError> {
    let main = prog.main.clone().unwrap_or(Process::Idle);
    let delta: TyVarSet = prog.tyvars.iter().cloned().collect();
    let gamma: TypeEnv = prog.env.iter().cloned().collect();
    typecheck(&ProcVarEnv::new(), &delta, &gamma, &main)
}

fn read(path: &PathBuf) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
}

fn type_arg(expr: bool, s: &str) -> Result<String, String> {
    if expr {
        Ok(s.to_string())
    } else {
        read(&PathBuf::from(s))
    }
}

fn warnings_text(ws: &[Warning]) -> String {
    ws.iter().map(|w| format!("warning @ {} : {}\n", if w.path.is_empty() { "." } else { &w.path }, w.message)).collect()
}

/// Loads a runnable program, type checking it unless `unsafe_`.
fn load_runnable(out: &Out, file: &PathBuf, unsafe_: bool) -> Result<(Process, String), Outcome> {
    let src = read(file).map_err(|m| out.usage(m))?;
    let prog = parse_program(&src).map_err(|e| out.parse_error(&e))?;
    if !prog.env.is_empty() || !prog.tyvars.is_empty() {
        return Err(out.usage("only closed programs (no env or tyvars directives) can be executed".into()));
    }
    let mut notes = String::new();
    if !unsafe_ {
        let ws = check_program(&prog).map_err(|e| out.type_error(&e))?;
        notes = warnings_text(&ws);
    }
    Ok((prog.main.unwrap_or(Process::Idle), notes))
}

fn cmd_check(out: &Out, file: &PathBuf) -> Outcome {
    let src = match read(file) {
        Ok(s) => s,
        Err(m) => return out.usage(m),
    };
    let prog = match parse_program(&src) {
        Ok(p) => p,
        Err(e) => return out.parse_error(&e),
    };
    match check_program(&prog) {
        Ok(ws) => out.emit(
            EXIT_OK,
            format!("{}accepted\n", warnings_text(&ws)),
            json!({ "warnings": ws.iter().map(|w| json!({"path": w.path, "message": w.message})).collect::<Vec<_>>() }),
        ),
        Err(e) => out.type_error(&e),
    }
}

fn cmd_run(out: &Out, file: &PathBuf, seed: u64, max_steps: usize, trace: Option<&PathBuf>, unsafe_: bool) -> Outcome {
    let (main, notes) = match load_runnable(out, file, unsafe_) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let c0 = Configuration::initial(&main);
    let tracker = (!unsafe_).then(EnvTracker::new);
    let r = run_tracked(&c0, seed, max_steps, tracker);
    if let Some(path) = trace {
        let body = serde_json::to_string_pretty(&r.trace).expect("serializable");
        if let Err(e) = std::fs::write(path, body + "\n") {
            return out.usage(format!("{}: {e}", path.display()));
        }
    }
    let code = if r.verdict.is_good() { EXIT_OK } else { EXIT_VIOLATION };
    let mut text = notes;
    for e in &r.trace {
        text += &format!("{:>4}  {:<28} {}\n", e.step, e.rule.to_string(), e.redex);
    }
    text += &format!("steps: {}\nheap: {}\nprocess: {}\nverdict: {}\n", r.steps, r.config.heap, r.config.process(), r.verdict);
    if let Some((n, v)) = &r.heap_check {
        text += &format!("heap typing failed after step {n}: {v:?}\n");
    }
    let dom: Vec<String> = r.config.heap.dom().iter().map(|a| a.to_string()).collect();
    out.emit(
        code,
        text,
        json!({
            "seed": seed,
            "steps": r.steps,
            "verdict": r.verdict,
            "heap": r.config.heap,
            "heapDomain": dom,
            "process": r.config.process().to_string(),
            "trace": r.trace,
            "heapCheck": r.heap_check.as_ref().map(|(n, v)| json!({"step": n, "result": v})),
        }),
    )
}

fn cmd_explore(out: &Out, file: &PathBuf, depth: usize, budget: usize, unsafe_: bool) -> Outcome {
    let (main, notes) = match load_runnable(out, file, unsafe_) {
        Ok(x) => x,
        Err(o) => return o,
    };
    let rep = explore(&Configuration::initial(&main), depth, budget);
    let code = if rep.violations.is_empty() { EXIT_OK } else { EXIT_VIOLATION };
    let mut text = notes;
    text += &format!("states: {}\ndepth: {} (deepest {})\nstuck: {}\n", rep.states, rep.depth, rep.max_depth_reached, rep.stuck);
    if rep.truncated {
        text += "truncated: state budget exhausted\n";
    }
    text += &format!("violations: {}\n", rep.violations.len());
    for v in &rep.violations {
        text += &format!("  {} via {:?}\n", v.verdict, v.path);
    }
    out.emit(code, text, serde_json::to_value(&rep).expect("serializable"))
}

fn cmd_subtype(out: &Out, expr: bool, t1: &str, t2: &str) -> Outcome {
    let (a, b) = match (type_arg(expr, t1), type_arg(expr, t2)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(m), _) | (_, Err(m)) => return out.usage(m),
    };
    let (a, b) = match (parse_type(&a), parse_type(&b)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return out.parse_error(&e),
    };
    let r = subtype_qualified(&a, &b);
    out.emit(EXIT_OK, format!("{r}\n"), json!({ "t1": a.to_string(), "t2": b.to_string(), "subtype": r }))
}

fn cmd_weight(out: &Out, expr: bool, t: &str, ctx: &[String]) -> Outcome {
    let src = match type_arg(expr, t) {
        Ok(s) => s,
        Err(m) => return out.usage(m),
    };
    let t = match parse_etype(&src) {
        Ok(t) => t,
        Err(e) => return out.parse_error(&e),
    };
    let delta: TyVarSet = ctx.iter().filter(|s| !s.is_empty()).map(|s| Symbol::new(s.trim())).collect();
    let w = weight(&delta, &t);
    out.emit(EXIT_OK, format!("{w}\n"), json!({ "type": t.to_string(), "weight": w }))
}

fn cmd_dual(out: &Out, expr: bool, t: &str) -> Outcome {
    let src = match type_arg(expr, t) {
        Ok(s) => s,
        Err(m) => return out.usage(m),
    };
    let t = match parse_etype(&src) {
        Ok(t) => t,
        Err(e) => return out.parse_error(&e),
    };
    match dual(&t) {
        Ok(d) => out.emit(EXIT_OK, format!("{d}\n"), json!({ "type": t.to_string(), "dual": d.to_string() })),
        Err(e) => out.usage(format!("{t} has no dual: {e}")),
    }
}

/// Runs the driver on `args` (including the program name).
pub fn execute<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code, stdout: String::new(), stderr: text }
            } else {
                Outcome { code, stdout: text, stderr: String::new() }
            };
        }
    };
    let command = match &cli.cmd {
        Cmd::Check { .. } => "check",
        Cmd::Run { .. } => "run",
        Cmd::Explore { .. } => "explore",
        Cmd::Subtype { .. } => "subtype",
        Cmd::Weight { .. } => "weight",
        Cmd::Dual { .. } => "dual",
    };
    let out = Out { json: cli.json, command };
    match &cli.cmd {
        Cmd::Check { file } => cmd_check(&out, file),
        Cmd::Run { file, seed, max_steps, trace, unsafe_ } => cmd_run(&out, file, *seed, *max_steps, trace.as_ref(), *unsafe_),
        Cmd::Explore { file, depth, budget, unsafe_ } => cmd_explore(&out, file, *depth, *budget, *unsafe_),
        Cmd::Subtype { expr, t1, t2 } => cmd_subtype(&out, *expr, t1, t2),
        Cmd::Weight { expr, t, ctx } => cmd_weight(&out, *expr, t, ctx),
        Cmd::Dual { expr, t } => cmd_dual(&out, *expr, t),
    }
}
