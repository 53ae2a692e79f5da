//! The command-line driver: configuration, modes, reports and exit codes.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use sv_frontend::{parse_program, resolve, Program};
use sv_verify::{verify_program, Options, Outcome, Verdict, VerifyError};

use crate::diff::{differential_check, DiffConfig, DiffReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Verify,
    CheckOverflow,
    DumpConstraints,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Jsonl,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub inputs: Vec<PathBuf>,
    pub mode: Mode,
    pub fuel: u32,
    pub oracle_width: u32,
    pub disjunct_cap: usize,
    pub enum_bound: usize,
    pub format: Format,
    pub trace_entail: bool,
    pub check_sub: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            inputs: vec![],
            mode: Mode::Verify,
            fuel: sv_verify::Options::default().fuel,
            oracle_width: 4,
            disjunct_cap: sv_pure::DEFAULT_DISJUNCT_CAP,
            enum_bound: 3,
            format: Format::Text,
            trace_entail: false,
            check_sub: false,
        }
    }
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INTERNAL: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

fn options(cfg: &RunConfig) -> Options {
    let mut o = Options { fuel: cfg.fuel, check_sub: cfg.check_sub, trace: cfg.trace_entail, ..Options::default() };
    o.lia.disjunct_cap = cfg.disjunct_cap;
    o
}

fn quote(s: &str) -> String {
    serde_json::Value::String(s.to_string()).to_string()
}

/// One line per finding: path, line, col, severity, condition.
pub fn jsonl(path: &str, verdicts: &[Verdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        for f in &v.findings {
            let cond = if f.is_overflow() { f.condition.clone() } else { f.op.clone() };
            let _ = writeln!(
                out,
                "{{\"path\":{},\"line\":{},\"col\":{},\"severity\":\"{}\",\"condition\":{}}}",
                quote(path),
                f.span.line,
                f.span.col,
                f.severity,
                quote(&cond)
            );
        }
    }
    out
}

pub fn text(path: &str, verdicts: &[Verdict], overflow_only: bool) -> String {
    let mut out = String::new();
    for v in verdicts {
        let status = if v.verified() { "Verified" } else { "Failed" };
        let _ = writeln!(out, "{path}: {status}: {}", v.method);
        for o in &v.outcomes {
            if let Outcome::Failed(why) = &o.outcome {
                if !overflow_only {
                    let _ = writeln!(out, "  {} failed: {why}", o.label);
                }
            }
        }
        for f in &v.findings {
            if overflow_only && !f.is_overflow() {
                continue;
            }
            let _ = write!(out, "  {path}:{}:{}: {}: ", f.span.line, f.span.col, f.severity);
            if f.is_overflow() {
                let _ = writeln!(out, "`{}` when {}", f.op, f.condition);
            } else {
                let _ = writeln!(out, "{}", f.op);
            }
        }
        for s in &v.declared {
            if !overflow_only {
                let _ = writeln!(out, "  {path}:{}:{}: declared overflow", s.line, s.col);
            }
        }
        for t in &v.trace {
            let _ = writeln!(out, "  | {t}");
        }
    }
    out
}

pub fn diff_text(path: &str, r: &DiffReport) -> String {
    let mut out = String::new();
    let spans = |s: &std::collections::BTreeSet<sv_frontend::Span>| {
        s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
    };
    let _ = writeln!(out, "{path}: oracle {} | findings {} | declared {}", r.oracle.len(), r.findings.len(), r.declared.len());
    let _ = writeln!(out, "  true positives:  {}", spans(&r.true_positives));
    let _ = writeln!(out, "  false positives: {}", spans(&r.false_positives));
    let _ = writeln!(out, "  false negatives: {}", spans(&r.false_negatives));
    for m in &r.methods {
        let _ = writeln!(
            out,
            "  {}: {} valuations, {} admitted, {} aborted{}",
            m.name,
            m.valuations,
            m.admitted,
            m.aborted,
            if m.partial { ", partial" } else { "" }
        );
    }
    out
}

pub fn load(path: &PathBuf) -> Result<Program, String> {
    let src = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let p = parse_program(&src).map_err(|e| format!("{}:{e}", path.display()))?;
    resolve(&p).map_err(|e| format!("{}:{e}", path.display()))
}

fn error_code(e: &VerifyError) -> i32 {
    match e {
        VerifyError::Frontend(_) => EXIT_INPUT,
        _ => EXIT_INTERNAL,
    }
}

/// Runs the configured mode over every input and returns the exit code.
pub fn run_cli(cfg: &RunConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut code = EXIT_OK;
    for path in &cfg.inputs {
        let shown = path.display().to_string();
        let p = match load(path) {
            Ok(p) => p,
            Err(e) => {
                let _ = writeln!(err, "{e}");
                code = code.max(EXIT_INPUT);
                continue;
            }
        };
        let mut opts = options(cfg);
        let log = Arc::new(Mutex::new(Vec::new()));
        if cfg.mode == Mode::DumpConstraints {
            opts.lia.dump = Some(log.clone());
        }
        let result = match cfg.mode {
            Mode::Oracle => {
                let dc = DiffConfig { width: cfg.oracle_width, list_bound: cfg.enum_bound, verify: opts, ..DiffConfig::default() };
                differential_check(&p, &dc).map(|r| {
                    let _ = write!(out, "{}", diff_text(&shown, &r));
                    if r.false_negatives.is_empty() { EXIT_OK } else { EXIT_FINDINGS }
                })
            }
            mode => verify_program(&p, &opts).map(|vs| {
                let overflow_only = mode == Mode::CheckOverflow;
                match cfg.format {
                    Format::Text => {
                        let _ = write!(out, "{}", text(&shown, &vs, overflow_only));
                    }
                    Format::Jsonl => {
                        let _ = write!(out, "{}", jsonl(&shown, &vs));
                    }
                }
                if mode == Mode::DumpConstraints {
                    for line in log.lock().expect("dump log").iter() {
                        let _ = writeln!(out, "{line}");
                    }
                }
                let bad = if overflow_only {
                    vs.iter().any(|v| !v.overflow_spans().is_empty())
                } else {
                    vs.iter().any(|v| !v.verified())
                };
                if bad { EXIT_FINDINGS } else { EXIT_OK }
            }),
        };
        match result {
            Ok(c) => code = code.max(c),
            Err(e) => {
                let _ = writeln!(err, "{shown}: {e}");
                code = code.max(error_code(&e));
            }
        }
    }
    code
}
