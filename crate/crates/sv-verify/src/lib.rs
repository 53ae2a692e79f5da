//! Overflow instrumentation and forward symbolic execution.
//!
//! Checked arithmetic is rewritten into calls to builtin methods whose specs
//! separate the overflowing inputs (`ensures_err`) from the safe ones. Each
//! method body is then executed symbolically from its preconditions.

mod builtins;
mod exec;
mod instrument;
mod lower;
mod state;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use sv_entail::PredTable;
use sv_frontend::{
    FrontendError, Kind, MethodDef, Program, SepDisjunct, SepFormula, Span, SpecPair, Stmt, StmtKind, Flavor,
};
use sv_lia::LiaError;
use sv_pure::Formula;
use thiserror::Error;

pub use builtins::{builtin_methods, is_builtin, ADD, SUB, UADD, USUB};
pub use exec::{Exec, Failure};
pub use instrument::{instrument, with_builtins};
pub use lower::{has_return, with_uint_bounds, Core, LoweredMethod, Lowerer, Rhs, Val};
pub use state::{Origin, Status, SymState};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Lia(#[from] LiaError),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
}

#[derive(Debug, Clone)]
pub struct Options {
    pub fuel: u32,
    pub check_sub: bool,
    pub lia: sv_lia::Config,
    pub trace: bool,
}

impl Default for Options {
    fn default() -> Self {
        Options { fuel: sv_entail::DEFAULT_FUEL, check_sub: false, lia: sv_lia::Config::default(), trace: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Severity {
    MustOverflow,
    MayOverflow,
    VerificationFailure,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::MustOverflow => "must-overflow",
            Severity::MayOverflow => "may-overflow",
            Severity::VerificationFailure => "verification-failure",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub span: Span,
    pub severity: Severity,
    /// Source text of the operation, or the failure message.
    pub op: String,
    pub condition: String,
}

impl Finding {
    pub fn is_overflow(&self) -> bool {
        self.severity != Severity::VerificationFailure
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Verified,
    Failed(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairOutcome {
    pub label: String,
    pub span: Span,
    pub outcome: Outcome,
}

#[derive(Debug, Clone)]
pub struct Verdict {
    pub method: String,
    pub span: Span,
    pub outcomes: Vec<PairOutcome>,
    pub findings: Vec<Finding>,
    /// Overflows reached only on paths covered by an `ensures_err`.
    pub declared: BTreeSet<Span>,
    pub trace: Vec<String>,
}

impl Verdict {
    pub fn verified(&self) -> bool {
        self.findings.is_empty() && self.outcomes.iter().all(|o| o.outcome == Outcome::Verified)
    }

    pub fn overflow_spans(&self) -> BTreeSet<Span> {
        self.findings.iter().filter(|f| f.is_overflow()).map(|f| f.span).collect()
    }
}

fn check_loops(s: &Stmt) -> Result<(), FrontendError> {
    match &s.kind {
        StmtKind::Block(ss) => ss.iter().try_for_each(check_loops),
        StmtKind::If { then_branch, else_branch, .. } => {
            check_loops(then_branch)?;
            else_branch.as_deref().map_or(Ok(()), check_loops)
        }
        StmtKind::While { specs, body, .. } => {
            if specs.is_empty() {
                return Err(FrontendError::new(Kind::Syntax, s.span, "loop without specification"));
            }
            if has_return(body) {
                return Err(FrontendError::new(Kind::Syntax, s.span, "`return` inside a loop is not supported"));
            }
            check_loops(body)
        }
        _ => Ok(()),
    }
}

fn default_spec(span: Span) -> SpecPair {
    SpecPair {
        requires: SepFormula { disjuncts: vec![SepDisjunct::pure(Formula::True)], span },
        ensures: SepFormula { disjuncts: vec![SepDisjunct::pure(Formula::True)], span },
        flavor: Flavor::Safe,
        span,
    }
}

/// Pairs sharing a precondition, in order of first appearance.
fn groups(specs: &[SpecPair]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, s) in specs.iter().enumerate() {
        match out.iter_mut().find(|g| specs[g[0]].requires.disjuncts == s.requires.disjuncts) {
            Some(g) => g.push(i),
            None => out.push(vec![i]),
        }
    }
    out
}

struct Collected {
    outcomes: Vec<PairOutcome>,
    overflows: BTreeMap<Span, (String, Vec<String>, bool)>,
    failures: Vec<Failure>,
    declared: BTreeSet<Span>,
}

fn verify_lowered(ex: &mut Exec, m: &LoweredMethod, label: &str, acc: &mut Collected) -> Result<(), VerifyError> {
    let specs = if m.specs.is_empty() { vec![default_spec(m.span)] } else { m.specs.clone() };
    let body = m.body.clone().unwrap_or_default();
    for g in groups(&specs) {
        let before = ex.failures.len();
        let init = ex.initial(&specs[g[0]].requires, m)?;
        let finals = ex.block(init, &body)?;
        let mut post_failure: Option<String> = None;
        for f in finals {
            let f = ex.exit(f, m);
            let want = if f.status == Status::MustIOC { Flavor::Ioc } else { Flavor::Safe };
            let mut ok = false;
            let mut starved = false;
            for &i in g.iter().filter(|&&i| specs[i].flavor == want) {
                match ex.entail(&f, &specs[i].ensures)? {
                    Some(rs) if !rs.is_empty() => {
                        ok = true;
                        break;
                    }
                    Some(_) => {}
                    None => starved = true,
                }
            }
            match (&f.origin, want, ok) {
                (Some(o), Flavor::Ioc, true) => {
                    acc.declared.insert(o.span);
                }
                (Some(o), Flavor::Ioc, false) => {
                    post_failure.get_or_insert_with(|| format!("{}: overflow at `{}` not covered", o.span, o.op));
                    let e = acc.overflows.entry(o.span).or_insert_with(|| (o.op.clone(), vec![], true));
                    if !e.1.contains(&o.condition) {
                        e.1.push(o.condition.clone());
                    }
                    e.2 &= !o.may;
                }
                (_, _, true) => {}
                _ => {
                    let why = if starved { "unfolding fuel exhausted" } else { "not established" };
                    post_failure.get_or_insert_with(|| format!("postcondition {why}"));
                    let fl = Failure { span: m.span, reason: format!("postcondition {why} in `{}`", m.name) };
                    if !ex.failures.contains(&fl) {
                        ex.failures.push(fl);
                    }
                }
            }
        }
        let during: Vec<Failure> = ex.failures[before..].to_vec();
        let reason = during.first().map(|f| format!("{}: {}", f.span, f.reason)).or(post_failure);
        acc.failures.extend(during);
        for &i in &g {
            let n = i + 1;
            acc.outcomes.push(PairOutcome {
                label: if label.is_empty() { format!("spec {n}") } else { format!("{label} spec {n}") },
                span: specs[i].span,
                outcome: reason.clone().map_or(Outcome::Verified, Outcome::Failed),
            });
        }
    }
    Ok(())
}

/// Verifies every method with a body, in source order. `p` must be resolved.
pub fn verify_program(p: &Program, opts: &Options) -> Result<Vec<Verdict>, VerifyError> {
    for m in &p.methods {
        if is_builtin(&m.name) {
            return Err(FrontendError::new(Kind::Duplicate, m.span, format!("`{}` is a builtin", m.name)).into());
        }
        if let Some(b) = &m.body {
            check_loops(b)?;
        }
    }
    let builtins = builtin_methods(opts.check_sub);
    let (ip, ops) = instrument(p, opts.check_sub);
    let prog = with_builtins(&ip, &builtins);
    let table = PredTable::from_program(&prog);
    let mut lowerer = Lowerer::new(ops);
    let mut lowered: BTreeMap<String, LoweredMethod> = BTreeMap::new();
    for m in &prog.methods {
        let l = lowerer.method(m);
        lowered.insert(l.name.clone(), l);
    }
    let loops = std::mem::take(&mut lowerer.extra);
    for l in &loops {
        lowered.insert(l.name.clone(), l.clone());
    }

    let mut out = Vec::new();
    for m in p.methods.iter().filter(|m| m.body.is_some()) {
        out.push(verify_one(m, &lowered, &loops, &table, &prog, opts)?);
    }
    Ok(out)
}

fn verify_one(
    m: &MethodDef,
    lowered: &BTreeMap<String, LoweredMethod>,
    loops: &[LoweredMethod],
    table: &PredTable,
    prog: &Program,
    opts: &Options,
) -> Result<Verdict, VerifyError> {
    let mut ex = Exec::new(lowered, table, prog);
    ex.fuel = opts.fuel;
    ex.lia = opts.lia.clone();
    if opts.trace {
        ex.trace = Some(vec![]);
    }
    let mut acc = Collected { outcomes: vec![], overflows: BTreeMap::new(), failures: vec![], declared: BTreeSet::new() };
    verify_lowered(&mut ex, &lowered[&m.name], "", &mut acc)?;
    for l in loops.iter().filter(|l| l.owner == m.name) {
        verify_lowered(&mut ex, l, &format!("loop at {}", l.span), &mut acc)?;
    }

    let mut findings: Vec<Finding> = acc
        .overflows
        .into_iter()
        .map(|(span, (op, conds, must))| Finding {
            span,
            severity: if must { Severity::MustOverflow } else { Severity::MayOverflow },
            op,
            condition: conds.join(" | "),
        })
        .collect();
    for f in acc.failures {
        findings.push(Finding {
            span: f.span,
            severity: Severity::VerificationFailure,
            op: f.reason,
            condition: String::new(),
        });
    }
    findings.sort_by_key(|f| (f.span, f.severity));
    Ok(Verdict {
        method: m.name.clone(),
        span: m.span,
        outcomes: acc.outcomes,
        findings,
        declared: acc.declared,
        trace: ex.trace.unwrap_or_default(),
    })
}
