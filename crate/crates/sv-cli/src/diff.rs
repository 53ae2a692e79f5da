//! Differential check of verifier findings against exhaustive concrete runs.

use std::collections::{BTreeMap, BTreeSet};

use sv_frontend::{BinOp, MethodDef, Program, Span, Type};
use sv_verify::{verify_program, Options, VerifyError};

use crate::interp::{interpret_concrete, Heap, Value, Width};
use crate::spec_eval::{satisfies, Bounds};

#[derive(Debug, Clone)]
pub struct DiffConfig {
    pub width: u32,
    /// Maximum list length for heap inputs.
    pub list_bound: usize,
    /// Maximum number of valuations per method before domains are reduced.
    pub budget: usize,
    pub verify: Options,
}

impl Default for DiffConfig {
    fn default() -> Self {
        DiffConfig { width: 4, list_bound: 3, budget: 200_000, verify: Options::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodStats {
    pub name: String,
    pub valuations: usize,
    pub admitted: usize,
    pub aborted: usize,
    /// Domains were reduced or the method could not be enumerated.
    pub partial: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DiffReport {
    pub oracle: BTreeSet<Span>,
    pub findings: BTreeSet<Span>,
    pub declared: BTreeSet<Span>,
    pub true_positives: BTreeSet<Span>,
    pub false_positives: BTreeSet<Span>,
    pub false_negatives: BTreeSet<Span>,
    pub methods: Vec<MethodStats>,
}

impl DiffReport {
    pub fn partial(&self) -> bool {
        self.methods.iter().any(|m| m.partial)
    }
}

/// One parameter's candidate inputs.
#[derive(Debug, Clone)]
enum Domain {
    Scalar(Vec<Value>),
    List { data: String, elems: Vec<i128>, val_field: usize, next_field: usize, arity: usize },
}

fn boundary(lo: i128, hi: i128) -> Vec<i128> {
    let mut v: Vec<i128> = [lo, lo + 1, -2, -1, 0, 1, 2, hi - 1, hi].into_iter().filter(|k| lo <= *k && *k <= hi).collect();
    v.sort();
    v.dedup();
    v
}

fn list_shape(p: &Program, data: &str) -> Option<(usize, usize, usize)> {
    let d = p.data(data)?;
    let val = d.fields.iter().position(|(t, _)| t.is_integer())?;
    let next = d.fields.iter().position(|(t, _)| *t == Type::Data(data.to_string()))?;
    Some((val, next, d.fields.len()))
}

fn lists(elems: &[i128], bound: usize) -> Vec<Vec<i128>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..bound {
        let mut next = Vec::new();
        for l in &layer {
            for e in elems {
                let mut l2: Vec<i128> = l.clone();
                l2.push(*e);
                next.push(l2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn count(doms: &[Domain], bound: usize) -> usize {
    doms.iter()
        .map(|d| match d {
            Domain::Scalar(v) => v.len(),
            Domain::List { elems, .. } => (0..=bound).map(|n| elems.len().saturating_pow(n as u32)).sum(),
        })
        .fold(1usize, |a, b| a.saturating_mul(b))
}

fn domains(p: &Program, m: &MethodDef, lo: i128, hi: i128, reduced: bool) -> Option<Vec<Domain>> {
    let (ulo, uhi) = (0, hi * 2 + 1);
    let ints = |lo, hi| if reduced { boundary(lo, hi) } else { (lo..=hi).collect() };
    m.params
        .iter()
        .map(|prm| match &prm.ty {
            Type::Int => Some(Domain::Scalar(ints(lo, hi).into_iter().map(Value::Int).collect())),
            Type::Uint => Some(Domain::Scalar(ints(ulo, uhi).into_iter().map(Value::Int).collect())),
            Type::Bool => Some(Domain::Scalar(vec![Value::Bool(false), Value::Bool(true)])),
            Type::Data(d) => {
                let (val_field, next_field, arity) = list_shape(p, d)?;
                let elems = if reduced { boundary(lo, hi) } else { (lo..=hi).collect() };
                Some(Domain::List { data: d.clone(), elems, val_field, next_field, arity })
            }
            Type::Float | Type::Void => None,
        })
        .collect()
}

/// Every valuation of `doms`, with its heap.
fn valuations(doms: &[Domain], bound: usize, mut f: impl FnMut(&Heap, &[Value])) {
    let choices: Vec<Vec<Choice>> = doms
        .iter()
        .map(|d| match d {
            Domain::Scalar(vs) => vs.iter().map(|v| Choice::Val(*v)).collect(),
            Domain::List { elems, .. } => lists(elems, bound).into_iter().map(Choice::List).collect(),
        })
        .collect();
    let mut idx = vec![0usize; doms.len()];
    if choices.iter().any(|c| c.is_empty()) {
        return;
    }
    loop {
        let mut heap = Heap::default();
        let args: Vec<Value> = idx
            .iter()
            .zip(&choices)
            .zip(doms)
            .map(|((&i, c), d)| match (&c[i], d) {
                (Choice::Val(v), _) => *v,
                (Choice::List(xs), Domain::List { data, val_field, next_field, arity, .. }) => {
                    let mut next = Value::Null;
                    for x in xs.iter().rev() {
                        let mut fields = vec![Value::Int(0); *arity];
                        fields[*val_field] = Value::Int(*x);
                        fields[*next_field] = next;
                        next = heap.alloc(data, fields);
                    }
                    next
                }
                _ => unreachable!(),
            })
            .collect();
        f(&heap, &args);
        let mut k = 0;
        loop {
            if k == idx.len() {
                return;
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

enum Choice {
    Val(Value),
    List(Vec<i128>),
}

/// Runs the verifier and the concrete oracle on every method with a body and
/// classifies overflow locations. `p` must be resolved.
pub fn differential_check(p: &Program, cfg: &DiffConfig) -> Result<DiffReport, VerifyError> {
    let verdicts = verify_program(p, &cfg.verify)?;
    let mut report = DiffReport::default();
    for v in &verdicts {
        report.findings.extend(v.overflow_spans());
        report.declared.extend(v.declared.iter().copied());
    }

    let (lo, hi) = Width::signed_range(cfg.width);
    let (_, uhi) = Width::unsigned_range(cfg.width);
    for m in p.methods.iter().filter(|m| m.body.is_some()) {
        let unsigned = m.params.iter().any(|q| q.ty == Type::Uint) && !m.params.iter().any(|q| q.ty == Type::Int);
        let bounds = if unsigned { Bounds { min: 0, max: uhi } } else { Bounds { min: lo, max: hi } };
        let mut stats = MethodStats { name: m.name.clone(), valuations: 0, admitted: 0, aborted: 0, partial: false };
        let Some(mut doms) = domains(p, m, lo, hi, false) else {
            stats.partial = true;
            report.methods.push(stats);
            continue;
        };
        if count(&doms, cfg.list_bound) > cfg.budget {
            doms = domains(p, m, lo, hi, true).expect("same shapes");
            stats.partial = true;
        }
        let mut oracle = BTreeSet::new();
        let mut seen = 0usize;
        valuations(&doms, cfg.list_bound, |heap, args| {
            if seen >= cfg.budget {
                stats.partial = true;
                return;
            }
            seen += 1;
            stats.valuations += 1;
            let env: BTreeMap<String, i128> = m.params.iter().map(|q| q.name.clone()).zip(args.iter().map(|a| a.int())).collect();
            let admitted = m.specs.is_empty() || m.specs.iter().any(|s| satisfies(p, &s.requires, &env, heap, bounds));
            if !admitted {
                return;
            }
            stats.admitted += 1;
            let out = interpret_concrete(p, m, heap, args, cfg.width);
            if out.wrapped.result.is_err() {
                stats.aborted += 1;
            }
            for e in out.wrapped.events {
                if e.op == BinOp::Add || cfg.verify.check_sub {
                    oracle.insert(e.span);
                }
            }
        });
        report.oracle.extend(oracle);
        report.methods.push(stats);
    }

    let known: BTreeSet<Span> = report.findings.union(&report.declared).copied().collect();
    report.true_positives = report.oracle.intersection(&known).copied().collect();
    report.false_negatives = report.oracle.difference(&known).copied().collect();
    report.false_positives = report.findings.difference(&report.oracle).copied().collect();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use sv_frontend::{parse_program, resolve};

    fn check(src: &str, w: u32) -> DiffReport {
        let p = resolve(&parse_program(src).unwrap()).unwrap();
        differential_check(&p, &DiffConfig { width: w, ..DiffConfig::default() }).unwrap()
    }

    #[test]
    fn ex1_is_a_true_positive() {
        let r = check("int ex1(int n) requires n>=0 ensures res=n+1 { return n+1; }", 4);
        assert_eq!(r.oracle.len(), 1);
        assert_eq!(r.true_positives, r.oracle);
        assert!(r.false_negatives.is_empty() && r.false_positives.is_empty());
        assert_eq!(r.methods[0].admitted, 8);
    }

    #[test]
    fn ex2_agrees_under_its_precondition() {
        let r = check("int ex2(int n) requires 0<=n+1 & n+1<inf ensures res=n+1 { return n+1; }", 4);
        assert!(r.oracle.is_empty() && r.findings.is_empty());
    }

    #[test]
    fn list_sum_under_ll() {
        let src = "data node { int val; node next; }
pred ll<root,sum> == (root=null & sum=0)
  | exists d,q,rest: root::node<d,q> * q::ll<rest> & sum=d+rest & sum<inf;
int ex4(node x) requires x::ll<s> ensures x::ll<s> & res=s
{ if (x == null) return 0; else return x.val + ex4(x.next); }";
        let r = check(src, 4);
        assert!(r.oracle.is_empty() && r.findings.is_empty(), "{r:?}");
        assert!(!r.partial());
    }

    #[test]
    fn large_domains_are_reduced_and_flagged() {
        let r = check("int f(int a, int b, int c) requires true ensures true { return a + b + c; }", 8);
        assert!(r.partial());
        assert_eq!(r.oracle.len(), 2);
        assert!(r.false_negatives.is_empty());
    }
}
