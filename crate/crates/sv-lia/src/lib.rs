//! Satisfiability and implication for linear integer arithmetic with infinities.
//!
//! Pipeline: desugar, normalize, eliminate `inf` with one shared sentinel,
//! expand min/max, DNF, then the Omega test on each disjunct.

mod linear;
mod omega;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use sv_pure::{
    desugar, eliminate_inf_with, normalize_with_stats, Atom, Formula, Lin, NameSupply, PureError, Rel, Term,
    DEFAULT_DISJUNCT_CAP,
};
use thiserror::Error;

pub use linear::{dnf, expand_minmax, search_dnf, Kind, LinearAtom, Visitor};
pub use omega::{Budget, Witness};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiaError {
    #[error(transparent)]
    Pure(#[from] PureError),
    #[error("resource limit: {0}")]
    ResourceLimit(String),
    #[error("disjunct limit {0} exceeded")]
    DisjunctLimit(usize),
    #[error("term `{0}` is not finite linear")]
    NotLinear(String),
}

/// Shared log of pre/post normalization pairs, one query per entry.
pub type DumpLog = Arc<Mutex<Vec<String>>>;

#[derive(Debug, Clone)]
pub struct Config {
    pub disjunct_cap: usize,
    pub budget: Budget,
    pub dump: Option<DumpLog>,
}

impl Default for Config {
    fn default() -> Self {
        Config { disjunct_cap: DEFAULT_DISJUNCT_CAP, budget: Budget::default(), dump: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Sat,
    Unsat,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatResult {
    pub status: Status,
    pub witness: Option<Witness>,
}

impl SatResult {
    pub fn is_sat(&self) -> bool {
        self.status == Status::Sat
    }

    fn unsat() -> Self {
        SatResult { status: Status::Unsat, witness: None }
    }
}

/// Decides a conjunction of finite linear atoms.
pub fn sat_conj(atoms: &[LinearAtom], budget: Budget) -> Result<SatResult, LiaError> {
    let mut eqs = Vec::new();
    let mut ineqs = Vec::new();
    for a in atoms {
        match a.kind {
            Kind::Eq => eqs.push(a.lhs.clone()),
            Kind::Le => ineqs.push(a.lhs.neg()),
        }
    }
    let Some(mut w) = omega::Omega::new(budget).sat(eqs, ineqs)? else {
        return Ok(SatResult::unsat());
    };
    for a in atoms {
        for v in a.lhs.coeffs.keys() {
            w.entry(v.clone()).or_insert(0);
        }
    }
    w.retain(|v, _| !v.starts_with("sigma#"));
    debug_assert!(atoms.iter().all(|a| a.holds(&|v| w[v])), "witness check failed");
    Ok(SatResult { status: Status::Sat, witness: Some(w) })
}

pub fn sat(pi: &Formula) -> Result<SatResult, LiaError> {
    sat_with(pi, &Config::default(), &mut NameSupply::new())
}

pub fn sat_with(pi: &Formula, cfg: &Config, names: &mut NameSupply) -> Result<SatResult, LiaError> {
    let sentinel = names.fresh_avoiding("inf", &pi.vars());
    sat_sentinel(pi, &sentinel, cfg, names)
}

fn log(cfg: &Config, pre: &Formula, post: &Formula) {
    if let Some(d) = &cfg.dump {
        d.lock().expect("dump log poisoned").push(format!("{pre}  ~>  {post}"));
    }
}

/// Full pipeline with a caller-chosen sentinel name.
pub fn sat_sentinel(
    pi: &Formula,
    sentinel: &str,
    cfg: &Config,
    names: &mut NameSupply,
) -> Result<SatResult, LiaError> {
    let (norm, _) = normalize_with_stats(pi, cfg.disjunct_cap)?;
    log(cfg, pi, &norm);
    let elim = with_range(eliminate_inf_with(&norm, sentinel).formula, sentinel, None);
    let expanded = expand_minmax(&elim, names);
    let mut leaf = |conj: &[LinearAtom]| {
        let r = sat_conj(conj, cfg.budget)?;
        Ok(r.is_sat().then_some(r))
    };
    let mut feasible = |conj: &[LinearAtom]| Ok(sat_conj(conj, cfg.budget)?.is_sat());
    let found = search_dnf(&expanded, cfg.disjunct_cap, &mut Visitor { leaf: &mut leaf, feasible: &mut feasible })?;
    Ok(found.unwrap_or_else(SatResult::unsat))
}

/// Conjoins `-s <= x <= s` for the variables of `f` (or only `only`) when
/// the sentinel `s` occurs in `f`. Every extended integer lies between
/// `-inf` and `inf`, so this is a tautology before elimination.
fn with_range(f: Formula, sentinel: &str, only: Option<&BTreeSet<String>>) -> Formula {
    let vars = f.vars();
    if !vars.contains(sentinel) {
        return f;
    }
    let s = Term::v(sentinel);
    let mut parts = vec![f];
    for v in vars.iter().filter(|v| *v != sentinel && only.map_or(true, |o| o.contains(*v))) {
        parts.push(Formula::cmp(Term::neg(s.clone()), Rel::Le, Term::v(v)));
        parts.push(Formula::cmp(Term::v(v), Rel::Le, s.clone()));
    }
    Formula::and(parts)
}

pub fn implies(ante: &Formula, bound: &BTreeSet<String>, cons: &Formula) -> Result<bool, LiaError> {
    implies_with(ante, bound, cons, &Config::default(), &mut NameSupply::new())
}

/// `forall free. ante ==> exists bound. cons`, with one sentinel for both sides.
pub fn implies_with(
    ante: &Formula,
    bound: &BTreeSet<String>,
    cons: &Formula,
    cfg: &Config,
    names: &mut NameSupply,
) -> Result<bool, LiaError> {
    let mut all = ante.vars();
    all.extend(cons.vars());
    all.extend(bound.iter().cloned());
    let sentinel = names.fresh_avoiding("inf", &all);
    let bound: BTreeSet<String> = bound.intersection(&cons.vars()).cloned().collect();
    let cons = if bound.is_empty() {
        cons.clone()
    } else {
        eliminate_bound(cons, &bound, &sentinel, cfg, names)?
    };
    let query = Formula::and(vec![ante.clone(), Formula::not(cons)]);
    Ok(!sat_sentinel(&query, &sentinel, cfg, names)?.is_sat())
}

fn literal_dnf(f: &Formula, cap: usize) -> Result<Vec<Vec<Formula>>, LiaError> {
    Ok(match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Atom(_) | Formula::Not(_) => vec![vec![f.clone()]],
        Formula::Or(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(literal_dnf(x, cap)?);
            }
            if out.len() > cap {
                return Err(LiaError::DisjunctLimit(cap));
            }
            out
        }
        Formula::And(xs) => {
            let mut acc = vec![vec![]];
            for x in xs {
                let d = literal_dnf(x, cap)?;
                if acc.len().saturating_mul(d.len()) > cap {
                    return Err(LiaError::DisjunctLimit(cap));
                }
                acc = acc
                    .iter()
                    .flat_map(|a| {
                        d.iter().map(move |b| {
                            let mut c: Vec<Formula> = a.clone();
                            c.extend(b.iter().cloned());
                            c
                        })
                    })
                    .collect();
            }
            acc
        }
    })
}

/// Solves a positive literal for a bound variable with unit coefficient.
fn definition(lit: &Formula, bound: &BTreeSet<String>) -> Option<(String, Term)> {
    let Formula::Atom(Atom::Cmp(l, Rel::Eq, r)) = lit else { return None };
    for (side, other) in [(l, r), (r, l)] {
        if let Some(v) = side.as_lin().and_then(Lin::as_var) {
            let mut vs = BTreeSet::new();
            other.vars(&mut vs);
            if bound.contains(v) && !vs.contains(v) {
                return Some((v.to_string(), other.clone()));
            }
        }
    }
    if let (Some(a), Some(b)) = (l.as_lin(), r.as_lin()) {
        let d = a.sub(b);
        let v = d.coeffs.iter().find(|(v, c)| bound.contains(*v) && c.abs() == 1)?.0.clone();
        let c = d.coeff(&v);
        let mut rest = d.clone();
        rest.coeffs.remove(&v);
        return Some((v, Term::Lin(rest.scale(-c))));
    }
    None
}

fn mentions(lit: &Formula, vars: &BTreeSet<String>) -> bool {
    lit.vars().iter().any(|v| vars.contains(v))
}

/// Removes `exists bound` from `cons`, returning an equivalent bound-free formula.
fn eliminate_bound(
    cons: &Formula,
    bound: &BTreeSet<String>,
    sentinel: &str,
    cfg: &Config,
    names: &mut NameSupply,
) -> Result<Formula, LiaError> {
    let mut disjuncts = Vec::new();
    for mut lits in literal_dnf(&desugar(cons).nnf(), cfg.disjunct_cap)? {
        while let Some((i, (v, t))) = lits.iter().enumerate().find_map(|(i, l)| definition(l, bound).map(|d| (i, d))) {
            lits.remove(i);
            lits = lits.iter().map(|l| l.subst(&v, &t)).collect();
        }
        let (touched, kept): (Vec<Formula>, Vec<Formula>) = lits.into_iter().partition(|l| mentions(l, bound));
        let mut parts = kept;
        if !touched.is_empty() {
            parts.push(project_literals(&touched, bound, sentinel, cfg, names)?);
        }
        disjuncts.push(Formula::and(parts));
    }
    Ok(Formula::or(disjuncts))
}

fn project_literals(
    lits: &[Formula],
    bound: &BTreeSet<String>,
    sentinel: &str,
    cfg: &Config,
    names: &mut NameSupply,
) -> Result<Formula, LiaError> {
    let conj = Formula::And(lits.to_vec());
    let elim = with_range(eliminate_inf_with(&conj, sentinel).formula, sentinel, Some(bound));
    let before = elim.vars();
    let expanded = expand_minmax(&elim, names);
    let mut bound = bound.clone();
    bound.extend(expanded.vars().difference(&before).cloned());
    let mut out = Vec::new();
    for c in dnf(&expanded, cfg.disjunct_cap)? {
        let mut eqs = Vec::new();
        let mut ineqs = Vec::new();
        for a in &c {
            match a.kind {
                Kind::Eq => eqs.push(a.lhs.clone()),
                Kind::Le => ineqs.push(a.lhs.neg()),
            }
        }
        for (eqs, ineqs) in omega::Omega::new(cfg.budget).project(eqs, ineqs, &bound)? {
            let mut atoms: Vec<Formula> = eqs
                .iter()
                .map(|e| LinearAtom { kind: Kind::Eq, lhs: e.clone() }.to_formula())
                .collect();
            atoms.extend(ineqs.iter().map(|i| LinearAtom { kind: Kind::Le, lhs: i.neg() }.to_formula()));
            out.push(Formula::and(atoms));
        }
    }
    Ok(Formula::or(out))
}

/// Evaluates an infinity-free formula under an integer valuation (missing variables are 0).
pub fn eval_finite(pi: &Formula, env: &BTreeMap<String, i64>) -> Option<bool> {
    let get = |v: &str| env.get(v).copied().unwrap_or(0);
    Some(match pi {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(x) => !eval_finite(x, env)?,
        Formula::And(xs) => {
            let mut r = true;
            for x in xs {
                r &= eval_finite(x, env)?;
            }
            r
        }
        Formula::Or(xs) => {
            let mut r = false;
            for x in xs {
                r |= eval_finite(x, env)?;
            }
            r
        }
        Formula::Atom(Atom::Null(v)) => get(v) == 0,
        Formula::Atom(Atom::Cmp(a, rel, b)) => {
            let a = eval_term(a, &get)?;
            let b = eval_term(b, &get)?;
            match rel {
                Rel::Le => a <= b,
                Rel::Lt => a < b,
                Rel::Ge => a >= b,
                Rel::Gt => a > b,
                Rel::Eq => a == b,
                Rel::Ne => a != b,
            }
        }
    })
}

fn eval_term(t: &Term, get: &dyn Fn(&str) -> i64) -> Option<i64> {
    Some(match t {
        Term::Inf => return None,
        Term::Lin(l) => l.eval(get),
        Term::Mul(k, a) => k * eval_term(a, get)?,
        Term::Neg(a) => -eval_term(a, get)?,
        Term::Add(a, b) => eval_term(a, get)? + eval_term(b, get)?,
        Term::Min(a, b) => eval_term(a, get)?.min(eval_term(b, get)?),
        Term::Max(a, b) => eval_term(a, get)?.max(eval_term(b, get)?),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &str) -> Term {
        Term::v(x)
    }
    fn k(x: i64) -> Term {
        Term::k(x)
    }
    fn cmp(a: Term, r: Rel, b: Term) -> Formula {
        Formula::cmp(a, r, b)
    }
    fn and(xs: Vec<Formula>) -> Formula {
        Formula::And(xs)
    }

    #[test]
    fn empty_interval_is_unsat() {
        let f = and(vec![cmp(v("x"), Rel::Ge, k(0)), cmp(v("x"), Rel::Le, k(-1))]);
        assert!(!sat(&f).unwrap().is_sat());
    }

    #[test]
    fn parity_is_unsat() {
        let f = and(vec![cmp(Term::mul(2, v("x")), Rel::Eq, v("y")), cmp(v("y"), Rel::Eq, k(3))]);
        assert!(!sat(&f).unwrap().is_sat());
    }

    #[test]
    fn sentinel_transitivity_is_unsat() {
        let f = and(vec![
            cmp(v("x"), Rel::Ge, k(0)),
            cmp(Term::add(v("x"), k(1)), Rel::Le, v("vinf")),
            cmp(v("x"), Rel::Ge, v("vinf")),
        ]);
        assert!(!sat(&f).unwrap().is_sat());
    }

    #[test]
    fn overflow_branch_is_reachable() {
        let f = and(vec![cmp(v("n"), Rel::Ge, k(0)), cmp(Term::add(v("n"), k(1)), Rel::Gt, Term::Inf)]);
        let r = sat(&f).unwrap();
        assert!(r.is_sat());
        let w = r.witness.unwrap();
        let s = w.keys().find(|x| x.starts_with("inf#")).unwrap().clone();
        assert!(w["n"] >= 0 && w["n"] + 1 > w[&s]);
    }

    #[test]
    fn both_sides_of_inf_is_unsat() {
        let n1 = || Term::add(v("n"), k(1));
        let f = and(vec![
            cmp(k(0), Rel::Le, n1()),
            cmp(n1(), Rel::Lt, Term::Inf),
            cmp(n1(), Rel::Gt, Term::Inf),
        ]);
        assert!(!sat(&f).unwrap().is_sat());
    }

    #[test]
    fn constant_equal_inf_is_unsat() {
        assert!(!sat(&cmp(k(5), Rel::Eq, Term::Inf)).unwrap().is_sat());
    }

    #[test]
    fn max_case_split() {
        let f = and(vec![cmp(Term::max(v("x"), k(3)), Rel::Eq, k(3)), cmp(v("x"), Rel::Eq, k(5))]);
        assert!(!sat(&f).unwrap().is_sat());
    }

    #[test]
    fn weakening_holds() {
        let none = BTreeSet::new();
        assert!(implies(&cmp(v("n"), Rel::Ge, k(0)), &none, &cmp(v("n"), Rel::Ge, k(-1))).unwrap());
    }

    #[test]
    fn increment_may_reach_inf() {
        let none = BTreeSet::new();
        let cons = cmp(Term::add(v("n"), k(1)), Rel::Le, Term::Inf);
        assert!(!implies(&cmp(v("n"), Rel::Ge, k(0)), &none, &cons).unwrap());
    }

    #[test]
    fn existential_is_projected() {
        let bound: BTreeSet<String> = ["y".to_string()].into();
        let cons = and(vec![cmp(v("y"), Rel::Eq, v("x")), cmp(v("y"), Rel::Le, k(5))]);
        assert!(implies(&cmp(v("x"), Rel::Eq, k(3)), &bound, &cons).unwrap());
        assert!(!implies(&cmp(v("x"), Rel::Eq, k(6)), &bound, &cons).unwrap());
    }

    #[test]
    fn existential_without_definition_uses_projection() {
        // x >= 0 ==> exists y. x < y & y < x + 2
        let bound: BTreeSet<String> = ["y".to_string()].into();
        let cons = and(vec![cmp(v("x"), Rel::Lt, v("y")), cmp(v("y"), Rel::Lt, Term::add(v("x"), k(2)))]);
        assert!(implies(&cmp(v("x"), Rel::Ge, k(0)), &bound, &cons).unwrap());
        // exists y. x < y & y < x + 1 is empty
        let cons = and(vec![cmp(v("x"), Rel::Lt, v("y")), cmp(v("y"), Rel::Lt, Term::add(v("x"), k(1)))]);
        assert!(!implies(&cmp(v("x"), Rel::Ge, k(0)), &bound, &cons).unwrap());
    }

    #[test]
    fn inf_equality_in_consequent_is_not_substituted_away() {
        let none = BTreeSet::new();
        let cons = cmp(v("m"), Rel::Eq, Term::Inf);
        assert!(!implies(&Formula::True, &none, &cons).unwrap());
        assert!(implies(&cons, &none, &cons).unwrap());
    }

    #[test]
    fn dump_records_queries() {
        let log: DumpLog = Arc::default();
        let cfg = Config { dump: Some(log.clone()), ..Config::default() };
        sat_with(&cmp(v("v"), Rel::Le, Term::Inf), &cfg, &mut NameSupply::new()).unwrap();
        assert_eq!(log.lock().unwrap().as_slice(), ["v<=inf  ~>  true"]);
    }

    #[test]
    fn variable_and_compound_bounds_agree() {
        // b<inf normalizes through the variable rule, s-a<inf stays compound
        let ante = and(vec![
            cmp(v("s"), Rel::Eq, Term::add(v("a"), v("b"))),
            cmp(v("b"), Rel::Lt, Term::Inf),
        ]);
        let cons = cmp(Term::sub(v("s"), v("a")), Rel::Lt, Term::Inf);
        assert!(implies(&ante, &BTreeSet::new(), &cons).unwrap());
        // n may still sit at the top of the range
        let n = cmp(v("n"), Rel::Ge, k(0));
        assert!(!implies(&n, &BTreeSet::new(), &cmp(Term::add(v("n"), k(1)), Rel::Le, Term::Inf)).unwrap());
    }
}
