use std::collections::BTreeSet;

use crate::formula::{Atom, Formula, Rel};
use crate::names::NameSupply;
use crate::term::{canon_term, Lin, Term};
use crate::PureError;

pub const DEFAULT_DISJUNCT_CAP: usize = 4096;

/// `<`, `>=`, `>` and `!=` rewritten over `<=`, `=` and negation.
pub fn desugar(pi: &Formula) -> Formula {
    pi.map_atoms(&|a| match a {
        Atom::Cmp(x, Rel::Lt, y) => Formula::not(Formula::cmp(y.clone(), Rel::Le, x.clone())),
        Atom::Cmp(x, Rel::Ge, y) => Formula::cmp(y.clone(), Rel::Le, x.clone()),
        Atom::Cmp(x, Rel::Gt, y) => Formula::not(Formula::cmp(x.clone(), Rel::Le, y.clone())),
        Atom::Cmp(x, Rel::Ne, y) => Formula::not(Formula::cmp(x.clone(), Rel::Eq, y.clone())),
        other => Formula::Atom(other.clone()),
    })
}

fn rewrite_minmax(t: &Term) -> Term {
    t.map(&|t| match t {
        Term::Min(a, b) => match (a.inf_sign(), b.inf_sign()) {
            (_, Some(true)) => *a,
            (Some(true), _) => *b,
            (_, Some(false)) | (Some(false), _) => Term::neg_inf(),
            _ => Term::Min(a, b),
        },
        Term::Max(a, b) => match (a.inf_sign(), b.inf_sign()) {
            (_, Some(true)) | (Some(true), _) => Term::Inf,
            (_, Some(false)) => *a,
            (Some(false), _) => *b,
            _ => Term::Max(a, b),
        },
        other => other,
    })
}

fn truth(b: bool) -> Formula {
    if b {
        Formula::True
    } else {
        Formula::False
    }
}

/// One application of the normalization rule table to a canonical atom.
///
/// Rules are matched syntactically; atoms outside the table come back unchanged.
pub fn normalize_atom(atom: &Atom) -> Formula {
    let Atom::Cmp(l, rel, r) = atom else {
        return Formula::Atom(atom.clone());
    };
    let (l, r) = (rewrite_minmax(l), rewrite_minmax(r));
    let rel = *rel;
    let unchanged = || Formula::cmp(l.clone(), rel, r.clone());
    if !matches!(rel, Rel::Le | Rel::Eq | Rel::Ne) {
        return unchanged();
    }
    let lin_const = |t: &Term| t.as_lin().and_then(Lin::as_const);
    let lin_var = |t: &Term| t.as_lin().and_then(|x| x.as_var().map(str::to_string));

    match (l.inf_sign(), r.inf_sign()) {
        (Some(a), Some(b)) => match rel {
            Rel::Le => truth(!a || b),
            Rel::Eq => truth(a == b),
            _ => truth(a != b),
        },
        (None, Some(pos)) | (Some(pos), None) => {
            let inf_on_right = r.inf_sign().is_some();
            let other = if inf_on_right { &l } else { &r };
            if lin_const(other).is_some() {
                return match rel {
                    Rel::Eq => Formula::False,
                    Rel::Ne => Formula::True,
                    // k <= inf, -inf <= k
                    _ => truth(inf_on_right == pos),
                };
            }
            if let Some(v) = lin_var(other) {
                if rel != Rel::Le {
                    return unchanged();
                }
                return if inf_on_right == pos {
                    Formula::True
                } else {
                    let inf = if pos { Term::Inf } else { Term::neg_inf() };
                    Formula::cmp(Term::v(&v), Rel::Eq, inf)
                };
            }
            unchanged()
        }
        (None, None) => unchanged(),
    }
}

fn simplify(atom: &Atom) -> Formula {
    match normalize_atom(atom) {
        Formula::Atom(Atom::Cmp(a, rel, b)) if a == b => match rel {
            Rel::Le | Rel::Eq | Rel::Ge => Formula::True,
            Rel::Lt | Rel::Gt | Rel::Ne => Formula::False,
        },
        other => other,
    }
}

type Lit = (bool, Atom);

fn dnf_lits(f: &Formula, cap: usize) -> Result<Vec<Vec<Lit>>, PureError> {
    Ok(match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Atom(a) => vec![vec![(true, a.clone())]],
        Formula::Not(x) => match x.as_ref() {
            Formula::Atom(a) => vec![vec![(false, a.clone())]],
            other => dnf_lits(&Formula::not(other.clone()).nnf(), cap)?,
        },
        Formula::Or(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(dnf_lits(x, cap)?);
                if out.len() > cap {
                    return Err(PureError::DisjunctLimit(cap));
                }
            }
            out
        }
        Formula::And(xs) => {
            let mut acc: Vec<Vec<Lit>> = vec![vec![]];
            for x in xs {
                let d = dnf_lits(x, cap)?;
                if acc.len().saturating_mul(d.len()) > cap {
                    return Err(PureError::DisjunctLimit(cap));
                }
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for a in &acc {
                    for b in &d {
                        let mut c = a.clone();
                        c.extend(b.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
    })
}

fn inf_subst_candidate(lits: &[Lit]) -> Option<(String, Term)> {
    lits.iter().find_map(|(pos, a)| {
        if !pos {
            return None;
        }
        let Atom::Cmp(l, Rel::Eq, r) = a else { return None };
        let var_of = |t: &Term| t.as_lin().and_then(|x| x.as_var().map(str::to_string));
        match (var_of(l), r.inf_sign(), var_of(r), l.inf_sign()) {
            (Some(v), Some(_), _, _) => Some((v, r.clone())),
            (_, _, Some(v), Some(_)) => Some((v, l.clone())),
            _ => None,
        }
    })
}

/// Normalizes one conjunctive branch; `None` means the branch is false.
fn normalize_branch(mut lits: Vec<Lit>, passes: &mut usize) -> Result<Option<Vec<Lit>>, PureError> {
    loop {
        *passes += 1;
        let mut out: Vec<Lit> = Vec::new();
        let mut seen = BTreeSet::new();
        for (pos, atom) in &lits {
            match simplify(&atom.canon()?) {
                Formula::True if *pos => {}
                Formula::False if !*pos => {}
                Formula::True | Formula::False => return Ok(None),
                Formula::Atom(b) => {
                    if seen.contains(&(!*pos, b.clone())) {
                        return Ok(None);
                    }
                    if seen.insert((*pos, b.clone())) {
                        out.push((*pos, b));
                    }
                }
                _ => unreachable!("normalize_atom yields an atom or a constant"),
            }
        }
        match inf_subst_candidate(&out) {
            Some((v, inf)) => {
                lits = out.iter().map(|(p, a)| (*p, a.subst(&v, &inf))).collect();
            }
            None => return Ok(Some(out)),
        }
    }
}

/// Pass accounting for the normalization fixpoint.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NormStats {
    /// Largest number of passes any branch needed.
    pub passes: usize,
    /// Variables plus atoms mentioning infinity, plus one.
    pub bound: usize,
}

pub fn normalize(pi: &Formula) -> Result<Formula, PureError> {
    normalize_with_stats(pi, DEFAULT_DISJUNCT_CAP).map(|(f, _)| f)
}

/// Fixpoint of substitution, canonicalization, rule application and folding.
///
/// The result is a disjunction of conjunctions of literals.
pub fn normalize_with_stats(pi: &Formula, cap: usize) -> Result<(Formula, NormStats), PureError> {
    let d = desugar(pi).nnf();
    let bound = d.vars().len() + d.atoms().iter().filter(|a| a.has_inf()).count() + 1;
    let mut stats = NormStats { passes: 0, bound };
    let mut disjuncts = Vec::new();
    let mut seen = BTreeSet::new();
    for branch in dnf_lits(&d, cap)? {
        let mut passes = 0;
        let result = normalize_branch(branch, &mut passes)?;
        stats.passes = stats.passes.max(passes);
        let Some(lits) = result else { continue };
        let conj = Formula::and(
            lits.into_iter()
                .map(|(p, a)| if p { Formula::Atom(a) } else { Formula::not(Formula::Atom(a)) })
                .collect(),
        );
        if conj == Formula::True {
            return Ok((Formula::True, stats));
        }
        if seen.insert(conj.clone()) {
            disjuncts.push(conj);
        }
    }
    Ok((Formula::or(disjuncts), stats))
}

/// Output of infinity elimination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfElimResult {
    pub formula: Formula,
    pub sentinel: Option<String>,
}

/// Replaces every `inf` with one fresh sentinel drawn from `names`.
pub fn eliminate_inf(pi: &Formula, names: &mut NameSupply) -> InfElimResult {
    if !pi.has_inf() {
        return eliminate_inf_with(pi, "");
    }
    let sentinel = names.fresh_avoiding("inf", &pi.vars());
    eliminate_inf_with(pi, &sentinel)
}

/// Replaces every `inf` with the given sentinel name.
///
/// Residual `!(a<=b)` literals become `b+1<=a`, which is exact once no
/// infinity remains.
pub fn eliminate_inf_with(pi: &Formula, sentinel: &str) -> InfElimResult {
    let had_inf = pi.has_inf();
    let replace = |t: &Term| -> Term {
        let t = t.map(&|t| match t {
            Term::Inf => Term::v(sentinel),
            other => other,
        });
        canon_term(&t).expect("finite terms cannot be indeterminate")
    };
    let formula = resolve_negations(pi, &replace);
    InfElimResult {
        formula,
        sentinel: had_inf.then(|| sentinel.to_string()),
    }
}

fn resolve_negations(f: &Formula, replace: &dyn Fn(&Term) -> Term) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) => Formula::Atom(a.map_terms(replace)),
        Formula::Not(x) => match x.as_ref() {
            Formula::Atom(Atom::Cmp(a, Rel::Le, b)) => {
                let b1 = canon_term(&Term::add(replace(b), Term::k(1)))
                    .expect("finite terms cannot be indeterminate");
                Formula::cmp(b1, Rel::Le, replace(a))
            }
            other => Formula::not(resolve_negations(other, replace)),
        },
        Formula::And(xs) => Formula::And(xs.iter().map(|x| resolve_negations(x, replace)).collect()),
        Formula::Or(xs) => Formula::Or(xs.iter().map(|x| resolve_negations(x, replace)).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn le(a: Term, b: Term) -> Formula {
        Formula::cmp(a, Rel::Le, b)
    }

    #[test]
    fn inf_le_var_and_var_le_const_is_false() {
        let f = Formula::And(vec![le(Term::Inf, Term::v("v")), le(Term::v("v"), Term::k(5))]);
        assert_eq!(normalize(&f).unwrap(), Formula::False);
    }

    #[test]
    fn min_with_inf_is_reflexive() {
        let a = Term::add(Term::v("a"), Term::k(2));
        let f = Formula::cmp(Term::min(a.clone(), Term::Inf), Rel::Eq, a);
        assert_eq!(normalize(&f).unwrap(), Formula::True);
    }

    #[test]
    fn constant_ge_neg_inf_is_true() {
        let f = Formula::cmp(Term::k(3), Rel::Ge, Term::neg_inf());
        assert_eq!(desugar(&f), le(Term::neg_inf(), Term::k(3)));
        assert_eq!(normalize(&f).unwrap(), Formula::True);
    }

    #[test]
    fn self_disequality_is_false() {
        let a = Term::add(Term::v("x"), Term::v("y"));
        assert_eq!(normalize(&Formula::cmp(a.clone(), Rel::Ne, a)).unwrap(), Formula::False);
    }

    #[test]
    fn compound_against_inf_survives() {
        let n1 = Term::add(Term::v("n"), Term::k(1));
        let f = le(n1.clone(), Term::Inf);
        let canon = le(canon_term(&n1).unwrap(), Term::Inf);
        assert_eq!(normalize(&f).unwrap(), canon);
        let mut names = NameSupply::new();
        let r = eliminate_inf(&normalize(&f).unwrap(), &mut names);
        assert!(!r.formula.has_inf());
        assert_eq!(r.sentinel.as_deref(), Some("inf#0"));
    }

    #[test]
    fn strict_both_ways_shares_one_sentinel() {
        let n1 = Term::add(Term::v("n"), Term::k(1));
        let f = Formula::And(vec![
            Formula::cmp(n1.clone(), Rel::Lt, Term::Inf),
            Formula::cmp(n1, Rel::Gt, Term::Inf),
        ]);
        let norm = normalize(&f).unwrap();
        let r = eliminate_inf(&norm, &mut NameSupply::new());
        let s = r.sentinel.unwrap();
        let mut vars = r.formula.vars();
        vars.remove("n");
        assert_eq!(vars.into_iter().collect::<Vec<_>>(), vec![s]);
    }

    #[test]
    fn no_inf_means_no_sentinel() {
        let f = le(Term::v("x"), Term::k(2));
        let r = eliminate_inf(&f, &mut NameSupply::new());
        assert_eq!(r.formula, f);
        assert_eq!(r.sentinel, None);
    }

    #[test]
    fn substitution_reaches_fixpoint_within_bound() {
        // inf <= x, x <= y  ->  x = inf, then inf <= y -> y = inf
        let f = Formula::And(vec![le(Term::Inf, Term::v("x")), le(Term::v("x"), Term::v("y"))]);
        let (g, stats) = normalize_with_stats(&f, DEFAULT_DISJUNCT_CAP).unwrap();
        assert_eq!(g, Formula::True);
        assert!(stats.passes <= stats.bound, "{stats:?}");
    }

    #[test]
    fn indeterminate_form_propagates() {
        let f = Formula::And(vec![
            Formula::cmp(Term::v("x"), Rel::Le, Term::k(0)),
            le(Term::add(Term::Inf, Term::neg_inf()), Term::v("x")),
        ]);
        assert!(matches!(normalize(&f), Err(PureError::IndeterminateForm(_))));
    }

    #[test]
    fn residual_strict_becomes_integer_bound() {
        let f = Formula::not(le(Term::v("x"), Term::v("y")));
        let r = eliminate_inf_with(&f, "s");
        let mut y1 = Lin::var("y");
        y1.c0 = 1;
        assert_eq!(r.formula, le(Term::Lin(y1), Term::v("x")));
    }
}
