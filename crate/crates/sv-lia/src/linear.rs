use std::collections::{BTreeMap, BTreeSet};

use sv_pure::{canon_term, desugar, Atom, Formula, Lin, NameSupply, Rel, Term};

use crate::LiaError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    Le,
    Eq,
}

/// `lhs <= 0` or `lhs = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearAtom {
    pub kind: Kind,
    pub lhs: Lin,
}

impl LinearAtom {
    pub fn le(a: &Lin, b: &Lin) -> Self {
        LinearAtom { kind: Kind::Le, lhs: a.sub(b) }
    }

    pub fn eq(a: &Lin, b: &Lin) -> Self {
        LinearAtom { kind: Kind::Eq, lhs: a.sub(b) }
    }

    pub fn holds(&self, env: &dyn Fn(&str) -> i64) -> bool {
        let v = self.lhs.eval(env);
        match self.kind {
            Kind::Le => v <= 0,
            Kind::Eq => v == 0,
        }
    }

    pub fn to_formula(&self) -> Formula {
        let rel = match self.kind {
            Kind::Le => Rel::Le,
            Kind::Eq => Rel::Eq,
        };
        let mut rhs = Lin::constant(-self.lhs.c0);
        rhs.coeffs.clear();
        let mut lhs = self.lhs.clone();
        lhs.c0 = 0;
        Formula::cmp(Term::Lin(lhs), rel, Term::Lin(rhs))
    }
}

fn expand_term(t: &Term, names: &mut NameSupply, defs: &mut Vec<Formula>) -> Term {
    match t {
        Term::Lin(_) | Term::Inf => t.clone(),
        Term::Mul(k, a) => Term::mul(*k, expand_term(a, names, defs)),
        Term::Neg(a) => Term::neg(expand_term(a, names, defs)),
        Term::Add(a, b) => Term::add(expand_term(a, names, defs), expand_term(b, names, defs)),
        Term::Min(a, b) | Term::Max(a, b) => {
            let a = expand_term(a, names, defs);
            let b = expand_term(b, names, defs);
            let m = Term::v(&names.fresh("m"));
            let eq = |x: &Term| Formula::cmp(m.clone(), Rel::Eq, x.clone());
            let le = |x: &Term, y: &Term| Formula::cmp(x.clone(), Rel::Le, y.clone());
            let def = if matches!(t, Term::Min(..)) {
                Formula::Or(vec![
                    Formula::And(vec![eq(&a), le(&a, &b)]),
                    Formula::And(vec![eq(&b), le(&b, &a)]),
                ])
            } else {
                Formula::Or(vec![
                    Formula::And(vec![eq(&a), le(&b, &a)]),
                    Formula::And(vec![eq(&b), le(&a, &b)]),
                ])
            };
            defs.push(def);
            m
        }
    }
}

fn expand_atom(a: &Atom, names: &mut NameSupply, positive: bool) -> Formula {
    let mut defs = Vec::new();
    let atom = match a {
        Atom::Cmp(x, r, y) => {
            let x = expand_term(x, names, &mut defs);
            let y = expand_term(y, names, &mut defs);
            Formula::cmp(x, *r, y)
        }
        Atom::Null(_) => Formula::Atom(a.clone()),
    };
    let lit = if positive { atom } else { Formula::not(atom) };
    if defs.is_empty() {
        lit
    } else {
        defs.push(lit);
        Formula::And(defs)
    }
}

fn expand_nnf(f: &Formula, names: &mut NameSupply) -> Formula {
    match f {
        Formula::True | Formula::False => f.clone(),
        Formula::Atom(a) => expand_atom(a, names, true),
        Formula::Not(x) => match x.as_ref() {
            Formula::Atom(a) => expand_atom(a, names, false),
            other => expand_nnf(&Formula::not(other.clone()).nnf(), names),
        },
        Formula::And(xs) => Formula::And(xs.iter().map(|x| expand_nnf(x, names)).collect()),
        Formula::Or(xs) => Formula::Or(xs.iter().map(|x| expand_nnf(x, names)).collect()),
    }
}

/// Replaces each min/max by a fresh variable with its defining case split.
pub fn expand_minmax(pi: &Formula, names: &mut NameSupply) -> Formula {
    let has = pi.atoms().iter().any(|a| match a {
        Atom::Cmp(x, _, y) => x.has_minmax() || y.has_minmax(),
        Atom::Null(_) => false,
    });
    if !has {
        return pi.clone();
    }
    expand_nnf(&pi.nnf(), names)
}

fn lin_of(t: &Term) -> Result<Lin, LiaError> {
    match canon_term(t)? {
        Term::Lin(l) => Ok(l),
        other => Err(LiaError::NotLinear(other.to_string())),
    }
}

fn literal(a: &Atom, positive: bool) -> Result<Vec<Vec<LinearAtom>>, LiaError> {
    let (x, rel, y) = match a {
        Atom::Cmp(x, r, y) => (lin_of(x)?, *r, lin_of(y)?),
        Atom::Null(v) => (Lin::var(v), Rel::Eq, Lin::constant(0)),
    };
    let one = Lin::constant(1);
    let lt = |a: &Lin, b: &Lin| LinearAtom::le(&a.add(&one), b);
    let rel = if positive {
        rel
    } else {
        match rel {
            Rel::Le => Rel::Gt,
            Rel::Lt => Rel::Ge,
            Rel::Ge => Rel::Lt,
            Rel::Gt => Rel::Le,
            Rel::Eq => Rel::Ne,
            Rel::Ne => Rel::Eq,
        }
    };
    Ok(match rel {
        Rel::Le => vec![vec![LinearAtom::le(&x, &y)]],
        Rel::Ge => vec![vec![LinearAtom::le(&y, &x)]],
        Rel::Lt => vec![vec![lt(&x, &y)]],
        Rel::Gt => vec![vec![lt(&y, &x)]],
        Rel::Eq => vec![vec![LinearAtom::eq(&x, &y)]],
        Rel::Ne => vec![vec![lt(&x, &y)], vec![lt(&y, &x)]],
    })
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// False if two atoms bound the same linear form to an empty interval, or a
/// ground atom is false. A cheap necessary condition for satisfiability.
fn bounds_consistent(conj: &[LinearAtom]) -> bool {
    let mut iv: BTreeMap<Vec<(&str, i64)>, (i64, i64)> = BTreeMap::new();
    for a in conj {
        if a.lhs.coeffs.is_empty() {
            let ok = match a.kind {
                Kind::Le => a.lhs.c0 <= 0,
                Kind::Eq => a.lhs.c0 == 0,
            };
            if !ok {
                return false;
            }
            continue;
        }
        // lhs = g*L + c0 with the first coefficient of L positive.
        let g = a.lhs.coeffs.values().fold(0, |acc, c| gcd(acc, *c));
        let sign = if *a.lhs.coeffs.values().next().unwrap() < 0 { -1 } else { 1 };
        let key: Vec<(&str, i64)> = a.lhs.coeffs.iter().map(|(v, c)| (v.as_str(), sign * c / g)).collect();
        let gs = g * sign;
        let (lo, hi) = match a.kind {
            // gs*L <= -c0
            Kind::Le if gs > 0 => (i64::MIN, (-a.lhs.c0).div_euclid(gs)),
            Kind::Le => (-((-a.lhs.c0).div_euclid(-gs)), i64::MAX),
            Kind::Eq => {
                if a.lhs.c0 % g != 0 {
                    return false;
                }
                let v = -a.lhs.c0 / gs;
                (v, v)
            }
        };
        let e = iv.entry(key).or_insert((i64::MIN, i64::MAX));
        e.0 = e.0.max(lo);
        e.1 = e.1.min(hi);
        if e.0 > e.1 {
            return false;
        }
    }
    true
}

fn dnf_nnf(f: &Formula, cap: usize) -> Result<Vec<Vec<LinearAtom>>, LiaError> {
    Ok(match f {
        Formula::True => vec![vec![]],
        Formula::False => vec![],
        Formula::Atom(a) => literal(a, true)?,
        Formula::Not(x) => match x.as_ref() {
            Formula::Atom(a) => literal(a, false)?,
            other => dnf_nnf(&Formula::not(other.clone()).nnf(), cap)?,
        },
        Formula::Or(xs) => {
            let mut out = Vec::new();
            for x in xs {
                out.extend(dnf_nnf(x, cap)?);
                if out.len() > cap {
                    return Err(LiaError::DisjunctLimit(cap));
                }
            }
            out
        }
        Formula::And(xs) => {
            let mut acc = vec![vec![]];
            for x in xs {
                let d = dnf_nnf(x, cap)?;
                if acc.len().saturating_mul(d.len()) > cap {
                    return Err(LiaError::DisjunctLimit(cap));
                }
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for a in &acc {
                    for b in &d {
                        let mut c: Vec<LinearAtom> = a.clone();
                        c.extend(b.iter().cloned());
                        if bounds_consistent(&c) {
                            next.push(c);
                        }
                    }
                }
                acc = next;
            }
            acc
        }
    })
}

/// Disjunctive normal form over linear atoms; the empty list is `false`.
///
/// Negated atoms are removed by integer complement.
pub fn dnf(pi: &Formula, cap: usize) -> Result<Vec<Vec<LinearAtom>>, LiaError> {
    let d = dnf_nnf(&desugar(pi).nnf(), cap)?;
    let mut seen = BTreeSet::new();
    Ok(d.into_iter()
        .map(|mut c| {
            c.sort();
            c.dedup();
            c
        })
        .filter(|c| seen.insert(c.clone()))
        .collect())
}

/// Callbacks of [`search_dnf`].
pub struct Visitor<'a, R> {
    /// Called on each complete conjunction; `Some` stops the search.
    pub leaf: &'a mut dyn FnMut(&[LinearAtom]) -> Result<Option<R>, LiaError>,
    /// Called on the partial conjunction before branching; `false` prunes.
    pub feasible: &'a mut dyn FnMut(&[LinearAtom]) -> Result<bool, LiaError>,
}

/// Depth-first enumeration of the conjunctions of `pi`'s DNF, skipping
/// branches whose partial conjunction is infeasible. At most `cap`
/// conjunctions are passed to the leaf callback.
pub fn search_dnf<R>(pi: &Formula, cap: usize, v: &mut Visitor<'_, R>) -> Result<Option<R>, LiaError> {
    let mut leaves = 0;
    let root = desugar(pi).nnf();
    search(vec![Item::F(&root)], &mut vec![], cap, &mut leaves, v)
}

#[derive(Clone)]
enum Item<'f> {
    F(&'f Formula),
    Or(&'f [Formula]),
    Lits(Vec<Vec<LinearAtom>>),
}

fn search<'f, R>(
    mut pending: Vec<Item<'f>>,
    conj: &mut Vec<LinearAtom>,
    cap: usize,
    leaves: &mut usize,
    v: &mut Visitor<'_, R>,
) -> Result<Option<R>, LiaError> {
    // Absorb every unit literal first; branch points are deferred.
    let mut deferred: Vec<Item<'f>> = Vec::new();
    while let Some(it) = pending.pop() {
        let f = match it {
            Item::F(f) => f,
            other => {
                deferred.push(other);
                continue;
            }
        };
        let mut ds = match f {
            Formula::True => continue,
            Formula::False => return Ok(None),
            Formula::And(xs) => {
                pending.extend(xs.iter().map(Item::F));
                continue;
            }
            Formula::Or(xs) => {
                deferred.push(Item::Or(xs));
                continue;
            }
            Formula::Atom(a) => literal(a, true)?,
            Formula::Not(x) => match x.as_ref() {
                Formula::Atom(a) => literal(a, false)?,
                other => dnf_nnf(&Formula::not(other.clone()).nnf(), cap)?,
            },
        };
        match ds.len() {
            0 => return Ok(None),
            1 => conj.extend(ds.pop().unwrap()),
            _ => deferred.push(Item::Lits(ds)),
        }
    }
    if !bounds_consistent(conj) {
        return Ok(None);
    }
    let Some(first) = deferred.pop() else {
        *leaves += 1;
        if *leaves > cap {
            return Err(LiaError::DisjunctLimit(cap));
        }
        let mut c = conj.clone();
        c.sort();
        c.dedup();
        return (v.leaf)(&c);
    };
    if !(v.feasible)(conj)? {
        return Ok(None);
    }
    let mark = conj.len();
    let options: Vec<Item<'f>> = match first {
        Item::Or(xs) => xs.iter().map(Item::F).collect(),
        Item::Lits(ds) => ds.into_iter().map(|d| Item::Lits(vec![d])).collect(),
        Item::F(_) => unreachable!(),
    };
    for o in options {
        conj.truncate(mark);
        let mut p = deferred.clone();
        match o {
            Item::Lits(mut d) => conj.extend(d.pop().unwrap()),
            o => p.push(o),
        }
        if let Some(r) = search(p, conj, cap, leaves, v)? {
            return Ok(Some(r));
        }
    }
    conj.truncate(mark);
    Ok(None)
}
