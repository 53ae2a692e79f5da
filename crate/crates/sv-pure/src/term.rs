use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::PureError;

/// Finite linear form `c0 + Σ ci·vi`. Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Lin {
    pub c0: i64,
    pub coeffs: BTreeMap<String, i64>,
}

impl Lin {
    pub fn constant(k: i64) -> Self {
        Lin { c0: k, coeffs: BTreeMap::new() }
    }

    pub fn var(v: &str) -> Self {
        Lin::scaled(1, v)
    }

    pub fn scaled(k: i64, v: &str) -> Self {
        let mut coeffs = BTreeMap::new();
        if k != 0 {
            coeffs.insert(v.to_string(), k);
        }
        Lin { c0: 0, coeffs }
    }

    pub fn add(&self, other: &Lin) -> Lin {
        let mut out = self.clone();
        out.c0 += other.c0;
        for (v, c) in &other.coeffs {
            out.add_coeff(v, *c);
        }
        out
    }

    pub fn add_coeff(&mut self, v: &str, c: i64) {
        let e = self.coeffs.entry(v.to_string()).or_insert(0);
        *e += c;
        if *e == 0 {
            self.coeffs.remove(v);
        }
    }

    pub fn scale(&self, k: i64) -> Lin {
        if k == 0 {
            return Lin::default();
        }
        Lin {
            c0: self.c0 * k,
            coeffs: self.coeffs.iter().map(|(v, c)| (v.clone(), c * k)).collect(),
        }
    }

    pub fn neg(&self) -> Lin {
        self.scale(-1)
    }

    pub fn sub(&self, other: &Lin) -> Lin {
        self.add(&other.neg())
    }

    pub fn as_const(&self) -> Option<i64> {
        self.coeffs.is_empty().then_some(self.c0)
    }

    /// The variable name when this form is a lone variable with coefficient 1.
    pub fn as_var(&self) -> Option<&str> {
        if self.c0 != 0 || self.coeffs.len() != 1 {
            return None;
        }
        let (v, c) = self.coeffs.iter().next()?;
        (*c == 1).then_some(v.as_str())
    }

    pub fn coeff(&self, v: &str) -> i64 {
        self.coeffs.get(v).copied().unwrap_or(0)
    }

    /// Replace `v` by `by`.
    pub fn subst(&self, v: &str, by: &Lin) -> Lin {
        let c = self.coeff(v);
        if c == 0 {
            return self.clone();
        }
        let mut rest = self.clone();
        rest.coeffs.remove(v);
        rest.add(&by.scale(c))
    }

    pub fn eval(&self, env: &dyn Fn(&str) -> i64) -> i64 {
        self.coeffs.iter().fold(self.c0, |acc, (v, c)| acc + c * env(v))
    }
}

impl fmt::Display for Lin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            let c = *c;
            if first {
                match c {
                    1 => write!(f, "{v}")?,
                    -1 => write!(f, "-{v}")?,
                    _ => write!(f, "{c}*{v}")?,
                }
            } else {
                match c {
                    1 => write!(f, "+{v}")?,
                    -1 => write!(f, "-{v}")?,
                    c if c < 0 => write!(f, "-{}*{v}", -c)?,
                    _ => write!(f, "+{c}*{v}")?,
                }
            }
            first = false;
        }
        if first {
            write!(f, "{}", self.c0)
        } else if self.c0 > 0 {
            write!(f, "+{}", self.c0)
        } else if self.c0 < 0 {
            write!(f, "-{}", -(self.c0 as i128))
        } else {
            Ok(())
        }
    }
}

/// Extended arithmetic term. Constants, variables and `k×v` live in `Lin`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Lin(Lin),
    Mul(i64, Box<Term>),
    Add(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Min(Box<Term>, Box<Term>),
    Max(Box<Term>, Box<Term>),
    Inf,
}

impl Term {
    pub fn k(k: i64) -> Term {
        Term::Lin(Lin::constant(k))
    }

    pub fn v(v: &str) -> Term {
        Term::Lin(Lin::var(v))
    }

    pub fn neg_inf() -> Term {
        Term::Neg(Box::new(Term::Inf))
    }

    pub fn add(a: Term, b: Term) -> Term {
        Term::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Term, b: Term) -> Term {
        Term::add(a, Term::Neg(Box::new(b)))
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn mul(k: i64, a: Term) -> Term {
        Term::Mul(k, Box::new(a))
    }

    pub fn min(a: Term, b: Term) -> Term {
        Term::Min(Box::new(a), Box::new(b))
    }

    pub fn max(a: Term, b: Term) -> Term {
        Term::Max(Box::new(a), Box::new(b))
    }

    pub fn is_pos_inf(&self) -> bool {
        matches!(self, Term::Inf)
    }

    pub fn is_neg_inf(&self) -> bool {
        matches!(self, Term::Neg(a) if a.is_pos_inf())
    }

    /// `Some(true)` for `inf`, `Some(false)` for `-inf`.
    pub fn inf_sign(&self) -> Option<bool> {
        if self.is_pos_inf() {
            Some(true)
        } else if self.is_neg_inf() {
            Some(false)
        } else {
            None
        }
    }

    pub fn as_lin(&self) -> Option<&Lin> {
        match self {
            Term::Lin(l) => Some(l),
            _ => None,
        }
    }

    pub fn has_inf(&self) -> bool {
        match self {
            Term::Inf => true,
            Term::Lin(_) => false,
            Term::Mul(_, a) | Term::Neg(a) => a.has_inf(),
            Term::Add(a, b) | Term::Min(a, b) | Term::Max(a, b) => a.has_inf() || b.has_inf(),
        }
    }

    pub fn has_minmax(&self) -> bool {
        match self {
            Term::Inf | Term::Lin(_) => false,
            Term::Mul(_, a) | Term::Neg(a) => a.has_minmax(),
            Term::Add(a, b) => a.has_minmax() || b.has_minmax(),
            Term::Min(..) | Term::Max(..) => true,
        }
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Inf => {}
            Term::Lin(l) => out.extend(l.coeffs.keys().cloned()),
            Term::Mul(_, a) | Term::Neg(a) => a.vars(out),
            Term::Add(a, b) | Term::Min(a, b) | Term::Max(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }

    /// Structural map over every node, bottom-up.
    pub fn map(&self, f: &dyn Fn(Term) -> Term) -> Term {
        let t = match self {
            Term::Inf | Term::Lin(_) => self.clone(),
            Term::Mul(k, a) => Term::Mul(*k, Box::new(a.map(f))),
            Term::Neg(a) => Term::Neg(Box::new(a.map(f))),
            Term::Add(a, b) => Term::Add(Box::new(a.map(f)), Box::new(b.map(f))),
            Term::Min(a, b) => Term::Min(Box::new(a.map(f)), Box::new(b.map(f))),
            Term::Max(a, b) => Term::Max(Box::new(a.map(f)), Box::new(b.map(f))),
        };
        f(t)
    }

    /// Replace variable `v` by term `by` (not canonicalized).
    pub fn subst(&self, v: &str, by: &Term) -> Term {
        self.map(&|t| match t {
            Term::Lin(l) if l.coeff(v) != 0 => {
                let c = l.coeff(v);
                let mut rest = l.clone();
                rest.coeffs.remove(v);
                Term::add(Term::Lin(rest), Term::mul(c, by.clone()))
            }
            other => other,
        })
    }

    pub fn rename(&self, from: &str, to: &str) -> Term {
        self.map(&|t| match t {
            Term::Lin(l) if l.coeff(from) != 0 => Term::Lin(l.subst(from, &Lin::var(to))),
            other => other,
        })
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Lin(l) => write!(f, "{l}"),
            Term::Inf => write!(f, "inf"),
            Term::Neg(a) if a.is_pos_inf() => write!(f, "-inf"),
            Term::Neg(a) => write!(f, "-({a})"),
            Term::Mul(k, a) => write!(f, "{k}*({a})"),
            Term::Add(a, b) => write!(f, "{a}+{b}"),
            Term::Min(a, b) => write!(f, "min({a},{b})"),
            Term::Max(a, b) => write!(f, "max({a},{b})"),
        }
    }
}

enum C {
    Fin(Lin),
    PInf,
    NInf,
    Min(Box<C>, Box<C>),
    Max(Box<C>, Box<C>),
}

impl C {
    fn into_term(self) -> Term {
        match self {
            C::Fin(l) => Term::Lin(l),
            C::PInf => Term::Inf,
            C::NInf => Term::neg_inf(),
            C::Min(a, b) => Term::min(a.into_term(), b.into_term()),
            C::Max(a, b) => Term::max(a.into_term(), b.into_term()),
        }
    }

    fn dup(&self) -> C {
        match self {
            C::Fin(l) => C::Fin(l.clone()),
            C::PInf => C::PInf,
            C::NInf => C::NInf,
            C::Min(a, b) => C::Min(Box::new(a.dup()), Box::new(b.dup())),
            C::Max(a, b) => C::Max(Box::new(a.dup()), Box::new(b.dup())),
        }
    }
}

fn c_neg(a: C) -> C {
    match a {
        C::Fin(l) => C::Fin(l.neg()),
        C::PInf => C::NInf,
        C::NInf => C::PInf,
        C::Min(x, y) => C::Max(Box::new(c_neg(*x)), Box::new(c_neg(*y))),
        C::Max(x, y) => C::Min(Box::new(c_neg(*x)), Box::new(c_neg(*y))),
    }
}

fn c_scale(k: i64, a: C) -> C {
    if k == 0 {
        return C::Fin(Lin::default());
    }
    if k < 0 {
        return c_neg(c_scale(-k, a));
    }
    match a {
        C::Fin(l) => C::Fin(l.scale(k)),
        C::PInf => C::PInf,
        C::NInf => C::NInf,
        C::Min(x, y) => C::Min(Box::new(c_scale(k, *x)), Box::new(c_scale(k, *y))),
        C::Max(x, y) => C::Max(Box::new(c_scale(k, *x)), Box::new(c_scale(k, *y))),
    }
}

fn c_add(a: C, b: C, src: &Term) -> Result<C, PureError> {
    Ok(match (a, b) {
        (C::Min(x, y), b) => C::Min(
            Box::new(c_add(*x, b.dup(), src)?),
            Box::new(c_add(*y, b, src)?),
        ),
        (C::Max(x, y), b) => C::Max(
            Box::new(c_add(*x, b.dup(), src)?),
            Box::new(c_add(*y, b, src)?),
        ),
        (a, C::Min(x, y)) => C::Min(
            Box::new(c_add(a.dup(), *x, src)?),
            Box::new(c_add(a, *y, src)?),
        ),
        (a, C::Max(x, y)) => C::Max(
            Box::new(c_add(a.dup(), *x, src)?),
            Box::new(c_add(a, *y, src)?),
        ),
        (C::PInf, C::NInf) | (C::NInf, C::PInf) => {
            return Err(PureError::IndeterminateForm(src.to_string()))
        }
        (C::PInf, _) | (_, C::PInf) => C::PInf,
        (C::NInf, _) | (_, C::NInf) => C::NInf,
        (C::Fin(x), C::Fin(y)) => C::Fin(x.add(&y)),
    })
}

fn canon(t: &Term, src: &Term) -> Result<C, PureError> {
    Ok(match t {
        Term::Lin(l) => C::Fin(l.clone()),
        Term::Inf => C::PInf,
        Term::Neg(a) => c_neg(canon(a, src)?),
        Term::Mul(k, a) => c_scale(*k, canon(a, src)?),
        Term::Add(a, b) => c_add(canon(a, src)?, canon(b, src)?, src)?,
        Term::Min(a, b) => C::Min(Box::new(canon(a, src)?), Box::new(canon(b, src)?)),
        Term::Max(a, b) => C::Max(Box::new(canon(a, src)?), Box::new(canon(b, src)?)),
    })
}

/// Canonical form: `inf`, `-inf`, a finite linear form, or min/max of canonical terms.
pub fn canon_term(t: &Term) -> Result<Term, PureError> {
    Ok(canon(t, t)?.into_term())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collects_coefficients() {
        let t = Term::add(
            Term::add(Term::Lin(Lin::scaled(2, "v")), Term::k(3)),
            Term::v("v"),
        );
        let mut want = Lin::scaled(3, "v");
        want.c0 = 3;
        assert_eq!(canon_term(&t).unwrap(), Term::Lin(want));
    }

    #[test]
    fn absorbs_infinity() {
        assert_eq!(canon_term(&Term::add(Term::v("v"), Term::Inf)).unwrap(), Term::Inf);
        assert_eq!(
            canon_term(&Term::add(Term::neg_inf(), Term::k(4))).unwrap(),
            Term::neg_inf()
        );
        assert_eq!(canon_term(&Term::add(Term::Inf, Term::Inf)).unwrap(), Term::Inf);
    }

    #[test]
    fn scales_infinity_by_sign() {
        assert_eq!(canon_term(&Term::mul(3, Term::Inf)).unwrap(), Term::Inf);
        assert_eq!(canon_term(&Term::mul(-2, Term::Inf)).unwrap(), Term::neg_inf());
        assert_eq!(canon_term(&Term::mul(0, Term::Inf)).unwrap(), Term::k(0));
    }

    #[test]
    fn inf_minus_inf_is_an_error() {
        let t = Term::add(Term::Inf, Term::neg_inf());
        assert!(matches!(canon_term(&t), Err(PureError::IndeterminateForm(_))));
    }

    #[test]
    fn negation_swaps_min_and_max() {
        let t = Term::neg(Term::min(Term::v("a"), Term::Inf));
        assert_eq!(
            canon_term(&t).unwrap(),
            Term::max(Term::Lin(Lin::scaled(-1, "a")), Term::neg_inf())
        );
    }

    #[test]
    fn displays_linear_forms() {
        let mut l = Lin::var("n");
        l.c0 = 1;
        assert_eq!(l.to_string(), "n+1");
        let mut l = Lin::scaled(-2, "x");
        l.add_coeff("y", 1);
        l.c0 = -3;
        assert_eq!(l.to_string(), "-2*x+y-3");
        assert_eq!(Lin::constant(0).to_string(), "0");
    }
}
