use std::collections::BTreeSet;
use std::fmt;

use crate::term::{canon_term, Term};
use crate::PureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Le,
    Lt,
    Ge,
    Gt,
    Eq,
    Ne,
}

impl Rel {
    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Le => "<=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Gt => ">",
            Rel::Eq => "=",
            Rel::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Cmp(Term, Rel, Term),
    /// `v = null`
    Null(String),
}

impl Atom {
    pub fn cmp(a: Term, rel: Rel, b: Term) -> Atom {
        Atom::Cmp(a, rel, b)
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Atom::Cmp(a, _, b) => {
                a.vars(out);
                b.vars(out);
            }
            Atom::Null(v) => {
                out.insert(v.clone());
            }
        }
    }

    pub fn has_inf(&self) -> bool {
        match self {
            Atom::Cmp(a, _, b) => a.has_inf() || b.has_inf(),
            Atom::Null(_) => false,
        }
    }

    pub fn map_terms(&self, f: &dyn Fn(&Term) -> Term) -> Atom {
        match self {
            Atom::Cmp(a, r, b) => Atom::Cmp(f(a), *r, f(b)),
            Atom::Null(v) => Atom::Null(v.clone()),
        }
    }

    pub fn try_map_terms(
        &self,
        f: &dyn Fn(&Term) -> Result<Term, PureError>,
    ) -> Result<Atom, PureError> {
        Ok(match self {
            Atom::Cmp(a, r, b) => Atom::Cmp(f(a)?, *r, f(b)?),
            Atom::Null(v) => Atom::Null(v.clone()),
        })
    }

    pub fn canon(&self) -> Result<Atom, PureError> {
        self.try_map_terms(&canon_term)
    }

    pub fn subst(&self, v: &str, by: &Term) -> Atom {
        self.map_terms(&|t| t.subst(v, by))
    }

    pub fn rename(&self, from: &str, to: &str) -> Atom {
        match self {
            Atom::Null(v) if v == from => Atom::Null(to.to_string()),
            _ => self.map_terms(&|t| t.rename(from, to)),
        }
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Cmp(a, r, b) => write!(f, "{a}{}{b}", r.symbol()),
            Atom::Null(v) => write!(f, "{v}=null"),
        }
    }
}

/// Boolean structure over atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    True,
    False,
    Atom(Atom),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn atom(a: Atom) -> Formula {
        Formula::Atom(a)
    }

    pub fn cmp(a: Term, rel: Rel, b: Term) -> Formula {
        Formula::Atom(Atom::Cmp(a, rel, b))
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    /// Conjunction with unit folding and flattening.
    pub fn and(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::True => {}
                Formula::False => return Formula::False,
                Formula::And(xs) => out.extend(xs),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::True,
            1 => out.pop().unwrap(),
            _ => Formula::And(out),
        }
    }

    /// Disjunction with unit folding and flattening.
    pub fn or(parts: Vec<Formula>) -> Formula {
        let mut out = Vec::new();
        for p in parts {
            match p {
                Formula::False => {}
                Formula::True => return Formula::True,
                Formula::Or(xs) => out.extend(xs),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Formula::False,
            1 => out.pop().unwrap(),
            _ => Formula::Or(out),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => a.vars(out),
            Formula::Not(f) => f.collect_vars(out),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.collect_vars(out)),
        }
    }

    pub fn has_inf(&self) -> bool {
        match self {
            Formula::True | Formula::False => false,
            Formula::Atom(a) => a.has_inf(),
            Formula::Not(f) => f.has_inf(),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().any(Formula::has_inf),
        }
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Formula::True | Formula::False => {}
            Formula::Atom(a) => out.push(a),
            Formula::Not(f) => f.collect_atoms(out),
            Formula::And(xs) | Formula::Or(xs) => xs.iter().for_each(|x| x.collect_atoms(out)),
        }
    }

    pub fn map_atoms(&self, f: &dyn Fn(&Atom) -> Formula) -> Formula {
        match self {
            Formula::True | Formula::False => self.clone(),
            Formula::Atom(a) => f(a),
            Formula::Not(x) => Formula::not(x.map_atoms(f)),
            Formula::And(xs) => Formula::And(xs.iter().map(|x| x.map_atoms(f)).collect()),
            Formula::Or(xs) => Formula::Or(xs.iter().map(|x| x.map_atoms(f)).collect()),
        }
    }

    pub fn subst(&self, v: &str, by: &Term) -> Formula {
        self.map_atoms(&|a| Formula::Atom(a.subst(v, by)))
    }

    pub fn rename(&self, from: &str, to: &str) -> Formula {
        self.map_atoms(&|a| Formula::Atom(a.rename(from, to)))
    }

    /// Negation normal form: `Not` only directly above atoms.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, pos: bool) -> Formula {
        match self {
            Formula::True => if pos { Formula::True } else { Formula::False },
            Formula::False => if pos { Formula::False } else { Formula::True },
            Formula::Atom(_) => {
                if pos {
                    self.clone()
                } else {
                    Formula::not(self.clone())
                }
            }
            Formula::Not(f) => f.nnf_signed(!pos),
            Formula::And(xs) => {
                let parts = xs.iter().map(|x| x.nnf_signed(pos)).collect();
                if pos { Formula::and(parts) } else { Formula::or(parts) }
            }
            Formula::Or(xs) => {
                let parts = xs.iter().map(|x| x.nnf_signed(pos)).collect();
                if pos { Formula::or(parts) } else { Formula::and(parts) }
            }
        }
    }
}

fn fmt_nested(f: &mut fmt::Formatter<'_>, x: &Formula) -> fmt::Result {
    match x {
        Formula::And(_) | Formula::Or(_) => write!(f, "({x})"),
        _ => write!(f, "{x}"),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::True => write!(f, "true"),
            Formula::False => write!(f, "false"),
            Formula::Atom(a) => write!(f, "{a}"),
            Formula::Not(x) => match x.as_ref() {
                Formula::Atom(_) | Formula::True | Formula::False => write!(f, "!({x})"),
                _ => write!(f, "!{}", Paren(x)),
            },
            Formula::And(xs) | Formula::Or(xs) => {
                let sep = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "{sep}")?;
                    }
                    fmt_nested(f, x)?;
                }
                Ok(())
            }
        }
    }
}

struct Paren<'a>(&'a Formula);

impl fmt::Display for Paren<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn and_or_fold_units() {
        assert_eq!(Formula::and(vec![Formula::True, Formula::True]), Formula::True);
        assert_eq!(
            Formula::and(vec![Formula::cmp(Term::v("x"), Rel::Le, Term::k(0)), Formula::False]),
            Formula::False
        );
        assert_eq!(Formula::or(vec![]), Formula::False);
    }

    #[test]
    fn nnf_pushes_negation() {
        let a = Formula::cmp(Term::v("x"), Rel::Le, Term::k(0));
        let b = Formula::Atom(Atom::Null("p".into()));
        let f = Formula::not(Formula::And(vec![a.clone(), b.clone()]));
        assert_eq!(f.nnf(), Formula::Or(vec![Formula::not(a), Formula::not(b)]));
    }

    #[test]
    fn prints_ascii() {
        let f = Formula::And(vec![
            Formula::cmp(Term::k(0), Rel::Le, Term::add(Term::v("n"), Term::k(1))),
            Formula::cmp(Term::add(Term::v("n"), Term::k(1)), Rel::Lt, Term::Inf),
        ]);
        assert_eq!(f.to_string(), "0<=n+1 & n+1<inf");
    }
}
