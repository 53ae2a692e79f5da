//! Reference semantics for pure formulas: an extended-integer evaluator, a
//! machine-bound evaluator, and a random formula generator.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::Rng;
use sv_pure::{Atom, Formula, Lin, Rel, Term};

/// An extended integer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Ext {
    NegInf,
    Fin(i64),
    PosInf,
}

impl Ord for Ext {
    fn cmp(&self, other: &Self) -> Ordering {
        fn rank(e: &Ext) -> (i8, i64) {
            match e {
                Ext::NegInf => (0, 0),
                Ext::Fin(k) => (1, *k),
                Ext::PosInf => (2, 0),
            }
        }
        rank(self).cmp(&rank(other))
    }
}

impl PartialOrd for Ext {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ext {
    fn add(self, o: Ext) -> Option<Ext> {
        match (self, o) {
            (Ext::Fin(a), Ext::Fin(b)) => Some(Ext::Fin(a + b)),
            (Ext::PosInf, Ext::NegInf) | (Ext::NegInf, Ext::PosInf) => None,
            (Ext::PosInf, _) | (_, Ext::PosInf) => Some(Ext::PosInf),
            _ => Some(Ext::NegInf),
        }
    }

    fn scale(self, k: i64) -> Ext {
        match self {
            Ext::Fin(a) => Ext::Fin(k * a),
            _ if k == 0 => Ext::Fin(0),
            Ext::PosInf if k > 0 => Ext::PosInf,
            Ext::NegInf if k < 0 => Ext::PosInf,
            _ => Ext::NegInf,
        }
    }
}

/// How `inf` is read: as a top element, or as concrete machine bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InfAs {
    Top,
    Bounds { min: i64, max: i64 },
}

pub fn eval_term(t: &Term, env: &dyn Fn(&str) -> Ext, inf: InfAs) -> Option<Ext> {
    Some(match t {
        Term::Inf => match inf {
            InfAs::Top => Ext::PosInf,
            InfAs::Bounds { max, .. } => Ext::Fin(max),
        },
        Term::Neg(a) if a.is_pos_inf() => match inf {
            InfAs::Top => Ext::NegInf,
            InfAs::Bounds { min, .. } => Ext::Fin(min),
        },
        Term::Lin(l) => eval_lin(l, env)?,
        Term::Mul(k, a) => eval_term(a, env, inf)?.scale(*k),
        Term::Add(a, b) => eval_term(a, env, inf)?.add(eval_term(b, env, inf)?)?,
        Term::Neg(a) => eval_term(a, env, inf)?.scale(-1),
        Term::Min(a, b) => eval_term(a, env, inf)?.min(eval_term(b, env, inf)?),
        Term::Max(a, b) => eval_term(a, env, inf)?.max(eval_term(b, env, inf)?),
    })
}

fn eval_lin(l: &Lin, env: &dyn Fn(&str) -> Ext) -> Option<Ext> {
    let mut acc = Ext::Fin(l.c0);
    for (v, c) in &l.coeffs {
        acc = acc.add(env(v).scale(*c))?;
    }
    Some(acc)
}

/// Truth of `f`; `None` on an indeterminate sum.
pub fn eval(f: &Formula, env: &dyn Fn(&str) -> Ext, inf: InfAs) -> Option<bool> {
    Some(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Not(x) => !eval(x, env, inf)?,
        Formula::And(xs) => {
            let mut r = true;
            for x in xs {
                r &= eval(x, env, inf)?;
            }
            r
        }
        Formula::Or(xs) => {
            let mut r = false;
            for x in xs {
                r |= eval(x, env, inf)?;
            }
            r
        }
        Formula::Atom(Atom::Null(v)) => env(v) == Ext::Fin(0),
        Formula::Atom(Atom::Cmp(a, rel, b)) => {
            let (a, b) = (eval_term(a, env, inf)?, eval_term(b, env, inf)?);
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

/// Evaluates with `inf` read as machine bounds over finite integers.
pub fn eval_machine(f: &Formula, env: &BTreeMap<String, i64>, min: i64, max: i64) -> bool {
    let get = |v: &str| Ext::Fin(env.get(v).copied().unwrap_or(0));
    eval(f, &get, InfAs::Bounds { min, max }).unwrap_or(false)
}

/// Sort of a generated variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sort {
    /// Ranges over `[-B, B]`.
    Finite,
    /// Ranges over `[-B, B]` plus both infinities.
    Extended,
}

pub const BOX: i64 = 6;

/// A random formula with its variable sorts.
#[derive(Debug, Clone)]
pub struct Sample {
    pub sorts: BTreeMap<String, Sort>,
    pub formula: Formula,
}

impl Sample {
    /// The formula conjoined with the box constraints of its finite variables.
    pub fn boxed(&self) -> Formula {
        let mut parts = vec![self.formula.clone()];
        for (v, s) in &self.sorts {
            if *s == Sort::Finite {
                parts.push(Formula::cmp(Term::k(-BOX), Rel::Le, Term::v(v)));
                parts.push(Formula::cmp(Term::v(v), Rel::Le, Term::k(BOX)));
            }
        }
        Formula::and(parts)
    }

    /// Satisfiability by enumerating every valuation in the bounded model.
    pub fn sat_by_enumeration(&self) -> bool {
        let vars: Vec<(&String, &Sort)> = self.sorts.iter().collect();
        let domain = |s: &Sort| -> Vec<Ext> {
            let mut d: Vec<Ext> = (-BOX..=BOX).map(Ext::Fin).collect();
            if *s == Sort::Extended {
                d.push(Ext::NegInf);
                d.push(Ext::PosInf);
            }
            d
        };
        let doms: Vec<Vec<Ext>> = vars.iter().map(|(_, s)| domain(s)).collect();
        let mut idx = vec![0usize; vars.len()];
        loop {
            let env: BTreeMap<&str, Ext> =
                vars.iter().zip(&idx).zip(&doms).map(|(((v, _), &i), d)| (v.as_str(), d[i])).collect();
            let get = |v: &str| env.get(v).copied().unwrap_or(Ext::Fin(0));
            if eval(&self.formula, &get, InfAs::Top) == Some(true) {
                return true;
            }
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return false;
                }
                idx[k] += 1;
                if idx[k] < doms[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }
}

const RELS: [Rel; 6] = [Rel::Le, Rel::Lt, Rel::Ge, Rel::Gt, Rel::Eq, Rel::Ne];

/// Random pure formulas over at most three variables, depth at most three.
///
/// Finite variables appear in linear sums compared with each other;
/// extended variables appear alone, compared with variables, constants and
/// infinities, or inside min/max compared with constants.
pub struct Generator<R: Rng> {
    pub rng: R,
}

impl<R: Rng> Generator<R> {
    pub fn sample(&mut self) -> Sample {
        let n = self.rng.gen_range(1..=3);
        let sorts: BTreeMap<String, Sort> = ["x", "y", "z"][..n]
            .iter()
            .map(|v| (v.to_string(), if self.rng.gen_bool(0.5) { Sort::Finite } else { Sort::Extended }))
            .collect();
        let depth = self.rng.gen_range(0..=3);
        let formula = self.formula(&sorts, depth);
        Sample { sorts, formula }
    }

    /// An infinity-free formula over `x`, `y`, `z` with linear and min/max terms.
    pub fn finite(&mut self) -> Formula {
        let depth = self.rng.gen_range(0..=3);
        self.finite_formula(depth)
    }

    fn finite_formula(&mut self, depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.3) {
            let (a, b) = (self.finite_term(), self.finite_term());
            let rel = self.rel();
            return Formula::cmp(a, rel, b);
        }
        match self.rng.gen_range(0..3) {
            0 => Formula::not(self.finite_formula(depth - 1)),
            k => {
                let parts = (0..self.rng.gen_range(2..=3)).map(|_| self.finite_formula(depth - 1)).collect();
                if k == 1 {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
        }
    }

    fn finite_term(&mut self) -> Term {
        let vars = ["x".to_string(), "y".to_string(), "z".to_string()];
        let lin = |g: &mut Self| {
            let mut l = Lin::constant(g.rng.gen_range(-20..=20));
            for v in &vars {
                if g.rng.gen_bool(0.6) {
                    l.add_coeff(v, g.rng.gen_range(-3..=3));
                }
            }
            Term::Lin(l)
        };
        match self.rng.gen_range(0..6) {
            0 => {
                let (a, b) = (lin(self), lin(self));
                Term::min(a, b)
            }
            1 => {
                let (a, b) = (lin(self), lin(self));
                Term::max(a, b)
            }
            _ => lin(self),
        }
    }

    fn formula(&mut self, sorts: &BTreeMap<String, Sort>, depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.3) {
            return self.atom(sorts);
        }
        match self.rng.gen_range(0..3) {
            0 => Formula::not(self.formula(sorts, depth - 1)),
            k => {
                let parts = (0..self.rng.gen_range(2..=3)).map(|_| self.formula(sorts, depth - 1)).collect();
                if k == 1 {
                    Formula::And(parts)
                } else {
                    Formula::Or(parts)
                }
            }
        }
    }

    fn rel(&mut self) -> Rel {
        RELS[self.rng.gen_range(0..RELS.len())]
    }

    fn vars_of(sorts: &BTreeMap<String, Sort>, s: Sort) -> Vec<String> {
        sorts.iter().filter(|(_, t)| **t == s).map(|(v, _)| v.clone()).collect()
    }

    fn lin(&mut self, fin: &[String]) -> Term {
        let mut l = Lin::constant(self.rng.gen_range(-5..=5));
        for v in fin {
            l.add_coeff(v, self.rng.gen_range(-3..=3));
        }
        Term::Lin(l)
    }

    /// A variable, a constant, or an infinity.
    fn simple(&mut self, sorts: &BTreeMap<String, Sort>) -> Term {
        let vars: Vec<&String> = sorts.keys().collect();
        match self.rng.gen_range(0..4) {
            0 | 1 => Term::v(vars[self.rng.gen_range(0..vars.len())]),
            2 => Term::k(self.rng.gen_range(-5..=5)),
            _ => {
                if self.rng.gen_bool(0.5) {
                    Term::Inf
                } else {
                    Term::neg_inf()
                }
            }
        }
    }

    fn atom(&mut self, sorts: &BTreeMap<String, Sort>) -> Formula {
        let fin = Self::vars_of(sorts, Sort::Finite);
        let kind = self.rng.gen_range(0..3);
        let rel = self.rel();
        match kind {
            0 if !fin.is_empty() => {
                let (a, b) = (self.lin(&fin), self.lin(&fin));
                Formula::cmp(a, rel, b)
            }
            2 => {
                let (a, b) = (self.simple(sorts), self.simple(sorts));
                let m = if self.rng.gen_bool(0.5) { Term::min(a, b) } else { Term::max(a, b) };
                Formula::cmp(m, rel, Term::k(self.rng.gen_range(-5..=5)))
            }
            _ => {
                let (a, b) = (self.simple(sorts), self.simple(sorts));
                Formula::cmp(a, rel, b)
            }
        }
    }
}

enum CTerm {
    Lin(Vec<i64>, i64),
    Mul(i64, Box<CTerm>),
    Add(Box<CTerm>, Box<CTerm>),
    Neg(Box<CTerm>),
    Min(Box<CTerm>, Box<CTerm>),
    Max(Box<CTerm>, Box<CTerm>),
}

enum CForm {
    Const(bool),
    Cmp(CTerm, Rel, CTerm),
    Not(Box<CForm>),
    And(Vec<CForm>),
    Or(Vec<CForm>),
}

/// An infinity-free formula compiled against a fixed variable order, for
/// fast repeated evaluation.
pub struct Compiled {
    vars: Vec<String>,
    form: CForm,
}

impl Compiled {
    /// `None` if `f` mentions an infinity or a null test.
    pub fn new(f: &Formula, vars: &[&str]) -> Option<Compiled> {
        let vars: Vec<String> = vars.iter().map(|v| v.to_string()).collect();
        let form = Self::form(f, &vars)?;
        Some(Compiled { vars, form })
    }

    fn term(t: &Term, vars: &[String]) -> Option<CTerm> {
        Some(match t {
            Term::Inf => return None,
            Term::Lin(l) => {
                let cs = vars.iter().map(|v| l.coeff(v)).collect();
                if l.coeffs.keys().any(|v| !vars.contains(v)) {
                    return None;
                }
                CTerm::Lin(cs, l.c0)
            }
            Term::Mul(k, a) => CTerm::Mul(*k, Box::new(Self::term(a, vars)?)),
            Term::Neg(a) => CTerm::Neg(Box::new(Self::term(a, vars)?)),
            Term::Add(a, b) => CTerm::Add(Box::new(Self::term(a, vars)?), Box::new(Self::term(b, vars)?)),
            Term::Min(a, b) => CTerm::Min(Box::new(Self::term(a, vars)?), Box::new(Self::term(b, vars)?)),
            Term::Max(a, b) => CTerm::Max(Box::new(Self::term(a, vars)?), Box::new(Self::term(b, vars)?)),
        })
    }

    fn form(f: &Formula, vars: &[String]) -> Option<CForm> {
        Some(match f {
            Formula::True => CForm::Const(true),
            Formula::False => CForm::Const(false),
            Formula::Atom(Atom::Cmp(a, r, b)) => CForm::Cmp(Self::term(a, vars)?, *r, Self::term(b, vars)?),
            Formula::Atom(Atom::Null(_)) => return None,
            Formula::Not(g) => CForm::Not(Box::new(Self::form(g, vars)?)),
            Formula::And(gs) => CForm::And(gs.iter().map(|g| Self::form(g, vars)).collect::<Option<_>>()?),
            Formula::Or(gs) => CForm::Or(gs.iter().map(|g| Self::form(g, vars)).collect::<Option<_>>()?),
        })
    }

    fn eval_term(t: &CTerm, env: &[i64]) -> i64 {
        match t {
            CTerm::Lin(cs, c0) => cs.iter().zip(env).fold(*c0, |acc, (c, x)| acc + c * x),
            CTerm::Mul(k, a) => k * Self::eval_term(a, env),
            CTerm::Add(a, b) => Self::eval_term(a, env) + Self::eval_term(b, env),
            CTerm::Neg(a) => -Self::eval_term(a, env),
            CTerm::Min(a, b) => Self::eval_term(a, env).min(Self::eval_term(b, env)),
            CTerm::Max(a, b) => Self::eval_term(a, env).max(Self::eval_term(b, env)),
        }
    }

    fn eval_form(f: &CForm, env: &[i64]) -> bool {
        match f {
            CForm::Const(b) => *b,
            CForm::Cmp(a, r, b) => {
                let (a, b) = (Self::eval_term(a, env), Self::eval_term(b, env));
                match r {
                    Rel::Le => a <= b,
                    Rel::Lt => a < b,
                    Rel::Ge => a >= b,
                    Rel::Gt => a > b,
                    Rel::Eq => a == b,
                    Rel::Ne => a != b,
                }
            }
            CForm::Not(g) => !Self::eval_form(g, env),
            CForm::And(gs) => gs.iter().all(|g| Self::eval_form(g, env)),
            CForm::Or(gs) => gs.iter().any(|g| Self::eval_form(g, env)),
        }
    }

    /// Evaluates with `env[i]` as the value of the `i`th variable.
    pub fn eval(&self, env: &[i64]) -> bool {
        debug_assert_eq!(env.len(), self.vars.len());
        Self::eval_form(&self.form, env)
    }

    /// A valuation in `[lo, hi]` per variable, if one satisfies the formula.
    pub fn search(&self, lo: i64, hi: i64) -> Option<Vec<i64>> {
        let n = self.vars.len();
        let mut env = vec![lo; n];
        loop {
            if self.eval(&env) {
                return Some(env);
            }
            let mut k = 0;
            loop {
                if k == n {
                    return None;
                }
                env[k] += 1;
                if env[k] <= hi {
                    break;
                }
                env[k] = lo;
                k += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;
    use sv_lia::eval_finite;

    #[test]
    fn compiled_agrees_with_reference_evaluator() {
        let mut g = Generator { rng: StdRng::seed_from_u64(7) };
        for _ in 0..200 {
            let f = g.finite();
            let c = Compiled::new(&f, &["x", "y", "z"]).unwrap();
            for env in [[0, 0, 0], [3, -2, 7], [-20, 20, 1]] {
                let m: BTreeMap<String, i64> =
                    ["x", "y", "z"].iter().map(|v| v.to_string()).zip(env).collect();
                assert_eq!(Some(c.eval(&env)), eval_finite(&f, &m), "{f}");
            }
        }
    }

    #[test]
    fn search_finds_the_only_point() {
        let f = sv_frontend::parse_pure("x=3 & y=-4 & z=x+y").unwrap();
        let c = Compiled::new(&f, &["x", "y", "z"]).unwrap();
        assert_eq!(c.search(-5, 5), Some(vec![3, -4, -1]));
        assert_eq!(c.search(-2, 2), None);
    }

    #[test]
    fn infinity_does_not_compile() {
        assert!(Compiled::new(&Formula::cmp(Term::v("x"), Rel::Lt, Term::Inf), &["x"]).is_none());
    }

    #[test]
    fn machine_bounds_read_inf_as_max() {
        let f = Formula::cmp(Term::v("x"), Rel::Lt, Term::Inf);
        let env: BTreeMap<String, i64> = [("x".to_string(), 7)].into();
        assert!(!eval_machine(&f, &env, -8, 7));
        assert!(eval_machine(&f, &env, -8, 8));
    }
}
