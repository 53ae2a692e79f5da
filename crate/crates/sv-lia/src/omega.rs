//! Omega test: exact integer satisfiability and projection for linear constraints.
//!
//! Constraints are kept as `lin >= 0` (inequalities) and `lin = 0` (equalities).

use std::collections::{BTreeMap, BTreeSet};

use sv_pure::Lin;

use crate::LiaError;

pub type Witness = BTreeMap<String, i64>;

#[derive(Debug, Clone, Copy)]
pub struct Budget {
    pub coeff_limit: i64,
    pub step_limit: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { coeff_limit: 1 << 40, step_limit: 200_000 }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn floor_div(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -floor_div(-a, b)
}

/// Symmetric residue `a - b*floor(a/b + 1/2)`.
fn mod_hat(a: i64, b: i64) -> i64 {
    a - b * floor_div(2 * a + b, 2 * b)
}

fn content(l: &Lin) -> i64 {
    l.coeffs.values().fold(0, |g, c| gcd(g, *c))
}

struct System {
    eqs: Vec<Lin>,
    ineqs: Vec<Lin>,
}

pub(crate) struct Omega {
    budget: Budget,
    steps: usize,
    next: usize,
}

impl Omega {
    pub(crate) fn new(budget: Budget) -> Self {
        Omega { budget, steps: 0, next: 0 }
    }

    fn fresh(&mut self) -> String {
        self.next += 1;
        format!("sigma#{}", self.next)
    }

    fn tick(&mut self) -> Result<(), LiaError> {
        self.steps += 1;
        if self.steps > self.budget.step_limit {
            return Err(LiaError::ResourceLimit(format!(
                "more than {} elimination steps",
                self.budget.step_limit
            )));
        }
        Ok(())
    }

    fn check_size(&self, l: &Lin) -> Result<(), LiaError> {
        let lim = self.budget.coeff_limit;
        if l.c0.abs() > lim || l.coeffs.values().any(|c| c.abs() > lim) {
            return Err(LiaError::ResourceLimit(format!("coefficient beyond {lim} in {l}")));
        }
        Ok(())
    }

    /// Tightens and deduplicates; `None` if a constant constraint is violated.
    fn normalize(&self, eqs: Vec<Lin>, ineqs: Vec<Lin>) -> Result<Option<System>, LiaError> {
        let mut out_eqs = Vec::new();
        for e in eqs {
            self.check_size(&e)?;
            if e.coeffs.is_empty() {
                if e.c0 != 0 {
                    return Ok(None);
                }
                continue;
            }
            let g = content(&e);
            if e.c0 % g != 0 {
                return Ok(None);
            }
            let mut e = e;
            if g > 1 {
                e.c0 /= g;
                e.coeffs.values_mut().for_each(|c| *c /= g);
            }
            out_eqs.push(e);
        }
        // keyed by coefficient vector: tightest constant wins
        let mut by_coeffs: BTreeMap<BTreeMap<String, i64>, i64> = BTreeMap::new();
        for i in ineqs {
            self.check_size(&i)?;
            if i.coeffs.is_empty() {
                if i.c0 < 0 {
                    return Ok(None);
                }
                continue;
            }
            let g = content(&i);
            let c0 = floor_div(i.c0, g);
            let coeffs: BTreeMap<String, i64> = i.coeffs.into_iter().map(|(v, c)| (v, c / g)).collect();
            let e = by_coeffs.entry(coeffs).or_insert(c0);
            *e = (*e).min(c0);
        }
        let mut out_ineqs = Vec::new();
        for (coeffs, c0) in &by_coeffs {
            let negated: BTreeMap<String, i64> = coeffs.iter().map(|(v, c)| (v.clone(), -c)).collect();
            if let Some(d0) = by_coeffs.get(&negated) {
                // lin + c0 >= 0 and -lin + d0 >= 0
                if c0 + d0 < 0 {
                    return Ok(None);
                }
                if c0 + d0 == 0 {
                    if coeffs < &negated {
                        out_eqs.push(Lin { c0: *c0, coeffs: coeffs.clone() });
                    }
                    continue;
                }
            }
            out_ineqs.push(Lin { c0: *c0, coeffs: coeffs.clone() });
        }
        Ok(Some(System { eqs: out_eqs, ineqs: out_ineqs }))
    }

    /// Picks a variable of `e` (restricted to `allowed`) with least |coefficient|
    /// and returns `(var, expression)` such that substituting `var := expression`
    /// is equivalent to `e = 0` (possibly after introducing a fresh variable).
    fn solve_eq(&mut self, e: &Lin, allowed: &dyn Fn(&str) -> bool) -> Option<(String, Lin, Option<String>)> {
        let (v, a) = e
            .coeffs
            .iter()
            .filter(|(v, _)| allowed(v))
            .min_by_key(|(v, c)| (c.abs(), (*v).clone()))
            .map(|(v, c)| (v.clone(), *c))?;
        if a.abs() > 1 && e.coeffs.values().any(|c| c.abs() < a.abs()) {
            // a free variable has the least coefficient: a stride constraint would be needed
            return None;
        }
        if a.abs() == 1 {
            // a*v + rest = 0  ->  v = -a*rest
            let mut rest = e.clone();
            rest.coeffs.remove(&v);
            return Some((v, rest.scale(-a), None));
        }
        let m = a.abs() + 1;
        let sigma = self.fresh();
        // sum (c mod^ m) x + (c0 mod^ m) = m*sigma, with (a mod^ m) = -sign(a)
        let mut rest = Lin::constant(mod_hat(e.c0, m));
        for (x, c) in &e.coeffs {
            if x != &v {
                rest.add_coeff(x, mod_hat(*c, m));
            }
        }
        rest.add_coeff(&sigma, -m);
        // -sign(a)*v + rest = 0  ->  v = sign(a)*rest
        Some((v, rest.scale(a.signum()), Some(sigma)))
    }

    /// Satisfiability with a witness for every variable mentioned.
    pub(crate) fn sat(&mut self, eqs: Vec<Lin>, ineqs: Vec<Lin>) -> Result<Option<Witness>, LiaError> {
        self.tick()?;
        let Some(sys) = self.normalize(eqs, ineqs)? else {
            return Ok(None);
        };
        if let Some(e) = sys.eqs.first() {
            let (v, expr, _) = self.solve_eq(e, &|_| true).expect("equality has a variable");
            let eqs = sys.eqs.iter().map(|x| x.subst(&v, &expr)).collect();
            let ineqs = sys.ineqs.iter().map(|x| x.subst(&v, &expr)).collect();
            let Some(mut w) = self.sat(eqs, ineqs)? else {
                return Ok(None);
            };
            let val = eval_filling(&expr, &mut w);
            w.insert(v, val);
            return Ok(Some(w));
        }
        let vars = vars_of(&sys.ineqs);
        let Some(x) = pick_var(&sys.ineqs, &vars, &|_| true) else {
            return Ok(Some(Witness::new()));
        };
        let (lowers, uppers, rest) = split(&sys.ineqs, &x);
        let exact = is_exact(&lowers, &uppers, &x);
        if exact || lowers.is_empty() || uppers.is_empty() {
            let mut next = rest.clone();
            next.extend(combine(&lowers, &uppers, &x, false));
            let Some(mut w) = self.sat(vec![], next)? else {
                return Ok(None);
            };
            let val = choose(&lowers, &uppers, &x, &mut w);
            w.insert(x, val);
            return Ok(Some(w));
        }
        let mut real = rest.clone();
        real.extend(combine(&lowers, &uppers, &x, false));
        if self.sat(vec![], real)?.is_none() {
            return Ok(None);
        }
        let mut dark = rest.clone();
        dark.extend(combine(&lowers, &uppers, &x, true));
        if let Some(mut w) = self.sat(vec![], dark)? {
            let val = choose(&lowers, &uppers, &x, &mut w);
            w.insert(x, val);
            return Ok(Some(w));
        }
        for (eq, _) in splinters(&lowers, &uppers, &x) {
            if let Some(w) = self.sat(vec![eq], sys.ineqs.clone())? {
                return Ok(Some(w));
            }
        }
        Ok(None)
    }

    /// Eliminates `bound` variables; returns disjuncts of `(eqs, ineqs)` over the rest.
    pub(crate) fn project(
        &mut self,
        eqs: Vec<Lin>,
        ineqs: Vec<Lin>,
        bound: &BTreeSet<String>,
    ) -> Result<Vec<(Vec<Lin>, Vec<Lin>)>, LiaError> {
        self.tick()?;
        let Some(sys) = self.normalize(eqs, ineqs)? else {
            return Ok(vec![]);
        };
        let is_bound = |v: &str| bound.contains(v);
        if let Some(pos) = sys.eqs.iter().position(|e| e.coeffs.keys().any(|v| is_bound(v))) {
            let e = sys.eqs[pos].clone();
            let Some((v, expr, sigma)) = self.solve_eq(&e, &is_bound) else {
                return Err(LiaError::ResourceLimit(format!(
                    "projecting {e} = 0 needs a divisibility constraint"
                )));
            };
            let eqs = sys.eqs.iter().map(|x| x.subst(&v, &expr)).collect();
            let ineqs = sys.ineqs.iter().map(|x| x.subst(&v, &expr)).collect();
            let mut bound = bound.clone();
            bound.remove(&v);
            if let Some(s) = sigma {
                bound.insert(s);
            }
            return self.project(eqs, ineqs, &bound);
        }
        let vars = vars_of(&sys.ineqs);
        let Some(x) = pick_var(&sys.ineqs, &vars, &is_bound) else {
            return Ok(vec![(sys.eqs, sys.ineqs)]);
        };
        let (lowers, uppers, rest) = split(&sys.ineqs, &x);
        let mut bound_rest = bound.clone();
        bound_rest.remove(&x);
        if is_exact(&lowers, &uppers, &x) || lowers.is_empty() || uppers.is_empty() {
            let mut next = rest;
            next.extend(combine(&lowers, &uppers, &x, false));
            return self.project(sys.eqs, next, &bound_rest);
        }
        let mut out = Vec::new();
        let mut dark = rest;
        dark.extend(combine(&lowers, &uppers, &x, true));
        out.extend(self.project(sys.eqs.clone(), dark, &bound_rest)?);
        for (eq, _) in splinters(&lowers, &uppers, &x) {
            let mut eqs = sys.eqs.clone();
            eqs.push(eq);
            out.extend(self.project(eqs, sys.ineqs.clone(), bound)?);
        }
        Ok(out)
    }
}

fn eval_filling(l: &Lin, w: &mut Witness) -> i64 {
    for v in l.coeffs.keys() {
        w.entry(v.clone()).or_insert(0);
    }
    l.eval(&|v| w[v])
}

fn vars_of(ls: &[Lin]) -> BTreeSet<String> {
    ls.iter().flat_map(|l| l.coeffs.keys().cloned()).collect()
}

fn split(ineqs: &[Lin], x: &str) -> (Vec<Lin>, Vec<Lin>, Vec<Lin>) {
    let (mut lo, mut up, mut rest) = (Vec::new(), Vec::new(), Vec::new());
    for i in ineqs {
        match i.coeff(x) {
            0 => rest.push(i.clone()),
            c if c > 0 => lo.push(i.clone()),
            _ => up.push(i.clone()),
        }
    }
    (lo, up, rest)
}

fn is_exact(lowers: &[Lin], uppers: &[Lin], x: &str) -> bool {
    lowers.iter().all(|l| l.coeff(x) == 1) || uppers.iter().all(|u| u.coeff(x) == -1)
}

/// Prefers variables with an exact shadow, then fewest generated pairs.
fn pick_var(ineqs: &[Lin], vars: &BTreeSet<String>, allowed: &dyn Fn(&str) -> bool) -> Option<String> {
    vars.iter()
        .filter(|v| allowed(v))
        .map(|v| {
            let (lo, up, _) = split(ineqs, v);
            let exact = is_exact(&lo, &up, v) || lo.is_empty() || up.is_empty();
            ((!exact, lo.len() * up.len()), v.clone())
        })
        .min()
        .map(|(_, v)| v)
}

/// Pairs each lower bound `a*x + L >= 0` with each upper `-b*x + U >= 0`.
fn combine(lowers: &[Lin], uppers: &[Lin], x: &str, dark: bool) -> Vec<Lin> {
    let mut out = Vec::new();
    for l in lowers {
        let a = l.coeff(x);
        for u in uppers {
            let b = -u.coeff(x);
            let mut c = l.scale(b).add(&u.scale(a));
            c.coeffs.remove(x);
            if dark {
                c.c0 -= (a - 1) * (b - 1);
            }
            out.push(c);
        }
    }
    out
}

/// Equalities `a*x + L - i = 0` covering integer points missed by the dark shadow.
fn splinters(lowers: &[Lin], uppers: &[Lin], x: &str) -> Vec<(Lin, i64)> {
    let amax = uppers.iter().map(|u| -u.coeff(x)).max().unwrap_or(1);
    let mut out = Vec::new();
    for l in lowers {
        let a = l.coeff(x);
        let top = floor_div(amax * a - amax - a, amax);
        for i in 0..=top.max(-1) {
            let mut e = l.clone();
            e.c0 -= i;
            out.push((e, i));
        }
    }
    out
}

fn choose(lowers: &[Lin], uppers: &[Lin], x: &str, w: &mut Witness) -> i64 {
    let bound = |l: &Lin, w: &mut Witness| {
        let mut rest = l.clone();
        rest.coeffs.remove(x);
        eval_filling(&rest, w)
    };
    let lo = lowers
        .iter()
        .map(|l| {
            let a = l.coeff(x);
            ceil_div(-bound(l, w), a)
        })
        .max();
    let hi = uppers
        .iter()
        .map(|u| {
            let b = -u.coeff(x);
            floor_div(bound(u, w), b)
        })
        .min();
    match (lo, hi) {
        (Some(lo), _) => lo,
        (None, Some(hi)) => hi,
        (None, None) => 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_helpers() {
        assert_eq!(floor_div(-7, 2), -4);
        assert_eq!(ceil_div(-7, 2), -3);
        assert_eq!(ceil_div(7, 2), 4);
        assert_eq!(mod_hat(5, 3), -1);
        assert_eq!(mod_hat(-4, 4), 0);
        assert_eq!(mod_hat(2, 3), -1);
    }

    fn lin(c0: i64, cs: &[(&str, i64)]) -> Lin {
        let mut l = Lin::constant(c0);
        for (v, c) in cs {
            l.add_coeff(v, *c);
        }
        l
    }

    #[test]
    fn dark_shadow_gap_is_unsat() {
        // 2 <= 3x <= 2 has a real but no integer solution on a tighter system:
        // 1 <= 3x - 2y <= 2 and 0 <= y.. bounded chains
        let ineqs = vec![lin(-1, &[("x", 3), ("y", -2)]), lin(2, &[("x", -3), ("y", 2)])];
        let mut o = Omega::new(Budget::default());
        let w = o.sat(vec![], ineqs.clone()).unwrap().unwrap();
        for i in &ineqs {
            assert!(i.eval(&|v| w[v]) >= 0);
        }
        let ineqs = vec![lin(-1, &[("x", 4)]), lin(3, &[("x", -4)])];
        assert!(Omega::new(Budget::default()).sat(vec![], ineqs).unwrap().is_none());
    }

    #[test]
    fn equality_with_large_coefficients() {
        // 7x + 12y = 31 has integer solutions
        let eqs = vec![lin(-31, &[("x", 7), ("y", 12)])];
        let w = Omega::new(Budget::default()).sat(eqs.clone(), vec![]).unwrap().unwrap();
        assert_eq!(eqs[0].eval(&|v| w[v]), 0);
        // 6x + 9y = 4 does not
        let eqs = vec![lin(-4, &[("x", 6), ("y", 9)])];
        assert!(Omega::new(Budget::default()).sat(eqs, vec![]).unwrap().is_none());
    }

    #[test]
    fn projection_eliminates_bound_variables() {
        // exists y. y = x + 1 & y <= 5 & 2y >= z
        let bound: BTreeSet<String> = ["y".to_string()].into();
        let out = Omega::new(Budget::default())
            .project(
                vec![lin(-1, &[("y", 1), ("x", -1)])],
                vec![lin(5, &[("y", -1)]), lin(0, &[("y", 2), ("z", -1)])],
                &bound,
            )
            .unwrap();
        assert_eq!(out.len(), 1);
        let (eqs, ineqs) = &out[0];
        assert!(eqs.is_empty());
        assert!(!vars_of(ineqs).contains("y"));
        assert_eq!(ineqs.len(), 2);
    }

    #[test]
    fn projection_reports_stride_constraints() {
        let bound: BTreeSet<String> = ["y".to_string()].into();
        let r = Omega::new(Budget::default()).project(vec![lin(0, &[("x", 1), ("y", -2)])], vec![], &bound);
        assert!(matches!(r, Err(LiaError::ResourceLimit(_))));
    }
}
