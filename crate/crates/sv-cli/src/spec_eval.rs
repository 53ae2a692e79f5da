//! Concrete satisfaction of separation formulas over an interpreter heap.

use std::collections::BTreeMap;

use sv_frontend::{HeapAtom, Program, SepDisjunct, SepFormula};
use sv_pure::{Atom, Formula, Rel, Term};

use crate::interp::Heap;
use crate::models::{eval, Ext, InfAs};

/// Machine bounds: `inf` reads as `max`, `-inf` as `min`, and every logical
/// value must lie in `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bounds {
    pub min: i128,
    pub max: i128,
}

struct Search<'a> {
    program: &'a Program,
    heap: &'a Heap,
    bounds: Bounds,
    fresh: usize,
}

#[derive(Clone)]
struct Goal {
    atoms: Vec<HeapAtom>,
    pure: Vec<Formula>,
    env: BTreeMap<String, i128>,
    used: Vec<bool>,
}

/// True if some disjunct of `f` holds for some values of its unbound variables.
/// Values are integers: null is 0 and heap cell `i` is `i + 1`.
pub fn satisfies(p: &Program, f: &SepFormula, env: &BTreeMap<String, i128>, heap: &Heap, bounds: Bounds) -> bool {
    let mut s = Search { program: p, heap, bounds, fresh: 0 };
    f.disjuncts.iter().any(|d| {
        let d = s.freshen(d);
        let g = Goal { atoms: d.heap.0.clone(), pure: vec![d.pure.clone()], env: env.clone(), used: vec![false; heap.cells.len()] };
        s.solve(g)
    })
}

fn conjuncts(f: &Formula, out: &mut Vec<Formula>) {
    match f {
        Formula::And(xs) => xs.iter().for_each(|x| conjuncts(x, out)),
        Formula::True => {}
        f => out.push(f.clone()),
    }
}

impl Search<'_> {
    fn freshen(&mut self, d: &SepDisjunct) -> SepDisjunct {
        let mut d = d.clone();
        for e in std::mem::take(&mut d.exists) {
            self.fresh += 1;
            d = d.rename(&e, &format!("{e}#{}", self.fresh));
        }
        d
    }

    fn ext(&self) -> InfAs {
        InfAs::Bounds { min: self.bounds.min as i64, max: self.bounds.max as i64 }
    }

    fn holds(&self, f: &Formula, env: &BTreeMap<String, i128>) -> Option<bool> {
        let get = |v: &str| env.get(v).map_or(Ext::Fin(0), |k| Ext::Fin(*k as i64));
        if f.vars().iter().all(|v| env.contains_key(v)) {
            eval(f, &get, self.ext())
        } else {
            None
        }
    }

    fn value(&self, t: &Term, env: &BTreeMap<String, i128>) -> Option<i128> {
        let get = |v: &str| env.get(v).map_or(Ext::Fin(0), |k| Ext::Fin(*k as i64));
        let mut vs = std::collections::BTreeSet::new();
        t.vars(&mut vs);
        if !vs.iter().all(|v| env.contains_key(v)) {
            return None;
        }
        match crate::models::eval_term(t, &get, self.ext())? {
            Ext::Fin(k) => Some(k as i128),
            _ => None,
        }
    }

    fn in_range(&self, k: i128) -> bool {
        self.bounds.min <= k && k <= self.bounds.max
    }

    fn bind(env: &mut BTreeMap<String, i128>, v: &str, k: i128) -> bool {
        match env.get(v) {
            Some(old) => *old == k,
            None => {
                env.insert(v.to_string(), k);
                true
            }
        }
    }

    fn solve(&mut self, mut g: Goal) -> bool {
        // Check closed pure parts early.
        let mut open = Vec::new();
        for f in std::mem::take(&mut g.pure) {
            match self.holds(&f, &g.env) {
                Some(true) => {}
                Some(false) => return false,
                None => open.push(f),
            }
        }
        g.pure = open;
        let Some(i) = g.atoms.iter().position(|a| g.env.contains_key(a.root())) else {
            return if g.atoms.is_empty() { self.finish(g) } else { false };
        };
        let atom = g.atoms.remove(i);
        let root = g.env[atom.root()];
        match atom {
            HeapAtom::PointsTo { data, args, .. } => {
                if root <= 0 {
                    return false;
                }
                let a = (root - 1) as usize;
                let Some((d, fields)) = self.heap.cells.get(a) else { return false };
                if *d != data || g.used[a] || fields.len() != args.len() {
                    return false;
                }
                g.used[a] = true;
                for (x, v) in args.iter().zip(fields) {
                    if !Self::bind(&mut g.env, x, v.int()) {
                        return false;
                    }
                }
                self.solve(g)
            }
            HeapAtom::Pred { name, args } => {
                let Some(def) = self.program.pred(&name) else { return false };
                let def = def.clone();
                def.body.disjuncts.iter().any(|d| {
                    let mut d = self.freshen(d);
                    for (i, p) in def.params.iter().enumerate() {
                        d = d.rename(p, &format!("@{i}"));
                    }
                    for (i, a) in args.iter().enumerate() {
                        d = d.rename(&format!("@{i}"), a);
                    }
                    let mut ng = g.clone();
                    ng.atoms.extend(d.heap.0.iter().cloned());
                    ng.pure.push(d.pure.clone());
                    if let Some(inv) = &def.inv {
                        let mut inv = inv.clone();
                        for (i, p) in def.params.iter().enumerate() {
                            inv = inv.rename(p, &format!("@{i}"));
                        }
                        for (i, a) in args.iter().enumerate() {
                            inv = inv.rename(&format!("@{i}"), a);
                        }
                        ng.pure.push(inv);
                    }
                    self.solve(ng)
                })
            }
        }
    }

    /// Binds the remaining variables from equalities, then by enumeration.
    fn finish(&mut self, mut g: Goal) -> bool {
        let mut atoms = Vec::new();
        for f in &g.pure {
            conjuncts(f, &mut atoms);
        }
        loop {
            let mut progress = false;
            for f in &atoms {
                let Formula::Atom(Atom::Cmp(a, Rel::Eq, b)) = f else { continue };
                for (x, t) in [(a, b), (b, a)] {
                    let Some(v) = x.as_lin().and_then(|l| l.as_var()) else { continue };
                    if g.env.contains_key(v) {
                        continue;
                    }
                    if let Some(k) = self.value(t, &g.env) {
                        if !self.in_range(k) {
                            return false;
                        }
                        g.env.insert(v.to_string(), k);
                        progress = true;
                    }
                }
            }
            if !progress {
                break;
            }
        }
        let mut free: Vec<String> =
            g.pure.iter().flat_map(|f| f.vars()).filter(|v| !g.env.contains_key(v)).collect();
        free.sort();
        free.dedup();
        self.enumerate(&g.pure, &mut g.env, &free)
    }

    fn enumerate(&self, pure: &[Formula], env: &mut BTreeMap<String, i128>, free: &[String]) -> bool {
        let Some((v, rest)) = free.split_first() else {
            return pure.iter().all(|f| self.holds(f, env) == Some(true));
        };
        for k in self.bounds.min..=self.bounds.max {
            env.insert(v.clone(), k);
            if self.enumerate(pure, env, rest) {
                return true;
            }
        }
        env.remove(v);
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::interp::Value;
    use sv_frontend::{parse_formula_in, parse_program, resolve};

    const SRC: &str = "data node { int val; node next; }
pred ll<root,sum> == (root=null & sum=0)
  | exists d,q,rest: root::node<d,q> * q::ll<rest> & sum=d+rest & sum<inf;
pred Sortedll<root,mn> == (root=null & mn=inf)
  | exists q,mr: root::node<mn,q> * q::Sortedll<mr> & mn<mr;";

    const W4: Bounds = Bounds { min: -8, max: 7 };

    fn list(h: &mut Heap, xs: &[i128]) -> i128 {
        let mut next = Value::Null;
        for x in xs.iter().rev() {
            next = h.alloc("node", vec![Value::Int(*x), next]);
        }
        next.int()
    }

    fn check(formula: &str, xs: &[i128], extra: &[(&str, i128)]) -> bool {
        let p = resolve(&parse_program(SRC).unwrap()).unwrap();
        let f = parse_formula_in(formula, &p).unwrap();
        let mut h = Heap::default();
        let mut env: BTreeMap<String, i128> = [("x".to_string(), list(&mut h, xs))].into();
        env.extend(extra.iter().map(|(k, v)| (k.to_string(), *v)));
        satisfies(&p, &f, &env, &h, W4)
    }

    #[test]
    fn list_sums() {
        assert!(check("x::ll<s>", &[1, 2, 3], &[]));
        assert!(check("x::ll<s> & s=6", &[1, 2, 3], &[]));
        assert!(!check("x::ll<s> & s=5", &[1, 2, 3], &[]));
        assert!(check("x::ll<s>", &[], &[]));
        // partial sums leave the machine range
        assert!(!check("x::ll<s>", &[4, 4], &[]));
        assert!(!check("x::ll<s>", &[-8, -1], &[]));
        assert!(check("x::ll<s>", &[-7, -1], &[]));
    }

    #[test]
    fn sorted_lists() {
        assert!(check("x::Sortedll<m>", &[1, 2, 5], &[]));
        assert!(!check("x::Sortedll<m>", &[2, 1], &[]));
        // the empty list has minimum inf, read as the machine maximum
        assert!(check("x::Sortedll<m> & m=inf", &[], &[]));
        assert!(!check("x::Sortedll<m>", &[7], &[]));
    }

    #[test]
    fn pure_preconditions_use_machine_bounds() {
        assert!(check("0<=n+1 & n+1<inf", &[], &[("n", 5)]));
        assert!(!check("0<=n+1 & n+1<inf", &[], &[("n", 6)]));
        assert!(!check("n>-inf", &[], &[("n", -8)]));
        assert!(check("n>=0 | n<-3", &[], &[("n", -5)]));
    }
}
