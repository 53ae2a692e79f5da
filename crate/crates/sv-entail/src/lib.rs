//! Entailment `Δ ⊢ Φ * frame` over symbolic heaps.
//!
//! Consequent atoms are matched left to right against antecedent atoms of
//! the same shape. Predicates are unfolded on the left or folded on the
//! right at the cost of one unit of fuel each. The leftover pure
//! obligation goes to `sv_lia::implies_with`.

mod heap;

use std::collections::{BTreeMap, BTreeSet};

use sv_frontend::{HeapAtom, PredDef, Program, SepDisjunct, SepFormula, SymHeap};
use sv_lia::LiaError;
use sv_pure::{Atom, Formula, NameSupply, Rel, Term};
use thiserror::Error;

pub use heap::{instantiate, unfold, xpure, Unfolded};

pub const DEFAULT_FUEL: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntailError {
    #[error("unfold/fold fuel exhausted")]
    FuelExhausted,
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error(transparent)]
    Lia(#[from] LiaError),
}

/// Predicate and data definitions the prover works against.
#[derive(Debug, Clone, Default)]
pub struct PredTable {
    pub preds: BTreeMap<String, PredDef>,
}

impl PredTable {
    pub fn from_program(p: &Program) -> Self {
        PredTable { preds: p.pred_defs.iter().map(|d| (d.name.clone(), d.clone())).collect() }
    }

    pub fn get(&self, name: &str) -> Result<&PredDef, EntailError> {
        self.preds.get(name).ok_or_else(|| EntailError::UnknownPredicate(name.to_string()))
    }
}

/// Antecedent: a single symbolic heap with its pure part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Delta {
    pub heap: SymHeap,
    pub pure: Formula,
}

impl Delta {
    pub fn new(heap: Vec<HeapAtom>, pure: Formula) -> Self {
        Delta { heap: SymHeap(heap), pure }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Residue {
    pub frame: SymHeap,
    /// Antecedent pure part, strengthened by any unfolding done on the left.
    pub pure: Formula,
    /// Consequent existentials instantiated by heap matching.
    pub bindings: BTreeMap<String, String>,
    /// Index of the consequent disjunct that was proved.
    pub disjunct: usize,
}

pub struct Prover<'a> {
    pub table: &'a PredTable,
    pub fuel: u32,
    pub lia: sv_lia::Config,
    pub names: &'a mut NameSupply,
    pub trace: Option<Vec<String>>,
}

struct Goal {
    heap: Vec<HeapAtom>,
    consumed: Vec<HeapAtom>,
    pure: Formula,
    cons: Vec<HeapAtom>,
    obligations: Vec<Formula>,
    /// Existentials still open on the right.
    open: BTreeSet<String>,
    bindings: BTreeMap<String, String>,
    fuel: u32,
}

impl Goal {
    fn resolve(&self, v: &str) -> String {
        self.bindings.get(v).cloned().unwrap_or_else(|| v.to_string())
    }
}

fn eq(a: &str, b: &str) -> Formula {
    Formula::cmp(Term::v(a), Rel::Eq, Term::v(b))
}

fn same_shape(a: &HeapAtom, b: &HeapAtom) -> bool {
    match (a, b) {
        (HeapAtom::PointsTo { data: x, .. }, HeapAtom::PointsTo { data: y, .. }) => x == y,
        (HeapAtom::Pred { name: x, .. }, HeapAtom::Pred { name: y, .. }) => x == y,
        _ => false,
    }
}

fn args_of(a: &HeapAtom) -> Vec<String> {
    match a {
        HeapAtom::PointsTo { root, args, .. } => {
            let mut v = vec![root.clone()];
            v.extend(args.iter().cloned());
            v
        }
        HeapAtom::Pred { args, .. } => args.clone(),
    }
}

impl<'a> Prover<'a> {
    pub fn new(table: &'a PredTable, names: &'a mut NameSupply) -> Self {
        Prover { table, fuel: DEFAULT_FUEL, lia: sv_lia::Config::default(), names, trace: None }
    }

    fn log(&mut self, depth: usize, msg: impl FnOnce() -> String) {
        if let Some(t) = &mut self.trace {
            t.push(format!("{}{}", "  ".repeat(depth), msg()));
        }
    }

    fn sat(&mut self, f: &Formula) -> Result<bool, EntailError> {
        Ok(sv_lia::sat_with(f, &self.lia, self.names)?.is_sat())
    }

    fn implies(&mut self, ante: &Formula, bound: &BTreeSet<String>, cons: &Formula) -> Result<bool, EntailError> {
        Ok(sv_lia::implies_with(ante, bound, cons, &self.lia, self.names)?)
    }

    /// All residues of `delta ⊢ phi`. An empty result means the search failed
    /// on pure obligations or shape; `FuelExhausted` means some branch ran
    /// out of fuel and no branch succeeded.
    pub fn entail(&mut self, delta: &Delta, phi: &SepFormula) -> Result<Vec<Residue>, EntailError> {
        let mut out = Vec::new();
        let mut starved = false;
        for (i, d) in phi.disjuncts.iter().enumerate() {
            self.log(0, || format!("goal[{i}] {} & {}  |-  {}", delta.heap, delta.pure, Disp(d)));
            let (d, back) = self.freshen(d);
            let goal = Goal {
                heap: delta.heap.0.clone(),
                consumed: vec![],
                pure: delta.pure.clone(),
                cons: d.heap.0.clone(),
                obligations: vec![d.pure.clone()],
                open: d.exists.iter().cloned().collect(),
                bindings: BTreeMap::new(),
                fuel: self.fuel,
            };
            for mut r in self.search(goal, 1, &mut starved)? {
                r.bindings = r
                    .bindings
                    .into_iter()
                    .filter_map(|(k, v)| back.get(&k).map(|o| (o.clone(), v)))
                    .collect();
                r.disjunct = i;
                if !out.contains(&r) {
                    out.push(r);
                }
            }
        }
        if out.is_empty() && starved {
            return Err(EntailError::FuelExhausted);
        }
        Ok(out)
    }

    fn freshen(&mut self, d: &SepDisjunct) -> (SepDisjunct, BTreeMap<String, String>) {
        let mut d = d.clone();
        let mut back = BTreeMap::new();
        let exists = std::mem::take(&mut d.exists);
        let mut fresh = Vec::new();
        for e in exists {
            let f = self.names.fresh(&e);
            d = d.rename(&e, &f);
            back.insert(f.clone(), e);
            fresh.push(f);
        }
        d.exists = fresh;
        (d, back)
    }

    fn search(&mut self, mut g: Goal, depth: usize, starved: &mut bool) -> Result<Vec<Residue>, EntailError> {
        if g.cons.is_empty() {
            return self.discharge(g, depth);
        }
        let c = g.cons[0].clone();
        let root = g.resolve(c.root());
        let root_open = g.open.contains(&root);

        // direct matches, syntactic roots first
        let mut cands: Vec<usize> = (0..g.heap.len())
            .filter(|&i| same_shape(&g.heap[i], &c) && (root_open || g.heap[i].root() == root))
            .collect();
        if cands.is_empty() && !root_open {
            let known = self.known(&g);
            for i in 0..g.heap.len() {
                if same_shape(&g.heap[i], &c) && self.implies(&known, &BTreeSet::new(), &eq(&root, g.heap[i].root()))? {
                    cands.push(i);
                }
            }
        }
        let mut out = Vec::new();
        for i in cands {
            let a = g.heap[i].clone();
            self.log(depth, || format!("match {c} with {a}"));
            let mut ng = Goal {
                heap: g.heap.clone(),
                consumed: g.consumed.clone(),
                pure: g.pure.clone(),
                cons: g.cons[1..].to_vec(),
                obligations: g.obligations.clone(),
                open: g.open.clone(),
                bindings: g.bindings.clone(),
                fuel: g.fuel,
            };
            ng.heap.remove(i);
            ng.consumed.push(a.clone());
            for (cv, av) in args_of(&c).iter().zip(args_of(&a)) {
                let cv = ng.resolve(cv);
                if ng.open.remove(&cv) {
                    ng.bindings.insert(cv, av);
                } else if cv != av {
                    ng.obligations.push(eq(&cv, &av));
                }
            }
            out.extend(self.search(ng, depth + 1, starved)?);
        }
        if !out.is_empty() {
            return Ok(out);
        }

        // unfold an antecedent predicate rooted at the demanded location
        if !root_open {
            let idx = (0..g.heap.len()).find(|&i| {
                matches!(&g.heap[i], HeapAtom::Pred { .. }) && g.heap[i].root() == root && !same_shape(&g.heap[i], &c)
            });
            if let Some(i) = idx {
                if g.fuel == 0 {
                    *starved = true;
                } else {
                    self.log(depth, || format!("unfold {}", g.heap[i]));
                    for u in unfold(self.table, &g.heap, i, self.names)? {
                        let pure = Formula::and(vec![g.pure.clone(), u.pure]);
                        let check = Formula::and(vec![pure.clone(), xpure(self.table, &u.heap, &g.consumed)]);
                        if !self.sat(&check)? {
                            self.log(depth + 1, || "pruned (unsat)".to_string());
                            continue;
                        }
                        let ng = Goal {
                            heap: u.heap,
                            consumed: g.consumed.clone(),
                            pure,
                            cons: g.cons.clone(),
                            obligations: g.obligations.clone(),
                            open: g.open.clone(),
                            bindings: g.bindings.clone(),
                            fuel: g.fuel - 1,
                        };
                        out.extend(self.search(ng, depth + 1, starved)?);
                    }
                    if !out.is_empty() {
                        return Ok(out);
                    }
                }
            }
        }

        // fold: replace the demanded consequent predicate by its definition
        if let HeapAtom::Pred { name, args } = &c {
            if g.fuel == 0 {
                *starved = true;
                return Ok(out);
            }
            let def = self.table.get(name)?.clone();
            let args: Vec<String> = args.iter().map(|a| g.resolve(a)).collect();
            self.log(depth, || format!("fold {c}"));
            for d in &def.body.disjuncts {
                let (d, _) = self.freshen(d);
                let d = instantiate(&d, &def.params, &args);
                let mut ng = Goal {
                    heap: g.heap.clone(),
                    consumed: g.consumed.clone(),
                    pure: g.pure.clone(),
                    cons: d.heap.0.iter().cloned().chain(g.cons[1..].iter().cloned()).collect(),
                    obligations: g.obligations.clone(),
                    open: g.open.clone(),
                    bindings: g.bindings.clone(),
                    fuel: g.fuel - 1,
                };
                ng.obligations.push(d.pure.clone());
                ng.open.extend(d.exists.iter().cloned());
                out.extend(self.search(ng, depth + 1, starved)?);
            }
        }
        g.cons.clear();
        Ok(out)
    }

    fn known(&self, g: &Goal) -> Formula {
        Formula::and(vec![g.pure.clone(), xpure(self.table, &g.heap, &g.consumed)])
    }

    fn discharge(&mut self, g: Goal, depth: usize) -> Result<Vec<Residue>, EntailError> {
        let known = self.known(&g);
        let mut obl = Formula::and(g.obligations.clone());
        for (k, v) in &g.bindings {
            obl = obl.rename(k, v);
        }
        let ok = self.implies(&known, &g.open, &obl)?;
        self.log(depth, || format!("pure {known}  ==>  exists {:?}. {obl}: {}", g.open, if ok { "valid" } else { "FAIL" }));
        if !ok {
            return Ok(vec![]);
        }
        Ok(vec![Residue { frame: SymHeap(g.heap), pure: g.pure, bindings: g.bindings, disjunct: 0 }])
    }
}

struct Disp<'a>(&'a SepDisjunct);

impl std::fmt::Display for Disp<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let sf = SepFormula { disjuncts: vec![self.0.clone()], span: Default::default() };
        write!(f, "{sf}")
    }
}

/// Convenience wrapper with default fuel and solver settings.
pub fn entail(table: &PredTable, delta: &Delta, phi: &SepFormula, fuel: u32) -> Result<Vec<Residue>, EntailError> {
    let mut names = NameSupply::new();
    let mut p = Prover::new(table, &mut names);
    p.fuel = fuel;
    p.entail(delta, phi)
}

/// `x = null` as a formula.
pub fn is_null(v: &str) -> Formula {
    Formula::Atom(Atom::Null(v.to_string()))
}
