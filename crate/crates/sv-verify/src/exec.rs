use std::collections::{BTreeMap, BTreeSet};

use sv_entail::{unfold, xpure, EntailError, PredTable, Prover, Residue};
use sv_frontend::{BinOp, Flavor, HeapAtom, Program, SepDisjunct, SepFormula, Span};
use sv_lia::LiaError;
use sv_pure::{Atom, Formula, NameSupply, Rel, Term};

use crate::lower::{Core, LoweredMethod, Rhs, Val};
use crate::state::{rename_disjunct, rename_formula, rename_sep, Origin, Status, SymState};
use crate::VerifyError;

/// A verification failure found during execution.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub span: Span,
    pub reason: String,
}

pub struct Exec<'a> {
    pub methods: &'a BTreeMap<String, LoweredMethod>,
    pub table: &'a PredTable,
    pub program: &'a Program,
    pub names: NameSupply,
    pub fuel: u32,
    pub lia: sv_lia::Config,
    pub trace: Option<Vec<String>>,
    pub failures: Vec<Failure>,
    /// Symbols introduced for literal operands.
    consts: BTreeMap<String, Term>,
}

fn lia_err(e: LiaError) -> VerifyError {
    VerifyError::Lia(e)
}

fn rel_of(op: BinOp) -> Rel {
    match op {
        BinOp::Eq => Rel::Eq,
        BinOp::Ne => Rel::Ne,
        BinOp::Lt => Rel::Lt,
        BinOp::Le => Rel::Le,
        BinOp::Gt => Rel::Gt,
        BinOp::Ge => Rel::Ge,
        BinOp::Add | BinOp::Sub => unreachable!("arithmetic is not a comparison"),
    }
}

fn eq_f(a: Term, b: Term) -> Formula {
    Formula::cmp(a, Rel::Eq, b)
}

/// Top-level disjuncts of `f`.
fn disjuncts(f: &Formula) -> Vec<Formula> {
    match f {
        Formula::Or(ps) => ps.iter().flat_map(disjuncts).collect(),
        f => vec![f.clone()],
    }
}

impl<'a> Exec<'a> {
    pub fn new(
        methods: &'a BTreeMap<String, LoweredMethod>,
        table: &'a PredTable,
        program: &'a Program,
    ) -> Self {
        Exec {
            methods,
            table,
            program,
            names: NameSupply::new(),
            fuel: sv_entail::DEFAULT_FUEL,
            lia: sv_lia::Config::default(),
            trace: None,
            failures: vec![],
            consts: BTreeMap::new(),
        }
    }

    pub fn fresh(&mut self, base: &str) -> String {
        let base = base.split('#').next().unwrap_or(base);
        let base = if base.is_empty() { "v" } else { base };
        self.names.fresh(base)
    }

    fn fail(&mut self, span: Span, reason: impl Into<String>) {
        let f = Failure { span, reason: reason.into() };
        if !self.failures.contains(&f) {
            self.failures.push(f);
        }
    }

    pub fn sat(&mut self, f: &Formula) -> Result<bool, VerifyError> {
        Ok(sv_lia::sat_with(f, &self.lia, &mut self.names).map_err(lia_err)?.is_sat())
    }

    /// Pure part of the state together with the heap's abstraction.
    pub fn known(&self, s: &SymState) -> Formula {
        Formula::and(vec![s.pure_formula(), xpure(self.table, &s.heap, &[])])
    }

    pub fn feasible(&mut self, s: &SymState) -> Result<bool, VerifyError> {
        let k = self.known(s);
        self.sat(&k)
    }

    fn implies(&mut self, ante: &Formula, cons: &Formula) -> Result<bool, VerifyError> {
        sv_lia::implies_with(ante, &BTreeSet::new(), cons, &self.lia, &mut self.names).map_err(lia_err)
    }

    /// Entailment; `None` when the prover ran out of fuel.
    pub fn entail(&mut self, s: &SymState, phi: &SepFormula) -> Result<Option<Vec<Residue>>, VerifyError> {
        let delta = s.delta();
        let mut prover = Prover::new(self.table, &mut self.names);
        prover.fuel = self.fuel;
        prover.lia = self.lia.clone();
        if self.trace.is_some() {
            prover.trace = Some(vec![]);
        }
        let r = prover.entail(&delta, phi);
        if let (Some(t), Some(p)) = (&mut self.trace, prover.trace.take()) {
            t.extend(p);
        }
        match r {
            Ok(rs) => Ok(Some(rs)),
            Err(EntailError::FuelExhausted) => Ok(None),
            Err(EntailError::UnknownPredicate(p)) => Err(VerifyError::UnknownPredicate(p)),
            Err(EntailError::Lia(e)) => Err(lia_err(e)),
        }
    }

    fn term(&self, s: &SymState, v: &Val) -> Term {
        match v {
            Val::Var(x) => Term::v(&s.sym(x)),
            Val::Int(k) => Term::k(*k),
            Val::Null => Term::k(0),
            Val::Bool(b) => Term::k(*b as i64),
        }
    }

    /// A symbol naming the value of `v`, introducing one for constants.
    fn symbol(&mut self, s: &mut SymState, v: &Val) -> String {
        match v {
            Val::Var(x) => s.sym(x),
            Val::Null => {
                let f = self.fresh("null");
                s.assume(Formula::atom(Atom::Null(f.clone())));
                f
            }
            other => {
                let f = self.fresh("c");
                let t = self.term(s, other);
                self.consts.insert(f.clone(), t.clone());
                s.assume(eq_f(Term::v(&f), t));
                f
            }
        }
    }

    /// Runs a statement list from every state. Returned and error states
    /// pass through unchanged.
    pub fn block(&mut self, states: Vec<SymState>, body: &[Core]) -> Result<Vec<SymState>, VerifyError> {
        let mut states = states;
        for c in body {
            let mut next = Vec::new();
            for s in states {
                if s.returned || s.status == Status::MustIOC {
                    next.push(s);
                } else {
                    next.extend(self.stmt(s, c)?);
                }
            }
            states = next;
        }
        Ok(states)
    }

    fn stmt(&mut self, mut s: SymState, c: &Core) -> Result<Vec<SymState>, VerifyError> {
        match c {
            Core::Let { target, rhs, span, text } => self.let_(s, target, rhs, *span, text),
            Core::Eval { rhs: Rhs::Call(m, args), span, text } => self.call(s, m, args, None, *span, text),
            Core::Eval { rhs: Rhs::Field(x, f), span, .. } => {
                Ok(self.read(s, x, f, *span)?.into_iter().map(|(s, _)| s).collect())
            }
            Core::Eval { .. } => Ok(vec![s]),
            Core::Store { target, field, val, span } => {
                let v = self.symbol(&mut s, val);
                let mut out = Vec::new();
                for (mut st, idx) in self.cell(s, target, *span)? {
                    if let HeapAtom::PointsTo { data, args, .. } = &mut st.heap[idx] {
                        let i = self.field_index(data, field);
                        args[i] = v.clone();
                    }
                    out.push(st);
                }
                Ok(out)
            }
            Core::If { cond, null_test, then_b, else_b, .. } => {
                let starts = match null_test {
                    Some(x) => {
                        let root = s.sym(x);
                        self.unfold_at(s, &root)?
                    }
                    None => vec![s],
                };
                let mut out = Vec::new();
                for st in starts {
                    let c = Term::v(&st.sym(cond));
                    for (val, body) in [(1, then_b), (0, else_b)] {
                        let mut b = st.clone();
                        b.assume(eq_f(c.clone(), Term::k(val)));
                        if self.feasible(&b)? {
                            out.extend(self.block(vec![b], body)?);
                        }
                    }
                }
                Ok(out)
            }
            Core::Return { val, .. } => {
                s.ret = val.as_ref().map(|v| self.term(&s, v));
                s.returned = true;
                Ok(vec![s])
            }
        }
    }

    fn let_(
        &mut self,
        mut s: SymState,
        target: &str,
        rhs: &Rhs,
        span: Span,
        text: &str,
    ) -> Result<Vec<SymState>, VerifyError> {
        match rhs {
            Rhs::Val(Val::Var(x)) => {
                let v = s.sym(x);
                s.latest.insert(target.to_string(), v);
            }
            Rhs::Val(v) => {
                let f = self.fresh(target);
                let fact = match v {
                    Val::Null => Formula::atom(Atom::Null(f.clone())),
                    v => eq_f(Term::v(&f), self.term(&s, v)),
                };
                s.assume(fact);
                s.latest.insert(target.to_string(), f);
            }
            Rhs::Havoc => {
                let f = self.fresh(target);
                s.latest.insert(target.to_string(), f);
            }
            Rhs::Cmp(op, a, b) => {
                let f = self.fresh(target);
                let cond = match (a, b) {
                    (Val::Null, Val::Var(x)) | (Val::Var(x), Val::Null) if matches!(op, BinOp::Eq | BinOp::Ne) => {
                        let n = Formula::atom(Atom::Null(s.sym(x)));
                        if *op == BinOp::Eq {
                            n
                        } else {
                            Formula::not(n)
                        }
                    }
                    _ => Formula::cmp(self.term(&s, a), rel_of(*op), self.term(&s, b)),
                };
                let t = Term::v(&f);
                s.assume(Formula::or(vec![
                    Formula::and(vec![eq_f(t.clone(), Term::k(1)), cond.clone()]),
                    Formula::and(vec![eq_f(t, Term::k(0)), Formula::not(cond)]),
                ]));
                s.latest.insert(target.to_string(), f);
            }
            Rhs::Arith(op, a, b) => {
                let f = self.fresh(target);
                let (ta, tb) = (self.term(&s, a), self.term(&s, b));
                let v = if *op == BinOp::Add { Term::add(ta, tb) } else { Term::sub(ta, tb) };
                s.assume(eq_f(Term::v(&f), v));
                s.latest.insert(target.to_string(), f);
            }
            Rhs::New(c, args) => {
                let p = self.fresh(target);
                let syms: Vec<String> = args.iter().map(|a| self.symbol(&mut s, a)).collect();
                s.heap.push(HeapAtom::PointsTo { root: p.clone(), data: c.clone(), args: syms });
                s.latest.insert(target.to_string(), p);
            }
            Rhs::Field(x, f) => {
                let mut out = Vec::new();
                for (mut st, v) in self.read(s, x, f, span)? {
                    st.latest.insert(target.to_string(), v);
                    out.push(st);
                }
                return Ok(out);
            }
            Rhs::Call(m, args) => return self.call(s, m, args, Some(target), span, text),
        }
        Ok(vec![s])
    }

    fn field_index(&self, data: &str, field: &str) -> usize {
        self.program.data(data).and_then(|d| d.field_index(field)).expect("resolved field")
    }

    fn read(&mut self, s: SymState, x: &str, f: &str, span: Span) -> Result<Vec<(SymState, String)>, VerifyError> {
        let mut out = Vec::new();
        for (st, idx) in self.cell(s, x, span)? {
            let HeapAtom::PointsTo { data, args, .. } = &st.heap[idx] else { unreachable!() };
            let v = args[self.field_index(data, f)].clone();
            out.push((st, v));
        }
        Ok(out)
    }

    /// Index of a points-to atom for `x`, unfolding a predicate rooted there
    /// if needed. Branches without a cell are reported as null dereferences.
    fn cell(&mut self, s: SymState, x: &str, span: Span) -> Result<Vec<(SymState, usize)>, VerifyError> {
        let root = s.sym(x);
        if let Some(i) = self.find(&s, &root, true)? {
            return Ok(vec![(s, i)]);
        }
        let mut out = Vec::new();
        for st in self.unfold_at(s, &root)? {
            match self.find(&st, &root, true)? {
                Some(i) => out.push((st, i)),
                None => self.fail(span, format!("possible null dereference of `{x}`")),
            }
        }
        Ok(out)
    }

    /// Index of an atom rooted at `root`: syntactically, else by provable equality.
    fn find(&mut self, s: &SymState, root: &str, points_to: bool) -> Result<Option<usize>, VerifyError> {
        let want = |a: &HeapAtom| matches!(a, HeapAtom::PointsTo { .. }) == points_to;
        if let Some(i) = s.heap.iter().position(|a| want(a) && a.root() == root) {
            return Ok(Some(i));
        }
        let known = self.known(s);
        for (i, a) in s.heap.iter().enumerate() {
            if want(a) && self.implies(&known, &eq_f(Term::v(a.root()), Term::v(root)))? {
                return Ok(Some(i));
            }
        }
        Ok(None)
    }

    /// Unfolds the predicate rooted at `root`, if any, keeping feasible branches.
    fn unfold_at(&mut self, s: SymState, root: &str) -> Result<Vec<SymState>, VerifyError> {
        let Some(i) = self.find(&s, root, false)? else { return Ok(vec![s]) };
        let branches = unfold(self.table, &s.heap, i, &mut self.names).map_err(|e| match e {
            EntailError::UnknownPredicate(p) => VerifyError::UnknownPredicate(p),
            EntailError::Lia(e) => lia_err(e),
            EntailError::FuelExhausted => unreachable!("unfolding takes no fuel"),
        })?;
        let mut out = Vec::new();
        for b in branches {
            let mut st = s.clone();
            st.heap = b.heap;
            st.assume(b.pure);
            if self.feasible(&st)? {
                out.push(st);
            }
        }
        Ok(out)
    }

    fn call(
        &mut self,
        mut s: SymState,
        m: &str,
        args: &[Val],
        target: Option<&str>,
        span: Span,
        text: &str,
    ) -> Result<Vec<SymState>, VerifyError> {
        let Some(callee) = self.methods.get(m) else {
            self.fail(span, format!("call to unknown method `{m}`"));
            return Ok(vec![]);
        };
        let actuals: Vec<String> = args.iter().map(|a| self.symbol(&mut s, a)).collect();
        let res = self.fresh("res");
        let mut base = BTreeMap::new();
        let mut updates = Vec::new();
        for (p, a) in callee.params.iter().zip(&actuals) {
            base.insert(p.name.clone(), a.clone());
            if p.by_ref {
                let n = self.fresh(&p.name);
                base.insert(format!("{}'", p.name), n.clone());
                updates.push((p.name.clone(), n));
            }
        }
        base.insert("res".into(), res.clone());
        let ref_actuals: BTreeMap<String, String> = callee
            .params
            .iter()
            .zip(args)
            .filter(|(p, _)| p.by_ref)
            .filter_map(|(p, a)| match a {
                Val::Var(x) => Some((p.name.clone(), x.clone())),
                _ => None,
            })
            .collect();

        // Instantiated pairs: requires (spec vars existential) and ensures.
        let mut pairs = Vec::new();
        for sp in &callee.specs {
            let mut rho = base.clone();
            let mut spec_vars = Vec::new();
            for v in sp.requires.free_vars() {
                if !rho.contains_key(&v) {
                    let f = self.fresh(&v);
                    rho.insert(v, f.clone());
                    spec_vars.push(f);
                }
            }
            let mut req = rename_sep(&sp.requires, &rho);
            for d in &mut req.disjuncts {
                for e in std::mem::take(&mut d.exists) {
                    let f = self.fresh(&e);
                    *d = d.rename(&e, &f);
                    d.exists.push(f);
                }
                d.exists.extend(spec_vars.iter().cloned());
            }
            let ens = rename_sep(&sp.ensures, &rho);
            pairs.push((req, ens, sp.flavor));
        }

        let finish = |mut st: SymState| {
            for (p, n) in &updates {
                if let Some(x) = ref_actuals.get(p) {
                    st.latest.insert(x.clone(), n.clone());
                }
            }
            if let Some(t) = target {
                st.latest.insert(t.to_string(), res.clone());
            }
            st
        };

        let mut safe_out = Vec::new();
        let mut err_out = Vec::new();
        let mut starved = false;
        for (req, ens, flavor) in &pairs {
            let Some(residues) = self.entail(&s, req)? else {
                starved = true;
                continue;
            };
            for r in residues {
                let d = &req.disjuncts[r.disjunct];
                let bind = &r.bindings;
                let pre_pure = rename_formula(&d.pure, bind);
                for e in &ens.disjuncts {
                    let e = self.freshen_post(&rename_disjunct(e, bind));
                    let mut st = s.clone();
                    st.heap = r.frame.0.clone();
                    st.heap.extend(e.heap.0.iter().cloned());
                    st.pure = vec![r.pure.clone()];
                    st.assume(pre_pure.clone());
                    st.assume(e.pure.clone());
                    let st = finish(st);
                    if !self.feasible(&st)? {
                        continue;
                    }
                    match flavor {
                        Flavor::Safe => safe_out.push(st),
                        Flavor::Ioc => err_out.push((st, pre_pure.clone())),
                    }
                }
            }
        }

        if safe_out.is_empty() && err_out.is_empty() {
            let heap_free = pairs.iter().all(|(r, _, _)| r.disjuncts.iter().all(|d| d.heap.is_emp()));
            if heap_free && !pairs.is_empty() {
                let known = self.known(&s);
                for (req, ens, flavor) in &pairs {
                    let g = Formula::or(req.disjuncts.iter().map(|d| d.pure.clone()).collect());
                    let mut st = s.clone();
                    st.assume(g.clone());
                    if !self.sat(&Formula::and(vec![known.clone(), g.clone()]))? {
                        continue;
                    }
                    for e in &ens.disjuncts {
                        let e = self.freshen_post(e);
                        let mut st = st.clone();
                        st.heap.extend(e.heap.0.iter().cloned());
                        st.assume(e.pure.clone());
                        let st = finish(st);
                        if !self.feasible(&st)? {
                            continue;
                        }
                        match flavor {
                            Flavor::Safe => safe_out.push(st),
                            Flavor::Ioc => err_out.push((st, g.clone())),
                        }
                    }
                }
            }
        }

        if safe_out.is_empty() && err_out.is_empty() {
            let why = if starved { "unfolding fuel exhausted" } else { "not established" };
            self.fail(span, format!("precondition of `{m}` {why}"));
            return Ok(vec![]);
        }

        let may = !safe_out.is_empty();
        let known = self.known(&s);
        let mut out = safe_out;
        for (mut st, guard) in err_out {
            let mut conds = Vec::new();
            for d in disjuncts(&guard) {
                if self.sat(&Formula::and(vec![known.clone(), d.clone()]))? {
                    conds.push(self.readable(&d, &s).to_string());
                }
            }
            st.status = Status::MustIOC;
            st.origin = Some(Origin { span, op: text.to_string(), condition: conds.join(" | "), may });
            out.push(st);
        }
        Ok(out)
    }

    /// `d` with literal symbols replaced by their values, symbols named after
    /// the variables holding them, and ground conjuncts dropped.
    fn readable(&self, d: &Formula, st: &SymState) -> Formula {
        let mut d = d.clone();
        for (v, t) in &self.consts {
            d = d.subst(v, t);
        }
        for (x, sy) in st.latest.iter().filter(|(x, sy)| !x.contains('#') && x != sy) {
            let vars = d.vars();
            if vars.contains(sy) && !vars.contains(x) {
                d = d.rename(sy, x);
            }
        }
        let d = d.map_atoms(&|a| Formula::atom(a.canon().unwrap_or_else(|_| a.clone())));
        match d {
            Formula::And(xs) => {
                Formula::and(xs.into_iter().filter(|x| !x.vars().is_empty() || x.has_inf()).collect())
            }
            d => d,
        }
    }

    fn freshen_post(&mut self, d: &SepDisjunct) -> SepDisjunct {
        let mut d = d.clone();
        for e in std::mem::take(&mut d.exists) {
            let f = self.fresh(&e);
            d = d.rename(&e, &f);
        }
        d
    }

    /// Initial states for a requires formula: one per disjunct.
    pub fn initial(&mut self, req: &SepFormula, m: &LoweredMethod) -> Result<Vec<SymState>, VerifyError> {
        let mut out = Vec::new();
        for d in &req.disjuncts {
            let d = self.freshen_post(d);
            let mut st = SymState::new(d.heap.0.clone(), d.pure.clone());
            for p in &m.params {
                st.latest.insert(p.name.clone(), p.name.clone());
            }
            if self.feasible(&st)? {
                out.push(st);
            }
        }
        Ok(out)
    }

    /// Adds the method-exit equalities `res = ret` and `v' = latest(v)`.
    pub fn exit(&self, mut s: SymState, m: &LoweredMethod) -> SymState {
        if let Some(r) = s.ret.clone() {
            s.assume(eq_f(Term::v("res"), r));
        }
        for p in m.params.iter().filter(|p| p.by_ref) {
            let cur = s.sym(&p.name);
            s.assume(eq_f(Term::v(&format!("{}'", p.name)), Term::v(&cur)));
        }
        s
    }
}
