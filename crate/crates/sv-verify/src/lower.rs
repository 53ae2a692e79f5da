use std::collections::BTreeMap;

use sv_frontend::{
    print_expr, BinOp, Expr, ExprKind, MethodDef, Param, SepDisjunct, SepFormula, Span, SpecPair, Stmt, StmtKind,
    Type,
};
use sv_pure::{Formula, Rel, Term};

/// An operand after a-normalization.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Val {
    Var(String),
    Int(i64),
    Null,
    Bool(bool),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rhs {
    Val(Val),
    Field(String, String),
    Call(String, Vec<Val>),
    New(String, Vec<Val>),
    Cmp(BinOp, Val, Val),
    /// Arithmetic left unchecked by instrumentation.
    Arith(BinOp, Val, Val),
    /// Unconstrained value: uninitialized declarations and floats.
    Havoc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Core {
    Let { target: String, rhs: Rhs, span: Span, text: String },
    Eval { rhs: Rhs, span: Span, text: String },
    Store { target: String, field: String, val: Val, span: Span },
    If { cond: String, null_test: Option<String>, then_b: Vec<Core>, else_b: Vec<Core>, span: Span },
    Return { val: Option<Val>, span: Span },
}

#[derive(Debug, Clone)]
pub struct LoweredMethod {
    pub name: String,
    pub ret: Type,
    pub params: Vec<Param>,
    pub specs: Vec<SpecPair>,
    pub body: Option<Vec<Core>>,
    /// Source method for synthesized loop methods.
    pub owner: String,
    pub span: Span,
}

pub struct Lowerer {
    ops: BTreeMap<Span, String>,
    temps: usize,
    loops: usize,
    pub extra: Vec<LoweredMethod>,
    owner: String,
    scope: Vec<(String, Type)>,
}

/// Conjoins `p>=0` for every `uint` parameter to each precondition disjunct.
pub fn with_uint_bounds(specs: &[SpecPair], params: &[Param]) -> Vec<SpecPair> {
    let bounds: Vec<Formula> = params
        .iter()
        .filter(|p| p.ty == Type::Uint)
        .map(|p| Formula::cmp(Term::v(&p.name), Rel::Ge, Term::k(0)))
        .collect();
    if bounds.is_empty() {
        return specs.to_vec();
    }
    specs
        .iter()
        .map(|s| {
            let mut s = s.clone();
            s.requires = SepFormula {
                disjuncts: s
                    .requires
                    .disjuncts
                    .iter()
                    .map(|d| {
                        let mut parts = vec![d.pure.clone()];
                        parts.extend(bounds.iter().cloned());
                        SepDisjunct { pure: Formula::and(parts), ..d.clone() }
                    })
                    .collect(),
                span: s.requires.span,
            };
            s
        })
        .collect()
}

impl Lowerer {
    /// `ops` maps instrumented call spans to the original operator text.
    pub fn new(ops: BTreeMap<Span, String>) -> Self {
        Lowerer { ops, temps: 0, loops: 0, extra: vec![], owner: String::new(), scope: vec![] }
    }

    pub fn method(&mut self, m: &MethodDef) -> LoweredMethod {
        self.owner = m.name.clone();
        self.scope = m.params.iter().map(|p| (p.name.clone(), p.ty.clone())).collect();
        let body = m.body.as_ref().map(|b| self.stmt(b));
        LoweredMethod {
            name: m.name.clone(),
            ret: m.ret.clone(),
            params: m.params.clone(),
            specs: with_uint_bounds(&m.specs, &m.params),
            body,
            owner: m.name.clone(),
            span: m.span,
        }
    }

    fn text(&self, e: &Expr) -> String {
        self.ops.get(&e.span).cloned().unwrap_or_else(|| print_expr(e))
    }

    fn temp(&mut self) -> String {
        self.temps += 1;
        format!("tmp#{}", self.temps)
    }

    fn stmt(&mut self, s: &Stmt) -> Vec<Core> {
        match &s.kind {
            StmtKind::Block(ss) => {
                let mark = self.scope.len();
                let out = ss.iter().flat_map(|x| self.stmt(x)).collect();
                self.scope.truncate(mark);
                out
            }
            StmtKind::Decl { ty, name, init } => {
                self.scope.push((name.clone(), ty.clone()));
                match init {
                    Some(e) => self.assign(name, e),
                    None => vec![Core::Let { target: name.clone(), rhs: Rhs::Havoc, span: s.span, text: String::new() }],
                }
            }
            StmtKind::Assign { name, value } => self.assign(name, value),
            StmtKind::FieldWrite { target, field, value } => {
                let (mut out, val) = self.expr(value);
                out.push(Core::Store { target: target.clone(), field: field.clone(), val, span: s.span });
                out
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                let (mut out, v) = self.expr(cond);
                let cv = self.as_var(v, cond.span, &mut out);
                let mark = self.scope.len();
                let then_b = self.stmt(then_branch);
                self.scope.truncate(mark);
                let else_b = else_branch.as_ref().map(|e| self.stmt(e)).unwrap_or_default();
                self.scope.truncate(mark);
                out.push(Core::If { cond: cv, null_test: null_test(cond), then_b, else_b, span: s.span });
                out
            }
            StmtKind::While { cond, specs, body } => {
                self.loops += 1;
                let name = format!("{}#loop{}", self.owner, self.loops);
                let vars = self.scope.clone();
                let params: Vec<Param> = vars
                    .iter()
                    .map(|(n, t)| Param { by_ref: true, ty: t.clone(), name: n.clone(), span: s.span })
                    .collect();
                let args: Vec<Val> = vars.iter().map(|(n, _)| Val::Var(n.clone())).collect();
                let call = Core::Eval { rhs: Rhs::Call(name.clone(), args.clone()), span: s.span, text: "while".into() };
                let (mut inner, v) = self.expr(cond);
                let cv = self.as_var(v, cond.span, &mut inner);
                let mark = self.scope.len();
                let mut then_b = self.stmt(body);
                self.scope.truncate(mark);
                then_b.push(call.clone());
                inner.push(Core::If { cond: cv, null_test: null_test(cond), then_b, else_b: vec![], span: s.span });
                self.extra.push(LoweredMethod {
                    name,
                    ret: Type::Void,
                    specs: with_uint_bounds(specs, &params),
                    params,
                    body: Some(inner),
                    owner: self.owner.clone(),
                    span: s.span,
                });
                vec![call]
            }
            StmtKind::Return(e) => match e {
                Some(e) => {
                    let (mut out, v) = self.expr(e);
                    out.push(Core::Return { val: Some(v), span: s.span });
                    out
                }
                None => vec![Core::Return { val: None, span: s.span }],
            },
            StmtKind::Expr(e) => match &e.kind {
                ExprKind::Call(m, args) => {
                    let (mut out, vals) = self.exprs(args);
                    out.push(Core::Eval { rhs: Rhs::Call(m.clone(), vals), span: e.span, text: self.text(e) });
                    out
                }
                _ => self.expr(e).0,
            },
        }
    }

    fn assign(&mut self, name: &str, e: &Expr) -> Vec<Core> {
        let (mut out, rhs, span) = self.rhs(e);
        out.push(Core::Let { target: name.to_string(), rhs, span, text: self.text(e) });
        out
    }

    fn as_var(&mut self, v: Val, span: Span, out: &mut Vec<Core>) -> String {
        match v {
            Val::Var(x) => x,
            other => {
                let t = self.temp();
                out.push(Core::Let { target: t.clone(), rhs: Rhs::Val(other), span, text: String::new() });
                t
            }
        }
    }

    fn exprs(&mut self, es: &[Expr]) -> (Vec<Core>, Vec<Val>) {
        let mut out = Vec::new();
        let mut vals = Vec::new();
        for e in es {
            let (s, v) = self.expr(e);
            out.extend(s);
            vals.push(v);
        }
        (out, vals)
    }

    /// Lowers `e` to statements plus a right-hand side, without binding the
    /// outermost operation to a temporary.
    fn rhs(&mut self, e: &Expr) -> (Vec<Core>, Rhs, Span) {
        match &e.kind {
            ExprKind::Null => (vec![], Rhs::Val(Val::Null), e.span),
            ExprKind::Int(k) => (vec![], Rhs::Val(Val::Int(*k)), e.span),
            ExprKind::Bool(b) => (vec![], Rhs::Val(Val::Bool(*b)), e.span),
            ExprKind::Float(_) => (vec![], Rhs::Havoc, e.span),
            ExprKind::Var(v) => (vec![], Rhs::Val(Val::Var(v.clone())), e.span),
            ExprKind::Field(b, f) => {
                let (mut out, bv) = self.expr(b);
                let bv = self.as_var(bv, b.span, &mut out);
                (out, Rhs::Field(bv, f.clone()), e.span)
            }
            ExprKind::Bin(op, a, b) => {
                let (mut out, av) = self.expr(a);
                let (bs, bv) = self.expr(b);
                out.extend(bs);
                let rhs = match op {
                    BinOp::Add | BinOp::Sub => Rhs::Arith(*op, av, bv),
                    op => Rhs::Cmp(*op, av, bv),
                };
                (out, rhs, e.span)
            }
            ExprKind::Call(m, args) => {
                let (out, vals) = self.exprs(args);
                (out, Rhs::Call(m.clone(), vals), e.span)
            }
            ExprKind::New(c, args) => {
                let (out, vals) = self.exprs(args);
                (out, Rhs::New(c.clone(), vals), e.span)
            }
        }
    }

    fn expr(&mut self, e: &Expr) -> (Vec<Core>, Val) {
        let (mut out, rhs, span) = self.rhs(e);
        match rhs {
            Rhs::Val(v) => (out, v),
            rhs => {
                let t = self.temp();
                out.push(Core::Let { target: t.clone(), rhs, span, text: self.text(e) });
                (out, Val::Var(t))
            }
        }
    }
}

fn null_test(cond: &Expr) -> Option<String> {
    let ExprKind::Bin(BinOp::Eq | BinOp::Ne, a, b) = &cond.kind else { return None };
    match (&a.kind, &b.kind) {
        (ExprKind::Var(v), ExprKind::Null) | (ExprKind::Null, ExprKind::Var(v)) => Some(v.clone()),
        _ => None,
    }
}

/// True if `body` contains a `return` (used to reject returns in loops).
pub fn has_return(s: &Stmt) -> bool {
    match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::Block(ss) => ss.iter().any(has_return),
        StmtKind::If { then_branch, else_branch, .. } => {
            has_return(then_branch) || else_branch.as_deref().is_some_and(has_return)
        }
        StmtKind::While { body, .. } => has_return(body),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::instrument;
    use sv_frontend::{parse_program, resolve};

    #[test]
    fn ex4_body_is_a_normalized() {
        let src = "data node { int val; node next; }
int ex4(node x) requires true ensures true { if (x == null) return 0; else return x.val + ex4(x.next); }";
        let p = resolve(&parse_program(src).unwrap()).unwrap();
        let (p, ops) = instrument(&p, false);
        let m = Lowerer::new(ops).method(&p.methods[0]);
        let body = m.body.unwrap();
        let [Core::Let { rhs: Rhs::Cmp(BinOp::Eq, _, Val::Null), .. }, Core::If { null_test, else_b, .. }] = &body[..]
        else {
            panic!("{body:?}")
        };
        assert_eq!(null_test.as_deref(), Some("x"));
        let rhss: Vec<&Rhs> = else_b
            .iter()
            .filter_map(|c| match c {
                Core::Let { rhs, .. } => Some(rhs),
                _ => None,
            })
            .collect();
        assert!(matches!(rhss[0], Rhs::Field(x, f) if x == "x" && f == "val"));
        assert!(matches!(rhss[1], Rhs::Field(x, f) if x == "x" && f == "next"));
        assert!(matches!(rhss[2], Rhs::Call(m, _) if m == "ex4"));
        let Core::Let { rhs: Rhs::Call(add, _), text, .. } = &else_b[3] else { panic!("{else_b:?}") };
        assert_eq!((add.as_str(), text.as_str()), ("add", "x.val + ex4(x.next)"));
        assert!(matches!(else_b[4], Core::Return { val: Some(Val::Var(_)), .. }));
    }

    #[test]
    fn uint_parameters_bound_preconditions() {
        let p = resolve(&parse_program("uint f(uint a, int b) requires b>0 ensures true;").unwrap()).unwrap();
        let s = with_uint_bounds(&p.methods[0].specs, &p.methods[0].params);
        assert_eq!(s[0].requires.disjuncts[0].pure.to_string(), "b>0 & a>=0");
    }
}
