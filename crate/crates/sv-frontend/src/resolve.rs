use std::collections::{BTreeMap, BTreeSet};

use crate::ast::*;
use crate::error::{FrontendError, Kind};

type RResult<T> = Result<T, FrontendError>;

fn err<T>(kind: Kind, span: Span, msg: impl Into<String>) -> RResult<T> {
    Err(FrontendError::new(kind, span, msg))
}

/// Name resolution and type checking. Fills `Expr::ty`, turns `x::p<..>`
/// into a predicate instance when `p` is a predicate, and checks arities.
pub fn resolve(p: &Program) -> Result<Program, FrontendError> {
    let mut out = p.clone();
    check_unique(p.data_defs.iter().map(|d| (&d.name, d.span)), "data type")?;
    check_unique(p.pred_defs.iter().map(|d| (&d.name, d.span)), "predicate")?;
    check_unique(p.methods.iter().map(|d| (&d.name, d.span)), "method")?;
    for d in &p.data_defs {
        check_unique(d.fields.iter().map(|(_, f)| (f, d.span)), "field")?;
        for (t, _) in &d.fields {
            check_type(p, t, d.span)?;
        }
        if p.pred(&d.name).is_some() {
            return err(Kind::Duplicate, d.span, format!("`{}` is both a data type and a predicate", d.name));
        }
    }
    for d in &mut out.pred_defs {
        check_unique(d.params.iter().map(|x| (x, d.span)), "predicate parameter")?;
        if d.params.is_empty() {
            return err(Kind::Arity, d.span, format!("predicate `{}` needs a root parameter", d.name));
        }
        d.body = resolve_sep(p, &d.body)?;
        let allowed: BTreeSet<String> = d.params.iter().cloned().collect();
        check_free(&d.body, &allowed)?;
        if let Some(inv) = &d.inv {
            if let Some(v) = inv.vars().into_iter().find(|v| !allowed.contains(v)) {
                return err(Kind::Unbound, d.span, format!("`{v}` in invariant of `{}`", d.name));
            }
        }
    }
    for m in &mut out.methods {
        check_unique(m.params.iter().map(|x| (&x.name, x.span)), "parameter")?;
        let mut scope = Scope::default();
        for prm in &m.params {
            check_type(p, &prm.ty, prm.span)?;
            scope.declare(&prm.name, prm.ty.clone(), prm.span)?;
        }
        let primed: Vec<String> = m.params.iter().filter(|x| x.by_ref).map(|x| x.name.clone()).collect();
        let names: Vec<String> = m.params.iter().map(|x| x.name.clone()).collect();
        m.specs = resolve_specs(p, &m.specs, &names, &primed)?;
        if let Some(b) = &m.body {
            let cx = Cx { prog: p, ret: m.ret.clone() };
            m.body = Some(cx.stmt(b, &mut scope)?);
        }
    }
    Ok(out)
}

fn check_unique<'a>(items: impl Iterator<Item = (&'a String, Span)>, what: &str) -> RResult<()> {
    let mut seen = BTreeSet::new();
    for (n, span) in items {
        if !seen.insert(n.clone()) {
            return err(Kind::Duplicate, span, format!("{what} `{n}` defined twice"));
        }
    }
    Ok(())
}

fn check_type(p: &Program, t: &Type, span: Span) -> RResult<()> {
    match t {
        Type::Data(n) if p.data(n).is_none() => err(Kind::Unbound, span, format!("unknown type `{n}`")),
        _ => Ok(()),
    }
}

fn resolve_sep(p: &Program, f: &SepFormula) -> RResult<SepFormula> {
    let mut out = f.clone();
    for d in &mut out.disjuncts {
        for a in &mut d.heap.0 {
            *a = resolve_heap_atom(p, a, f.span)?;
        }
    }
    Ok(out)
}

fn resolve_heap_atom(p: &Program, a: &HeapAtom, span: Span) -> RResult<HeapAtom> {
    let (name, args) = match a {
        HeapAtom::PointsTo { root, data, args } => {
            let mut all = vec![root.clone()];
            all.extend(args.iter().cloned());
            (data, all)
        }
        HeapAtom::Pred { name, args } => (name, args.clone()),
    };
    if let Some(d) = p.data(name) {
        if args.len() - 1 != d.fields.len() {
            return err(
                Kind::Arity,
                span,
                format!("`{name}` has {} fields, {} given", d.fields.len(), args.len() - 1),
            );
        }
        return Ok(HeapAtom::PointsTo { root: args[0].clone(), data: name.clone(), args: args[1..].to_vec() });
    }
    if let Some(d) = p.pred(name) {
        if args.len() != d.params.len() {
            return err(
                Kind::Arity,
                span,
                format!("predicate `{name}` takes {} arguments, {} given", d.params.len(), args.len()),
            );
        }
        return Ok(HeapAtom::Pred { name: name.clone(), args });
    }
    err(Kind::Unbound, span, format!("unknown data type or predicate `{name}`"))
}

fn check_free(f: &SepFormula, allowed: &BTreeSet<String>) -> RResult<()> {
    match f.free_vars().into_iter().find(|v| !allowed.contains(v)) {
        Some(v) => err(Kind::Unbound, f.span, format!("`{v}`")),
        None => Ok(()),
    }
}

/// `vars` are program variables visible to the spec; `primed` may also
/// appear as `v'` in postconditions.
fn resolve_specs(p: &Program, specs: &[SpecPair], vars: &[String], primed: &[String]) -> RResult<Vec<SpecPair>> {
    let mut out = Vec::new();
    for s in specs {
        let requires = resolve_sep(p, &s.requires)?;
        let ensures = resolve_sep(p, &s.ensures)?;
        if let Some(v) = requires.free_vars().into_iter().find(|v| v == "res" || v.ends_with('\'')) {
            return err(Kind::Unbound, requires.span, format!("`{v}` is not available in a precondition"));
        }
        let mut allowed: BTreeSet<String> = vars.iter().cloned().collect();
        allowed.extend(primed.iter().map(|v| format!("{v}'")));
        allowed.insert("res".into());
        allowed.extend(requires.free_vars());
        check_free(&ensures, &allowed)?;
        out.push(SpecPair { requires, ensures, flavor: s.flavor, span: s.span });
    }
    Ok(out)
}

#[derive(Default, Clone)]
struct Scope {
    frames: Vec<BTreeMap<String, Type>>,
    base: BTreeMap<String, Type>,
}

impl Scope {
    fn lookup(&self, v: &str) -> Option<&Type> {
        self.frames.iter().rev().find_map(|f| f.get(v)).or_else(|| self.base.get(v))
    }

    fn declare(&mut self, v: &str, t: Type, span: Span) -> RResult<()> {
        if self.lookup(v).is_some() {
            return err(Kind::Duplicate, span, format!("variable `{v}` declared twice"));
        }
        match self.frames.last_mut() {
            Some(f) => f.insert(v.to_string(), t),
            None => self.base.insert(v.to_string(), t),
        };
        Ok(())
    }

    fn all(&self) -> Vec<String> {
        let mut vs: BTreeSet<String> = self.base.keys().cloned().collect();
        for f in &self.frames {
            vs.extend(f.keys().cloned());
        }
        vs.into_iter().collect()
    }
}

struct Cx<'a> {
    prog: &'a Program,
    ret: Type,
}

const NULL_TY: &str = "null";

fn assignable(to: &Type, from: &Type) -> bool {
    to == from || (to.is_ref() && *from == Type::Data(NULL_TY.into()))
}

impl Cx<'_> {
    fn stmt(&self, s: &Stmt, scope: &mut Scope) -> RResult<Stmt> {
        let kind = match &s.kind {
            StmtKind::Block(ss) => {
                scope.frames.push(BTreeMap::new());
                let r: RResult<Vec<Stmt>> = ss.iter().map(|x| self.stmt(x, scope)).collect();
                scope.frames.pop();
                StmtKind::Block(r?)
            }
            StmtKind::Decl { ty, name, init } => {
                check_type(self.prog, ty, s.span)?;
                if *ty == Type::Void {
                    return err(Kind::Type, s.span, format!("variable `{name}` cannot be void"));
                }
                let init = match init {
                    Some(e) => Some(self.expect(e, ty, scope)?),
                    None => None,
                };
                scope.declare(name, ty.clone(), s.span)?;
                StmtKind::Decl { ty: ty.clone(), name: name.clone(), init }
            }
            StmtKind::Assign { name, value } => {
                let t = self.var(name, s.span, scope)?;
                StmtKind::Assign { name: name.clone(), value: self.expect(value, &t, scope)? }
            }
            StmtKind::FieldWrite { target, field, value } => {
                let t = self.var(target, s.span, scope)?;
                let ft = self.field_type(&t, field, s.span)?;
                StmtKind::FieldWrite { target: target.clone(), field: field.clone(), value: self.expect(value, &ft, scope)? }
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                let cond = self.expect(cond, &Type::Bool, scope)?;
                let then_branch = Box::new(self.branch(then_branch, scope)?);
                let else_branch = match else_branch {
                    Some(e) => Some(Box::new(self.branch(e, scope)?)),
                    None => None,
                };
                StmtKind::If { cond, then_branch, else_branch }
            }
            StmtKind::While { cond, specs, body } => {
                let cond = self.expect(cond, &Type::Bool, scope)?;
                let vars = scope.all();
                let specs = resolve_specs(self.prog, specs, &vars, &vars)?;
                let body = Box::new(self.branch(body, scope)?);
                StmtKind::While { cond, specs, body }
            }
            StmtKind::Return(e) => match (e, &self.ret) {
                (None, Type::Void) => StmtKind::Return(None),
                (None, t) => return err(Kind::Type, s.span, format!("missing return value of type {t}")),
                (Some(_), Type::Void) => return err(Kind::Type, s.span, "void method returns a value"),
                (Some(e), t) => StmtKind::Return(Some(self.expect(e, t, scope)?)),
            },
            StmtKind::Expr(e) => StmtKind::Expr(self.expr(e, scope)?),
        };
        Ok(Stmt { kind, span: s.span })
    }

    fn branch(&self, s: &Stmt, scope: &mut Scope) -> RResult<Stmt> {
        scope.frames.push(BTreeMap::new());
        let r = self.stmt(s, scope);
        scope.frames.pop();
        r
    }

    fn var(&self, v: &str, span: Span, scope: &Scope) -> RResult<Type> {
        match scope.lookup(v) {
            Some(t) => Ok(t.clone()),
            None => err(Kind::Unbound, span, format!("`{v}`")),
        }
    }

    fn field_type(&self, t: &Type, field: &str, span: Span) -> RResult<Type> {
        let Type::Data(c) = t else {
            return err(Kind::Type, span, format!("field access `.{field}` on {t}"));
        };
        let d = match self.prog.data(c) {
            Some(d) => d,
            None => return err(Kind::Type, span, format!("field access `.{field}` on null")),
        };
        match d.fields.iter().find(|(_, f)| f == field) {
            Some((ft, _)) => Ok(ft.clone()),
            None => err(Kind::Unbound, span, format!("`{c}` has no field `{field}`")),
        }
    }

    fn expect(&self, e: &Expr, t: &Type, scope: &Scope) -> RResult<Expr> {
        let mut r = self.expr(e, scope)?;
        let got = r.ty.clone().unwrap();
        if matches!(r.kind, ExprKind::Int(_)) && t.is_integer() {
            r.ty = Some(t.clone());
            return Ok(r);
        }
        if !assignable(t, &got) {
            return err(Kind::Type, e.span, format!("expected {t}, found {got}"));
        }
        Ok(r)
    }

    fn expr(&self, e: &Expr, scope: &Scope) -> RResult<Expr> {
        let (kind, ty) = match &e.kind {
            ExprKind::Null => (ExprKind::Null, Type::Data(NULL_TY.into())),
            ExprKind::Int(k) => (ExprKind::Int(*k), e.ty.clone().unwrap_or(Type::Int)),
            ExprKind::Bool(b) => (ExprKind::Bool(*b), Type::Bool),
            ExprKind::Float(s) => (ExprKind::Float(s.clone()), Type::Float),
            ExprKind::Var(v) => (ExprKind::Var(v.clone()), self.var(v, e.span, scope)?),
            ExprKind::Field(b, f) => {
                let b = self.expr(b, scope)?;
                let t = self.field_type(b.ty.as_ref().unwrap(), f, e.span)?;
                (ExprKind::Field(Box::new(b), f.clone()), t)
            }
            ExprKind::Bin(op, a, b) => {
                let a = self.expr(a, scope)?;
                let b = self.expr(b, scope)?;
                let (ta, tb) = (a.ty.clone().unwrap(), b.ty.clone().unwrap());
                let lit = |x: &Expr| matches!(x.kind, ExprKind::Int(_));
                let num = if ta.is_integer() && tb.is_integer() {
                    if ta == tb || lit(&b) {
                        Some(ta.clone())
                    } else if lit(&a) {
                        Some(tb.clone())
                    } else {
                        None
                    }
                } else {
                    None
                };
                let ty = match op {
                    BinOp::Add | BinOp::Sub => match num {
                        Some(t) => t,
                        None => return err(Kind::Type, e.span, format!("`{}` on {ta} and {tb}", op.symbol())),
                    },
                    BinOp::Eq | BinOp::Ne => {
                        if num.is_none() && !assignable(&ta, &tb) && !assignable(&tb, &ta) {
                            return err(Kind::Type, e.span, format!("comparing {ta} with {tb}"));
                        }
                        Type::Bool
                    }
                    _ => {
                        if num.is_none() {
                            return err(Kind::Type, e.span, format!("`{}` on {ta} and {tb}", op.symbol()));
                        }
                        Type::Bool
                    }
                };
                (ExprKind::Bin(*op, Box::new(a), Box::new(b)), ty)
            }
            ExprKind::Call(m, args) => {
                let Some(md) = self.prog.method(m) else {
                    return err(Kind::Unbound, e.span, format!("unknown method `{m}`"));
                };
                if md.params.len() != args.len() {
                    return err(
                        Kind::Arity,
                        e.span,
                        format!("`{m}` takes {} arguments, {} given", md.params.len(), args.len()),
                    );
                }
                let mut out = Vec::new();
                for (prm, a) in md.params.iter().zip(args) {
                    if prm.by_ref && !matches!(a.kind, ExprKind::Var(_)) {
                        return err(Kind::Type, a.span, format!("argument for ref parameter `{}` must be a variable", prm.name));
                    }
                    out.push(self.expect(a, &prm.ty, scope)?);
                }
                (ExprKind::Call(m.clone(), out), md.ret.clone())
            }
            ExprKind::New(c, args) => {
                let Some(d) = self.prog.data(c) else {
                    return err(Kind::Unbound, e.span, format!("unknown data type `{c}`"));
                };
                if d.fields.len() != args.len() {
                    return err(
                        Kind::Arity,
                        e.span,
                        format!("`{c}` has {} fields, {} given", d.fields.len(), args.len()),
                    );
                }
                let out: RResult<Vec<Expr>> =
                    d.fields.iter().zip(args).map(|((t, _), a)| self.expect(a, t, scope)).collect();
                (ExprKind::New(c.clone(), out?), Type::Data(c.clone()))
            }
        };
        Ok(Expr { kind, span: e.span, ty: Some(ty) })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_program;

    const LL: &str = "data node { int val; node next; }\n\
        pred ll<root,sum> == (root=null & sum=0) | exists d,q,r: root::node<d,q> * q::ll<r> & sum=d+r;\n";

    fn check(src: &str) -> Result<Program, FrontendError> {
        resolve(&parse_program(&format!("{LL}{src}")).unwrap())
    }

    #[test]
    fn accepts_list_sum() {
        let p = check(
            "int sum(node x) requires x::ll<s> ensures x::ll<s> & res=s {\n\
               if (x == null) return 0; else return x.val + sum(x.next); }",
        )
        .unwrap();
        assert!(matches!(p.pred_defs[0].body.disjuncts[1].heap.0[1], HeapAtom::Pred { .. }));
    }

    #[test]
    fn idempotent() {
        let p = check("uint f(uint n) requires true ensures res=n { uint t = n + 2; return t; }").unwrap();
        assert_eq!(resolve(&p).unwrap(), p);
    }

    #[test]
    fn unbound_in_ensures() {
        let e = check("int f(int n) requires n >= 0 ensures res = m;").unwrap_err();
        assert_eq!(e.kind, Kind::Unbound);
    }

    #[test]
    fn spec_variables_from_requires() {
        check("int f(int n) requires n = k ensures res = k;").unwrap();
    }

    #[test]
    fn primes_only_for_ref() {
        check("void f(ref int n) requires true ensures n' = n + 1;").unwrap();
        assert_eq!(check("void f(int n) requires true ensures n' = n + 1;").unwrap_err().kind, Kind::Unbound);
    }

    #[test]
    fn arity_errors() {
        assert_eq!(check("int f(node x) requires x::node<a> ensures true;").unwrap_err().kind, Kind::Arity);
        assert_eq!(check("int f(node x) requires x::ll<a,b> ensures true;").unwrap_err().kind, Kind::Arity);
        assert_eq!(check("int f(int a) { return f(a, a); }").unwrap_err().kind, Kind::Arity);
    }

    #[test]
    fn type_errors() {
        assert_eq!(check("int f(node x) { return x + 1; }").unwrap_err().kind, Kind::Type);
        assert_eq!(check("int f(int a) { if (a) return 1; return 0; }").unwrap_err().kind, Kind::Type);
        assert_eq!(check("int f(int a, uint b) { return a + b; }").unwrap_err().kind, Kind::Type);
    }

    #[test]
    fn duplicates() {
        assert_eq!(check("int f(int a) { int a = 1; return a; }").unwrap_err().kind, Kind::Duplicate);
        assert_eq!(check("int f(int a); int f(int b);").unwrap_err().kind, Kind::Duplicate);
    }

    #[test]
    fn unbound_variable_in_body() {
        let e = check("int f(int a) {\n  return b;\n}").unwrap_err();
        assert_eq!((e.kind, e.span.line), (Kind::Unbound, 4));
    }
}
