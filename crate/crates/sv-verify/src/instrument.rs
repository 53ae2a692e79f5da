use std::collections::BTreeMap;

use sv_frontend::{print_expr, BinOp, Expr, ExprKind, MethodDef, Program, Span, Stmt, StmtKind, Type};

/// Rewrites checked arithmetic into calls to the builtin methods, keeping the
/// operator's span. Returns the original operator text per span.
pub fn instrument(p: &Program, check_sub: bool) -> (Program, BTreeMap<Span, String>) {
    let mut ops = BTreeMap::new();
    let mut out = p.clone();
    for m in &mut out.methods {
        if let Some(b) = &m.body {
            m.body = Some(stmt(b, check_sub, &mut ops));
        }
    }
    (out, ops)
}

fn stmt(s: &Stmt, sub: bool, ops: &mut BTreeMap<Span, String>) -> Stmt {
    let kind = match &s.kind {
        StmtKind::Block(ss) => StmtKind::Block(ss.iter().map(|x| stmt(x, sub, ops)).collect()),
        StmtKind::Decl { ty, name, init } => {
            StmtKind::Decl { ty: ty.clone(), name: name.clone(), init: init.as_ref().map(|e| expr(e, sub, ops)) }
        }
        StmtKind::Assign { name, value } => StmtKind::Assign { name: name.clone(), value: expr(value, sub, ops) },
        StmtKind::FieldWrite { target, field, value } => {
            StmtKind::FieldWrite { target: target.clone(), field: field.clone(), value: expr(value, sub, ops) }
        }
        StmtKind::If { cond, then_branch, else_branch } => StmtKind::If {
            cond: expr(cond, sub, ops),
            then_branch: Box::new(stmt(then_branch, sub, ops)),
            else_branch: else_branch.as_ref().map(|e| Box::new(stmt(e, sub, ops))),
        },
        StmtKind::While { cond, specs, body } => StmtKind::While {
            cond: expr(cond, sub, ops),
            specs: specs.clone(),
            body: Box::new(stmt(body, sub, ops)),
        },
        StmtKind::Return(e) => StmtKind::Return(e.as_ref().map(|e| expr(e, sub, ops))),
        StmtKind::Expr(e) => StmtKind::Expr(expr(e, sub, ops)),
    };
    Stmt { kind, span: s.span }
}

fn expr(e: &Expr, sub: bool, ops: &mut BTreeMap<Span, String>) -> Expr {
    let kind = match &e.kind {
        ExprKind::Field(b, f) => ExprKind::Field(Box::new(expr(b, sub, ops)), f.clone()),
        ExprKind::Bin(op, a, b) => {
            let (a2, b2) = (expr(a, sub, ops), expr(b, sub, ops));
            let unsigned = e.ty == Some(Type::Uint);
            let callee = match op {
                BinOp::Add => Some(if unsigned { "uadd" } else { "add" }),
                BinOp::Sub if sub => Some(if unsigned { "usub" } else { "sub" }),
                _ => None,
            };
            match callee {
                Some(c) => {
                    ops.insert(e.span, print_expr(e));
                    ExprKind::Call(c.to_string(), vec![a2, b2])
                }
                None => ExprKind::Bin(*op, Box::new(a2), Box::new(b2)),
            }
        }
        ExprKind::Call(m, args) => ExprKind::Call(m.clone(), args.iter().map(|x| expr(x, sub, ops)).collect()),
        ExprKind::New(c, args) => ExprKind::New(c.clone(), args.iter().map(|x| expr(x, sub, ops)).collect()),
        k => k.clone(),
    };
    Expr { kind, span: e.span, ty: e.ty.clone() }
}

/// Adds the builtin method specs to a program.
pub fn with_builtins(p: &Program, builtins: &[MethodDef]) -> Program {
    let mut out = p.clone();
    for b in builtins {
        if out.method(&b.name).is_none() {
            out.methods.push(b.clone());
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::*;
    use sv_frontend::{parse_program, print_program, resolve};

    fn prog(src: &str) -> Program {
        resolve(&parse_program(src).unwrap()).unwrap()
    }

    #[test]
    fn nested_additions_become_nested_calls() {
        let p = prog("int f(int a, int b, uint c) requires true ensures true { int x = a + b + a; uint y = c + c; return x - a; }");
        let (q, ops) = instrument(&p, false);
        let out = print_program(&q);
        assert!(out.contains("add(add(a, b), a)"), "{out}");
        assert!(out.contains("uadd(c, c)"), "{out}");
        assert!(out.contains("x - a"), "{out}");
        assert_eq!(ops.len(), 3);
        let (q, _) = instrument(&p, true);
        assert!(print_program(&q).contains("sub(x, a)"));
    }

    #[test]
    fn without_arithmetic_nothing_changes() {
        let p = prog("bool f(int a) requires true ensures true { return a < 3; }");
        let (q, ops) = instrument(&p, true);
        assert_eq!(q, p);
        assert!(ops.is_empty());
    }
}
