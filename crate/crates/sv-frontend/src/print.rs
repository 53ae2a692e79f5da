use std::fmt::Write;

use crate::ast::*;

pub fn print_program(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.data_defs {
        writeln!(out, "data {} {{", d.name).unwrap();
        for (t, f) in &d.fields {
            writeln!(out, "  {t} {f};").unwrap();
        }
        out.push_str("}\n\n");
    }
    for d in &p.pred_defs {
        write!(out, "pred {}<{}> == {}", d.name, d.params.join(","), d.body).unwrap();
        if let Some(inv) = &d.inv {
            write!(out, "\n  inv {inv}").unwrap();
        }
        out.push_str(";\n\n");
    }
    for m in &p.methods {
        print_method(&mut out, m);
        out.push('\n');
    }
    out
}

pub fn print_method(out: &mut String, m: &MethodDef) {
    let params: Vec<String> = m
        .params
        .iter()
        .map(|p| format!("{}{} {}", if p.by_ref { "ref " } else { "" }, p.ty, p.name))
        .collect();
    writeln!(out, "{} {}({})", m.ret, m.name, params.join(", ")).unwrap();
    print_specs(out, &m.specs, 1);
    match &m.body {
        Some(b) => {
            print_stmt(out, b, 0);
        }
        None => out.push_str(";\n"),
    }
}

fn indent(out: &mut String, n: usize) {
    for _ in 0..n {
        out.push_str("  ");
    }
}

pub fn print_specs(out: &mut String, specs: &[SpecPair], ind: usize) {
    let mut prev: Option<&SepFormula> = None;
    for s in specs {
        if prev.map(|p| p.disjuncts != s.requires.disjuncts).unwrap_or(true) {
            indent(out, ind);
            writeln!(out, "requires {}", s.requires).unwrap();
        }
        indent(out, ind);
        let kw = match s.flavor {
            Flavor::Safe => "ensures",
            Flavor::Ioc => "ensures_err",
        };
        writeln!(out, "{kw} {}", s.ensures).unwrap();
        prev = Some(&s.requires);
    }
}

pub fn print_stmt(out: &mut String, s: &Stmt, ind: usize) {
    match &s.kind {
        StmtKind::Block(ss) => {
            indent(out, ind);
            out.push_str("{\n");
            for s in ss {
                print_stmt(out, s, ind + 1);
            }
            indent(out, ind);
            out.push_str("}\n");
        }
        StmtKind::Decl { ty, name, init } => {
            indent(out, ind);
            match init {
                Some(e) => writeln!(out, "{ty} {name} = {};", print_expr(e)).unwrap(),
                None => writeln!(out, "{ty} {name};").unwrap(),
            }
        }
        StmtKind::Assign { name, value } => {
            indent(out, ind);
            writeln!(out, "{name} = {};", print_expr(value)).unwrap();
        }
        StmtKind::FieldWrite { target, field, value } => {
            indent(out, ind);
            writeln!(out, "{target}.{field} = {};", print_expr(value)).unwrap();
        }
        StmtKind::If { cond, then_branch, else_branch } => {
            indent(out, ind);
            writeln!(out, "if ({})", print_expr(cond)).unwrap();
            print_branch(out, then_branch, ind);
            if let Some(e) = else_branch {
                indent(out, ind);
                out.push_str("else\n");
                print_branch(out, e, ind);
            }
        }
        StmtKind::While { cond, specs, body } => {
            indent(out, ind);
            writeln!(out, "while ({})", print_expr(cond)).unwrap();
            print_specs(out, specs, ind + 1);
            print_branch(out, body, ind);
        }
        StmtKind::Return(e) => {
            indent(out, ind);
            match e {
                Some(e) => writeln!(out, "return {};", print_expr(e)).unwrap(),
                None => out.push_str("return;\n"),
            }
        }
        StmtKind::Expr(e) => {
            indent(out, ind);
            writeln!(out, "{};", print_expr(e)).unwrap();
        }
    }
}

fn print_branch(out: &mut String, s: &Stmt, ind: usize) {
    if matches!(s.kind, StmtKind::Block(_)) {
        print_stmt(out, s, ind);
    } else {
        print_stmt(out, s, ind + 1);
    }
}

pub fn print_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Null => "null".into(),
        ExprKind::Int(k) => k.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Float(s) => s.clone(),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Field(b, f) => format!("{}.{f}", print_operand(b)),
        ExprKind::Bin(op, a, b) => format!("{} {} {}", print_operand(a), op.symbol(), print_operand(b)),
        ExprKind::Call(m, args) => format!("{m}({})", print_args(args)),
        ExprKind::New(c, args) => format!("new {c}({})", print_args(args)),
    }
}

fn print_operand(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Bin(..) => format!("({})", print_expr(e)),
        ExprKind::Int(k) if *k < 0 => format!("({k})"),
        _ => print_expr(e),
    }
}

fn print_args(args: &[Expr]) -> String {
    args.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}
