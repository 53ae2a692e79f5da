use std::collections::BTreeSet;

use sv_pure::{Atom, Formula, Lin, Rel, Term};

use crate::ast::*;
use crate::error::{FrontendError, Kind};
use crate::lexer::{lex, Tok, Token};

const RESERVED: &[&str] = &[
    "data", "pred", "inv", "requires", "ensures", "ensures_err", "exists", "emp", "true", "false",
    "null", "inf", "min", "max", "if", "else", "while", "return", "new", "ref",
];

type PResult<T> = Result<T, FrontendError>;

/// Formula tree before heap and pure parts are separated.
enum F {
    Pure(Formula),
    Heap(HeapAtom),
    Emp,
    And(Box<F>, Box<F>),
    Or(Box<F>, Box<F>),
    Not(Box<F>),
    Exists(Vec<String>, Box<F>),
}

impl F {
    fn is_sep(&self) -> bool {
        match self {
            F::Pure(_) => false,
            F::Heap(_) | F::Emp | F::Exists(..) => true,
            F::And(a, b) | F::Or(a, b) => a.is_sep() || b.is_sep(),
            F::Not(a) => a.is_sep(),
        }
    }

    fn into_pure(self, span: Span) -> PResult<Formula> {
        Ok(match self {
            F::Pure(p) => p,
            F::And(a, b) => Formula::And(flatten_and(vec![a.into_pure(span)?, b.into_pure(span)?])),
            F::Or(a, b) => Formula::Or(flatten_or(vec![a.into_pure(span)?, b.into_pure(span)?])),
            F::Not(a) => Formula::not(a.into_pure(span)?),
            F::Heap(_) | F::Emp | F::Exists(..) => {
                return Err(FrontendError::new(Kind::Syntax, span, "heap formula where a pure formula was expected"))
            }
        })
    }

    fn into_disjuncts(self, span: Span) -> PResult<Vec<SepDisjunct>> {
        if !self.is_sep() {
            return Ok(vec![SepDisjunct::pure(self.into_pure(span)?)]);
        }
        Ok(match self {
            F::Heap(a) => vec![SepDisjunct { exists: vec![], heap: SymHeap(vec![a]), pure: Formula::True }],
            F::Emp => vec![SepDisjunct::pure(Formula::True)],
            F::Or(a, b) => {
                let mut v = a.into_disjuncts(span)?;
                v.extend(b.into_disjuncts(span)?);
                v
            }
            F::And(a, b) => {
                let (l, r) = (a.into_disjuncts(span)?, b.into_disjuncts(span)?);
                let mut out = Vec::new();
                for x in &l {
                    for y in &r {
                        let mut heap = x.heap.0.clone();
                        heap.extend(y.heap.0.iter().cloned());
                        let mut exists = x.exists.clone();
                        exists.extend(y.exists.iter().cloned());
                        out.push(SepDisjunct {
                            exists,
                            heap: SymHeap(heap),
                            pure: conj(x.pure.clone(), y.pure.clone()),
                        });
                    }
                }
                out
            }
            F::Exists(vs, body) => body
                .into_disjuncts(span)?
                .into_iter()
                .map(|mut d| {
                    let mut e = vs.clone();
                    e.extend(d.exists);
                    d.exists = e;
                    d
                })
                .collect(),
            F::Not(_) => return Err(FrontendError::new(Kind::Syntax, span, "negation of a heap formula")),
            F::Pure(_) => unreachable!(),
        })
    }
}

fn flatten_and(xs: Vec<Formula>) -> Vec<Formula> {
    xs.into_iter().flat_map(|x| if let Formula::And(ys) = x { ys } else { vec![x] }).collect()
}

fn flatten_or(xs: Vec<Formula>) -> Vec<Formula> {
    xs.into_iter().flat_map(|x| if let Formula::Or(ys) = x { ys } else { vec![x] }).collect()
}

fn conj(a: Formula, b: Formula) -> Formula {
    match (a, b) {
        (Formula::True, b) => b,
        (a, Formula::True) => a,
        (a, b) => Formula::And(flatten_and(vec![a, b])),
    }
}

fn t_add(a: Term, b: Term) -> Term {
    match (a, b) {
        (Term::Lin(x), Term::Lin(y)) => Term::Lin(x.add(&y)),
        (a, b) => Term::add(a, b),
    }
}

fn t_neg(a: Term) -> Term {
    match a {
        Term::Lin(x) => Term::Lin(x.neg()),
        a => Term::neg(a),
    }
}

fn t_mul(k: i64, a: Term) -> Term {
    match a {
        Term::Lin(x) => Term::Lin(x.scale(k)),
        a => Term::mul(k, a),
    }
}

pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
    preds: BTreeSet<String>,
    datas: BTreeSet<String>,
}

impl Parser {
    pub fn new(src: &str) -> PResult<Self> {
        let toks = lex(src)?;
        let mut preds = BTreeSet::new();
        let mut datas = BTreeSet::new();
        for w in toks.windows(2) {
            if let (Tok::Ident(k), Tok::Ident(n)) = (&w[0].tok, &w[1].tok) {
                match k.as_str() {
                    "pred" => {
                        preds.insert(n.clone());
                    }
                    "data" => {
                        datas.insert(n.clone());
                    }
                    _ => {}
                }
            }
        }
        Ok(Parser { toks, pos: 0, preds, datas })
    }

    pub fn with_names(mut self, preds: &BTreeSet<String>, datas: &BTreeSet<String>) -> Self {
        self.preds.extend(preds.iter().cloned());
        self.datas.extend(datas.iter().cloned());
        self
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.toks[(self.pos + n).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        let found = match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(n) => format!("`{n}`"),
            Tok::Float(s) => format!("`{s}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".to_string(),
        };
        Err(FrontendError::new(Kind::Syntax, self.span(), format!("{}, found {found}", msg.into())))
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn expect_kw(&mut self, s: &str) -> PResult<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err("expected identifier"),
        }
    }

    fn ident_list(&mut self) -> PResult<Vec<String>> {
        let mut out = vec![self.ident()?];
        while self.eat_sym(",") {
            out.push(self.ident()?);
        }
        Ok(out)
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    // ---- formulas ----

    pub fn sep_formula(&mut self) -> PResult<SepFormula> {
        let span = self.span();
        let f = self.f_or()?;
        Ok(SepFormula { disjuncts: f.into_disjuncts(span)?, span })
    }

    pub fn pure_formula(&mut self) -> PResult<Formula> {
        let span = self.span();
        self.f_or()?.into_pure(span)
    }

    fn f_or(&mut self) -> PResult<F> {
        let mut l = self.f_and()?;
        while self.eat_sym("|") {
            let r = self.f_and()?;
            l = F::Or(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn f_and(&mut self) -> PResult<F> {
        let mut l = self.f_unary()?;
        while self.is_sym("&") || self.is_sym("*") {
            self.bump();
            let r = self.f_unary()?;
            l = F::And(Box::new(l), Box::new(r));
        }
        Ok(l)
    }

    fn f_unary(&mut self) -> PResult<F> {
        if self.eat_sym("!") {
            return Ok(F::Not(Box::new(self.f_unary()?)));
        }
        if self.eat_kw("exists") {
            let vs = self.ident_list()?;
            self.expect_sym(":")?;
            return Ok(F::Exists(vs, Box::new(self.f_or()?)));
        }
        self.f_prim()
    }

    fn f_prim(&mut self) -> PResult<F> {
        if self.eat_kw("true") {
            return Ok(F::Pure(Formula::True));
        }
        if self.eat_kw("false") {
            return Ok(F::Pure(Formula::False));
        }
        if self.eat_kw("emp") {
            return Ok(F::Emp);
        }
        if let Tok::Ident(root) = self.peek().clone() {
            if self.peek_at(1) == &Tok::Sym("::") {
                self.bump();
                self.bump();
                let name = self.ident()?;
                self.expect_sym("<")?;
                let args = if self.is_sym(">") { vec![] } else { self.ident_list()? };
                self.expect_sym(">")?;
                return Ok(F::Heap(self.heap_atom(root, name, args)));
            }
            if self.preds.contains(&root) && self.peek_at(1) == &Tok::Sym("<") {
                self.bump();
                self.bump();
                let args = self.ident_list()?;
                self.expect_sym(">")?;
                return Ok(F::Heap(HeapAtom::Pred { name: root, args }));
            }
        }
        if self.is_sym("(") {
            let save = self.pos;
            self.bump();
            if let Ok(f) = self.f_or() {
                if self.eat_sym(")") && !self.continues_term() {
                    return Ok(f);
                }
            }
            self.pos = save;
        }
        self.comparison()
    }

    fn heap_atom(&self, root: String, name: String, args: Vec<String>) -> HeapAtom {
        if self.preds.contains(&name) && !self.datas.contains(&name) {
            let mut a = vec![root];
            a.extend(args);
            HeapAtom::Pred { name, args: a }
        } else {
            HeapAtom::PointsTo { root, data: name, args }
        }
    }

    fn continues_term(&self) -> bool {
        matches!(self.peek(), Tok::Sym("<" | "<=" | ">" | ">=" | "=" | "==" | "!=" | "+" | "-"))
    }

    fn rel(&mut self) -> Option<Rel> {
        let r = match self.peek() {
            Tok::Sym("<") => Rel::Lt,
            Tok::Sym("<=") => Rel::Le,
            Tok::Sym(">") => Rel::Gt,
            Tok::Sym(">=") => Rel::Ge,
            Tok::Sym("=") | Tok::Sym("==") => Rel::Eq,
            Tok::Sym("!=") => Rel::Ne,
            _ => return None,
        };
        self.bump();
        Some(r)
    }

    fn comparison(&mut self) -> PResult<F> {
        let span = self.span();
        let mut lhs = self.term_or_null()?;
        let mut parts = Vec::new();
        while let Some(rel) = self.rel() {
            let rhs = self.term_or_null()?;
            parts.push(self.make_atom(&lhs, rel, &rhs, span)?);
            lhs = rhs;
        }
        match parts.len() {
            0 => self.err("expected comparison"),
            1 => Ok(F::Pure(parts.pop().unwrap())),
            _ => Ok(F::Pure(Formula::And(parts))),
        }
    }

    fn make_atom(&self, a: &Option<Term>, rel: Rel, b: &Option<Term>, span: Span) -> PResult<Formula> {
        match (a, b) {
            (Some(a), Some(b)) => Ok(Formula::cmp(a.clone(), rel, b.clone())),
            (Some(t), None) | (None, Some(t)) => {
                let v = match t.as_lin().and_then(Lin::as_var) {
                    Some(v) => v.to_string(),
                    None => return Err(FrontendError::new(Kind::Syntax, span, "only a variable can be compared with null")),
                };
                let at = Formula::Atom(Atom::Null(v));
                match rel {
                    Rel::Eq => Ok(at),
                    Rel::Ne => Ok(Formula::not(at)),
                    _ => Err(FrontendError::new(Kind::Syntax, span, "null admits only = and !=")),
                }
            }
            (None, None) => Ok(Formula::True),
        }
    }

    fn term_or_null(&mut self) -> PResult<Option<Term>> {
        if self.eat_kw("null") {
            return Ok(None);
        }
        self.term().map(Some)
    }

    pub fn term(&mut self) -> PResult<Term> {
        let mut l = self.t_unary()?;
        loop {
            if self.eat_sym("+") {
                let r = self.t_unary()?;
                l = t_add(l, r);
            } else if self.eat_sym("-") {
                let r = self.t_unary()?;
                l = t_add(l, t_neg(r));
            } else {
                return Ok(l);
            }
        }
    }

    fn t_unary(&mut self) -> PResult<Term> {
        if self.eat_sym("-") {
            return Ok(t_neg(self.t_unary()?));
        }
        self.t_atom()
    }

    fn is_heap_start(&self, at: usize) -> bool {
        matches!(self.peek_at(at), Tok::Ident(_)) && self.peek_at(at + 1) == &Tok::Sym("::")
    }

    fn t_atom(&mut self) -> PResult<Term> {
        match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                if self.is_sym("*") && !self.is_heap_start(1) {
                    self.bump();
                    let t = self.t_atom()?;
                    return Ok(t_mul(k, t));
                }
                Ok(Term::k(k))
            }
            Tok::Ident(s) if s == "inf" => {
                self.bump();
                Ok(Term::Inf)
            }
            Tok::Ident(s) if s == "min" || s == "max" => {
                self.bump();
                self.expect_sym("(")?;
                let a = self.term()?;
                self.expect_sym(",")?;
                let b = self.term()?;
                self.expect_sym(")")?;
                Ok(if s == "min" { Term::min(a, b) } else { Term::max(a, b) })
            }
            Tok::Sym("(") => {
                self.bump();
                let t = self.term()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            _ => Ok(Term::v(&self.ident()?)),
        }
    }

    // ---- types, declarations ----

    fn is_type_start(&self) -> bool {
        match self.peek() {
            Tok::Ident(s) if matches!(s.as_str(), "int" | "uint" | "bool" | "float" | "void") => true,
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                matches!(self.peek_at(1), Tok::Ident(n) if !RESERVED.contains(&n.as_str()))
            }
            _ => false,
        }
    }

    fn ty(&mut self) -> PResult<Type> {
        let name = self.ident()?;
        Ok(match name.as_str() {
            "int" => Type::Int,
            "uint" => Type::Uint,
            "bool" => Type::Bool,
            "float" => Type::Float,
            "void" => Type::Void,
            _ => Type::Data(name),
        })
    }

    pub fn program(&mut self) -> PResult<Program> {
        let mut p = Program::default();
        while !self.at_eof() {
            if self.is_kw("data") {
                p.data_defs.push(self.data_def()?);
            } else if self.is_kw("pred") {
                p.pred_defs.push(self.pred_def()?);
            } else {
                p.methods.push(self.method_def()?);
            }
        }
        Ok(p)
    }

    fn data_def(&mut self) -> PResult<DataDef> {
        let span = self.span();
        self.expect_kw("data")?;
        let name = self.ident()?;
        self.expect_sym("{")?;
        let mut fields = Vec::new();
        while !self.eat_sym("}") {
            let t = self.ty()?;
            let f = self.ident()?;
            self.expect_sym(";")?;
            fields.push((t, f));
        }
        Ok(DataDef { name, fields, span })
    }

    fn pred_def(&mut self) -> PResult<PredDef> {
        let span = self.span();
        self.expect_kw("pred")?;
        let name = self.ident()?;
        self.expect_sym("<")?;
        let params = self.ident_list()?;
        self.expect_sym(">")?;
        self.expect_sym("==")?;
        let body = self.sep_formula()?;
        let inv = if self.eat_kw("inv") { Some(self.pure_formula()?) } else { None };
        self.expect_sym(";")?;
        Ok(PredDef { name, params, body, inv, span })
    }

    fn method_def(&mut self) -> PResult<MethodDef> {
        let span = self.span();
        let ret = self.ty()?;
        let name = self.ident()?;
        self.expect_sym("(")?;
        let mut params = Vec::new();
        if !self.is_sym(")") {
            loop {
                let pspan = self.span();
                let by_ref = self.eat_kw("ref");
                let ty = self.ty()?;
                let n = self.ident()?;
                params.push(Param { by_ref, ty, name: n, span: pspan });
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym(")")?;
        let specs = self.specs()?;
        let body = if self.eat_sym(";") { None } else { Some(self.block()?) };
        Ok(MethodDef { ret, name, params, specs, body, span })
    }

    fn specs(&mut self) -> PResult<Vec<SpecPair>> {
        let mut out = Vec::new();
        loop {
            let requires = if self.eat_kw("requires") {
                let r = self.sep_formula()?;
                self.eat_clause_end();
                r
            } else if self.is_kw("ensures") || self.is_kw("ensures_err") {
                SepFormula { disjuncts: vec![SepDisjunct::pure(Formula::True)], span: self.span() }
            } else {
                return Ok(out);
            };
            let mut any = false;
            loop {
                let span = self.span();
                let flavor = if self.eat_kw("ensures") {
                    Flavor::Safe
                } else if self.eat_kw("ensures_err") {
                    Flavor::Ioc
                } else {
                    break;
                };
                let ensures = self.sep_formula()?;
                self.eat_clause_end();
                out.push(SpecPair { requires: requires.clone(), ensures, flavor, span });
                any = true;
            }
            if !any {
                return self.err("expected `ensures` or `ensures_err`");
            }
        }
    }

    /// A `;` after a spec clause is optional; a final `;` with no body
    /// following marks a method without a body.
    fn eat_clause_end(&mut self) {
        let next_is_clause = matches!(self.peek_at(1), Tok::Ident(k) if matches!(k.as_str(), "requires" | "ensures" | "ensures_err"))
            || self.peek_at(1) == &Tok::Sym("{");
        if self.is_sym(";") && next_is_clause {
            self.bump();
        }
    }

    // ---- statements ----

    fn block(&mut self) -> PResult<Stmt> {
        let span = self.span();
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            if self.at_eof() {
                return self.err("expected `}`");
            }
            out.push(self.stmt()?);
        }
        Ok(Stmt { kind: StmtKind::Block(out), span })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let span = self.span();
        if self.is_sym("{") {
            return self.block();
        }
        if self.eat_kw("if") {
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let then_branch = Box::new(self.stmt()?);
            let else_branch = if self.eat_kw("else") { Some(Box::new(self.stmt()?)) } else { None };
            return Ok(Stmt { kind: StmtKind::If { cond, then_branch, else_branch }, span });
        }
        if self.eat_kw("while") {
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let specs = self.specs()?;
            let body = Box::new(self.stmt()?);
            return Ok(Stmt { kind: StmtKind::While { cond, specs, body }, span });
        }
        if self.eat_kw("return") {
            let e = if self.is_sym(";") { None } else { Some(self.expr()?) };
            self.expect_sym(";")?;
            return Ok(Stmt { kind: StmtKind::Return(e), span });
        }
        if self.is_type_start() {
            let ty = self.ty()?;
            let name = self.ident()?;
            let init = if self.eat_sym("=") || self.eat_sym(":=") { Some(self.expr()?) } else { None };
            self.expect_sym(";")?;
            return Ok(Stmt { kind: StmtKind::Decl { ty, name, init }, span });
        }
        if let Tok::Ident(name) = self.peek().clone() {
            if matches!(self.peek_at(1), Tok::Sym("=" | ":=")) {
                self.bump();
                self.bump();
                let value = self.expr()?;
                self.expect_sym(";")?;
                return Ok(Stmt { kind: StmtKind::Assign { name, value }, span });
            }
            if self.peek_at(1) == &Tok::Sym(".") && matches!(self.peek_at(3), Tok::Sym("=" | ":=")) {
                self.bump();
                self.bump();
                let field = self.ident()?;
                self.bump();
                let value = self.expr()?;
                self.expect_sym(";")?;
                return Ok(Stmt { kind: StmtKind::FieldWrite { target: name, field, value }, span });
            }
        }
        let e = self.expr()?;
        self.expect_sym(";")?;
        Ok(Stmt { kind: StmtKind::Expr(e), span })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let l = self.e_add()?;
        let op = match self.peek() {
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(l),
        };
        let span = self.span();
        self.bump();
        let r = self.e_add()?;
        Ok(Expr::new(ExprKind::Bin(op, Box::new(l), Box::new(r)), span))
    }

    fn e_add(&mut self) -> PResult<Expr> {
        let mut l = self.e_unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(l),
            };
            let span = self.span();
            self.bump();
            let r = self.e_unary()?;
            l = Expr::new(ExprKind::Bin(op, Box::new(l), Box::new(r)), span);
        }
    }

    fn e_unary(&mut self) -> PResult<Expr> {
        let span = self.span();
        if self.eat_sym("-") {
            if let Tok::Int(k) = self.peek().clone() {
                self.bump();
                return Ok(Expr::new(ExprKind::Int(-k), span));
            }
            let e = self.e_unary()?;
            let zero = Expr::new(ExprKind::Int(0), span);
            return Ok(Expr::new(ExprKind::Bin(BinOp::Sub, Box::new(zero), Box::new(e)), span));
        }
        let mut e = self.e_prim()?;
        while self.eat_sym(".") {
            let f = self.ident()?;
            e = Expr::new(ExprKind::Field(Box::new(e), f), span);
        }
        Ok(e)
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if !self.eat_sym(")") {
            loop {
                out.push(self.expr()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(")")?;
        }
        Ok(out)
    }

    fn e_prim(&mut self) -> PResult<Expr> {
        let span = self.span();
        let kind = match self.peek().clone() {
            Tok::Int(k) => {
                self.bump();
                ExprKind::Int(k)
            }
            Tok::Float(s) => {
                self.bump();
                ExprKind::Float(s)
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                return Ok(e);
            }
            Tok::Ident(s) if s == "null" => {
                self.bump();
                ExprKind::Null
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.bump();
                ExprKind::Bool(s == "true")
            }
            Tok::Ident(s) if s == "new" => {
                self.bump();
                let c = self.ident()?;
                ExprKind::New(c, self.args()?)
            }
            _ => {
                let name = self.ident()?;
                if self.is_sym("(") {
                    ExprKind::Call(name, self.args()?)
                } else {
                    ExprKind::Var(name)
                }
            }
        };
        Ok(Expr::new(kind, span))
    }
}

pub fn parse_program(src: &str) -> Result<Program, FrontendError> {
    let mut p = Parser::new(src)?;
    p.program()
}

/// Parse a standalone separation formula. `x::c<..>` is a points-to atom
/// unless `c` names a predicate in `ctx`.
pub fn parse_formula_in(src: &str, ctx: &Program) -> Result<SepFormula, FrontendError> {
    let preds = ctx.pred_defs.iter().map(|p| p.name.clone()).collect();
    let datas = ctx.data_defs.iter().map(|d| d.name.clone()).collect();
    let mut p = Parser::new(src)?.with_names(&preds, &datas);
    let f = p.sep_formula()?;
    if !p.at_eof() {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}

pub fn parse_formula(src: &str) -> Result<SepFormula, FrontendError> {
    parse_formula_in(src, &Program::default())
}

pub fn parse_pure(src: &str) -> Result<Formula, FrontendError> {
    let mut p = Parser::new(src)?;
    let f = p.pure_formula()?;
    if !p.at_eof() {
        return p.err("unexpected trailing input");
    }
    Ok(f)
}
