use std::collections::BTreeSet;
use std::fmt;

use sv_pure::Formula;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Uint,
    Bool,
    Float,
    Void,
    Data(String),
}

impl Type {
    pub fn is_integer(&self) -> bool {
        matches!(self, Type::Int | Type::Uint)
    }

    pub fn is_ref(&self) -> bool {
        matches!(self, Type::Data(_))
    }
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => write!(f, "int"),
            Type::Uint => write!(f, "uint"),
            Type::Bool => write!(f, "bool"),
            Type::Float => write!(f, "float"),
            Type::Void => write!(f, "void"),
            Type::Data(n) => write!(f, "{n}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HeapAtom {
    /// `root::data<args>`
    PointsTo { root: String, data: String, args: Vec<String> },
    /// `args[0]::pred<args[1..]>`
    Pred { name: String, args: Vec<String> },
}

impl HeapAtom {
    pub fn root(&self) -> &str {
        match self {
            HeapAtom::PointsTo { root, .. } => root,
            HeapAtom::Pred { args, .. } => &args[0],
        }
    }

    pub fn vars(&self) -> Vec<&str> {
        match self {
            HeapAtom::PointsTo { root, args, .. } => {
                std::iter::once(root.as_str()).chain(args.iter().map(String::as_str)).collect()
            }
            HeapAtom::Pred { args, .. } => args.iter().map(String::as_str).collect(),
        }
    }

    pub fn rename(&self, from: &str, to: &str) -> HeapAtom {
        let r = |x: &String| if x == from { to.to_string() } else { x.clone() };
        match self {
            HeapAtom::PointsTo { root, data, args } => HeapAtom::PointsTo {
                root: r(root),
                data: data.clone(),
                args: args.iter().map(r).collect(),
            },
            HeapAtom::Pred { name, args } => HeapAtom::Pred { name: name.clone(), args: args.iter().map(r).collect() },
        }
    }
}

impl fmt::Display for HeapAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HeapAtom::PointsTo { root, data, args } => write!(f, "{root}::{data}<{}>", args.join(",")),
            HeapAtom::Pred { name, args } => write!(f, "{}::{name}<{}>", args[0], args[1..].join(",")),
        }
    }
}

/// Separating conjunction of heap atoms; empty means `emp`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct SymHeap(pub Vec<HeapAtom>);

impl SymHeap {
    pub fn emp() -> Self {
        SymHeap(Vec::new())
    }

    pub fn is_emp(&self) -> bool {
        self.0.is_empty()
    }

    pub fn rename(&self, from: &str, to: &str) -> SymHeap {
        SymHeap(self.0.iter().map(|a| a.rename(from, to)).collect())
    }

    pub fn vars(&self) -> BTreeSet<String> {
        self.0.iter().flat_map(|a| a.vars().into_iter().map(str::to_string)).collect()
    }
}

impl fmt::Display for SymHeap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "emp");
        }
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(" * "))
    }
}

/// `exists vars: heap & pure`
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SepDisjunct {
    pub exists: Vec<String>,
    pub heap: SymHeap,
    pub pure: Formula,
}

impl SepDisjunct {
    pub fn pure(pure: Formula) -> Self {
        SepDisjunct { exists: vec![], heap: SymHeap::emp(), pure }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut vs = self.heap.vars();
        vs.extend(self.pure.vars());
        for e in &self.exists {
            vs.remove(e);
        }
        vs
    }

    pub fn rename(&self, from: &str, to: &str) -> SepDisjunct {
        if self.exists.iter().any(|e| e == from) {
            return self.clone();
        }
        SepDisjunct {
            exists: self.exists.clone(),
            heap: self.heap.rename(from, to),
            pure: self.pure.rename(from, to),
        }
    }

    fn fmt_with(&self, f: &mut fmt::Formatter<'_>, show_emp: bool) -> fmt::Result {
        if !self.exists.is_empty() {
            write!(f, "exists {}: ", self.exists.join(","))?;
        }
        let heap = !self.heap.is_emp() || show_emp;
        if heap {
            write!(f, "{}", self.heap)?;
        }
        match (&self.pure, heap) {
            (Formula::True, true) => Ok(()),
            (p @ Formula::Or(_), true) => write!(f, " & ({p})"),
            (p, true) => write!(f, " & {p}"),
            (p @ Formula::Or(_), false) if !self.exists.is_empty() => write!(f, "({p})"),
            (p, false) => write!(f, "{p}"),
        }
    }
}

/// Disjunction of existentially quantified symbolic heaps with pure parts.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SepFormula {
    pub disjuncts: Vec<SepDisjunct>,
    pub span: Span,
}

impl SepFormula {
    pub fn pure(pure: Formula) -> Self {
        SepFormula { disjuncts: vec![SepDisjunct::pure(pure)], span: Span::default() }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        self.disjuncts.iter().flat_map(SepDisjunct::free_vars).collect()
    }

    pub fn rename(&self, from: &str, to: &str) -> SepFormula {
        SepFormula { disjuncts: self.disjuncts.iter().map(|d| d.rename(from, to)).collect(), span: self.span }
    }
}

impl fmt::Display for SepFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let many = self.disjuncts.len() > 1;
        for (i, d) in self.disjuncts.iter().enumerate() {
            if i > 0 {
                write!(f, " | ")?;
            }
            if many {
                write!(f, "(")?;
                d.fmt_with(f, true)?;
                write!(f, ")")?;
            } else {
                d.fmt_with(f, false)?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataDef {
    pub name: String,
    pub fields: Vec<(Type, String)>,
    pub span: Span,
}

impl DataDef {
    pub fn field_index(&self, f: &str) -> Option<usize> {
        self.fields.iter().position(|(_, n)| n == f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredDef {
    pub name: String,
    pub params: Vec<String>,
    pub body: SepFormula,
    pub inv: Option<Formula>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flavor {
    Safe,
    Ioc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpecPair {
    pub requires: SepFormula,
    pub ensures: SepFormula,
    pub flavor: Flavor,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub by_ref: bool,
    pub ty: Type,
    pub name: String,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub ret: Type,
    pub name: String,
    pub params: Vec<Param>,
    pub specs: Vec<SpecPair>,
    pub body: Option<Stmt>,
    pub span: Span,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }

    pub fn is_comparison(self) -> bool {
        !matches!(self, BinOp::Add | BinOp::Sub)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Null,
    Int(i64),
    Bool(bool),
    Float(String),
    Var(String),
    Field(Box<Expr>, String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(String, Vec<Expr>),
    New(String, Vec<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
    /// Filled in by resolution.
    pub ty: Option<Type>,
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span, ty: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Decl { ty: Type, name: String, init: Option<Expr> },
    Assign { name: String, value: Expr },
    FieldWrite { target: String, field: String, value: Expr },
    If { cond: Expr, then_branch: Box<Stmt>, else_branch: Option<Box<Stmt>> },
    While { cond: Expr, specs: Vec<SpecPair>, body: Box<Stmt> },
    Return(Option<Expr>),
    Expr(Expr),
    Block(Vec<Stmt>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub data_defs: Vec<DataDef>,
    pub pred_defs: Vec<PredDef>,
    pub methods: Vec<MethodDef>,
}

impl Program {
    pub fn data(&self, name: &str) -> Option<&DataDef> {
        self.data_defs.iter().find(|d| d.name == name)
    }

    pub fn pred(&self, name: &str) -> Option<&PredDef> {
        self.pred_defs.iter().find(|d| d.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDef> {
        self.methods.iter().find(|d| d.name == name)
    }
}
