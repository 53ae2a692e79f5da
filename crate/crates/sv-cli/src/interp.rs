//! Concrete interpreter over unbounded and fixed-width integers.

use std::collections::BTreeMap;

use sv_frontend::{BinOp, Expr, ExprKind, MethodDef, Program, Span, Stmt, StmtKind, Type};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Int(i128),
    Bool(bool),
    Null,
    Ref(usize),
    /// Floats and uninitialized locals.
    Opaque,
}

impl Value {
    pub fn int(self) -> i128 {
        match self {
            Value::Int(k) => k,
            Value::Bool(b) => b as i128,
            Value::Null => 0,
            Value::Ref(a) => a as i128 + 1,
            Value::Opaque => 0,
        }
    }

    fn truthy(self) -> bool {
        self.int() != 0
    }
}

/// Integer width for the wrapped run; `None` is unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Width(pub Option<u32>);

impl Width {
    pub fn signed_range(w: u32) -> (i128, i128) {
        (-(1i128 << (w - 1)), (1i128 << (w - 1)) - 1)
    }

    pub fn unsigned_range(w: u32) -> (i128, i128) {
        (0, (1i128 << w) - 1)
    }

    fn wrap(self, k: i128, unsigned: bool) -> i128 {
        let Some(w) = self.0 else { return k };
        let m = 1i128 << w;
        let r = k.rem_euclid(m);
        if unsigned || r < m / 2 {
            r
        } else {
            r - m
        }
    }
}

/// An operation whose fixed-width result differs from the exact one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub span: Span,
    pub op: BinOp,
    pub operands: (i128, i128),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abort {
    NullDeref(Span),
    StepBudget,
    /// Call to a method without a body.
    Opaque(Span),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Run {
    pub result: Result<Option<Value>, Abort>,
    pub events: Vec<Event>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConcreteOutcome {
    pub unbounded: Run,
    pub wrapped: Run,
}

#[derive(Debug, Clone, Default)]
pub struct Heap {
    pub cells: Vec<(String, Vec<Value>)>,
}

impl Heap {
    pub fn alloc(&mut self, data: &str, fields: Vec<Value>) -> Value {
        self.cells.push((data.to_string(), fields));
        Value::Ref(self.cells.len() - 1)
    }
}

enum Flow {
    Next,
    Ret(Option<Value>),
}

pub struct Interp<'a> {
    pub program: &'a Program,
    pub width: Width,
    pub heap: Heap,
    pub events: Vec<Event>,
    steps: u64,
    budget: u64,
}

pub const DEFAULT_STEPS: u64 = 100_000;

impl<'a> Interp<'a> {
    pub fn new(program: &'a Program, width: Width, heap: Heap) -> Self {
        Interp { program, width, heap, events: vec![], steps: 0, budget: DEFAULT_STEPS }
    }

    /// Calls `m` with `args`; returns the result and the final argument values.
    pub fn call(&mut self, m: &MethodDef, args: Vec<Value>) -> Result<(Option<Value>, Vec<Value>), Abort> {
        let Some(body) = &m.body else { return Err(Abort::Opaque(m.span)) };
        let mut env: BTreeMap<String, Value> =
            m.params.iter().map(|p| p.name.clone()).zip(args).collect();
        let r = match self.stmt(body, &mut env)? {
            Flow::Ret(v) => v,
            Flow::Next => None,
        };
        let out = m.params.iter().map(|p| env[&p.name]).collect();
        Ok((r, out))
    }

    fn tick(&mut self) -> Result<(), Abort> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(Abort::StepBudget);
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Stmt, env: &mut BTreeMap<String, Value>) -> Result<Flow, Abort> {
        self.tick()?;
        match &s.kind {
            StmtKind::Decl { name, init, .. } => {
                let v = match init {
                    Some(e) => self.expr(e, env)?,
                    None => Value::Opaque,
                };
                env.insert(name.clone(), v);
            }
            StmtKind::Assign { name, value } => {
                let v = self.expr(value, env)?;
                env.insert(name.clone(), v);
            }
            StmtKind::FieldWrite { target, field, value } => {
                let v = self.expr(value, env)?;
                let a = self.deref(env[target], s.span)?;
                let i = self.field(a, field);
                self.heap.cells[a].1[i] = v;
            }
            StmtKind::If { cond, then_branch, else_branch } => {
                if self.expr(cond, env)?.truthy() {
                    return self.stmt(then_branch, env);
                } else if let Some(e) = else_branch {
                    return self.stmt(e, env);
                }
            }
            StmtKind::While { cond, body, .. } => {
                while self.expr(cond, env)?.truthy() {
                    self.tick()?;
                    if let Flow::Ret(v) = self.stmt(body, env)? {
                        return Ok(Flow::Ret(v));
                    }
                }
            }
            StmtKind::Return(e) => {
                let v = e.as_ref().map(|e| self.expr(e, env)).transpose()?;
                return Ok(Flow::Ret(v));
            }
            StmtKind::Expr(e) => {
                self.expr(e, env)?;
            }
            StmtKind::Block(ss) => {
                let outer: Vec<String> = env.keys().cloned().collect();
                for x in ss {
                    if let Flow::Ret(v) = self.stmt(x, env)? {
                        return Ok(Flow::Ret(v));
                    }
                }
                env.retain(|k, _| outer.contains(k));
            }
        }
        Ok(Flow::Next)
    }

    fn deref(&self, v: Value, span: Span) -> Result<usize, Abort> {
        match v {
            Value::Ref(a) => Ok(a),
            _ => Err(Abort::NullDeref(span)),
        }
    }

    fn field(&self, a: usize, f: &str) -> usize {
        let data = &self.heap.cells[a].0;
        self.program.data(data).and_then(|d| d.field_index(f)).expect("resolved field")
    }

    fn expr(&mut self, e: &Expr, env: &mut BTreeMap<String, Value>) -> Result<Value, Abort> {
        Ok(match &e.kind {
            ExprKind::Null => Value::Null,
            ExprKind::Int(k) => Value::Int(*k as i128),
            ExprKind::Bool(b) => Value::Bool(*b),
            ExprKind::Float(_) => Value::Opaque,
            ExprKind::Var(v) => env.get(v).copied().unwrap_or(Value::Opaque),
            ExprKind::Field(b, f) => {
                let bv = self.expr(b, env)?;
                let a = self.deref(bv, e.span)?;
                let i = self.field(a, f);
                self.heap.cells[a].1[i]
            }
            ExprKind::Bin(op, a, b) => {
                let (x, y) = (self.expr(a, env)?, self.expr(b, env)?);
                self.bin(*op, x, y, e)
            }
            ExprKind::Call(m, args) => {
                let callee = self.program.method(m).expect("resolved call");
                let vals = args.iter().map(|a| self.expr(a, env)).collect::<Result<Vec<_>, _>>()?;
                let (r, out) = self.call(callee, vals)?;
                for ((p, a), v) in callee.params.iter().zip(args).zip(out) {
                    if let (true, ExprKind::Var(x)) = (p.by_ref, &a.kind) {
                        env.insert(x.clone(), v);
                    }
                }
                r.unwrap_or(Value::Opaque)
            }
            ExprKind::New(c, args) => {
                let vals = args.iter().map(|a| self.expr(a, env)).collect::<Result<Vec<_>, _>>()?;
                self.heap.alloc(c, vals)
            }
        })
    }

    fn bin(&mut self, op: BinOp, x: Value, y: Value, e: &Expr) -> Value {
        let cmp = |r: bool| Value::Bool(r);
        match op {
            BinOp::Add | BinOp::Sub => {
                let (a, b) = (x.int(), y.int());
                let exact = if op == BinOp::Add { a + b } else { a - b };
                let unsigned = e.ty == Some(Type::Uint);
                let r = self.width.wrap(exact, unsigned);
                if r != exact {
                    self.events.push(Event { span: e.span, op, operands: (a, b) });
                }
                Value::Int(r)
            }
            BinOp::Eq => cmp(x.int() == y.int() && same_kind(x, y)),
            BinOp::Ne => cmp(!(x.int() == y.int() && same_kind(x, y))),
            BinOp::Lt => cmp(x.int() < y.int()),
            BinOp::Le => cmp(x.int() <= y.int()),
            BinOp::Gt => cmp(x.int() > y.int()),
            BinOp::Ge => cmp(x.int() >= y.int()),
        }
    }
}

fn same_kind(x: Value, y: Value) -> bool {
    let r = |v: Value| matches!(v, Value::Ref(_) | Value::Null);
    r(x) == r(y)
}

/// Runs `m` on `args` over unbounded integers and over `w`-bit integers.
pub fn interpret_concrete(p: &Program, m: &MethodDef, heap: &Heap, args: &[Value], w: u32) -> ConcreteOutcome {
    let run = |width: Width| {
        let mut it = Interp::new(p, width, heap.clone());
        let result = it.call(m, args.to_vec()).map(|(r, _)| r);
        Run { result, events: it.events }
    };
    ConcreteOutcome { unbounded: run(Width(None)), wrapped: run(Width(Some(w))) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use sv_frontend::{parse_program, resolve};

    fn prog(src: &str) -> Program {
        resolve(&parse_program(src).unwrap()).unwrap()
    }

    #[test]
    fn signed_wraparound_at_width_4() {
        let p = prog("int f(int a, int b) requires true ensures true { return a + b; }");
        let o = interpret_concrete(&p, &p.methods[0], &Heap::default(), &[Value::Int(7), Value::Int(1)], 4);
        assert_eq!(o.unbounded.result, Ok(Some(Value::Int(8))));
        assert_eq!(o.wrapped.result, Ok(Some(Value::Int(-8))));
        assert_eq!(o.wrapped.events.len(), 1);
        assert_eq!(o.wrapped.events[0].operands, (7, 1));
        assert!(o.unbounded.events.is_empty());
    }

    #[test]
    fn unsigned_in_range_has_no_event() {
        let p = prog("uint f(uint a, uint b) requires true ensures true { return a + b; }");
        let o = interpret_concrete(&p, &p.methods[0], &Heap::default(), &[Value::Int(3), Value::Int(4)], 4);
        assert_eq!(o.wrapped.result, Ok(Some(Value::Int(7))));
        assert!(o.wrapped.events.is_empty());
        let o = interpret_concrete(&p, &p.methods[0], &Heap::default(), &[Value::Int(9), Value::Int(9)], 4);
        assert_eq!(o.wrapped.result, Ok(Some(Value::Int(2))));
    }

    #[test]
    fn list_sum_and_null_deref() {
        let p = prog(
            "data node { int val; node next; }
int sum(node x) requires true ensures true { if (x == null) return 0; else return x.val + sum(x.next); }
int hd(node x) requires true ensures true { return x.val; }",
        );
        let mut h = Heap::default();
        let c = h.alloc("node", vec![Value::Int(3), Value::Null]);
        let b = h.alloc("node", vec![Value::Int(2), c]);
        let a = h.alloc("node", vec![Value::Int(1), b]);
        let o = interpret_concrete(&p, &p.methods[0], &h, &[a], 8);
        assert_eq!(o.wrapped.result, Ok(Some(Value::Int(6))));
        assert!(o.wrapped.events.is_empty());
        let o = interpret_concrete(&p, &p.methods[1], &h, &[Value::Null], 8);
        assert!(matches!(o.wrapped.result, Err(Abort::NullDeref(_))));
    }

    #[test]
    fn loops_respect_the_step_budget() {
        let p = prog("void f(int n) requires true ensures true { while (n == n) requires true ensures true { n = n; } }");
        let o = interpret_concrete(&p, &p.methods[0], &Heap::default(), &[Value::Int(0)], 8);
        assert_eq!(o.wrapped.result, Err(Abort::StepBudget));
    }

    #[test]
    fn ref_parameters_write_back() {
        let p = prog(
            "void inc(ref int x) requires true ensures true { x = x + 1; }
int g(int a) requires true ensures true { inc(a); return a; }",
        );
        let o = interpret_concrete(&p, &p.methods[1], &Heap::default(), &[Value::Int(4)], 8);
        assert_eq!(o.wrapped.result, Ok(Some(Value::Int(5))));
    }
}
