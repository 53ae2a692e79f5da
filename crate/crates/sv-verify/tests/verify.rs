use sv_frontend::{parse_program, resolve, Program};
use sv_verify::{verify_program, Options, Outcome, Severity, Verdict};

fn program(src: &str) -> Program {
    resolve(&parse_program(src).expect("parse")).expect("resolve")
}

fn run(src: &str) -> Vec<Verdict> {
    verify_program(&program(src), &Options::default()).expect("verify")
}

fn one(src: &str) -> Verdict {
    let mut v = run(src);
    assert_eq!(v.len(), 1);
    v.remove(0)
}

const LL: &str = "
data node { int val; node next; }
pred ll<root,sum> == (root=null & sum=0)
  | exists d,q,rest: root::node<d,q> * q::ll<rest> & sum=d+rest & -inf<sum & sum<inf
  inv true;
";

#[test]
fn ex1_may_overflow_at_the_addition() {
    let v = one("int ex1(int n) requires n>=0 ensures res=n+1 { return n+1; }");
    assert!(!v.verified());
    let over: Vec<_> = v.findings.iter().filter(|f| f.is_overflow()).collect();
    assert_eq!(over.len(), 1, "{:?}", v.findings);
    assert_eq!(over[0].severity, Severity::MayOverflow);
    assert_eq!(over[0].op, "n + 1");
    assert_eq!(over[0].span.line, 1);
}

#[test]
fn ex2_verified() {
    let v = one("int ex2(int n) requires 0<=n+1 & n+1<inf ensures res=n+1 { return n+1; }");
    assert!(v.verified(), "{v:?}");
}

#[test]
fn ex3_verified_with_error_branch() {
    let v = one(
        "int ex3(int n) requires n>=0 ensures n+1<=inf & res=n+1 ensures_err n+1>inf { return n+1; }",
    );
    assert!(v.verified(), "{v:?}");
    assert_eq!(v.declared.len(), 1);
}

#[test]
fn ex3_strict_bound_fails_at_the_boundary() {
    let v = one("int ex3(int n) requires n>=0 ensures n+1<inf & res=n+1 ensures_err n+1>=inf { return n+1; }");
    assert!(!v.verified());
}

#[test]
fn ex4_verified_with_ll() {
    let src = format!(
        "{LL}
int ex4(node x) requires x::ll<s> ensures x::ll<s> & res=s
{{ if (x == null) return 0; else return x.val + ex4(x.next); }}"
    );
    let v = one(&src);
    assert!(v.verified(), "{v:?}");
}

#[test]
fn ex4_with_one_sided_bound_verified() {
    let src = "
data node { int val; node next; }
pred ll<root,sum> == (root=null & sum=0)
  | exists d,q,rest: root::node<d,q> * q::ll<rest> & sum=d+rest & sum<inf
  inv true;
int ex4(node x) requires x::ll<s> ensures x::ll<s> & res=s
{ if (x == null) return 0; else return x.val + ex4(x.next); }";
    assert!(one(src).verified());
}

#[test]
fn null_dereference_is_a_failure() {
    let src = format!("{LL}\nint hd(node x) requires x::ll<s> ensures true {{ return x.val; }}");
    let v = one(&src);
    assert!(v.findings.iter().any(|f| f.severity == Severity::VerificationFailure && f.op.contains("null")));
}

#[test]
fn unsigned_addition_overflows_only_upward() {
    let v = one("uint f(uint a) requires a+1<=inf ensures res=a+1 { return a+1; }");
    assert!(v.verified(), "{v:?}");
    // a concrete bound says nothing about where inf lies
    let v = one("uint f(uint a) requires a<10 ensures res=a+1 { return a+1; }");
    assert_eq!(v.findings[0].severity, Severity::MayOverflow);
    let v = one("uint f(uint a, uint b) requires true ensures res=a+b { return a+b; }");
    assert_eq!(v.findings[0].severity, Severity::MayOverflow);
}

#[test]
fn must_overflow_when_every_path_overflows() {
    let v = one("int f(int n) requires n>=0 & n+1>inf ensures true { return n+1; }");
    assert_eq!(v.findings.len(), 1, "{v:?}");
    assert_eq!(v.findings[0].severity, Severity::MustOverflow);
}

#[test]
fn loop_counts_up_to_bound() {
    let src = "
int count(int n) requires 0<=n & n<inf ensures res=n {
  int i = 0;
  while (i < n) requires i<=n & n<inf ensures i'=n & n'=n { i = i + 1; }
  return i;
}";
    let v = one(src);
    assert!(v.verified(), "{v:?}");
    assert_eq!(v.outcomes.len(), 2);
}

#[test]
fn loop_without_bound_may_overflow() {
    let src = "
void spin(int n) requires true ensures true {
  int i = 0;
  while (i != n) requires true ensures true { i = i + 1; }
}";
    let v = one(src);
    assert_eq!(v.overflow_spans().len(), 1, "{v:?}");
}

#[test]
fn heap_update_and_call_frame() {
    let src = format!(
        "{LL}
void setv(node x, int v) requires x::node<a,b> ensures x::node<v,b> {{ x.val = v; }}
int g(node x, node y) requires x::node<a,b> * y::node<c,d> ensures exists f: x::node<f,b> * y::node<c,d> & f=5 & res=c
{{ setv(x, 5); return y.val; }}"
    );
    let vs = run(&src);
    assert!(vs.iter().all(|v| v.verified()), "{vs:?}");
}

#[test]
fn wrong_postcondition_fails() {
    let v = one("int f(int n) requires 0<=n & n<10 ensures res=n { return n+1; }");
    assert!(matches!(v.outcomes[0].outcome, Outcome::Failed(_)));
}

#[test]
fn return_in_loop_rejected() {
    let p = program("void f(int n) requires true ensures true { while (n < 0) requires true ensures true { return; } }");
    assert!(verify_program(&p, &Options::default()).is_err());
}
