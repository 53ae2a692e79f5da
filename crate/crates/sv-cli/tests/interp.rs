use proptest::prelude::*;
use sv_cli::interp::{interpret_concrete, Heap, Value, Width};
use sv_frontend::{parse_program, resolve, Program};

fn program(src: &str) -> Program {
    resolve(&parse_program(src).unwrap()).unwrap()
}

fn wrap_signed(v: i128, w: u32) -> i128 {
    let m = 1i128 << w;
    let r = v.rem_euclid(m);
    if r >= m / 2 { r - m } else { r }
}

fn run(p: &Program, a: i128, b: i128, w: u32) -> (Option<Value>, Option<Value>, usize) {
    let out = interpret_concrete(p, &p.methods[0], &Heap::default(), &[Value::Int(a), Value::Int(b)], w);
    (out.unbounded.result.unwrap(), out.wrapped.result.unwrap(), out.wrapped.events.len())
}

proptest! {
    #[test]
    fn signed_addition_wraps(w in 3u32..=16, x in any::<i64>(), y in any::<i64>()) {
        let (lo, hi) = Width::signed_range(w);
        let span = hi - lo + 1;
        let (a, b) = (lo + (x as i128).rem_euclid(span), lo + (y as i128).rem_euclid(span));
        let p = program("int f(int a, int b) requires true ensures true; { return a + b; }");
        let (exact, wrapped, events) = run(&p, a, b, w);
        prop_assert_eq!(exact, Some(Value::Int(a + b)));
        prop_assert_eq!(wrapped, Some(Value::Int(wrap_signed(a + b, w))));
        prop_assert_eq!(events == 1, a + b < lo || a + b > hi);
    }

    #[test]
    fn unsigned_addition_wraps(w in 3u32..=16, x in any::<u64>(), y in any::<u64>()) {
        let (_, hi) = Width::unsigned_range(w);
        let (a, b) = ((x as i128) % (hi + 1), (y as i128) % (hi + 1));
        let p = program("uint f(uint a, uint b) requires true ensures true; { return a + b; }");
        let (_, wrapped, events) = run(&p, a, b, w);
        prop_assert_eq!(wrapped, Some(Value::Int((a + b) % (hi + 1))));
        prop_assert_eq!(events == 1, a + b > hi);
    }

    #[test]
    fn nested_additions_report_each_site(w in 3u32..=8, x in any::<i64>()) {
        let (lo, hi) = Width::signed_range(w);
        let a = lo + (x as i128).rem_euclid(hi - lo + 1);
        let p = program("int f(int a, int b) requires true ensures true; { int c = a + a; return c + b; }");
        let out = interpret_concrete(&p, &p.methods[0], &Heap::default(), &[Value::Int(a), Value::Int(0)], w);
        let first = a + a < lo || a + a > hi;
        let sites: std::collections::BTreeSet<_> = out.wrapped.events.iter().map(|e| e.span).collect();
        prop_assert_eq!(sites.len(), usize::from(first));
    }
}
