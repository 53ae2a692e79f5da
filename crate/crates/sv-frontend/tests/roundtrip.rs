use proptest::prelude::*;
use sv_frontend::{parse_program, parse_pure, print_program};

fn term() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        prop::sample::select(vec!["x", "y", "z"]).prop_map(str::to_string),
        (0i64..50).prop_map(|k| k.to_string()),
        Just("inf".to_string()),
        Just("-inf".to_string()),
    ];
    leaf.prop_recursive(2, 6, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}+{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a}-{b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("min({a},{b})")),
            (inner.clone(), inner).prop_map(|(a, b)| format!("max({a},{b})")),
        ]
    })
}

fn formula() -> impl Strategy<Value = String> {
    let rel = prop::sample::select(vec!["<", "<=", ">", ">=", "=", "!="]);
    let atom = (term(), rel, term()).prop_map(|(a, r, b)| format!("{a}{r}{b}"));
    atom.prop_recursive(2, 8, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} & {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} | {b})")),
            inner.prop_map(|a| format!("!({a})")),
        ]
    })
}

proptest! {
    #[test]
    fn pure_formulas_print_and_reparse(src in formula()) {
        let f = parse_pure(&src).unwrap();
        let again = parse_pure(&f.to_string()).unwrap();
        prop_assert_eq!(again.to_string(), f.to_string());
    }

    #[test]
    fn specs_survive_program_printing(pre in formula(), post in formula()) {
        let src = format!("int f(int x, int y, int z) requires {pre} ensures {post}; {{ return x; }}");
        let p = parse_program(&src).unwrap();
        let once = print_program(&p);
        let q = parse_program(&once).unwrap();
        prop_assert_eq!(print_program(&q), once);
    }
}
