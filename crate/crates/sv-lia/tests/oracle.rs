use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use sv_lia::{eval_finite, implies, sat, sat_conj, Budget, Kind, LinearAtom};
use sv_pure::{Formula, Lin, Rel, Term};

const VARS: [&str; 3] = ["x", "y", "z"];
const R: i64 = 6;

fn lin() -> impl Strategy<Value = Term> {
    (prop::collection::vec(-3i64..=3, 3), -5i64..=5).prop_map(|(cs, c0)| {
        let mut l = Lin::constant(c0);
        for (v, c) in VARS.iter().zip(cs) {
            l.add_coeff(v, c);
        }
        Term::Lin(l)
    })
}

fn formula() -> impl Strategy<Value = Formula> {
    let rel = prop_oneof![
        Just(Rel::Le),
        Just(Rel::Lt),
        Just(Rel::Ge),
        Just(Rel::Gt),
        Just(Rel::Eq),
        Just(Rel::Ne)
    ];
    let term = prop_oneof![
        4 => lin(),
        1 => (lin(), lin()).prop_map(|(a, b)| Term::min(a, b)),
        1 => (lin(), lin()).prop_map(|(a, b)| Term::max(a, b)),
    ];
    let atom = (term.clone(), rel, term).prop_map(|(a, r, b)| Formula::cmp(a, r, b));
    atom.prop_recursive(3, 10, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::Or),
            inner.prop_map(Formula::not),
        ]
    })
}

fn boxed(f: &Formula) -> Formula {
    let mut parts = vec![f.clone()];
    for v in VARS {
        parts.push(Formula::cmp(Term::k(-R), Rel::Le, Term::v(v)));
        parts.push(Formula::cmp(Term::v(v), Rel::Le, Term::k(R)));
    }
    Formula::And(parts)
}

fn brute(f: &Formula) -> bool {
    for x in -R..=R {
        for y in -R..=R {
            for z in -R..=R {
                let env: BTreeMap<String, i64> =
                    [("x".to_string(), x), ("y".to_string(), y), ("z".to_string(), z)].into();
                if eval_finite(f, &env).unwrap() {
                    return true;
                }
            }
        }
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn agrees_with_enumeration(f in formula()) {
        let b = boxed(&f);
        let r = sat(&b).unwrap();
        prop_assert_eq!(r.is_sat(), brute(&f));
        if let Some(w) = r.witness {
            prop_assert_eq!(eval_finite(&b, &w), Some(true));
        }
    }

    #[test]
    fn unbounded_sat_covers_bounded(f in formula()) {
        if brute(&f) {
            prop_assert!(sat(&f).unwrap().is_sat());
        }
    }

    #[test]
    fn implication_laws(f in formula()) {
        let none = BTreeSet::new();
        prop_assert!(implies(&f, &none, &f).unwrap());
        prop_assert!(implies(&Formula::False, &none, &f).unwrap());
        prop_assert_eq!(implies(&f, &none, &Formula::False).unwrap(), !sat(&f).unwrap().is_sat());
    }

    #[test]
    fn deterministic(f in formula()) {
        prop_assert_eq!(sat(&f).unwrap(), sat(&f).unwrap());
    }

    #[test]
    fn conjunction_witnesses_check(
        rows in prop::collection::vec((prop::collection::vec(-4i64..=4, 3), -9i64..=9, any::<bool>()), 1..6)
    ) {
        let atoms: Vec<LinearAtom> = rows.iter().map(|(cs, c0, eq)| {
            let mut l = Lin::constant(*c0);
            for (v, c) in VARS.iter().zip(cs) {
                l.add_coeff(v, *c);
            }
            LinearAtom { kind: if *eq { Kind::Eq } else { Kind::Le }, lhs: l }
        }).collect();
        let r = sat_conj(&atoms, Budget::default()).unwrap();
        if let Some(w) = &r.witness {
            prop_assert!(atoms.iter().all(|a| a.holds(&|v| w.get(v).copied().unwrap_or(0))));
        } else {
            // an unsat verdict must survive a local search box
            let mut found = false;
            for x in -12..=12i64 { for y in -12..=12i64 { for z in -12..=12i64 {
                let env = |v: &str| match v { "x" => x, "y" => y, _ => z };
                found |= atoms.iter().all(|a| a.holds(&env));
            }}}
            prop_assert!(!found);
        }
    }
}
