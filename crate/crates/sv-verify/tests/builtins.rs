use std::collections::BTreeMap;

use sv_frontend::{Flavor, MethodDef};
use sv_lia::eval_finite;
use sv_pure::{eliminate_inf_with, normalize, Formula};
use sv_verify::builtin_methods;

fn method(name: &str) -> MethodDef {
    builtin_methods(true).into_iter().find(|m| m.name == name).unwrap()
}

fn guard(m: &MethodDef, flavor: Flavor) -> Formula {
    let s = m.specs.iter().find(|s| s.flavor == flavor).unwrap();
    Formula::or(s.requires.disjuncts.iter().map(|d| d.pure.clone()).collect())
}

/// Evaluates `f` with `inf` read as `top`, through the solver's own pipeline.
fn holds(f: &Formula, top: i64, k1: i64, k2: i64) -> bool {
    let g = eliminate_inf_with(&normalize(f).unwrap(), "W").formula;
    let env = BTreeMap::from([("k1".into(), k1), ("k2".into(), k2), ("W".into(), top)]);
    eval_finite(&g, &env).unwrap()
}

fn classify(name: &str, lo: i64, hi: i64, exact: impl Fn(i64, i64) -> i64) {
    let m = method(name);
    let (err, safe) = (guard(&m, Flavor::Ioc), guard(&m, Flavor::Safe));
    for k1 in lo..=hi {
        for k2 in lo..=hi {
            let r = exact(k1, k2);
            let overflow = r > hi || r < lo;
            assert_eq!(holds(&err, hi, k1, k2), overflow, "{name}({k1},{k2}) error guard");
            assert_eq!(holds(&safe, hi, k1, k2), !overflow, "{name}({k1},{k2}) safe guard");
        }
    }
}

#[test]
fn add_guards_match_symmetric_range_at_width_4() {
    classify("add", -7, 7, |a, b| a + b);
}

#[test]
fn sub_guards_match_symmetric_range_at_width_4() {
    classify("sub", -7, 7, |a, b| a - b);
}

#[test]
fn uadd_guards_match_unsigned_width_4() {
    classify("uadd", 0, 15, |a, b| a + b);
}

#[test]
fn usub_guards_match_unsigned_width_4() {
    classify("usub", 0, 15, |a, b| a - b);
}
