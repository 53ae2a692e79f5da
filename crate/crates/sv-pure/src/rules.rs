//! The normalization rule table as data, one entry per rule.

use crate::formula::{Atom, Formula, Rel};
use crate::term::Term;

#[derive(Debug, Clone)]
pub struct RuleCase {
    pub group: &'static str,
    pub input: Atom,
    pub output: Formula,
}

fn case(group: &'static str, l: Term, rel: Rel, r: Term, output: Formula) -> RuleCase {
    RuleCase { group, input: Atom::Cmp(l, rel, r), output }
}

/// All 26 rules, instantiated with `k = 7`, `v = v` and `a = x+1`.
///
/// MIN-MAX cases sit inside `_ <= y+z` so no second rule fires.
pub fn rule_table() -> Vec<RuleCase> {
    use Rel::*;
    let inf = Term::Inf;
    let ninf = Term::neg_inf;
    let k = || Term::k(7);
    let v = || Term::v("v");
    let a = || Term::Lin({
        let mut l = crate::Lin::var("x");
        l.c0 = 1;
        l
    });
    let yz = || Term::Lin({
        let mut l = crate::Lin::var("y");
        l.add_coeff("z", 1);
        l
    });
    let t = || Formula::True;
    let f = || Formula::False;
    let ii = "INF-INF";
    let ci = "CONST-INF";
    let vi = "VAR-INF";
    let mm = "MIN-MAX";
    vec![
        case(ii, inf.clone(), Eq, inf.clone(), t()),
        case(ii, inf.clone(), Ne, inf.clone(), f()),
        case(ii, inf.clone(), Le, inf.clone(), t()),
        case(ii, inf.clone(), Eq, ninf(), f()),
        case(ii, inf.clone(), Ne, ninf(), t()),
        case(ii, inf.clone(), Le, ninf(), f()),
        case(ii, ninf(), Eq, ninf(), t()),
        case(ii, ninf(), Ne, ninf(), f()),
        case(ii, ninf(), Le, ninf(), t()),
        case(ii, ninf(), Le, inf.clone(), t()),
        case(ci, k(), Eq, inf.clone(), f()),
        case(ci, k(), Ne, inf.clone(), t()),
        case(ci, k(), Le, inf.clone(), t()),
        case(ci, inf.clone(), Le, k(), f()),
        case(ci, k(), Eq, ninf(), f()),
        case(ci, k(), Ne, ninf(), t()),
        case(ci, k(), Le, ninf(), f()),
        case(ci, ninf(), Le, k(), t()),
        case(vi, v(), Le, inf.clone(), t()),
        case(vi, inf.clone(), Le, v(), Formula::cmp(v(), Eq, inf.clone())),
        case(vi, v(), Le, ninf(), Formula::cmp(v(), Eq, ninf())),
        case(vi, ninf(), Le, v(), t()),
        case(mm, Term::min(a(), inf.clone()), Le, yz(), Formula::cmp(a(), Le, yz())),
        case(mm, Term::max(a(), inf.clone()), Le, yz(), Formula::cmp(inf.clone(), Le, yz())),
        case(mm, Term::min(a(), ninf()), Le, yz(), Formula::cmp(ninf(), Le, yz())),
        case(mm, Term::max(a(), ninf()), Le, yz(), Formula::cmp(a(), Le, yz())),
    ]
}
