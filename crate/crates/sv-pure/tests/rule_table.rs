use sv_pure::rules::rule_table;
use sv_pure::{normalize_atom, Atom, Formula, Rel, Term};

#[test]
fn every_rule_rewrites_verbatim() {
    let table = rule_table();
    assert_eq!(table.len(), 26);
    for case in &table {
        assert_eq!(normalize_atom(&case.input), case.output, "{} {}", case.group, case.input);
    }
}

#[test]
fn rule_groups_have_expected_sizes() {
    let table = rule_table();
    let count = |g: &str| table.iter().filter(|c| c.group == g).count();
    assert_eq!(
        [count("INF-INF"), count("CONST-INF"), count("VAR-INF"), count("MIN-MAX")],
        [10, 8, 4, 4]
    );
}

#[test]
fn min_max_match_either_argument() {
    let a = Term::v("a");
    let y = Term::v("y");
    let got = normalize_atom(&Atom::Cmp(Term::min(Term::Inf, a.clone()), Rel::Le, y.clone()));
    assert_eq!(got, Formula::cmp(a.clone(), Rel::Le, y.clone()));
    let got = normalize_atom(&Atom::Cmp(Term::max(Term::neg_inf(), a.clone()), Rel::Le, y.clone()));
    assert_eq!(got, Formula::cmp(a, Rel::Le, y));
}

#[test]
fn compound_terms_are_not_variables() {
    let n1 = Term::Lin({
        let mut l = sv_pure::Lin::var("n");
        l.c0 = 1;
        l
    });
    let atom = Atom::Cmp(n1.clone(), Rel::Le, Term::Inf);
    assert_eq!(normalize_atom(&atom), Formula::Atom(atom));
    let two_v = Term::Lin(sv_pure::Lin::scaled(2, "v"));
    let atom = Atom::Cmp(Term::Inf, Rel::Le, two_v);
    assert_eq!(normalize_atom(&atom), Formula::Atom(atom));
}

#[test]
fn var_equal_inf_has_no_rule() {
    let atom = Atom::Cmp(Term::v("v"), Rel::Eq, Term::Inf);
    assert_eq!(normalize_atom(&atom), Formula::Atom(atom));
}
