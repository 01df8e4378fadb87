mod support;

use support::{fixture, strings};
use teamlab::atoms::Registry;
use teamlab::syntax::{parse_sentence, validate_u_sentence, Formula, ParseContext, USentence};
use teamlab::ucalc::{
    check_equivalence, parse_u_fixture, translate_disjunction, translate_u, Bound, Side,
};

fn u(s: &str) -> USentence {
    validate_u_sentence(&parse_sentence(s, &ParseContext::default()).unwrap()).unwrap()
}

fn certify(t: &Formula, chi: &Formula, w: &[String], nmax: usize) -> teamlab::ucalc::EquivalenceReport {
    let mut vars = w.to_vec();
    vars.push("u".into());
    let mut bound = Bound::teams(nmax, &vars, &[], None);
    bound.collect_all = true;
    check_equivalence(
        &Side::Team(t),
        &Side::Projected {
            sentence: chi,
            relation: "R",
            vars: w,
        },
        &bound,
        &Registry::new(),
    )
    .unwrap()
}

#[test]
fn fixtures_certify_with_the_library_checker() {
    for name in ["u_unary.txt", "u_binary.txt"] {
        for s in parse_u_fixture(&fixture(name)).unwrap() {
            let w: Vec<String> = (1..=s.arity()).map(|i| format!("w{i}")).collect();
            let t = translate_u(&s, &w).unwrap();
            let report = certify(&t, &s.to_formula(), &w, 3);
            assert!(report.holds(), "{s}: {:?}", report.mismatches.first());
        }
    }
}

// When η has no relation literal and its identity part is unsatisfiable in a
// structure, the translation still holds of the empty team there while the
// sentence is false of the empty relation.
#[test]
fn empty_team_gap_for_unsatisfiable_prefix() {
    let s = u("E x. E z. (x != z and A y. (!R(y) or (y = x or y = z)))");
    let w = strings(&["w"]);
    let t = translate_u(&s, &w).unwrap();
    let report = certify(&t, &s.to_formula(), &w, 3);
    assert_eq!(report.mismatches.len(), 1, "{:?}", report.mismatches);
    let m = &report.mismatches[0];
    assert_eq!(m.domain, 1);
    assert!(m.team.as_ref().unwrap().is_empty());
    assert!(m.left && !m.right);
}

#[test]
fn gap_closes_once_the_disjunction_admits_the_empty_relation() {
    let gap = u("E x. E z. (x != z and A y. (!R(y) or (y = x or y = z)))");
    let empty = u("E x. (x = x and A y. (!R(y) or y != y))");
    let w = strings(&["w"]);
    let t = translate_disjunction(&[gap.clone(), empty.clone()], &w).unwrap();
    let chi = Formula::or(gap.to_formula(), empty.to_formula());
    assert!(certify(&t, &chi, &w, 3).holds());
}
