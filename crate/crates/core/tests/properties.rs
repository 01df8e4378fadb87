mod support;

use proptest::prelude::*;

use teamlab::model::{Assignment, Relation, Structure};
use teamlab::syntax::{
    parse_formula, validate_u_sentence, DepAtom, Formula, Literal, ParseContext, Term,
};
use teamlab::tarski::eval_tarski;

const VARS: [&str; 3] = ["x", "y", "z"];

fn term() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => prop::sample::select(&VARS[..]).prop_map(Term::var),
        1 => prop::sample::select(&["a", "b"][..]).prop_map(Term::constant),
    ]
}

fn var() -> impl Strategy<Value = String> {
    prop::sample::select(&VARS[..]).prop_map(String::from)
}

fn literal() -> impl Strategy<Value = Literal> {
    prop_oneof![
        (any::<bool>(), term()).prop_map(|(p, t)| Literal::rel(p, "R", vec![t])),
        (any::<bool>(), term(), term()).prop_map(|(p, s, t)| Literal::rel(p, "S", vec![s, t])),
        (any::<bool>(), term(), term()).prop_map(|(p, s, t)| Literal::eq(p, s, t)),
    ]
}

fn atom() -> impl Strategy<Value = Formula> {
    let group = || prop::collection::vec(var(), 1..3);
    prop_oneof![
        (var(), var()).prop_map(|(a, b)| Formula::atom("dep", vec![vec![a], vec![b]])),
        (group(), group())
            .prop_filter("equal groups", |(a, b)| a.len() == b.len())
            .prop_map(|(a, b)| Formula::atom("inc", vec![a, b])),
        group().prop_map(|g| Formula::atom("const", vec![g])),
        var().prop_map(|v| Formula::atom("ne", vec![vec![v]])),
        (group(), group()).prop_map(|(a, b)| Formula::Atom(DepAtom::new("indep", vec![a, b]))),
    ]
}

fn formula(team: bool) -> impl Strategy<Value = Formula> {
    let leaf = if team {
        prop_oneof![3 => literal().prop_map(Formula::Lit), 1 => atom()].boxed()
    } else {
        literal().prop_map(Formula::Lit).boxed()
    };
    leaf.prop_recursive(4, 32, 2, move |inner| {
        let mut arms = vec![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)).boxed(),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)).boxed(),
            (var(), inner.clone()).prop_map(|(v, b)| Formula::exists(&v, b)).boxed(),
            (var(), inner.clone()).prop_map(|(v, b)| Formula::forall(&v, b)).boxed(),
        ];
        if team {
            arms.push((inner.clone(), inner).prop_map(|(a, b)| Formula::gor(a, b)).boxed());
        }
        prop::strategy::Union::new(arms)
    })
}

fn ctx() -> ParseContext {
    ParseContext {
        constants: ["a", "b"].iter().map(|s| s.to_string()).collect(),
        ..ParseContext::default()
    }
}

fn structure() -> impl Strategy<Value = Structure> {
    (1usize..=3).prop_flat_map(|n| {
        (Just(n), any::<u64>(), any::<u64>(), 0..n, 0..n).prop_map(|(n, r, s, a, b)| {
            let mut m = Structure::new(n).unwrap();
            let r = Relation::from_mask(n, 1, r & ((1 << n) - 1)).unwrap();
            let s = Relation::from_mask(n, 2, s & ((1 << (n * n)) - 1)).unwrap();
            m.add_relation("R", r).unwrap();
            m.add_relation("S", s).unwrap();
            m.set_constant("a", a).unwrap();
            m.set_constant("b", b).unwrap();
            m
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn printing_round_trips(f in formula(true)) {
        let text = f.to_string();
        let back = parse_formula(&text, &ctx());
        prop_assert_eq!(back.as_ref().ok(), Some(&f), "{}", text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4_000))]

    #[test]
    fn tarski_matches_textbook_evaluator(
        f in formula(false),
        m in structure(),
        vals in prop::collection::vec(0usize..3, 3),
    ) {
        let s: Assignment = VARS
            .iter()
            .zip(&vals)
            .map(|(v, &e)| (v.to_string(), e % m.size()))
            .collect();
        let mut env: Vec<(String, usize)> = s.iter().map(|(k, &v)| (k.clone(), v)).collect();
        let want = support::holds(&m, &mut env, &f);
        prop_assert_eq!(eval_tarski(&m, &s, &f).unwrap(), want, "{}", f);
    }

    #[test]
    fn built_u_sentences_validate(
        exists in prop::collection::btree_set(prop::sample::select(&["x1", "x2", "x3"][..]), 0..3),
        eta in prop::collection::vec((any::<bool>(), 0usize..3, 0usize..3, any::<bool>()), 0..4),
        theta in prop::collection::vec((any::<bool>(), 0usize..4, 0usize..4), 1..4),
    ) {
        let exists: Vec<String> = exists.into_iter().map(String::from).collect();
        let pool: Vec<Term> = exists.iter().map(|v| Term::var(v)).chain([Term::constant("c")]).collect();
        let pick = |i: usize| pool[i % pool.len()].clone();
        let eta: Vec<Literal> = eta
            .into_iter()
            .map(|(rel, i, j, p)| if rel {
                Literal::rel(true, "R", vec![pick(i)])
            } else {
                Literal::eq(p, pick(i), pick(j))
            })
            .collect();
        let mut tpool = pool.clone();
        tpool.push(Term::var("y"));
        let tpick = |i: usize| tpool[i % tpool.len()].clone();
        let theta = Formula::disjunction(
            theta.into_iter().map(|(p, i, j)| Formula::Lit(Literal::eq(p, tpick(i), tpick(j)))),
        ).unwrap();
        let block = Formula::forall("y", Formula::or(
            Formula::Lit(Literal::rel(false, "R", vec![Term::var("y")])),
            theta.clone(),
        ));
        let build = |eta: &[Literal], block: Formula| {
            let body = match Formula::conjunction(eta.iter().cloned().map(Formula::Lit)) {
                Some(e) => Formula::and(e, block),
                None => block,
            };
            Formula::exists_all(&exists, body)
        };
        let f = build(&eta, block.clone());
        let v = validate_u_sentence(&f);
        prop_assert!(v.is_ok(), "{}: {:?}", f, v);
        let v = v.unwrap();
        prop_assert_eq!(&v.to_formula(), &f);
        prop_assert_eq!(&v.eta, &eta);
        prop_assert_eq!(&v.exists, &exists);

        // R inside θ, or negated in η, is outside the shape.
        let bad_theta = Formula::exists_all(&exists, Formula::forall("y", Formula::or(
            Formula::Lit(Literal::rel(false, "R", vec![Term::var("y")])),
            Formula::or(theta, Formula::Lit(Literal::rel(true, "R", vec![Term::constant("c")]))),
        )));
        prop_assert!(validate_u_sentence(&bad_theta).is_err());
        let mut negated = eta.clone();
        negated.push(Literal::rel(false, "R", vec![Term::constant("c")]));
        prop_assert!(validate_u_sentence(&build(&negated, block)).is_err());
        let open = Formula::and(
            Formula::Lit(Literal::eq(true, Term::var("q"), Term::var("q"))),
            Formula::forall("y", Formula::or(
                Formula::Lit(Literal::rel(false, "R", vec![Term::var("y")])),
                Formula::Lit(Literal::eq(true, Term::var("y"), Term::var("q"))),
            )),
        );
        prop_assert!(validate_u_sentence(&open).is_err());
    }
}
