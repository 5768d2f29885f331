use fohh_core::builtins::{eval_arith, ArithError};
use fohh_core::formula::{classify, Class};
use fohh_core::parser::{parse_goal, parse_program};
use fohh_core::proof_tree::FlatProofTree;
use fohh_core::prover::{Prover, SearchLimits};
use fohh_core::unify::{unify, UnifyOptions};
use fohh_core::{Substitute, Substitution, Term};
use fohh_oracle::arith::{eval_big, fits_i64_everywhere, BigEval};
use fohh_oracle::gen::{self, CorpusConfig};
use fohh_oracle::{grammar, mgu, rng};
use proptest::prelude::*;

#[test]
fn classify_matches_the_grammar_on_ten_thousand_formulas() {
    let mut r = rng(1);
    let mut seen = [0usize; 4];
    for _ in 0..10_000 {
        let f = gen::formula(&mut r, 4);
        let expected = match (grammar::is_goal(&f), grammar::is_clause(&f)) {
            (true, true) => Class::Both,
            (true, false) => Class::GOnly,
            (false, true) => Class::DOnly,
            (false, false) => Class::Neither,
        };
        let got = classify(&f);
        assert_eq!(got, expected, "{f:?}");
        assert_eq!(f.to_goal().is_some(), got.is_goal());
        assert_eq!(f.to_clause().is_some(), got.is_clause());
        seen[got as usize] += 1;
    }
    assert!(seen.iter().all(|&n| n > 100), "every class exercised: {seen:?}");
}

#[test]
fn arithmetic_matches_bigint_reference() {
    let mut r = rng(2);
    let mut overflowed = 0;
    for _ in 0..10_000 {
        let e = gen::arith_expr(&mut r, 4);
        let exact = eval_big(&e);
        assert!(matches!(exact, BigEval::Value(_)));
        match eval_arith(&e, &Substitution::new()) {
            Ok(n) => {
                assert!(fits_i64_everywhere(&e), "{e} evaluated despite overflow");
                assert_eq!(eval_big(&Term::Int(n)), exact, "{e}");
            }
            Err(ArithError::Overflow) => {
                assert!(!fits_i64_everywhere(&e), "{e} reported overflow");
                overflowed += 1;
            }
            Err(other) => panic!("{e}: {other:?}"),
        }
    }
    assert!(overflowed > 100 && overflowed < 9_000, "{overflowed}");
}

#[test]
fn parser_round_trips_two_hundred_goals_and_programs() {
    let cfg = CorpusConfig::default();
    let mut r = rng(3);
    for _ in 0..200 {
        let g = gen::query(&mut r, &cfg);
        let text = g.to_string();
        let back = parse_goal(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(back, g, "{text}");

        let p = gen::program(&mut r, &cfg);
        let text = p.to_string();
        let back = parse_program(&text).unwrap_or_else(|e| panic!("{text}: {e}"));
        assert_eq!(back, p, "{text}");
    }
}

#[test]
fn flatten_round_trips_a_thousand_proofs() {
    let mut r = rng(4);
    for k in 0..1000 {
        let budget = 1 + k % 60;
        let s = gen::structured_proof(&mut r, budget);
        let t = FlatProofTree::flatten(&s);
        assert_eq!(t.len(), s.size());
        assert_eq!(t.validate(), Ok(()));
        assert_eq!(t.unflatten().as_ref(), Some(&s));
        // Size additivity at every node.
        for i in 1..=t.len() {
            let kids = t.children(i).unwrap();
            let sizes: usize = kids.iter().map(|&c| t.subtree_size(c).unwrap()).sum();
            assert_eq!(t.subtree_size(i).unwrap(), 1 + sizes);
        }
        let root_kids: Vec<_> =
            t.children(t.len()).unwrap().iter().map(|&c| t.node(c).unwrap().sequent.clone()).collect();
        let structural: Vec<_> = s.children.iter().map(|c| c.node.clone()).collect();
        assert_eq!(root_kids, structural);
    }
}

fn arb_pair() -> impl Strategy<Value = (Term, Term)> {
    any::<u64>().prop_map(|seed| {
        let mut r = rng(seed);
        (gen::unif_term(&mut r, 3, 3), gen::unif_term(&mut r, 3, 3))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn unify_returns_an_idempotent_mgu((s, t) in arb_pair()) {
        let universe = gen::small_universe();
        match unify(&s, &t, &Substitution::new()) {
            Ok(theta) => {
                prop_assert!(theta.is_idempotent());
                prop_assert_eq!(theta.apply_term(&s), theta.apply_term(&t));
                prop_assert!(mgu::check_mgu(&s, &t, &theta, &universe).is_ok(), "{:?}", mgu::check_mgu(&s, &t, &theta, &universe));
            }
            Err(_) => prop_assert!(!mgu::unifiable_in(&s, &t, &universe)),
        }
    }

    #[test]
    fn unify_is_symmetric_in_success((s, t) in arb_pair()) {
        let a = unify(&s, &t, &Substitution::new());
        let b = unify(&t, &s, &Substitution::new());
        prop_assert_eq!(a.is_ok(), b.is_ok());
        if let (Ok(a), Ok(b)) = (a, b) {
            prop_assert_eq!(fohh_oracle::canon::canonical(&a.apply_term(&s)), fohh_oracle::canon::canonical(&b.apply_term(&s)));
        }
    }

    #[test]
    fn without_occurs_check_only_cyclic_pairs_change((s, t) in arb_pair()) {
        let on = unify(&s, &t, &Substitution::new());
        let off = fohh_core::unify::unify_with(&s, &t, &Substitution::new(), UnifyOptions { occurs_check: false });
        if on.is_ok() {
            prop_assert_eq!(on, off);
        }
    }

    #[test]
    fn apply_is_idempotent((s, t) in arb_pair(), (u, _) in arb_pair()) {
        if let Ok(theta) = unify(&s, &t, &Substitution::new()) {
            let once = theta.apply_term(&u);
            prop_assert_eq!(theta.apply_term(&once), once);
        }
    }

    #[test]
    fn compose_agrees_with_sequential_application((s, t) in arb_pair(), (s2, t2) in arb_pair(), (u, _) in arb_pair()) {
        if let (Ok(a), Ok(b)) = (unify(&s, &t, &Substitution::new()), unify(&s2, &t2, &Substitution::new())) {
            let c = a.compose(&b);
            prop_assert_eq!(c.apply_term(&u), b.apply_term(&a.apply_term(&u)));
        }
    }

    #[test]
    fn goal_substitution_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = gen::query(&mut r, &CorpusConfig::default());
        let (s, t) = (gen::unif_term(&mut r, 3, 2), gen::unif_term(&mut r, 3, 2));
        if let Ok(theta) = unify(&s, &t, &Substitution::new()) {
            let once = g.apply(&theta);
            prop_assert_eq!(once.apply(&theta), once);
        }
    }

    #[test]
    fn prover_runs_are_deterministic(seed in any::<u64>()) {
        let mut r = rng(seed);
        let cfg = CorpusConfig::default();
        let p = gen::program(&mut r, &cfg);
        let g = gen::query(&mut r, &cfg);
        let prover = Prover::new(p).with_limits(SearchLimits::new(12, 3).unwrap());
        let a: Vec<_> = prover.solve(&g).collect();
        let b: Vec<_> = prover.solve(&g).collect();
        prop_assert_eq!(a, b);
        let (t1, t2) = (prover.prove_tree(&g), prover.prove_tree(&g));
        prop_assert_eq!(t1.is_ok(), t2.is_ok());
        if let (Ok(t1), Ok(t2)) = (t1, t2) {
            prop_assert_eq!(t1.tree.serialize(), t2.tree.serialize());
            prop_assert!(t1.proof.arity_ok());
            prop_assert!(t1.proof.height() <= 12);
        }
    }

    #[test]
    fn parser_never_panics_on_token_soup(tokens in prop::collection::vec(prop::sample::select(vec![
        "p", "q(", ")", "(", ",", ".", ":-", "=>", "forall", "exists", "X", "Y", "_", "1", "-", "+", "*",
        "is", "=", "<", "=<", "%c\n", "a", "f(", "1.5", "\"", "#", " ",
    ]), 0..24)) {
        let text = tokens.concat();
        let _ = parse_program(&text);
        let _ = parse_goal(&text);
        let _ = fohh_core::parse_term(&text);
        let _ = fohh_core::parse_formula(&text);
    }

    #[test]
    fn parser_never_panics_on_arbitrary_text(text in "\\PC{0,40}") {
        let _ = parse_program(&text);
        let _ = parse_goal(&text);
    }
}
