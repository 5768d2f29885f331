use fohh_core::executor::{execute, ExecStatus, ReadRequest, Reply};
use fohh_core::prover::{Prover, Rule, SearchLimits};
use fohh_core::session::{serve, ServerEvent, Session, SessionConfig, SessionState};
use fohh_core::{FlatProofTree, GFormula, Program};
use fohh_oracle::agreement::corpus;
use fohh_oracle::gen::CorpusConfig;
use proptest::prelude::*;

// Answers integers where arithmetic needs them, otherwise cycles through
// constants.
fn answer_for(req: &ReadRequest, k: usize) -> String {
    if req.integer {
        (k % 4 + 1).to_string()
    } else {
        ["a", "b", "f(a)"][k % 3].to_string()
    }
}

fn provable_cases(seed: u64, n: usize) -> Vec<(Program, GFormula, FlatProofTree)> {
    let limits = SearchLimits::new(12, 1).unwrap();
    let cfg = CorpusConfig { builtin_rate: 0.25, ..CorpusConfig::default() };
    corpus(seed, n, &cfg)
        .into_iter()
        .filter_map(|c| {
            let t = Prover::new(c.program.clone()).with_limits(limits).prove_tree(&c.goal).ok()?;
            Some((c.program, c.goal, t.tree))
        })
        .collect()
}

#[test]
fn execution_invariants_on_corpus() {
    let cases = provable_cases(11, 600);
    assert!(cases.len() > 100, "{}", cases.len());
    let mut with_reads = 0;
    for (_, goal, tree) in &cases {
        let run = || {
            let mut k = 0;
            execute(tree, &mut |req: &ReadRequest| {
                k += 1;
                Reply::Text(answer_for(req, k))
            })
            .unwrap()
        };
        let r = run();
        assert_eq!(r, run(), "determinism for {goal}");
        let read_nodes: Vec<usize> = r.reads.iter().map(|e| e.node).collect();
        let forall_visits: Vec<usize> =
            r.visited.iter().copied().filter(|&i| matches!(tree.node(i).unwrap().rule, Rule::Forall { .. })).collect();
        assert_eq!(read_nodes, forall_visits, "prompt order is visit order");
        if r.status == ExecStatus::Completed {
            let foralls = tree.count(|n| matches!(n.rule, Rule::Forall { .. }));
            assert_eq!(r.reads.len(), foralls, "{goal}");
            assert_eq!(r.visited.len(), tree.len());
            for (name, w) in &r.witnesses {
                assert!(!w.has_params(), "{goal}: witness {name} = {w} still mentions a parameter");
            }
        }
        with_reads += usize::from(!r.reads.is_empty());
    }
    assert!(with_reads > 20, "{with_reads}");
}

#[test]
fn session_matches_direct_execution() {
    for (program, goal, tree) in provable_cases(12, 300) {
        let mut direct_answers = Vec::new();
        let mut k = 0;
        let direct = execute(&tree, &mut |req: &ReadRequest| {
            k += 1;
            let a = answer_for(req, k);
            direct_answers.push((req.integer, a.clone()));
            Reply::Text(a)
        })
        .unwrap();

        let mut s = Session::default();
        let load = serde_json::json!({"op": "load", "program": program.to_string()}).to_string();
        assert!(matches!(s.handle_line(&load)[0], ServerEvent::Loaded { .. }));
        let query = serde_json::json!({"op": "query", "goal": goal.to_string()}).to_string();
        let mut events = s.handle_line(&query);
        let mut replies = direct_answers.iter();
        let mut witnesses = Vec::new();
        loop {
            let mut next = None;
            for ev in events.drain(..) {
                match ev {
                    ServerEvent::ReadRequest { .. } => {
                        assert!(matches!(s.state(), SessionState::AwaitingRead { .. }));
                        let (_, a) = replies.next().expect("same number of reads");
                        next = Some(serde_json::json!({"op": "read_reply", "value": a}).to_string());
                    }
                    ServerEvent::Witness { name, value } => witnesses.push((name, value)),
                    _ => {}
                }
            }
            match next {
                Some(line) => events = s.handle_line(&line),
                None => break,
            }
        }
        assert!(replies.next().is_none());
        assert_eq!(s.result(), Some(&direct), "{goal}");
        if direct.completed() {
            let expected: Vec<_> = direct.witnesses.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect();
            assert_eq!(witnesses, expected);
        }
    }
}

fn arb_message() -> impl Strategy<Value = String> {
    prop_oneof![
        Just(r#"{"op":"load","program":"cube(X,Y) :- Y is X*X*X. q(a)."}"#.to_string()),
        Just(r#"{"op":"load","program":"p(."}"#.to_string()),
        Just(r#"{"op":"query","goal":"forall X (exists Y (nat(X) => cube(X,Y)))"}"#.to_string()),
        Just(r#"{"op":"query","goal":"forall X (forall Y (X = Y => q(a)))"}"#.to_string()),
        Just(r#"{"op":"query","goal":"p"}"#.to_string()),
        Just(r#"{"op":"read_reply","value":"3"}"#.to_string()),
        Just(r#"{"op":"read_reply","value":"zz"}"#.to_string()),
        Just(r#"{"op":"tree"}"#.to_string()),
        Just(r#"{"op":"abort"}"#.to_string()),
        "[ -~]{0,30}",
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn read_requests_only_come_with_awaiting_read(msgs in prop::collection::vec(arb_message(), 1..20)) {
        let mut s = Session::default();
        for m in msgs {
            let events = s.handle_line(&m);
            let asked = events.iter().any(|e| matches!(e, ServerEvent::ReadRequest { .. }));
            prop_assert!(!asked || matches!(s.state(), SessionState::AwaitingRead { .. }), "after {}", m);
            prop_assert!(!events.is_empty());
        }
    }

    #[test]
    fn random_bytes_never_crash_the_service(bytes in prop::collection::vec(any::<u8>(), 0..400)) {
        let mut out = Vec::new();
        serve(SessionConfig::default(), bytes.as_slice(), &mut out).unwrap();
        for line in std::str::from_utf8(&out).unwrap().lines() {
            let ev: ServerEvent = serde_json::from_str(line).unwrap();
            prop_assert!(matches!(ev, ServerEvent::Error { .. }), "{}", line);
        }
    }
}
