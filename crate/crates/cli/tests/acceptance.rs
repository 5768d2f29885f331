//! Acceptance criteria, one line each. Runs with its own harness so the
//! verdicts print in order and the process fails if any criterion does.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fohh_core::executor::{execute, ExecStatus, ScriptedProvider};
use fohh_core::prover::{ProofFailure, Prover, SearchLimits};
use fohh_core::{parse_goal, parse_program, FlatProofTree, Offsets, Program, Term};
use fohh_oracle::agreement::{corpus, run_case};
use fohh_oracle::gen::{self, CorpusConfig};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn prover(program: &str) -> Prover {
    Prover::new(parse_program(program).unwrap())
}

fn cube() -> Result<String, String> {
    let p = prover("cube(X,Y) :- Y is X*X*X.");
    let g = parse_goal("forall X (exists Y (nat(X) => cube(X,Y)))").unwrap();
    let mut slowest = Duration::ZERO;
    let mut seen = Vec::new();
    for x in [5i64, 0, 2, 10] {
        let start = Instant::now();
        let tree = p.prove_tree(&g).map_err(|e| format!("x = {x}: {e}"))?.tree;
        let r = execute(&tree, &mut ScriptedProvider::from_text(&x.to_string())).unwrap();
        let took = start.elapsed();
        slowest = slowest.max(took);
        ensure(r.completed(), || format!("x = {x}: {:?}", r.status))?;
        let y = r.witness("Y").cloned();
        ensure(y == Some(Term::Int(x * x * x)), || format!("x = {x}: Y = {y:?}"))?;
        ensure(took < Duration::from_secs(1), || format!("x = {x} took {took:?}"))?;
        seen.push(format!("{x}->{}", x * x * x));
    }
    Ok(format!("{} (slowest {slowest:?})", seen.join(", ")))
}

fn agreement_and_soundness() -> Result<(usize, usize, usize, Duration), String> {
    let limits = SearchLimits::new(12, 3).unwrap();
    let start = Instant::now();
    let (mut solved, mut checked, mut n) = (0, 0, 0);
    for case in corpus(7, 500, &CorpusConfig::default()) {
        let out = run_case(&case.program, &case.goal, limits).map_err(|e| format!("seed {}: {e}", case.seed))?;
        solved += usize::from(out.solved);
        checked += out.answers_checked;
        n += 1;
    }
    Ok((n, solved, checked, start.elapsed()))
}

fn agreement() -> Result<String, String> {
    let (n, solved, _, took) = agreement_and_soundness()?;
    ensure(took < Duration::from_secs(60), || format!("took {took:?}"))?;
    Ok(format!("{n} pairs, {solved} solved, 0 disagreements in {took:?}"))
}

fn soundness() -> Result<String, String> {
    let (_, _, checked, _) = agreement_and_soundness()?;
    ensure(checked > 100, || format!("only {checked} answers checked"))?;
    Ok(format!("{checked} answers accepted by the checker"))
}

fn codec() -> Result<String, String> {
    let mut r = fohh_oracle::rng(4242);
    for k in 0..1000 {
        let s = gen::structured_proof(&mut r, 1 + k % 60);
        let t = FlatProofTree::flatten(&s);
        ensure(t.validate().is_ok(), || format!("proof {k}: {:?}", t.validate()))?;
        ensure(t.unflatten().as_ref() == Some(&s), || format!("proof {k} does not round-trip"))?;
    }
    let t = prover("a. b.").prove_tree(&parse_goal("a, b").unwrap()).unwrap().tree;
    let got: Vec<(String, Offsets)> = t.nodes().iter().map(|n| (n.sequent.to_string(), n.offsets)).collect();
    let want = [
        ("a ; P ⊢ a", Offsets::Leaf),
        ("P ⊢ a", Offsets::One(1)),
        ("b ; P ⊢ b", Offsets::Leaf),
        ("P ⊢ b", Offsets::One(1)),
        ("P ⊢ a, b", Offsets::Two(1, 3)),
    ];
    let want: Vec<(String, Offsets)> = want.iter().map(|(s, o)| (s.to_string(), *o)).collect();
    ensure(got == want, || format!("a ∧ b array {got:?}"))?;
    ensure(t.children(5) == Ok(vec![2, 4]), || format!("root children {:?}", t.children(5)))?;
    Ok("1000 round trips, a ∧ b array exact".into())
}

fn scoping() -> Result<String, String> {
    let empty = Prover::new(Program::empty());
    ensure(empty.prove_tree(&parse_goal("p => p").unwrap()).is_ok(), || "p => p has no proof".into())?;
    let bare = empty.prove_tree(&parse_goal("p").unwrap());
    ensure(matches!(bare, Err(ProofFailure::NoProof)), || format!("bare p: {:?}", bare.map(|t| t.tree.len())))?;
    let t = empty.prove_tree(&parse_goal("forall X (q(X) => q(X))").unwrap()).map_err(|e| e.to_string())?.tree;
    let r = execute(&t, &mut ScriptedProvider::from_text("a")).unwrap();
    ensure(r.completed() && r.reads.len() == 1, || format!("{:?} after {} reads", r.status, r.reads.len()))?;
    Ok("p => p proves, p fails, forall X (q(X) => q(X)) reads once".into())
}

fn replay() -> Result<String, String> {
    let cases = common::cases();
    ensure(cases.len() >= 20, || format!("{} cases", cases.len()))?;
    for case in &cases {
        let runs: Vec<Vec<u8>> = (0..3).map(|_| common::run(case)).collect();
        ensure(runs.windows(2).all(|w| w[0] == w[1]), || format!("{} differs between runs", case.name))?;
        let want = std::fs::read(&case.expected).map_err(|e| format!("{}: {e}", case.name))?;
        ensure(runs[0] == want, || format!("{} differs from its golden file", case.name))?;
    }
    Ok(format!("{} cases x 3 runs byte-identical", cases.len()))
}

fn eigenvariable() -> Result<String, String> {
    let p = prover("eq(Z,Z).");
    let bad = p.prove_tree(&parse_goal("exists Y (forall X (eq(X,Y)))").unwrap());
    ensure(matches!(bad, Err(ProofFailure::NoProof)), || "exists Y (forall X ...) was proved".into())?;
    let t = p.prove_tree(&parse_goal("forall X (exists Y (eq(X,Y)))").unwrap()).map_err(|e| e.to_string())?.tree;
    let r = execute(&t, &mut ScriptedProvider::from_text("c")).unwrap();
    ensure(r.status == ExecStatus::Completed && r.reads.len() == 1, || format!("{:?}", r.status))?;
    ensure(r.witness("Y") == Some(&Term::constant("c")), || format!("Y = {:?}", r.witness("Y")))?;
    Ok("exists-forall fails, forall-exists reads once and gives Y = c".into())
}

fn main() {
    let criteria: [(&str, Check); 7] = [
        ("cube end-to-end", cube),
        ("semantics agreement", agreement),
        ("soundness oracle", soundness),
        ("flat-tree codec", codec),
        ("hypothetical scoping", scoping),
        ("deterministic replay", replay),
        ("eigenvariable soundness", eigenvariable),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in criteria {
        let verdict = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match verdict {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
