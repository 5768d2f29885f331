//! Runs both search engines on one program/goal pair and cross-checks them.

use fohh_core::prover::{Prover, SearchLimits};
use fohh_core::{GFormula, Program, Term};

use crate::canon::variant;
use crate::checker::check_answer;
use crate::gen::{self, CorpusConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CaseOutcome {
    pub solved: bool,
    pub proved: bool,
    /// Answers produced by `solve` and checked against proofs.
    pub answers_checked: usize,
    pub depth_exceeded: bool,
}

#[derive(Clone, Debug)]
pub struct Case {
    pub seed: u64,
    pub program: Program,
    pub goal: GFormula,
}

/// `n` program/goal pairs drawn from consecutive seeds.
pub fn corpus(base_seed: u64, n: usize, cfg: &CorpusConfig) -> Vec<Case> {
    (0..n as u64)
        .map(|k| {
            let seed = base_seed.wrapping_add(k);
            let mut rng = crate::rng(seed);
            let program = gen::program(&mut rng, cfg);
            let goal = gen::query(&mut rng, cfg);
            Case { seed, program, goal }
        })
        .collect()
}

fn answer_term(s: &fohh_core::Substitution) -> Term {
    let mut pairs: Vec<_> = s.vars().collect();
    pairs.sort_by(|a, b| a.0.name.cmp(&b.0.name));
    Term::compound("answer", pairs.into_iter().map(|(v, t)| Term::compound(&v.name, vec![t.clone()])).collect())
}

/// Agreement: `solve` succeeds iff `prove_tree` does, with the same first
/// answer up to renaming. Soundness: every `solve` answer is the answer of
/// a proof the independent checker accepts.
pub fn run_case(program: &Program, goal: &GFormula, limits: SearchLimits) -> Result<CaseOutcome, String> {
    let prover = Prover::new(program.clone()).with_limits(limits);
    let mut solutions = prover.solve(goal);
    let answers: Vec<_> = solutions.by_ref().collect();
    let depth_exceeded = solutions.depth_exceeded();
    let (proofs, _) = prover.prove_trees(goal);
    let first_tree = prover.prove_tree(goal);

    let solved = !answers.is_empty();
    let proved = first_tree.is_ok();
    if solved != proved {
        return Err(format!("solve succeeded: {solved}, prove_tree succeeded: {proved}"));
    }
    if answers.len() != proofs.len() {
        return Err(format!("solve gave {} answers, prove_trees gave {} proofs", answers.len(), proofs.len()));
    }
    if let (Some(a), Ok(t)) = (answers.first(), &first_tree) {
        if !variant(&answer_term(a), &answer_term(&t.answer)) {
            return Err(format!("first answers differ: solve {a}, prove_tree {}", t.answer));
        }
    }
    for (k, (a, p)) in answers.iter().zip(&proofs).enumerate() {
        check_answer(goal, a, &p.proof).map_err(|e| format!("answer {k} ({a}) rejected: {e}"))?;
    }
    Ok(CaseOutcome { solved, proved, answers_checked: answers.len(), depth_exceeded })
}
