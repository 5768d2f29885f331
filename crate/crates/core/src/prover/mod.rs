//! Uniform proof search.
//!
//! Two engines share one search discipline (depth first, clause order,
//! leftmost conjunct first, same depth accounting):
//!
//! * [`solve`] is a lazy goal-stack machine yielding answer substitutions;
//! * [`prove_tree`] / [`Prover::prove_trees`] search recursively and record a
//!   [`StructuredProof`] for each success.
//!
//! Depth is the height of the proof tree: the root sequent sits at depth 1
//! and no node deeper than `max_depth` is ever created.

mod engine;
mod solve;
mod tree;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::builtins::Residual;
use crate::formula::{DFormula, GFormula, Program};
use crate::proof_tree::FlatProofTree;
use crate::subst::{Substitute, Substitution};
use crate::term::{Name, Param, Term};
use crate::unify::UnifyOptions;

pub use solve::Solutions;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchLimits {
    pub max_depth: u32,
    pub max_solutions: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("search limits must be at least 1")]
pub struct InvalidLimits;

impl SearchLimits {
    pub fn new(max_depth: u32, max_solutions: usize) -> Result<Self, InvalidLimits> {
        if max_depth == 0 || max_solutions == 0 {
            return Err(InvalidLimits);
        }
        Ok(SearchLimits { max_depth, max_solutions })
    }
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits { max_depth: 64, max_solutions: 1 }
    }
}

#[derive(Clone, Debug)]
enum HypList {
    Nil,
    Cons(Arc<(DFormula, HypList)>),
}

/// The clauses available to a sequent: the loaded program plus the
/// hypotheses introduced by `D => G` goals on the way down.
#[derive(Clone, Debug)]
pub struct Context {
    program: Arc<Program>,
    hyps: HypList,
    len: usize,
}

impl Context {
    pub fn new(program: Arc<Program>) -> Context {
        Context { program, hyps: HypList::Nil, len: 0 }
    }

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn with_hypothesis(&self, d: DFormula) -> Context {
        Context {
            program: self.program.clone(),
            hyps: HypList::Cons(Arc::new((d, self.hyps.clone()))),
            len: self.len + 1,
        }
    }

    /// Hypotheses, most recent first.
    pub fn hypotheses_newest_first(&self) -> impl Iterator<Item = &DFormula> {
        let mut cur = &self.hyps;
        std::iter::from_fn(move || match cur {
            HypList::Nil => None,
            HypList::Cons(cell) => {
                cur = &cell.1;
                Some(&cell.0)
            }
        })
    }

    /// Hypotheses in order of introduction.
    pub fn hypotheses(&self) -> Vec<&DFormula> {
        let mut v: Vec<_> = self.hypotheses_newest_first().collect();
        v.reverse();
        v
    }

    pub fn hypothesis_count(&self) -> usize {
        self.len
    }

    /// Clause-selection order: hypotheses newest first, then the program in
    /// file order.
    pub fn candidates(&self) -> impl Iterator<Item = &DFormula> {
        self.hypotheses_newest_first().chain(self.program.clauses().iter())
    }

    pub fn contains(&self, d: &DFormula) -> bool {
        self.candidates().any(|c| c == d)
    }

    pub fn map_hypotheses(&self, mut f: impl FnMut(&DFormula) -> DFormula) -> Context {
        let mut out = Context::new(self.program.clone());
        for h in self.hypotheses() {
            out = out.with_hypothesis(f(h));
        }
        out
    }

    pub fn collect_params(&self, out: &mut BTreeSet<Param>) {
        for h in self.hypotheses_newest_first() {
            h.collect_params(out);
        }
    }
}

impl PartialEq for Context {
    fn eq(&self, other: &Context) -> bool {
        (Arc::ptr_eq(&self.program, &other.program) || self.program == other.program)
            && self.len == other.len
            && self.hypotheses_newest_first().eq(other.hypotheses_newest_first())
    }
}

impl Eq for Context {}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("P")?;
        for h in self.hypotheses() {
            match h {
                DFormula::Fact(_) => write!(f, ", {h}")?,
                _ => write!(f, ", ({h})")?,
            }
        }
        Ok(())
    }
}

/// `𝒫 ⊢ G`, or `D;𝒫 ⊢ A` while backchaining on the distinguished clause `D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sequent {
    pub context: Context,
    pub focus: Option<DFormula>,
    pub goal: GFormula,
}

impl Sequent {
    pub fn apply(&self, s: &Substitution) -> Sequent {
        Sequent {
            context: self.context.map_hypotheses(|h| h.apply(s)),
            focus: self.focus.as_ref().map(|d| d.apply(s)),
            goal: self.goal.apply(s),
        }
    }

    pub fn replace_term(&self, from: &Term, to: &Term) -> Sequent {
        Sequent {
            context: self.context.map_hypotheses(|h| h.replace_term(from, to)),
            focus: self.focus.as_ref().map(|d| d.replace_term(from, to)),
            goal: self.goal.replace_term(from, to),
        }
    }

    pub fn params(&self) -> BTreeSet<Param> {
        let mut out = BTreeSet::new();
        self.context.collect_params(&mut out);
        if let Some(d) = &self.focus {
            d.collect_params(&mut out);
        }
        self.goal.collect_params(&mut out);
        out
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.focus {
            Some(d @ DFormula::Fact(_)) => write!(f, "{d} ; ")?,
            Some(d) => write!(f, "({d}) ; ")?,
            None => {}
        }
        write!(f, "{} ⊢ {}", self.context, self.goal)
    }
}

/// The inference rule applied at a proof node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `A;𝒫 ⊢ A`.
    Axiom,
    /// `(G ⊃ A);𝒫 ⊢ A` from `𝒫 ⊢ G`.
    Backchain,
    /// `∀x D;𝒫 ⊢ A` from `[t/x]D;𝒫 ⊢ A`.
    Instance {
        var: Name,
        term: Term,
    },
    /// `𝒫 ⊢ A` from `D;𝒫 ⊢ A` for some `D` in `𝒫`.
    Select,
    And,
    /// `𝒫 ⊢ D ⊃ G` from `{D} ∪ 𝒫 ⊢ G`.
    Augment,
    Exists {
        var: Name,
        witness: Term,
    },
    Forall {
        var: Name,
        param: Param,
    },
    /// A builtin atom, discharged as a residual constraint.
    Builtin,
}

impl Rule {
    /// Rule number in the tree-building rule list (1 to 8); builtin leaves
    /// have none.
    pub fn number(&self) -> Option<u8> {
        Some(match self {
            Rule::Axiom => 1,
            Rule::Backchain => 2,
            Rule::Instance { .. } => 3,
            Rule::Select => 4,
            Rule::And => 5,
            Rule::Augment => 6,
            Rule::Exists { .. } => 7,
            Rule::Forall { .. } => 8,
            Rule::Builtin => return None,
        })
    }

    pub fn tag(&self) -> String {
        self.number().map_or_else(|| "B".to_string(), |n| n.to_string())
    }

    pub fn arity(&self) -> usize {
        match self {
            Rule::Axiom | Rule::Builtin => 0,
            Rule::And => 2,
            _ => 1,
        }
    }

    pub fn apply(&self, s: &Substitution) -> Rule {
        match self {
            Rule::Instance { var, term } => Rule::Instance { var: var.clone(), term: term.apply(s) },
            Rule::Exists { var, witness } => Rule::Exists { var: var.clone(), witness: witness.apply(s) },
            other => other.clone(),
        }
    }

    pub fn replace_term(&self, from: &Term, to: &Term) -> Rule {
        match self {
            Rule::Instance { var, term } => Rule::Instance { var: var.clone(), term: term.replace(from, to) },
            Rule::Exists { var, witness } => Rule::Exists { var: var.clone(), witness: witness.replace(from, to) },
            other => other.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuredProof {
    pub node: Sequent,
    pub rule: Rule,
    pub children: Vec<StructuredProof>,
    pub residual: Option<Residual>,
}

impl StructuredProof {
    pub fn size(&self) -> usize {
        1 + self.children.iter().map(StructuredProof::size).sum::<usize>()
    }

    pub fn height(&self) -> usize {
        1 + self.children.iter().map(StructuredProof::height).max().unwrap_or(0)
    }

    /// Children count matches the rule, and only builtin leaves carry a
    /// residual.
    pub fn arity_ok(&self) -> bool {
        self.children.len() == self.rule.arity()
            && self.residual.is_some() == (self.rule == Rule::Builtin)
            && self.children.iter().all(StructuredProof::arity_ok)
    }

    pub fn apply(&self, s: &Substitution) -> StructuredProof {
        StructuredProof {
            node: self.node.apply(s),
            rule: self.rule.apply(s),
            children: self.children.iter().map(|c| c.apply(s)).collect(),
            residual: self.residual.as_ref().map(|r| r.apply(s)),
        }
    }

    pub fn count(&self, pred: &impl Fn(&StructuredProof) -> bool) -> usize {
        usize::from(pred(self)) + self.children.iter().map(|c| c.count(pred)).sum::<usize>()
    }
}

/// The first proof found, flattened and grounded.
#[derive(Clone, Debug)]
pub struct TreeProof {
    pub tree: FlatProofTree,
    pub proof: StructuredProof,
    /// Bindings of the goal's existential variables.
    pub answer: Substitution,
    /// The full final substitution of the search.
    pub theta: Substitution,
    /// Builtin constraints the search could not evaluate.
    pub pending: Vec<Residual>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
pub enum ProofFailure {
    #[error("no proof")]
    NoProof,
    #[error("no proof within depth limit")]
    DepthExceeded,
}

/// A configured prover over one program.
#[derive(Clone, Debug)]
pub struct Prover {
    program: Arc<Program>,
    limits: SearchLimits,
    unify: UnifyOptions,
}

impl Prover {
    pub fn new(program: impl Into<Arc<Program>>) -> Prover {
        Prover { program: program.into(), limits: SearchLimits::default(), unify: UnifyOptions::default() }
    }

    pub fn with_limits(mut self, limits: SearchLimits) -> Prover {
        self.limits = limits;
        self
    }

    pub fn with_occurs_check(mut self, on: bool) -> Prover {
        self.unify.occurs_check = on;
        self
    }

    pub fn program(&self) -> &Arc<Program> {
        &self.program
    }

    pub fn limits(&self) -> SearchLimits {
        self.limits
    }

    pub fn solve(&self, goal: &GFormula) -> Solutions {
        Solutions::new(self.engine(), goal)
    }

    /// Up to `max_solutions` grounded proofs with their answers, in search
    /// order. The flag reports whether any branch hit the depth limit.
    pub fn prove_trees(&self, goal: &GFormula) -> (Vec<ProofAnswer>, bool) {
        tree::prove_all(self.engine(), goal)
    }

    pub fn prove_tree(&self, goal: &GFormula) -> Result<TreeProof, ProofFailure> {
        let first = Prover { limits: SearchLimits { max_solutions: 1, ..self.limits }, ..self.clone() };
        let (mut found, exceeded) = first.prove_trees(goal);
        if found.is_empty() {
            return Err(if exceeded { ProofFailure::DepthExceeded } else { ProofFailure::NoProof });
        }
        let ProofAnswer { proof, answer, theta, pending } = found.remove(0);
        let tree = FlatProofTree::flatten(&proof);
        Ok(TreeProof { tree, proof, answer, theta, pending })
    }

    fn engine(&self) -> engine::Engine {
        engine::Engine::new(self.program.clone(), self.limits, self.unify)
    }
}

/// One success of the tree-building search, already grounded.
#[derive(Clone, Debug)]
pub struct ProofAnswer {
    pub proof: StructuredProof,
    pub answer: Substitution,
    pub theta: Substitution,
    pub pending: Vec<Residual>,
}

pub fn solve(program: &Program, goal: &GFormula, limits: SearchLimits) -> Solutions {
    Prover::new(program.clone()).with_limits(limits).solve(goal)
}

pub fn prove_tree(program: &Program, goal: &GFormula, limits: SearchLimits) -> Result<TreeProof, ProofFailure> {
    Prover::new(program.clone()).with_limits(limits).prove_tree(goal)
}

pub use engine::backchain;
