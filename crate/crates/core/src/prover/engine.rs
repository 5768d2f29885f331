//! State and steps shared by both search engines.

use std::sync::Arc;

use crate::builtins::{eval_residual_with, Residual, Violation};
use crate::formula::{DFormula, GFormula, Program};
use crate::subst::{Substitute, Substitution};
use crate::term::{Name, NameSupply, Term, Var};
use crate::unify::UnifyOptions;

use super::{Context, SearchLimits, StructuredProof};

pub(crate) struct Engine {
    pub program: Arc<Program>,
    pub limits: SearchLimits,
    pub unify: UnifyOptions,
    pub supply: NameSupply,
    pub depth_exceeded: bool,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct SearchState {
    pub theta: Substitution,
    pub deferred: Vec<Residual>,
    /// Existential variables of the query, with the logic variable standing
    /// for each witness.
    pub answers: Vec<(Name, Var)>,
}

/// A clause with its leading `∀`s stripped one at a time.
pub(crate) struct Instantiated {
    /// The focused formula before each stripping step, the bound name and
    /// the fresh variable put in its place.
    pub steps: Vec<(DFormula, Name, Var)>,
    /// What is left: a fact or a clause.
    pub core: DFormula,
}

impl Engine {
    pub fn new(program: Arc<Program>, limits: SearchLimits, unify: UnifyOptions) -> Engine {
        Engine { program, limits, unify, supply: NameSupply::new(), depth_exceeded: false }
    }

    pub fn root_context(&self) -> Context {
        Context::new(self.program.clone())
    }

    /// Whether a node may be created at `depth`; records the cut-off.
    pub fn within(&mut self, depth: u32) -> bool {
        if depth > self.limits.max_depth {
            self.depth_exceeded = true;
            false
        } else {
            true
        }
    }

    pub fn instantiate(&mut self, d: &DFormula, level: u32) -> Instantiated {
        let mut steps = Vec::new();
        let mut cur = d.clone();
        while let DFormula::All(x, body) = &cur {
            let v = self.supply.fresh_var(x, level);
            let s = Substitution::from_pairs([(Var::bound(x), Term::Var(v.clone()))]);
            let next = body.apply(&s);
            steps.push((cur.clone(), x.clone(), v));
            cur = next;
        }
        Instantiated { steps, core: cur }
    }

    /// Runs a builtin goal. Ready constraints are evaluated now; the rest
    /// are deferred. Returns false when the constraint is already false.
    pub fn builtin(&self, r: &Residual, st: &mut SearchState) -> bool {
        if !r.is_ready(&st.theta) {
            st.deferred.push(r.clone());
            return true;
        }
        match eval_residual_with(&r.apply(&st.theta), &st.theta, self.unify) {
            Ok(theta) => {
                st.theta = theta;
                true
            }
            Err(Violation::False) => false,
            Err(Violation::NonGround) => {
                st.deferred.push(r.clone());
                true
            }
        }
    }

    /// Re-evaluates deferred constraints until nothing changes. `None` when
    /// one of them turns out false.
    pub fn flush(&self, mut st: SearchState) -> Option<SearchState> {
        loop {
            let mut progressed = false;
            let mut keep = Vec::new();
            for r in std::mem::take(&mut st.deferred) {
                if !r.is_ready(&st.theta) {
                    keep.push(r);
                    continue;
                }
                match eval_residual_with(&r.apply(&st.theta), &st.theta, self.unify) {
                    Ok(theta) => {
                        st.theta = theta;
                        progressed = true;
                    }
                    Err(Violation::False) => return None,
                    Err(Violation::NonGround) => keep.push(r),
                }
            }
            st.deferred = keep;
            if !progressed {
                return Some(st);
            }
        }
    }

    pub fn answer(st: &SearchState) -> Substitution {
        let mut seen = std::collections::BTreeSet::new();
        let mut pairs = Vec::new();
        for (name, v) in &st.answers {
            if seen.insert(name.clone()) {
                pairs.push((Var::bound(name), st.theta.apply_term(&Term::Var(v.clone()))));
            }
        }
        Substitution::from_pairs(pairs)
    }
}

/// One successful backchaining step on a distinguished clause.
#[derive(Clone, Debug)]
pub struct Backchained {
    pub theta: Substitution,
    /// Each stripped `∀` with the term it was instantiated to.
    pub instances: Vec<(Name, Term)>,
    pub proof: StructuredProof,
}

/// Backchains `atom` against the distinguished clause `clause`, solving its
/// body from `program`. Yields every success under the default limits.
pub fn backchain(clause: &DFormula, program: &Program, atom: &Term, theta: &Substitution) -> Vec<Backchained> {
    let mut engine = Engine::new(
        Arc::new(program.clone()),
        SearchLimits { max_depth: 64, max_solutions: usize::MAX },
        UnifyOptions::default(),
    );
    let st = SearchState { theta: theta.clone(), ..SearchState::default() };
    let ctx = engine.root_context();
    let mut out = Vec::new();
    super::tree::focused(&mut engine, &ctx, clause, atom, 1, 0, st, &mut |e, st, proof, instances| {
        if let Some(st) = e.flush(st) {
            let instances =
                instances.iter().map(|(x, v)| (x.clone(), st.theta.apply_term(&Term::Var(v.clone())))).collect();
            out.push(Backchained { proof: proof.apply(&st.theta), theta: st.theta, instances });
        }
        super::tree::Flow::Continue
    });
    out
}

pub(crate) fn atom_goal(t: &Term) -> GFormula {
    GFormula::Atom(t.clone())
}
