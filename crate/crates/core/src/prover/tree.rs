//! Proof-building search in continuation-passing style. Each success hands
//! its proof to the continuation; backtracking is returning.

use crate::builtins::recognize;
use crate::formula::{DFormula, GFormula};
use crate::subst::{Substitute, Substitution};
use crate::term::{Name, Term, Var};
use crate::unify::unify_in_place;

use super::engine::{atom_goal, Engine, SearchState};
use super::{Context, ProofAnswer, Rule, Sequent, StructuredProof};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Flow {
    Continue,
    Stop,
}

type Cont<'a> = dyn FnMut(&mut Engine, SearchState, StructuredProof) -> Flow + 'a;
type FocusCont<'a> = dyn FnMut(&mut Engine, SearchState, StructuredProof, &[(Name, Var)]) -> Flow + 'a;

#[derive(Clone)]
struct Frame {
    ctx: Context,
    depth: u32,
    level: u32,
    query: bool,
}

impl Frame {
    fn child(&self) -> Frame {
        Frame { depth: self.depth + 1, ..self.clone() }
    }
}

pub(crate) fn prove_all(mut engine: Engine, goal: &GFormula) -> (Vec<ProofAnswer>, bool) {
    let max = engine.limits.max_solutions;
    let root = Frame { ctx: engine.root_context(), depth: 1, level: 0, query: true };
    let mut found = Vec::new();
    prove_goal(&mut engine, goal, &root, SearchState::default(), &mut |e, st, proof| {
        let Some(st) = e.flush(st) else {
            return Flow::Continue;
        };
        let answer = Engine::answer(&st);
        let pending = st.deferred.iter().map(|r| r.apply(&st.theta)).collect();
        found.push(ProofAnswer { proof: proof.apply(&st.theta), answer, theta: st.theta, pending });
        if found.len() >= max {
            Flow::Stop
        } else {
            Flow::Continue
        }
    });
    (found, engine.depth_exceeded)
}

fn node(ctx: &Context, goal: &GFormula, rule: Rule, children: Vec<StructuredProof>) -> StructuredProof {
    StructuredProof {
        node: Sequent { context: ctx.clone(), focus: None, goal: goal.clone() },
        rule,
        children,
        residual: None,
    }
}

fn prove_goal(e: &mut Engine, g: &GFormula, fr: &Frame, st: SearchState, k: &mut Cont) -> Flow {
    match g {
        GFormula::Atom(a) => {
            if let Some(r) = recognize(a) {
                let mut st = st;
                if !e.builtin(&r, &mut st) {
                    return Flow::Continue;
                }
                let mut leaf = node(&fr.ctx, g, Rule::Builtin, vec![]);
                leaf.residual = Some(r);
                return k(e, st, leaf);
            }
            if !e.within(fr.depth + 1) {
                return Flow::Continue;
            }
            let candidates: Vec<DFormula> = fr.ctx.candidates().cloned().collect();
            for d in &candidates {
                let flow = focused(e, &fr.ctx, d, a, fr.depth + 1, fr.level, st.clone(), &mut |e, st, p, _| {
                    k(e, st, node(&fr.ctx, g, Rule::Select, vec![p]))
                });
                if flow == Flow::Stop {
                    return Flow::Stop;
                }
            }
            Flow::Continue
        }
        GFormula::And(a, b) => {
            if !e.within(fr.depth + 1) {
                return Flow::Continue;
            }
            let child = fr.child();
            prove_goal(e, a, &child, st, &mut |e, st, left| {
                prove_goal(e, b, &child, st, &mut |e, st, right| {
                    k(e, st, node(&fr.ctx, g, Rule::And, vec![left.clone(), right]))
                })
            })
        }
        GFormula::Exists(x, body) => {
            if !e.within(fr.depth + 1) {
                return Flow::Continue;
            }
            let v = e.supply.fresh_var(x, fr.level);
            let mut st = st;
            if fr.query {
                st.answers.push((x.clone(), v.clone()));
            }
            let inst = body.apply(&Substitution::from_pairs([(Var::bound(x), Term::Var(v.clone()))]));
            let rule = Rule::Exists { var: x.clone(), witness: Term::Var(v) };
            prove_goal(e, &inst, &fr.child(), st, &mut |e, st, p| k(e, st, node(&fr.ctx, g, rule.clone(), vec![p])))
        }
        GFormula::Forall(x, body) => {
            if !e.within(fr.depth + 1) {
                return Flow::Continue;
            }
            let level = fr.level + 1;
            let p = e.supply.fresh_param(x, level);
            let inst = body.apply(&Substitution::from_pairs([(Var::bound(x), Term::Param(p.clone()))]));
            let rule = Rule::Forall { var: x.clone(), param: p };
            let child = Frame { level, ..fr.child() };
            prove_goal(e, &inst, &child, st, &mut |e, st, c| k(e, st, node(&fr.ctx, g, rule.clone(), vec![c])))
        }
        GFormula::Implies(d, body) => {
            if !e.within(fr.depth + 1) {
                return Flow::Continue;
            }
            let child = Frame { ctx: fr.ctx.with_hypothesis((**d).clone()), ..fr.child() };
            prove_goal(e, body, &child, st, &mut |e, st, c| k(e, st, node(&fr.ctx, g, Rule::Augment, vec![c])))
        }
    }
}

/// Backchaining on a distinguished clause: `D;𝒫 ⊢ A` with the focus node
/// at `depth`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn focused(
    e: &mut Engine,
    ctx: &Context,
    d: &DFormula,
    atom: &Term,
    depth: u32,
    level: u32,
    st: SearchState,
    k: &mut FocusCont,
) -> Flow {
    let inst = e.instantiate(d, level);
    let core_depth = depth + inst.steps.len() as u32;
    if !e.within(core_depth) {
        return Flow::Continue;
    }
    let instances: Vec<(Name, Var)> = inst.steps.iter().map(|(_, x, v)| (x.clone(), v.clone())).collect();
    let goal = atom_goal(atom);
    let wrap = |core: StructuredProof| {
        inst.steps.iter().rev().fold(core, |acc, (formula, x, v)| StructuredProof {
            node: Sequent { context: ctx.clone(), focus: Some(formula.clone()), goal: goal.clone() },
            rule: Rule::Instance { var: x.clone(), term: Term::Var(v.clone()) },
            children: vec![acc],
            residual: None,
        })
    };
    let focus_node = |rule, children| StructuredProof {
        node: Sequent { context: ctx.clone(), focus: Some(inst.core.clone()), goal: goal.clone() },
        rule,
        children,
        residual: None,
    };
    let mut st = st;
    match &inst.core {
        DFormula::Fact(head) => {
            if unify_in_place(&mut st.theta, atom, head, e.unify).is_err() {
                return Flow::Continue;
            }
            let proof = wrap(focus_node(Rule::Axiom, vec![]));
            k(e, st, proof, &instances)
        }
        DFormula::Clause(body, head) => {
            if unify_in_place(&mut st.theta, atom, head, e.unify).is_err() {
                return Flow::Continue;
            }
            if !e.within(core_depth + 1) {
                return Flow::Continue;
            }
            let fr = Frame { ctx: ctx.clone(), depth: core_depth + 1, level, query: false };
            prove_goal(e, body, &fr, st, &mut |e, st, bp| {
                let proof = wrap(focus_node(Rule::Backchain, vec![bp]));
                k(e, st, proof, &instances)
            })
        }
        DFormula::All(..) => unreachable!("instantiate strips every quantifier"),
    }
}
