//! The answer-only solver: an explicit goal stack and a stack of pending
//! alternatives, so answers are produced on demand.

use std::sync::Arc;

use crate::builtins::recognize;
use crate::formula::{DFormula, GFormula};
use crate::subst::{Substitute, Substitution};
use crate::term::{Term, Var};
use crate::unify::unify_in_place;

use super::engine::{Engine, SearchState};
use super::Context;

#[derive(Clone)]
struct Frame {
    goal: GFormula,
    ctx: Context,
    depth: u32,
    level: u32,
    query: bool,
}

// Persistent list of pending goals; alternatives share their tails.
#[derive(Clone, Default)]
struct Goals(Option<Arc<(Frame, Goals)>>);

impl Goals {
    fn push(&self, f: Frame) -> Goals {
        Goals(Some(Arc::new((f, self.clone()))))
    }

    fn pop(&self) -> Option<(&Frame, &Goals)> {
        self.0.as_ref().map(|cell| (&cell.0, &cell.1))
    }
}

struct Alternative {
    goals: Goals,
    state: SearchState,
}

/// Lazy sequence of answer substitutions, in depth-first order.
pub struct Solutions {
    engine: Engine,
    stack: Vec<Alternative>,
    yielded: usize,
}

impl Solutions {
    pub(crate) fn new(engine: Engine, goal: &GFormula) -> Solutions {
        let root = Frame { goal: goal.clone(), ctx: engine.root_context(), depth: 1, level: 0, query: true };
        let start = Alternative { goals: Goals::default().push(root), state: SearchState::default() };
        Solutions { engine, stack: vec![start], yielded: 0 }
    }

    /// Whether some branch was abandoned at the depth limit. Only
    /// meaningful for the part of the search explored so far.
    pub fn depth_exceeded(&self) -> bool {
        self.engine.depth_exceeded
    }

    fn expand(&mut self, frame: &Frame, rest: &Goals, st: SearchState) {
        let e = &mut self.engine;
        let mut next = Vec::new();
        match &frame.goal {
            GFormula::Atom(a) => {
                if let Some(r) = recognize(a) {
                    let mut st = st;
                    if e.builtin(&r, &mut st) {
                        next.push(Alternative { goals: rest.clone(), state: st });
                    }
                } else if e.within(frame.depth + 1) {
                    for d in frame.ctx.candidates() {
                        if let Some(alt) = backchain_step(e, frame, d, a, rest, &st) {
                            next.push(alt);
                        }
                    }
                }
            }
            GFormula::And(a, b) => {
                if e.within(frame.depth + 1) {
                    let child = |g: &GFormula| Frame { goal: g.clone(), depth: frame.depth + 1, ..frame.clone() };
                    let goals = rest.push(child(b)).push(child(a));
                    next.push(Alternative { goals, state: st });
                }
            }
            GFormula::Exists(x, body) => {
                if e.within(frame.depth + 1) {
                    let v = e.supply.fresh_var(x, frame.level);
                    let mut st = st;
                    if frame.query {
                        st.answers.push((x.clone(), v.clone()));
                    }
                    let goal = body.apply(&Substitution::from_pairs([(Var::bound(x), Term::Var(v))]));
                    let goals = rest.push(Frame { goal, depth: frame.depth + 1, ..frame.clone() });
                    next.push(Alternative { goals, state: st });
                }
            }
            GFormula::Forall(x, body) => {
                if e.within(frame.depth + 1) {
                    let level = frame.level + 1;
                    let p = e.supply.fresh_param(x, level);
                    let goal = body.apply(&Substitution::from_pairs([(Var::bound(x), Term::Param(p))]));
                    let goals = rest.push(Frame { goal, depth: frame.depth + 1, level, ..frame.clone() });
                    next.push(Alternative { goals, state: st });
                }
            }
            GFormula::Implies(d, body) => {
                if e.within(frame.depth + 1) {
                    let ctx = frame.ctx.with_hypothesis((**d).clone());
                    let goals =
                        rest.push(Frame { goal: (**body).clone(), ctx, depth: frame.depth + 1, ..frame.clone() });
                    next.push(Alternative { goals, state: st });
                }
            }
        }
        self.stack.extend(next.into_iter().rev());
    }
}

// Selects `d` for the atom `a`, strips its quantifiers and unifies the head.
fn backchain_step(
    e: &mut Engine,
    frame: &Frame,
    d: &DFormula,
    a: &Term,
    rest: &Goals,
    st: &SearchState,
) -> Option<Alternative> {
    let inst = e.instantiate(d, frame.level);
    let core_depth = frame.depth + 1 + inst.steps.len() as u32;
    if !e.within(core_depth) {
        return None;
    }
    let mut st = st.clone();
    match &inst.core {
        DFormula::Fact(head) => {
            unify_in_place(&mut st.theta, a, head, e.unify).ok()?;
            Some(Alternative { goals: rest.clone(), state: st })
        }
        DFormula::Clause(body, head) => {
            unify_in_place(&mut st.theta, a, head, e.unify).ok()?;
            if !e.within(core_depth + 1) {
                return None;
            }
            let goal = Frame {
                goal: body.clone(),
                ctx: frame.ctx.clone(),
                depth: core_depth + 1,
                level: frame.level,
                query: false,
            };
            Some(Alternative { goals: rest.push(goal), state: st })
        }
        DFormula::All(..) => unreachable!("instantiate strips every quantifier"),
    }
}

impl Iterator for Solutions {
    type Item = Substitution;

    fn next(&mut self) -> Option<Substitution> {
        if self.yielded >= self.engine.limits.max_solutions {
            return None;
        }
        while let Some(Alternative { goals, state }) = self.stack.pop() {
            match goals.pop() {
                None => {
                    if let Some(st) = self.engine.flush(state) {
                        self.yielded += 1;
                        return Some(Engine::answer(&st));
                    }
                }
                Some((frame, rest)) => {
                    let (frame, rest) = (frame.clone(), rest.clone());
                    self.expand(&frame, &rest, state);
                }
            }
        }
        None
    }
}
