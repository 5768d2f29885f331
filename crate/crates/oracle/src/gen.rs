//! Seeded random generators for programs, goals, terms, formulas and proofs.

use std::sync::Arc;

use fohh_core::builtins::{BuiltinKind, Residual};
use fohh_core::prover::{Context, Rule, Sequent, StructuredProof};
use fohh_core::{DFormula, Formula, GFormula, Param, Program, Term, Var};
use rand::seq::SliceRandom;
use rand::Rng;

/// Predicate symbols with arities used by the corpus.
pub const PREDICATES: &[(&str, usize)] = &[("p", 0), ("q", 1), ("r", 2), ("s", 1)];
pub const CONSTANTS: &[&str] = &["a", "b"];
const GOAL_VARS: &[&str] = &["X", "Y", "Z", "W"];
const CLAUSE_VARS: &[&str] = &["A", "B", "C"];

#[derive(Clone, Copy, Debug)]
pub struct CorpusConfig {
    pub max_clauses: usize,
    pub max_goal_depth: usize,
    /// Chance that an atom position holds a builtin instead.
    pub builtin_rate: f64,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        CorpusConfig { max_clauses: 6, max_goal_depth: 4, builtin_rate: 0.1 }
    }
}

/// Random ground or open term over the corpus signature. `vars` are the
/// names in scope.
pub fn term(rng: &mut impl Rng, vars: &[&str], depth: usize) -> Term {
    let roll = rng.gen_range(0..10);
    match roll {
        0..=3 if !vars.is_empty() => Term::var(vars.choose(rng).unwrap()),
        0..=5 => Term::constant(CONSTANTS.choose(rng).unwrap()),
        6 => Term::Int(rng.gen_range(0..4)),
        _ if depth > 0 => {
            if rng.gen_bool(0.5) {
                Term::compound("f", vec![term(rng, vars, depth - 1)])
            } else {
                Term::compound("g", vec![term(rng, vars, depth - 1), term(rng, vars, depth - 1)])
            }
        }
        _ => Term::constant(CONSTANTS.choose(rng).unwrap()),
    }
}

fn small_int_expr(rng: &mut impl Rng, vars: &[&str]) -> Term {
    let leaf = |rng: &mut dyn rand::RngCore| -> Term {
        if !vars.is_empty() && rng.gen_bool(0.4) {
            Term::var(vars.choose(rng).unwrap())
        } else {
            Term::Int(rng.gen_range(0..4))
        }
    };
    match rng.gen_range(0..3) {
        0 => leaf(rng),
        1 => Term::compound("+", vec![leaf(rng), leaf(rng)]),
        _ => Term::compound("*", vec![leaf(rng), leaf(rng)]),
    }
}

fn builtin_atom(rng: &mut impl Rng, vars: &[&str]) -> Term {
    let kinds = [BuiltinKind::Eq, BuiltinKind::Nat, BuiltinKind::Is, BuiltinKind::Lt];
    let kind = *kinds.choose(rng).unwrap();
    let args = match kind {
        BuiltinKind::Eq => vec![term(rng, vars, 1), term(rng, vars, 1)],
        BuiltinKind::Nat => vec![term(rng, vars, 0)],
        BuiltinKind::Is => {
            let lhs = if !vars.is_empty() && rng.gen_bool(0.7) {
                Term::var(vars.choose(rng).unwrap())
            } else {
                Term::Int(rng.gen_range(0..6))
            };
            vec![lhs, small_int_expr(rng, vars)]
        }
        _ => vec![small_int_expr(rng, vars), small_int_expr(rng, vars)],
    };
    Term::compound(kind.functor(), args)
}

pub fn atom(rng: &mut impl Rng, vars: &[&str], cfg: &CorpusConfig) -> Term {
    if rng.gen_bool(cfg.builtin_rate) {
        return builtin_atom(rng, vars);
    }
    let (p, n) = *PREDICATES.choose(rng).unwrap();
    Term::compound(p, (0..n).map(|_| term(rng, vars, 1)).collect())
}

/// A goal of at most `depth` levels using only the names in `scope`.
pub fn goal(rng: &mut impl Rng, scope: &mut Vec<&'static str>, depth: usize, cfg: &CorpusConfig) -> GFormula {
    if depth <= 1 || rng.gen_bool(0.3) {
        return GFormula::Atom(atom(rng, scope, cfg));
    }
    match rng.gen_range(0..5) {
        0 => GFormula::and(goal(rng, scope, depth - 1, cfg), goal(rng, scope, depth - 1, cfg)),
        k @ (1 | 2) => {
            let x = *GOAL_VARS.choose(rng).unwrap();
            scope.push(x);
            let body = goal(rng, scope, depth - 1, cfg);
            scope.pop();
            if k == 1 {
                GFormula::exists(x, body)
            } else {
                GFormula::forall(x, body)
            }
        }
        _ => {
            let d = hypothesis(rng, scope, depth - 1, cfg);
            GFormula::implies(d, goal(rng, scope, depth - 1, cfg))
        }
    }
}

fn hypothesis(rng: &mut impl Rng, scope: &mut Vec<&'static str>, depth: usize, cfg: &CorpusConfig) -> DFormula {
    let head_cfg = CorpusConfig { builtin_rate: 0.0, ..*cfg };
    match rng.gen_range(0..3) {
        1 if depth >= 2 => {
            let body = goal(rng, scope, depth - 1, cfg);
            DFormula::Clause(body, atom(rng, scope, &head_cfg))
        }
        2 if depth >= 2 => {
            let x = *CLAUSE_VARS.choose(rng).unwrap();
            scope.push(x);
            let d = if depth >= 3 && rng.gen_bool(0.5) {
                DFormula::Clause(goal(rng, scope, depth - 2, cfg), atom(rng, scope, &head_cfg))
            } else {
                DFormula::Fact(atom(rng, scope, &head_cfg))
            };
            scope.pop();
            DFormula::all(x, d)
        }
        _ => DFormula::Fact(atom(rng, scope, &head_cfg)),
    }
}

/// Universally closes a clause over its free variables, in order of first
/// occurrence.
pub fn close(d: DFormula) -> DFormula {
    let free = d.free_vars_in_order();
    free.into_iter().rev().fold(d, |acc, v| DFormula::All(v.name, Box::new(acc)))
}

pub fn program_clause(rng: &mut impl Rng, cfg: &CorpusConfig) -> DFormula {
    let head_cfg = CorpusConfig { builtin_rate: 0.0, ..*cfg };
    let head = atom(rng, CLAUSE_VARS, &head_cfg);
    let d = if rng.gen_bool(0.6) {
        DFormula::Fact(head)
    } else {
        let mut scope: Vec<&'static str> = CLAUSE_VARS.to_vec();
        DFormula::Clause(goal(rng, &mut scope, 2, cfg), head)
    };
    close(d)
}

pub fn program(rng: &mut impl Rng, cfg: &CorpusConfig) -> Program {
    let n = rng.gen_range(0..=cfg.max_clauses);
    Program::new((0..n).map(|_| program_clause(rng, cfg)).collect()).expect("generated clauses are closed")
}

/// A closed goal of depth at most `cfg.max_goal_depth`.
pub fn query(rng: &mut impl Rng, cfg: &CorpusConfig) -> GFormula {
    let g = goal(rng, &mut Vec::new(), cfg.max_goal_depth, cfg);
    assert!(g.is_closed() && g.depth() <= cfg.max_goal_depth, "generated {g:?}");
    g
}

/// A raw connective tree over arbitrary shapes, including ones that are
/// neither goals nor clauses.
pub fn formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.25) {
        // Mostly atoms, sometimes a term that is not an atomic formula.
        let t = match rng.gen_range(0..8) {
            0 => Term::Int(3),
            1 => Term::var("X"),
            _ => atom(rng, &["X"], &CorpusConfig { builtin_rate: 0.0, ..CorpusConfig::default() }),
        };
        return Formula::Atom(t);
    }
    let sub_kind = rng.gen_range(0..4);
    let mut sub = || Box::new(formula(rng, depth - 1));
    match sub_kind {
        0 => Formula::And(sub(), sub()),
        1 => Formula::Exists(Arc::from("X"), sub()),
        2 => Formula::Forall(Arc::from("X"), sub()),
        _ => Formula::Implies(sub(), sub()),
    }
}

/// Random arithmetic expression with literals spread over the whole `i64`
/// range, so some evaluations overflow.
pub fn arith_expr(rng: &mut impl Rng, depth: usize) -> Term {
    if depth == 0 || rng.gen_bool(0.3) {
        let n: i64 = match rng.gen_range(0..4) {
            0 => rng.gen(),
            1 => rng.gen_range(-1_000_000_000..1_000_000_000),
            2 => rng.gen_range(-3_037_000_499..3_037_000_499),
            _ => rng.gen_range(-10..10),
        };
        return Term::Int(n);
    }
    match rng.gen_range(0..4) {
        0 => Term::compound("+", vec![arith_expr(rng, depth - 1), arith_expr(rng, depth - 1)]),
        1 => Term::compound("-", vec![arith_expr(rng, depth - 1), arith_expr(rng, depth - 1)]),
        2 => Term::compound("*", vec![arith_expr(rng, depth - 1), arith_expr(rng, depth - 1)]),
        _ => Term::compound("-", vec![arith_expr(rng, depth - 1)]),
    }
}

/// A structurally valid random proof of at most about `budget` nodes. The
/// sequents are distinct but carry no logical meaning.
pub fn structured_proof(rng: &mut impl Rng, budget: usize) -> StructuredProof {
    let program = Arc::new(Program::empty());
    let mut counter = 0;
    proof_node(rng, &Context::new(program), budget.max(1), &mut counter)
}

fn proof_node(rng: &mut impl Rng, ctx: &Context, budget: usize, counter: &mut u64) -> StructuredProof {
    *counter += 1;
    let id = *counter as i64;
    let label = Term::compound("n", vec![Term::Int(id)]);
    let sequent = |focus: Option<DFormula>, goal: GFormula| Sequent { context: ctx.clone(), focus, goal };
    let atom_goal = GFormula::Atom(label.clone());
    let arity = if budget <= 1 {
        0
    } else {
        match rng.gen_range(0..10) {
            0..=1 => 0,
            2..=6 => 1,
            _ => 2,
        }
    };
    match arity {
        0 => {
            if rng.gen_bool(0.3) {
                let r = Residual { kind: BuiltinKind::Nat, args: vec![Term::Int(id)] };
                StructuredProof {
                    node: sequent(None, GFormula::Atom(r.to_atom())),
                    rule: Rule::Builtin,
                    children: vec![],
                    residual: Some(r),
                }
            } else {
                StructuredProof {
                    node: sequent(Some(DFormula::Fact(label.clone())), atom_goal),
                    rule: Rule::Axiom,
                    children: vec![],
                    residual: None,
                }
            }
        }
        1 => {
            let child = proof_node(rng, ctx, budget - 1, counter);
            let (rule, focus) = match rng.gen_range(0..6) {
                0 => (Rule::Backchain, Some(DFormula::Clause(GFormula::Atom(Term::constant("b")), label.clone()))),
                1 => (
                    Rule::Instance { var: Arc::from("X"), term: Term::Int(id) },
                    Some(DFormula::all("X", DFormula::Fact(label.clone()))),
                ),
                2 => (Rule::Select, None),
                3 => (Rule::Augment, None),
                4 => (Rule::Exists { var: Arc::from("Y"), witness: Term::var("Y_1") }, None),
                _ => (Rule::Forall { var: Arc::from("X"), param: Param::new(format!("X#{id}"), 1) }, None),
            };
            StructuredProof { node: sequent(focus, atom_goal), rule, children: vec![child], residual: None }
        }
        _ => {
            let left_budget = rng.gen_range(1..budget.max(2));
            let right_budget = (budget - 1).saturating_sub(left_budget).max(1);
            let a = proof_node(rng, ctx, left_budget, counter);
            let b = proof_node(rng, ctx, right_budget, counter);
            StructuredProof {
                node: sequent(None, GFormula::and(GFormula::Atom(label.clone()), GFormula::Atom(label))),
                rule: Rule::And,
                children: vec![a, b],
                residual: None,
            }
        }
    }
}

/// Ground terms up to nesting depth 1 over a tiny signature, for
/// brute-force unifier checks.
pub fn small_universe() -> Vec<Term> {
    let base = vec![Term::constant("a"), Term::constant("b"), Term::Int(0)];
    let mut out = base.clone();
    for x in &base {
        out.push(Term::compound("f", vec![x.clone()]));
    }
    out.push(Term::compound("g", vec![base[0].clone(), base[1].clone()]));
    out.push(Term::compound("g", vec![base[1].clone(), base[0].clone()]));
    out.push(Term::compound("g", vec![base[0].clone(), base[0].clone()]));
    out
}

/// A term over variables `X0..X{nvars-1}` for unification tests.
pub fn unif_term(rng: &mut impl Rng, nvars: usize, depth: usize) -> Term {
    let roll = rng.gen_range(0..6);
    if depth == 0 || roll < 3 {
        return if roll < 2 && nvars > 0 {
            Term::Var(Var::new(format!("X{}", rng.gen_range(0..nvars)), 0))
        } else if rng.gen_bool(0.8) {
            Term::constant(["a", "b"][rng.gen_range(0..2)])
        } else {
            Term::Int(0)
        };
    }
    if rng.gen_bool(0.5) {
        Term::compound("f", vec![unif_term(rng, nvars, depth - 1)])
    } else {
        Term::compound("g", vec![unif_term(rng, nvars, depth - 1), unif_term(rng, nvars, depth - 1)])
    }
}
