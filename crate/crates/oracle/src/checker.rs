//! Re-verification of proofs by pattern matching on each rule instance.
//!
//! Nothing here unifies. Every premise is recomputed from its conclusion
//! with the recorded instance terms and compared up to renaming of bound
//! variables.

use std::collections::BTreeSet;
use std::fmt;

use fohh_core::builtins::BuiltinKind;
use fohh_core::prover::{Context, Rule, Sequent, StructuredProof};
use fohh_core::{DFormula, GFormula, Param, Substitution, Term, Var};

use crate::arith::{eval_big, BigEval};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckError {
    /// Preorder position of the offending node, root = 0.
    pub node: usize,
    pub sequent: String,
    pub message: String,
}

impl fmt::Display for CheckError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "node {} `{}`: {}", self.node, self.sequent, self.message)
    }
}

/// What a successful check saw.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub nodes: usize,
    /// Builtin leaves whose inputs are not ground and were accepted as
    /// deferred constraints.
    pub deferred: usize,
}

/// Checks that `proof` derives `P ⊢ goal` from the program in its root
/// context.
pub fn check_proof(goal: &GFormula, proof: &StructuredProof) -> Result<CheckReport, CheckError> {
    let mut c = Checker { next: 0, report: CheckReport::default() };
    let root = &proof.node;
    if root.focus.is_some() || root.context.hypothesis_count() != 0 {
        return Err(c.fail(0, root, "root must be `P ⊢ G` with no hypotheses"));
    }
    if !alpha_eq_g(&root.goal, goal) {
        return Err(c.fail(0, root, format!("root goal is not the query {goal}")));
    }
    c.check(proof)?;
    Ok(c.report)
}

/// Checks the proof, then that `answer` agrees with the witnesses the proof
/// chose for the query's own existential variables.
pub fn check_answer(
    goal: &GFormula,
    answer: &Substitution,
    proof: &StructuredProof,
) -> Result<CheckReport, CheckError> {
    let report = check_proof(goal, proof)?;
    let witnesses = query_witnesses(proof);
    let mut pairs_a = Vec::new();
    let mut pairs_b = Vec::new();
    for (name, w) in &witnesses {
        let Some(t) = answer.get(&Var::bound(name)) else {
            return Err(CheckError {
                node: 0,
                sequent: proof.node.to_string(),
                message: format!("answer lacks {name}"),
            });
        };
        pairs_a.push(t.clone());
        pairs_b.push(w.clone());
    }
    if answer.len() != witnesses.len() {
        return Err(CheckError {
            node: 0,
            sequent: proof.node.to_string(),
            message: format!("answer binds {} names, the proof has {} query witnesses", answer.len(), witnesses.len()),
        });
    }
    let a = Term::compound("answer", pairs_a);
    let b = Term::compound("answer", pairs_b);
    if !crate::canon::variant(&a, &b) {
        return Err(CheckError {
            node: 0,
            sequent: proof.node.to_string(),
            message: format!("answer {a} is not a renaming of the proof's witnesses {b}"),
        });
    }
    Ok(report)
}

/// Witnesses of `∃` nodes reached from the root through goal connectives
/// only, first occurrence of each name.
pub fn query_witnesses(proof: &StructuredProof) -> Vec<(String, Term)> {
    fn go(p: &StructuredProof, out: &mut Vec<(String, Term)>) {
        match &p.rule {
            Rule::Exists { var, witness } => {
                if !out.iter().any(|(n, _)| **n == **var) {
                    out.push((var.to_string(), witness.clone()));
                }
                p.children.iter().for_each(|c| go(c, out));
            }
            Rule::And | Rule::Forall { .. } | Rule::Augment => p.children.iter().for_each(|c| go(c, out)),
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(proof, &mut out);
    out
}

struct Checker {
    next: usize,
    report: CheckReport,
}

impl Checker {
    fn fail(&self, node: usize, s: &Sequent, message: impl Into<String>) -> CheckError {
        CheckError { node, sequent: s.to_string(), message: message.into() }
    }

    fn check(&mut self, p: &StructuredProof) -> Result<(), CheckError> {
        let id = self.next;
        self.next += 1;
        self.report.nodes += 1;
        let s = &p.node;
        let fail = |m: String| CheckError { node: id, sequent: s.to_string(), message: m };
        if p.children.len() != p.rule.arity() {
            return Err(fail(format!("rule {} with {} premises", p.rule.tag(), p.children.len())));
        }
        let same_ctx = |c: &StructuredProof| -> Result<(), CheckError> {
            if ctx_eq(&c.node.context, &s.context) {
                Ok(())
            } else {
                Err(fail(format!("premise context {} differs", c.node.context)))
            }
        };
        let plain = |c: &StructuredProof, goal: &GFormula| -> Result<(), CheckError> {
            same_ctx(c)?;
            if c.node.focus.is_some() {
                return Err(fail("premise must not be focused".into()));
            }
            if !alpha_eq_g(&c.node.goal, goal) {
                return Err(fail(format!("premise goal {} should be {goal}", c.node.goal)));
            }
            Ok(())
        };
        let atom = |g: &GFormula| -> Result<Term, CheckError> {
            match g {
                GFormula::Atom(a) => Ok(a.clone()),
                _ => Err(fail("focused sequent with a non-atomic goal".into())),
            }
        };

        match (&p.rule, &s.focus) {
            (Rule::Axiom, Some(DFormula::Fact(h))) => {
                if *h != atom(&s.goal)? {
                    return Err(fail(format!("axiom head {h} is not the goal")));
                }
            }
            (Rule::Backchain, Some(DFormula::Clause(body, h))) => {
                if *h != atom(&s.goal)? {
                    return Err(fail(format!("clause head {h} is not the goal")));
                }
                plain(&p.children[0], body)?;
            }
            (Rule::Instance { var, term }, Some(DFormula::All(x, d))) => {
                if var != x {
                    return Err(fail(format!("instance names {var}, clause binds {x}")));
                }
                let c = &p.children[0];
                same_ctx(c)?;
                let expected = subst_d(d, x, term);
                match &c.node.focus {
                    Some(f) if alpha_eq_d(f, &expected) => {}
                    other => return Err(fail(format!("premise focus {other:?} should be {expected}"))),
                }
                if c.node.goal != s.goal {
                    return Err(fail("instance premise changes the goal".into()));
                }
            }
            (Rule::Select, None) => {
                let a = atom(&s.goal)?;
                let c = &p.children[0];
                same_ctx(c)?;
                let Some(d) = &c.node.focus else {
                    return Err(fail("select premise is not focused".into()));
                };
                if !s.context.candidates().any(|h| alpha_eq_d(h, d)) {
                    return Err(fail(format!("selected clause {d} is not in the context")));
                }
                if c.node.goal != GFormula::Atom(a) {
                    return Err(fail("select premise changes the goal".into()));
                }
            }
            (Rule::And, None) => {
                let GFormula::And(a, b) = &s.goal else {
                    return Err(fail("∧ rule on a non-conjunction".into()));
                };
                plain(&p.children[0], a)?;
                plain(&p.children[1], b)?;
            }
            (Rule::Augment, None) => {
                let GFormula::Implies(d, g) = &s.goal else {
                    return Err(fail("augment on a non-implication".into()));
                };
                let c = &p.children[0];
                let expected = s.context.with_hypothesis((**d).clone());
                if !ctx_eq(&c.node.context, &expected) || c.node.focus.is_some() || !alpha_eq_g(&c.node.goal, g) {
                    return Err(fail(format!("augment premise should be {expected} ⊢ {g}")));
                }
            }
            (Rule::Exists { var, witness }, None) => {
                let GFormula::Exists(x, g) = &s.goal else {
                    return Err(fail("∃ rule on a non-existential".into()));
                };
                if var != x {
                    return Err(fail(format!("witness for {var}, goal binds {x}")));
                }
                plain(&p.children[0], &subst_g(g, x, witness))?;
            }
            (Rule::Forall { var, param }, None) => {
                let GFormula::Forall(x, g) = &s.goal else {
                    return Err(fail("∀ rule on a non-universal".into()));
                };
                if var != x {
                    return Err(fail(format!("parameter for {var}, goal binds {x}")));
                }
                if sequent_params(s).contains(param) {
                    return Err(fail(format!("eigenvariable {} occurs in the conclusion", Term::Param(param.clone()))));
                }
                plain(&p.children[0], &subst_g(g, x, &Term::Param(param.clone())))?;
            }
            (Rule::Builtin, None) => {
                let a = atom(&s.goal)?;
                let Some(r) = &p.residual else {
                    return Err(fail("builtin leaf without its constraint".into()));
                };
                if r.to_atom() != a {
                    return Err(fail(format!("constraint {r} is not the goal")));
                }
                match builtin_holds(r.kind, &r.args) {
                    Some(true) => {}
                    Some(false) => return Err(fail(format!("constraint {r} is false"))),
                    None => self.report.deferred += 1,
                }
            }
            (rule, focus) => {
                return Err(fail(format!("rule {} does not apply (focus {focus:?})", rule.tag())));
            }
        }
        if p.rule != Rule::Builtin && p.residual.is_some() {
            return Err(fail("only builtin leaves carry constraints".into()));
        }
        for c in &p.children {
            self.check(c)?;
        }
        Ok(())
    }
}

/// `Some(holds)` for decidable constraints, `None` when inputs are open.
fn builtin_holds(kind: BuiltinKind, args: &[Term]) -> Option<bool> {
    let num = |t: &Term| match eval_big(t) {
        BigEval::Value(v) => Some(Ok(v)),
        BigEval::Open => None,
        BigEval::NotNumeric => Some(Err(())),
    };
    match kind {
        // Equality must already be syntactic identity after grounding.
        BuiltinKind::Eq => Some(args[0] == args[1]),
        BuiltinKind::Is => {
            let rhs = num(&args[1])?;
            match (&args[0], rhs) {
                (_, Err(())) => Some(false),
                (Term::Int(n), Ok(v)) => Some(num_bigint::BigInt::from(*n) == v),
                (t, _) if is_closed_term(t) => Some(false),
                _ => None,
            }
        }
        BuiltinKind::Lt | BuiltinKind::Le => {
            let l = num(&args[0])?;
            let r = num(&args[1])?;
            match (l, r) {
                (Ok(l), Ok(r)) => Some(if kind == BuiltinKind::Lt { l < r } else { l <= r }),
                _ => Some(false),
            }
        }
        BuiltinKind::Nat => match &args[0] {
            Term::Int(n) => Some(*n >= 0),
            t if is_closed_term(t) => Some(false),
            _ => None,
        },
    }
}

fn is_closed_term(t: &Term) -> bool {
    match t {
        Term::Var(_) | Term::Param(_) => false,
        Term::Compound(_, args) => args.iter().all(is_closed_term),
        _ => true,
    }
}

fn ctx_eq(a: &Context, b: &Context) -> bool {
    let (ha, hb) = (a.hypotheses(), b.hypotheses());
    a.program() == b.program() && ha.len() == hb.len() && ha.iter().zip(&hb).all(|(x, y)| alpha_eq_d(x, y))
}

fn sequent_params(s: &Sequent) -> BTreeSet<Param> {
    let mut out = BTreeSet::new();
    for h in s.context.hypotheses() {
        params_d(h, &mut out);
    }
    if let Some(d) = &s.focus {
        params_d(d, &mut out);
    }
    params_g(&s.goal, &mut out);
    out
}

fn params_t(t: &Term, out: &mut BTreeSet<Param>) {
    match t {
        Term::Param(p) => {
            out.insert(p.clone());
        }
        Term::Compound(_, args) => args.iter().for_each(|a| params_t(a, out)),
        _ => {}
    }
}

fn params_g(g: &GFormula, out: &mut BTreeSet<Param>) {
    match g {
        GFormula::Atom(t) => params_t(t, out),
        GFormula::And(a, b) => {
            params_g(a, out);
            params_g(b, out);
        }
        GFormula::Exists(_, g) | GFormula::Forall(_, g) => params_g(g, out),
        GFormula::Implies(d, g) => {
            params_d(d, out);
            params_g(g, out);
        }
    }
}

fn params_d(d: &DFormula, out: &mut BTreeSet<Param>) {
    match d {
        DFormula::Fact(t) => params_t(t, out),
        DFormula::Clause(g, t) => {
            params_g(g, out);
            params_t(t, out);
        }
        DFormula::All(_, d) => params_d(d, out),
    }
}

// Capture-avoiding substitution of `t` for the bound name `x`.

fn is_bound_occurrence(v: &Var, x: &str) -> bool {
    &*v.name == x && v.level == 0
}

fn subst_t(u: &Term, x: &str, t: &Term) -> Term {
    match u {
        Term::Var(v) if is_bound_occurrence(v, x) => t.clone(),
        Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| subst_t(a, x, t)).collect()),
        other => other.clone(),
    }
}

fn term_mentions_name(t: &Term, y: &str) -> bool {
    match t {
        Term::Var(v) => &*v.name == y,
        Term::Compound(_, args) => args.iter().any(|a| term_mentions_name(a, y)),
        _ => false,
    }
}

// Picks a binder name not mentioned by `t`, renaming the body if needed.
fn fresh_binder(y: &str, t: &Term) -> Option<String> {
    if !term_mentions_name(t, y) {
        return None;
    }
    (0..).map(|k| format!("{y}'{k}")).find(|c| !term_mentions_name(t, c))
}

pub fn subst_g(g: &GFormula, x: &str, t: &Term) -> GFormula {
    match g {
        GFormula::Atom(a) => GFormula::Atom(subst_t(a, x, t)),
        GFormula::And(a, b) => GFormula::and(subst_g(a, x, t), subst_g(b, x, t)),
        GFormula::Exists(y, _) | GFormula::Forall(y, _) if **y == *x => g.clone(),
        GFormula::Exists(y, body) | GFormula::Forall(y, body) => {
            let (y, body) = match fresh_binder(y, t) {
                Some(z) => (z.clone(), subst_g(body, y, &Term::Var(Var::bound(&z)))),
                None => (y.to_string(), (**body).clone()),
            };
            let inner = subst_g(&body, x, t);
            if matches!(g, GFormula::Exists(..)) {
                GFormula::exists(&y, inner)
            } else {
                GFormula::forall(&y, inner)
            }
        }
        GFormula::Implies(d, body) => GFormula::implies(subst_d(d, x, t), subst_g(body, x, t)),
    }
}

pub fn subst_d(d: &DFormula, x: &str, t: &Term) -> DFormula {
    match d {
        DFormula::Fact(a) => DFormula::Fact(subst_t(a, x, t)),
        DFormula::Clause(g, a) => DFormula::Clause(subst_g(g, x, t), subst_t(a, x, t)),
        DFormula::All(y, _) if **y == *x => d.clone(),
        DFormula::All(y, body) => {
            let (y, body) = match fresh_binder(y, t) {
                Some(z) => (z.clone(), subst_d(body, y, &Term::Var(Var::bound(&z)))),
                None => (y.to_string(), (**body).clone()),
            };
            DFormula::all(&y, subst_d(&body, x, t))
        }
    }
}

// Alpha-equivalence: bound names are compared by binder position.

type Env<'a> = Vec<(&'a str, &'a str)>;

fn alpha_t(a: &Term, b: &Term, env: &Env) -> bool {
    match (a, b) {
        (Term::Var(x), Term::Var(y)) if x.level == 0 && y.level == 0 => {
            let lx = env.iter().rposition(|(l, _)| *l == &*x.name);
            let ry = env.iter().rposition(|(_, r)| *r == &*y.name);
            match (lx, ry) {
                (Some(i), Some(j)) => i == j,
                (None, None) => x == y,
                _ => false,
            }
        }
        (Term::Var(x), Term::Var(y)) => x == y && !env.iter().any(|(l, r)| *l == &*x.name || *r == &*y.name),
        (Term::Compound(f, xs), Term::Compound(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| alpha_t(x, y, env))
        }
        _ => a == b,
    }
}

fn alpha_g<'a>(a: &'a GFormula, b: &'a GFormula, env: &mut Env<'a>) -> bool {
    match (a, b) {
        (GFormula::Atom(x), GFormula::Atom(y)) => alpha_t(x, y, env),
        (GFormula::And(a1, a2), GFormula::And(b1, b2)) => alpha_g(a1, b1, env) && alpha_g(a2, b2, env),
        (GFormula::Exists(x, g), GFormula::Exists(y, h)) | (GFormula::Forall(x, g), GFormula::Forall(y, h)) => {
            env.push((x, y));
            let ok = alpha_g(g, h, env);
            env.pop();
            ok
        }
        (GFormula::Implies(d, g), GFormula::Implies(e, h)) => alpha_d(d, e, env) && alpha_g(g, h, env),
        _ => false,
    }
}

fn alpha_d<'a>(a: &'a DFormula, b: &'a DFormula, env: &mut Env<'a>) -> bool {
    match (a, b) {
        (DFormula::Fact(x), DFormula::Fact(y)) => alpha_t(x, y, env),
        (DFormula::Clause(g, x), DFormula::Clause(h, y)) => alpha_g(g, h, env) && alpha_t(x, y, env),
        (DFormula::All(x, d), DFormula::All(y, e)) => {
            env.push((x, y));
            let ok = alpha_d(d, e, env);
            env.pop();
            ok
        }
        _ => false,
    }
}

pub fn alpha_eq_g(a: &GFormula, b: &GFormula) -> bool {
    alpha_g(a, b, &mut Vec::new())
}

pub fn alpha_eq_d(a: &DFormula, b: &DFormula) -> bool {
    alpha_d(a, b, &mut Vec::new())
}
