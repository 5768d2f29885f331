//! Interactive execution of a flat proof tree.
//!
//! Execution starts at the root (the last node) with an empty environment
//! and walks the tree depth first, first conjunct before second. At each
//! `∀` node the input provider is asked for a constant; at each `∃` node and
//! clause-instance node the recorded term is resolved under the environment
//! and pushed into the node's subtree; builtin leaves are evaluated.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::builtins::{eval_residual_with, recognize, Residual, Violation};
use crate::formula::{DFormula, GFormula};
use crate::parser::parse_term;
use crate::proof_tree::{FlatNode, FlatProofTree, Offsets, TreeViolation};
use crate::prover::Rule;
use crate::subst::Substitution;
use crate::term::{Name, Param, Term};
use crate::unify::UnifyOptions;

/// Total attempts per read before giving up on ill-typed input.
pub const MAX_READ_ATTEMPTS: u32 = 4;

/// A request for the constant to substitute for a `∀`-bound variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadRequest {
    pub param: Param,
    /// The bound name as written in the goal.
    pub var: Name,
    /// The `∀` sequent being executed, rendered.
    pub prompt: String,
    /// 1-based index of the `∀` node.
    pub node: usize,
    /// Whether the value takes part in arithmetic and must be an integer.
    pub integer: bool,
    /// 1 on the first ask, counting up on re-prompts.
    pub attempt: u32,
    /// Why the previous answer was rejected.
    pub rejected: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reply {
    /// Term text, parsed and checked by the executor.
    Text(String),
    Declined,
}

/// The source of user input. `request` may block.
pub trait InputProvider {
    fn request(&mut self, req: &ReadRequest) -> Reply;

    /// Called as each node is entered, before any read it issues.
    fn visit(&mut self, _node: usize) {}
}

impl<F: FnMut(&ReadRequest) -> Reply> InputProvider for F {
    fn request(&mut self, req: &ReadRequest) -> Reply {
        self(req)
    }
}

/// Answers reads from a fixed list of lines, in order. Running out of lines
/// declines.
#[derive(Clone, Debug, Default)]
pub struct ScriptedProvider {
    lines: VecDeque<String>,
    consumed: usize,
}

impl ScriptedProvider {
    /// One term per line. Blank lines are skipped.
    pub fn from_text(text: &str) -> ScriptedProvider {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from))
    }

    pub fn new(lines: impl IntoIterator<Item = String>) -> ScriptedProvider {
        ScriptedProvider { lines: lines.into_iter().collect(), consumed: 0 }
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn remaining(&self) -> usize {
        self.lines.len()
    }
}

impl InputProvider for ScriptedProvider {
    fn request(&mut self, _req: &ReadRequest) -> Reply {
        match self.lines.pop_front() {
            Some(l) => {
                self.consumed += 1;
                Reply::Text(l)
            }
            None => Reply::Declined,
        }
    }
}

/// One completed read.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReadEvent {
    pub param: Param,
    pub var: Name,
    pub prompt: String,
    pub value: Term,
    pub node: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExecStatus {
    Completed,
    /// The builtin leaf at this index failed, or never became evaluable.
    ResidualViolation {
        node: usize,
        violation: Violation,
    },
    /// The provider declined or kept giving ill-typed input.
    Aborted {
        node: usize,
    },
}

impl fmt::Display for ExecStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExecStatus::Completed => f.write_str("completed"),
            ExecStatus::ResidualViolation { node, violation } => write!(f, "constraint at node {node}: {violation}"),
            ExecStatus::Aborted { node } => write!(f, "aborted at node {node}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExecutionResult {
    pub status: ExecStatus,
    pub reads: Vec<ReadEvent>,
    /// One entry per `∃` node visited, in visit order, resolved under the
    /// final environment.
    pub witnesses: Vec<(Name, Term)>,
    pub env: Substitution,
    /// Node indices in visit order.
    pub visited: Vec<usize>,
}

impl ExecutionResult {
    pub fn completed(&self) -> bool {
        self.status == ExecStatus::Completed
    }

    pub fn witness(&self, name: &str) -> Option<&Term> {
        self.witnesses.iter().find(|(n, _)| &**n == name).map(|(_, t)| t)
    }

    /// Witnesses of the query's own `∃` variables: those reached from the
    /// root through goal connectives only, first occurrence of each name.
    /// Existentials inside clause bodies are left out.
    pub fn answer(&self, tree: &FlatProofTree) -> Vec<(Name, Term)> {
        let mut out: Vec<(Name, Term)> = Vec::new();
        let mut stack = vec![tree.len()];
        while let Some(i) = stack.pop() {
            let Ok(node) = tree.node(i) else { continue };
            match &node.rule {
                Rule::Exists { var, witness } => {
                    if !out.iter().any(|(n, _)| n == var) {
                        out.push((var.clone(), self.env.apply_term(witness)));
                    }
                }
                Rule::And | Rule::Forall { .. } | Rule::Augment => {}
                _ => continue,
            }
            stack.extend(tree.children(i).unwrap_or_default().into_iter().rev());
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ExecError {
    #[error("malformed proof tree: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    MalformedTree(Vec<TreeViolation>),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ExecOptions {
    pub unify: UnifyOptions,
}

pub fn execute(tree: &FlatProofTree, provider: &mut dyn InputProvider) -> Result<ExecutionResult, ExecError> {
    execute_with(tree, provider, ExecOptions::default())
}

pub fn execute_with(
    tree: &FlatProofTree,
    provider: &mut dyn InputProvider,
    opts: ExecOptions,
) -> Result<ExecutionResult, ExecError> {
    tree.validate().map_err(ExecError::MalformedTree)?;
    let mut run = Run {
        provider,
        nodes: tree.nodes().to_vec(),
        opts,
        env: Substitution::new(),
        pending: Vec::new(),
        reads: Vec::new(),
        witnesses: Vec::new(),
        visited: Vec::new(),
    };
    let status = run.go(tree);
    let witnesses = run.witnesses.iter().map(|(x, t)| (x.clone(), run.env.apply_term(t))).collect();
    Ok(ExecutionResult { status, reads: run.reads, witnesses, env: run.env, visited: run.visited })
}

struct Run<'p> {
    provider: &'p mut dyn InputProvider,
    // Private working copy, rewritten as values become known.
    nodes: Vec<FlatNode>,
    opts: ExecOptions,
    env: Substitution,
    // Builtin leaves (index, constraint) still waiting for inputs.
    pending: Vec<(usize, Residual)>,
    reads: Vec<ReadEvent>,
    witnesses: Vec<(Name, Term)>,
    visited: Vec<usize>,
}

type Step = Result<(), ExecStatus>;

impl Run<'_> {
    fn go(&mut self, shape: &FlatProofTree) -> ExecStatus {
        let mut stack = vec![self.nodes.len()];
        while let Some(i) = stack.pop() {
            self.visited.push(i);
            self.provider.visit(i);
            if let Err(status) = self.visit(shape, i) {
                return status;
            }
            // Offsets never change, so the input tree answers shape queries.
            let children = shape.children(i).expect("validated tree");
            stack.extend(children.into_iter().rev());
        }
        match self.pending.first() {
            None => ExecStatus::Completed,
            Some((node, _)) => ExecStatus::ResidualViolation { node: *node, violation: Violation::NonGround },
        }
    }

    fn visit(&mut self, shape: &FlatProofTree, i: usize) -> Step {
        let node = &self.nodes[i - 1];
        match node.rule.clone() {
            Rule::Forall { var, param } => {
                debug_assert_eq!(node.offsets, Offsets::One(1));
                let value = self.read(shape, i, &var, &param)?;
                self.env.bind_param(param.clone(), value.clone());
                self.rewrite_child(shape, i, &Term::Param(param), &value);
                self.retry_pending()
            }
            Rule::Exists { var, witness: t } => {
                let c = self.env.apply_term(&t);
                self.rewrite_child(shape, i, &t, &c);
                self.witnesses.push((var, c));
                Ok(())
            }
            Rule::Instance { term: t, .. } => {
                let c = self.env.apply_term(&t);
                self.rewrite_child(shape, i, &t, &c);
                Ok(())
            }
            Rule::Builtin => {
                let r = node.residual.clone().expect("builtin leaf carries its constraint");
                self.constraint(i, r)?;
                self.retry_pending()
            }
            Rule::Augment => self.check_hypothesis(i),
            _ => Ok(()),
        }
    }

    // A builtin hypothesis such as `nat(X)` guards the values read above it.
    // It is tested once ground and never binds anything; hypotheses that are
    // still open here stay trusted.
    fn check_hypothesis(&mut self, i: usize) -> Step {
        let GFormula::Implies(d, _) = &self.nodes[i - 1].sequent.goal else { return Ok(()) };
        let DFormula::Fact(a) = &**d else { return Ok(()) };
        let a = self.env.apply_term(a);
        if !a.is_ground() {
            return Ok(());
        }
        match recognize(&a).map(|r| eval_residual_with(&r, &self.env, self.opts.unify)) {
            Some(Err(violation)) => Err(ExecStatus::ResidualViolation { node: i, violation }),
            _ => Ok(()),
        }
    }

    fn read(&mut self, shape: &FlatProofTree, i: usize, var: &Name, param: &Param) -> Result<Term, ExecStatus> {
        let integer = self.needs_integer(shape, i, param);
        let mut req = ReadRequest {
            param: param.clone(),
            var: var.clone(),
            prompt: self.nodes[i - 1].sequent.to_string(),
            node: i,
            integer,
            attempt: 1,
            rejected: None,
        };
        loop {
            let text = match self.provider.request(&req) {
                Reply::Text(t) => t,
                Reply::Declined => return Err(ExecStatus::Aborted { node: i }),
            };
            match check_value(&text, integer) {
                Ok(value) => {
                    self.reads.push(ReadEvent {
                        param: param.clone(),
                        var: var.clone(),
                        prompt: req.prompt.clone(),
                        value: value.clone(),
                        node: i,
                    });
                    return Ok(value);
                }
                Err(why) if req.attempt < MAX_READ_ATTEMPTS => {
                    req.attempt += 1;
                    req.rejected = Some(why);
                }
                Err(_) => return Err(ExecStatus::Aborted { node: i }),
            }
        }
    }

    // A parameter needs an integer when some builtin leaf below the node uses
    // it in arithmetic.
    fn needs_integer(&self, shape: &FlatProofTree, i: usize, param: &Param) -> bool {
        let p = Term::Param(param.clone());
        let block = shape.block(i).expect("validated tree");
        self.nodes[block.start() - 1..*block.end()]
            .iter()
            .filter_map(|n| n.residual.as_ref())
            .any(|r| r.arithmetic_mentions(&p))
    }

    fn rewrite_child(&mut self, shape: &FlatProofTree, i: usize, from: &Term, to: &Term) {
        if from == to {
            return;
        }
        let block = shape.block(i - 1).expect("validated tree");
        for n in &mut self.nodes[block.start() - 1..*block.end()] {
            n.sequent = n.sequent.replace_term(from, to);
            n.rule = n.rule.replace_term(from, to);
            if let Some(r) = &mut n.residual {
                *r = r.replace(from, to);
            }
        }
    }

    fn constraint(&mut self, i: usize, r: Residual) -> Step {
        match eval_residual_with(&r, &self.env, self.opts.unify) {
            Ok(env) => {
                self.extend(env);
                Ok(())
            }
            Err(Violation::NonGround) => {
                self.pending.push((i, r));
                Ok(())
            }
            Err(violation) => Err(ExecStatus::ResidualViolation { node: i, violation }),
        }
    }

    // Re-evaluates waiting constraints until none makes progress.
    fn retry_pending(&mut self) -> Step {
        loop {
            let before = self.pending.len();
            for (i, r) in std::mem::take(&mut self.pending) {
                self.constraint(i, r)?;
            }
            if self.pending.len() == before {
                return Ok(());
            }
        }
    }

    // Adopts an environment computed from the current one by adding
    // bindings. Existing bindings are never overwritten.
    fn extend(&mut self, env: Substitution) {
        debug_assert!(self.env.params().all(|(p, t)| env.get_param(p) == Some(t)));
        debug_assert!(self.env.vars().all(|(v, _)| env.get(v).is_some()));
        self.env = env;
    }
}

fn check_value(text: &str, integer: bool) -> Result<Term, String> {
    let t = parse_term(text).map_err(|e| e.to_string())?;
    let mut vars = BTreeSet::new();
    t.collect_vars(&mut vars);
    if let Some(v) = vars.first() {
        return Err(format!("expected a ground term, found variable {}", v.name));
    }
    if integer && !matches!(t, Term::Int(_)) {
        return Err(format!("expected an integer, found {t}"));
    }
    Ok(t)
}
