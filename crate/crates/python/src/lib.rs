use std::collections::BTreeMap;

use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyIndexError, PyValueError};
use pyo3::prelude::*;

use fohh_core::executor::{execute_with, ExecOptions, ExecStatus, ReadRequest, Reply};
use fohh_core::prover::{ProofFailure, Prover, SearchLimits};
use fohh_core::session::{ServerEvent, Session as CoreSession, SessionConfig};
use fohh_core::{parse_goal, parse_program, FlatProofTree, GFormula, UnifyOptions};

create_exception!(fohh, ParseError, PyValueError);
create_exception!(fohh, NoProof, PyException);
create_exception!(fohh, DepthExceeded, NoProof);

fn goal_arg(text: &str) -> PyResult<GFormula> {
    parse_goal(text).map_err(|e| ParseError::new_err(format!("goal:{e}")))
}

fn limits(depth: u32, solutions: usize) -> PyResult<SearchLimits> {
    SearchLimits::new(depth, solutions).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pyclass(module = "fohh", frozen)]
pub struct Program {
    inner: fohh_core::Program,
}

#[pymethods]
impl Program {
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        let inner = parse_program(text).map_err(|e| ParseError::new_err(e.to_string()))?;
        Ok(Program { inner })
    }

    /// The closed clauses, rendered.
    fn clauses(&self) -> Vec<String> {
        self.inner.clauses().iter().map(|d| d.to_string()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("Program(<{} clauses>)", self.inner.len())
    }
}

impl Program {
    fn prover(&self, depth: u32, solutions: usize, occurs_check: bool) -> PyResult<Prover> {
        Ok(Prover::new(self.inner.clone()).with_limits(limits(depth, solutions)?).with_occurs_check(occurs_check))
    }
}

#[pyclass(module = "fohh", frozen)]
pub struct ProofTree {
    inner: FlatProofTree,
    occurs_check: bool,
}

#[pymethods]
impl ProofTree {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// One dict per node in array order: index, rule, offsets, sequent.
    fn nodes(&self, py: Python<'_>) -> PyResult<Vec<Py<PyAny>>> {
        self.inner
            .records()
            .into_iter()
            .map(|r| {
                let d = pyo3::types::PyDict::new(py);
                d.set_item("index", r.index)?;
                d.set_item("rule", r.rule)?;
                d.set_item("offsets", r.offsets)?;
                d.set_item("sequent", r.sequent)?;
                Ok(d.into_any().unbind())
            })
            .collect()
    }

    fn children(&self, index: usize) -> PyResult<Vec<usize>> {
        self.inner.children(index).map_err(|e| PyIndexError::new_err(e.to_string()))
    }

    fn root(&self) -> usize {
        self.inner.len()
    }

    fn is_valid(&self) -> bool {
        self.inner.validate().is_ok()
    }

    fn paper_list(&self) -> String {
        self.inner.to_paper_list()
    }

    fn serialize(&self) -> String {
        self.inner.serialize()
    }

    fn __repr__(&self) -> String {
        format!("ProofTree(<{} nodes>)", self.inner.len())
    }
}

#[pyclass(module = "fohh", frozen, get_all)]
pub struct ExecutionResult {
    /// "completed", "violation" or "aborted".
    status: String,
    /// Node where execution stopped, if it did not complete.
    node: Option<usize>,
    witnesses: Vec<(String, String)>,
    answer: BTreeMap<String, String>,
    reads: Vec<(String, String, usize)>,
    visited: Vec<usize>,
}

#[pymethods]
impl ExecutionResult {
    fn completed(&self) -> bool {
        self.status == "completed"
    }

    fn __repr__(&self) -> String {
        format!("ExecutionResult(status={:?}, answer={:?})", self.status, self.answer)
    }
}

/// All phase-1 answers up to `solutions`, as name to term-text dicts.
#[pyfunction]
#[pyo3(signature = (program, goal, depth = 64, solutions = 1, occurs_check = true))]
fn solve(
    program: &Program,
    goal: &str,
    depth: u32,
    solutions: usize,
    occurs_check: bool,
) -> PyResult<Vec<BTreeMap<String, String>>> {
    let g = goal_arg(goal)?;
    let prover = program.prover(depth, solutions, occurs_check)?;
    Ok(prover.solve(&g).map(|s| s.vars().map(|(v, t)| (v.name.to_string(), t.to_string())).collect()).collect())
}

#[pyfunction]
#[pyo3(signature = (program, goal, depth = 64, occurs_check = true))]
fn prove_tree(program: &Program, goal: &str, depth: u32, occurs_check: bool) -> PyResult<ProofTree> {
    let g = goal_arg(goal)?;
    match program.prover(depth, 1, occurs_check)?.prove_tree(&g) {
        Ok(p) => Ok(ProofTree { inner: p.tree, occurs_check }),
        Err(ProofFailure::NoProof) => Err(NoProof::new_err("no proof")),
        Err(ProofFailure::DepthExceeded) => Err(DepthExceeded::new_err(format!("depth limit {depth} exceeded"))),
    }
}

/// Replays `tree`. `inputs` is a list of term texts consumed in order, or a
/// callable taking `(var, prompt, node, integer, rejected)` and returning
/// the term text, or None to give up.
#[pyfunction]
fn execute(tree: &ProofTree, inputs: Bound<'_, PyAny>) -> PyResult<ExecutionResult> {
    let mut error: Option<PyErr> = None;
    let result = if let Ok(list) = inputs.extract::<Vec<String>>() {
        let mut it = list.into_iter();
        let mut provider = |_: &ReadRequest| it.next().map_or(Reply::Declined, Reply::Text);
        execute_with(&tree.inner, &mut provider, options(tree))
    } else {
        if !inputs.is_callable() {
            return Err(PyValueError::new_err("inputs must be a list of strings or a callable"));
        }
        let mut provider = |req: &ReadRequest| {
            if error.is_some() {
                return Reply::Declined;
            }
            let args = (req.var.to_string(), req.prompt.clone(), req.node, req.integer, req.rejected.clone());
            match inputs.call1(args).and_then(|v| v.extract::<Option<String>>()) {
                Ok(Some(s)) => Reply::Text(s),
                Ok(None) => Reply::Declined,
                Err(e) => {
                    error = Some(e);
                    Reply::Declined
                }
            }
        };
        execute_with(&tree.inner, &mut provider, options(tree))
    };
    if let Some(e) = error {
        return Err(e);
    }
    let r = result.map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (status, node) = match &r.status {
        ExecStatus::Completed => ("completed", None),
        ExecStatus::ResidualViolation { node, .. } => ("violation", Some(*node)),
        ExecStatus::Aborted { node } => ("aborted", Some(*node)),
    };
    Ok(ExecutionResult {
        status: status.into(),
        node,
        witnesses: r.witnesses.iter().map(|(n, t)| (n.to_string(), t.to_string())).collect(),
        answer: r.answer(&tree.inner).into_iter().map(|(n, t)| (n.to_string(), t.to_string())).collect(),
        reads: r.reads.iter().map(|e| (e.var.to_string(), e.value.to_string(), e.node)).collect(),
        visited: r.visited.clone(),
    })
}

fn options(tree: &ProofTree) -> ExecOptions {
    ExecOptions { unify: UnifyOptions { occurs_check: tree.occurs_check } }
}

/// A protocol session. `send` takes one JSON message and returns the JSON
/// events it produced.
#[pyclass(module = "fohh", unsendable)]
pub struct Session {
    inner: CoreSession,
}

#[pymethods]
impl Session {
    #[new]
    #[pyo3(signature = (depth = 64, occurs_check = true))]
    fn new(depth: u32, occurs_check: bool) -> PyResult<Self> {
        let config = SessionConfig { limits: limits(depth, 1)?, unify: UnifyOptions { occurs_check } };
        Ok(Session { inner: CoreSession::new(config) })
    }

    fn send(&mut self, line: &str) -> Vec<String> {
        self.inner.handle_line(line).iter().map(ServerEvent::to_line).collect()
    }

    #[getter]
    fn state(&self) -> &'static str {
        self.inner.state().name()
    }
}

#[pymodule]
pub fn fohh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Program>()?;
    m.add_class::<ProofTree>()?;
    m.add_class::<ExecutionResult>()?;
    m.add_class::<Session>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(prove_tree, m)?)?;
    m.add_function(wrap_pyfunction!(execute, m)?)?;
    m.add("ParseError", m.py().get_type::<ParseError>())?;
    m.add("NoProof", m.py().get_type::<NoProof>())?;
    m.add("DepthExceeded", m.py().get_type::<DepthExceeded>())?;
    Ok(())
}
