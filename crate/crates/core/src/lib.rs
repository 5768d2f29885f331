//! Proof search and interactive proof-tree execution for first-order
//! hereditary Harrop formulas.

pub mod builtins;
pub mod executor;
pub mod formula;
pub mod parser;
pub mod proof_tree;
pub mod prover;
pub mod render;
pub mod session;
pub mod subst;
pub mod term;
pub mod unify;

pub use builtins::{BuiltinKind, LoadError, Residual};
pub use executor::{
    execute, ExecStatus, ExecutionResult, InputProvider, ReadEvent, ReadRequest, Reply, ScriptedProvider,
};
pub use formula::{DFormula, Formula, GFormula, Program};
pub use parser::{parse_clause, parse_formula, parse_goal, parse_program, parse_term, ParseError};
pub use proof_tree::{FlatNode, FlatProofTree, Offsets};
pub use prover::{prove_tree, solve, Prover, Rule, SearchLimits, Sequent, StructuredProof, TreeProof};
pub use session::{ClientMessage, ServerEvent, Session, SessionConfig, SessionState};
pub use subst::{Substitute, Substitution};
pub use term::{Name, Param, Term, Var};
pub use unify::{unify, UnifyFailure, UnifyOptions};
