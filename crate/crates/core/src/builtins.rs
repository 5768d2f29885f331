//! Primitive predicates: `is/2`, `</2`, `=</2`, `=/2` and `nat/1`.
//!
//! During proof search a builtin atom becomes a residual leaf. It is
//! evaluated on the spot only when it is ready (see [`Residual::is_ready`]);
//! otherwise it is carried on the leaf and evaluated by the executor once the
//! user has supplied the parameters it depends on.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::formula::DFormula;
use crate::subst::{Substitute, Substitution};
use crate::term::Term;
use crate::unify::{unify_with, UnifyOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BuiltinKind {
    Is,
    Lt,
    Le,
    Eq,
    Nat,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 5] =
        [BuiltinKind::Is, BuiltinKind::Lt, BuiltinKind::Le, BuiltinKind::Eq, BuiltinKind::Nat];

    pub fn functor(self) -> &'static str {
        match self {
            BuiltinKind::Is => "is",
            BuiltinKind::Lt => "<",
            BuiltinKind::Le => "=<",
            BuiltinKind::Eq => "=",
            BuiltinKind::Nat => "nat",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            BuiltinKind::Nat => 1,
            _ => 2,
        }
    }

    pub fn lookup(functor: &str, arity: usize) -> Option<BuiltinKind> {
        BuiltinKind::ALL.into_iter().find(|k| k.functor() == functor && k.arity() == arity)
    }
}

/// A builtin constraint, stored unevaluated.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Residual {
    pub kind: BuiltinKind,
    pub args: Vec<Term>,
}

impl Residual {
    pub fn to_atom(&self) -> Term {
        Term::compound(self.kind.functor(), self.args.clone())
    }

    pub fn apply(&self, s: &Substitution) -> Residual {
        Residual { kind: self.kind, args: self.args.iter().map(|a| a.apply(s)).collect() }
    }

    pub fn replace(&self, from: &Term, to: &Term) -> Residual {
        Residual { kind: self.kind, args: self.args.iter().map(|a| a.replace(from, to)).collect() }
    }

    /// Terms whose values the constraint consumes, i.e. everything except
    /// the output position of `is`.
    pub fn inputs(&self) -> &[Term] {
        match self.kind {
            BuiltinKind::Is => &self.args[1..],
            _ => &self.args,
        }
    }

    /// Whether the proof phase may evaluate the constraint now. Equality is
    /// plain unification and is always ready; the scope check keeps it
    /// sound in the presence of parameters. Everything else must have ground
    /// inputs.
    pub fn is_ready(&self, s: &Substitution) -> bool {
        match self.kind {
            BuiltinKind::Eq => true,
            _ => self.inputs().iter().all(|t| t.apply(s).is_ground()),
        }
    }

    /// Whether `t` appears inside an arithmetic position.
    pub fn arithmetic_mentions(&self, t: &Term) -> bool {
        let mentions = |e: &Term| contains_subterm(e, t);
        match self.kind {
            BuiltinKind::Is => mentions(&self.args[1]),
            BuiltinKind::Lt | BuiltinKind::Le => self.args.iter().any(mentions),
            BuiltinKind::Eq | BuiltinKind::Nat => false,
        }
    }
}

fn contains_subterm(haystack: &Term, needle: &Term) -> bool {
    haystack == needle || haystack.args().iter().any(|a| contains_subterm(a, needle))
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_atom(), f)
    }
}

/// Maps an atom to its builtin constraint, if it is one.
pub fn recognize(atom: &Term) -> Option<Residual> {
    let (f, n) = atom.functor()?;
    let kind = BuiltinKind::lookup(f, n)?;
    Some(Residual { kind, args: atom.args().to_vec() })
}

pub fn is_builtin(atom: &Term) -> bool {
    atom.functor().and_then(|(f, n)| BuiltinKind::lookup(f, n)).is_some()
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("clause {index} redefines builtin {functor}/{arity}")]
    Redefinition { index: usize, functor: String, arity: usize },
    #[error("clause {index} is not closed")]
    OpenClause { index: usize },
}

impl LoadError {
    pub(crate) fn at(self, index: usize) -> LoadError {
        match self {
            LoadError::Redefinition { functor, arity, .. } => LoadError::Redefinition { index, functor, arity },
            LoadError::OpenClause { .. } => LoadError::OpenClause { index },
        }
    }
}

/// Program clauses may not have a builtin head. Hypotheses added by
/// `D => G` goals are not checked: they never shadow the builtin, because
/// builtin goals are never backchained.
pub fn check_clause(d: &DFormula) -> Result<(), LoadError> {
    let head = d.head();
    match recognize(head) {
        Some(r) => {
            Err(LoadError::Redefinition { index: 0, functor: r.kind.functor().to_string(), arity: r.kind.arity() })
        }
        None => Ok(()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("arithmetic on unbound {0}")]
    NonGround(Term),
    #[error("{0} is not a number")]
    NonNumeric(Term),
    #[error("integer overflow")]
    Overflow,
}

/// Evaluates `+`, `-` (binary and unary), `*` and integer literals under
/// `env`, with checked 64-bit arithmetic.
pub fn eval_arith(e: &Term, env: &Substitution) -> Result<i64, ArithError> {
    match e {
        Term::Int(n) => Ok(*n),
        Term::Var(_) | Term::Param(_) => {
            let resolved = env.apply_term(e);
            if &resolved == e {
                Err(ArithError::NonGround(e.clone()))
            } else {
                eval_arith(&resolved, env)
            }
        }
        Term::Compound(f, args) => match (&**f, args.as_slice()) {
            ("+", [a, b]) => eval_arith(a, env)?.checked_add(eval_arith(b, env)?).ok_or(ArithError::Overflow),
            ("-", [a, b]) => eval_arith(a, env)?.checked_sub(eval_arith(b, env)?).ok_or(ArithError::Overflow),
            ("*", [a, b]) => eval_arith(a, env)?.checked_mul(eval_arith(b, env)?).ok_or(ArithError::Overflow),
            ("-", [a]) => eval_arith(a, env)?.checked_neg().ok_or(ArithError::Overflow),
            _ => Err(ArithError::NonNumeric(e.clone())),
        },
        Term::Const(_) => Err(ArithError::NonNumeric(e.clone())),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("constraint has unbound inputs")]
    NonGround,
    #[error("constraint is false")]
    False,
}

/// Evaluates `c` under `env`, returning the possibly extended environment.
pub fn eval_residual(c: &Residual, env: &Substitution) -> Result<Substitution, Violation> {
    eval_residual_with(c, env, UnifyOptions::default())
}

pub fn eval_residual_with(c: &Residual, env: &Substitution, opts: UnifyOptions) -> Result<Substitution, Violation> {
    let arith = |e: &Term| match eval_arith(e, env) {
        Ok(n) => Ok(n),
        Err(ArithError::NonGround(_)) => Err(Violation::NonGround),
        Err(_) => Err(Violation::False),
    };
    match c.kind {
        BuiltinKind::Is => {
            let value = arith(&c.args[1])?;
            match env.apply_term(&c.args[0]) {
                Term::Var(v) => {
                    let mut out = env.clone();
                    out.bind(v, Term::Int(value));
                    Ok(out)
                }
                Term::Int(n) if n == value => Ok(env.clone()),
                t if t.is_ground() => Err(Violation::False),
                _ => Err(Violation::NonGround),
            }
        }
        BuiltinKind::Lt | BuiltinKind::Le => {
            let l = arith(&c.args[0])?;
            let r = arith(&c.args[1])?;
            let holds = if c.kind == BuiltinKind::Lt { l < r } else { l <= r };
            if holds {
                Ok(env.clone())
            } else {
                Err(Violation::False)
            }
        }
        BuiltinKind::Eq => unify_with(&c.args[0], &c.args[1], env, opts).map_err(|_| Violation::False),
        BuiltinKind::Nat => match env.apply_term(&c.args[0]) {
            Term::Int(n) if n >= 0 => Ok(env.clone()),
            t if t.is_ground() => Err(Violation::False),
            _ => Err(Violation::NonGround),
        },
    }
}
