//! First-order terms.
//!
//! Logic variables ([`Var`]) are instantiated by unification. Parameters
//! ([`Param`]) are the rigid eigenvariables introduced when a universally
//! quantified goal is reduced; no substitution produced by the unifier ever
//! binds one. Both carry a scope level used for the eigenvariable check.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

/// Interned-ish name. Cheap to clone, `Send + Sync`.
pub type Name = Arc<str>;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var {
    pub name: Name,
    pub level: u32,
}

impl Var {
    pub fn new(name: impl AsRef<str>, level: u32) -> Self {
        Var { name: Arc::from(name.as_ref()), level }
    }

    /// The variable a binder named `name` binds. Bound occurrences always
    /// live at level 0.
    pub fn bound(name: &str) -> Self {
        Var::new(name, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Param {
    pub name: Name,
    pub level: u32,
}

impl Param {
    pub fn new(name: impl AsRef<str>, level: u32) -> Self {
        Param { name: Arc::from(name.as_ref()), level }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Var(Var),
    Param(Param),
    Const(Name),
    Int(i64),
    /// Always has at least one argument; a nullary functor is a `Const`.
    Compound(Name, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::bound(name))
    }

    pub fn constant(name: &str) -> Term {
        Term::Const(Arc::from(name))
    }

    /// Builds `f(args)`, collapsing to a constant when `args` is empty.
    pub fn compound(functor: &str, args: Vec<Term>) -> Term {
        if args.is_empty() {
            Term::constant(functor)
        } else {
            Term::Compound(Arc::from(functor), args)
        }
    }

    /// Functor name and arity for constants and compounds.
    pub fn functor(&self) -> Option<(&str, usize)> {
        match self {
            Term::Const(c) => Some((c, 0)),
            Term::Compound(f, args) => Some((f, args.len())),
            _ => None,
        }
    }

    pub fn args(&self) -> &[Term] {
        match self {
            Term::Compound(_, args) => args,
            _ => &[],
        }
    }

    /// Constants and compounds are the only terms that may stand as atoms.
    pub fn is_atomic_formula(&self) -> bool {
        matches!(self, Term::Const(_) | Term::Compound(..))
    }

    /// No variables and no parameters.
    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) | Term::Param(_) => false,
            Term::Const(_) | Term::Int(_) => true,
            Term::Compound(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn contains_var(&self, v: &Var) -> bool {
        match self {
            Term::Var(w) => w == v,
            Term::Compound(_, args) => args.iter().any(|a| a.contains_var(v)),
            _ => false,
        }
    }

    pub fn contains_param(&self, p: &Param) -> bool {
        match self {
            Term::Param(q) => q == p,
            Term::Compound(_, args) => args.iter().any(|a| a.contains_param(p)),
            _ => false,
        }
    }

    pub fn has_params(&self) -> bool {
        match self {
            Term::Param(_) => true,
            Term::Compound(_, args) => args.iter().any(Term::has_params),
            _ => false,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            _ => {}
        }
    }

    pub fn collect_params(&self, out: &mut BTreeSet<Param>) {
        match self {
            Term::Param(p) => {
                out.insert(p.clone());
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.collect_params(out)),
            _ => {}
        }
    }

    /// Variables in order of first occurrence, left to right.
    pub fn vars_in_order(&self, out: &mut Vec<Var>) {
        match self {
            Term::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Term::Compound(_, args) => args.iter().for_each(|a| a.vars_in_order(out)),
            _ => {}
        }
    }

    /// Structural replacement of every occurrence of `from` by `to`.
    pub fn replace(&self, from: &Term, to: &Term) -> Term {
        if self == from {
            return to.clone();
        }
        match self {
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| a.replace(from, to)).collect()),
            other => other.clone(),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.args().iter().map(Term::size).sum::<usize>()
    }
}

impl From<i64> for Term {
    fn from(value: i64) -> Self {
        Term::Int(value)
    }
}

/// Fresh-name supply for one prover run.
///
/// Every name it hands out carries a run-unique counter, so two draws never
/// collide. Names are deterministic given the draw order.
#[derive(Clone, Debug, Default)]
pub struct NameSupply {
    next: u64,
}

impl NameSupply {
    pub fn new() -> Self {
        NameSupply::default()
    }

    fn bump(&mut self) -> u64 {
        self.next += 1;
        self.next
    }

    pub fn fresh_var(&mut self, hint: &str, level: u32) -> Var {
        let n = self.bump();
        Var::new(format!("{}_{}", base_hint(hint), n), level)
    }

    /// A new rigid parameter. The `#` in the name keeps parameters out of
    /// the namespace of anything the parser can produce.
    pub fn fresh_param(&mut self, hint: &str, level: u32) -> Param {
        let n = self.bump();
        Param::new(format!("{}#{}", base_hint(hint), n), level)
    }

    pub fn issued(&self) -> u64 {
        self.next
    }
}

/// Strips a previous freshening suffix so names do not grow without bound
/// (`X_3` becomes `X`).
fn base_hint(hint: &str) -> &str {
    let hint = hint.split('#').next().unwrap_or(hint);
    match hint.rfind('_') {
        Some(i) if i > 0 && hint[i + 1..].chars().all(|c| c.is_ascii_digit()) && i + 1 < hint.len() => &hint[..i],
        _ => hint,
    }
}

/// Stand-alone form of [`NameSupply::fresh_param`] for callers that own a
/// supply.
pub fn fresh_param(supply: &mut NameSupply, hint: &str, level: u32) -> Term {
    Term::Param(supply.fresh_param(hint, level))
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}
