//! Finite substitutions and capture-avoiding application.
//!
//! The unifier only ever binds [`Var`]s. Parameter bindings exist solely for
//! the execution phase, where user-supplied constants are recorded against
//! the parameters they instantiate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::formula::{DFormula, GFormula};
use crate::term::{Name, Param, Term, Var};

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Substitution {
    vars: BTreeMap<Var, Term>,
    params: BTreeMap<Param, Term>,
}

impl Substitution {
    pub fn new() -> Self {
        Substitution::default()
    }

    /// Builds a substitution from raw pairs without normalising. Identity
    /// pairs are dropped.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Var, Term)>) -> Self {
        let mut s = Substitution::new();
        for (v, t) in pairs {
            if t != Term::Var(v.clone()) {
                s.vars.insert(v, t);
            }
        }
        s
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty() && self.params.is_empty()
    }

    pub fn len(&self) -> usize {
        self.vars.len() + self.params.len()
    }

    pub fn get(&self, v: &Var) -> Option<&Term> {
        self.vars.get(v)
    }

    pub fn get_param(&self, p: &Param) -> Option<&Term> {
        self.params.get(p)
    }

    pub fn vars(&self) -> impl Iterator<Item = (&Var, &Term)> {
        self.vars.iter()
    }

    pub fn params(&self) -> impl Iterator<Item = (&Param, &Term)> {
        self.params.iter()
    }

    /// Looks a variable up by name alone, ignoring its level.
    pub fn lookup(&self, name: &str) -> Option<&Term> {
        self.vars.iter().find(|(v, _)| &*v.name == name).map(|(_, t)| t)
    }

    /// Adds `v ↦ t` keeping the substitution idempotent: `t` is normalised
    /// under the current bindings and the new binding is pushed through the
    /// existing range. The caller is responsible for occurs and scope checks.
    pub fn bind(&mut self, v: Var, t: Term) {
        let t = self.apply_term(&t);
        if t == Term::Var(v.clone()) {
            return;
        }
        let single = Substitution::from_pairs([(v.clone(), t.clone())]);
        for range in self.vars.values_mut() {
            if range.contains_var(&v) {
                *range = single.apply_term(range);
            }
        }
        for range in self.params.values_mut() {
            if range.contains_var(&v) {
                *range = single.apply_term(range);
            }
        }
        self.vars.insert(v, t);
    }

    /// Records the value a parameter was instantiated with. Panics if the
    /// parameter already has a binding: execution environments only grow.
    pub fn bind_param(&mut self, p: Param, t: Term) {
        let t = self.apply_term(&t);
        assert!(!self.params.contains_key(&p), "parameter {} bound twice", p.name);
        self.params.insert(p, t);
    }

    pub fn apply_term(&self, t: &Term) -> Term {
        if self.is_empty() {
            return t.clone();
        }
        match t {
            Term::Var(v) => self.vars.get(v).cloned().unwrap_or_else(|| t.clone()),
            Term::Param(p) => self.params.get(p).cloned().unwrap_or_else(|| t.clone()),
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| self.apply_term(a)).collect()),
            other => other.clone(),
        }
    }

    /// `apply(self, t) == apply(self, apply(self, t))` for every term.
    pub fn is_idempotent(&self) -> bool {
        let dom: BTreeSet<&Var> = self.vars.keys().collect();
        let pdom: BTreeSet<&Param> = self.params.keys().collect();
        self.vars.values().chain(self.params.values()).all(|t| {
            let mut vs = BTreeSet::new();
            t.collect_vars(&mut vs);
            let mut ps = BTreeSet::new();
            t.collect_params(&mut ps);
            vs.iter().all(|v| !dom.contains(v)) && ps.iter().all(|p| !pdom.contains(p))
        })
    }

    /// No variable is bound to a term mentioning a parameter from a deeper
    /// scope than its own.
    pub fn respects_scopes(&self) -> bool {
        self.vars.iter().all(|(v, t)| {
            let mut ps = BTreeSet::new();
            t.collect_params(&mut ps);
            ps.iter().all(|p| p.level <= v.level)
        })
    }

    /// Restriction to the given variables.
    pub fn restrict<'a>(&self, keep: impl IntoIterator<Item = &'a Var>) -> Substitution {
        let keep: BTreeSet<&Var> = keep.into_iter().collect();
        Substitution {
            vars: self.vars.iter().filter(|(v, _)| keep.contains(v)).map(|(v, t)| (v.clone(), t.clone())).collect(),
            params: BTreeMap::new(),
        }
    }

    fn without(&self, v: &Var) -> Substitution {
        let mut s = self.clone();
        s.vars.remove(v);
        s
    }

    fn range_vars(&self) -> BTreeSet<Var> {
        let mut vs = BTreeSet::new();
        for t in self.vars.values().chain(self.params.values()) {
            t.collect_vars(&mut vs);
        }
        vs
    }

    /// `apply(compose(a, b), t) == apply(b, apply(a, t))`.
    pub fn compose(&self, other: &Substitution) -> Substitution {
        let mut out = Substitution::new();
        for (v, t) in &self.vars {
            let t = other.apply_term(t);
            if t != Term::Var(v.clone()) {
                out.vars.insert(v.clone(), t);
            }
        }
        for (p, t) in &self.params {
            out.params.insert(p.clone(), other.apply_term(t));
        }
        for (v, t) in &other.vars {
            out.vars.entry(v.clone()).or_insert_with(|| t.clone());
        }
        for (p, t) in &other.params {
            out.params.entry(p.clone()).or_insert_with(|| t.clone());
        }
        out
    }
}

/// Anything a substitution can be applied to.
pub trait Substitute: Sized {
    fn apply(&self, s: &Substitution) -> Self;
}

impl Substitute for Term {
    fn apply(&self, s: &Substitution) -> Term {
        s.apply_term(self)
    }
}

impl Substitute for GFormula {
    fn apply(&self, s: &Substitution) -> GFormula {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            GFormula::Atom(t) => GFormula::Atom(s.apply_term(t)),
            GFormula::And(a, b) => GFormula::and(a.apply(s), b.apply(s)),
            GFormula::Exists(x, g) => {
                let (x, g) = under_binder(s, x, &**g, |g, s| g.apply(s), goal_free);
                GFormula::Exists(x, Box::new(g))
            }
            GFormula::Forall(x, g) => {
                let (x, g) = under_binder(s, x, &**g, |g, s| g.apply(s), goal_free);
                GFormula::Forall(x, Box::new(g))
            }
            GFormula::Implies(d, g) => GFormula::implies(d.apply(s), g.apply(s)),
        }
    }
}

impl Substitute for DFormula {
    fn apply(&self, s: &Substitution) -> DFormula {
        if s.is_empty() {
            return self.clone();
        }
        match self {
            DFormula::Fact(a) => DFormula::Fact(s.apply_term(a)),
            DFormula::Clause(g, a) => DFormula::Clause(g.apply(s), s.apply_term(a)),
            DFormula::All(x, d) => {
                let (x, d) = under_binder(s, x, &**d, |d, s| d.apply(s), clause_free);
                DFormula::All(x, Box::new(d))
            }
        }
    }
}

fn goal_free(g: &GFormula) -> BTreeSet<Var> {
    g.free_vars()
}

fn clause_free(d: &DFormula) -> BTreeSet<Var> {
    d.free_vars()
}

// Applies `s` beneath a binder for `x`, renaming the binder when a range
// term would otherwise be captured.
fn under_binder<F: Clone>(
    s: &Substitution,
    x: &Name,
    body: &F,
    apply: impl Fn(&F, &Substitution) -> F,
    free: impl Fn(&F) -> BTreeSet<Var>,
) -> (Name, F) {
    let bound = Var { name: x.clone(), level: 0 };
    let inner = s.without(&bound);
    if inner.is_empty() {
        return (x.clone(), body.clone());
    }
    let body_free = free(body);
    let relevant = inner.restrict(body_free.iter());
    let mut relevant_params = relevant.clone();
    relevant_params.params = inner.params.clone();
    if relevant_params.is_empty() {
        return (x.clone(), body.clone());
    }
    if !relevant_params.range_vars().contains(&bound) {
        return (x.clone(), apply(body, &relevant_params));
    }
    let mut avoid: BTreeSet<Name> = body_free.iter().map(|v| v.name.clone()).collect();
    avoid.extend(relevant_params.range_vars().into_iter().map(|v| v.name));
    let fresh = fresh_binder(x, &avoid);
    let renaming = Substitution::from_pairs([(bound, Term::Var(Var { name: fresh.clone(), level: 0 }))]);
    let renamed = apply(body, &renaming);
    (fresh, apply(&renamed, &relevant_params))
}

fn fresh_binder(x: &Name, avoid: &BTreeSet<Name>) -> Name {
    (1..).map(|i| Arc::<str>::from(format!("{x}{i}"))).find(|n| !avoid.contains(n)).expect("unbounded search")
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        let mut first = true;
        for (v, t) in &self.vars {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{v} -> {t}")?;
        }
        for (p, t) in &self.params {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{p} -> {t}")?;
        }
        f.write_str("}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn c(n: &str) -> Term {
        Term::constant(n)
    }

    fn app(f: &str, args: Vec<Term>) -> Term {
        Term::compound(f, args)
    }

    #[test]
    fn apply_single_binding() {
        let s = Substitution::from_pairs([(Var::bound("X"), Term::Int(5))]);
        assert_eq!(app("cube", vec![v("X"), v("Y")]).apply(&s), app("cube", vec![Term::Int(5), v("Y")]));
    }

    #[test]
    fn empty_is_identity() {
        let g = GFormula::forall("X", GFormula::Atom(app("p", vec![v("X"), v("Z")])));
        assert_eq!(g.apply(&Substitution::new()), g);
    }

    #[test]
    fn application_is_simultaneous() {
        let s = Substitution::from_pairs([(Var::bound("X"), app("f", vec![v("Y")])), (Var::bound("Y"), c("a"))]);
        assert_eq!(app("p", vec![v("X"), v("Y")]).apply(&s), app("p", vec![app("f", vec![v("Y")]), c("a")]));
    }

    #[test]
    fn binder_shadows_domain() {
        let g = GFormula::exists("X", GFormula::Atom(app("p", vec![v("X")])));
        let s = Substitution::from_pairs([(Var::bound("X"), c("a"))]);
        assert_eq!(g.apply(&s), g);
    }

    #[test]
    fn binder_is_renamed_to_avoid_capture() {
        // (∃X p(X, Z))[X/Z] must not capture.
        let g = GFormula::exists("X", GFormula::Atom(app("p", vec![v("X"), v("Z")])));
        let s = Substitution::from_pairs([(Var::bound("Z"), v("X"))]);
        let out = g.apply(&s);
        match out {
            GFormula::Exists(x, body) => {
                assert_eq!(&*x, "X1");
                assert_eq!(*body, GFormula::Atom(app("p", vec![v("X1"), v("X")])));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bind_keeps_idempotence() {
        let mut s = Substitution::new();
        s.bind(Var::bound("X"), v("Y"));
        s.bind(Var::bound("Y"), c("a"));
        assert!(s.is_idempotent());
        assert_eq!(s.get(&Var::bound("X")), Some(&c("a")));
    }

    #[test]
    fn compose_examples() {
        let t = Substitution::from_pairs([(Var::bound("X"), c("b"))]);
        assert_eq!(Substitution::new().compose(&t), t);
        assert_eq!(t.compose(&Substitution::new()), t);
        let a = Substitution::from_pairs([(Var::bound("X"), v("Y"))]);
        let b = Substitution::from_pairs([(Var::bound("Y"), c("a"))]);
        let ab = a.compose(&b);
        assert_eq!(ab, Substitution::from_pairs([(Var::bound("X"), c("a")), (Var::bound("Y"), c("a"))]));
        assert!(ab.is_idempotent());
    }

    #[test]
    fn params_substitute_only_through_param_bindings() {
        let p = Param::new("x#1", 1);
        let mut s = Substitution::new();
        s.bind_param(p.clone(), Term::Int(5));
        assert_eq!(Term::Param(p).apply(&s), Term::Int(5));
        assert_eq!(v("X").apply(&s), v("X"));
    }

    #[test]
    #[should_panic]
    fn params_cannot_be_rebound() {
        let p = Param::new("x#1", 1);
        let mut s = Substitution::new();
        s.bind_param(p.clone(), Term::Int(5));
        s.bind_param(p, Term::Int(6));
    }
}
