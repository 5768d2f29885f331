//! Goal formulas, program clauses and the raw connective trees they are
//! classified from.
//!
//! ```text
//! G ::= A | G ∧ G | ∃x G | ∀x G | D ⊃ G
//! D ::= A | G ⊃ A | ∀x D
//! ```

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::term::{Name, Param, Term, Var};

/// A goal.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GFormula {
    Atom(Term),
    And(Box<GFormula>, Box<GFormula>),
    Exists(Name, Box<GFormula>),
    Forall(Name, Box<GFormula>),
    Implies(Box<DFormula>, Box<GFormula>),
}

/// A program clause.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DFormula {
    Fact(Term),
    Clause(GFormula, Term),
    All(Name, Box<DFormula>),
}

impl GFormula {
    pub fn atom(t: Term) -> GFormula {
        GFormula::Atom(t)
    }

    pub fn and(a: GFormula, b: GFormula) -> GFormula {
        GFormula::And(Box::new(a), Box::new(b))
    }

    pub fn exists(x: &str, g: GFormula) -> GFormula {
        GFormula::Exists(Arc::from(x), Box::new(g))
    }

    pub fn forall(x: &str, g: GFormula) -> GFormula {
        GFormula::Forall(Arc::from(x), Box::new(g))
    }

    pub fn implies(d: DFormula, g: GFormula) -> GFormula {
        GFormula::Implies(Box::new(d), Box::new(g))
    }

    pub fn as_atom(&self) -> Option<&Term> {
        match self {
            GFormula::Atom(t) => Some(t),
            _ => None,
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn collect_free_vars(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Var>) {
        match self {
            GFormula::Atom(t) => collect_term_free(t, bound, out),
            GFormula::And(a, b) => {
                a.collect_free_vars(bound, out);
                b.collect_free_vars(bound, out);
            }
            GFormula::Exists(x, g) | GFormula::Forall(x, g) => {
                bound.push(x.clone());
                g.collect_free_vars(bound, out);
                bound.pop();
            }
            GFormula::Implies(d, g) => {
                d.collect_free_vars(bound, out);
                g.collect_free_vars(bound, out);
            }
        }
    }

    pub(crate) fn free_vars_in_order(&self, bound: &mut Vec<Name>, out: &mut Vec<Var>) {
        match self {
            GFormula::Atom(t) => term_free_in_order(t, bound, out),
            GFormula::And(a, b) => {
                a.free_vars_in_order(bound, out);
                b.free_vars_in_order(bound, out);
            }
            GFormula::Exists(x, g) | GFormula::Forall(x, g) => {
                bound.push(x.clone());
                g.free_vars_in_order(bound, out);
                bound.pop();
            }
            GFormula::Implies(d, g) => {
                d.free_in_order(bound, out);
                g.free_vars_in_order(bound, out);
            }
        }
    }

    pub fn collect_params(&self, out: &mut BTreeSet<Param>) {
        match self {
            GFormula::Atom(t) => t.collect_params(out),
            GFormula::And(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            GFormula::Exists(_, g) | GFormula::Forall(_, g) => g.collect_params(out),
            GFormula::Implies(d, g) => {
                d.collect_params(out);
                g.collect_params(out);
            }
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn depth(&self) -> usize {
        match self {
            GFormula::Atom(_) => 1,
            GFormula::And(a, b) => 1 + a.depth().max(b.depth()),
            GFormula::Exists(_, g) | GFormula::Forall(_, g) => 1 + g.depth(),
            GFormula::Implies(d, g) => 1 + d.depth().max(g.depth()),
        }
    }

    /// Structural term replacement through the whole formula.
    pub fn replace_term(&self, from: &Term, to: &Term) -> GFormula {
        match self {
            GFormula::Atom(t) => GFormula::Atom(t.replace(from, to)),
            GFormula::And(a, b) => GFormula::and(a.replace_term(from, to), b.replace_term(from, to)),
            GFormula::Exists(x, g) | GFormula::Forall(x, g) if shadows(x, from) => self.clone(),
            GFormula::Exists(x, g) => GFormula::Exists(x.clone(), Box::new(g.replace_term(from, to))),
            GFormula::Forall(x, g) => GFormula::Forall(x.clone(), Box::new(g.replace_term(from, to))),
            GFormula::Implies(d, g) => GFormula::implies(d.replace_term(from, to), g.replace_term(from, to)),
        }
    }
}

impl DFormula {
    pub fn fact(t: Term) -> DFormula {
        DFormula::Fact(t)
    }

    pub fn clause(body: GFormula, head: Term) -> DFormula {
        DFormula::Clause(body, head)
    }

    pub fn all(x: &str, d: DFormula) -> DFormula {
        DFormula::All(Arc::from(x), Box::new(d))
    }

    /// The head atom, under any number of `∀`s.
    pub fn head(&self) -> &Term {
        match self {
            DFormula::Fact(a) | DFormula::Clause(_, a) => a,
            DFormula::All(_, d) => d.head(),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free_vars(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn collect_free_vars(&self, bound: &mut Vec<Name>, out: &mut BTreeSet<Var>) {
        match self {
            DFormula::Fact(a) => collect_term_free(a, bound, out),
            DFormula::Clause(g, a) => {
                g.collect_free_vars(bound, out);
                collect_term_free(a, bound, out);
            }
            DFormula::All(x, d) => {
                bound.push(x.clone());
                d.collect_free_vars(bound, out);
                bound.pop();
            }
        }
    }

    /// Free variables in order of first occurrence, head before body.
    pub fn free_vars_in_order(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.free_in_order(&mut Vec::new(), &mut out);
        out
    }

    pub(crate) fn free_in_order(&self, bound: &mut Vec<Name>, out: &mut Vec<Var>) {
        match self {
            DFormula::Fact(a) => term_free_in_order(a, bound, out),
            DFormula::Clause(g, a) => {
                term_free_in_order(a, bound, out);
                g.free_vars_in_order(bound, out);
            }
            DFormula::All(x, d) => {
                bound.push(x.clone());
                d.free_in_order(bound, out);
                bound.pop();
            }
        }
    }

    pub fn collect_params(&self, out: &mut BTreeSet<Param>) {
        match self {
            DFormula::Fact(a) => a.collect_params(out),
            DFormula::Clause(g, a) => {
                g.collect_params(out);
                a.collect_params(out);
            }
            DFormula::All(_, d) => d.collect_params(out),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.free_vars().is_empty()
    }

    pub fn depth(&self) -> usize {
        match self {
            DFormula::Fact(_) => 1,
            DFormula::Clause(g, _) => 1 + g.depth(),
            DFormula::All(_, d) => 1 + d.depth(),
        }
    }

    pub fn replace_term(&self, from: &Term, to: &Term) -> DFormula {
        match self {
            DFormula::Fact(a) => DFormula::Fact(a.replace(from, to)),
            DFormula::Clause(g, a) => DFormula::Clause(g.replace_term(from, to), a.replace(from, to)),
            DFormula::All(x, _) if shadows(x, from) => self.clone(),
            DFormula::All(x, d) => DFormula::All(x.clone(), Box::new(d.replace_term(from, to))),
        }
    }
}

fn shadows(binder: &Name, t: &Term) -> bool {
    let mut vs = BTreeSet::new();
    t.collect_vars(&mut vs);
    vs.contains(&Var { name: binder.clone(), level: 0 })
}

fn is_bound(v: &Var, bound: &[Name]) -> bool {
    v.level == 0 && bound.contains(&v.name)
}

fn collect_term_free(t: &Term, bound: &[Name], out: &mut BTreeSet<Var>) {
    let mut vs = BTreeSet::new();
    t.collect_vars(&mut vs);
    out.extend(vs.into_iter().filter(|v| !is_bound(v, bound)));
}

fn term_free_in_order(t: &Term, bound: &[Name], out: &mut Vec<Var>) {
    let mut vs = Vec::new();
    t.vars_in_order(&mut vs);
    for v in vs {
        if !is_bound(&v, bound) && !out.contains(&v) {
            out.push(v);
        }
    }
}

/// An ordered list of closed clauses. Order is the clause-selection order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Program {
    clauses: Vec<DFormula>,
}

impl Program {
    pub fn empty() -> Program {
        Program::default()
    }

    /// Builds a program, rejecting open clauses and clauses that define a
    /// builtin predicate.
    pub fn new(clauses: Vec<DFormula>) -> Result<Program, crate::builtins::LoadError> {
        for (index, d) in clauses.iter().enumerate() {
            if !d.is_closed() {
                return Err(crate::builtins::LoadError::OpenClause { index });
            }
            crate::builtins::check_clause(d).map_err(|e| e.at(index))?;
        }
        Ok(Program { clauses })
    }

    pub fn clauses(&self) -> &[DFormula] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }
}

/// The raw connective tree a parser sees before it knows whether it is
/// looking at a goal or a clause. `Implies(a, b)` is `a ⊃ b`; Prolog's
/// `b :- a` is the same node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Atom(Term),
    And(Box<Formula>, Box<Formula>),
    Exists(Name, Box<Formula>),
    Forall(Name, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Class {
    GOnly,
    DOnly,
    Both,
    Neither,
}

impl Class {
    fn of(g: bool, d: bool) -> Class {
        match (g, d) {
            (true, true) => Class::Both,
            (true, false) => Class::GOnly,
            (false, true) => Class::DOnly,
            (false, false) => Class::Neither,
        }
    }

    pub fn is_goal(self) -> bool {
        matches!(self, Class::GOnly | Class::Both)
    }

    pub fn is_clause(self) -> bool {
        matches!(self, Class::DOnly | Class::Both)
    }
}

/// Membership of `f` in the goal and clause productions.
pub fn classify(f: &Formula) -> Class {
    let (g, d) = memberships(f);
    Class::of(g, d)
}

// One bottom-up pass computing (is_goal, is_clause) together.
fn memberships(f: &Formula) -> (bool, bool) {
    match f {
        Formula::Atom(t) => {
            let ok = t.is_atomic_formula();
            (ok, ok)
        }
        Formula::And(a, b) => {
            let (ga, _) = memberships(a);
            let (gb, _) = memberships(b);
            (ga && gb, false)
        }
        Formula::Exists(_, body) => (memberships(body).0, false),
        Formula::Forall(_, body) => {
            let (g, d) = memberships(body);
            (g, d)
        }
        Formula::Implies(lhs, rhs) => {
            let (gl, dl) = memberships(lhs);
            let (gr, _) = memberships(rhs);
            let rhs_atomic = matches!(&**rhs, Formula::Atom(t) if t.is_atomic_formula());
            (dl && gr, gl && rhs_atomic)
        }
    }
}

impl Formula {
    pub fn to_goal(&self) -> Option<GFormula> {
        Some(match self {
            Formula::Atom(t) if t.is_atomic_formula() => GFormula::Atom(t.clone()),
            Formula::Atom(_) => return None,
            Formula::And(a, b) => GFormula::and(a.to_goal()?, b.to_goal()?),
            Formula::Exists(x, g) => GFormula::Exists(x.clone(), Box::new(g.to_goal()?)),
            Formula::Forall(x, g) => GFormula::Forall(x.clone(), Box::new(g.to_goal()?)),
            Formula::Implies(d, g) => GFormula::implies(d.to_clause()?, g.to_goal()?),
        })
    }

    pub fn to_clause(&self) -> Option<DFormula> {
        Some(match self {
            Formula::Atom(t) if t.is_atomic_formula() => DFormula::Fact(t.clone()),
            Formula::Forall(x, d) => DFormula::All(x.clone(), Box::new(d.to_clause()?)),
            Formula::Implies(g, head) => match &**head {
                Formula::Atom(a) if a.is_atomic_formula() => DFormula::Clause(g.to_goal()?, a.clone()),
                _ => return None,
            },
            _ => return None,
        })
    }
}

impl From<&GFormula> for Formula {
    fn from(g: &GFormula) -> Formula {
        match g {
            GFormula::Atom(t) => Formula::Atom(t.clone()),
            GFormula::And(a, b) => Formula::And(Box::new((&**a).into()), Box::new((&**b).into())),
            GFormula::Exists(x, g) => Formula::Exists(x.clone(), Box::new((&**g).into())),
            GFormula::Forall(x, g) => Formula::Forall(x.clone(), Box::new((&**g).into())),
            GFormula::Implies(d, g) => Formula::Implies(Box::new((&**d).into()), Box::new((&**g).into())),
        }
    }
}

impl From<&DFormula> for Formula {
    fn from(d: &DFormula) -> Formula {
        match d {
            DFormula::Fact(a) => Formula::Atom(a.clone()),
            DFormula::Clause(g, a) => Formula::Implies(Box::new(g.into()), Box::new(Formula::Atom(a.clone()))),
            DFormula::All(x, d) => Formula::Forall(x.clone(), Box::new((&**d).into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(name: &str) -> Formula {
        Formula::Atom(Term::compound(name, vec![Term::constant("a")]))
    }

    fn imp(l: Formula, r: Formula) -> Formula {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    fn and(l: Formula, r: Formula) -> Formula {
        Formula::And(Box::new(l), Box::new(r))
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&a("p")), Class::Both);
        assert_eq!(classify(&and(a("p"), a("q"))), Class::GOnly);
        assert_eq!(classify(&imp(and(a("p"), a("q")), a("r"))), Class::DOnly);
        assert_eq!(classify(&imp(a("p"), and(a("q"), a("r")))), Class::GOnly);
    }

    #[test]
    fn non_atomic_terms_are_neither() {
        assert_eq!(classify(&Formula::Atom(Term::Int(3))), Class::Neither);
        assert_eq!(classify(&Formula::Atom(Term::var("X"))), Class::Neither);
    }

    #[test]
    fn exists_on_the_left_of_implication_is_neither() {
        let f = imp(Formula::Exists("X".into(), Box::new(a("p"))), a("q"));
        // ∃x p ⊃ q: the left side is not a clause and the right side is
        // atomic, but the left side is a goal, so this is a clause.
        assert_eq!(classify(&f), Class::DOnly);
        let g = imp(imp(Formula::Exists("X".into(), Box::new(a("p"))), and(a("q"), a("r"))), a("s"));
        assert_eq!(classify(&g), Class::Neither);
    }

    #[test]
    fn free_vars_in_first_occurrence_order() {
        let head = Term::compound("cube", vec![Term::var("X"), Term::var("Y")]);
        let body = GFormula::Atom(Term::compound("nat", vec![Term::var("Z")]));
        let d = DFormula::clause(body, head);
        let names: Vec<_> = d.free_vars_in_order().iter().map(|v| v.name.to_string()).collect();
        assert_eq!(names, ["X", "Y", "Z"]);
    }

    #[test]
    fn program_rejects_open_clauses() {
        let d = DFormula::fact(Term::compound("p", vec![Term::var("X")]));
        assert!(Program::new(vec![d.clone()]).is_err());
        assert!(Program::new(vec![DFormula::all("X", d)]).is_ok());
    }
}
