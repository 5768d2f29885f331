//! Syntactic unification with occurs check and eigenvariable scope check.
//!
//! A variable of level `l` may only be bound to a term whose parameters all
//! have level `<= l`. Variables of a deeper level inside the bound term are
//! first lowered to `l` by binding them to a fresh variable at `l`, so that a
//! later binding cannot smuggle a deeper parameter out through them.

use std::collections::BTreeSet;
use std::fmt;

use crate::subst::Substitution;
use crate::term::{Term, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnifyFailure {
    Clash,
    Occurs,
    Scope,
}

impl fmt::Display for UnifyFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UnifyFailure::Clash => "clash",
            UnifyFailure::Occurs => "occurs check",
            UnifyFailure::Scope => "scope violation",
        })
    }
}

impl std::error::Error for UnifyFailure {}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnifyOptions {
    pub occurs_check: bool,
}

impl Default for UnifyOptions {
    fn default() -> Self {
        UnifyOptions { occurs_check: true }
    }
}

/// Most general unifier of `t1` and `t2` extending `theta`.
pub fn unify(t1: &Term, t2: &Term, theta: &Substitution) -> Result<Substitution, UnifyFailure> {
    unify_with(t1, t2, theta, UnifyOptions::default())
}

pub fn unify_with(
    t1: &Term,
    t2: &Term,
    theta: &Substitution,
    opts: UnifyOptions,
) -> Result<Substitution, UnifyFailure> {
    let mut out = theta.clone();
    unify_in_place(&mut out, t1, t2, opts)?;
    Ok(out)
}

/// In-place variant. On failure `theta` is left partially extended; callers
/// that need to backtrack keep their own copy.
pub fn unify_in_place(theta: &mut Substitution, t1: &Term, t2: &Term, opts: UnifyOptions) -> Result<(), UnifyFailure> {
    let mut pending = vec![(t1.clone(), t2.clone())];
    while let Some((a, b)) = pending.pop() {
        let a = theta.apply_term(&a);
        let b = theta.apply_term(&b);
        match (a, b) {
            (Term::Var(x), Term::Var(y)) => {
                if x == y {
                    continue;
                }
                // Bind the deeper variable to the shallower one; no lowering
                // is then ever needed for a variable-variable pair.
                if x.level >= y.level {
                    theta.bind(x, Term::Var(y));
                } else {
                    theta.bind(y, Term::Var(x));
                }
            }
            (Term::Var(x), t) | (t, Term::Var(x)) => bind_checked(theta, x, t, opts)?,
            (Term::Param(p), Term::Param(q)) => {
                if p != q {
                    return Err(UnifyFailure::Clash);
                }
            }
            (Term::Const(f), Term::Const(g)) => {
                if f != g {
                    return Err(UnifyFailure::Clash);
                }
            }
            (Term::Int(m), Term::Int(n)) => {
                if m != n {
                    return Err(UnifyFailure::Clash);
                }
            }
            (Term::Compound(f, xs), Term::Compound(g, ys)) => {
                if f != g || xs.len() != ys.len() {
                    return Err(UnifyFailure::Clash);
                }
                pending.extend(xs.into_iter().zip(ys).rev());
            }
            _ => return Err(UnifyFailure::Clash),
        }
    }
    Ok(())
}

fn bind_checked(theta: &mut Substitution, x: Var, t: Term, opts: UnifyOptions) -> Result<(), UnifyFailure> {
    if opts.occurs_check && t.contains_var(&x) {
        return Err(UnifyFailure::Occurs);
    }
    let mut params = BTreeSet::new();
    t.collect_params(&mut params);
    if params.iter().any(|p| p.level > x.level) {
        return Err(UnifyFailure::Scope);
    }
    let mut vars = BTreeSet::new();
    t.collect_vars(&mut vars);
    for deeper in vars.into_iter().filter(|v| v.level > x.level) {
        let lowered = Var::new(format!("{}~{}", deeper.name, x.level), x.level);
        theta.bind(deeper, Term::Var(lowered));
    }
    let t = theta.apply_term(&t);
    theta.bind(x, t);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Param;

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn app(f: &str, args: Vec<Term>) -> Term {
        Term::compound(f, args)
    }

    #[test]
    fn decomposition() {
        let s =
            unify(&app("cube", vec![v("X"), v("Y")]), &app("cube", vec![Term::Int(5), v("Z")]), &Substitution::new())
                .unwrap();
        assert_eq!(s, Substitution::from_pairs([(Var::bound("X"), Term::Int(5)), (Var::bound("Y"), v("Z"))]));
    }

    #[test]
    fn occurs_check() {
        let r = unify(&v("X"), &app("f", vec![v("X")]), &Substitution::new());
        assert_eq!(r, Err(UnifyFailure::Occurs));
        let opts = UnifyOptions { occurs_check: false };
        assert!(unify_with(&v("X"), &app("f", vec![v("X")]), &Substitution::new(), opts).is_ok());
    }

    #[test]
    fn scope_check() {
        let p = Term::Param(Param::new("p0", 1));
        assert_eq!(unify(&v("X"), &p, &Substitution::new()), Err(UnifyFailure::Scope));
        let deep = Term::Var(Var::new("Y", 1));
        assert!(unify(&deep, &p, &Substitution::new()).is_ok());
    }

    #[test]
    fn deeper_vars_are_lowered() {
        // X@0 = f(Y@1), then Y = p@1 must fail: it would make X depend on p.
        let y = Term::Var(Var::new("Y", 1));
        let p = Term::Param(Param::new("p", 1));
        let s = unify(&v("X"), &app("f", vec![y.clone()]), &Substitution::new()).unwrap();
        assert!(s.respects_scopes());
        assert_eq!(unify(&y, &p, &s), Err(UnifyFailure::Scope));
    }

    #[test]
    fn clash() {
        let r = unify(&Term::constant("a"), &Term::constant("b"), &Substitution::new());
        assert_eq!(r, Err(UnifyFailure::Clash));
        let r = unify(&app("f", vec![v("X")]), &app("f", vec![v("X"), v("Y")]), &Substitution::new());
        assert_eq!(r, Err(UnifyFailure::Clash));
        assert!(unify(&Term::Int(1), &Term::constant("a"), &Substitution::new()).is_err());
    }

    #[test]
    fn extends_input_substitution() {
        let theta = Substitution::from_pairs([(Var::bound("X"), Term::constant("a"))]);
        assert!(unify(&v("X"), &Term::constant("b"), &theta).is_err());
        let s = unify(&v("X"), &v("Y"), &theta).unwrap();
        assert_eq!(s.get(&Var::bound("Y")), Some(&Term::constant("a")));
        assert!(s.is_idempotent());
    }
}
