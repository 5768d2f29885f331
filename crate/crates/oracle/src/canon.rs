//! Comparison of terms up to variable renaming.

use std::collections::BTreeMap;

use fohh_core::{Term, Var};

/// Renames variables to `V0, V1, …` in order of first occurrence.
pub fn canonical(t: &Term) -> Term {
    fn go(t: &Term, names: &mut BTreeMap<Var, usize>) -> Term {
        match t {
            Term::Var(v) => {
                let n = names.len();
                let k = *names.entry(v.clone()).or_insert(n);
                Term::Var(Var::new(format!("V{k}"), 0))
            }
            Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| go(a, names)).collect()),
            other => other.clone(),
        }
    }
    go(t, &mut BTreeMap::new())
}

/// Equal up to a bijective renaming of variables.
pub fn variant(a: &Term, b: &Term) -> bool {
    canonical(a) == canonical(b)
}
