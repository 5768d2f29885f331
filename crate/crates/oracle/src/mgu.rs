//! Brute-force characterisation of most general unifiers over a finite
//! universe of ground terms.
//!
//! For an idempotent mgu θ of `s` and `t`, a ground substitution ρ unifies
//! `s` and `t` exactly when ρ(θ(x)) = ρ(x) for every variable x. Both sides
//! are checked for every assignment of the variables to universe terms.

use std::collections::BTreeSet;

use fohh_core::{Substitution, Term, Var};

fn ground(t: &Term, rho: &[(Var, Term)]) -> Term {
    match t {
        Term::Var(v) => rho.iter().find(|(x, _)| x == v).map(|(_, g)| g.clone()).unwrap_or_else(|| t.clone()),
        Term::Compound(f, args) => Term::Compound(f.clone(), args.iter().map(|a| ground(a, rho)).collect()),
        other => other.clone(),
    }
}

fn assignments(vars: &[Var], universe: &[Term]) -> Vec<Vec<(Var, Term)>> {
    let mut out = vec![Vec::new()];
    for v in vars {
        let mut next = Vec::with_capacity(out.len() * universe.len());
        for partial in &out {
            for g in universe {
                let mut p = partial.clone();
                p.push((v.clone(), g.clone()));
                next.push(p);
            }
        }
        out = next;
    }
    out
}

fn vars_of(ts: &[&Term]) -> Vec<Var> {
    let mut set = BTreeSet::new();
    for t in ts {
        t.collect_vars(&mut set);
    }
    set.into_iter().collect()
}

/// Ground unifiers of `s` and `t` over `universe` exist.
pub fn unifiable_in(s: &Term, t: &Term, universe: &[Term]) -> bool {
    let vars = vars_of(&[s, t]);
    assignments(&vars, universe).iter().any(|rho| ground(s, rho) == ground(t, rho))
}

/// Checks the mgu characterisation above. Returns the first
/// counterexample assignment.
pub fn check_mgu(s: &Term, t: &Term, theta: &Substitution, universe: &[Term]) -> Result<(), String> {
    let mut terms: Vec<&Term> = vec![s, t];
    let ranges: Vec<Term> = theta.vars().map(|(_, r)| r.clone()).collect();
    terms.extend(ranges.iter());
    let vars = vars_of(&terms);
    let bound: Vec<Var> = theta.vars().map(|(v, _)| v.clone()).collect();
    let all_vars: Vec<Var> =
        vars.iter().cloned().chain(bound.iter().cloned()).collect::<BTreeSet<_>>().into_iter().collect();
    for rho in assignments(&all_vars, universe) {
        let unifies = ground(s, &rho) == ground(t, &rho);
        let factors = all_vars
            .iter()
            .all(|x| ground(&theta.apply_term(&Term::Var(x.clone())), &rho) == ground(&Term::Var(x.clone()), &rho));
        if unifies != factors {
            let shown: Vec<String> = rho.iter().map(|(v, g)| format!("{}={g}", v.name)).collect();
            return Err(format!("assignment [{}]: unifies={unifies}, factors through θ={factors}", shown.join(", ")));
        }
    }
    Ok(())
}
