//! Direct transcription of the goal and clause productions, used to check
//! the classifier.

use fohh_core::{Formula, Term};

fn atomic(t: &Term) -> bool {
    matches!(t, Term::Const(_) | Term::Compound(..))
}

pub fn is_goal(f: &Formula) -> bool {
    match f {
        Formula::Atom(t) => atomic(t),
        Formula::And(a, b) => is_goal(a) && is_goal(b),
        Formula::Exists(_, g) | Formula::Forall(_, g) => is_goal(g),
        Formula::Implies(d, g) => is_clause(d) && is_goal(g),
    }
}

pub fn is_clause(f: &Formula) -> bool {
    match f {
        Formula::Atom(t) => atomic(t),
        Formula::Implies(g, a) => is_goal(g) && matches!(&**a, Formula::Atom(t) if atomic(t)),
        Formula::Forall(_, d) => is_clause(d),
        Formula::And(..) | Formula::Exists(..) => false,
    }
}
