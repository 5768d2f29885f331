//! Pretty printing in the concrete syntax accepted by [`crate::parser`].
//! Anything the parser produced renders back to text that parses to the
//! same tree.

use std::fmt::{self, Display, Formatter, Write};

use crate::formula::{DFormula, GFormula, Program};
use crate::parser::infix_precedence;
use crate::term::{Name, Term};

impl Display for Term {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_term(f, self, 999)
    }
}

fn write_term(f: &mut Formatter<'_>, t: &Term, max: u32) -> fmt::Result {
    match t {
        Term::Var(v) => f.write_str(&v.name),
        Term::Param(p) => f.write_str(&p.name),
        Term::Const(c) => f.write_str(c),
        Term::Int(n) => write!(f, "{n}"),
        Term::Compound(name, args) => {
            if let (Some(prec), [l, r]) = (infix_precedence(name), args.as_slice()) {
                let (lmax, rmax) = match prec {
                    700 => (699, 699),
                    500 => (500, 499),
                    _ => (399, 400),
                };
                let paren = prec > max;
                if paren {
                    f.write_str("(")?;
                }
                write_term(f, l, lmax)?;
                write!(f, " {name} ")?;
                write_term(f, r, rmax)?;
                if paren {
                    f.write_str(")")?;
                }
                Ok(())
            } else if &**name == "-" && args.len() == 1 {
                f.write_str("-(")?;
                write_term(f, &args[0], 999)?;
                f.write_str(")")
            } else {
                write!(f, "{name}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write_term(f, a, 999)?;
                }
                f.write_str(")")
            }
        }
    }
}

// Formula levels, loosest first: clause (`:-`), conjunction, implication,
// unary.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Level {
    Clause,
    Conj,
    Impl,
    Unary,
}

fn write_goal(f: &mut Formatter<'_>, g: &GFormula, at: Level) -> fmt::Result {
    let needs = |own: Level| own < at;
    match g {
        GFormula::Atom(t) => write!(f, "{t}"),
        GFormula::And(a, b) => paren(f, needs(Level::Conj), |f| {
            write_goal(f, a, Level::Impl)?;
            f.write_str(", ")?;
            write_goal(f, b, Level::Conj)
        }),
        GFormula::Exists(x, body) => binder(f, "exists", x, |f| write_goal(f, body, Level::Clause)),
        GFormula::Forall(x, body) => binder(f, "forall", x, |f| write_goal(f, body, Level::Clause)),
        GFormula::Implies(d, body) => paren(f, needs(Level::Impl), |f| {
            write_clause(f, d, Level::Unary)?;
            f.write_str(" => ")?;
            write_goal(f, body, Level::Impl)
        }),
    }
}

fn write_clause(f: &mut Formatter<'_>, d: &DFormula, at: Level) -> fmt::Result {
    match d {
        DFormula::Fact(a) => write!(f, "{a}"),
        DFormula::Clause(body, head) => paren(f, at > Level::Clause, |f| {
            write!(f, "{head} :- ")?;
            write_goal(f, body, Level::Conj)
        }),
        DFormula::All(x, inner) => binder(f, "forall", x, |f| write_clause(f, inner, Level::Clause)),
    }
}

fn paren(f: &mut Formatter<'_>, on: bool, body: impl FnOnce(&mut Formatter<'_>) -> fmt::Result) -> fmt::Result {
    if on {
        f.write_str("(")?;
    }
    body(f)?;
    if on {
        f.write_str(")")?;
    }
    Ok(())
}

fn binder(
    f: &mut Formatter<'_>,
    kw: &str,
    x: &Name,
    body: impl FnOnce(&mut Formatter<'_>) -> fmt::Result,
) -> fmt::Result {
    write!(f, "{kw} {x} (")?;
    body(f)?;
    f.write_str(")")
}

impl Display for GFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_goal(f, self, Level::Conj)
    }
}

/// Renders a clause as a hypothesis or context entry: explicit binders, no
/// final `.`.
impl Display for DFormula {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        write_clause(f, self, Level::Clause)
    }
}

/// Renders a top-level program clause, leaving the leading `∀`s implicit
/// when they close exactly the clause's variables in first-occurrence order
/// (the order the parser would reintroduce them in).
pub fn render_clause(d: &DFormula) -> String {
    let mut binders = Vec::new();
    let mut core = d;
    while let DFormula::All(x, inner) = core {
        binders.push((x.clone(), &**inner));
        core = inner;
    }
    for k in (0..=binders.len()).rev() {
        let stripped = if k == 0 { d } else { binders[k - 1].1 };
        let names: Vec<&str> = binders[..k].iter().map(|(x, _)| &**x).collect();
        let free = stripped.free_vars_in_order();
        let free_names: Vec<&str> = free.iter().map(|v| &*v.name).collect();
        if free.iter().all(|v| v.level == 0) && free_names == names && implicit_names_ok(&names) {
            return format!("{stripped}.");
        }
    }
    format!("{d}.")
}

fn implicit_names_ok(names: &[&str]) -> bool {
    names.iter().all(|n| n.chars().next().is_some_and(|c| c.is_ascii_uppercase() || c == '_'))
}

pub fn render_program(p: &Program) -> String {
    let mut out = String::new();
    for d in p.clauses() {
        let _ = writeln!(out, "{}", render_clause(d));
    }
    out
}

impl Display for Program {
    fn fmt(&self, f: &mut Formatter<'_>) -> fmt::Result {
        f.write_str(&render_program(self))
    }
}
