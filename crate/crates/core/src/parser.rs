//! Concrete syntax.
//!
//! Prolog-flavoured: uppercase identifiers are variables, lowercase ones are
//! constants and functors, `,` is conjunction, `H :- B` is a clause,
//! `D => G` is a hypothetical goal and `forall X (G)` / `exists X (G)` bind
//! explicitly. Capitalised variables of a program clause are universally
//! closed at the clause level, in order of first occurrence. Goals must bind
//! every variable they use.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::builtins;
use crate::formula::{DFormula, Formula, GFormula, Program};
use crate::term::{Name, Term};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{line}:{column}: {message}", line = span.line, column = span.column)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Lower(String),
    Upper(String),
    Int(u64),
    LParen,
    RParen,
    Comma,
    Dot,
    Neck,
    Arrow,
    Plus,
    Minus,
    Star,
    Lt,
    Le,
    Eq,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Lower(s) | Tok::Upper(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Dot => f.write_str("`.`"),
            Tok::Neck => f.write_str("`:-`"),
            Tok::Arrow => f.write_str("`=>`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Lt => f.write_str("`<`"),
            Tok::Le => f.write_str("`=<`"),
            Tok::Eq => f.write_str("`=`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

/// Infix operators the term syntax understands, with their precedence.
pub const INFIX_OPERATORS: [(&str, u32); 7] =
    [("is", 700), ("=", 700), ("<", 700), ("=<", 700), ("+", 500), ("-", 500), ("*", 400)];

pub(crate) fn infix_precedence(functor: &str) -> Option<u32> {
    INFIX_OPERATORS.iter().find(|(f, _)| *f == functor).map(|(_, p)| *p)
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn span_from(&self, start: usize, line: usize, column: usize) -> SourceSpan {
        SourceSpan { start, end: self.pos, line, column }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '%' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (start, line, column) = (self.pos, self.line, self.col);
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, self.span_from(start, line, column)));
                return Ok(out);
            };
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '<' => Tok::Lt,
                ':' if self.peek() == Some('-') => {
                    self.bump();
                    Tok::Neck
                }
                '=' if self.peek() == Some('>') => {
                    self.bump();
                    Tok::Arrow
                }
                '=' if self.peek() == Some('<') => {
                    self.bump();
                    Tok::Le
                }
                '=' => Tok::Eq,
                c if c.is_ascii_digit() => {
                    while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                        self.bump();
                    }
                    let digits = &self.src[start..self.pos];
                    match digits.parse::<u64>() {
                        Ok(n) if n <= i64::MAX as u64 + 1 => Tok::Int(n),
                        _ => {
                            return Err(ParseError {
                                message: format!("integer literal {digits} is out of range"),
                                span: self.span_from(start, line, column),
                            })
                        }
                    }
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                        self.bump();
                    }
                    let word = self.src[start..self.pos].to_string();
                    if c.is_ascii_lowercase() {
                        Tok::Lower(word)
                    } else {
                        Tok::Upper(word)
                    }
                }
                other => {
                    return Err(ParseError {
                        message: format!("illegal character {other:?}"),
                        span: self.span_from(start, line, column),
                    })
                }
            };
            // `.` directly followed by a digit would be a float; reject
            // rather than silently splitting it.
            if tok == Tok::Dot && self.peek().is_some_and(|c| c.is_ascii_digit()) {
                return Err(ParseError {
                    message: "floating point numbers are not supported".into(),
                    span: self.span_from(start, line, column),
                });
            }
            out.push((tok, self.span_from(start, line, column)));
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
    Lexer { src, pos: 0, line: 1, col: 1 }.tokens()
}

// Formula tree with source spans, converted to goals or clauses afterwards.
#[derive(Clone, Debug)]
enum Node {
    Atom(Term),
    And(Box<Spanned>, Box<Spanned>),
    Exists(Name, Box<Spanned>),
    Forall(Name, Box<Spanned>),
    Implies(Box<Spanned>, Box<Spanned>),
}

#[derive(Clone, Debug)]
struct Spanned {
    node: Node,
    span: SourceSpan,
}

impl Spanned {
    fn to_formula(&self) -> Formula {
        match &self.node {
            Node::Atom(t) => Formula::Atom(t.clone()),
            Node::And(a, b) => Formula::And(Box::new(a.to_formula()), Box::new(b.to_formula())),
            Node::Exists(x, g) => Formula::Exists(x.clone(), Box::new(g.to_formula())),
            Node::Forall(x, g) => Formula::Forall(x.clone(), Box::new(g.to_formula())),
            Node::Implies(a, b) => Formula::Implies(Box::new(a.to_formula()), Box::new(b.to_formula())),
        }
    }

    fn to_goal(&self) -> Result<GFormula, ParseError> {
        Ok(match &self.node {
            Node::Atom(t) => {
                if !t.is_atomic_formula() {
                    return Err(err("expected an atom", self.span));
                }
                GFormula::Atom(t.clone())
            }
            Node::And(a, b) => GFormula::and(a.to_goal()?, b.to_goal()?),
            Node::Exists(x, g) => GFormula::Exists(x.clone(), Box::new(g.to_goal()?)),
            Node::Forall(x, g) => GFormula::Forall(x.clone(), Box::new(g.to_goal()?)),
            Node::Implies(d, g) => {
                let d = d
                    .to_clause()
                    .map_err(|e| err(&format!("left side of `=>` is not a program clause: {}", e.message), d.span))?;
                GFormula::implies(d, g.to_goal()?)
            }
        })
    }

    fn to_clause(&self) -> Result<DFormula, ParseError> {
        Ok(match &self.node {
            Node::Atom(t) => {
                if !t.is_atomic_formula() {
                    return Err(err("expected an atom", self.span));
                }
                DFormula::Fact(t.clone())
            }
            Node::Forall(x, d) => DFormula::All(x.clone(), Box::new(d.to_clause()?)),
            Node::Implies(body, head) => match &head.node {
                Node::Atom(a) if a.is_atomic_formula() => DFormula::Clause(body.to_goal()?, a.clone()),
                _ => return Err(err("clause head must be an atom", head.span)),
            },
            Node::And(..) => return Err(err("a conjunction is not a program clause", self.span)),
            Node::Exists(..) => return Err(err("an existential is not a program clause", self.span)),
        })
    }
}

fn err(message: &str, span: SourceSpan) -> ParseError {
    ParseError { message: message.to_string(), span }
}

fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan { start: a.start, end: b.end.max(a.end), line: a.line, column: a.column }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
    anon: usize,
}

impl Parser {
    fn new(src: &str) -> Result<Parser, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, anon: 0 })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].1
    }

    fn advance(&mut self) -> (Tok, SourceSpan) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<SourceSpan, ParseError> {
        if *self.peek() == want {
            Ok(self.advance().1)
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, what: &str) -> ParseError {
        err(&format!("expected {what}, found {}", self.peek()), self.span())
    }

    // formula := conj [':-' conj]
    fn clause_formula(&mut self) -> Result<Spanned, ParseError> {
        let head = self.conj()?;
        if *self.peek() == Tok::Neck {
            self.advance();
            let body = self.conj()?;
            let span = join(head.span, body.span);
            return Ok(Spanned { node: Node::Implies(Box::new(body), Box::new(head)), span });
        }
        Ok(head)
    }

    fn conj(&mut self) -> Result<Spanned, ParseError> {
        let left = self.implication()?;
        if *self.peek() == Tok::Comma {
            self.advance();
            let right = self.conj()?;
            let span = join(left.span, right.span);
            return Ok(Spanned { node: Node::And(Box::new(left), Box::new(right)), span });
        }
        Ok(left)
    }

    fn implication(&mut self) -> Result<Spanned, ParseError> {
        let left = self.unary()?;
        if *self.peek() == Tok::Arrow {
            self.advance();
            let right = self.implication()?;
            let span = join(left.span, right.span);
            return Ok(Spanned { node: Node::Implies(Box::new(left), Box::new(right)), span });
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Spanned, ParseError> {
        let start = self.span();
        match (self.peek().clone(), self.peek_at(1).clone()) {
            (Tok::Lower(kw), Tok::Upper(x)) if kw == "forall" || kw == "exists" => {
                self.advance();
                self.advance();
                self.expect(Tok::LParen, "`(` after quantified variable")?;
                let body = self.clause_formula()?;
                let end = self.expect(Tok::RParen, "`)` closing quantifier body")?;
                let x: Name = Arc::from(x.as_str());
                let node =
                    if kw == "forall" { Node::Forall(x, Box::new(body)) } else { Node::Exists(x, Box::new(body)) };
                Ok(Spanned { node, span: join(start, end) })
            }
            (Tok::LParen, _) => {
                let save = (self.pos, self.anon);
                self.advance();
                let attempt = self.clause_formula().and_then(|f| {
                    let end = self.expect(Tok::RParen, "`)`")?;
                    Ok((f, end))
                });
                match attempt {
                    Ok((f, end)) if !self.at_term_operator() => Ok(Spanned { node: f.node, span: join(start, end) }),
                    first => {
                        // Maybe a term that merely starts with a parenthesis.
                        (self.pos, self.anon) = save;
                        match self.term(700) {
                            Ok(t) => Ok(Spanned { node: Node::Atom(t), span: join(start, self.prev_span()) }),
                            Err(e) => Err(first.err().unwrap_or(e)),
                        }
                    }
                }
            }
            _ => {
                let t = self.term(700)?;
                Ok(Spanned { node: Node::Atom(t), span: join(start, self.prev_span()) })
            }
        }
    }

    fn at_term_operator(&self) -> bool {
        match self.peek() {
            Tok::Plus | Tok::Minus | Tok::Star | Tok::Lt | Tok::Le | Tok::Eq => true,
            Tok::Lower(w) => w == "is",
            _ => false,
        }
    }

    fn infix(&self) -> Option<(&'static str, u32)> {
        let op = match self.peek() {
            Tok::Lower(w) if w == "is" => "is",
            Tok::Eq => "=",
            Tok::Lt => "<",
            Tok::Le => "=<",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            _ => return None,
        };
        infix_precedence(op).map(|p| (op, p))
    }

    // Precedence climbing: 700 is non-associative, 500 left-, 400
    // right-associative.
    fn term(&mut self, max: u32) -> Result<Term, ParseError> {
        let mut left = self.primary()?;
        let mut left_prec = 0;
        while let Some((op, prec)) = self.infix() {
            if prec > max {
                break;
            }
            let right = match prec {
                700 => {
                    if left_prec >= 700 {
                        return Err(err("operator priority clash", self.span()));
                    }
                    self.advance();
                    self.term(699)?
                }
                500 => {
                    self.advance();
                    self.term(499)?
                }
                _ => {
                    self.advance();
                    self.term(400)?
                }
            };
            left = Term::compound(op, vec![left, right]);
            left_prec = prec;
        }
        Ok(left)
    }

    fn primary(&mut self) -> Result<Term, ParseError> {
        let (tok, span) = self.advance();
        match tok {
            Tok::Int(n) => {
                if n > i64::MAX as u64 {
                    return Err(err("integer literal is out of range", span));
                }
                Ok(Term::Int(n as i64))
            }
            Tok::Minus => match self.peek().clone() {
                Tok::Int(n) => {
                    self.advance();
                    let v = (n as i128).checked_neg().filter(|v| *v >= i64::MIN as i128);
                    Ok(Term::Int(v.ok_or_else(|| err("integer literal is out of range", span))? as i64))
                }
                _ => {
                    let inner = self.primary()?;
                    Ok(Term::compound("-", vec![inner]))
                }
            },
            Tok::Upper(name) => {
                if name == "_" {
                    self.anon += 1;
                    Ok(Term::var(&format!("_{}", self.anon)))
                } else {
                    Ok(Term::var(&name))
                }
            }
            Tok::Lower(name) => {
                if *self.peek() == Tok::LParen {
                    self.advance();
                    let mut args = vec![self.term(999)?];
                    while *self.peek() == Tok::Comma {
                        self.advance();
                        args.push(self.term(999)?);
                    }
                    self.expect(Tok::RParen, "`,` or `)` in argument list")?;
                    Ok(Term::compound(&name, args))
                } else {
                    Ok(Term::constant(&name))
                }
            }
            Tok::LParen => {
                let t = self.term(999)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            other => Err(err(&format!("expected a term, found {other}"), span)),
        }
    }
}

/// Parses program text. Every clause ends with `.`.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut p = Parser::new(text)?;
    let mut clauses = Vec::new();
    while *p.peek() != Tok::Eof {
        p.anon = 0;
        let f = p.clause_formula()?;
        if *p.peek() != Tok::Dot {
            let message = if *p.peek() == Tok::Eof {
                "unterminated clause: missing `.`".to_string()
            } else {
                format!("expected `.` at end of clause, found {}", p.peek())
            };
            return Err(err(&message, p.span()));
        }
        p.advance();
        let d = close_clause(f.to_clause()?);
        if let Err(e) = builtins::check_clause(&d) {
            return Err(err(&e.at(clauses.len()).to_string(), f.span));
        }
        clauses.push(d);
    }
    Ok(Program::new(clauses).expect("parsed clauses are closed and checked"))
}

/// Parses one clause (with or without the final `.`), closing free
/// variables.
pub fn parse_clause(text: &str) -> Result<DFormula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.clause_formula()?;
    if *p.peek() == Tok::Dot {
        p.advance();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of clause"));
    }
    Ok(close_clause(f.to_clause()?))
}

fn close_clause(d: DFormula) -> DFormula {
    d.free_vars_in_order().into_iter().rev().fold(d, |acc, v| DFormula::All(v.name, Box::new(acc)))
}

/// Parses a goal. A trailing `.` is accepted.
pub fn parse_goal(text: &str) -> Result<GFormula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.conj()?;
    if *p.peek() == Tok::Dot {
        p.advance();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of goal"));
    }
    let g = f.to_goal()?;
    let mut free = Vec::new();
    g.free_vars_in_order(&mut Vec::new(), &mut free);
    if let Some(v) = free.first() {
        return Err(err(
            &format!(
                "variable {} is not bound in the goal; use `exists {} (...)` or `forall {} (...)`",
                v.name, v.name, v.name
            ),
            f.span,
        ));
    }
    Ok(g)
}

/// Parses a raw connective tree without deciding goal or clause.
pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.clause_formula()?;
    if *p.peek() == Tok::Dot {
        p.advance();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of formula"));
    }
    Ok(f.to_formula())
}

/// Parses a single term, as typed at a read prompt.
pub fn parse_term(text: &str) -> Result<Term, ParseError> {
    let mut p = Parser::new(text)?;
    let t = p.term(999)?;
    if *p.peek() == Tok::Dot {
        p.advance();
    }
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected("end of term"));
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::{classify, Class};

    fn v(n: &str) -> Term {
        Term::var(n)
    }

    fn app(f: &str, args: Vec<Term>) -> Term {
        Term::compound(f, args)
    }

    fn atom(f: &str) -> GFormula {
        GFormula::Atom(Term::constant(f))
    }

    #[test]
    fn cube_clause() {
        let p = parse_program("cube(X,Y) :- nat(X), Y is X*X*X.").unwrap();
        let x = v("X");
        let body = GFormula::and(
            GFormula::Atom(app("nat", vec![x.clone()])),
            GFormula::Atom(app("is", vec![v("Y"), app("*", vec![x.clone(), app("*", vec![x.clone(), x.clone()])])])),
        );
        let expected =
            DFormula::all("X", DFormula::all("Y", DFormula::clause(body, app("cube", vec![v("X"), v("Y")]))));
        assert_eq!(p.clauses(), &[expected]);
    }

    #[test]
    fn fact() {
        let p = parse_program("p.").unwrap();
        assert_eq!(p.clauses(), &[DFormula::fact(Term::constant("p"))]);
    }

    #[test]
    fn cube_goal() {
        let g = parse_goal("forall X (exists Y (nat(X) => cube(X,Y)))").unwrap();
        let expected = GFormula::forall(
            "X",
            GFormula::exists(
                "Y",
                GFormula::implies(
                    DFormula::fact(app("nat", vec![v("X")])),
                    GFormula::Atom(app("cube", vec![v("X"), v("Y")])),
                ),
            ),
        );
        assert_eq!(g, expected);
        assert_eq!(parse_goal("p").unwrap(), atom("p"));
    }

    #[test]
    fn clause_as_hypothesis() {
        let g = parse_goal("(r :- p, q) => r").unwrap();
        assert_eq!(
            g,
            GFormula::implies(DFormula::clause(GFormula::and(atom("p"), atom("q")), Term::constant("r")), atom("r"))
        );
        let d = parse_formula("r :- p, q").unwrap();
        assert_eq!(classify(&d), Class::DOnly);
    }

    #[test]
    fn conjunction_cannot_be_a_hypothesis() {
        let e = parse_goal("((p, q) => r)").unwrap_err();
        assert!(e.message.contains("left side of `=>`"), "{e}");
        assert!(parse_goal("exists X (p(X)) => q").is_err());
    }

    #[test]
    fn parse_errors_carry_spans() {
        let src = "p :- q";
        let e = parse_program(src).unwrap_err();
        assert!(e.message.contains("unterminated"));
        assert!(e.span.end <= src.len());

        let e = parse_program("p, q :- r.").unwrap_err();
        assert!(e.message.contains("head"), "{e}");

        let e = parse_program("p(a :- q.").unwrap_err();
        assert_eq!(e.span.line, 1);

        let e = parse_program("p :- q.\n  r $ s.").unwrap_err();
        assert_eq!((e.span.line, e.span.column), (2, 5));
        assert!(e.message.contains("illegal"));
    }

    #[test]
    fn redefining_a_builtin_is_rejected() {
        let e = parse_program("is(A,B) :- q.").unwrap_err();
        assert!(e.message.contains("redefines builtin is/2"), "{e}");
    }

    #[test]
    fn goal_variables_must_be_bound() {
        assert!(parse_goal("cube(3,Y)").is_err());
        assert!(parse_goal("exists Y (cube(3,Y))").is_ok());
    }

    #[test]
    fn arithmetic_precedence() {
        assert_eq!(
            parse_term("1 - 2 - 3").unwrap(),
            app("-", vec![app("-", vec![Term::Int(1), Term::Int(2)]), Term::Int(3)])
        );
        assert_eq!(
            parse_term("1 + 2 * 3").unwrap(),
            app("+", vec![Term::Int(1), app("*", vec![Term::Int(2), Term::Int(3)])])
        );
        assert_eq!(parse_term("3 - -5").unwrap(), app("-", vec![Term::Int(3), Term::Int(-5)]));
        assert!(parse_term("a < b < c").is_err());
    }

    #[test]
    fn parenthesised_term_at_goal_position() {
        let g = parse_goal("exists X ((1 + 2) * 3 = X)").unwrap();
        let GFormula::Exists(_, body) = g else { panic!() };
        assert_eq!(
            *body,
            GFormula::Atom(app(
                "=",
                vec![app("*", vec![app("+", vec![Term::Int(1), Term::Int(2)]), Term::Int(3)]), v("X")]
            ))
        );
    }

    #[test]
    fn anonymous_variables_are_distinct() {
        let p = parse_program("p(_, _).").unwrap();
        assert_eq!(p.clauses()[0].free_vars().len(), 0);
        let DFormula::All(a, rest) = &p.clauses()[0] else { panic!() };
        let DFormula::All(b, _) = &**rest else { panic!() };
        assert_ne!(a, b);
    }

    #[test]
    fn comments_are_skipped() {
        let p = parse_program("% cubes\np. % trailing\nq.").unwrap();
        assert_eq!(p.len(), 2);
    }
}
