//! Concrete syntax for terms, constraint formulas and path constraints.
//!
//! ```text
//! term   := atom ('+' atom)*         atom := 'v_' IDENT | RATIONAL
//! acf    := acf '|' acf | acf '&' acf | '!' acf | '(' acf ')' | term REL term
//! apc    := 'w_' IDENT REL RATIONAL
//! ```
//!
//! `&` binds tighter than `|`, `!` tightest. `true` and `false` are accepted
//! as constant formulas.

use super::{Acf, AtomicConstraint, PathConstraint, Rel, Summand, Term, UtilityVar};
use crate::lexer::{tokenize, Cursor, ParseError, Tok};
use crate::scalar::Scalar;

pub fn parse_term<S: Scalar>(text: &str) -> Result<Term<S>, ParseError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let t = parse_term_at(&mut cur)?;
    expect_eof(&cur)?;
    Ok(t)
}

pub fn parse_acf<S: Scalar>(text: &str) -> Result<Acf<S>, ParseError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let f = parse_or(&mut cur)?;
    expect_eof(&cur)?;
    Ok(f)
}

pub fn parse_apc<S: Scalar>(text: &str) -> Result<PathConstraint<S>, ParseError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let agent = match cur.peek().clone() {
        Tok::Ident(id) if id.starts_with("w_") && id.len() > 2 => {
            cur.bump();
            id[2..].to_string()
        }
        _ => return Err(ParseError::at(&cur, "path variable `w_<agent>`")),
    };
    let apc = parse_apc_rest(&mut cur, agent)?;
    expect_eof(&cur)?;
    Ok(apc)
}

pub(crate) fn parse_apc_rest<S: Scalar>(cur: &mut Cursor, agent: String) -> Result<PathConstraint<S>, ParseError> {
    let rel = parse_rel(cur)?;
    let bound = parse_number(cur)?;
    Ok(PathConstraint { agent, rel, bound })
}

fn expect_eof(cur: &Cursor) -> Result<(), ParseError> {
    if *cur.peek() == Tok::Eof {
        Ok(())
    } else {
        Err(ParseError::at(cur, "end of input"))
    }
}

pub(crate) fn parse_rel(cur: &mut Cursor) -> Result<Rel, ParseError> {
    let rel = match cur.peek() {
        Tok::Lt => Rel::Lt,
        Tok::Le => Rel::Le,
        Tok::Eq => Rel::Eq,
        Tok::Ge => Rel::Ge,
        Tok::Gt => Rel::Gt,
        _ => return Err(ParseError::at(cur, "one of `<`, `<=`, `=`, `>=`, `>`")),
    };
    cur.bump();
    Ok(rel)
}

fn parse_number<S: Scalar>(cur: &mut Cursor) -> Result<S, ParseError> {
    match cur.peek().clone() {
        Tok::Number(raw) => match S::parse_rational(&raw) {
            Some(x) => {
                cur.bump();
                Ok(x)
            }
            None => Err(ParseError::at(cur, "a rational with nonzero denominator")),
        },
        _ => Err(ParseError::at(cur, "a rational number")),
    }
}

/// Returns `true` if the next token can start a term.
pub(crate) fn starts_term(tok: &Tok) -> bool {
    match tok {
        Tok::Number(_) => true,
        Tok::Ident(id) => id.starts_with("v_") && id.len() > 2,
        _ => false,
    }
}

pub(crate) fn parse_term_at<S: Scalar>(cur: &mut Cursor) -> Result<Term<S>, ParseError> {
    let mut summands = vec![parse_summand(cur)?];
    while cur.eat(&Tok::Plus) {
        summands.push(parse_summand(cur)?);
    }
    Ok(Term::new(summands).expect("at least one summand"))
}

fn parse_summand<S: Scalar>(cur: &mut Cursor) -> Result<Summand<S>, ParseError> {
    match cur.peek().clone() {
        Tok::Ident(id) if id.starts_with("v_") && id.len() > 2 => {
            cur.bump();
            Ok(Summand::Var(UtilityVar::new(&id[2..])))
        }
        Tok::Number(_) => Ok(Summand::Const(parse_number(cur)?)),
        _ => Err(ParseError::at(cur, "utility variable `v_<agent>` or rational")),
    }
}

pub(crate) fn parse_atom_at<S: Scalar>(cur: &mut Cursor) -> Result<AtomicConstraint<S>, ParseError> {
    let lhs = parse_term_at(cur)?;
    let rel = parse_rel(cur)?;
    let rhs = parse_term_at(cur)?;
    Ok(AtomicConstraint::new(lhs, rel, rhs))
}

fn parse_or<S: Scalar>(cur: &mut Cursor) -> Result<Acf<S>, ParseError> {
    let mut left = parse_and(cur)?;
    while cur.eat(&Tok::Pipe) {
        left = left.or(parse_and(cur)?);
    }
    Ok(left)
}

fn parse_and<S: Scalar>(cur: &mut Cursor) -> Result<Acf<S>, ParseError> {
    let mut left = parse_unary(cur)?;
    while cur.eat(&Tok::Amp) {
        left = left.and(parse_unary(cur)?);
    }
    Ok(left)
}

fn parse_unary<S: Scalar>(cur: &mut Cursor) -> Result<Acf<S>, ParseError> {
    match cur.peek().clone() {
        Tok::Bang => {
            cur.bump();
            Ok(parse_unary(cur)?.not())
        }
        Tok::LParen => {
            cur.bump();
            let inner = parse_or(cur)?;
            if !cur.eat(&Tok::RParen) {
                return Err(ParseError::at(cur, "`)`"));
            }
            Ok(inner)
        }
        Tok::Ident(id) if id == "true" => {
            cur.bump();
            Ok(Acf::Const(true))
        }
        Tok::Ident(id) if id == "false" => {
            cur.bump();
            Ok(Acf::Const(false))
        }
        t if starts_term(&t) => Ok(Acf::Atom(parse_atom_at(cur)?)),
        _ => Err(ParseError::at(cur, "constraint, `!`, `(`, `true` or `false`")),
    }
}
