//! Recursive-descent parser for formulas.
//!
//! ```text
//! path    := or ('U' path)?
//! or      := and ('|' and)*
//! and     := unary ('&' unary)*
//! unary   := '!' unary | 'X' unary | 'G' unary | 'F' unary
//!          | '<<' agents? '>>' unary | primary
//! primary := '(' path ')' | 'true' | 'false' | apc | term REL term | IDENT
//! ```
//!
//! Boolean operators over state formulas build state formulas, so a
//! top-level formula is well formed iff it parses to a state formula.

use super::{PathFormula, StateFormula};
use crate::arith::{parse_apc_rest, parse_atom_at, starts_term};
use crate::lexer::{tokenize, Cursor, ParseError, Tok};
use crate::scalar::Scalar;

const KEYWORDS: [&str; 6] = ["X", "G", "F", "U", "true", "false"];

pub fn parse_formula<S: Scalar>(text: &str) -> Result<StateFormula<S>, ParseError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let start = cur.pos();
    match parse_path_at(&mut cur)? {
        PathFormula::State(s) => {
            expect_eof(&cur)?;
            Ok(s)
        }
        _ => Err(ParseError {
            pos: start,
            expected: "a state formula (path operators must appear under <<...>>)".into(),
            found: "a path formula".into(),
        }),
    }
}

pub fn parse_path_formula<S: Scalar>(text: &str) -> Result<PathFormula<S>, ParseError> {
    let mut cur = Cursor::new(tokenize(text)?);
    let p = parse_path_at(&mut cur)?;
    expect_eof(&cur)?;
    Ok(p)
}

fn expect_eof(cur: &Cursor) -> Result<(), ParseError> {
    if *cur.peek() == Tok::Eof {
        Ok(())
    } else {
        Err(ParseError::at(cur, "an operator or end of input"))
    }
}

fn keyword(tok: &Tok, kw: &str) -> bool {
    matches!(tok, Tok::Ident(id) if id == kw)
}

fn parse_path_at<S: Scalar>(cur: &mut Cursor) -> Result<PathFormula<S>, ParseError> {
    let left = parse_or(cur)?;
    if keyword(cur.peek(), "U") {
        cur.bump();
        let right = parse_path_at(cur)?;
        return Ok(left.until(right));
    }
    Ok(left)
}

fn parse_or<S: Scalar>(cur: &mut Cursor) -> Result<PathFormula<S>, ParseError> {
    let mut left = parse_and(cur)?;
    while cur.eat(&Tok::Pipe) {
        left = left.or(parse_and(cur)?);
    }
    Ok(left)
}

fn parse_and<S: Scalar>(cur: &mut Cursor) -> Result<PathFormula<S>, ParseError> {
    let mut left = parse_unary(cur)?;
    while cur.eat(&Tok::Amp) {
        left = left.and(parse_unary(cur)?);
    }
    Ok(left)
}

fn parse_unary<S: Scalar>(cur: &mut Cursor) -> Result<PathFormula<S>, ParseError> {
    let tok = cur.peek().clone();
    match tok {
        Tok::Bang => {
            cur.bump();
            Ok(parse_unary(cur)?.not())
        }
        Tok::CoopOpen => {
            cur.bump();
            let agents = parse_agents(cur)?;
            let body = parse_unary(cur)?;
            Ok(StateFormula::Coop(agents, Box::new(body)).path())
        }
        Tok::Ident(ref id) if id == "X" => {
            cur.bump();
            Ok(parse_unary(cur)?.next())
        }
        Tok::Ident(ref id) if id == "G" => {
            cur.bump();
            Ok(parse_unary(cur)?.always())
        }
        Tok::Ident(ref id) if id == "F" => {
            cur.bump();
            Ok(parse_unary(cur)?.eventually())
        }
        _ => parse_primary(cur),
    }
}

fn parse_agents(cur: &mut Cursor) -> Result<Vec<String>, ParseError> {
    let mut agents = Vec::new();
    if cur.eat(&Tok::CoopClose) {
        return Ok(agents);
    }
    loop {
        match cur.peek().clone() {
            Tok::Ident(id) if !KEYWORDS.contains(&id.as_str()) => agents.push(id),
            // Numeric agent names such as `<<1>>`.
            Tok::Number(n) if n.bytes().all(|b| b.is_ascii_digit()) => agents.push(n),
            _ => return Err(ParseError::at(cur, "an agent name")),
        }
        cur.bump();
        if cur.eat(&Tok::CoopClose) {
            return Ok(agents);
        }
        if !cur.eat(&Tok::Comma) {
            return Err(ParseError::at(cur, "`,` or `>>`"));
        }
    }
}

fn parse_primary<S: Scalar>(cur: &mut Cursor) -> Result<PathFormula<S>, ParseError> {
    let tok = cur.peek().clone();
    match tok {
        Tok::LParen => {
            cur.bump();
            let inner = parse_path_at(cur)?;
            if !cur.eat(&Tok::RParen) {
                return Err(ParseError::at(cur, "`)`"));
            }
            Ok(inner)
        }
        Tok::Ident(ref id) if id == "true" => {
            cur.bump();
            Ok(StateFormula::True.path())
        }
        Tok::Ident(ref id) if id == "false" => {
            cur.bump();
            Ok(StateFormula::True.not().path())
        }
        Tok::Ident(ref id) if id.starts_with("w_") && id.len() > 2 => {
            let agent = id[2..].to_string();
            cur.bump();
            Ok(PathFormula::Apc(parse_apc_rest(cur, agent)?))
        }
        ref t if starts_term(t) => Ok(StateFormula::Constraint(parse_atom_at(cur)?).path()),
        Tok::Ident(ref id) if !KEYWORDS.contains(&id.as_str()) => {
            cur.bump();
            Ok(StateFormula::Atom(id.clone()).path())
        }
        _ => Err(ParseError::at(cur, "a proposition, constraint, `(`, `!`, `<<`, `X`, `G` or `F`")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{AtomicConstraint, Rel, Term};
    use crate::Payoff;

    fn sf(text: &str) -> StateFormula<Payoff> {
        parse_formula(text).unwrap()
    }

    fn gt0(agent: &str) -> StateFormula<Payoff> {
        StateFormula::Constraint(AtomicConstraint::new(Term::var(agent), Rel::Gt, Term::constant(Payoff::from_int(0))))
    }

    #[test]
    fn eventually_is_true_until() {
        let f = sf("<<I,II>> F (p1 & v_I > 100 & v_II > 100)");
        let StateFormula::Coop(agents, body) = f else {
            panic!("expected a coalition formula");
        };
        assert_eq!(agents, ["I", "II"]);
        assert!(matches!(
            *body,
            PathFormula::Until(ref a, ref b)
                if **a == PathFormula::State(StateFormula::True)
                && matches!(**b, PathFormula::State(StateFormula::And(..)))
        ));
    }

    #[test]
    fn always_positive() {
        assert_eq!(sf("<<a>> G (v_a > 0)"), StateFormula::coop(["a"], gt0("a").path().always()));
        assert_eq!(sf("<<a>> G v_a > 0"), sf("<<a>> G (v_a > 0)"));
    }

    #[test]
    fn path_constraint_under_coalition() {
        let f = sf("<<A>> (w_a >= 3)");
        assert!(matches!(f, StateFormula::Coop(_, ref b) if matches!(**b, PathFormula::Apc(_))));
    }

    #[test]
    fn coalition_binds_a_unary_body() {
        let f = sf("<<a>> X p & q");
        assert!(matches!(f, StateFormula::And(ref l, _) if matches!(**l, StateFormula::Coop(..))));
        let f = sf("<<1>> ((v_1 >= 0) U halt)");
        assert!(matches!(f, StateFormula::Coop(ref a, _) if a == &["1"]));
        assert!(matches!(sf("<<>> X p"), StateFormula::Coop(ref a, _) if a.is_empty()));
    }

    #[test]
    fn until_is_right_associative_and_lowest() {
        let p: PathFormula<Payoff> = parse_path_formula("a | b U c U d").unwrap();
        let PathFormula::Until(l, r) = p else { panic!() };
        assert!(matches!(*l, PathFormula::State(StateFormula::Or(..))));
        assert!(matches!(*r, PathFormula::Until(..)));
    }

    #[test]
    fn rejects_bare_path_formulas() {
        assert!(parse_formula::<Payoff>("X p").is_err());
        assert!(parse_formula::<Payoff>("p U q").is_err());
        assert!(parse_formula::<Payoff>("<<a> X p").is_err());
        assert!(parse_formula::<Payoff>("<<a>> X").is_err());
        let e = parse_formula::<Payoff>("p & ").unwrap_err();
        assert_eq!(e.pos, 4);
    }

    #[test]
    fn printing_round_trips() {
        for text in [
            "<<I,II>> F (p1 & v_I > 100 & v_II > 100)",
            "<<I>> G (p1 | v_I > 0)",
            "!<<a>> X p & (q | r)",
            "<<1>> ((v_1 >= 0 & !(e1 & !(v_1 = 0))) U halt)",
            "<<a,b>> (p U q U r)",
            "<<a>> ((p U q) U r)",
            "<<a>> (w_a >= 3/2 & X !p)",
            "<<>> G <<a>> F (v_a + 2 <= v_b)",
            "false | true",
        ] {
            let f = sf(text);
            let printed = f.to_string();
            assert_eq!(sf(&printed), f, "{text} printed as {printed}");
        }
        assert_eq!(sf("<<a>> G (v_a > 0)").to_string(), "<<a>> G (v_a > 0)");
        assert_eq!(sf("<<1>>F halt").to_string(), "<<1>> F halt");
    }
}
