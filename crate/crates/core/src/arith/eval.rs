use std::collections::BTreeMap;

use super::{Acf, ArithError, AtomicConstraint, Summand, Term, Valuation};
use crate::scalar::Scalar;

pub fn eval_term<S: Scalar>(t: &Term<S>, v: &Valuation<S>) -> Result<S, ArithError> {
    eval_term_by(t, &|a| v.get(a))
}

pub fn eval_atom<S: Scalar>(a: &AtomicConstraint<S>, v: &Valuation<S>) -> Result<bool, ArithError> {
    eval_atom_by(a, &|x| v.get(x))
}

pub fn eval_acf<S: Scalar>(f: &Acf<S>, v: &Valuation<S>) -> Result<bool, ArithError> {
    eval_acf_by(f, &|a| v.get(a))
}

/// Evaluates a term, looking variables up by agent name.
pub fn eval_term_by<'a, S: Scalar>(t: &Term<S>, lookup: &impl Fn(&str) -> Option<&'a S>) -> Result<S, ArithError> {
    let mut acc = S::zero();
    for s in t.summands() {
        match s {
            Summand::Const(c) => acc = acc + c.clone(),
            Summand::Var(u) => {
                let x = lookup(&u.agent).ok_or_else(|| ArithError::UnboundVariable(u.agent.clone()))?;
                acc = acc + x.clone();
            }
        }
    }
    Ok(acc)
}

pub fn eval_atom_by<'a, S: Scalar>(
    a: &AtomicConstraint<S>,
    lookup: &impl Fn(&str) -> Option<&'a S>,
) -> Result<bool, ArithError> {
    Ok(a.rel.holds(&eval_term_by(&a.lhs, lookup)?, &eval_term_by(&a.rhs, lookup)?))
}

pub fn eval_acf_by<'a, S: Scalar>(f: &Acf<S>, lookup: &impl Fn(&str) -> Option<&'a S>) -> Result<bool, ArithError> {
    Ok(match f {
        Acf::Const(b) => *b,
        Acf::Atom(a) => eval_atom_by(a, lookup)?,
        Acf::Not(x) => !eval_acf_by(x, lookup)?,
        // Both operands are evaluated so unbound variables are reported
        // regardless of short-circuiting.
        Acf::And(a, b) => {
            let (x, y) = (eval_acf_by(a, lookup)?, eval_acf_by(b, lookup)?);
            x && y
        }
        Acf::Or(a, b) => {
            let (x, y) = (eval_acf_by(a, lookup)?, eval_acf_by(b, lookup)?);
            !(!x && !y)
        }
    })
}

/// A value that is either exact or known only to exceed the cap.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sat<S> {
    Exact(S),
    Saturated,
}

impl<S: Scalar> Sat<S> {
    /// Caps an exact value: anything strictly above `cap` saturates.
    pub fn capped(value: S, cap: &S) -> Self {
        if &value > cap {
            Sat::Saturated
        } else {
            Sat::Exact(value)
        }
    }

    pub fn exact(&self) -> Option<&S> {
        match self {
            Sat::Exact(x) => Some(x),
            Sat::Saturated => None,
        }
    }

    pub fn is_saturated(&self) -> bool {
        matches!(self, Sat::Saturated)
    }
}

/// Sums a term where variables may be saturated. Saturation absorbs, and any
/// exact sum above `cap` saturates.
pub fn saturating_eval<S: Scalar>(t: &Term<S>, v: &BTreeMap<String, Sat<S>>, cap: &S) -> Result<Sat<S>, ArithError> {
    if !cap.is_positive() {
        return Err(ArithError::NonPositiveCap);
    }
    let mut acc = S::zero();
    let mut saturated = false;
    for s in t.summands() {
        match s {
            Summand::Const(c) => acc = acc + c.clone(),
            Summand::Var(u) => match v.get(&u.agent) {
                None => return Err(ArithError::UnboundVariable(u.agent.clone())),
                Some(Sat::Saturated) => saturated = true,
                Some(Sat::Exact(x)) => acc = acc + x.clone(),
            },
        }
    }
    if saturated {
        Ok(Sat::Saturated)
    } else {
        Ok(Sat::capped(acc, cap))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{parse_acf, parse_term};
    use crate::Payoff;

    fn q(s: &str) -> Payoff {
        Payoff::parse_rational(s).unwrap()
    }

    fn val(pairs: &[(&str, &str)]) -> Valuation<Payoff> {
        pairs.iter().map(|(k, v)| (k.to_string(), q(v))).collect()
    }

    #[test]
    fn term_examples() {
        let t = parse_term::<Payoff>("v_I + v_II").unwrap();
        assert_eq!(eval_term(&t, &val(&[("I", "2"), ("II", "2")])).unwrap(), q("4"));
        let t = parse_term::<Payoff>("v_I + 0").unwrap();
        assert_eq!(eval_term(&t, &val(&[("I", "-7")])).unwrap(), q("-7"));
        let t = parse_term::<Payoff>("v_I + v_I + 3").unwrap();
        assert_eq!(eval_term(&t, &val(&[("I", "1/2")])).unwrap(), q("4"));
    }

    #[test]
    fn unbound_variable_is_reported() {
        let t = parse_term::<Payoff>("v_I + v_II").unwrap();
        assert_eq!(eval_term(&t, &val(&[("I", "1")])), Err(ArithError::UnboundVariable("II".into())));
    }

    #[test]
    fn acf_examples() {
        let f = parse_acf::<Payoff>("v_I > 0").unwrap();
        assert!(!eval_acf(&f, &val(&[("I", "0")])).unwrap());
        let f = parse_acf::<Payoff>("v_I >= 0 & !(v_I = 0)").unwrap();
        assert!(!eval_acf(&f, &val(&[("I", "0")])).unwrap());
        let f = parse_acf::<Payoff>("v_1 >= 0 & v_1 = 0").unwrap();
        assert!(eval_acf(&f, &val(&[("1", "0")])).unwrap());
    }

    #[test]
    fn saturating_examples() {
        let t = parse_term::<Payoff>("v_1 + v_2").unwrap();
        let cap = q("5");
        let sv = |a: Sat<Payoff>, b: Sat<Payoff>| BTreeMap::from([("1".to_string(), a), ("2".to_string(), b)]);
        assert_eq!(saturating_eval(&t, &sv(Sat::Exact(q("3")), Sat::Saturated), &cap).unwrap(), Sat::Saturated);
        assert_eq!(saturating_eval(&t, &sv(Sat::Exact(q("2")), Sat::Exact(q("2"))), &cap).unwrap(), Sat::Exact(q("4")));
        assert_eq!(saturating_eval(&t, &sv(Sat::Exact(q("3")), Sat::Exact(q("3"))), &cap).unwrap(), Sat::Saturated);
        assert_eq!(
            saturating_eval(&t, &sv(Sat::Exact(q("3")), Sat::Exact(q("3"))), &q("0")),
            Err(ArithError::NonPositiveCap)
        );
    }
}
