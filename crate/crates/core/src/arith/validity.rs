use std::collections::BTreeSet;

use super::{eval_acf, Acf, ArithError, Valuation};
use crate::scalar::Scalar;

/// Outcome of a validity check. An invalid formula comes with a falsifying
/// value for its variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Validity<S> {
    Valid,
    Invalid { variable: Option<String>, witness: S },
}

impl<S> Validity<S> {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid)
    }
}

/// Decides whether a formula over at most one utility variable holds for
/// every rational value of that variable.
///
/// Each atom normalizes to `c * x rel d`, so its truth value can only change
/// at `x = d / c`. Between two consecutive such cut points the formula is
/// constant; it suffices to test every cut point, one point strictly between
/// each neighbouring pair, and one point beyond each end.
pub fn check_validity_single_var<S: Scalar>(f: &Acf<S>) -> Result<Validity<S>, ArithError> {
    let vars = f.vars();
    if vars.len() > 1 {
        return Err(ArithError::MultiVariable(vars.into_iter().collect()));
    }
    let var = vars.into_iter().next();
    let f = f.without_or();

    let mut cuts = BTreeSet::new();
    for atom in f.atoms() {
        let n = atom.normalize();
        if let Some((_, &c)) = n.coeffs.iter().next() {
            cuts.insert(n.constant / S::from_int(c));
        }
    }

    // Cut points first, so a failure exactly at a threshold is reported as
    // that threshold.
    let cuts: Vec<S> = cuts.into_iter().collect();
    let mut points: Vec<S> = cuts.clone();
    for w in cuts.windows(2) {
        points.push(S::midpoint(&w[0], &w[1]));
    }
    match (cuts.first(), cuts.last()) {
        (Some(lo), Some(hi)) => {
            points.push(lo.clone() - S::one());
            points.push(hi.clone() + S::one());
        }
        _ => points.push(S::zero()),
    }

    for x in points {
        let mut v = Valuation::new();
        if let Some(name) = &var {
            v.insert(name.clone(), x.clone());
        }
        if !eval_acf(&f, &v)? {
            return Ok(Validity::Invalid { variable: var, witness: x });
        }
    }
    Ok(Validity::Valid)
}
