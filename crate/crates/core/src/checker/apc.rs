use super::CheckError;
use crate::arith::PathConstraint;
use crate::dynamics::{play_value, Play};
use crate::logic::BindError;
use crate::model::Gcgmp;
use crate::scalar::Scalar;

/// Compares the value of a lasso play for the constrained agent with the
/// constraint's bound.
pub fn check_apc_play<S: Scalar>(m: &Gcgmp<S>, p: &Play<S>, apc: &PathConstraint<S>) -> Result<bool, CheckError> {
    let agent = m.agent_index(&apc.agent).ok_or_else(|| BindError::UnknownAgent(apc.agent.clone()))?;
    Ok(apc.holds(&play_value(m, p, agent)?))
}
