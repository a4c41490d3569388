use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::perm::PermError;

/// The configurable work limits. Tripping one makes a decision inconclusive
/// rather than failing it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Budget {
    MaxGroupOrder,
    EndoBudget,
    IsoBudget,
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Budget::MaxGroupOrder => "max_group_order",
            Budget::EndoBudget => "endo_budget",
            Budget::IsoBudget => "iso_budget",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GroupError {
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("{budget} exceeded (limit {limit})")]
    BudgetExceeded { budget: Budget, limit: usize },
    #[error("element set is not contained in the ambient group")]
    NotASubgroup,
    #[error("subgroup is not normal in the ambient group")]
    NotNormal,
    #[error("map does not have the expected domain")]
    DomainMismatch,
}

impl GroupError {
    pub fn budget(&self) -> Option<Budget> {
        match self {
            GroupError::BudgetExceeded { budget, .. } => Some(*budget),
            _ => None,
        }
    }
}
