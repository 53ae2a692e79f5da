//! Pure formulas over the integers extended with `inf` and `-inf`.
//!
//! Satisfiability of a formula with infinities is reduced to a formula
//! without them: desugar, normalize to a fixpoint, then replace every
//! surviving `inf` by a single fresh sentinel variable.

mod formula;
mod names;
mod normalize;
pub mod rules;
mod term;

pub use formula::{Atom, Formula, Rel};
pub use names::NameSupply;
pub use normalize::{
    desugar, eliminate_inf, eliminate_inf_with, normalize, normalize_atom, normalize_with_stats,
    InfElimResult, NormStats, DEFAULT_DISJUNCT_CAP,
};
pub use term::{canon_term, Lin, Term};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PureError {
    #[error("indeterminate form inf + -inf in `{0}`")]
    IndeterminateForm(String),
    #[error("disjunct limit {0} exceeded")]
    DisjunctLimit(usize),
}
