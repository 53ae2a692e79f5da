//! Command-line driver, report emission, and the concrete differential oracle.

pub mod models;
pub mod interp;
pub mod spec_eval;
pub mod diff;
pub mod run;
