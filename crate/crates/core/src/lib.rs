// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod domain;
pub mod error;
pub mod fiber;
pub mod functionals;
pub mod solver;
pub mod sum;
pub mod thresholds;
