//! Learning nested k-DNF classifiers from boolean data, with exact checks of
//! their interpretability and explanations of their decisions.

pub mod bench;
pub mod dataio;
pub mod dtree;
pub mod dualize;
pub mod error;
pub mod formula;
pub mod interpret;
pub mod learner;
pub mod models;
pub mod nested;
pub mod truth_table;

pub use error::{Error, Result};
pub use fixedbitset::FixedBitSet;
pub use formula::{Assignment, DnfFormula, Literal, Term};
pub use truth_table::TruthTable;
