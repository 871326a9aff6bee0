//! Z2 lattice gauge theory on finite boxes of Z^m: exact oracles, the
//! random current representation, couplings between representations and
//! Monte Carlo estimators built on them.

pub mod cli;
pub mod complex;
pub mod error;
pub mod estimators;
pub mod forms;
pub mod gf2;
pub mod oracle;
pub mod real;
pub mod samplers;

pub use complex::{Cell, CellComplex, ComplexSpec};
pub use error::{Error, Result};
pub use forms::{Current, CouplingParams, GaugeField, Loop, LoopSpec, TwoFormZ2};
pub use gf2::{BitMatrix, BitVec};
pub use real::Real;
