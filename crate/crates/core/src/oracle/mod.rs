//! Exact computations on boxes small enough to enumerate: partition
//! functions as Laurent polynomials, probability tables for every
//! representation, and distributional checks of the couplings.

pub mod coupling;
pub mod enumerate;
pub mod expansion;
pub mod laurent;
pub mod measure;

use serde::{Deserialize, Serialize};

use crate::complex::ComplexSpec;

pub use coupling::{exact_step, pushforward, verify_coupling, verify_stationarity, verify_wilson_identity, Dynamics};
pub use enumerate::{exact_z, numeric_z, wilson_expectation, GaugeEnumeration};
pub use expansion::{verify_current_expansion, verify_switching, SwitchingFunctional};
pub use laurent::{LaurentPoly, Sign};
pub use measure::{exact_measure, wilson_from_table, MeasureKind, MeasureTable};

/// Outcome of one exact check.
#[derive(Serialize, Deserialize, Clone, Debug, PartialEq)]
pub struct Report {
    pub check: String,
    pub complex: ComplexSpec,
    /// Edge supports of the loops involved.
    pub gamma: Vec<Vec<usize>>,
    pub params: serde_json::Value,
    pub lhs: String,
    pub rhs: String,
    /// Discrepancy in the units of the check (relative error or TV).
    pub metric: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}
