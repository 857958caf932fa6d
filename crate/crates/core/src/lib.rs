//! Step-2 Carnot group arithmetic and sample-based verification of
//! intrinsically Lipschitz sections of quotient maps.
//!
//! - [`metric`]: quotient maps, sections, Lipschitz and slope estimators.
//! - [`quasi_linear`]: section algebra under the weak-linearity condition.
//! - [`carnot`]: step-2 group law, dilations, gauge, projection onto `N`.
//! - [`heisenberg`]: the groups `ℍⁿ` with their splittings.
//! - [`sections`]: intrinsic graphs, section dilation, compatibility and sums.
//! - [`symbolic`]: exact polynomial expansion used as an independent oracle.
//! - [`config`]: JSON experiment configs and run reports.

pub mod carnot;
pub mod config;
pub mod error;
pub mod heisenberg;
pub mod instances;
pub mod metric;
pub mod minimize;
pub mod quasi_linear;
pub mod sections;
pub mod symbolic;

pub use error::{Error, Result};
