//! Lamplighter random walks on the homogeneous tree `T_q`.
//!
//! * [`tree_group`]: reduced words, the vertices of `T_q`.
//! * [`wreath`]: the lamplighter group `(Z/r) ≀ T_q`.
//! * [`geodesic`]: exact word lengths and a BFS oracle.
//! * [`analytic`]: closed-form drift bounds.
//! * [`montecarlo`]: seeded simulation and estimators.
//! * [`table`] and [`verify`]: reproduction of the bounds table and check suites.

pub mod analytic;
pub mod error;
pub mod geodesic;
pub mod model;
pub mod montecarlo;
pub mod table;
pub mod tree_group;
pub mod verify;
pub mod wreath;

pub use error::{Error, Result};
pub use model::{ModelKind, ModelSpec};
pub use tree_group::ReducedWord;
pub use wreath::{Generator, LampConfig, WreathElement};
