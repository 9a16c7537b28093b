//! Deterministic lattice surface-growth models, their hyperbolic/parabolic
//! rescalings, the limit PDE operators, and a convergence harness that
//! compares rescaled simulations against exact oracles.

pub mod config;
pub mod consistency;
pub mod drivers;
pub mod error;
pub mod fd;
pub mod harness;
pub mod initial;
pub mod lattice;
pub mod operators;
pub mod oracles;
pub mod properties;

pub use consistency::{ConsistencyReport, TestFunction};
pub use drivers::{Driver, Potential, SmoothPhiSpec};
pub use error::{GrowthError, Result};
pub use harness::{ConvergenceReport, ExperimentConfig, OracleKind};
pub use initial::InitialData;
pub use lattice::{HeightField, LatticeBox, ScalingMode, Trajectory};
pub use operators::{LimitOperator, OperatorValue, SymMatrix};
pub use properties::PropertyResult;
