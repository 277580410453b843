//! Symmetric pure two-mode Gaussian states under free center-of-mass
//! evolution.
//!
//! States are written `psi ~ exp[-(alpha (q1^2 + q2^2) + 2 gamma q1 q2) / 2]`
//! with `hbar = 1` and vacuum variance `1/2`. Covariance matrices use the
//! ordering `(q1, p1, q2, p2)`.
//!
//! - [`gaussian`]: states, covariance matrices and local symplectic transforms
//! - [`measures`]: entanglement of formation and EPR dispersion
//! - [`evolution`]: the evolved state and its closed-form variance and entanglement
//! - [`restore`]: the local transform that recasts the evolved state in STMS form
//! - [`grid`]: a position-grid entropy used to check the closed forms
//! - [`trajectory`]: per-time records for output

pub mod error;
pub mod evolution;
pub mod gaussian;
pub mod grid;
pub mod measures;
pub mod restore;
pub mod trajectory;

pub use error::{Error, Result};
pub use evolution::{ContractionReport, EvolutionSpec};
pub use gaussian::{Complex, CovarianceMatrix, LocalTransform, StmsParams, SymmetricGaussianState};
pub use grid::GridSpec;
pub use measures::EntanglementReport;
pub use restore::{RestoreSolution, RestoreTrajectory, SolverOptions};
pub use trajectory::{TrajectoryRecord, TrajectoryRun};
