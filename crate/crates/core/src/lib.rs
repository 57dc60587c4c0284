//! Physics-informed extreme learning machines for biharmonic boundary-value
//! problems.
//!
//! A fixed random hidden layer supplies the basis; output weights come from a
//! single linear least-squares solve over interior and boundary collocation
//! rows. See the `experiment` module for the end-to-end pipeline.

pub mod activation;
pub mod assembly;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fdm;
pub mod features;
pub mod geometry;
pub mod metrics;
pub mod problems;
mod simd;
pub mod solve;

pub use activation::{ActivationKind, Order};
pub use assembly::{assemble, assemble_scaled, AssembledSystem, BlockRows, BlockScales};
pub use config::{DomainParams, ExperimentConfig, Sweep, SweepParameter};
pub use error::{Error, Result};
pub use experiment::{run_single, run_sweep, RunRecord};
pub use fdm::{solve_fdm, FdmGrid, FdmSolution};
pub use features::{HiddenLayer, Operator};
pub use geometry::{CollocationSet, Domain, Hole};
pub use metrics::{evaluate, median, rel_error, EvaluationReport, PointError};
pub use problems::{get_problem, BoundaryRegime, ProblemSpec, Solution, PROBLEM_NAMES};
pub use solve::{least_squares, solve_system, Diagnostics, LeastSquares, SolveConfig, TrainedModel};
