//! Reaction-network toolkit: canonical model, deterministic parsers,
//! validation, stochastic (Gillespie direct method) and deterministic
//! (mass-action ODE) simulation, Monte Carlo ensembling, and
//! SBML/CSV/SVG export.
//!
//! The numeric engines are generic over the floating-point scalar (see
//! [`scalar::Scalar`]); the aliases below fix the default `f64`
//! precision used by the CLI and all file formats.

// Config validation uses `!(x > 0)` so NaN fails alongside the
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dsl;
pub mod ensemble;
pub mod fixtures;
pub mod io;
pub mod kinetics;
pub mod network;
pub mod ode;
pub mod plot;
pub mod rng;
pub mod sbml;
pub mod scalar;
pub mod ssa;
pub mod stoich;
pub mod table;
pub mod trajectory;
pub mod validate;

pub use ensemble::{EnsembleResult, GridSpec, McConfig, McError, ResolvedMcConfig};
pub use kinetics::{reaction_rate, PropensityMode};
pub use network::{Reaction, ReactionNetwork, ReactionTerm, Species};
pub use ode::{rhs, simulate_ode, OdeConfig, OdeError, OdeOutcome, StepMode};
pub use scalar::Scalar;
pub use ssa::{simulate_ssa, SimConfig, SsaError};
pub use stoich::{build_stoichiometry, conservation_vectors, StoichiometryMatrix};
pub use table::{parse_kinetic_table, KineticTable, TableError};
pub use trajectory::{sample_on_grid, Record, Termination, Trajectory};
pub use validate::{validate, ValidationReport};

/// Molecule count used by the stochastic engine.
pub type Count = i64;

/// Stochastic trajectory at default precision.
pub type CountTrajectory = Trajectory<f64, Count>;

/// Deterministic (concentration) trajectory at default precision.
pub type DenseTrajectory = Trajectory<f64, f64>;

/// Ensemble statistics at default precision.
pub type Ensemble = EnsembleResult<f64>;
