//! Steering ellipsoids and quantum correlations of two-qubit states.
//!
//! - [`qmat`]: fixed-size complex linear algebra (Jacobi eigensolver, partial
//!   trace and transpose, Pauli expansion, magic basis).
//! - [`states`]: validated states, named families, random ensembles and the
//!   JSON state file format.
//! - [`steering`]: canonical filtering and steering ellipsoids.
//! - [`correlations`]: CHSH value, fully entangled fraction, concurrence,
//!   negativity, symmetric extendibility, with brute-force oracles.
//! - [`harness`]: Monte Carlo scans, family sweeps and the verification suite
//!   behind the command-line tool.

pub mod correlations;
pub mod error;
pub mod harness;
pub mod qmat;
pub mod states;
pub mod steering;

pub use correlations::{
    chsh_beta, chsh_oracle, concurrence, fef_oracle, full_report, fully_entangled_fraction,
    negativity, symmetric_extendible, teleportation_fidelity, ChshSettings, CorrelationReport,
    MeasureDiagnostics,
};
pub use error::{Error, Result};
pub use qmat::{Chirality, CMat2, CMat4, FanoForm, RMat3, SignedSpectrum3, Subsystem, Vec3};
pub use states::{EnsembleKind, EnsembleSpec, Rank, TwoQubitState};
pub use steering::{SteeringEllipsoid, ConditionReport};
