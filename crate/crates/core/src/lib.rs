//! Simulation and analysis of a spin-path contextuality test in neutron
//! interferometry.
//!
//! The crate is organized around the stages of the experiment:
//!
//! - [`hilbert`]: the two-qubit (spin ⊗ path) Hilbert space, the Pauli-type
//!   operator inventory and the entangled states used throughout.
//! - [`contexts`]: the five measurement contexts of commuting observables,
//!   ideal sequential (Lüders) measurement, and the quantum values of the
//!   two noncontextuality inequalities.
//! - [`nchv`]: exhaustive enumeration of noncontextual ±1 value assignments
//!   and the classical bounds they imply.
//! - [`apparatus`]: a parametric imperfection model of the interferometer
//!   beamline producing Poisson-distributed count scans.
//! - [`analysis`]: sinusoid fitting, count-rate estimators, uncertainty
//!   propagation and the final inequality report.

// Index loops over fixed 4×4 / 3×3 kernels read better than iterator chains.
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod apparatus;
pub mod contexts;
pub mod hilbert;
pub mod nchv;

pub use analysis::{
    aggregate_runs, analyze_experiment, counts_at, evaluate_inequality4, expectation_bell,
    expectation_spin_path, fit_sinusoid, ExpectationEstimate, InequalityReport, SinusoidFit,
    TermLabel,
};
pub use apparatus::{
    default_chi_grid, ideal_intensity_bell, ideal_intensity_spin_path, model_probability,
    prepare_state, run_experiment_set, simulate_scan, ApparatusConfig, CountingMode, DriftModel,
    ScanData, ScanKind, ScanPoint, SpinAnalysis,
};
pub use contexts::{
    inequality3_quantum, inequality4_quantum, peres_mermin_contexts, sequential_expectation,
    Context, SequentialOutcome,
};
pub use hilbert::{
    analysis_product_state, bell_basis, entangled_state, expectation, projector, tensor,
    DensityState, Mat2, Mat4, Observable, PmLabel, PureState, QuantumState, State,
};
pub use nchv::{
    bound_check_parity, classical_bound, enumerate_assignments, inequality3_expression,
    inequality4_expression, ks_contradiction, Assignment, ExpressionTerm, KsReport,
    LinearExpression,
};
