//! One-way information deficits and classical correlation measures for
//! finite-dimensional bipartite states.
//!
//! All entropies are in bits. Measurements act on Alice (the first tensor
//! factor); channels act on Bob.

pub mod channel;
pub mod cli;
pub mod error;
pub mod linalg;
pub mod measurement;
pub mod measures;
pub mod optimize;
pub mod random;
pub mod scenarios;
pub mod state;

pub use channel::{apply, apply_to_bob, make_knr01_channel, make_sw99_channel, BlochAffineChannel, Channel, KrausChannel};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, C64};
pub use measurement::{
    basis_measurement, dephase, eigenbasis_measurement, outcome_ensemble, MeasurementOperators, Povm,
    ProjectiveMeasurement,
};
pub use measures::{c_hv, deficit_q, delta_cl, i_go, i_lo, measure_report, MeasureReport};
pub use optimize::{
    grid_scan_qubit, maximize_c_hv, maximize_delta_cl, minimize_deficit, Objective, OptimizationResult,
    OptimizerConfig,
};
pub use state::{
    entropy, holevo_chi, information_content, mutual_information, partial_trace, shannon_entropy,
    state_from_ensemble, DensityMatrix, Ensemble, PureState, Subsystem,
};
