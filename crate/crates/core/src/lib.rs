//! Covariance-matrix dynamics of spectrally filtered two-mode squeezed
//! states under thermal decoherence, with their entanglement (logarithmic
//! negativity) and Bell non-locality (maximal displaced-parity CHSH value).
//!
//! Two thermalization scenarios are covered: baths acting on the vacuum
//! inputs before squeezing, and baths acting on the squeezed output before
//! filtering. Output modes are selected by step or exponential temporal
//! filters. All correlation-matrix elements are evaluated in closed form and
//! are independently checkable against adaptive quadrature of the raw
//! convolution integrands via the [`oracle`] module.
//!
//! Units: frequencies in the reference carrier frequency, times and filter
//! widths in its inverse, so caption-style parameters are entered directly.

pub mod covariance;
pub mod error;
pub mod filters;
pub mod kernels;
pub mod measures;
pub mod oracle;
mod quad;
pub mod sweeps;

pub use covariance::{
    assemble_tdtmsv, assemble_tmstdf, min_symplectic_eigenvalue_full, pure_tmsv, thermal_product,
    CovMatrix, Scenario, ScenarioParams,
};
pub use error::CoreError;
pub use filters::{orthonormality_defect, FilterFamily, FilterSpec};
pub use kernels::{i_window, j_c, j_s, k_f, thermal_occupancy, KernelArgs};
pub use measures::{
    bell_max, bell_value, log_negativity, wigner, BellOptConfig, BellResult, BellSettings,
    WignerEvaluator,
};
pub use oracle::verify::{run_verification, VerificationConfig, VerificationReport};
pub use oracle::{convolve_element, grid_bell_max, CovElement, QuadEstimate, QuadratureConfig};
pub use sweeps::{
    find_extremum_and_cutoffs, normalized_time, param_sweep, time_series, BracketStatus,
    CutoffReport, Measure, MeasureConfig, SweepAxis, SweepSeries,
};
