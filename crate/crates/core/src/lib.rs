//! Born-rule detection simulator and convergence-rate harness.
//!
//! The pipeline is: a [`WavefunctionSpec`] is validated into a
//! [`BornDistribution`]; [`sample_events`] draws a reproducible
//! [`EventLog`]; the log is binned on the M+2 scheme chosen from the full
//! data; the binned empirical cdf is compared to `F_B` at the bin edges at a
//! geometric schedule of prefix sizes; and the resulting series is fitted
//! to `D ≈ C · N^(-α)`.
//!
//! The numerical kernels are generic over [`Real`] (`f32`/`f64`). The
//! aliases below fix the scalar to `f64`, which is what the file formats and
//! the CLI use.

pub mod binning;
pub mod convergence;
pub mod error;
pub mod format;
pub mod interp;
pub mod quadrature;
pub mod rng;
pub mod sampler;
pub mod scalar;
pub mod wavefunction;

pub use binning::{
    bin_events, bin_index, bin_positions, choose_binning, choose_binning_for, empirical_cdf,
    BinIndex, BinnedCounts, BinningScheme, EmpiricalCdf,
};
pub use convergence::{
    analyze_log, bound_points, check_bound, convergence_series, convergence_series_for,
    efficiency_sweep, fit_points, fit_rate, sup_deviation, Analysis, BoundCheck,
    CheckpointSchedule, ConvergenceSeries, RateFit, SweepPlan, SweepRow,
};
pub use error::{Error, Result};
pub use sampler::{
    dkw_band, goodness_of_fit, ks_statistic, sample_events, DetectionEvent, DetectorModel,
    EventLog, GoodnessOfFit,
};
pub use scalar::Real;
pub use wavefunction::{CumulativeDistribution, WavefunctionSpec};

/// Born distribution in double precision.
pub type BornDistribution = wavefunction::BornDistribution<f64>;
/// Born distribution in single precision.
pub type BornDistribution32 = wavefunction::BornDistribution<f32>;
/// Convergence fit in double precision.
pub type RateFit64 = convergence::RateFit<f64>;
