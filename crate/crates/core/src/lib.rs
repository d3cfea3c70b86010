//! Exponential sampling and reconstruction of Mellin band-limited functions.
//!
//! A band-limited function is stored through its samples on the lattice
//! `e^{k/T}` ([`LatticeFunction`]) and evaluated with the exponential
//! sampling series. Around that representation the crate provides a
//! numerical Mellin transform pair, random function synthesis with
//! concentration measurement on `[1/R, R]^n`, Monte Carlo checks of the
//! random sampling inequality, and the closed-form probability bounds that
//! accompany it.

pub mod bounds;
pub mod error;
pub mod kernels;
pub mod lattice;
pub mod numeric;
pub mod quadrature;
pub mod rng;
pub mod sampling;
pub mod spectral;
pub mod synthesis;

pub use bounds::{BoundInputs, BoundOutputs, TheoremConstants, Variant};
pub use error::{Error, Result};
pub use kernels::{fejer_kernel, jackson_kernel, FejerKernel, JacksonKernel, LogGaussian};
pub use lattice::{lattice_points, lin_c, sinc, sinc_nd, IndexWindow, LatticeFunction, MultiIndex, SpaceParams};
pub use quadrature::QuadratureSpec;
pub use sampling::{
    check_inequality, draw_uniform, empirical_frame, monte_carlo_experiment, z_statistics, z_variable, ExperimentSpec,
    FrameCheckResult, MonteCarloReport, SamplePointSet, ZStatistics,
};
pub use spectral::{
    bandlimit_residual, inverse_mellin, mellin_transform, reproduce_integral, LogAxisFunction, SpectralFunction, TGrid,
};
pub use synthesis::{
    concentration, min_n_for_error, norm_parseval, random_band_function, truncate_to_bn, truncation_error_bound,
    ConcentrationCube, ConcentrationReport, Decay, SynthesisProfile,
};
