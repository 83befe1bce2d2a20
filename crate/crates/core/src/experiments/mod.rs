//! Drivers that assemble the numerics into the full studies: superposition
//! preparation, |z| measurement, measurement-noise scaling, collapse-to-
//! Gaussian traces, chained measurement records, and anomalous diffusion of
//! the conditioned mean position.

pub mod abs_measurement;
pub mod chained;
pub mod diffusion;
pub mod gaussian_reduction;
pub mod gaussianity;
pub mod scaling;
pub mod superposition;

pub use abs_measurement::AbsPositionMeasurement;
pub use chained::{chained_measurement_record, ChainedRecord, MeanFeed};
pub use diffusion::{
    assemble_diffusion, beta_estimator, diffusion_trajectory, run_diffusion_ensemble,
    BetaEstimate, DiffusionConfig, DiffusionEnsemble, DiffusionKernel, DiffusionRecord,
    PostSelectPolicy,
};
pub use gaussian_reduction::{gaussian_reduction_analytics, GaussianReduction};
pub use gaussianity::{
    collapse_to_gaussian, cumulant_accumulation, CumulantTrace, GaussianityTrace,
};
pub use scaling::{
    deterministic_scaling, levy_collapse_scaling, DeterministicScaling, ScalingConfig,
    ScalingResult,
};
pub use superposition::{prepare_superposition, SuperpositionConfig, SuperpositionStats};
