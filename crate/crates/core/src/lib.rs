//! Nonnegative tensor factorization for models written as einsum strings.
//!
//! A model is a contraction of L nonnegative parameter tensors described by a
//! string such as `"ir,jr->ij"` (matrix factorization), `"ia,ja,ka->ijk"`
//! (CP), or anything else the grammar admits. Fitting minimizes a
//! decomposable divergence between data and contraction with multiplicative
//! updates that stay in the nonnegative orthant and never increase the
//! training loss. Missing data is handled by masking; a model zoo builds the
//! common factorizations; an Adam-on-log-parameters baseline provides an
//! independent gradient route for comparison.

pub mod adam;
pub mod einsum;
pub mod error;
pub mod io;
pub mod losses;
pub mod models;
pub mod solver;
pub mod tensor;

pub use adam::{fit_adam, loss_gradient, AdamConfig, LEARNING_RATE_GRID};
pub use einsum::{contract, contract_oracle, plan, ContractionPlan, DimensionBinding, ModelString};
pub use error::{Error, Result};
pub use io::{read_tensor, write_tensor, RunManifest};
pub use losses::{LossKind, LossSpec};
pub use models::{
    build, param_count, planted_factors, synth, synth_from_factors, ModelRecipe, SynthNoise,
    TuckerRanks,
};
pub use solver::{fit, update_factor, FactorSet, FitConfig, FitReport, StopReason};
pub use tensor::{masked_mean_loss, masked_total_loss, DenseTensor, Mask, MaskView, SplitLabel};
