//! Sequential parameter learning for the leverage SV model.

mod cloud;
mod grid;
mod prior;
mod resample;
mod run;
mod stats;
mod step;

pub use cloud::{init_cloud, init_cloud_fixed, Particle, ParticleCloud};
pub use grid::{grid_filter_oracle, GridFilterOutput, GridSpec, BOUNDARY_MASS_LIMIT};
pub use prior::{GammaConvention, InitialPrior, PriorScale, PriorSpec, PriorTemplate};
pub use resample::{effective_sample_size, normalize_log_weights, resample, ResamplingScheme};
pub use run::{
    run_filter, run_filter_fixed, Algorithm, Checkpoint, DegeneracyWarning, Diagnostics, FilterConfig,
    FilterResult, ParticleFilter, PosteriorSummary, ThetaSamples, DEGENERACY_RATIO, DEGENERACY_STREAK,
};
pub use stats::{
    sample_theta, update_stats, Design, SufficientStats, ThetaDraw, BETA_BOUND, BETA_MAX_ATTEMPTS,
};
pub use step::{naive_pl_step, plav_step, StepContext, StepOutcome};
