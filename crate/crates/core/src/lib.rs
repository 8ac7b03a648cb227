//! Stochastic volatility with nonlinear leverage.
//!
//! The log volatility follows
//! `x_t = mu + beta x_{t-1} + sum_j phi_j H_j(eps_{t-1}) + omega u_t`
//! where `H_j` are probabilists' Hermite polynomials of the previous
//! standardised return shock. The crate simulates the model, learns its
//! parameters sequentially with particle learning, scores leverage orders by
//! their one-step predictive likelihood, and summarises the fitted leverage
//! function.
//!
//! Per-particle work runs on rayon when the default `parallel` feature is
//! enabled. Random draws are keyed by `(seed, step, particle)` so results do
//! not depend on the number of threads.

pub mod error;
pub mod exec;
pub mod filter;
pub mod hermite;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod selection;
pub mod series;
pub mod summary;

pub use error::{Result, SvError};
pub use exec::Execution;
pub use filter::{run_filter, Algorithm, FilterConfig, FilterResult, PriorSpec, PriorTemplate};
pub use hermite::{HermiteOrder, LeverageSpec};
pub use model::{simulate, InitialState, SimOutput, SvParams};
pub use series::ReturnSeries;
