//! Degree-based inference for the stochastic block model.
//!
//! Node classes are recovered from the degree sequence alone: normalized
//! degrees concentrate at per-class means, so sorting them and cutting at
//! the largest gaps separates the classes. On top of that one pass sit
//! plug-in parameter estimators, penalized selection of the class count,
//! a common-neighbor procedure for classes that share a mean degree,
//! closed-form error bounds, and a seeded simulation harness.
//!
//! Sampling and the heavier loops are data-parallel via rayon under the
//! default `parallel` feature; disabling it leaves sequential fallbacks
//! with identical outputs.

pub mod bounds;
pub mod degrees;
pub mod error;
pub mod estimate;
pub mod io;
pub mod lg;
pub mod metrics;
pub mod mixed;
pub mod model;
mod rng;
pub mod sampler;
pub mod select;
pub mod sim;

pub use degrees::DegreeProfile;
pub use error::{Error, Result};
pub use estimate::{estimate, estimate_via_lg, EstimateResult};
pub use lg::{gap_sequence, lg_partition, theoretical_gaps, LgResult};
pub use metrics::{align_labels, class_rates, global_error_rate, metric_report, spreading};
pub use mixed::{alpha_inner_products, pair_statistics, split_mixed_group, SplitVerdict};
pub use model::{Graph, LabelVector, MeanDegrees, ModelParams};
pub use rng::replicate_seed;
pub use sampler::{sample_graph, sample_labels, sampled_degrees, sampled_pair_counts};
pub use select::{f_criterion, select_q, SelectionReport};
pub use sim::{run_simulation, RunConfig, SimOutput};
