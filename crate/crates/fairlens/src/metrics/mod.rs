//! The metric suite: empirical entropy, representation-level bias,
//! distance correlation, the logits-level probe, bias amplification, and
//! cohort accuracy/average-precision statistics.

mod ba;
mod cohort;
mod dcor;
mod entropy;
mod probe;
mod rlb;

pub use ba::{bias_amplification, OutcomeAttributeCounts};
pub use cohort::{average_precision, cohort_eval, CohortLabels, CohortMetric, CohortStats};
pub use dcor::dcor2;
pub use entropy::empirical_entropy;
pub use probe::{logits_probe, ProbeConfig, ProbeMetrics};
pub use rlb::{rlb, rlb_joint, rlb_per_attribute, RlbFragment};
