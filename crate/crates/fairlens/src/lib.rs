//! Quantify how much protected-attribute information a learned representation
//! carries.
//!
//! The headline metric is representation-level bias: a neural lower-bound
//! estimate of the mutual information between embeddings and a discrete
//! protected attribute, normalized by the attribute's empirical entropy so
//! that dataset imbalance and model bias are assessed together. Around it sit
//! the comparison metrics (distance correlation, a logits-level probe, bias
//! amplification, cohort accuracy/mAP), synthetic generators that make every
//! claim testable at desk scale, and file formats plus a JSON report schema
//! for the command-line front end.
//!
//! Estimation is deterministic: every run is a pure function of its inputs,
//! its config, and a seed. Independent runs fan out across threads via
//! [`sweep::map_cells`] when the `parallel` feature (default) is enabled.

pub mod data;
pub mod datagen;
mod error;
pub mod io;
pub mod metrics;
pub mod mine;
pub mod nn;
pub mod report;
pub mod sweep;

pub use data::{joint_attribute, RepresentationSet};
pub use datagen::{generate, perturb, GeneratedDataset, PerturbationMode, SyntheticSpec};
pub use error::{Error, Result};
pub use metrics::{
    bias_amplification, cohort_eval, dcor2, empirical_entropy, logits_probe, rlb, ProbeConfig,
    ProbeMetrics, RlbFragment,
};
pub use mine::{estimate_mi, MiEstimate, MineConfig, TrainTrace};
pub use nn::{one_hot, Activation, AdamState, DenseNet};
pub use report::{BiasReport, SCHEMA_VERSION};
