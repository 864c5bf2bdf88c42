//! The declarative run configuration: TOML sections for the estimator, the
//! probe, a synthetic spec, metric/seed selection, and the extra inputs the
//! counting metrics need. Unknown keys are rejected everywhere.

use fairlens::metrics::ProbeConfig;
use fairlens::mine::MineConfig;
use fairlens::{Error, Result, SyntheticSpec};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mine: MineConfig,
    pub probe: ProbeConfig,
    pub spec: Option<SpecDoc>,
    pub run: RunSection,
    pub ba: Option<BaSection>,
    pub cohort: Option<CohortSection>,
    /// Datasets for `compare`, each a file pair or an inline spec.
    pub dataset: Vec<DatasetEntry>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    /// Metric names: subset of rlb, mi, entropy, dcor2, probe, ba, cohort.
    pub metrics: Vec<String>,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaSection {
    /// Attribute-file of predicted outcomes on the training data.
    pub train_outcomes: PathBuf,
    /// Attribute-file of protected attributes on the training data.
    pub train_attributes: PathBuf,
    /// Attribute-file of predicted outcomes on the evaluation data; paired
    /// with the assess command's --attributes file.
    pub eval_outcomes: PathBuf,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CohortSection {
    /// Matrix file of prediction scores, one column per class.
    pub scores: PathBuf,
    /// Ground truth: attribute-file of class labels, or a matrix file of
    /// binary relevance when `multilabel` is set.
    pub labels: PathBuf,
    #[serde(default)]
    pub multilabel: bool,
    /// "accuracy" or "average_precision".
    pub metric: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetEntry {
    pub name: String,
    pub representations: Option<PathBuf>,
    pub attributes: Option<PathBuf>,
    pub spec: Option<SpecDoc>,
}

/// Flat key=value form of a synthetic spec, as written in config files and
/// on the command line. Converted into the typed spec with per-kind field
/// checking so that keys from the wrong kind are rejected, not ignored.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpecDoc {
    pub kind: String,
    pub n: Option<usize>,
    pub class_count: Option<usize>,
    pub sigma: Option<f64>,
    pub noise_dim: Option<usize>,
    pub class_fractions: Option<Vec<f64>>,
    pub centers: Option<Vec<[f64; 3]>>,
    pub fractions: Option<Vec<f64>>,
    pub dependence: Option<f64>,
    pub coupling: Option<f64>,
    pub target_entropy: Option<f64>,
    pub joint_table: Option<Vec<Vec<f64>>>,
    pub seed: Option<u64>,
}

impl SpecDoc {
    pub fn into_spec(self) -> Result<SyntheticSpec> {
        let kind = self.kind.clone();
        let require = |field: Option<f64>, name: &str| {
            field.ok_or_else(|| Error::Config(format!("spec kind {kind:?} requires {name}")))
        };
        let n = self
            .n
            .ok_or_else(|| Error::Config(format!("spec kind {:?} requires n", self.kind)))?;
        let noise_dim = self.noise_dim.unwrap_or(0);
        let seed = self.seed.unwrap_or(0);

        let reject = |used: &[&str]| -> Result<()> {
            let mut stray = Vec::new();
            if self.class_count.is_some() && !used.contains(&"class_count") {
                stray.push("class_count");
            }
            if self.sigma.is_some() && !used.contains(&"sigma") {
                stray.push("sigma");
            }
            if self.class_fractions.is_some() && !used.contains(&"class_fractions") {
                stray.push("class_fractions");
            }
            if self.centers.is_some() && !used.contains(&"centers") {
                stray.push("centers");
            }
            if self.fractions.is_some() && !used.contains(&"fractions") {
                stray.push("fractions");
            }
            if self.dependence.is_some() && !used.contains(&"dependence") {
                stray.push("dependence");
            }
            if self.coupling.is_some() && !used.contains(&"coupling") {
                stray.push("coupling");
            }
            if self.target_entropy.is_some() && !used.contains(&"target_entropy") {
                stray.push("target_entropy");
            }
            if self.joint_table.is_some() && !used.contains(&"joint_table") {
                stray.push("joint_table");
            }
            if stray.is_empty() {
                Ok(())
            } else {
                Err(Error::Config(format!(
                    "spec kind {:?} does not accept: {}",
                    self.kind,
                    stray.join(", ")
                )))
            }
        };

        match self.kind.as_str() {
            "colored" => {
                reject(&["class_count", "sigma", "class_fractions", "centers"])?;
                Ok(SyntheticSpec::Colored {
                    n,
                    class_count: self.class_count.ok_or_else(|| {
                        Error::Config("spec kind \"colored\" requires class_count".into())
                    })?,
                    sigma: require(self.sigma, "sigma")?,
                    noise_dim,
                    class_fractions: self.class_fractions,
                    centers: self.centers,
                    seed,
                })
            }
            "percentage" => {
                reject(&["fractions", "dependence", "coupling"])?;
                Ok(SyntheticSpec::Percentage {
                    n,
                    fractions: self.fractions.ok_or_else(|| {
                        Error::Config("spec kind \"percentage\" requires fractions".into())
                    })?,
                    dependence: require(self.dependence, "dependence")?,
                    coupling: self.coupling.unwrap_or(2.0),
                    noise_dim,
                    seed,
                })
            }
            "entropy_target" => {
                reject(&["class_count", "target_entropy", "dependence", "coupling"])?;
                Ok(SyntheticSpec::EntropyTarget {
                    n,
                    class_count: self.class_count.ok_or_else(|| {
                        Error::Config("spec kind \"entropy_target\" requires class_count".into())
                    })?,
                    target_entropy: require(self.target_entropy, "target_entropy")?,
                    dependence: require(self.dependence, "dependence")?,
                    coupling: self.coupling.unwrap_or(2.0),
                    noise_dim,
                    seed,
                })
            }
            "discrete_joint" => {
                reject(&["joint_table"])?;
                Ok(SyntheticSpec::DiscreteJoint {
                    n,
                    joint_table: self.joint_table.ok_or_else(|| {
                        Error::Config("spec kind \"discrete_joint\" requires joint_table".into())
                    })?,
                    noise_dim,
                    seed,
                })
            }
            other => Err(Error::Config(format!(
                "unknown spec kind {other:?}; expected colored, percentage, entropy_target, \
                 or discrete_joint"
            ))),
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Data(format!("{}:1: cannot read config: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Parse the inline `--spec` form: semicolon-separated key=value pairs, e.g.
/// `kind=colored; n=200; sigma=0.1; class_count=2`. Values follow TOML
/// syntax; bare words are taken as strings.
pub fn parse_inline_spec(input: &str) -> Result<SpecDoc> {
    let mut doc = String::new();
    for pair in input.split(';') {
        let pair = pair.trim();
        if pair.is_empty() {
            continue;
        }
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("inline spec entry {pair:?} is not key=value")))?;
        let key = key.trim();
        let value = value.trim();
        let line = format!("{key} = {value}\n");
        if toml::from_str::<toml::Table>(&line).is_ok() {
            doc.push_str(&line);
        } else {
            doc.push_str(&format!("{key} = \"{value}\"\n"));
        }
    }
    toml::from_str(&doc).map_err(|e| Error::Config(format!("inline spec: {e}")))
}
