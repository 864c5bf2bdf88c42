//! The JSON report schema. Key order is fixed by struct declaration order,
//! the schema carries a version, and every field needed to re-run the
//! assessment (config echo, seed, input hashes) is embedded. The timestamp is
//! the single field excluded from determinism comparisons.

use crate::metrics::{ProbeConfig, ProbeMetrics};
use crate::mine::{MineConfig, TrainTrace};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasReport {
    pub schema_version: u32,
    /// Wall-clock time of the run. Strip this field before comparing reports.
    pub timestamp: String,
    pub seed: u64,
    pub dataset: DatasetInfo,
    pub config: ConfigEcho,
    pub metrics: MetricValues,
    /// Iteration-by-iteration estimator history for convergence plots;
    /// present when an MI estimate was run.
    pub mine_trace: Option<TrainTrace>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub n: usize,
    pub dim: usize,
    pub num_classes: usize,
    pub attribute_names: Vec<String>,
    pub representations_sha256: Option<String>,
    pub attributes_sha256: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub requested_metrics: Vec<String>,
    pub mine: Option<MineConfig>,
    pub probe: Option<ProbeConfig>,
    pub notes: EstimatorNotes,
}

/// Interpretation choices that are not obvious from the numbers alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorNotes {
    pub mine_loss: String,
    pub mine_ema: String,
    pub ba_aggregation: String,
}

impl Default for EstimatorNotes {
    fn default() -> Self {
        Self {
            mine_loss: "loss = -(mean(o_joint) - mean(exp(o_marginal))/ema), ema held \
                        constant under differentiation"
                .into(),
            mine_ema: "ema tracks mean(exp(o_marginal)): ema_0 = first batch value, \
                       ema_t = alpha*mean_t + (1-alpha)*ema_{t-1}"
                .into(),
            ba_aggregation: "bias amplification = mean over (outcome, attribute) pairs with \
                             train bias score > 1/num_attribute_values of (eval - train)"
                .into(),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct MetricValues {
    pub entropy: Option<f64>,
    pub mi: Option<f64>,
    pub rlb_raw: Option<f64>,
    pub rlb: Option<f64>,
    pub dcor2: Option<f64>,
    pub probe: Option<ProbeMetrics>,
    pub bias_amplification: Option<f64>,
    pub cohort: Option<CohortReport>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortReport {
    pub metric: String,
    pub per_cohort: Vec<CohortEntry>,
    pub overall: f64,
    pub std_dev: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortEntry {
    pub attribute: u32,
    pub name: String,
    pub value: f64,
}

/// Pretty JSON with a trailing newline. serde_json prints floats with the
/// shortest representation that parses back bit-identically, so reports
/// round-trip exactly and identical runs serialize identically.
pub fn report_to_json(report: &BiasReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Data(format!("report serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

pub fn report_from_json(json: &str) -> Result<BiasReport> {
    serde_json::from_str(json).map_err(|e| Error::Data(format!("report parse failed: {e}")))
}

/// Parse a report and blank the timestamp, for byte-level determinism checks.
pub fn json_without_timestamp(json: &str) -> Result<serde_json::Value> {
    let mut value: serde_json::Value =
        serde_json::from_str(json).map_err(|e| Error::Data(format!("report parse failed: {e}")))?;
    if let Some(obj) = value.as_object_mut() {
        obj.insert("timestamp".into(), serde_json::Value::String(String::new()));
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_report(timestamp: &str) -> BiasReport {
        BiasReport {
            schema_version: SCHEMA_VERSION,
            timestamp: timestamp.into(),
            seed: 7,
            dataset: DatasetInfo {
                n: 100,
                dim: 8,
                num_classes: 2,
                attribute_names: vec!["a".into(), "b".into()],
                representations_sha256: Some("00".into()),
                attributes_sha256: None,
            },
            config: ConfigEcho {
                requested_metrics: vec!["rlb".into()],
                mine: Some(MineConfig::default()),
                probe: None,
                notes: EstimatorNotes::default(),
            },
            metrics: MetricValues {
                entropy: Some(std::f64::consts::LN_2),
                mi: Some(0.12345678901234567),
                rlb_raw: Some(0.178),
                rlb: Some(0.178),
                ..MetricValues::default()
            },
            mine_trace: None,
        }
    }

    #[test]
    fn json_round_trip_preserves_floats_exactly() {
        let report = sample_report("2000-01-01T00:00:00Z");
        let json = report_to_json(&report).unwrap();
        let back = report_from_json(&json).unwrap();
        assert_eq!(
            back.metrics.mi.unwrap().to_bits(),
            report.metrics.mi.unwrap().to_bits()
        );
        assert_eq!(
            back.metrics.entropy.unwrap().to_bits(),
            report.metrics.entropy.unwrap().to_bits()
        );
    }

    #[test]
    fn timestamp_stripping_equalizes_reports() {
        let a = report_to_json(&sample_report("2000-01-01T00:00:00Z")).unwrap();
        let b = report_to_json(&sample_report("2025-06-30T12:34:56Z")).unwrap();
        assert_ne!(a, b);
        assert_eq!(
            json_without_timestamp(&a).unwrap(),
            json_without_timestamp(&b).unwrap()
        );
    }

    #[test]
    fn schema_keys_are_stable() {
        // Key order in the serialized text follows struct declaration order.
        let json = report_to_json(&sample_report("t")).unwrap();
        let expected = [
            "\"schema_version\"",
            "\"timestamp\"",
            "\"seed\"",
            "\"dataset\"",
            "\"config\"",
            "\"metrics\"",
            "\"mine_trace\"",
        ];
        let positions: Vec<usize> = expected
            .iter()
            .map(|k| json.find(k).unwrap_or_else(|| panic!("missing key {k}")))
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]), "{positions:?}");
    }
}
