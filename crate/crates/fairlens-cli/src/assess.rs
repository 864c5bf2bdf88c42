//! The assess command: load a representation matrix and attribute labels,
//! compute the requested metrics, and write the JSON report.

use crate::config::{BaSection, CohortSection, RunConfig};
use crate::util::{sha256_file, timestamp_now, write_text};
use fairlens::io::{read_attributes, read_matrix};
use fairlens::metrics::{
    bias_amplification, cohort_eval, dcor2, empirical_entropy, logits_probe, rlb, CohortLabels,
    CohortMetric, OutcomeAttributeCounts,
};
use fairlens::mine::estimate_mi;
use fairlens::report::{
    BiasReport, CohortEntry, CohortReport, ConfigEcho, DatasetInfo, EstimatorNotes, MetricValues,
    SCHEMA_VERSION,
};
use fairlens::{Error, RepresentationSet, Result};
use std::collections::BTreeSet;
use std::path::Path;

pub const KNOWN_METRICS: [&str; 7] = ["rlb", "mi", "entropy", "dcor2", "probe", "ba", "cohort"];

pub fn validate_metric_names(metrics: &[String]) -> Result<()> {
    for m in metrics {
        if !KNOWN_METRICS.contains(&m.as_str()) {
            return Err(Error::Config(format!(
                "unknown metric {m:?}; expected a subset of {}",
                KNOWN_METRICS.join(", ")
            )));
        }
    }
    if metrics.is_empty() {
        return Err(Error::Config("no metrics requested".into()));
    }
    Ok(())
}

pub struct AssessInputs<'a> {
    pub representations: &'a Path,
    pub attributes: &'a Path,
    pub metrics: Vec<String>,
    pub config: RunConfig,
    pub seed: Option<u64>,
}

/// The metrics that need nothing beyond the dataset itself: rlb, mi, entropy,
/// dcor2, probe. Shared between assess and the compare sweep.
pub fn compute_core_metrics(
    data: &RepresentationSet,
    metrics: &[String],
    mine_config: &fairlens::mine::MineConfig,
    probe_config: &fairlens::metrics::ProbeConfig,
) -> Result<(MetricValues, Option<fairlens::TrainTrace>)> {
    let wants = |m: &str| metrics.iter().any(|x| x == m);
    let mut values = MetricValues::default();
    let mut trace = None;

    if wants("entropy") || wants("rlb") {
        values.entropy = Some(empirical_entropy(data.attributes())?);
    }
    if wants("rlb") {
        let frag = rlb(data, mine_config)?;
        values.mi = Some(frag.mi);
        values.entropy = Some(frag.entropy);
        values.rlb_raw = Some(frag.rlb_raw);
        values.rlb = Some(frag.rlb);
        trace = Some(frag.trace);
    } else if wants("mi") {
        let est = estimate_mi(data, mine_config)?;
        values.mi = Some(est.mi);
        trace = Some(est.trace);
    }
    if wants("dcor2") {
        values.dcor2 = Some(dcor2(data.representations(), &data.one_hot_attributes())?);
    }
    if wants("probe") {
        values.probe = Some(logits_probe(data, probe_config)?);
    }
    Ok((values, trace))
}

pub fn load_dataset(representations: &Path, attributes: &Path) -> Result<RepresentationSet> {
    let reps = read_matrix(representations)?;
    let (attrs, names) = read_attributes(attributes)?;
    if attrs.len() != reps.nrows() {
        return Err(Error::Dimension(format!(
            "{} has {} rows but {} has {} labels",
            representations.display(),
            reps.nrows(),
            attributes.display(),
            attrs.len()
        )));
    }
    RepresentationSet::new(reps, attrs, names)
}

/// Compute the requested metrics into a report. Pure given the inputs; the
/// timestamp is stamped by the caller via `timestamp_now`.
pub fn run_assess(inputs: AssessInputs<'_>) -> Result<BiasReport> {
    let metrics: Vec<String> = {
        let set: BTreeSet<String> = inputs.metrics.iter().cloned().collect();
        let mut ordered = Vec::new();
        for known in KNOWN_METRICS {
            if set.contains(known) {
                ordered.push(known.to_string());
            }
        }
        ordered
    };
    validate_metric_names(&metrics)?;

    let mut mine_config = inputs.config.mine.clone();
    let mut probe_config = inputs.config.probe.clone();
    let seed = inputs.seed.unwrap_or(mine_config.seed);
    mine_config.seed = seed;
    probe_config.seed = seed;

    let data = load_dataset(inputs.representations, inputs.attributes)?;

    let wants = |m: &str| metrics.iter().any(|x| x == m);
    let (mut values, trace) = compute_core_metrics(&data, &metrics, &mine_config, &probe_config)?;

    if wants("ba") {
        let section = inputs.config.ba.as_ref().ok_or_else(|| {
            Error::Config("metric \"ba\" needs a [ba] config section naming its inputs".into())
        })?;
        values.bias_amplification = Some(run_ba(section, data.attributes())?);
    }
    if wants("cohort") {
        let section = inputs.config.cohort.as_ref().ok_or_else(|| {
            Error::Config(
                "metric \"cohort\" needs a [cohort] config section naming its inputs".into(),
            )
        })?;
        values.cohort = Some(run_cohort(section, &data)?);
    }

    let uses_mine = wants("rlb") || wants("mi");
    let uses_probe = wants("probe");
    Ok(BiasReport {
        schema_version: SCHEMA_VERSION,
        timestamp: timestamp_now(),
        seed,
        dataset: DatasetInfo {
            n: data.len(),
            dim: data.dim(),
            num_classes: data.num_classes(),
            attribute_names: data.attribute_names().to_vec(),
            representations_sha256: Some(sha256_file(inputs.representations)?),
            attributes_sha256: Some(sha256_file(inputs.attributes)?),
        },
        config: ConfigEcho {
            requested_metrics: metrics,
            mine: uses_mine.then_some(mine_config),
            probe: uses_probe.then_some(probe_config),
            notes: EstimatorNotes::default(),
        },
        metrics: values,
        mine_trace: trace,
    })
}

fn run_ba(section: &BaSection, eval_attributes: &[u32]) -> Result<f64> {
    let (train_outcomes, _) = read_attributes(&section.train_outcomes)?;
    let (train_attrs, _) = read_attributes(&section.train_attributes)?;
    let (eval_outcomes, _) = read_attributes(&section.eval_outcomes)?;
    if eval_outcomes.len() != eval_attributes.len() {
        return Err(Error::Dimension(format!(
            "{} has {} outcomes but the attributes file has {} labels",
            section.eval_outcomes.display(),
            eval_outcomes.len(),
            eval_attributes.len()
        )));
    }
    let train = OutcomeAttributeCounts::from_pairs(&train_outcomes, &train_attrs)?;
    let eval = OutcomeAttributeCounts::from_pairs(&eval_outcomes, eval_attributes)?;
    // the tables must line up even when one side never saw some value
    let outcomes = train.num_outcomes().max(eval.num_outcomes());
    let attrs = train.num_attributes().max(eval.num_attributes());
    bias_amplification(
        &train.resized(outcomes, attrs)?,
        &eval.resized(outcomes, attrs)?,
    )
}

fn run_cohort(section: &CohortSection, data: &RepresentationSet) -> Result<CohortReport> {
    let scores = read_matrix(&section.scores)?;
    let metric = match section.metric.as_str() {
        "accuracy" => CohortMetric::Accuracy,
        "average_precision" => CohortMetric::AveragePrecision,
        other => {
            return Err(Error::Config(format!(
                "unknown cohort metric {other:?}; expected accuracy or average_precision"
            )))
        }
    };
    let stats = if section.multilabel {
        let labels = read_matrix(&section.labels)?;
        cohort_eval(
            &scores,
            &CohortLabels::MultiLabel(&labels),
            data.attributes(),
            metric,
        )?
    } else {
        let (labels, _) = read_attributes(&section.labels)?;
        cohort_eval(
            &scores,
            &CohortLabels::Classes(&labels),
            data.attributes(),
            metric,
        )?
    };
    let names = data.attribute_names();
    Ok(CohortReport {
        metric: section.metric.clone(),
        per_cohort: stats
            .per_cohort
            .iter()
            .map(|&(attribute, value)| CohortEntry {
                attribute,
                name: names
                    .get(attribute as usize)
                    .cloned()
                    .unwrap_or_else(|| attribute.to_string()),
                value,
            })
            .collect(),
        overall: stats.overall,
        std_dev: stats.std_dev,
    })
}

pub fn write_report(report: &BiasReport, out: &Path) -> Result<()> {
    write_text(out, &fairlens::report::report_to_json(report)?)
}
