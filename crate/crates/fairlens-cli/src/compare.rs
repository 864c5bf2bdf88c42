//! The compare command: run every (dataset, seed) cell, write one CSV row per
//! (dataset, metric, seed) plus aggregate rows per dataset × metric, and dump
//! a full JSON report per cell. Cells run in parallel; failures land in the
//! status column and make the exit code nonzero.

use crate::assess::{compute_core_metrics, validate_metric_names};
use crate::config::{DatasetEntry, RunConfig};
use crate::util::{timestamp_now, write_text};
use fairlens::report::{
    BiasReport, ConfigEcho, DatasetInfo, EstimatorNotes, MetricValues, SCHEMA_VERSION,
};
use fairlens::sweep::map_cells;
use fairlens::{Error, RepresentationSet, Result};
use std::path::{Path, PathBuf};
use std::sync::Arc;

pub struct CompareArgs {
    pub config: RunConfig,
    pub metrics: Option<Vec<String>>,
    pub seeds: Option<Vec<u64>>,
    pub out: PathBuf,
}

/// What happened across the sweep; `first_error` carries the exit class when
/// any cell failed.
pub struct CompareSummary {
    pub cells: usize,
    pub failed: usize,
    pub first_error: Option<Error>,
}

struct ResolvedDataset {
    name: String,
    data: RepresentationSet,
}

fn resolve_dataset(entry: &DatasetEntry) -> Result<ResolvedDataset> {
    if entry.name.is_empty()
        || !entry
            .name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
    {
        return Err(Error::Config(format!(
            "dataset name {:?} must be non-empty and use only [A-Za-z0-9_.-]",
            entry.name
        )));
    }
    let data = match (&entry.representations, &entry.attributes, &entry.spec) {
        (Some(reps), Some(attrs), None) => crate::assess::load_dataset(reps, attrs)?,
        (None, None, Some(spec)) => fairlens::generate(&spec.clone().into_spec()?)?.data,
        _ => {
            return Err(Error::Config(format!(
                "dataset {:?} must give either representations+attributes or a spec",
                entry.name
            )))
        }
    };
    Ok(ResolvedDataset {
        name: entry.name.clone(),
        data,
    })
}

struct CellResult {
    dataset: usize,
    seed: u64,
    values: Option<(MetricValues, Option<fairlens::TrainTrace>)>,
    error: Option<Error>,
}

fn metric_value(values: &MetricValues, metric: &str) -> Option<f64> {
    match metric {
        "rlb" => values.rlb,
        "mi" => values.mi,
        "entropy" => values.entropy,
        "dcor2" => values.dcor2,
        "probe" => values.probe.map(|p| p.holdout_loss),
        _ => None,
    }
}

/// Linear-interpolation quantile on a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn run_compare(args: CompareArgs) -> Result<CompareSummary> {
    let metrics = args
        .metrics
        .unwrap_or_else(|| args.config.run.metrics.clone());
    validate_metric_names(&metrics)?;
    for m in &metrics {
        if m == "ba" || m == "cohort" {
            return Err(Error::Config(format!(
                "metric {m:?} needs per-dataset side inputs and is not available in compare"
            )));
        }
    }
    let seeds = args.seeds.unwrap_or_else(|| args.config.run.seeds.clone());
    if seeds.is_empty() {
        return Err(Error::Config("compare needs at least one seed".into()));
    }
    if args.config.dataset.is_empty() {
        return Err(Error::Config(
            "compare needs at least one [[dataset]] entry in the config".into(),
        ));
    }

    let datasets: Vec<ResolvedDataset> = args
        .config
        .dataset
        .iter()
        .map(resolve_dataset)
        .collect::<Result<_>>()?;
    let datasets = Arc::new(datasets);

    let cells: Vec<(usize, u64)> = (0..datasets.len())
        .flat_map(|d| seeds.iter().map(move |&s| (d, s)))
        .collect();

    let mine_base = args.config.mine.clone();
    let probe_base = args.config.probe.clone();
    let metrics_ref = &metrics;
    let datasets_ref = Arc::clone(&datasets);
    let results: Vec<CellResult> = map_cells(&cells, |&(dataset, seed)| {
        let mut mine_config = mine_base.clone();
        let mut probe_config = probe_base.clone();
        mine_config.seed = seed;
        probe_config.seed = seed;
        match compute_core_metrics(
            &datasets_ref[dataset].data,
            metrics_ref,
            &mine_config,
            &probe_config,
        ) {
            Ok(values) => CellResult {
                dataset,
                seed,
                values: Some(values),
                error: None,
            },
            Err(e) => CellResult {
                dataset,
                seed,
                values: None,
                error: Some(e),
            },
        }
    });

    // per-cell reports next to the CSV
    let reports_dir = reports_dir_for(&args.out);
    std::fs::create_dir_all(&reports_dir)?;
    for r in &results {
        if let Some((values, trace)) = &r.values {
            let ds = &datasets[r.dataset];
            let report = BiasReport {
                schema_version: SCHEMA_VERSION,
                timestamp: timestamp_now(),
                seed: r.seed,
                dataset: DatasetInfo {
                    n: ds.data.len(),
                    dim: ds.data.dim(),
                    num_classes: ds.data.num_classes(),
                    attribute_names: ds.data.attribute_names().to_vec(),
                    representations_sha256: None,
                    attributes_sha256: None,
                },
                config: ConfigEcho {
                    requested_metrics: metrics.clone(),
                    mine: Some(with_seed(&mine_base, r.seed)),
                    probe: metrics.iter().any(|m| m == "probe").then(|| {
                        let mut p = probe_base.clone();
                        p.seed = r.seed;
                        p
                    }),
                    notes: EstimatorNotes::default(),
                },
                metrics: values.clone(),
                mine_trace: trace.clone(),
            };
            let path = reports_dir.join(format!("{}_seed{}.json", ds.name, r.seed));
            crate::assess::write_report(&report, &path)?;
        }
    }

    // CSV: value rows then aggregate rows
    let mut csv = String::from("dataset,metric,seed,stat,value,status\n");
    for metric in &metrics {
        for r in &results {
            let name = &datasets[r.dataset].name;
            match (&r.values, &r.error) {
                (Some((values, _)), _) => {
                    let v = metric_value(values, metric);
                    let rendered = v.map(|v| v.to_string()).unwrap_or_default();
                    csv.push_str(&format!("{name},{metric},{},value,{rendered},ok\n", r.seed));
                }
                (None, Some(e)) => {
                    let msg = e.to_string().replace([',', '\n'], ";");
                    csv.push_str(&format!("{name},{metric},{},value,,error: {msg}\n", r.seed));
                }
                (None, None) => unreachable!("cell carries a value or an error"),
            }
        }
    }
    for (d, ds) in datasets.iter().enumerate() {
        for metric in &metrics {
            let mut ok_values: Vec<f64> = results
                .iter()
                .filter(|r| r.dataset == d)
                .filter_map(|r| r.values.as_ref())
                .filter_map(|(values, _)| metric_value(values, metric))
                .collect();
            let failed_here = results.iter().any(|r| r.dataset == d && r.error.is_some());
            let status = if failed_here { "partial" } else { "ok" };
            if ok_values.is_empty() {
                continue;
            }
            ok_values.sort_by(|a, b| a.partial_cmp(b).expect("finite metrics"));
            let k = ok_values.len() as f64;
            let mean = ok_values.iter().sum::<f64>() / k;
            let std = (ok_values
                .iter()
                .map(|v| (v - mean) * (v - mean))
                .sum::<f64>()
                / k)
                .sqrt();
            let stats = [
                ("mean", mean),
                ("std", std),
                ("min", ok_values[0]),
                ("q25", quantile(&ok_values, 0.25)),
                ("median", quantile(&ok_values, 0.5)),
                ("q75", quantile(&ok_values, 0.75)),
                ("max", *ok_values.last().unwrap()),
            ];
            for (stat, value) in stats {
                csv.push_str(&format!("{},{metric},,{stat},{value},{status}\n", ds.name));
            }
        }
    }
    write_text(&args.out, &csv)?;

    let failed = results.iter().filter(|r| r.error.is_some()).count();
    let first_error = results.into_iter().find_map(|r| r.error);
    Ok(CompareSummary {
        cells: cells.len(),
        failed,
        first_error,
    })
}

fn with_seed(base: &fairlens::MineConfig, seed: u64) -> fairlens::MineConfig {
    let mut c = base.clone();
    c.seed = seed;
    c
}

pub fn reports_dir_for(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "compare".into());
    out.with_file_name(format!("{stem}_reports"))
}
