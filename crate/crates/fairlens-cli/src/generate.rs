//! The generate and perturb commands: write dataset file pairs plus a JSON
//! sidecar recording how they were made.

use crate::util::{sha256_file, timestamp_now, write_text};
use fairlens::datagen::JointTruth;
use fairlens::io::{
    read_attributes, read_matrix, write_attributes, write_matrix_binary, write_matrix_text,
};
use fairlens::{
    generate, perturb, Error, PerturbationMode, RepresentationSet, Result, SyntheticSpec,
};
use serde::Serialize;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatrixFormat {
    Text,
    Binary,
}

impl std::str::FromStr for MatrixFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(MatrixFormat::Text),
            "binary" => Ok(MatrixFormat::Binary),
            other => Err(Error::Config(format!(
                "unknown format {other:?}; expected text or binary"
            ))),
        }
    }
}

pub struct DatasetPaths {
    pub representations: PathBuf,
    pub attributes: PathBuf,
    pub sidecar: PathBuf,
}

pub fn dataset_paths(prefix: &Path, format: MatrixFormat) -> DatasetPaths {
    let with_suffix = |suffix: &str| {
        let mut name = prefix.file_name().unwrap_or_default().to_os_string();
        name.push(suffix);
        prefix.with_file_name(name)
    };
    DatasetPaths {
        representations: match format {
            MatrixFormat::Text => with_suffix(".reps.csv"),
            MatrixFormat::Binary => with_suffix(".reps.fmat"),
        },
        attributes: with_suffix(".attrs.txt"),
        sidecar: with_suffix(".meta.json"),
    }
}

fn write_dataset(
    data: &RepresentationSet,
    paths: &DatasetPaths,
    format: MatrixFormat,
) -> Result<()> {
    match format {
        MatrixFormat::Text => write_matrix_text(&paths.representations, data.representations())?,
        MatrixFormat::Binary => {
            write_matrix_binary(&paths.representations, data.representations())?
        }
    }
    write_attributes(&paths.attributes, data.attributes(), data.attribute_names())
}

#[derive(Serialize)]
struct GenerateSidecar<'a> {
    timestamp: String,
    spec: &'a SyntheticSpec,
    seed: u64,
    n: usize,
    dim: usize,
    num_classes: usize,
    fractions: Option<Vec<f64>>,
    truth: Option<JointTruth>,
    representations_file: String,
    attributes_file: String,
}

pub fn run_generate(
    spec: SyntheticSpec,
    seed_override: Option<u64>,
    format: MatrixFormat,
    out_prefix: &Path,
) -> Result<DatasetPaths> {
    let spec = match seed_override {
        Some(seed) => spec.with_seed(seed),
        None => spec,
    };
    let out = generate(&spec)?;
    let paths = dataset_paths(out_prefix, format);
    write_dataset(&out.data, &paths, format)?;
    let sidecar = GenerateSidecar {
        timestamp: timestamp_now(),
        spec: &spec,
        seed: spec.seed(),
        n: out.data.len(),
        dim: out.data.dim(),
        num_classes: out.data.num_classes(),
        fractions: out.fractions,
        truth: out.truth,
        representations_file: paths.representations.display().to_string(),
        attributes_file: paths.attributes.display().to_string(),
    };
    write_text(
        &paths.sidecar,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&sidecar).expect("serializable")
        ),
    )?;
    Ok(paths)
}

#[derive(Serialize)]
struct PerturbSidecar {
    timestamp: String,
    mode: PerturbationMode,
    seed: u64,
    input_representations: String,
    input_representations_sha256: String,
    input_attributes: String,
    input_attributes_sha256: String,
}

pub fn run_perturb(
    representations: &Path,
    attributes: &Path,
    mode: PerturbationMode,
    seed: u64,
    format: MatrixFormat,
    out_prefix: &Path,
) -> Result<DatasetPaths> {
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
    let data = RepresentationSet::new(reps, attrs, names)?;
    let perturbed = perturb(&data, mode, seed)?;

    let paths = dataset_paths(out_prefix, format);
    write_dataset(&perturbed, &paths, format)?;
    let sidecar = PerturbSidecar {
        timestamp: timestamp_now(),
        mode,
        seed,
        input_representations: representations.display().to_string(),
        input_representations_sha256: sha256_file(representations)?,
        input_attributes: attributes.display().to_string(),
        input_attributes_sha256: sha256_file(attributes)?,
    };
    write_text(
        &paths.sidecar,
        &format!(
            "{}\n",
            serde_json::to_string_pretty(&sidecar).expect("serializable")
        ),
    )?;
    Ok(paths)
}
