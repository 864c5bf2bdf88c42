//! Synthetic dataset factory: color-coded feature datasets with a tunable
//! spread, attribute-percentage and entropy-controlled samplers, discrete
//! joints with closed-form MI for oracle testing, and the four spurious
//! perturbation modes.
//!
//! Every generator is a pure function of its spec, including the seed.

use crate::data::RepresentationSet;
use crate::{Error, Result};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Center colors for the color-coded generator. Neighboring classes sit close
/// together on a spectral gradient (per-channel steps of at most 0.08), so a
/// growing spread σ produces growing overlap between adjacent classes.
pub const CENTER_COLORS: [[f64; 3]; 10] = [
    [0.90, 0.16, 0.20],
    [0.82, 0.22, 0.16],
    [0.74, 0.30, 0.14],
    [0.64, 0.38, 0.12],
    [0.54, 0.46, 0.14],
    [0.44, 0.54, 0.18],
    [0.34, 0.60, 0.26],
    [0.26, 0.64, 0.36],
    [0.18, 0.66, 0.48],
    [0.12, 0.66, 0.60],
];

/// Declarative description of a generated dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyntheticSpec {
    /// Per-sample color = class center + uniform noise in ±σ per channel,
    /// clamped to [0, 1], plus standard-normal distractor features. The
    /// attribute is the class label.
    Colored {
        n: usize,
        class_count: usize,
        sigma: f64,
        #[serde(default)]
        noise_dim: usize,
        /// Class weights; uniform when absent.
        #[serde(default)]
        class_fractions: Option<Vec<f64>>,
        /// Center override; [`CENTER_COLORS`] when absent.
        #[serde(default)]
        centers: Option<Vec<[f64; 3]>>,
        #[serde(default)]
        seed: u64,
    },
    /// Attributes sampled from the given fractions; the representation mixes
    /// the one-hot attribute with Gaussian noise at a strength that grows
    /// with the imbalance of the fractions, emulating that more imbalanced
    /// training data leaves more attribute signal in a model's embeddings.
    Percentage {
        n: usize,
        fractions: Vec<f64>,
        /// Base encoding strength δ in [0, 1].
        dependence: f64,
        /// Imbalance coupling c: the effective strength is
        /// min(1, δ·(1 + c·imbalance)) with imbalance the total-variation
        /// distance of the fractions from uniform.
        #[serde(default = "default_coupling")]
        coupling: f64,
        #[serde(default)]
        noise_dim: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Numerically invert the entropy function to find class fractions, then
    /// generate exactly like `Percentage`.
    EntropyTarget {
        n: usize,
        class_count: usize,
        target_entropy: f64,
        dependence: f64,
        #[serde(default = "default_coupling")]
        coupling: f64,
        #[serde(default)]
        noise_dim: usize,
        #[serde(default)]
        seed: u64,
    },
    /// Sample (c, z) pairs from an explicit joint table; the representation
    /// is one_hot(c) plus distractors. The plug-in MI and attribute entropy
    /// of the table are returned as ground truth.
    DiscreteJoint {
        n: usize,
        joint_table: Vec<Vec<f64>>,
        #[serde(default)]
        noise_dim: usize,
        #[serde(default)]
        seed: u64,
    },
}

fn default_coupling() -> f64 {
    2.0
}

impl SyntheticSpec {
    pub fn seed(&self) -> u64 {
        match self {
            SyntheticSpec::Colored { seed, .. }
            | SyntheticSpec::Percentage { seed, .. }
            | SyntheticSpec::EntropyTarget { seed, .. }
            | SyntheticSpec::DiscreteJoint { seed, .. } => *seed,
        }
    }

    pub fn with_seed(mut self, new_seed: u64) -> Self {
        match &mut self {
            SyntheticSpec::Colored { seed, .. }
            | SyntheticSpec::Percentage { seed, .. }
            | SyntheticSpec::EntropyTarget { seed, .. }
            | SyntheticSpec::DiscreteJoint { seed, .. } => *seed = new_seed,
        }
        self
    }
}

/// Ground truth attached to discrete-joint datasets.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct JointTruth {
    pub true_mi: f64,
    pub true_entropy: f64,
}

/// A generated dataset plus whatever side information the generator resolved.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub data: RepresentationSet,
    /// Present for `DiscreteJoint`.
    pub truth: Option<JointTruth>,
    /// Class fractions actually used; resolved by `EntropyTarget`, echoed by
    /// `Percentage`.
    pub fractions: Option<Vec<f64>>,
}

/// The four spurious-perturbation modes. All preserve n and d; `ShuffleAttrs`
/// preserves the attribute multiset exactly and `ResampleAttrs` preserves it
/// in expectation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PerturbationMode {
    /// R_S: independently permute each sample's feature entries.
    #[serde(rename = "R_S")]
    ShuffleFeatures,
    /// R_G: replace every representation with a different sample's, via a
    /// seeded cyclic derangement so no sample keeps its own.
    #[serde(rename = "R_G")]
    UnpairedReps,
    /// Z_S: apply one random permutation to the attribute vector.
    #[serde(rename = "Z_S")]
    ShuffleAttrs,
    /// Z_G: resample attributes i.i.d. from the empirical marginal.
    #[serde(rename = "Z_G")]
    ResampleAttrs,
}

impl std::fmt::Display for PerturbationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PerturbationMode::ShuffleFeatures => "R_S",
            PerturbationMode::UnpairedReps => "R_G",
            PerturbationMode::ShuffleAttrs => "Z_S",
            PerturbationMode::ResampleAttrs => "Z_G",
        };
        f.write_str(name)
    }
}

impl std::str::FromStr for PerturbationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "R_S" => Ok(PerturbationMode::ShuffleFeatures),
            "R_G" => Ok(PerturbationMode::UnpairedReps),
            "Z_S" => Ok(PerturbationMode::ShuffleAttrs),
            "Z_G" => Ok(PerturbationMode::ResampleAttrs),
            other => Err(Error::Config(format!(
                "unknown perturbation mode {other:?}; expected one of R_S, R_G, Z_S, Z_G"
            ))),
        }
    }
}

/// Dispatch on the spec kind.
pub fn generate(spec: &SyntheticSpec) -> Result<GeneratedDataset> {
    match spec {
        SyntheticSpec::Colored {
            n,
            class_count,
            sigma,
            noise_dim,
            class_fractions,
            centers,
            seed,
        } => gen_colored(
            *n,
            *class_count,
            *sigma,
            *noise_dim,
            class_fractions.as_deref(),
            centers.as_deref(),
            *seed,
        ),
        SyntheticSpec::Percentage {
            n,
            fractions,
            dependence,
            coupling,
            noise_dim,
            seed,
        } => gen_percentage(*n, fractions, *dependence, *coupling, *noise_dim, *seed),
        SyntheticSpec::EntropyTarget {
            n,
            class_count,
            target_entropy,
            dependence,
            coupling,
            noise_dim,
            seed,
        } => gen_entropy_target(
            *n,
            *class_count,
            *target_entropy,
            *dependence,
            *coupling,
            *noise_dim,
            *seed,
        ),
        SyntheticSpec::DiscreteJoint {
            n,
            joint_table,
            noise_dim,
            seed,
        } => gen_discrete_joint(*n, joint_table, *noise_dim, *seed),
    }
}

fn validate_fractions(fractions: &[f64]) -> Result<()> {
    if fractions.is_empty() {
        return Err(Error::Config("fractions must not be empty".into()));
    }
    if fractions.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(Error::Config(
            "fractions must be finite and non-negative".into(),
        ));
    }
    let sum: f64 = fractions.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "fractions must sum to 1 (got {sum})"
        )));
    }
    Ok(())
}

fn sample_class(fractions: &[f64], rng: &mut impl Rng) -> u32 {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (i, &p) in fractions.iter().enumerate() {
        acc += p;
        if u < acc {
            return i as u32;
        }
    }
    (fractions.len() - 1) as u32
}

/// Color-coded generator: see [`SyntheticSpec::Colored`].
pub fn gen_colored(
    n: usize,
    class_count: usize,
    sigma: f64,
    noise_dim: usize,
    class_fractions: Option<&[f64]>,
    centers: Option<&[[f64; 3]]>,
    seed: u64,
) -> Result<GeneratedDataset> {
    let default_centers: &[[f64; 3]] = &CENTER_COLORS;
    let centers = centers.unwrap_or(default_centers);
    if n < 2 {
        return Err(Error::Config(format!("n must be at least 2, got {n}")));
    }
    if class_count == 0 || class_count > centers.len() {
        return Err(Error::Config(format!(
            "class_count {class_count} must be in 1..={} (available center colors)",
            centers.len()
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Config(format!(
            "sigma must be non-negative, got {sigma}"
        )));
    }
    let uniform = vec![1.0 / class_count as f64; class_count];
    let fractions = match class_fractions {
        Some(f) => {
            if f.len() != class_count {
                return Err(Error::Config(format!(
                    "{} class fractions for {class_count} classes",
                    f.len()
                )));
            }
            validate_fractions(f)?;
            f.to_vec()
        }
        None => uniform,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = 3 + noise_dim;
    let mut reps = Array2::zeros((n, d));
    let mut attrs = Vec::with_capacity(n);
    for i in 0..n {
        let z = sample_class(&fractions, &mut rng);
        attrs.push(z);
        let center = centers[z as usize];
        for ch in 0..3 {
            // uniform offset in ±σ; σ = 0 collapses to the center exactly
            let offset = sigma * (2.0 * rng.gen::<f64>() - 1.0);
            reps[(i, ch)] = (center[ch] + offset).clamp(0.0, 1.0);
        }
        for j in 0..noise_dim {
            reps[(i, 3 + j)] = rng.sample(StandardNormal);
        }
    }

    let names = (0..class_count).map(|i| format!("color_{i}")).collect();
    let data = RepresentationSet::new(reps, attrs, names)?;
    Ok(GeneratedDataset {
        data,
        truth: None,
        fractions: Some(fractions),
    })
}

/// Attribute-percentage generator: see [`SyntheticSpec::Percentage`].
pub fn gen_percentage(
    n: usize,
    fractions: &[f64],
    dependence: f64,
    coupling: f64,
    noise_dim: usize,
    seed: u64,
) -> Result<GeneratedDataset> {
    if n < 2 {
        return Err(Error::Config(format!("n must be at least 2, got {n}")));
    }
    validate_fractions(fractions)?;
    if !(0.0..=1.0).contains(&dependence) {
        return Err(Error::Config(format!(
            "dependence must be in [0, 1], got {dependence}"
        )));
    }
    if !(coupling >= 0.0 && coupling.is_finite()) {
        return Err(Error::Config(format!(
            "coupling must be non-negative, got {coupling}"
        )));
    }

    let m = fractions.len();
    let imbalance = 0.5
        * fractions
            .iter()
            .map(|&p| (p - 1.0 / m as f64).abs())
            .sum::<f64>();
    // Saturate at full strength: past 1 the mixing formula would re-introduce
    // noise and undo the imbalance coupling.
    let delta_eff = (dependence * (1.0 + coupling * imbalance)).min(1.0);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = m + noise_dim;
    let mut reps = Array2::zeros((n, d));
    let mut attrs = Vec::with_capacity(n);
    for i in 0..n {
        let z = sample_class(fractions, &mut rng);
        attrs.push(z);
        for j in 0..m {
            let hot = if j == z as usize { 1.0 } else { 0.0 };
            let noise: f64 = rng.sample(StandardNormal);
            reps[(i, j)] = delta_eff * hot + (1.0 - delta_eff) * noise;
        }
        for j in 0..noise_dim {
            reps[(i, m + j)] = rng.sample(StandardNormal);
        }
    }

    let names = (0..m).map(|i| format!("group_{i}")).collect();
    let data = RepresentationSet::new(reps, attrs, names)?;
    Ok(GeneratedDataset {
        data,
        truth: None,
        fractions: Some(fractions.to_vec()),
    })
}

/// Entropy of the one-vs-rest fraction family at head probability q.
fn one_vs_rest_entropy(q: f64, m: usize) -> f64 {
    let mut h = 0.0;
    if q > 0.0 {
        h -= q * q.ln();
    }
    let rest = 1.0 - q;
    if rest > 0.0 {
        let each = rest / (m - 1) as f64;
        h -= rest * each.ln();
    }
    h
}

/// Invert the entropy function within the symmetric one-vs-rest family:
/// one class gets probability q ∈ [1/m, 1], the rest share 1 − q equally.
/// Entropy decreases monotonically from ln(m) at q = 1/m to 0 at q = 1,
/// so bisection pins q for any target in [0, ln(m)].
///
/// The inverse is ill-conditioned at the maximum (dH/dq = 0 there), where a
/// target that is merely a rounded form of ln(m) — 0.6931, 1.386 — would land
/// on visibly skewed fractions. Targets within 1e-3 of ln(m) therefore snap
/// to the exact balance point.
pub fn fractions_for_entropy(class_count: usize, target: f64) -> Result<Vec<f64>> {
    if class_count == 0 {
        return Err(Error::Config("class_count must be positive".into()));
    }
    let max_h = (class_count as f64).ln();
    if !(0.0..=max_h + 1e-9).contains(&target) {
        return Err(Error::Config(format!(
            "target entropy {target} outside [0, ln({class_count})] = [0, {max_h:.6}]"
        )));
    }
    if class_count == 1 {
        return Ok(vec![1.0]);
    }
    let m = class_count;
    if max_h - target <= 1e-3 {
        return Ok(vec![1.0 / m as f64; m]);
    }
    let (mut lo, mut hi) = (1.0 / m as f64, 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if one_vs_rest_entropy(mid, m) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let q = 0.5 * (lo + hi);
    let mut fractions = vec![(1.0 - q) / (m - 1) as f64; m];
    fractions[0] = q;
    // renormalize the last entry against accumulated rounding
    let sum: f64 = fractions.iter().sum();
    fractions[m - 1] += 1.0 - sum;
    Ok(fractions)
}

/// Entropy-controlled generator: see [`SyntheticSpec::EntropyTarget`].
pub fn gen_entropy_target(
    n: usize,
    class_count: usize,
    target_entropy: f64,
    dependence: f64,
    coupling: f64,
    noise_dim: usize,
    seed: u64,
) -> Result<GeneratedDataset> {
    let fractions = fractions_for_entropy(class_count, target_entropy)?;
    gen_percentage(n, &fractions, dependence, coupling, noise_dim, seed)
}

/// Plug-in MI of a joint table, in nats.
pub fn table_mutual_information(table: &[Vec<f64>]) -> f64 {
    let rows = table.len();
    let cols = table[0].len();
    let row_marginal: Vec<f64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_marginal: Vec<f64> = (0..cols)
        .map(|j| table.iter().map(|r| r[j]).sum())
        .collect();
    let mut mi = 0.0;
    for i in 0..rows {
        for j in 0..cols {
            let p = table[i][j];
            if p > 0.0 {
                mi += p * (p / (row_marginal[i] * col_marginal[j])).ln();
            }
        }
    }
    mi.max(0.0)
}

/// Entropy of a joint table's attribute (column) marginal, in nats.
pub fn table_attribute_entropy(table: &[Vec<f64>]) -> f64 {
    let cols = table[0].len();
    (0..cols)
        .map(|j| {
            let p: f64 = table.iter().map(|r| r[j]).sum();
            if p > 0.0 {
                -p * p.ln()
            } else {
                0.0
            }
        })
        .sum()
}

/// Discrete-joint generator: see [`SyntheticSpec::DiscreteJoint`].
pub fn gen_discrete_joint(
    n: usize,
    table: &[Vec<f64>],
    noise_dim: usize,
    seed: u64,
) -> Result<GeneratedDataset> {
    if n < 2 {
        return Err(Error::Config(format!("n must be at least 2, got {n}")));
    }
    if table.is_empty() || table[0].is_empty() {
        return Err(Error::Config("joint table must be non-empty".into()));
    }
    let cols = table[0].len();
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::Config(
            "joint table rows have differing lengths".into(),
        ));
    }
    let flat: Vec<f64> = table.iter().flatten().copied().collect();
    if flat.iter().any(|&p| !p.is_finite() || p < 0.0) {
        return Err(Error::Config(
            "joint table entries must be finite and non-negative".into(),
        ));
    }
    let sum: f64 = flat.iter().sum();
    if (sum - 1.0).abs() > 1e-12 {
        return Err(Error::Config(format!(
            "joint table must sum to 1 (got {sum})"
        )));
    }

    let truth = JointTruth {
        true_mi: table_mutual_information(table),
        true_entropy: table_attribute_entropy(table),
    };

    let rows = table.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = rows + noise_dim;
    let mut reps = Array2::zeros((n, d));
    let mut attrs = Vec::with_capacity(n);
    for i in 0..n {
        let cell = sample_class(&flat, &mut rng) as usize;
        let (c, z) = (cell / cols, cell % cols);
        attrs.push(z as u32);
        reps[(i, c)] = 1.0;
        for j in 0..noise_dim {
            reps[(i, rows + j)] = rng.sample(StandardNormal);
        }
    }

    let names = (0..cols).map(|j| format!("z_{j}")).collect();
    let data = RepresentationSet::new(reps, attrs, names)?;
    Ok(GeneratedDataset {
        data,
        truth: Some(truth),
        fractions: None,
    })
}

/// Apply one spurious perturbation. See [`PerturbationMode`] for the modes.
pub fn perturb(
    data: &RepresentationSet,
    mode: PerturbationMode,
    seed: u64,
) -> Result<RepresentationSet> {
    let n = data.len();
    if n < 2 {
        return Err(Error::Data(format!(
            "perturbation needs at least 2 samples, got {n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match mode {
        PerturbationMode::ShuffleFeatures => {
            let d = data.dim();
            let mut reps = data.representations().clone();
            for mut row in reps.rows_mut() {
                // Fisher-Yates over the feature entries of this row
                for i in (1..d).rev() {
                    let j = rng.gen_range(0..=i);
                    row.swap(i, j);
                }
            }
            data.with_representations(reps)
        }
        PerturbationMode::UnpairedReps => {
            // Sattolo's algorithm: a uniform cyclic permutation, hence a
            // derangement; no sample keeps its own representation.
            let mut perm: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..i);
                perm.swap(i, j);
            }
            let reps = data.representations();
            let mut out = Array2::zeros(reps.dim());
            for (i, &src) in perm.iter().enumerate() {
                out.row_mut(i).assign(&reps.row(src));
            }
            data.with_representations(out)
        }
        PerturbationMode::ShuffleAttrs => {
            let mut attrs = data.attributes().to_vec();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                attrs.swap(i, j);
            }
            data.with_attributes(attrs)
        }
        PerturbationMode::ResampleAttrs => {
            let counts = data.class_counts();
            let fractions: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
            let attrs: Vec<u32> = (0..n).map(|_| sample_class(&fractions, &mut rng)).collect();
            data.with_attributes(attrs)
        }
    }
}
