//! Representation-level bias: estimated mutual information between
//! representations and a protected attribute, normalized by the attribute's
//! empirical entropy.

use crate::data::{joint_attribute, RepresentationSet};
use crate::metrics::empirical_entropy;
use crate::mine::{estimate_mi, MineConfig, TrainTrace};
use crate::{Error, Result};

/// One RLB evaluation. `rlb_raw = mi / entropy` is kept as computed; `rlb`
/// is its clamp to [0, 1]. True MI never exceeds H(Z), but a neural estimate
/// can, so both are reported.
#[derive(Debug, Clone)]
pub struct RlbFragment {
    pub mi: f64,
    pub entropy: f64,
    pub rlb_raw: f64,
    pub rlb: f64,
    pub trace: TrainTrace,
}

/// Estimate RLB for the set's attribute.
pub fn rlb(data: &RepresentationSet, config: &MineConfig) -> Result<RlbFragment> {
    let entropy = empirical_entropy(data.attributes())?;
    if entropy <= 0.0 {
        return Err(Error::DegenerateAttribute(
            "bias with respect to a constant attribute is undefined (H = 0)".into(),
        ));
    }
    let est = estimate_mi(data, config)?;
    let rlb_raw = est.mi / entropy;
    Ok(RlbFragment {
        mi: est.mi,
        entropy,
        rlb_raw,
        rlb: rlb_raw.clamp(0.0, 1.0),
        trace: est.trace,
    })
}

/// RLB per attribute column: each column is estimated independently against
/// the same representations.
pub fn rlb_per_attribute(
    data: &RepresentationSet,
    extra_columns: &[Vec<u32>],
    config: &MineConfig,
) -> Result<Vec<RlbFragment>> {
    let mut out = vec![rlb(data, config)?];
    for col in extra_columns {
        let set =
            RepresentationSet::with_default_names(data.representations().clone(), col.clone())?;
        out.push(rlb(&set, config)?);
    }
    Ok(out)
}

/// RLB against the product label of several attribute columns combined into
/// one joint attribute.
pub fn rlb_joint(
    data: &RepresentationSet,
    extra_columns: &[Vec<u32>],
    config: &MineConfig,
) -> Result<RlbFragment> {
    let mut columns: Vec<&[u32]> = vec![data.attributes()];
    for col in extra_columns {
        if col.len() != data.len() {
            return Err(Error::Dimension(format!(
                "extra attribute column has {} labels for {} samples",
                col.len(),
                data.len()
            )));
        }
        columns.push(col);
    }
    let (combined, total) = joint_attribute(&columns)?;
    let names = (0..total).map(|i| format!("joint_{i}")).collect();
    let set = RepresentationSet::new(data.representations().clone(), combined, names)?;
    rlb(&set, config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fast_config(seed: u64) -> MineConfig {
        MineConfig {
            batch_size: 128,
            map_dim: 8,
            stats_hidden: vec![32, 32],
            max_iters: 1500,
            convergence_window: 100,
            seed,
            ..MineConfig::default()
        }
    }

    fn one_hot_dataset(n: usize) -> RepresentationSet {
        let attrs: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        let reps = Array2::from_shape_fn(
            (n, 2),
            |(i, j)| {
                if attrs[i] as usize == j {
                    1.0
                } else {
                    0.0
                }
            },
        );
        RepresentationSet::with_default_names(reps, attrs).unwrap()
    }

    #[test]
    fn deterministic_dependence_scores_high() {
        let frag = rlb(&one_hot_dataset(1000), &fast_config(2)).unwrap();
        assert!(frag.rlb >= 0.90, "rlb = {}", frag.rlb);
        assert!(frag.rlb <= 1.0);
        assert!((frag.entropy - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn independent_representation_scores_near_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let n = 1000;
        let attrs: Vec<u32> = (0..n).map(|i| (i % 2) as u32).collect();
        let reps = Array2::from_shape_fn((n, 4), |_| rng.gen_range(-1.0..1.0));
        let data = RepresentationSet::with_default_names(reps, attrs).unwrap();
        let frag = rlb(&data, &fast_config(5)).unwrap();
        assert!(frag.rlb <= 0.05, "rlb = {}", frag.rlb);
    }

    #[test]
    fn constant_attribute_is_degenerate() {
        let reps = Array2::zeros((10, 2));
        let data = RepresentationSet::new(reps, vec![0; 10], vec!["x".into()]).unwrap();
        assert!(matches!(
            rlb(&data, &fast_config(0)),
            Err(Error::DegenerateAttribute(_))
        ));
    }

    #[test]
    fn clamp_keeps_raw_value() {
        let frag = RlbFragment {
            mi: 0.8,
            entropy: 0.5,
            rlb_raw: 1.6,
            rlb: 1.6f64.clamp(0.0, 1.0),
            trace: TrainTrace::default(),
        };
        assert_eq!(frag.rlb, 1.0);
        assert_eq!(frag.rlb_raw, 1.6);
    }

    #[test]
    fn joint_mode_combines_columns() {
        // Attribute 0 alone is balanced binary; adding a second column makes
        // a 4-cell joint attribute whose entropy is ln 4.
        let data = one_hot_dataset(400);
        let extra: Vec<u32> = (0..400).map(|i| ((i / 2) % 2) as u32).collect();
        let frag = rlb_joint(&data, &[extra], &fast_config(3)).unwrap();
        assert!((frag.entropy - 4f64.ln()).abs() < 1e-9);
    }
}
