//! Estimator-level properties that need full training runs: lower-bound
//! behavior against known MI, ordering along a dependence ladder, and the
//! marginal term's reuse of the joint attribute batch.

use fairlens::datagen::{gen_discrete_joint, gen_percentage};
use fairlens::metrics::rlb;
use fairlens::mine::{estimate_mi, sample_joint_and_marginal, MineBatch, MineConfig, MineModel};
use fairlens::sweep::map_cells;
use fairlens::RepresentationSet;
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn config(seed: u64) -> MineConfig {
    MineConfig {
        batch_size: 256,
        map_dim: 16,
        stats_hidden: vec![64, 64],
        max_iters: 2000,
        convergence_window: 200,
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
fn deterministic_dependence_approaches_ln2_from_below() {
    let est = estimate_mi(&one_hot_dataset(2000), &config(3)).unwrap();
    assert!(
        (0.62..=0.6932).contains(&est.mi),
        "mi = {} outside [0.62, 0.6932]",
        est.mi
    );
}

#[test]
fn smoothed_trace_is_nondecreasing_within_tolerance() {
    let est = estimate_mi(&one_hot_dataset(2000), &config(5)).unwrap();
    let trace = &est.trace.mi_estimates;
    let w = 200usize.min(trace.len());
    let smoothed: Vec<f64> = (0..=trace.len() - w)
        .map(|t| trace[t..t + w].iter().sum::<f64>() / w as f64)
        .collect();
    for (i, pair) in smoothed.windows(2).enumerate() {
        assert!(
            pair[1] >= pair[0] - 0.05,
            "smoothed trace dips at {i}: {} -> {}",
            pair[0],
            pair[1]
        );
    }
    // ... and it approaches ln 2 from below
    let last = *smoothed.last().unwrap();
    assert!(last > smoothed[0], "no climb: {} -> {last}", smoothed[0]);
    assert!(
        (0.62..=0.6932).contains(&last),
        "final smoothed estimate {last} outside [0.62, 0.6932]"
    );
}

#[test]
fn known_half_entropy_ratio_lands_in_band() {
    // flip probability 0.1102 gives I/H(Z) = 0.50 for a balanced binary input
    let table = vec![vec![0.4449, 0.0551], vec![0.0551, 0.4449]];
    let out = gen_discrete_joint(4000, &table, 2, 17).unwrap();
    let truth = out.truth.unwrap();
    let ratio = truth.true_mi / truth.true_entropy;
    assert!((ratio - 0.5).abs() < 0.01, "table ratio = {ratio}");

    let frag = rlb(&out.data, &config(2)).unwrap();
    assert!(
        (0.40..=0.55).contains(&frag.rlb),
        "rlb = {} outside [0.40, 0.55]",
        frag.rlb
    );
}

#[test]
fn zero_dependence_reads_zero_even_when_imbalanced() {
    let out = gen_percentage(1500, &[0.3, 0.7], 0.0, 2.0, 2, 44).unwrap();
    let mut cfg = config(9);
    cfg.batch_size = 128;
    cfg.max_iters = 1500;
    let frag = rlb(&out.data, &cfg).unwrap();
    assert!(frag.rlb <= 0.05, "rlb = {}", frag.rlb);
}

#[test]
fn rlb_orders_a_five_point_dependence_ladder() {
    let deltas = [0.1, 0.3, 0.5, 0.7, 0.9];
    let cells: Vec<(f64, u64)> = deltas
        .iter()
        .flat_map(|&d| (0..5u64).map(move |seed| (d, seed)))
        .collect();
    let values: Vec<f64> = map_cells(&cells, |&(delta, seed)| {
        let out = gen_percentage(1500, &[0.5, 0.5], delta, 2.0, 4, 700 + seed).unwrap();
        let mut cfg = config(seed);
        cfg.batch_size = 128;
        cfg.stats_hidden = vec![32, 32];
        cfg.map_dim = 8;
        cfg.max_iters = 1500;
        cfg.convergence_window = 100;
        rlb(&out.data, &cfg).unwrap().rlb
    });
    let means: Vec<f64> = deltas
        .iter()
        .enumerate()
        .map(|(i, _)| values[i * 5..(i + 1) * 5].iter().sum::<f64>() / 5.0)
        .collect();
    // strictly increasing over all five rungs is Spearman rank correlation 1.0
    for w in means.windows(2) {
        assert!(
            w[0] < w[1],
            "ladder means not strictly increasing: {means:?}"
        );
    }
}

#[test]
fn marginal_term_consumes_the_joint_attributes() {
    // same representations, different joint attributes: the marginal scores
    // must change, because the marginal term pairs the marginal
    // representations with the joint batch's attributes
    let model = MineModel::new(3, 2, &config(0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let data = {
        let attrs: Vec<u32> = (0..64).map(|i| (i % 2) as u32).collect();
        let reps = Array2::from_shape_fn((64, 3), |_| rand::Rng::gen_range(&mut rng, -1.0..1.0));
        RepresentationSet::with_default_names(reps, attrs).unwrap()
    };
    let batch = sample_joint_and_marginal(&data, 16, &mut rng).unwrap();
    let flipped = MineBatch {
        joint_reps: batch.joint_reps.clone(),
        joint_attrs: batch.joint_attrs.iter().map(|&a| 1 - a).collect(),
        marginal_reps: batch.marginal_reps.clone(),
    };
    let base = model.score_batch(&batch).unwrap();
    let alt = model.score_batch(&flipped).unwrap();
    assert_ne!(base.o_marginal, alt.o_marginal);
    assert_ne!(base.o_joint, alt.o_joint);
}
