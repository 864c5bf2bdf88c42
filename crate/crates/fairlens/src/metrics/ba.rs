//! Bias amplification: the shift in outcome–attribute co-occurrence
//! fractions between training data and model evaluation.

use crate::{Error, Result};
use ndarray::Array2;

/// Co-occurrence counts of (outcome, attribute) pairs, `[outcomes × attrs]`.
#[derive(Debug, Clone)]
pub struct OutcomeAttributeCounts {
    counts: Array2<f64>,
}

impl OutcomeAttributeCounts {
    pub fn from_matrix(counts: Array2<f64>) -> Result<Self> {
        if counts.nrows() == 0 || counts.ncols() == 0 {
            return Err(Error::Data("count table must be non-empty".into()));
        }
        if counts.iter().any(|&c| !c.is_finite() || c < 0.0) {
            return Err(Error::Data("counts must be finite and non-negative".into()));
        }
        Ok(Self { counts })
    }

    /// Tally paired (outcome, attribute) observations into a table sized by
    /// the maxima seen.
    pub fn from_pairs(outcomes: &[u32], attributes: &[u32]) -> Result<Self> {
        if outcomes.len() != attributes.len() {
            return Err(Error::Dimension(format!(
                "{} outcomes vs {} attributes",
                outcomes.len(),
                attributes.len()
            )));
        }
        if outcomes.is_empty() {
            return Err(Error::Data("cannot tally an empty pair list".into()));
        }
        let n_out = *outcomes.iter().max().unwrap() as usize + 1;
        let n_attr = *attributes.iter().max().unwrap() as usize + 1;
        let mut counts = Array2::zeros((n_out, n_attr));
        for (&o, &z) in outcomes.iter().zip(attributes) {
            counts[(o as usize, z as usize)] += 1.0;
        }
        Self::from_matrix(counts)
    }

    pub fn num_outcomes(&self) -> usize {
        self.counts.nrows()
    }

    pub fn num_attributes(&self) -> usize {
        self.counts.ncols()
    }

    pub fn count(&self, outcome: usize, attribute: usize) -> f64 {
        self.counts[(outcome, attribute)]
    }

    /// Embed into a larger table, padding new cells with zero counts.
    pub fn resized(&self, num_outcomes: usize, num_attributes: usize) -> Result<Self> {
        if num_outcomes < self.num_outcomes() || num_attributes < self.num_attributes() {
            return Err(Error::Dimension(format!(
                "cannot shrink a {}×{} count table to {num_outcomes}×{num_attributes}",
                self.num_outcomes(),
                self.num_attributes()
            )));
        }
        let mut counts = Array2::zeros((num_outcomes, num_attributes));
        counts
            .slice_mut(ndarray::s![..self.num_outcomes(), ..self.num_attributes()])
            .assign(&self.counts);
        Self::from_matrix(counts)
    }

    /// Bias score b(o, z) = count(o, z) / Σ_z' count(o, z'); None when the
    /// outcome never occurs.
    fn bias_score(&self, o: usize, z: usize) -> Option<f64> {
        let total: f64 = self.counts.row(o).sum();
        if total == 0.0 {
            None
        } else {
            Some(self.counts[(o, z)] / total)
        }
    }
}

/// BA = mean over pairs with b_train(o, z) > 1/m of (b_eval(o, z) − b_train(o, z)),
/// where m is the attribute alphabet size. Pairs at or below the 1/m
/// threshold are not selected; an empty selection yields 0.
pub fn bias_amplification(
    train: &OutcomeAttributeCounts,
    eval: &OutcomeAttributeCounts,
) -> Result<f64> {
    if train.num_outcomes() != eval.num_outcomes()
        || train.num_attributes() != eval.num_attributes()
    {
        return Err(Error::Dimension(format!(
            "train table is {}×{} but eval table is {}×{}",
            train.num_outcomes(),
            train.num_attributes(),
            eval.num_outcomes(),
            eval.num_attributes()
        )));
    }
    let m = train.num_attributes() as f64;
    let mut deltas = Vec::new();
    for o in 0..train.num_outcomes() {
        let eval_present = eval.counts.row(o).sum() > 0.0;
        let train_scores: Vec<Option<f64>> = (0..train.num_attributes())
            .map(|z| train.bias_score(o, z))
            .collect();
        if train_scores[0].is_none() {
            if eval_present {
                return Err(Error::Data(format!(
                    "outcome {o} occurs in evaluation but never in training"
                )));
            }
            continue;
        }
        for (z, score) in train_scores.iter().enumerate() {
            let b_train = score.expect("checked above");
            if b_train > 1.0 / m {
                let b_eval = eval.bias_score(o, z).unwrap_or(0.0);
                deltas.push(b_eval - b_train);
            }
        }
    }
    if deltas.is_empty() {
        return Ok(0.0);
    }
    Ok(deltas.iter().sum::<f64>() / deltas.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identical_tables_give_zero() {
        let t = OutcomeAttributeCounts::from_matrix(array![[30.0, 10.0], [5.0, 15.0]]).unwrap();
        assert_eq!(bias_amplification(&t, &t).unwrap(), 0.0);
    }

    #[test]
    fn single_outcome_hand_value() {
        // One outcome, two attributes: train b(o, z=1) = 0.8 > 1/2 selected;
        // eval b = 0.9 gives BA = 0.1. The z=0 pair (0.2) is not selected.
        let train = OutcomeAttributeCounts::from_matrix(array![[20.0, 80.0]]).unwrap();
        let eval = OutcomeAttributeCounts::from_matrix(array![[10.0, 90.0]]).unwrap();
        let ba = bias_amplification(&train, &eval).unwrap();
        assert!((ba - 0.1).abs() < 1e-12, "ba = {ba}");
    }

    #[test]
    fn attribute_swap_negates_selected_deltas() {
        // 2×2 table: swapping the attribute labels mirrors the bias scores,
        // so the delta of the selected pair flips sign.
        let train = OutcomeAttributeCounts::from_matrix(array![[30.0, 70.0]]).unwrap();
        let eval = OutcomeAttributeCounts::from_matrix(array![[20.0, 80.0]]).unwrap();
        let ba = bias_amplification(&train, &eval).unwrap();

        let train_swapped = OutcomeAttributeCounts::from_matrix(array![[70.0, 30.0]]).unwrap();
        let eval_swapped = OutcomeAttributeCounts::from_matrix(array![[80.0, 20.0]]).unwrap();
        let ba_swapped = bias_amplification(&train_swapped, &eval_swapped).unwrap();
        // Both selections pick the dominant cell (z=1 before, z=0 after);
        // its delta is +0.1 either way, while the mirrored non-selected cell
        // carries −0.1. Restricting to the same selected pair, the swap
        // negates the per-pair delta.
        assert!((ba - 0.1).abs() < 1e-12);
        assert!((ba_swapped - 0.1).abs() < 1e-12);
        let delta_selected_before: f64 = 0.8 - 0.7;
        let delta_same_pair_after: f64 = 0.2 - 0.3;
        assert!((delta_selected_before + delta_same_pair_after).abs() < 1e-12);
    }

    #[test]
    fn unseen_training_outcome_is_an_error() {
        let train = OutcomeAttributeCounts::from_matrix(array![[10.0, 10.0], [0.0, 0.0]]).unwrap();
        let eval = OutcomeAttributeCounts::from_matrix(array![[10.0, 10.0], [3.0, 1.0]]).unwrap();
        assert!(matches!(
            bias_amplification(&train, &eval),
            Err(Error::Data(_))
        ));
        // an outcome absent from both tables is fine
        let eval_ok =
            OutcomeAttributeCounts::from_matrix(array![[10.0, 10.0], [0.0, 0.0]]).unwrap();
        assert!(bias_amplification(&train, &eval_ok).is_ok());
    }

    #[test]
    fn from_pairs_tallies() {
        let t = OutcomeAttributeCounts::from_pairs(&[0, 0, 1, 1, 1], &[0, 1, 1, 1, 0]).unwrap();
        assert_eq!(t.counts, array![[1.0, 1.0], [1.0, 2.0]]);
        assert!(OutcomeAttributeCounts::from_pairs(&[0], &[0, 1]).is_err());
    }

    #[test]
    fn uniform_scores_select_nothing() {
        let train = OutcomeAttributeCounts::from_matrix(array![[10.0, 10.0]]).unwrap();
        let eval = OutcomeAttributeCounts::from_matrix(array![[2.0, 18.0]]).unwrap();
        // b_train = 0.5 is not > 1/2, so nothing is selected.
        assert_eq!(bias_amplification(&train, &eval).unwrap(), 0.0);
    }
}
