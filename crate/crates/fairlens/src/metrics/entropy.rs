use crate::{Error, Result};
use std::collections::HashMap;

/// Shannon entropy of the empirical attribute distribution, in nats:
/// `H = −Σ_v p̂_v ln p̂_v` over observed values.
pub fn empirical_entropy(attributes: &[u32]) -> Result<f64> {
    if attributes.is_empty() {
        return Err(Error::Data(
            "cannot compute entropy of an empty attribute vector".into(),
        ));
    }
    let mut counts: HashMap<u32, usize> = HashMap::new();
    for &a in attributes {
        *counts.entry(a).or_insert(0) += 1;
    }
    let n = attributes.len() as f64;
    let h = counts
        .values()
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum::<f64>();
    // −0·ln(0) terms never appear (only observed values are counted), so h
    // is exactly 0 for a single class.
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    #[allow(clippy::approx_constant)]
    fn balanced_binary_is_ln2() {
        let attrs: Vec<u32> = (0..1000).map(|i| (i % 2) as u32).collect();
        let h = empirical_entropy(&attrs).unwrap();
        assert!((h - std::f64::consts::LN_2).abs() < 1e-12);
        assert!((h - 0.6931).abs() < 1e-4);
    }

    #[test]
    fn balanced_four_class_is_ln4() {
        let attrs: Vec<u32> = (0..1000).map(|i| (i % 4) as u32).collect();
        let h = empirical_entropy(&attrs).unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-12);
        assert!((h - 1.3863).abs() < 1e-4);
    }

    #[test]
    fn single_class_is_zero() {
        assert_eq!(empirical_entropy(&[3; 50]).unwrap(), 0.0);
    }

    #[test]
    fn celeba_sex_split_anchor() {
        // 61.2% / 38.8% binary split has entropy ≈ 0.667 nats.
        let mut attrs = vec![0u32; 612];
        attrs.extend(vec![1u32; 388]);
        let h = empirical_entropy(&attrs).unwrap();
        assert!((h - 0.667).abs() < 1e-3, "h = {h}");
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(empirical_entropy(&[]), Err(Error::Data(_))));
    }

    #[test]
    fn bounded_by_log_alphabet() {
        let attrs = [0u32, 0, 1, 2, 2, 2, 3];
        let h = empirical_entropy(&attrs).unwrap();
        assert!(h >= 0.0);
        assert!(h <= 4f64.ln() + 1e-12);
    }
}
