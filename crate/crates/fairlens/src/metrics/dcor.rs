//! Squared distance correlation from double-centered pairwise distance
//! matrices.
//!
//! The matrices are never materialized: row means come from one O(n²) pass
//! and the centered products from a second, so memory stays O(n). With the
//! `parallel` feature the row loops fan out across threads; every row writes
//! its own slot and the final reduction is sequential, so results are
//! bit-identical either way.

use crate::{Error, Result};
use ndarray::{Array2, ArrayView1};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[inline]
fn euclidean(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Row means and grand mean of the pairwise distance matrix of `x`.
fn distance_means(x: &Array2<f64>) -> (Vec<f64>, f64) {
    let n = x.nrows();
    let mut row_means = vec![0.0; n];

    let fill = |i: usize| -> f64 {
        let xi = x.row(i);
        let mut sum = 0.0;
        for j in 0..n {
            sum += euclidean(xi, x.row(j));
        }
        sum / n as f64
    };

    #[cfg(feature = "parallel")]
    row_means
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, slot)| *slot = fill(i));
    #[cfg(not(feature = "parallel"))]
    for (i, slot) in row_means.iter_mut().enumerate() {
        *slot = fill(i);
    }

    let grand = row_means.iter().sum::<f64>() / n as f64;
    (row_means, grand)
}

struct Centering<'a> {
    x: &'a Array2<f64>,
    row_means: Vec<f64>,
    grand: f64,
}

impl Centering<'_> {
    /// Centered distance entry: A_ij − ā_i − ā_j + ā.
    #[inline]
    fn entry(&self, i: usize, j: usize) -> f64 {
        euclidean(self.x.row(i), self.x.row(j)) - self.row_means[i] - self.row_means[j] + self.grand
    }
}

/// mean over (i, j) of the product of two centered distance matrices.
fn centered_product_mean(a: &Centering<'_>, b: &Centering<'_>) -> f64 {
    let n = a.x.nrows();
    let mut row_sums = vec![0.0; n];

    let fill = |i: usize| -> f64 { (0..n).map(|j| a.entry(i, j) * b.entry(i, j)).sum() };

    #[cfg(feature = "parallel")]
    row_sums
        .par_iter_mut()
        .enumerate()
        .for_each(|(i, slot)| *slot = fill(i));
    #[cfg(not(feature = "parallel"))]
    for (i, slot) in row_sums.iter_mut().enumerate() {
        *slot = fill(i);
    }

    row_sums.iter().sum::<f64>() / (n * n) as f64
}

/// Squared distance correlation between the rows of `x` and `y`:
/// `dCov²(x, y) / sqrt(dVar(x) · dVar(y))`, defined as 0 when either
/// distance variance vanishes (a constant argument).
pub fn dcor2(x: &Array2<f64>, y: &Array2<f64>) -> Result<f64> {
    let n = x.nrows();
    if n < 2 {
        return Err(Error::Data(format!(
            "distance correlation needs at least 2 samples, got {n}"
        )));
    }
    if y.nrows() != n {
        return Err(Error::Dimension(format!(
            "x has {n} rows but y has {}",
            y.nrows()
        )));
    }
    if x.iter().any(|v| !v.is_finite()) || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("inputs contain a non-finite value".into()));
    }

    let (ax_means, ax_grand) = distance_means(x);
    let (by_means, by_grand) = distance_means(y);
    let a = Centering {
        x,
        row_means: ax_means,
        grand: ax_grand,
    };
    let b = Centering {
        x: y,
        row_means: by_means,
        grand: by_grand,
    };

    let dcov2 = centered_product_mean(&a, &b);
    let dvar_x = centered_product_mean(&a, &a);
    let dvar_y = centered_product_mean(&b, &b);
    if dvar_x <= 0.0 || dvar_y <= 0.0 {
        return Ok(0.0);
    }
    Ok(dcov2 / (dvar_x * dvar_y).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force oracle: materialize both distance matrices, double-center
    /// them explicitly, and apply the same formula. Kept independent of the
    /// streaming implementation above.
    pub(crate) fn dcor2_bruteforce(x: &Array2<f64>, y: &Array2<f64>) -> f64 {
        fn centered(m: &Array2<f64>) -> Array2<f64> {
            let n = m.nrows();
            let row_means: Vec<f64> = (0..n).map(|i| m.row(i).sum() / n as f64).collect();
            let col_means: Vec<f64> = (0..n).map(|j| m.column(j).sum() / n as f64).collect();
            let grand = m.sum() / (n * n) as f64;
            Array2::from_shape_fn((n, n), |(i, j)| {
                m[(i, j)] - row_means[i] - col_means[j] + grand
            })
        }
        fn dist_matrix(x: &Array2<f64>) -> Array2<f64> {
            let n = x.nrows();
            Array2::from_shape_fn((n, n), |(i, j)| {
                x.row(i)
                    .iter()
                    .zip(x.row(j).iter())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
        }
        let a = centered(&dist_matrix(x));
        let b = centered(&dist_matrix(y));
        let n2 = (x.nrows() * x.nrows()) as f64;
        let dcov2 = (&a * &b).sum() / n2;
        let dvar_x = (&a * &a).sum() / n2;
        let dvar_y = (&b * &b).sum() / n2;
        if dvar_x <= 0.0 || dvar_y <= 0.0 {
            return 0.0;
        }
        dcov2 / (dvar_x * dvar_y).sqrt()
    }

    fn random_matrix(n: usize, d: usize, seed: u64) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Array2::from_shape_fn((n, d), |_| rng.gen_range(-2.0..2.0))
    }

    #[test]
    fn self_correlation_is_one() {
        let x = random_matrix(40, 3, 1);
        let v = dcor2(&x, &x).unwrap();
        assert!((v - 1.0).abs() < 1e-12, "dcor2(x,x) = {v}");
    }

    #[test]
    fn constant_argument_gives_zero() {
        let x = Array2::from_elem((20, 2), 3.5);
        let y = random_matrix(20, 2, 2);
        assert_eq!(dcor2(&x, &y).unwrap(), 0.0);
        assert_eq!(dcor2(&y, &x).unwrap(), 0.0);
    }

    #[test]
    fn matches_bruteforce_on_random_instances() {
        for seed in 0..10u64 {
            let x = random_matrix(50, 4, seed);
            let y = random_matrix(50, 2, seed + 100);
            let fast = dcor2(&x, &y).unwrap();
            let slow = dcor2_bruteforce(&x, &y);
            assert!((fast - slow).abs() <= 1e-10, "fast {fast} vs slow {slow}");
        }
    }

    #[test]
    fn rejects_tiny_and_mismatched_inputs() {
        let x = random_matrix(1, 2, 0);
        assert!(matches!(dcor2(&x, &x), Err(Error::Data(_))));
        let a = random_matrix(10, 2, 0);
        let b = random_matrix(9, 2, 0);
        assert!(matches!(dcor2(&a, &b), Err(Error::Dimension(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn symmetric_and_translation_invariant(seed in 0u64..500) {
            let x = random_matrix(30, 3, seed);
            let y = random_matrix(30, 2, seed.wrapping_add(7777));
            let xy = dcor2(&x, &y).unwrap();
            let yx = dcor2(&y, &x).unwrap();
            prop_assert!((xy - yx).abs() < 1e-12);

            let shifted = &x + 13.25;
            let shifted_val = dcor2(&shifted, &y).unwrap();
            prop_assert!((xy - shifted_val).abs() < 1e-10);
        }

        #[test]
        fn bounded_in_unit_interval(seed in 0u64..500) {
            let x = random_matrix(25, 2, seed);
            let y = random_matrix(25, 3, seed.wrapping_add(31));
            let v = dcor2(&x, &y).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&v));
        }
    }
}
