//! Small numeric helpers shared across modules.

/// Pairwise (tree) summation. Fixed reduction order, independent of
/// thread count, with better rounding behaviour than a running sum.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// L2 norm via pairwise summation of squares.
pub fn pairwise_l2(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    let sq: Vec<f64> = xs.iter().map(|x| x * x).collect();
    pairwise_sum(&sq).sqrt()
}

/// Median with the even-count mean-of-middles convention. Sorts in place.
pub fn median_inplace(xs: &mut [f64]) -> f64 {
    debug_assert!(!xs.is_empty());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64).sin()).collect();
        let naive: f64 = xs.iter().sum();
        assert!((pairwise_sum(&xs) - naive).abs() < 1e-9);
    }

    #[test]
    fn median_conventions() {
        assert_eq!(median_inplace(&mut [1.0, 2.0, 3.0]), 2.0);
        assert_eq!(median_inplace(&mut [1.0, 2.0, 3.0, 4.0]), 2.5);
        assert_eq!(median_inplace(&mut [5.0]), 5.0);
    }
}
