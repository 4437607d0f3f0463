//! Order-fixed reductions and sample statistics.

/// Pairwise (cascade) summation over a fixed binary tree.
///
/// The tree depends only on `values.len()`, so the result is bit-identical
/// for a given input slice.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 16;
    if values.len() <= LEAF {
        return values.iter().sum();
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

/// Mean, unbiased variance and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
    pub count: usize,
}

impl SampleStats {
    pub fn from_slice(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return SampleStats {
                mean: f64::NAN,
                variance: f64::NAN,
                stderr: f64::NAN,
                count,
            };
        }
        let n = count as f64;
        let mean = pairwise_sum(values) / n;
        let variance = if count > 1 {
            let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
            pairwise_sum(&dev) / (n - 1.0)
        } else {
            0.0
        };
        SampleStats {
            mean,
            variance,
            stderr: (variance / n).sqrt(),
            count,
        }
    }

    /// Distance to `target` in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.mean - target).abs();
        if self.stderr > 0.0 {
            diff / self.stderr
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn stats_of_known_sample() {
        let s = SampleStats::from_slice(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn constant_sample_has_zero_spread() {
        let s = SampleStats::from_slice(&[3.0; 100]);
        assert_eq!(s.variance, 0.0);
        assert_eq!(s.z_score(3.0), 0.0);
    }

    proptest! {
        #[test]
        fn pairwise_matches_naive_sum(v in proptest::collection::vec(-1e3f64..1e3, 0..500)) {
            let naive: f64 = v.iter().sum();
            prop_assert!((pairwise_sum(&v) - naive).abs() <= 1e-9 * (1.0 + naive.abs()));
        }
    }
}
