use rayon::prelude::*;

use crate::drivers::Seed;

/// Default z threshold for Monte Carlo assertions.
pub const DEFAULT_Z: f64 = 4.0;

/// Run `f` on streams `0..n_paths` of `seed_value` in parallel. Results come
/// back in stream order, so reductions over them are reproducible.
pub fn monte_carlo<T, F>(n_paths: usize, seed_value: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(Seed) -> T + Sync + Send,
{
    (0..n_paths as u64)
        .into_par_iter()
        .map(|stream| f(Seed::new(seed_value, stream)))
        .collect()
}

/// Sample mean, unbiased variance and standard error of the mean.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl SampleStats {
    pub fn of(samples: &[f64]) -> Self {
        let n = samples.len();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let variance = if n > 1 {
            samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64
        } else {
            0.0
        };
        SampleStats { n, mean, variance, std_error: (variance / n as f64).sqrt() }
    }

    /// Standard error of the sample variance, `sqrt((m4 - s^4) / n)` with the
    /// fourth central sample moment `m4`.
    pub fn variance_std_error(samples: &[f64]) -> f64 {
        let st = Self::of(samples);
        let n = samples.len() as f64;
        let m4 = samples.iter().map(|x| (x - st.mean).powi(4)).sum::<f64>() / n;
        ((m4 - st.variance * st.variance).max(0.0) / n).sqrt()
    }
}

/// Outcome of one z-test.
#[derive(Debug, Clone, PartialEq)]
pub struct McReport {
    pub estimator: String,
    pub seed: Option<u64>,
    pub n_paths: usize,
    pub estimate: f64,
    pub target: f64,
    pub std_error: f64,
    pub z_score: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl McReport {
    /// z-test of `estimate` against `target`. A zero standard error passes
    /// only when the estimate hits the target exactly.
    pub fn new(
        estimator: impl Into<String>,
        seed: Option<u64>,
        n_paths: usize,
        estimate: f64,
        target: f64,
        std_error: f64,
        threshold: f64,
    ) -> Self {
        let z_score = if std_error > 0.0 {
            (estimate - target) / std_error
        } else if estimate == target {
            0.0
        } else {
            f64::INFINITY.copysign(estimate - target)
        };
        let pass = z_score.abs() <= threshold;
        McReport { estimator: estimator.into(), seed, n_paths, estimate, target, std_error, z_score, threshold, pass }
    }

    /// Mean of `samples` tested against `target`.
    pub fn mean_test(
        estimator: impl Into<String>,
        seed: Option<u64>,
        samples: &[f64],
        target: f64,
        threshold: f64,
    ) -> Self {
        let st = SampleStats::of(samples);
        Self::new(estimator, seed, st.n, st.mean, target, st.std_error, threshold)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_small_sample() {
        let s = SampleStats::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, 2.5);
        assert!((s.variance - 5.0 / 3.0).abs() < 1e-15);
        assert!((s.std_error - (5.0 / 12.0f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degenerate_reports() {
        let r = McReport::mean_test("zero", None, &[0.0; 200], 0.0, 4.0);
        assert!(r.pass && r.z_score == 0.0 && r.std_error == 0.0);
        let r = McReport::mean_test("zero", None, &[0.0; 200], 1.0, 4.0);
        assert!(!r.pass && r.z_score.is_infinite());
    }

    #[test]
    fn monte_carlo_is_ordered_and_reproducible() {
        let a = monte_carlo(1000, 9, |s| s.stream);
        assert_eq!(a, (0..1000).collect::<Vec<u64>>());
        use rand::Rng;
        let x = monte_carlo(100, 9, |s| s.rng().random::<f64>());
        let y = monte_carlo(100, 9, |s| s.rng().random::<f64>());
        assert_eq!(x, y);
    }
}
