//! End-to-end pipeline from paired samples to a [`TestResult`].
//!
//! Widths are selected (or taken as given), Gram matrices built, centered in
//! the mode the method needs, and the statistic converted to a p-value. Both
//! the CLI and the simulation harness go through this one path.

use crate::centering::{center_biased, center_unbiased};
use crate::error::{Error, Result};
use crate::kernel::{gram, KernelConfig, Sample};
use crate::nulldist::{
    p_value_gamma, p_value_new, p_value_permutation, MethodKind, TestResult,
};
use crate::stat::{cumulants, hsic_estimate, statistic};

/// Which test to run, with any method-specific parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Unbiased statistic with the three-cumulant chi-square approximation.
    New,
    /// Biased statistic with the two-parameter Gamma approximation.
    Gamma,
    /// Unbiased statistic against its permutation distribution.
    Permutation { permutations: usize, seed: u64 },
}

impl Method {
    pub fn kind(&self) -> MethodKind {
        match self {
            Method::New => MethodKind::New,
            Method::Gamma => MethodKind::Gamma,
            Method::Permutation { .. } => MethodKind::Permutation,
        }
    }
}

/// Run one independence test on a paired sample.
pub fn run_test(
    x: &Sample,
    y: &Sample,
    cfg_x: &KernelConfig,
    cfg_y: &KernelConfig,
    method: Method,
) -> Result<TestResult> {
    let n = x.n();
    if n != y.n() {
        return Err(Error::SizeMismatch {
            left: n,
            right: y.n(),
        });
    }
    if n < 3 {
        return Err(Error::TooFewObservations { needed: 3, got: n });
    }
    match method {
        Method::Permutation { permutations, seed } => {
            p_value_permutation(x, y, cfg_x, cfg_y, permutations, seed)
        }
        Method::New => {
            let kg = gram(x, cfg_x)?;
            let lg = gram(y, cfg_y)?;
            let kc = center_unbiased(&kg)?;
            let lc = center_unbiased(&lg)?;
            let tn = statistic(&kc, &lc)?;
            let (p_value, detail) = p_value_new(&tn, &cumulants(&kc)?, &cumulants(&lc)?)?;
            Ok(TestResult {
                method: MethodKind::New,
                n,
                statistic: tn.value,
                hsic_estimate: hsic_estimate(&tn),
                p_value,
                sigma2_x: kg.sigma2(),
                sigma2_y: lg.sigma2(),
                detail,
            })
        }
        Method::Gamma => {
            let kg = gram(x, cfg_x)?;
            let lg = gram(y, cfg_y)?;
            let kc = center_biased(&kg);
            let lc = center_biased(&lg);
            let tng = statistic(&kc, &lc)?;
            // Moments come from the unbiased-centered matrices: the biased
            // entries carry an O(1/n) shift whose product inflates the
            // observed statistic above a mean fitted from them, which at
            // high dimension (tiny null variance) turns the baseline wildly
            // anti-conservative.
            let ku = center_unbiased(&kg)?;
            let lu = center_unbiased(&lg)?;
            let (p_value, detail) = p_value_gamma(&tng, &cumulants(&ku)?, &cumulants(&lu)?)?;
            Ok(TestResult {
                method: MethodKind::Gamma,
                n,
                statistic: tng.value,
                hsic_estimate: hsic_estimate(&tng),
                p_value,
                sigma2_x: kg.sigma2(),
                sigma2_y: lg.sigma2(),
                detail,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_sample(n: usize, dim: usize, rng: &mut ChaCha8Rng) -> Sample {
        let pts: Vec<f64> = (0..n * dim)
            .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        Sample::vector(Array2::from_shape_vec((n, dim), pts).unwrap()).unwrap()
    }

    #[test]
    fn all_methods_detect_self_dependence() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let x = gaussian_sample(40, 2, &mut rng);
        let cfg = KernelConfig::auto();
        for method in [
            Method::New,
            Method::Gamma,
            Method::Permutation {
                permutations: 199,
                seed: 5,
            },
        ] {
            let r = run_test(&x, &x.clone(), &cfg, &cfg, method).unwrap();
            assert!(
                r.p_value < 0.05,
                "{:?} failed to reject on identical samples: p={}",
                method.kind(),
                r.p_value
            );
        }
    }

    #[test]
    fn p_values_roughly_uniform_under_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let cfg = KernelConfig::auto();
        let mut rejections = 0;
        let runs = 200;
        for _ in 0..runs {
            let x = gaussian_sample(30, 1, &mut rng);
            let y = gaussian_sample(30, 1, &mut rng);
            let r = run_test(&x, &y, &cfg, &cfg, Method::New).unwrap();
            if r.p_value <= 0.05 {
                rejections += 1;
            }
        }
        // 3-sigma band around 5% of 200
        assert!(rejections <= 20, "rejected {rejections}/{runs}");
    }

    #[test]
    fn rejects_mismatched_or_tiny_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let x = gaussian_sample(10, 1, &mut rng);
        let y = gaussian_sample(8, 1, &mut rng);
        let cfg = KernelConfig::auto();
        assert!(matches!(
            run_test(&x, &y, &cfg, &cfg, Method::New),
            Err(Error::SizeMismatch { .. })
        ));
        let x2 = gaussian_sample(2, 1, &mut rng);
        let y2 = gaussian_sample(2, 1, &mut rng);
        assert!(matches!(
            run_test(&x2, &y2, &cfg, &cfg, Method::New),
            Err(Error::TooFewObservations { .. })
        ));
    }

    #[test]
    fn fixed_widths_are_recorded() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let x = gaussian_sample(12, 1, &mut rng);
        let y = gaussian_sample(12, 1, &mut rng);
        let r = run_test(
            &x,
            &y,
            &KernelConfig::fixed(1.5),
            &KernelConfig::fixed(2.5),
            Method::New,
        )
        .unwrap();
        assert_eq!(r.sigma2_x, 1.5);
        assert_eq!(r.sigma2_y, 2.5);
        assert_eq!(r.n, 12);
    }
}
