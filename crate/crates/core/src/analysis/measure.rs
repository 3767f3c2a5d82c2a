use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnalysisError, DiophantineSieve, DiophantineSpec, FrequencyMap};
use crate::dynamics::ModelSpec;

pub const MIN_MC_SAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureEstimate {
    pub gamma: f64,
    pub n_samples: usize,
    pub n_resonant: usize,
    pub resonant_fraction: f64,
    /// Binomial standard error `sqrt(p(1−p)/n)`.
    pub stderr: f64,
}

/// Fraction of `V×W` (uniform) whose unperturbed frequency fails the sieve.
///
/// The sample set depends only on `(model.chart(), n_samples, seed)`, so
/// estimates for different `spec`s with one seed are computed on the same
/// points.
pub fn resonance_measure_mc(
    model: &ModelSpec,
    spec: &DiophantineSpec,
    n_samples: usize,
    seed: u64,
) -> Result<MeasureEstimate, AnalysisError> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(AnalysisError::InvalidSpec(format!(
            "at least {MIN_MC_SAMPLES} samples required, got {n_samples}"
        )));
    }
    let chart = model.chart();
    let sieve = DiophantineSieve::new(chart.k(), *spec)?;
    let freq = FrequencyMap::new(model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<(Vec<f64>, Vec<f64>)> = (0..n_samples)
        .map(|_| {
            let actions = chart.sample_actions(&mut rng);
            let params = chart.sample_params(&mut rng);
            (actions, params)
        })
        .collect();
    let flags = points
        .par_iter()
        .map(|(a, z)| Ok(!sieve.test(&freq.eval(a, z)?).passed))
        .collect::<Result<Vec<bool>, AnalysisError>>()?;
    let n_resonant = flags.iter().filter(|&&r| r).count();
    let p = n_resonant as f64 / n_samples as f64;
    Ok(MeasureEstimate {
        gamma: spec.gamma,
        n_samples,
        n_resonant,
        resonant_fraction: p,
        stderr: (p * (1.0 - p) / n_samples as f64).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Expr};
    use crate::geometry::{ChartSpec, Interval};

    fn two_torus() -> ModelSpec {
        let chart = ChartSpec::new(
            vec![Interval { lo: 0.1, hi: 2.0 }, Interval { lo: 0.0, hi: 1.0 }],
            vec![],
        )
        .unwrap();
        ModelSpec::new(chart.clone(), parse("I1^2/2 + I2", &chart).unwrap(), Expr::zero(), 0.0).unwrap()
    }

    #[test]
    fn tiny_gamma_leaves_almost_nothing_resonant() {
        let spec = DiophantineSpec::new(1e-14, 3.0, 30).unwrap();
        let est = resonance_measure_mc(&two_torus(), &spec, 2000, 1).unwrap();
        assert_eq!(est.n_resonant, 0);
    }

    #[test]
    fn constant_frequency_map_is_all_or_nothing() {
        let chart = ChartSpec::new(vec![Interval { lo: 0.0, hi: 5.0 }], vec![]).unwrap();
        let m = ModelSpec::new(chart.clone(), parse("I1", &chart).unwrap(), Expr::zero(), 0.0).unwrap();
        // k = 1: |a·1| = a >= gamma a^-2 fails only for gamma > 1
        for (gamma, expected) in [(0.5, 0.0), (2.0, 1.0)] {
            let spec = DiophantineSpec::new(gamma, 2.0, 10).unwrap();
            let est = resonance_measure_mc(&m, &spec, 500, 3).unwrap();
            assert_eq!(est.resonant_fraction, expected);
            assert_eq!(est.stderr, 0.0);
        }
    }

    #[test]
    fn fraction_is_monotone_in_gamma_on_a_fixed_sample() {
        let m = two_torus();
        let mut last = f64::INFINITY;
        for gamma in [0.2, 0.1, 0.05, 1e-2, 1e-3] {
            let spec = DiophantineSpec::new(gamma, 3.0, 30).unwrap();
            let est = resonance_measure_mc(&m, &spec, 3000, 17).unwrap();
            assert!(est.resonant_fraction <= last);
            last = est.resonant_fraction;
        }
    }

    #[test]
    fn rejects_small_sample_counts() {
        let spec = DiophantineSpec::new(0.1, 3.0, 30).unwrap();
        assert!(resonance_measure_mc(&two_torus(), &spec, 99, 0).is_err());
    }

    #[test]
    fn deterministic_for_a_seed() {
        let spec = DiophantineSpec::new(0.05, 3.0, 30).unwrap();
        let a = resonance_measure_mc(&two_torus(), &spec, 1000, 42).unwrap();
        let b = resonance_measure_mc(&two_torus(), &spec, 1000, 42).unwrap();
        assert_eq!(a, b);
    }
}
