//! Diophantine sieve: `|ω·a| ≥ γ (Σ|a_j|)^(−τ)` for every nonzero integer
//! vector `a` with `Σ|a_j| ≤ a_max`.

use serde::{Deserialize, Serialize};

use super::{AnalysisError, FrequencyVector};

pub const DEFAULT_A_MAX: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiophantineSpec {
    pub gamma: f64,
    pub tau: f64,
    pub a_max: u32,
}

impl DiophantineSpec {
    pub fn new(gamma: f64, tau: f64, a_max: u32) -> Result<Self, AnalysisError> {
        let spec = DiophantineSpec { gamma, tau, a_max };
        spec.validate_for(1)?;
        Ok(spec)
    }

    /// Default exponent `τ = k + 1` and cutoff 30.
    pub fn with_defaults(gamma: f64, k: usize) -> Result<Self, AnalysisError> {
        Self::new(gamma, k as f64 + 1.0, DEFAULT_A_MAX)
    }

    pub fn validate_for(&self, k: usize) -> Result<(), AnalysisError> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(AnalysisError::InvalidSpec(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if !self.tau.is_finite() || self.tau < k as f64 - 1.0 {
            return Err(AnalysisError::InvalidSpec(format!(
                "tau must be at least k - 1 = {}, got {}",
                k as f64 - 1.0,
                self.tau
            )));
        }
        if self.a_max == 0 {
            return Err(AnalysisError::InvalidSpec("a_max must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SieveResult {
    pub passed: bool,
    pub worst_a: Vec<i64>,
    pub worst_margin: f64,
}

/// Precomputed lattice for repeated tests at fixed `(k, spec)`.
///
/// Only one of `a` and `−a` is kept (first nonzero entry positive), since
/// both give the same `|ω·a|`.
#[derive(Debug, Clone)]
pub struct DiophantineSieve {
    spec: DiophantineSpec,
    k: usize,
    vectors: Vec<i64>,
    bounds: Vec<f64>,
}

impl DiophantineSieve {
    pub fn new(k: usize, spec: DiophantineSpec) -> Result<Self, AnalysisError> {
        if k == 0 {
            return Err(AnalysisError::InvalidSpec("k must be at least 1".into()));
        }
        spec.validate_for(k)?;
        let mut vectors = Vec::new();
        let mut bounds = Vec::new();
        let mut a = vec![0i64; k];
        enumerate(&mut a, 0, spec.a_max as i64, false, &mut |a| {
            let norm: i64 = a.iter().map(|x| x.abs()).sum();
            vectors.extend_from_slice(a);
            bounds.push(spec.gamma * (norm as f64).powf(-spec.tau));
        });
        Ok(DiophantineSieve {
            spec,
            k,
            vectors,
            bounds,
        })
    }

    pub fn spec(&self) -> &DiophantineSpec {
        &self.spec
    }

    pub fn lattice_size(&self) -> usize {
        self.bounds.len()
    }

    pub fn test(&self, omega: &FrequencyVector) -> SieveResult {
        assert_eq!(omega.omega.len(), self.k, "frequency dimension");
        let mut worst = (f64::INFINITY, 0usize);
        for (n, (a, bound)) in self.vectors.chunks_exact(self.k).zip(&self.bounds).enumerate() {
            let dot: f64 = a.iter().zip(&omega.omega).map(|(&ai, &w)| ai as f64 * w).sum();
            let margin = dot.abs() - bound;
            if margin < worst.0 {
                worst = (margin, n);
            }
        }
        let (worst_margin, n) = worst;
        SieveResult {
            passed: worst_margin >= 0.0,
            worst_a: self.vectors[n * self.k..(n + 1) * self.k].to_vec(),
            worst_margin,
        }
    }
}

/// Visits every canonical nonzero `a` with `Σ|a_j| ≤ budget`, lexicographic
/// in `a_0` from 0 upward.
fn enumerate(a: &mut [i64], pos: usize, budget: i64, seen_nonzero: bool, visit: &mut impl FnMut(&[i64])) {
    if pos == a.len() {
        if seen_nonzero {
            visit(a);
        }
        return;
    }
    let lo = if seen_nonzero { -budget } else { 0 };
    for v in lo..=budget {
        a[pos] = v;
        enumerate(a, pos + 1, budget - v.abs(), seen_nonzero || v != 0, visit);
    }
    a[pos] = 0;
}

pub fn diophantine_test(omega: &FrequencyVector, spec: &DiophantineSpec) -> Result<SieveResult, AnalysisError> {
    Ok(DiophantineSieve::new(omega.omega.len(), *spec)?.test(omega))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn fv(w: &[f64]) -> FrequencyVector {
        FrequencyVector::new(w.to_vec())
    }

    #[test]
    fn lattice_counts() {
        // nonzero vectors with |a|_1 <= n in Z^2: 2n(n+1); halved by sign
        let s = DiophantineSieve::new(2, DiophantineSpec::new(0.1, 3.0, 30).unwrap()).unwrap();
        assert_eq!(s.lattice_size(), 30 * 31);
        // Z^3 with |a|_1 <= 2: 6 + 18 = 24, halved
        let s = DiophantineSieve::new(3, DiophantineSpec::new(0.1, 3.0, 2).unwrap()).unwrap();
        assert_eq!(s.lattice_size(), 12);
        let s = DiophantineSieve::new(1, DiophantineSpec::new(0.1, 2.0, 5).unwrap()).unwrap();
        assert_eq!(s.lattice_size(), 5);
    }

    #[test]
    fn exact_resonance_one_one() {
        let gamma = 0.05;
        let spec = DiophantineSpec::new(gamma, 3.0, 2).unwrap();
        let r = diophantine_test(&fv(&[1.0, 1.0]), &spec).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_a, vec![1, -1]);
        assert_eq!(r.worst_margin, -gamma * 2f64.powf(-3.0));
    }

    #[test]
    fn rational_resonance_one_half() {
        let spec = DiophantineSpec::new(0.01, 3.0, 3).unwrap();
        let r = diophantine_test(&fv(&[1.0, 0.5]), &spec).unwrap();
        assert!(!r.passed);
        assert_eq!(r.worst_a, vec![1, -2]);
    }

    #[test]
    fn golden_mean_passes() {
        let spec = DiophantineSpec::new(0.1, 3.0, 50).unwrap();
        let r = diophantine_test(&fv(&[1.0, 1.6180339887]), &spec).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn spec_validation() {
        assert!(DiophantineSpec::new(0.0, 3.0, 10).is_err());
        assert!(DiophantineSpec::new(0.1, 3.0, 0).is_err());
        let s = DiophantineSpec::new(0.1, 0.5, 10).unwrap();
        assert!(s.validate_for(3).is_err());
        assert_eq!(DiophantineSpec::with_defaults(0.1, 2).unwrap().tau, 3.0);
    }

    proptest! {
        #[test]
        fn homogeneous_in_omega_and_gamma(
            w1 in -3.0f64..3.0, w2 in -3.0f64..3.0,
            c in prop_oneof![Just(0.5), Just(2.0), Just(4.0), Just(0.25)],
            log_gamma in -4.0f64..-0.5,
        ) {
            // powers of two keep the scaling exact
            let gamma = 10f64.powf(log_gamma);
            let base = DiophantineSpec::new(gamma, 3.0, 12).unwrap();
            let scaled = DiophantineSpec::new(c * gamma, 3.0, 12).unwrap();
            let a = diophantine_test(&fv(&[w1, w2]), &base).unwrap();
            let b = diophantine_test(&fv(&[c * w1, c * w2]), &scaled).unwrap();
            prop_assert_eq!(a.passed, b.passed);
        }

        #[test]
        fn monotone_in_gamma(w1 in 0.0f64..2.0, w2 in 0.0f64..2.0, g in 1e-4f64..0.2, f in 0.01f64..1.0) {
            let hi = diophantine_test(&fv(&[w1, w2]), &DiophantineSpec::new(g, 3.0, 15).unwrap()).unwrap();
            let lo = diophantine_test(&fv(&[w1, w2]), &DiophantineSpec::new(g * f, 3.0, 15).unwrap()).unwrap();
            prop_assert!(!hi.passed || lo.passed);
        }

        #[test]
        fn rational_ratios_always_fail(p in 1i64..8, q in 1i64..8, scale in 0.1f64..3.0, g in 1e-6f64..1.0) {
            let spec = DiophantineSpec::new(g, 3.0, 16).unwrap();
            let w = [scale * p as f64, scale * q as f64];
            let r = diophantine_test(&fv(&w), &spec).unwrap();
            prop_assert!(!r.passed);
        }
    }
}
