//! Timing comparison of Petrick's method and the set-cover IP on random
//! instances sharing the same prime sets.

use std::time::Instant;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::LabelError;
use crate::labeling::{ilp_cover, petrick_cover_with_limit, qm_prime_implicants, CoverInstance, MAX_PREDICATES};
use crate::labeling::petrick::PETRICK_TERM_LIMIT;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchTrial {
    pub primes: usize,
    /// Seconds until Petrick finished or hit the term limit.
    pub petrick_seconds: f64,
    pub ilp_seconds: f64,
    /// `None` when Petrick hit the term limit.
    pub petrick_cost: Option<f64>,
    pub ilp_cost: f64,
    pub petrick_timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub n_predicates: usize,
    pub n_targets: usize,
    pub trials: Vec<BenchTrial>,
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl BenchReport {
    fn petrick_times(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.petrick_seconds).collect()
    }

    fn ilp_times(&self) -> Vec<f64> {
        self.trials.iter().map(|t| t.ilp_seconds).collect()
    }

    /// Includes timed-out trials at their abort time, which understates
    /// Petrick's true cost.
    pub fn petrick_median(&self) -> Option<f64> {
        median(self.petrick_times())
    }

    pub fn ilp_median(&self) -> Option<f64> {
        median(self.ilp_times())
    }

    pub fn petrick_mean(&self) -> Option<f64> {
        mean(&self.petrick_times())
    }

    pub fn ilp_mean(&self) -> Option<f64> {
        mean(&self.ilp_times())
    }

    pub fn timeouts(&self) -> usize {
        self.trials.iter().filter(|t| t.petrick_timed_out).count()
    }

    /// True when every completed trial produced equal costs.
    pub fn costs_equal(&self) -> bool {
        self.trials.iter().all(|t| t.petrick_cost.is_none_or(|c| c == t.ilp_cost))
    }
}

/// Samples `2 * n_targets` distinct minterms and splits them uniformly into
/// targets and negatives.
pub fn random_instance(n_predicates: usize, n_targets: usize, rng: &mut ChaCha8Rng) -> CoverInstance {
    let space = 1usize << n_predicates;
    let picks = sample(rng, space, 2 * n_targets).into_vec();
    let (t, f) = picks.split_at(n_targets);
    CoverInstance::new(n_predicates, t.iter().map(|&m| m as u32), f.iter().map(|&m| m as u32))
}

pub fn bench_cover(n_predicates: usize, n_targets: usize, trials: usize, seed: u64) -> Result<BenchReport, LabelError> {
    bench_cover_with_limit(n_predicates, n_targets, trials, seed, PETRICK_TERM_LIMIT)
}

pub fn bench_cover_with_limit(
    n_predicates: usize,
    n_targets: usize,
    trials: usize,
    seed: u64,
    petrick_limit: usize,
) -> Result<BenchReport, LabelError> {
    if n_predicates > MAX_PREDICATES {
        return Err(LabelError::InstanceTooLarge(format!(
            "{n_predicates} predicates exceeds the limit of {MAX_PREDICATES}"
        )));
    }
    if n_targets == 0 || 2 * n_targets > 1usize << n_predicates {
        return Err(LabelError::InvalidArgument(format!(
            "cannot draw {n_targets} targets and {n_targets} negatives from {n_predicates} predicates"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(trials);
    for _ in 0..trials {
        let instance = random_instance(n_predicates, n_targets, &mut rng);
        let primes = qm_prime_implicants(&instance)?;

        let start = Instant::now();
        let petrick = petrick_cover_with_limit(&primes, &instance, petrick_limit);
        let petrick_seconds = start.elapsed().as_secs_f64();
        let petrick_cost = match petrick {
            Ok(label) => Some(label.cost),
            Err(LabelError::InstanceTooLarge(_)) => None,
            Err(e) => return Err(e),
        };

        let start = Instant::now();
        let ilp = ilp_cover(&primes, &instance)?;
        let ilp_seconds = start.elapsed().as_secs_f64();

        out.push(BenchTrial {
            primes: primes.len(),
            petrick_seconds,
            ilp_seconds,
            petrick_timed_out: petrick_cost.is_none(),
            petrick_cost,
            ilp_cost: ilp.cost,
        });
    }
    Ok(BenchReport { n_predicates, n_targets, trials: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_empty() {
        let r = bench_cover(8, 10, 0, 1).unwrap();
        assert!(r.trials.is_empty());
        assert_eq!(r.petrick_median(), None);
        assert!(r.costs_equal());
    }

    #[test]
    fn small_trials_agree() {
        let r = bench_cover(6, 8, 5, 3).unwrap();
        assert_eq!(r.trials.len(), 5);
        assert!(r.trials.iter().all(|t| !t.petrick_timed_out));
        assert!(r.costs_equal());
    }

    #[test]
    fn too_many_targets_rejected() {
        assert!(bench_cover(3, 5, 1, 0).is_err());
    }

    #[test]
    fn random_instance_splits_evenly() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let inst = random_instance(10, 30, &mut rng);
        assert_eq!(inst.targets.len(), 30);
        assert_eq!(inst.negatives.len(), 30);
        assert!(inst.ambiguous.is_empty());
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median(vec![4.0, 1.0, 3.0, 2.0]), Some(2.5));
    }
}
