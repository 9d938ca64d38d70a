//! One-dimensional Gaussian mixture fitting by expectation-maximization.

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::ClusterError;

pub const MAX_ITERATIONS: usize = 500;
pub const TOLERANCE: f64 = 1e-6;
pub const RESTARTS: usize = 5;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianComponent {
    pub mean: f64,
    pub variance: f64,
    pub weight: f64,
}

impl GaussianComponent {
    /// `ln(weight * N(x; mean, variance))`
    pub fn log_weighted_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        self.weight.ln() - 0.5 * (LN_2PI + self.variance.ln() + d * d / self.variance)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaussianMixture {
    /// Sorted by ascending mean.
    pub components: Vec<GaussianComponent>,
    pub log_likelihood: f64,
    pub iterations: usize,
}

impl GaussianMixture {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Free parameter count: m means, m variances, m - 1 weights.
    pub fn parameter_count(&self) -> usize {
        3 * self.components.len() - 1
    }

    pub fn bic(&self, n: usize) -> f64 {
        -2.0 * self.log_likelihood + self.parameter_count() as f64 * (n as f64).ln()
    }

    /// Posterior component probabilities for one sample; sums to one.
    pub fn responsibilities(&self, x: f64) -> Vec<f64> {
        let logs: Vec<f64> = self.components.iter().map(|c| c.log_weighted_density(x)).collect();
        let lse = log_sum_exp(&logs);
        logs.iter().map(|l| (l - lse).exp()).collect()
    }

    pub fn log_likelihood_of(&self, data: &[f64]) -> f64 {
        log_likelihood(&self.components, data)
    }
}

/// Trace of a single EM run from one initialization.
#[derive(Debug, Clone)]
pub struct EmRun {
    pub components: Vec<GaussianComponent>,
    /// Log-likelihood of the initial parameters followed by the value after
    /// every M-step.
    pub trace: Vec<f64>,
}

impl EmRun {
    pub fn log_likelihood(&self) -> f64 {
        *self.trace.last().expect("trace holds at least the initial value")
    }

    pub fn iterations(&self) -> usize {
        self.trace.len() - 1
    }
}

pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

fn log_likelihood(components: &[GaussianComponent], data: &[f64]) -> f64 {
    let mut buf = vec![0.0; components.len()];
    data.iter()
        .map(|&x| {
            for (b, c) in buf.iter_mut().zip(components) {
                *b = c.log_weighted_density(x);
            }
            log_sum_exp(&buf)
        })
        .sum()
}

/// `max(1e-9, 1e-6 * range^2)`
pub fn variance_floor(data: &[f64]) -> f64 {
    let (lo, hi) = min_max(data);
    (1e-6 * (hi - lo).powi(2)).max(1e-9)
}

fn min_max(data: &[f64]) -> (f64, f64) {
    data.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

fn mean_and_variance(data: &[f64]) -> (f64, f64) {
    let n = data.len() as f64;
    let mean = data.iter().sum::<f64>() / n;
    let var = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var)
}

/// Linear-interpolated empirical quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

/// Runs EM from the given starting components until the log-likelihood gain
/// drops below [`TOLERANCE`] or [`MAX_ITERATIONS`] M-steps have been taken.
pub fn em_run(data: &[f64], init: Vec<GaussianComponent>, floor: f64) -> EmRun {
    let n = data.len();
    let m = init.len();
    let mut comps = init;
    let mut resp = vec![0.0; n * m];
    let mut logs = vec![0.0; m];
    let mut trace = Vec::new();

    // E-step for the current parameters; returns their log-likelihood
    let e_step = |comps: &[GaussianComponent], resp: &mut [f64], logs: &mut [f64]| -> f64 {
        let mut ll = 0.0;
        for (i, &x) in data.iter().enumerate() {
            for (l, c) in logs.iter_mut().zip(comps) {
                *l = c.log_weighted_density(x);
            }
            let lse = log_sum_exp(logs);
            ll += lse;
            for j in 0..m {
                resp[i * m + j] = (logs[j] - lse).exp();
            }
        }
        ll
    };

    trace.push(e_step(&comps, &mut resp, &mut logs));
    for _ in 0..MAX_ITERATIONS {
        for j in 0..m {
            let mut nk = 0.0;
            let mut sx = 0.0;
            for i in 0..n {
                let g = resp[i * m + j];
                nk += g;
                sx += g * data[i];
            }
            if nk <= 0.0 || !nk.is_finite() {
                // empty component keeps its location
                comps[j].weight = f64::MIN_POSITIVE;
                continue;
            }
            let mean = sx / nk;
            let mut sv = 0.0;
            for i in 0..n {
                let d = data[i] - mean;
                sv += resp[i * m + j] * d * d;
            }
            comps[j] = GaussianComponent {
                mean,
                variance: (sv / nk).max(floor),
                weight: nk / n as f64,
            };
        }
        let ll = e_step(&comps, &mut resp, &mut logs);
        let prev = *trace.last().unwrap();
        trace.push(ll);
        if ll - prev < TOLERANCE {
            break;
        }
    }
    EmRun { components: comps, trace }
}

fn canonicalize(mut comps: Vec<GaussianComponent>) -> Vec<GaussianComponent> {
    comps.sort_by(|a, b| a.mean.total_cmp(&b.mean));
    let mut out: Vec<GaussianComponent> = Vec::with_capacity(comps.len());
    for c in comps {
        match out.last_mut() {
            Some(last) if last.mean == c.mean => {
                // exact duplicates: merge as a moment-matched single component
                let w = last.weight + c.weight;
                let mean = last.mean;
                last.variance = (last.weight * last.variance + c.weight * c.variance) / w;
                last.weight = w;
                last.mean = mean;
            }
            _ => out.push(c),
        }
    }
    let total: f64 = out.iter().map(|c| c.weight).sum();
    for c in &mut out {
        c.weight /= total;
    }
    out
}

/// Fits an `m`-component mixture with five restarts (quantile initialization,
/// then four random-member initializations drawn from `seed`) and keeps the
/// run with the highest final log-likelihood.
pub fn em_fit(rewards: &[f64], m: usize, seed: u64) -> Result<GaussianMixture, ClusterError> {
    let n = rewards.len();
    if m == 0 || n < m {
        return Err(ClusterError::InsufficientData { needed: m.max(1), got: n });
    }
    let floor = variance_floor(rewards);
    let (mean, var) = mean_and_variance(rewards);
    let (lo, hi) = min_max(rewards);
    if lo == hi && m > 1 {
        return Err(ClusterError::DegenerateInput);
    }

    if m == 1 {
        let comps = vec![GaussianComponent { mean, variance: var.max(floor), weight: 1.0 }];
        let ll = log_likelihood(&comps, rewards);
        return Ok(GaussianMixture { components: comps, log_likelihood: ll, iterations: 1 });
    }

    let start = |means: Vec<f64>| -> Vec<GaussianComponent> {
        means
            .into_iter()
            .map(|mu| GaussianComponent { mean: mu, variance: var.max(floor), weight: 1.0 / m as f64 })
            .collect()
    };

    let mut sorted = rewards.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut distinct = sorted.clone();
    distinct.dedup();

    let mut inits = vec![start((0..m).map(|i| quantile(&sorted, (i as f64 + 0.5) / m as f64)).collect())];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 1..RESTARTS {
        // distinct values, so no two starting means coincide
        if distinct.len() < m {
            break;
        }
        let means = sample(&mut rng, distinct.len(), m).into_iter().map(|i| distinct[i]).collect();
        inits.push(start(means));
    }

    let mut best: Option<EmRun> = None;
    for init in inits {
        let run = em_run(rewards, init, floor);
        if best.as_ref().is_none_or(|b| run.log_likelihood() > b.log_likelihood()) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one initialization");
    let iterations = best.iterations();
    let components = canonicalize(best.components);
    let log_likelihood = log_likelihood(&components, rewards);
    Ok(GaussianMixture { components, log_likelihood, iterations })
}

/// Fits 1..=m_max components and keeps the lowest BIC; ties go to fewer
/// components. Component counts whose fit is degenerate are skipped.
pub fn select_model(rewards: &[f64], m_max: usize, seed: u64) -> Result<GaussianMixture, ClusterError> {
    if rewards.is_empty() {
        return Err(ClusterError::InsufficientData { needed: 1, got: 0 });
    }
    let n = rewards.len();
    let mut best: Option<(f64, GaussianMixture)> = None;
    for m in 1..=m_max.max(1).min(n) {
        let fit = match em_fit(rewards, m, seed) {
            Ok(fit) => fit,
            Err(ClusterError::DegenerateInput) => continue,
            Err(e) => return Err(e),
        };
        let bic = fit.bic(n);
        if best.as_ref().is_none_or(|(b, _)| bic < *b) {
            best = Some((bic, fit));
        }
    }
    Ok(best.expect("m = 1 always fits").1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand_distr::{Distribution, Normal};

    fn planted(seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Normal::new(-80.0, 1.0).unwrap();
        let b = Normal::new(8.0, 1.0).unwrap();
        let mut v: Vec<f64> = (0..100).map(|_| a.sample(&mut rng)).collect();
        v.extend((0..100).map(|_| b.sample(&mut rng)));
        v
    }

    #[test]
    fn constant_data_single_component() {
        let fit = em_fit(&[3.5; 20], 1, 0).unwrap();
        assert_eq!(fit.components.len(), 1);
        assert_eq!(fit.components[0].mean, 3.5);
        assert_eq!(fit.components[0].variance, 1e-9);
        assert_eq!(fit.components[0].weight, 1.0);
    }

    #[test]
    fn constant_data_rejects_multiple_components() {
        assert_eq!(em_fit(&[1.0; 5], 2, 0), Err(ClusterError::DegenerateInput));
    }

    #[test]
    fn too_few_samples() {
        assert_eq!(
            em_fit(&[1.0, 2.0], 3, 0),
            Err(ClusterError::InsufficientData { needed: 3, got: 2 })
        );
    }

    #[test]
    fn single_component_is_closed_form() {
        let data = [1.0, 2.0, 4.0, 8.0, 16.0];
        let fit = em_fit(&data, 1, 0).unwrap();
        let mean = 31.0 / 5.0;
        let var = data.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 5.0;
        assert!((fit.components[0].mean - mean).abs() < 1e-12);
        assert!((fit.components[0].variance - var).abs() < 1e-12);
        assert_eq!(fit.iterations, 1);
    }

    #[test]
    fn planted_mixture_recovered() {
        let data = planted(2024);
        let fit = em_fit(&data, 2, 1).unwrap();
        let c = &fit.components;
        assert!((c[0].mean + 80.0).abs() < 0.5, "{c:?}");
        assert!((c[1].mean - 8.0).abs() < 0.5, "{c:?}");
        assert!((c[0].weight - 0.5).abs() < 0.05);
        assert!((c[1].weight - 0.5).abs() < 0.05);
    }

    #[test]
    fn bic_prefers_two_components_on_planted_data() {
        let data = planted(2024);
        assert_eq!(select_model(&data, 5, 1).unwrap().components.len(), 2);
    }

    #[test]
    fn bic_prefers_one_component_on_gaussian_data() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let normal = Normal::new(0.0, 1.0).unwrap();
        let data: Vec<f64> = (0..500).map(|_| normal.sample(&mut rng)).collect();
        assert_eq!(select_model(&data, 5, 3).unwrap().components.len(), 1);
    }

    #[test]
    fn single_reward_selects_one_component() {
        let fit = select_model(&[-12.0], 5, 0).unwrap();
        assert_eq!(fit.components.len(), 1);
        assert_eq!(fit.components[0].mean, -12.0);
    }

    #[test]
    fn duplicate_means_merge() {
        let comps = vec![
            GaussianComponent { mean: 1.0, variance: 2.0, weight: 0.25 },
            GaussianComponent { mean: 1.0, variance: 4.0, weight: 0.25 },
            GaussianComponent { mean: 0.0, variance: 1.0, weight: 0.5 },
        ];
        let out = canonicalize(comps);
        assert_eq!(out.len(), 2);
        assert_eq!(out[1].mean, 1.0);
        assert_eq!(out[1].variance, 3.0);
        assert_eq!(out[1].weight, 0.5);
    }

    proptest! {
        #[test]
        fn responsibilities_sum_to_one(
            data in prop::collection::vec(-100.0f64..100.0, 10..60),
            m in 1usize..4,
            x in -200.0f64..200.0,
        ) {
            prop_assume!(data.iter().any(|v| *v != data[0]));
            let fit = em_fit(&data, m, 9).unwrap();
            let s: f64 = fit.responsibilities(x).iter().sum();
            prop_assert!((s - 1.0).abs() < 1e-9);
        }

        #[test]
        fn fitted_mixture_is_canonical(
            data in prop::collection::vec(-50.0f64..50.0, 8..80),
            m in 1usize..5,
        ) {
            prop_assume!(data.iter().any(|v| *v != data[0]));
            let fit = em_fit(&data, m, 4).unwrap();
            let floor = variance_floor(&data);
            let total: f64 = fit.components.iter().map(|c| c.weight).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            for w in fit.components.windows(2) {
                prop_assert!(w[0].mean < w[1].mean);
            }
            for c in &fit.components {
                prop_assert!(c.variance >= floor);
                prop_assert!(c.weight > 0.0 && c.weight <= 1.0);
            }
        }

        #[test]
        fn em_log_likelihood_never_decreases(
            data in prop::collection::vec(-100.0f64..20.0, 10..120),
            m in 2usize..5,
        ) {
            prop_assume!(data.iter().any(|v| *v != data[0]));
            let floor = variance_floor(&data);
            let mut sorted = data.clone();
            sorted.sort_by(f64::total_cmp);
            let (_, var) = mean_and_variance(&data);
            let init = (0..m)
                .map(|i| GaussianComponent {
                    mean: quantile(&sorted, (i as f64 + 0.5) / m as f64),
                    variance: var.max(floor),
                    weight: 1.0 / m as f64,
                })
                .collect();
            let run = em_run(&data, init, floor);
            for w in run.trace.windows(2) {
                prop_assert!(w[1] - w[0] >= -1e-8, "{} -> {}", w[0], w[1]);
            }
        }
    }
}
