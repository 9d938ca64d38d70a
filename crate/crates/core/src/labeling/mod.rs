//! Minimal predicate descriptions of failure clusters.
//!
//! Member outcome states are abstracted into minterms over a predicate
//! vocabulary. The failure cluster's minterms form the ON-set, minterms of
//! rollouts in unflagged clusters the OFF-set, and everything unobserved is a
//! don't-care. A label is a cheapest set of prime implicants covering the
//! ON-set, with cost `clauses + 0.01 * literals`.

mod bench;
mod ilp;
mod petrick;
mod qm;
mod vocab;

pub use bench::{bench_cover, bench_cover_with_limit, random_instance, BenchReport, BenchTrial};
pub use ilp::{greedy_cover, ilp_cover};
pub use petrick::{petrick_cover, petrick_cover_with_limit, PETRICK_TERM_LIMIT};
pub use qm::{qm_prime_implicants, MAX_PREDICATES};
pub use vocab::{abstract_state, default_vocabulary, Predicate, PredicateVocabulary};

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::Serialize;

use crate::clustering::ClusterSummary;
use crate::error::LabelError;
use crate::rollout::RolloutResult;

/// Complete truth assignment; bit `i` is predicate `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Minterm(pub u32);

impl Minterm {
    pub fn bit(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn bits(self, n: usize) -> Vec<bool> {
        (0..n).map(|i| self.bit(i)).collect()
    }

    /// `'1'`/`'0'` per predicate, predicate 0 first.
    pub fn to_bit_string(self, n: usize) -> String {
        (0..n).map(|i| if self.bit(i) { '1' } else { '0' }).collect()
    }
}

/// Conjunctive clause. Bits of `values` outside `care` are always zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Implicant {
    pub care: u32,
    pub values: u32,
}

/// One literal of a clause: predicate index and polarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Literal {
    pub negated: bool,
    pub predicate: usize,
}

impl Implicant {
    pub fn new(care: u32, values: u32) -> Self {
        Self { care, values: values & care }
    }

    pub fn from_minterm(m: u32, n: usize) -> Self {
        let full = full_mask(n);
        Self::new(full, m)
    }

    pub fn covers(&self, m: u32) -> bool {
        (m ^ self.values) & self.care == 0
    }

    pub fn literal_count(&self) -> u32 {
        self.care.count_ones()
    }

    /// Literals in canonical order: positive before negated, then by index.
    pub fn literals(&self) -> Vec<Literal> {
        let mut lits: Vec<Literal> = (0..32)
            .filter(|i| self.care >> i & 1 == 1)
            .map(|i| Literal { negated: self.values >> i & 1 == 0, predicate: i })
            .collect();
        lits.sort();
        lits
    }

    /// Signed predicate names, e.g. `["hazard_ahead", "!weather_fog"]`.
    pub fn signed_names(&self, vocab_names: &[&str]) -> Vec<String> {
        self.literals()
            .into_iter()
            .map(|l| {
                let name = vocab_names[l.predicate];
                if l.negated {
                    format!("!{name}")
                } else {
                    name.to_string()
                }
            })
            .collect()
    }

    /// Cost in hundredths: `100 + literal_count`.
    pub fn cost_units(&self) -> u64 {
        100 + self.literal_count() as u64
    }
}

/// Canonical clause order: fewer literals first, then literal lists compared
/// lexicographically.
impl Ord for Implicant {
    fn cmp(&self, other: &Self) -> Ordering {
        self.literal_count()
            .cmp(&other.literal_count())
            .then_with(|| self.literals().cmp(&other.literals()))
    }
}

impl PartialOrd for Implicant {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub(crate) fn full_mask(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverInstance {
    pub n_vars: usize,
    pub targets: BTreeSet<u32>,
    pub negatives: BTreeSet<u32>,
    /// Observed in both sets; removed from `targets`.
    pub ambiguous: BTreeSet<u32>,
}

impl CoverInstance {
    pub fn new(n_vars: usize, targets: impl IntoIterator<Item = u32>, negatives: impl IntoIterator<Item = u32>) -> Self {
        let negatives: BTreeSet<u32> = negatives.into_iter().collect();
        let (ambiguous, targets): (BTreeSet<u32>, BTreeSet<u32>) =
            targets.into_iter().partition(|t| negatives.contains(t));
        Self { n_vars, targets, negatives, ambiguous }
    }

    /// True when `clause` covers no negative minterm.
    pub fn is_consistent(&self, clause: &Implicant) -> bool {
        !self.negatives.iter().any(|&f| clause.covers(f))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DnfLabel {
    pub clauses: Vec<Implicant>,
    pub cost: f64,
    /// Number of target minterms covered by each clause, aligned with `clauses`.
    pub target_coverage: Vec<usize>,
}

impl DnfLabel {
    pub(crate) fn from_selection(primes: &[Implicant], chosen: &[usize], instance: &CoverInstance) -> Self {
        let clauses: Vec<Implicant> = chosen.iter().map(|&j| primes[j]).collect();
        let units: u64 = clauses.iter().map(Implicant::cost_units).sum();
        let target_coverage = clauses
            .iter()
            .map(|c| instance.targets.iter().filter(|&&t| c.covers(t)).count())
            .collect();
        Self { clauses, cost: units as f64 / 100.0, target_coverage }
    }

    pub fn cost_units(&self) -> u64 {
        self.clauses.iter().map(Implicant::cost_units).sum()
    }

    pub fn covers(&self, m: u32) -> bool {
        self.clauses.iter().any(|c| c.covers(m))
    }

    pub fn render(&self, vocab_names: &[&str]) -> Vec<Vec<String>> {
        self.clauses.iter().map(|c| c.signed_names(vocab_names)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CoverMethod {
    QmPetrick,
    #[default]
    Ilp,
}

pub fn build_cover_instance(
    flagged: &ClusterSummary,
    all_clusters: &[ClusterSummary],
    results: &[RolloutResult],
    vocab: &PredicateVocabulary,
) -> Result<CoverInstance, LabelError> {
    if !flagged.flagged {
        return Err(LabelError::NotFlagged(flagged.cluster_id));
    }
    let by_index = |i: usize| {
        results
            .get(i)
            .filter(|r| r.index == i)
            .or_else(|| results.iter().find(|r| r.index == i))
            .expect("cluster member refers to a known rollout")
    };
    let minterm = |i: usize| abstract_state(&by_index(i).outcome_state, vocab).0;
    let targets: Vec<u32> = flagged.members.iter().map(|&i| minterm(i)).collect();
    let negatives: Vec<u32> = all_clusters
        .iter()
        .filter(|c| !c.flagged)
        .flat_map(|c| c.members.iter().map(|&i| minterm(i)))
        .collect();
    let instance = CoverInstance::new(vocab.len(), targets, negatives);
    if instance.targets.is_empty() {
        return Err(LabelError::AmbiguousCluster { cluster_id: flagged.cluster_id });
    }
    Ok(instance)
}

/// Minimal cover of an instance with the chosen solver.
pub fn minimize(instance: &CoverInstance, method: CoverMethod) -> Result<DnfLabel, LabelError> {
    let primes = qm_prime_implicants(instance)?;
    match method {
        CoverMethod::QmPetrick => petrick_cover(&primes, instance),
        CoverMethod::Ilp => ilp_cover(&primes, instance),
    }
}

pub fn label_cluster(
    flagged: &ClusterSummary,
    all_clusters: &[ClusterSummary],
    results: &[RolloutResult],
    vocab: &PredicateVocabulary,
    method: CoverMethod,
) -> Result<DnfLabel, LabelError> {
    let instance = build_cover_instance(flagged, all_clusters, results, vocab)?;
    minimize(&instance, method)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicant_is_canonical() {
        let imp = Implicant::new(0b011, 0b111);
        assert_eq!(imp.values, 0b011);
        assert!(imp.covers(0b111));
        assert!(imp.covers(0b011));
        assert!(!imp.covers(0b001));
    }

    #[test]
    fn literal_order_puts_positive_first() {
        let imp = Implicant::new(0b1011, 0b1010);
        let names = ["a", "b", "c", "d"];
        assert_eq!(imp.signed_names(&names), vec!["b", "d", "!a"]);
    }

    #[test]
    fn shorter_clauses_sort_first() {
        let short = Implicant::new(0b100, 0);
        let long = Implicant::new(0b011, 0b011);
        assert!(short < long);
        // equal length: positive literal beats negated
        assert!(Implicant::new(0b1, 0b1) < Implicant::new(0b1, 0));
    }

    #[test]
    fn ambiguity_removed_from_targets() {
        let inst = CoverInstance::new(3, [1, 2, 3], [3, 4]);
        assert_eq!(inst.targets, BTreeSet::from([1, 2]));
        assert_eq!(inst.ambiguous, BTreeSet::from([3]));
    }
}
