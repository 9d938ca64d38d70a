//! Exact minimum cover by Petrick's method.
//!
//! The cover condition is written as a product over targets of the sum of
//! primes covering each target, multiplied out term by term with absorption.
//! The number of product terms grows exponentially, so expansion stops with
//! `InstanceTooLarge` once it exceeds the term limit.
//!
//! Terms are ascending prime-index lists kept in lexicographic order, which
//! turns the absorption check into a subset query that walks the sorted list
//! like a trie.

use std::cmp::Ordering;

use crate::error::LabelError;
use crate::labeling::{CoverInstance, DnfLabel, Implicant};

pub const PETRICK_TERM_LIMIT: usize = 10_000_000;

/// Variable-length index lists stored back to back.
struct Terms {
    items: Vec<u32>,
    ends: Vec<usize>,
}

impl Terms {
    fn new() -> Self {
        Self { items: Vec::new(), ends: Vec::new() }
    }

    fn len(&self) -> usize {
        self.ends.len()
    }

    fn get(&self, i: usize) -> &[u32] {
        let start = if i == 0 { 0 } else { self.ends[i - 1] };
        &self.items[start..self.ends[i]]
    }

    fn push(&mut self, t: &[u32]) {
        self.items.extend_from_slice(t);
        self.ends.push(self.items.len());
    }

    /// True if some term is a subset of the ascending list `q`. Terms in
    /// `lo..hi` share their first `depth` elements, all drawn from `q`
    /// before position `from`.
    fn has_subset_of(&self, lo: usize, hi: usize, depth: usize, q: &[u32], from: usize) -> bool {
        if lo == hi {
            return false;
        }
        let mut lo = lo;
        if self.get(lo).len() == depth {
            return true;
        }
        for (i, &e) in q.iter().enumerate().skip(from) {
            // terms in lo..hi are ordered by their element at `depth`
            lo += self.partition(lo, hi, |t| t[depth] < e);
            if lo == hi {
                return false;
            }
            let end = lo + self.partition(lo, hi, |t| t[depth] == e);
            if end > lo && self.has_subset_of(lo, end, depth + 1, q, i + 1) {
                return true;
            }
            lo = end;
        }
        false
    }

    fn partition(&self, lo: usize, hi: usize, pred: impl Fn(&[u32]) -> bool) -> usize {
        let (mut a, mut b) = (0, hi - lo);
        while a < b {
            let mid = (a + b) / 2;
            if pred(self.get(lo + mid)) {
                a = mid + 1;
            } else {
                b = mid;
            }
        }
        a
    }
}

pub fn petrick_cover(primes: &[Implicant], instance: &CoverInstance) -> Result<DnfLabel, LabelError> {
    petrick_cover_with_limit(primes, instance, PETRICK_TERM_LIMIT)
}

pub fn petrick_cover_with_limit(
    primes: &[Implicant],
    instance: &CoverInstance,
    max_terms: usize,
) -> Result<DnfLabel, LabelError> {
    let mut sums: Vec<Vec<u32>> = Vec::with_capacity(instance.targets.len());
    for &t in &instance.targets {
        let sum: Vec<u32> = (0..primes.len() as u32).filter(|&j| primes[j as usize].covers(t)).collect();
        if sum.is_empty() {
            return Err(LabelError::Infeasible(t));
        }
        sums.push(sum);
    }
    sums.sort_by_key(Vec::len);
    sums.dedup();

    let mut terms = Terms::new();
    terms.push(&[]);
    for sum in &sums {
        terms = multiply(&terms, sum, max_terms)?;
    }

    // cheapest term, ties to the lexicographically smallest clause list
    let mut best: Option<(u64, &[u32])> = None;
    for i in 0..terms.len() {
        let chosen = terms.get(i);
        let cost: u64 = chosen.iter().map(|&j| primes[j as usize].cost_units()).sum();
        if best.is_none_or(|(c, b)| cost < c || (cost == c && chosen < b)) {
            best = Some((cost, chosen));
        }
    }
    let (_, chosen) = best.expect("product of non-empty sums has a term");
    let chosen: Vec<usize> = chosen.iter().map(|&j| j as usize).collect();
    Ok(DnfLabel::from_selection(primes, &chosen, instance))
}

/// Multiplies an absorbed, sorted sum of products by one sum
/// `(x_a + x_b + ...)`.
///
/// Terms that already contain a factor of the sum survive unchanged. Every
/// other term `p` spawns `p + x_j`; such a product can only be absorbed by a
/// surviving term, and two spawned products never absorb each other.
fn multiply(terms: &Terms, sum: &[u32], max_terms: usize) -> Result<Terms, LabelError> {
    let mut kept = Terms::new();
    let mut rest = Vec::new();
    for i in 0..terms.len() {
        let t = terms.get(i);
        if sum.iter().any(|j| t.binary_search(j).is_ok()) {
            kept.push(t);
        } else {
            rest.push(i);
        }
    }

    let too_large = || LabelError::InstanceTooLarge(format!("Petrick expansion exceeded {max_terms} product terms"));
    let mut spawned = Terms::new();
    let mut candidate = Vec::new();
    for &i in &rest {
        let p = terms.get(i);
        for &j in sum {
            candidate.clear();
            let at = p.partition_point(|&x| x < j);
            candidate.extend_from_slice(&p[..at]);
            candidate.push(j);
            candidate.extend_from_slice(&p[at..]);
            if kept.has_subset_of(0, kept.len(), 0, &candidate, 0) {
                continue;
            }
            spawned.push(&candidate);
            if kept.len() + spawned.len() > max_terms {
                return Err(too_large());
            }
        }
    }

    let mut order: Vec<usize> = (0..spawned.len()).collect();
    order.sort_unstable_by(|&a, &b| spawned.get(a).cmp(spawned.get(b)));
    let mut out = Terms::new();
    out.items.reserve(kept.items.len() + spawned.items.len());
    let (mut a, mut b) = (0, 0);
    while a < kept.len() || b < order.len() {
        let take_kept = b == order.len()
            || (a < kept.len() && kept.get(a).cmp(spawned.get(order[b])) == Ordering::Less);
        if take_kept {
            out.push(kept.get(a));
            a += 1;
        } else {
            out.push(spawned.get(order[b]));
            b += 1;
        }
    }
    Ok(out)
}
