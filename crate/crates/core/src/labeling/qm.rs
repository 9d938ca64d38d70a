//! Prime implicants of the incompletely specified function (ON = targets,
//! OFF = negatives, DC = everything else), keeping only primes that cover at
//! least one target.
//!
//! Small vocabularies use the Quine-McCluskey tabulation over the whole
//! ON+DC set. Above [`TABULATION_MAX_VARS`] the DC set is too large to
//! tabulate, so primes are grown from each target instead: a cube through
//! target `t` avoids every negative `f` iff it cares about at least one bit of
//! `t ^ f`, so the primes through `t` are exactly the minimal hitting sets of
//! `{t ^ f}`. Both routes produce the same set.

use std::collections::HashSet;

use crate::error::LabelError;
use crate::labeling::{full_mask, CoverInstance, Implicant};

pub const MAX_PREDICATES: usize = 24;
pub const TABULATION_MAX_VARS: usize = 12;

pub fn qm_prime_implicants(instance: &CoverInstance) -> Result<Vec<Implicant>, LabelError> {
    let n = instance.n_vars;
    if n > MAX_PREDICATES {
        return Err(LabelError::InstanceTooLarge(format!(
            "{n} predicates exceeds the limit of {MAX_PREDICATES}"
        )));
    }
    let primes = if n <= TABULATION_MAX_VARS {
        tabulate(instance)
    } else {
        expand_targets(instance)
    };
    Ok(finish(primes, instance))
}

fn finish(primes: impl IntoIterator<Item = Implicant>, instance: &CoverInstance) -> Vec<Implicant> {
    let mut out: Vec<Implicant> = primes
        .into_iter()
        .filter(|p| instance.targets.iter().any(|&t| p.covers(t)))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    out.sort();
    out
}

/// Classic tabulation: merge cubes that differ in exactly one cared bit until
/// nothing merges; cubes that never merged are prime.
pub(crate) fn tabulate(instance: &CoverInstance) -> Vec<Implicant> {
    let n = instance.n_vars;
    let full = full_mask(n);
    let mut level: HashSet<Implicant> = (0..=full)
        .filter(|m| !instance.negatives.contains(m))
        .map(|m| Implicant::new(full, m))
        .collect();
    let mut primes = Vec::new();
    while !level.is_empty() {
        let mut merged_into = HashSet::new();
        let mut next = HashSet::new();
        for c in &level {
            // pair with the cube one popcount group up
            for i in 0..n {
                let bit = 1u32 << i;
                if c.care & bit == 0 || c.values & bit != 0 {
                    continue;
                }
                let partner = Implicant::new(c.care, c.values | bit);
                if level.contains(&partner) {
                    merged_into.insert(*c);
                    merged_into.insert(partner);
                    next.insert(Implicant::new(c.care & !bit, c.values));
                }
            }
        }
        primes.extend(level.iter().filter(|c| !merged_into.contains(c)).copied());
        level = next;
        if n == 0 {
            break;
        }
    }
    primes
}

fn expand_targets(instance: &CoverInstance) -> Vec<Implicant> {
    let mut out = HashSet::new();
    for &t in &instance.targets {
        let family = minimal_sets(instance.negatives.iter().map(|&f| t ^ f).collect());
        let mut found = Vec::new();
        transversals(&family, 0, 0, &mut found);
        out.extend(found.into_iter().map(|care| Implicant::new(care, t)));
    }
    out.into_iter().collect()
}

/// Inclusion-minimal members of a set family.
fn minimal_sets(mut sets: Vec<u32>) -> Vec<u32> {
    sets.sort_by_key(|s| (s.count_ones(), *s));
    sets.dedup();
    let mut out: Vec<u32> = Vec::new();
    for s in sets {
        if !out.iter().any(|&m| m & s == m) {
            out.push(s);
        }
    }
    out
}

/// Enumerates minimal hitting sets of `family` without duplicates: branches
/// on the elements of an unhit set, forbidding elements tried by earlier
/// siblings, and prunes any partial set containing an element that has lost
/// its private edge.
fn transversals(family: &[u32], chosen: u32, forbidden: u32, out: &mut Vec<u32>) {
    let unhit = family
        .iter()
        .filter(|&&s| s & chosen == 0)
        .min_by_key(|s| (**s & !forbidden).count_ones());
    let Some(&edge) = unhit else {
        out.push(chosen);
        return;
    };
    let mut candidates = edge & !forbidden;
    let mut forbid = forbidden;
    while candidates != 0 {
        let bit = candidates & candidates.wrapping_neg();
        candidates &= candidates - 1;
        let next = chosen | bit;
        if every_element_private(family, next) {
            transversals(family, next, forbid, out);
        }
        forbid |= bit;
    }
}

fn every_element_private(family: &[u32], chosen: u32) -> bool {
    let mut private = 0u32;
    for &s in family {
        let hit = s & chosen;
        if hit.count_ones() == 1 {
            private |= hit;
        }
    }
    private == chosen
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Every consistent cube that is maximal and touches a target, found by
    /// scanning all 3^n cubes.
    fn brute_force_primes(inst: &CoverInstance) -> Vec<Implicant> {
        let n = inst.n_vars;
        let full = full_mask(n);
        let mut cubes = Vec::new();
        for care in 0..=full {
            for values in 0..=full {
                if values & !care != 0 {
                    continue;
                }
                cubes.push(Implicant { care, values });
            }
        }
        let consistent: Vec<_> = cubes.into_iter().filter(|c| inst.is_consistent(c)).collect();
        let set: HashSet<_> = consistent.iter().copied().collect();
        let mut out: Vec<_> = consistent
            .iter()
            .filter(|c| {
                (0..n).all(|i| {
                    let bit = 1 << i;
                    c.care & bit == 0 || !set.contains(&Implicant::new(c.care & !bit, c.values))
                })
            })
            .filter(|c| inst.targets.iter().any(|&t| c.covers(t)))
            .copied()
            .collect();
        out.sort();
        out
    }

    #[test]
    fn two_variable_example() {
        // T = {11, 10} (bit 1 set), F = {01, 00}
        let inst = CoverInstance::new(2, [0b10, 0b11], [0b01, 0b00]);
        let primes = qm_prime_implicants(&inst).unwrap();
        assert_eq!(primes, vec![Implicant::new(0b10, 0b10)]);
        assert_eq!(primes, brute_force_primes(&inst));
    }

    #[test]
    fn full_cube_without_negatives() {
        let inst = CoverInstance::new(3, 0..8, []);
        assert_eq!(qm_prime_implicants(&inst).unwrap(), vec![Implicant::new(0, 0)]);
    }

    #[test]
    fn parity_admits_no_merging() {
        let even = [0b000, 0b011, 0b101, 0b110];
        let odd = [0b001, 0b010, 0b100, 0b111];
        let inst = CoverInstance::new(3, even, odd);
        let primes = qm_prime_implicants(&inst).unwrap();
        assert_eq!(primes.len(), 4);
        assert!(primes.iter().all(|p| p.literal_count() == 3));
        assert_eq!(primes, brute_force_primes(&inst));
    }

    #[test]
    fn too_many_predicates() {
        let inst = CoverInstance::new(25, [1], [0]);
        assert!(matches!(qm_prime_implicants(&inst), Err(LabelError::InstanceTooLarge(_))));
    }

    #[test]
    fn no_targets_no_primes() {
        let inst = CoverInstance::new(4, [], [1, 2]);
        assert!(qm_prime_implicants(&inst).unwrap().is_empty());
    }

    #[test]
    fn minimal_sets_drops_supersets() {
        assert_eq!(minimal_sets(vec![0b111, 0b011, 0b001, 0b100, 0b001]), vec![0b001, 0b100]);
    }

    fn instance_strategy(max_n: usize) -> impl Strategy<Value = CoverInstance> {
        (1..=max_n).prop_flat_map(|n| {
            let space = 1u32 << n;
            prop::collection::vec(0u8..3, space as usize).prop_map(move |labels| {
                let t = (0..space).filter(|&m| labels[m as usize] == 1);
                let f = (0..space).filter(|&m| labels[m as usize] == 2);
                CoverInstance::new(n, t, f)
            })
        })
    }

    proptest! {
        #[test]
        fn tabulation_matches_brute_force(inst in instance_strategy(5)) {
            prop_assert_eq!(finish(tabulate(&inst), &inst), brute_force_primes(&inst));
        }

        #[test]
        fn target_expansion_matches_tabulation(inst in instance_strategy(7)) {
            prop_assert_eq!(finish(expand_targets(&inst), &inst), finish(tabulate(&inst), &inst));
        }

        #[test]
        fn primes_are_maximal(inst in instance_strategy(6)) {
            for p in qm_prime_implicants(&inst).unwrap() {
                prop_assert!(inst.is_consistent(&p));
                for i in 0..inst.n_vars {
                    let bit = 1 << i;
                    if p.care & bit != 0 {
                        prop_assert!(!inst.is_consistent(&Implicant::new(p.care & !bit, p.values)));
                    }
                }
            }
        }
    }
}
