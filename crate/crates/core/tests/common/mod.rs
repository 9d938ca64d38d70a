//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use sentinel_core::domain::apply_transition;
use sentinel_core::labeling::{CoverInstance, Implicant};
use sentinel_core::rollout::nominal_action;
use sentinel_core::{Action, Scenario, Terminal, WorldState};

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn scenario_path(name: &str) -> PathBuf {
    workspace_root().join("scenarios").join(name)
}

pub fn load(name: &str) -> Scenario {
    sentinel_core::load_scenario(scenario_path(name)).unwrap()
}

/// Exact probability that a rollout ends in collision or off-road, by
/// expanding every action choice and every drift outcome.
pub fn failure_probability(sc: &Scenario) -> f64 {
    outcome_probability(sc, Terminal::is_failure)
}

/// Exact probability that a rollout ends in a terminal accepted by `hit`.
pub fn outcome_probability(sc: &Scenario, hit: fn(Terminal) -> bool) -> f64 {
    fn go(sc: &Scenario, s: &WorldState, hit: fn(Terminal) -> bool) -> f64 {
        if s.is_terminal() {
            return if hit(s.terminal) { 1.0 } else { 0.0 };
        }
        let eps = sc.policy_noise;
        let nominal = nominal_action(s, sc).unwrap();
        let movers: Vec<usize> = (0..s.objects.len()).filter(|&i| s.objects[i].drift != 0).collect();
        let mut total = 0.0;
        for a in Action::ALL {
            let pa = eps / Action::ALL.len() as f64 + if a == nominal { 1.0 - eps } else { 0.0 };
            if pa == 0.0 {
                continue;
            }
            for bits in 0u32..(1 << movers.len()) {
                let mut mask = vec![false; s.objects.len()];
                let mut pm = 1.0;
                for (b, &i) in movers.iter().enumerate() {
                    let p = s.objects[i].drift_prob;
                    if bits >> b & 1 == 1 {
                        mask[i] = true;
                        pm *= p;
                    } else {
                        pm *= 1.0 - p;
                    }
                }
                if pm == 0.0 {
                    continue;
                }
                let (next, _) = apply_transition(s, a, sc, &mask).unwrap();
                total += pa * pm * go(sc, &next, hit);
            }
        }
        total
    }
    go(sc, &sc.initial_state, hit)
}

/// All 3^n cubes.
pub fn all_cubes(n: usize) -> Vec<Implicant> {
    let full = if n == 0 { 0 } else { (1u32 << n) - 1 };
    let mut out = Vec::new();
    for care in 0..=full {
        let mut values = care;
        loop {
            out.push(Implicant::new(care, values));
            if values == 0 {
                break;
            }
            values = (values - 1) & care;
        }
    }
    out
}

/// Maximal consistent cubes that cover at least one target, sorted.
pub fn brute_force_primes(inst: &CoverInstance) -> Vec<Implicant> {
    let consistent: Vec<Implicant> = all_cubes(inst.n_vars).into_iter().filter(|c| inst.is_consistent(c)).collect();
    let mut out: Vec<Implicant> = consistent
        .iter()
        .filter(|c| {
            // maximal: no consistent cube strictly contains it
            !consistent.iter().any(|d| d != *c && d.care & c.care == d.care && d.values == c.values & d.care)
        })
        .filter(|c| inst.targets.iter().any(|&t| c.covers(t)))
        .copied()
        .collect();
    out.sort();
    out
}

/// Cheapest cover over every subset of `primes`, cost in hundredths. Ties go
/// to the lexicographically smallest list of prime indices.
pub fn brute_force_cover(primes: &[Implicant], inst: &CoverInstance) -> Option<(u64, Vec<usize>)> {
    let m = primes.len();
    assert!(m <= 20, "exhaustive cover limited to 20 primes");
    let mut best: Option<(u64, Vec<usize>)> = None;
    for mask in 0u32..(1 << m) {
        let chosen: Vec<usize> = (0..m).filter(|j| mask >> j & 1 == 1).collect();
        if !inst.targets.iter().all(|&t| chosen.iter().any(|&j| primes[j].covers(t))) {
            continue;
        }
        let cost: u64 = chosen.iter().map(|&j| primes[j].cost_units()).sum();
        if best.as_ref().is_none_or(|(c, b)| cost < *c || (cost == *c && chosen < *b)) {
            best = Some((cost, chosen));
        }
    }
    best
}

/// Cheapest DNF over all cubes, not only primes, consistent with the
/// instance. Every DNF assigns each target to some clause containing it, so
/// the optimum is the cheapest partition of the targets into blocks, each
/// paid at its cheapest consistent enclosing cube.
pub fn brute_force_min_dnf_cost(inst: &CoverInstance) -> u64 {
    let targets: Vec<u32> = inst.targets.iter().copied().collect();
    let t = targets.len();
    assert!(t <= 16, "exhaustive DNF limited to 16 targets");
    let full_vars = if inst.n_vars == 32 { u32::MAX } else { (1u32 << inst.n_vars) - 1 };

    let mut block_cost: HashMap<u32, Option<u64>> = HashMap::new();
    let mut cube_cost = |block: u32| -> Option<u64> {
        *block_cost.entry(block).or_insert_with(|| {
            let members: Vec<u32> = (0..t).filter(|i| block >> i & 1 == 1).map(|i| targets[i]).collect();
            let first = members[0];
            let agree = members.iter().fold(full_vars, |acc, &m| acc & !(m ^ first));
            // fewest cared bits within `agree` separating every negative
            let mut best: Option<u32> = None;
            let mut sub = agree;
            loop {
                let cube = Implicant::new(sub, first & sub);
                if inst.is_consistent(&cube) && best.is_none_or(|b| sub.count_ones() < b) {
                    best = Some(sub.count_ones());
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & agree;
            }
            best.map(|lits| 100 + lits as u64)
        })
    };

    let all = (1u32 << t) - 1;
    let mut dp = vec![u64::MAX; 1 << t];
    dp[0] = 0;
    for s in 1..=all {
        let low = s & s.wrapping_neg();
        let rest = s & !low;
        let mut sub = rest;
        loop {
            let block = sub | low;
            if let Some(c) = cube_cost(block) {
                let prev = dp[(s & !block) as usize];
                if prev != u64::MAX {
                    dp[s as usize] = dp[s as usize].min(prev + c);
                }
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
    }
    dp[all as usize]
}

/// Random instance over `n` variables where each minterm is a target,
/// negative or don't-care with the given weights.
pub fn random_instance<R: rand::Rng>(rng: &mut R, n: usize, p_target: f64, p_negative: f64) -> CoverInstance {
    let mut t = Vec::new();
    let mut f = Vec::new();
    for m in 0u32..(1 << n) {
        let u: f64 = rng.random();
        if u < p_target {
            t.push(m);
        } else if u < p_target + p_negative {
            f.push(m);
        }
    }
    CoverInstance::new(n, t, f)
}

/// Every target covered, no negative covered.
pub fn sound_and_complete(clauses: &[Implicant], inst: &CoverInstance) -> bool {
    inst.targets.iter().all(|&t| clauses.iter().any(|c| c.covers(t)))
        && inst.negatives.iter().all(|&f| !clauses.iter().any(|c| c.covers(f)))
}
