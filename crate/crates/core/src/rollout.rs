//! Monte Carlo forward rollouts under an epsilon-noisy nominal controller.
//!
//! Every rollout owns a ChaCha8 stream keyed by `(seed, index)`: the seed
//! selects the key and the rollout index selects the stream. Rollouts share
//! nothing, so the result list does not depend on how they are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::domain::{self, Action, Scenario, Terminal, WorldState};
use crate::error::DomainError;

pub const DEFAULT_ROLLOUTS: usize = 1000;

/// Distance ahead (in cells) at which the nominal controller reacts.
const LOOKAHEAD: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RolloutConfig {
    pub k: usize,
    pub seed: u64,
}

impl Default for RolloutConfig {
    fn default() -> Self {
        Self { k: DEFAULT_ROLLOUTS, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RolloutResult {
    pub index: usize,
    /// Realized discounted return.
    pub ret: f64,
    pub outcome_state: WorldState,
    pub outcome: Terminal,
    pub length: u32,
}

/// Random stream for one rollout.
pub fn rollout_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn lane_clear(state: &WorldState, lane: usize) -> bool {
    (state.ego_cell..=state.ego_cell + LOOKAHEAD).all(|c| !state.is_occupied(lane, c))
}

/// The vehicle's baseline controller: swerve right, else left, else brake when
/// something sits within two cells ahead in the ego lane.
pub fn nominal_action(state: &WorldState, scenario: &Scenario) -> Result<Action, DomainError> {
    if state.is_terminal() {
        return Err(DomainError::InvalidState(state.terminal));
    }
    let blocked = (1..=LOOKAHEAD).any(|d| state.is_occupied(state.ego_lane, state.ego_cell + d));
    if !blocked {
        return Ok(Action::Maintain);
    }
    if state.ego_lane + 1 < scenario.lanes && lane_clear(state, state.ego_lane + 1) {
        return Ok(Action::LaneRight);
    }
    if state.ego_lane > 0 && lane_clear(state, state.ego_lane - 1) {
        return Ok(Action::LaneLeft);
    }
    Ok(Action::Decelerate)
}

/// Picks the executed action: with probability `policy_noise` a uniformly random
/// action, else the nominal one. Always consumes the same number of draws for
/// the noise decision.
pub fn choose_action<R: Rng + ?Sized>(
    state: &WorldState,
    scenario: &Scenario,
    rng: &mut R,
) -> Result<Action, DomainError> {
    let nominal = nominal_action(state, scenario)?;
    if rng.random::<f64>() < scenario.policy_noise {
        Ok(Action::ALL[rng.random_range(0..Action::ALL.len())])
    } else {
        Ok(nominal)
    }
}

pub fn sample_rollout(scenario: &Scenario, index: usize, seed: u64) -> RolloutResult {
    let mut rng = rollout_rng(seed, index);
    let mut state = scenario.initial_state.clone();
    let mut ret = 0.0;
    let mut weight = 1.0;
    let mut length = 0;
    while !state.is_terminal() {
        // a validated scenario never hands a terminal state to these calls
        let action = choose_action(&state, scenario, &mut rng).expect("non-terminal state");
        let (next, reward) =
            domain::step(&state, action, scenario, &mut rng).expect("non-terminal state");
        ret += weight * reward;
        weight *= scenario.discount;
        length += 1;
        state = next;
    }
    RolloutResult { index, ret, outcome: state.terminal, outcome_state: state, length }
}

/// Runs `config.k` rollouts on the global rayon pool.
pub fn run_monte_carlo(scenario: &Scenario, config: RolloutConfig) -> Vec<RolloutResult> {
    (0..config.k)
        .into_par_iter()
        .map(|i| sample_rollout(scenario, i, config.seed))
        .collect()
}

/// Runs rollouts on a dedicated pool with `threads` workers (`None` = machine
/// default).
pub fn run_monte_carlo_with_threads(
    scenario: &Scenario,
    config: RolloutConfig,
    threads: Option<usize>,
) -> Vec<RolloutResult> {
    match threads {
        Some(1) => (0..config.k).map(|i| sample_rollout(scenario, i, config.seed)).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("failed to build rollout thread pool");
            pool.install(|| run_monte_carlo(scenario, config))
        }
        None => run_monte_carlo(scenario, config),
    }
}
