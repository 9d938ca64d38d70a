//! Discrete lane/cell driving world.
//!
//! The road is a grid of `lanes` x `road_length` cells. Lane 0 is the leftmost
//! lane, cells increase in the direction of travel. Scene objects never move
//! longitudinally; they may drift one lane sideways per step. All randomness
//! in a transition comes from object drift, so [`apply_transition`] is fully
//! deterministic once the drift outcomes are fixed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::DomainError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectKind {
    Pedestrian,
    StoppedCar,
    Cyclist,
    Debris,
    Construction,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 5] = [
        ObjectKind::Pedestrian,
        ObjectKind::StoppedCar,
        ObjectKind::Cyclist,
        ObjectKind::Debris,
        ObjectKind::Construction,
    ];

    /// Identifier used in predicate names and scenario files.
    pub fn as_str(self) -> &'static str {
        match self {
            ObjectKind::Pedestrian => "pedestrian",
            ObjectKind::StoppedCar => "stopped_car",
            ObjectKind::Cyclist => "cyclist",
            ObjectKind::Debris => "debris",
            ObjectKind::Construction => "construction",
        }
    }

    /// Word used in spoken alerts.
    pub fn human_word(self) -> &'static str {
        match self {
            ObjectKind::StoppedCar => "stopped car",
            other => other.as_str(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Weather {
    Clear,
    Rain,
    Fog,
}

impl Weather {
    pub const ALL: [Weather; 3] = [Weather::Clear, Weather::Rain, Weather::Fog];

    pub fn as_str(self) -> &'static str {
        match self {
            Weather::Clear => "clear",
            Weather::Rain => "rain",
            Weather::Fog => "fog",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    None,
    Collision,
    OffRoad,
    Horizon,
}

impl Terminal {
    pub fn is_failure(self) -> bool {
        matches!(self, Terminal::Collision | Terminal::OffRoad)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Terminal::None => "none",
            Terminal::Collision => "collision",
            Terminal::OffRoad => "off_road",
            Terminal::Horizon => "horizon",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub kind: ObjectKind,
    pub lane: usize,
    pub cell: usize,
    /// Lateral displacement in lanes applied when the object drifts: -1, 0 or +1.
    pub drift: i8,
    pub drift_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub step: u32,
    pub ego_lane: usize,
    pub ego_cell: usize,
    pub ego_speed: u32,
    pub objects: Vec<SceneObject>,
    pub weather: Weather,
    pub terminal: Terminal,
}

impl WorldState {
    pub fn is_terminal(&self) -> bool {
        self.terminal != Terminal::None
    }

    pub fn object_at(&self, lane: usize, cell: usize) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.lane == lane && o.cell == cell)
    }

    pub fn is_occupied(&self, lane: usize, cell: usize) -> bool {
        self.object_at(lane, cell).is_some()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    Maintain,
    Accelerate,
    Decelerate,
    LaneLeft,
    LaneRight,
}

impl Action {
    pub const ALL: [Action; 5] = [
        Action::Maintain,
        Action::Accelerate,
        Action::Decelerate,
        Action::LaneLeft,
        Action::LaneRight,
    ];

    pub fn is_lane_change(self) -> bool {
        matches!(self, Action::LaneLeft | Action::LaneRight)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardParams {
    pub progress: f64,
    pub collision: f64,
    pub off_road: f64,
    pub lane_change_cost: f64,
    pub step_cost: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self {
            progress: 1.0,
            collision: -100.0,
            off_road: -50.0,
            lane_change_cost: -1.0,
            step_cost: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub lanes: usize,
    pub road_length: usize,
    pub speed_max: u32,
    pub horizon: u32,
    pub discount: f64,
    pub initial_state: WorldState,
    pub policy_noise: f64,
    pub reward_params: RewardParams,
}

impl Scenario {
    /// Smallest possible single step reward.
    pub fn min_step_reward(&self) -> f64 {
        let r = &self.reward_params;
        r.collision.min(r.off_road) + r.lane_change_cost.min(0.0) + r.step_cost
    }

    /// Largest possible single step reward.
    pub fn max_step_reward(&self) -> f64 {
        self.reward_params.progress + self.reward_params.step_cost
    }

    /// Analytic bounds on a rollout's discounted return.
    pub fn return_bounds(&self) -> (f64, f64) {
        let r = &self.reward_params;
        let mut lo = r.collision.min(r.off_road);
        let mut hi = 0.0;
        let mut w = 1.0;
        for _ in 0..self.horizon {
            lo += w * (r.lane_change_cost.min(0.0) + r.step_cost).min(0.0);
            hi += w * (r.progress + r.step_cost).max(0.0);
            w *= self.discount;
        }
        (lo, hi)
    }
}

/// Per-object drift outcomes for one transition, in object order.
pub type DriftMask = Vec<bool>;

/// Samples which objects drift this step. One uniform draw is consumed per
/// object with a non-zero drift direction.
pub fn sample_drift<R: Rng + ?Sized>(state: &WorldState, rng: &mut R) -> DriftMask {
    state
        .objects
        .iter()
        .map(|o| {
            if o.drift == 0 {
                false
            } else {
                rng.random::<f64>() < o.drift_prob
            }
        })
        .collect()
}

/// Advances the world by one step, drawing object drift from `rng`.
pub fn step<R: Rng + ?Sized>(
    state: &WorldState,
    action: Action,
    scenario: &Scenario,
    rng: &mut R,
) -> Result<(WorldState, f64), DomainError> {
    if state.is_terminal() {
        return Err(DomainError::InvalidState(state.terminal));
    }
    let drift = sample_drift(state, rng);
    apply_transition(state, action, scenario, &drift)
}

/// Deterministic transition given explicit drift outcomes.
///
/// Order of events: objects drift, ego speed updates, ego changes lane, ego
/// advances along the (new) lane. Collision is checked on every cell the ego
/// occupies during the advance, including its starting cell in the new lane.
/// On a collision or off-road step the ego is left at its pre-step lane and
/// cell; that position is the situation that led to the failure.
pub fn apply_transition(
    state: &WorldState,
    action: Action,
    scenario: &Scenario,
    drift: &[bool],
) -> Result<(WorldState, f64), DomainError> {
    if state.is_terminal() {
        return Err(DomainError::InvalidState(state.terminal));
    }
    let rp = &scenario.reward_params;
    let mut next = state.clone();
    next.step = state.step + 1;

    for i in 0..next.objects.len() {
        if !drift.get(i).copied().unwrap_or(false) || next.objects[i].drift == 0 {
            continue;
        }
        let obj = &next.objects[i];
        let target = obj.lane as i64 + obj.drift as i64;
        if target < 0 || target >= scenario.lanes as i64 {
            continue;
        }
        let target = target as usize;
        if next.is_occupied(target, obj.cell) {
            continue;
        }
        next.objects[i].lane = target;
    }

    next.ego_speed = match action {
        Action::Accelerate => (state.ego_speed + 1).min(scenario.speed_max),
        Action::Decelerate => state.ego_speed.saturating_sub(1),
        _ => state.ego_speed,
    };

    let mut reward = rp.step_cost;
    if action.is_lane_change() {
        reward += rp.lane_change_cost;
    }

    let new_lane = match action {
        Action::LaneLeft if state.ego_lane == 0 => None,
        Action::LaneLeft => Some(state.ego_lane - 1),
        Action::LaneRight if state.ego_lane + 1 >= scenario.lanes => None,
        Action::LaneRight => Some(state.ego_lane + 1),
        _ => Some(state.ego_lane),
    };
    let Some(new_lane) = new_lane else {
        next.terminal = Terminal::OffRoad;
        return Ok((next, reward + rp.off_road));
    };

    let end_cell = (state.ego_cell + next.ego_speed as usize).min(scenario.road_length - 1);
    let collided = (state.ego_cell..=end_cell).any(|c| next.is_occupied(new_lane, c));
    if collided {
        next.terminal = Terminal::Collision;
        return Ok((next, reward + rp.collision));
    }

    let advanced = end_cell - state.ego_cell;
    reward += rp.progress * advanced as f64 / scenario.speed_max as f64;
    next.ego_lane = new_lane;
    next.ego_cell = end_cell;
    if next.step >= scenario.horizon {
        next.terminal = Terminal::Horizon;
    }
    Ok((next, reward))
}
