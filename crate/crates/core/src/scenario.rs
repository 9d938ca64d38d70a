//! Scenario JSON files.
//!
//! Unknown keys are rejected. Every validation error names the offending
//! field by its path in the document, e.g. `initial_state.objects[0].lane`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::domain::{ObjectKind, RewardParams, Scenario, SceneObject, Terminal, Weather, WorldState};
use crate::error::ScenarioError;

pub const DEFAULT_DISCOUNT: f64 = 0.95;
pub const DEFAULT_POLICY_NOISE: f64 = 0.0;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    lanes: usize,
    road_length: usize,
    speed_max: u32,
    horizon: u32,
    #[serde(default = "default_discount")]
    discount: f64,
    #[serde(default)]
    policy_noise: f64,
    #[serde(default)]
    reward_params: RewardParamsFile,
    initial_state: InitialStateFile,
}

fn default_discount() -> f64 {
    DEFAULT_DISCOUNT
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RewardParamsFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    progress: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    collision: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    off_road: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lane_change_cost: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step_cost: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InitialStateFile {
    ego_lane: usize,
    ego_cell: usize,
    ego_speed: u32,
    #[serde(default = "default_weather")]
    weather: Weather,
    #[serde(default)]
    objects: Vec<ObjectFile>,
}

fn default_weather() -> Weather {
    Weather::Clear
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectFile {
    kind: ObjectKind,
    lane: usize,
    cell: usize,
    #[serde(default)]
    drift: i8,
    #[serde(default)]
    drift_prob: f64,
}

pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)?;
    parse_scenario(&text)
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let file: ScenarioFile = serde_path_to_error::deserialize(de).map_err(classify_error)?;
    let scenario = file.into_scenario();
    validate(&scenario)?;
    Ok(scenario)
}

/// Serializes to the scenario file format; `parse_scenario` reproduces the
/// same value.
pub fn scenario_to_json(scenario: &Scenario) -> String {
    let rp = &scenario.reward_params;
    let s = &scenario.initial_state;
    let file = ScenarioFile {
        lanes: scenario.lanes,
        road_length: scenario.road_length,
        speed_max: scenario.speed_max,
        horizon: scenario.horizon,
        discount: scenario.discount,
        policy_noise: scenario.policy_noise,
        reward_params: RewardParamsFile {
            progress: Some(rp.progress),
            collision: Some(rp.collision),
            off_road: Some(rp.off_road),
            lane_change_cost: Some(rp.lane_change_cost),
            step_cost: Some(rp.step_cost),
        },
        initial_state: InitialStateFile {
            ego_lane: s.ego_lane,
            ego_cell: s.ego_cell,
            ego_speed: s.ego_speed,
            weather: s.weather,
            objects: s
                .objects
                .iter()
                .map(|o| ObjectFile {
                    kind: o.kind,
                    lane: o.lane,
                    cell: o.cell,
                    drift: o.drift,
                    drift_prob: o.drift_prob,
                })
                .collect(),
        },
    };
    serde_json::to_string_pretty(&file).expect("scenario serialization is infallible")
}

fn classify_error(err: serde_path_to_error::Error<serde_json::Error>) -> ScenarioError {
    use serde_json::error::Category;
    let path = err.path().to_string();
    let inner = err.into_inner();
    match inner.classify() {
        Category::Data => {
            let msg = inner.to_string();
            // unknown-field paths may stop at the parent object
            let field = match unknown_field_name(&msg) {
                Some(name) if path == "." => name.to_string(),
                Some(name) if !path.ends_with(name) => format!("{path}.{name}"),
                _ => path,
            };
            ScenarioError::Validation { field, reason: msg }
        }
        _ => ScenarioError::Parse(inner.to_string()),
    }
}

fn unknown_field_name(msg: &str) -> Option<&str> {
    let rest = msg.strip_prefix("unknown field `")?;
    rest.split('`').next()
}

impl ScenarioFile {
    fn into_scenario(self) -> Scenario {
        let d = RewardParams::default();
        let rp = self.reward_params;
        Scenario {
            lanes: self.lanes,
            road_length: self.road_length,
            speed_max: self.speed_max,
            horizon: self.horizon,
            discount: self.discount,
            policy_noise: self.policy_noise,
            reward_params: RewardParams {
                progress: rp.progress.unwrap_or(d.progress),
                collision: rp.collision.unwrap_or(d.collision),
                off_road: rp.off_road.unwrap_or(d.off_road),
                lane_change_cost: rp.lane_change_cost.unwrap_or(d.lane_change_cost),
                step_cost: rp.step_cost.unwrap_or(d.step_cost),
            },
            initial_state: WorldState {
                step: 0,
                ego_lane: self.initial_state.ego_lane,
                ego_cell: self.initial_state.ego_cell,
                ego_speed: self.initial_state.ego_speed,
                weather: self.initial_state.weather,
                terminal: Terminal::None,
                objects: self
                    .initial_state
                    .objects
                    .into_iter()
                    .map(|o| SceneObject {
                        kind: o.kind,
                        lane: o.lane,
                        cell: o.cell,
                        drift: o.drift,
                        drift_prob: o.drift_prob,
                    })
                    .collect(),
            },
        }
    }
}

/// Checks every scenario invariant.
pub fn validate(sc: &Scenario) -> Result<(), ScenarioError> {
    use ScenarioError as E;
    if sc.lanes < 1 {
        return Err(E::invalid("lanes", "must be at least 1"));
    }
    if sc.road_length < 1 {
        return Err(E::invalid("road_length", "must be at least 1"));
    }
    if sc.speed_max < 1 {
        return Err(E::invalid("speed_max", "must be at least 1"));
    }
    if sc.horizon < 1 {
        return Err(E::invalid("horizon", "must be at least 1"));
    }
    if !(sc.discount > 0.0 && sc.discount <= 1.0) {
        return Err(E::invalid("discount", "must lie in (0, 1]"));
    }
    if !(0.0..=1.0).contains(&sc.policy_noise) {
        return Err(E::invalid("policy_noise", "must lie in [0, 1]"));
    }
    let rp = &sc.reward_params;
    for (name, v) in [
        ("progress", rp.progress),
        ("collision", rp.collision),
        ("off_road", rp.off_road),
        ("lane_change_cost", rp.lane_change_cost),
        ("step_cost", rp.step_cost),
    ] {
        if !v.is_finite() {
            return Err(E::invalid(format!("reward_params.{name}"), "must be finite"));
        }
    }
    if rp.progress <= 0.0 {
        return Err(E::invalid("reward_params.progress", "must be positive"));
    }
    if rp.off_road >= 0.0 {
        return Err(E::invalid("reward_params.off_road", "must be negative"));
    }
    if rp.collision >= rp.off_road {
        return Err(E::invalid("reward_params.collision", "must be below off_road"));
    }

    let s = &sc.initial_state;
    if s.ego_lane >= sc.lanes {
        return Err(E::invalid("initial_state.ego_lane", format!("must be < lanes ({})", sc.lanes)));
    }
    if s.ego_cell >= sc.road_length {
        return Err(E::invalid(
            "initial_state.ego_cell",
            format!("must be < road_length ({})", sc.road_length),
        ));
    }
    if s.ego_speed > sc.speed_max {
        return Err(E::invalid(
            "initial_state.ego_speed",
            format!("must be <= speed_max ({})", sc.speed_max),
        ));
    }
    for (i, o) in s.objects.iter().enumerate() {
        let at = |f: &str| format!("initial_state.objects[{i}].{f}");
        if o.lane >= sc.lanes {
            return Err(E::invalid(at("lane"), format!("must be < lanes ({})", sc.lanes)));
        }
        if o.cell >= sc.road_length {
            return Err(E::invalid(at("cell"), format!("must be < road_length ({})", sc.road_length)));
        }
        if !(-1..=1).contains(&o.drift) {
            return Err(E::invalid(at("drift"), "must be -1, 0 or 1"));
        }
        if !(0.0..=1.0).contains(&o.drift_prob) {
            return Err(E::invalid(at("drift_prob"), "must lie in [0, 1]"));
        }
        if o.lane == s.ego_lane && o.cell == s.ego_cell {
            return Err(E::invalid(at("cell"), "object overlaps the ego vehicle"));
        }
        if s.objects[..i].iter().any(|p| p.lane == o.lane && p.cell == o.cell) {
            return Err(E::invalid(at("cell"), "object overlaps an earlier object"));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "lanes": 1, "road_length": 10, "speed_max": 1, "horizon": 5,
        "initial_state": {"ego_lane": 0, "ego_cell": 0, "ego_speed": 1}
    }"#;

    #[test]
    fn minimal_file_gets_defaults() {
        let sc = parse_scenario(MINIMAL).unwrap();
        assert_eq!(sc.reward_params, RewardParams::default());
        assert_eq!(sc.discount, DEFAULT_DISCOUNT);
        assert_eq!(sc.policy_noise, DEFAULT_POLICY_NOISE);
        assert!(sc.initial_state.objects.is_empty());
        assert_eq!(sc.initial_state.weather, Weather::Clear);
    }

    #[test]
    fn object_lane_out_of_bounds_names_field() {
        let text = r#"{
            "lanes": 3, "road_length": 10, "speed_max": 1, "horizon": 5,
            "initial_state": {"ego_lane": 0, "ego_cell": 0, "ego_speed": 1,
              "objects": [{"kind": "pedestrian", "lane": 5, "cell": 3}]}
        }"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.field(), Some("initial_state.objects[0].lane"));
    }

    #[test]
    fn overlapping_objects_rejected() {
        let text = r#"{
            "lanes": 2, "road_length": 10, "speed_max": 1, "horizon": 5,
            "initial_state": {"ego_lane": 0, "ego_cell": 0, "ego_speed": 1,
              "objects": [{"kind": "debris", "lane": 1, "cell": 3},
                          {"kind": "cyclist", "lane": 1, "cell": 3}]}
        }"#;
        let err = parse_scenario(text).unwrap_err();
        assert_eq!(err.field(), Some("initial_state.objects[1].cell"));
    }

    #[test]
    fn unknown_key_is_validation_error() {
        let text = MINIMAL.replace("\"horizon\": 5", "\"horizon\": 5, \"gravity\": 9.8");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.field(), Some("gravity"));

        let text = MINIMAL.replace("\"ego_speed\": 1", "\"ego_speed\": 1, \"colour\": \"red\"");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.field(), Some("initial_state.colour"));
    }

    #[test]
    fn malformed_json_is_parse_error() {
        let err = parse_scenario("{\"lanes\": 1,").unwrap_err();
        assert!(matches!(err, ScenarioError::Parse(_)));
    }

    #[test]
    fn negative_integer_is_validation_error() {
        let text = MINIMAL.replace("\"lanes\": 1", "\"lanes\": -1");
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.field(), Some("lanes"));
    }

    #[test]
    fn reward_ordering_enforced() {
        let text = MINIMAL.replace(
            "\"horizon\": 5",
            "\"horizon\": 5, \"reward_params\": {\"collision\": -10.0}",
        );
        let err = parse_scenario(&text).unwrap_err();
        assert_eq!(err.field(), Some("reward_params.collision"));
    }

    #[test]
    fn round_trip_preserves_value() {
        let text = r#"{
            "lanes": 3, "road_length": 25, "speed_max": 2, "horizon": 12,
            "discount": 0.9, "policy_noise": 0.15,
            "reward_params": {"progress": 2.5, "step_cost": -0.1},
            "initial_state": {"ego_lane": 1, "ego_cell": 2, "ego_speed": 2, "weather": "fog",
              "objects": [{"kind": "stopped_car", "lane": 0, "cell": 9, "drift": 1, "drift_prob": 0.3}]}
        }"#;
        let sc = parse_scenario(text).unwrap();
        let again = parse_scenario(&scenario_to_json(&sc)).unwrap();
        assert_eq!(sc, again);
    }
}
