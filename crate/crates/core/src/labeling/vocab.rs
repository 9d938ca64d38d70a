use std::fmt;
use std::sync::Arc;

use crate::domain::{ObjectKind, Scenario, SceneObject, Weather, WorldState};
use crate::labeling::Minterm;

type Evaluator = Arc<dyn Fn(&WorldState) -> bool + Send + Sync>;

#[derive(Clone)]
pub struct Predicate {
    pub name: String,
    eval: Evaluator,
}

impl Predicate {
    pub fn new(name: impl Into<String>, eval: impl Fn(&WorldState) -> bool + Send + Sync + 'static) -> Self {
        Self { name: name.into(), eval: Arc::new(eval) }
    }

    pub fn eval(&self, state: &WorldState) -> bool {
        (self.eval)(state)
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("Predicate").field(&self.name).finish()
    }
}

/// Ordered predicates; position `i` is bit `i` of every minterm.
#[derive(Debug, Clone)]
pub struct PredicateVocabulary {
    predicates: Vec<Predicate>,
}

impl PredicateVocabulary {
    /// Panics on duplicate names or more than 24 predicates.
    pub fn new(predicates: Vec<Predicate>) -> Self {
        assert!(predicates.len() <= super::MAX_PREDICATES, "at most 24 predicates");
        for (i, p) in predicates.iter().enumerate() {
            assert!(
                !predicates[..i].iter().any(|q| q.name == p.name),
                "duplicate predicate name {}",
                p.name
            );
        }
        Self { predicates }
    }

    pub fn len(&self) -> usize {
        self.predicates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.predicates.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.predicates.iter().map(|p| p.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.predicates.iter().position(|p| p.name == name)
    }

    pub fn predicates(&self) -> &[Predicate] {
        &self.predicates
    }
}

/// Nearest object by Manhattan distance; ties go to the lower lane, then the
/// lower cell.
pub fn nearest_hazard(state: &WorldState) -> Option<&SceneObject> {
    state.objects.iter().min_by_key(|o| (distance(state, o), o.lane, o.cell))
}

fn distance(state: &WorldState, o: &SceneObject) -> usize {
    o.lane.abs_diff(state.ego_lane) + o.cell.abs_diff(state.ego_cell)
}

fn hazard(test: impl Fn(&WorldState, &SceneObject) -> bool + Send + Sync + 'static) -> impl Fn(&WorldState) -> bool {
    move |s: &WorldState| nearest_hazard(s).is_some_and(|o| test(s, o))
}

/// The 16-predicate driving vocabulary. `speed_high` and `near_road_end`
/// depend on the scenario's road geometry.
pub fn default_vocabulary(scenario: &Scenario) -> PredicateVocabulary {
    let mut preds = Vec::with_capacity(16);
    for kind in ObjectKind::ALL {
        preds.push(Predicate::new(format!("nearest_is_{}", kind.as_str()), hazard(move |_, o| o.kind == kind)));
    }
    preds.push(Predicate::new("hazard_ahead", hazard(|s, o| o.cell > s.ego_cell)));
    preds.push(Predicate::new("hazard_behind", hazard(|s, o| o.cell < s.ego_cell)));
    preds.push(Predicate::new("hazard_left", hazard(|s, o| o.lane < s.ego_lane)));
    preds.push(Predicate::new("hazard_right", hazard(|s, o| o.lane > s.ego_lane)));
    preds.push(Predicate::new("hazard_same_lane", hazard(|s, o| o.lane == s.ego_lane)));
    preds.push(Predicate::new("hazard_adjacent", hazard(|s, o| distance(s, o) <= 1)));
    for w in Weather::ALL {
        preds.push(Predicate::new(format!("weather_{}", w.as_str()), move |s: &WorldState| s.weather == w));
    }
    let speed_max = scenario.speed_max;
    preds.push(Predicate::new("speed_high", move |s: &WorldState| 2 * s.ego_speed > speed_max));
    let road_length = scenario.road_length;
    preds.push(Predicate::new("near_road_end", move |s: &WorldState| {
        road_length.saturating_sub(s.ego_cell) <= 2
    }));
    PredicateVocabulary::new(preds)
}

pub fn abstract_state(state: &WorldState, vocab: &PredicateVocabulary) -> Minterm {
    Minterm(
        vocab
            .predicates
            .iter()
            .enumerate()
            .fold(0u32, |acc, (i, p)| if p.eval(state) { acc | 1 << i } else { acc }),
    )
}
