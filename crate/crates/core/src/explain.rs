//! Handover alert text for a labeled failure cluster.
//!
//! Five alert forms: a generic alarm (a), the causing object (b.1), its
//! direction relative to the driver (b.2), both (b.3), and both as a full
//! sentence (b.4). Object and direction come from the label's dominant clause,
//! the one covering the most target minterms.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::clustering::ClusterSummary;
use crate::domain::ObjectKind;
use crate::labeling::{DnfLabel, PredicateVocabulary};

pub const GENERIC_ALERT: &str = "Handing over control!";
pub const FALLBACK_ALERT: &str = "Hazard detected: handing over control!";

/// Direction predicates in the order their words are joined.
const DIRECTION_WORDS: [(&str, &str); 6] = [
    ("hazard_ahead", "ahead"),
    ("hazard_behind", "behind"),
    ("hazard_left", "left"),
    ("hazard_right", "right"),
    ("hazard_same_lane", "same lane"),
    ("hazard_adjacent", "adjacent"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Modality {
    Generic,
    ObjectOnly,
    DirectionOnly,
    ObjectDirection,
    FullSentence,
}

impl Modality {
    pub const ALL: [Modality; 5] = [
        Modality::Generic,
        Modality::ObjectOnly,
        Modality::DirectionOnly,
        Modality::ObjectDirection,
        Modality::FullSentence,
    ];

    /// Condition code: `a`, `b1` .. `b4`.
    pub fn code(self) -> &'static str {
        match self {
            Modality::Generic => "a",
            Modality::ObjectOnly => "b1",
            Modality::DirectionOnly => "b2",
            Modality::ObjectDirection => "b3",
            Modality::FullSentence => "b4",
        }
    }
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Modality {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Modality::ALL
            .into_iter()
            .find(|m| m.code() == s)
            .ok_or_else(|| format!("unknown modality `{s}` (expected a, b1, b2, b3 or b4)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Explanation {
    pub modality: Modality,
    pub object_token: Option<String>,
    pub direction_token: Option<String>,
    pub text: String,
    pub cluster_id: usize,
    pub probability: f64,
}

/// Object and direction words of the dominant clause. Negated literals never
/// produce words.
pub fn extract_tokens(label: &DnfLabel, vocab: &PredicateVocabulary) -> (Option<String>, Option<String>) {
    let mut dominant: Option<usize> = None;
    for (i, &cov) in label.target_coverage.iter().enumerate() {
        if dominant.is_none_or(|d| cov > label.target_coverage[d]) {
            dominant = Some(i);
        }
    }
    let Some(d) = dominant else {
        return (None, None);
    };
    let clause = label.clauses[d];
    let positive = |name: &str| {
        vocab
            .index_of(name)
            .is_some_and(|i| clause.care >> i & 1 == 1 && clause.values >> i & 1 == 1)
    };

    let object = ObjectKind::ALL
        .into_iter()
        .find(|k| positive(&format!("nearest_is_{}", k.as_str())))
        .map(|k| k.human_word().to_string());
    let words: Vec<&str> = DIRECTION_WORDS
        .iter()
        .filter(|(name, _)| positive(name))
        .map(|&(_, word)| word)
        .collect();
    let direction = (!words.is_empty()).then(|| words.join(" "));
    (object, direction)
}

fn capitalize(s: &str) -> String {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Alert text for one modality. Missing tokens degrade to the closest form
/// that can still be filled, and to a generic hazard alert when none can.
pub fn render_tokens(modality: Modality, object: Option<&str>, direction: Option<&str>) -> String {
    let text = match (modality, object, direction) {
        (Modality::Generic, _, _) => GENERIC_ALERT.to_string(),
        (Modality::ObjectOnly, Some(o), _) => format!("{o}!"),
        (Modality::DirectionOnly, _, Some(d)) => format!("{d}!"),
        (Modality::ObjectDirection, Some(o), Some(d)) => format!("{o}, {d}!"),
        (Modality::ObjectDirection, Some(o), None) => format!("{o}!"),
        (Modality::ObjectDirection, None, Some(d)) => format!("{d}!"),
        (Modality::FullSentence, Some(o), Some(d)) => {
            format!("Handing over control: there is a {o} {d} of the vehicle.")
        }
        (Modality::FullSentence, Some(o), None) => format!("Handing over control: there is a {o} near the vehicle."),
        (Modality::FullSentence, None, Some(d)) => {
            format!("Handing over control: there is a hazard {d} of the vehicle.")
        }
        _ => FALLBACK_ALERT.to_string(),
    };
    capitalize(&text)
}

pub fn render(label: &DnfLabel, modality: Modality, cluster: &ClusterSummary, vocab: &PredicateVocabulary) -> Explanation {
    let (object, direction) = extract_tokens(label, vocab);
    let (object, direction) = match modality {
        Modality::Generic => (None, None),
        Modality::ObjectOnly => (object, None),
        Modality::DirectionOnly => (None, direction),
        Modality::ObjectDirection | Modality::FullSentence => (object, direction),
    };
    Explanation {
        modality,
        text: render_tokens(modality, object.as_deref(), direction.as_deref()),
        object_token: object,
        direction_token: direction,
        cluster_id: cluster.cluster_id,
        probability: cluster.frequency,
    }
}
