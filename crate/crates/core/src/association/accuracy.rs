use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Identifies a detection by its frame and position within that frame.
pub type DetectionKey = (u64, usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "track_id", rename_all = "snake_case")]
pub enum Outcome {
    Matched(u64),
    NewTrack(u64),
    Discarded,
}

/// What association did with one detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decision {
    pub frame_id: u64,
    pub index: usize,
    pub outcome: Outcome,
}

/// Fraction of decisions that agree with the true object identities.
///
/// A track stands for the true object of the detection that spawned it. A
/// match is correct when the track stands for the detection's object; a new
/// track or a discard is correct when no earlier track stands for that object.
/// Decisions must be given in processing order.
pub fn matching_accuracy(
    decisions: &[Decision],
    truth: &HashMap<DetectionKey, u64>,
) -> Result<f64> {
    if decisions.is_empty() {
        return Err(Error::Empty("association decisions"));
    }
    let mut track_object: HashMap<u64, u64> = HashMap::new();
    let mut tracked: HashSet<u64> = HashSet::new();
    let mut correct = 0usize;
    for d in decisions {
        let object = *truth
            .get(&(d.frame_id, d.index))
            .ok_or(Error::UnknownDetection {
                frame_id: d.frame_id,
                index: d.index,
            })?;
        let ok = match d.outcome {
            Outcome::Matched(t) => track_object.get(&t) == Some(&object),
            Outcome::NewTrack(t) => {
                track_object.insert(t, object);
                tracked.insert(object)
            }
            Outcome::Discarded => !tracked.contains(&object),
        };
        correct += ok as usize;
    }
    Ok(correct as f64 / decisions.len() as f64)
}
