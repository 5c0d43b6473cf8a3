//! Fixed-template state compression with a hard word-count band.

use crate::world::Pose;

use super::memory::{ChosenPoint, StateRecord};
use super::ReasonerChoice;

pub const MIN_WORDS: usize = 50;
pub const MAX_WORDS: usize = 100;

const FILLER: &str = "No other notable observations were made during this call.";

/// Truncates to `MAX_WORDS` or pads to `MIN_WORDS`, first with words from
/// `padding` and then with a fixed sentence. Whitespace is normalized to
/// single spaces.
pub fn enforce_word_bounds(text: &str, padding: &str) -> String {
    let mut words: Vec<&str> = text.split_whitespace().collect();
    words.truncate(MAX_WORDS);
    let mut pad = padding.split_whitespace();
    while words.len() < MIN_WORDS {
        match pad.next() {
            Some(w) => words.push(w),
            None => break,
        }
    }
    while words.len() < MIN_WORDS {
        for w in FILLER.split_whitespace() {
            if words.len() >= MIN_WORDS {
                break;
            }
            words.push(w);
        }
    }
    words.join(" ")
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().count()
}

/// Builds the memory record for a decision without a language model.
pub fn compress_state(
    choice: &ReasonerChoice,
    chosen: &ChosenPoint,
    pose: &Pose,
    call_index: usize,
    step: u64,
    sim_seconds: f64,
) -> StateRecord {
    let text = format!(
        "Call {call_index}: the robot stood at x={:.2} y={:.2} z=0.0 and selected point {}, a {} point at x={:.2} y={:.2} z=0.0. {} The environment was described as follows. {}",
        pose.x,
        pose.y,
        chosen.id,
        chosen.kind.as_str(),
        chosen.position.x,
        chosen.position.y,
        choice.justification.trim(),
        choice.environment_description.trim(),
    );
    StateRecord {
        call_index,
        step,
        pose: *pose,
        chosen: chosen.clone(),
        compressed_text: enforce_word_bounds(&text, &choice.environment_description),
        sim_seconds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_hold_for_short_and_long_text() {
        assert_eq!(word_count(&enforce_word_bounds("one two", "")), MIN_WORDS);
        let long = "word ".repeat(300);
        assert_eq!(word_count(&enforce_word_bounds(&long, "")), MAX_WORDS);
        let mid = "word ".repeat(70);
        assert_eq!(enforce_word_bounds(&mid, "pad"), mid.trim());
    }
}
