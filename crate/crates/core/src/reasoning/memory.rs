//! Bounded window of compressed past decisions.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::explore_graph::PointKind;
use crate::geometry::Point;
use crate::world::Pose;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChosenPoint {
    pub id: usize,
    pub position: Point,
    pub kind: PointKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateRecord {
    pub call_index: usize,
    /// Simulation step at which the record was made.
    pub step: u64,
    pub pose: Pose,
    pub chosen: ChosenPoint,
    pub compressed_text: String,
    pub sim_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MemoryWindow {
    capacity: usize,
    records: VecDeque<StateRecord>,
}

impl Default for MemoryWindow {
    fn default() -> Self {
        Self::new(10)
    }
}

impl MemoryWindow {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "memory capacity must be positive");
        Self { capacity, records: VecDeque::with_capacity(capacity + 1) }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Oldest first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &StateRecord> + ExactSizeIterator {
        self.records.iter()
    }

    pub fn last(&self) -> Option<&StateRecord> {
        self.records.back()
    }

    /// Appends `record`, evicting the oldest entry once over capacity.
    pub fn push(&mut self, record: StateRecord) {
        self.records.push_back(record);
        while self.records.len() > self.capacity {
            self.records.pop_front();
        }
    }

    /// Records as they appear in prompts, oldest first.
    pub fn render(&self) -> String {
        if self.records.is_empty() {
            return "No prior states.".to_string();
        }
        self.records
            .iter()
            .map(|r| format!("State {} (t={:.1} s): {}", r.call_index, r.sim_seconds, r.compressed_text))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

pub fn push_memory(window: &mut MemoryWindow, record: StateRecord) {
    window.push(record);
}
