//! Decision layer: the reasoner contract, the volumetric-gain frontier
//! baseline, the scripted semantic reasoner, state compression and memory.

pub mod compress;
pub mod gain;
pub mod memory;
pub mod scripted;
pub mod vefep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::explore_graph::{GraphPoint, PathTree, PlanGrid, PlannerParams, PointKind};
use crate::geometry::Point;
use crate::mapping::OccupancyGrid;
use crate::perception::ObjectPoint;
use crate::world::{Pose, Task};

pub use compress::{compress_state, enforce_word_bounds, word_count};
pub use gain::{path_gain, path_gain_with, volumetric_gain, GainCache};
pub use memory::{push_memory, ChosenPoint, MemoryWindow, StateRecord};
pub use scripted::{scripted_select, AffinityTable};
pub use vefep::vefep_select;

#[derive(Debug, Error, PartialEq)]
pub enum ReasonError {
    #[error("no candidate points to choose from")]
    NoCandidates,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReasonerKind {
    Vefep,
    Scripted,
    Llm,
}

impl ReasonerKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ReasonerKind::Vefep => "vefep",
            ReasonerKind::Scripted => "scripted",
            ReasonerKind::Llm => "llm",
        }
    }
}

impl std::str::FromStr for ReasonerKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "vefep" => Ok(Self::Vefep),
            "scripted" => Ok(Self::Scripted),
            "llm" => Ok(Self::Llm),
            other => Err(format!("unknown reasoner `{other}` (expected vefep, scripted or llm)")),
        }
    }
}

/// Everything a reasoner sees for one decision.
#[derive(Clone, Debug)]
pub struct DecisionContext {
    pub task: Task,
    pub pose: Pose,
    pub step: u64,
    pub sim_seconds: f64,
    /// Numbered list, ids contiguous from 1.
    pub candidates: Vec<GraphPoint>,
    pub object_points: Vec<ObjectPoint>,
    pub description: String,
    pub memory: MemoryWindow,
    pub total_calls: usize,
    pub interrupt_note: String,
    pub active_labels: Vec<String>,
    /// Cells the cameras have covered, indexed like the grid, when tracked.
    pub viewed: Option<Vec<bool>>,
    /// Object points the robot has reached without finding the target.
    pub checked: Vec<Point>,
}

impl DecisionContext {
    pub fn candidate(&self, id: usize) -> Option<&GraphPoint> {
        id.checked_sub(1).and_then(|i| self.candidates.get(i)).filter(|p| p.id == id)
    }

    pub fn object(&self, id: usize) -> Option<&ObjectPoint> {
        self.object_points.iter().find(|o| o.id == id)
    }

    /// Candidate entries for detected objects of the target class.
    pub fn target_candidates(&self) -> impl Iterator<Item = &GraphPoint> {
        self.candidates
            .iter()
            .filter(|p| p.kind == PointKind::Object && p.label.as_deref() == Some(self.task.target_class.as_str()))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReasonerChoice {
    pub point_id: usize,
    pub environment_description: String,
    pub justification: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScriptedWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
}

impl Default for ScriptedWeights {
    fn default() -> Self {
        Self { alpha: 1.0, beta: 0.6, gamma: 0.4, delta: 0.8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReasoningParams {
    pub weights: ScriptedWeights,
    /// Gain decay per meter of path.
    pub lambda: f64,
    pub sensor_range: f64,
    /// Cue objects within this distance of a point lend it their affinity.
    pub cue_radius: f64,
    /// Remembered choices within this distance count as revisits.
    pub revisit_radius: f64,
    /// Memory poses within this distance of a target object count as visits.
    pub near_visit_radius: f64,
    /// Visits after which a target object is considered a false detection.
    pub max_near_visits: usize,
    /// The frontier baseline abandons a target object it is standing within
    /// this distance of unless the object was re-detected since the last
    /// decision.
    pub linger_radius: f64,
    /// A cell counts as searched once the detector would have missed a
    /// target there with at most this probability.
    pub max_miss: f64,
    /// Gain decay per meter for the semantic reasoner, which scores unseen
    /// rather than unmapped space and so looks farther ahead.
    pub search_lambda: f64,
    /// Per meter of route, discounts the semantic pull of far points so
    /// nearby likely areas are searched first.
    pub affinity_decay: f64,
    /// Affinity every point has regardless of room or cues.
    pub prior_affinity: f64,
    pub planner: PlannerParams,
}

impl Default for ReasoningParams {
    fn default() -> Self {
        Self {
            weights: ScriptedWeights::default(),
            lambda: 0.5,
            sensor_range: 8.0,
            cue_radius: 4.0,
            revisit_radius: 3.0,
            near_visit_radius: 3.0,
            max_near_visits: 2,
            linger_radius: 2.0,
            prior_affinity: 0.1,
            max_miss: 0.1,
            search_lambda: 0.2,
            affinity_decay: 0.05,
            planner: PlannerParams::default(),
        }
    }
}

/// Route from the robot to each candidate, computed on one shortest-path tree.
pub(crate) struct Routes {
    pub pg: PlanGrid,
    pub tree: Option<PathTree>,
}

impl Routes {
    pub fn new(grid: &OccupancyGrid, pose: &Pose, params: &PlannerParams) -> Self {
        let pg = PlanGrid::inflated(grid, params.inflation);
        let tree = grid.cell_of(&pose.position()).map(|c| PathTree::build(&pg, c));
        Self { pg, tree }
    }

    /// Polyline from the robot's position and its length.
    pub fn polyline(&self, pose: &Pose, to: Point, snap_radius: f64) -> Option<(Vec<Point>, f64)> {
        let plan = self.tree.as_ref()?.plan_to(&self.pg, pose, to, snap_radius).ok()?;
        let mut line = vec![pose.position()];
        line.extend(plan.waypoints);
        Some((line, plan.length))
    }
}

/// Target-object candidate preferred by observation count, then distance,
/// then id.
pub(crate) fn best_target<'a>(ctx: &'a DecisionContext, allowed: impl Fn(&GraphPoint) -> bool) -> Option<&'a GraphPoint> {
    let count = |p: &GraphPoint| p.object_id.and_then(|id| ctx.object(id)).map_or(0, |o| o.observation_count);
    ctx.target_candidates().filter(|p| allowed(p)).min_by(|a, b| {
        count(b)
            .cmp(&count(a))
            .then(a.distance_to_robot.total_cmp(&b.distance_to_robot))
            .then(a.id.cmp(&b.id))
    })
}
