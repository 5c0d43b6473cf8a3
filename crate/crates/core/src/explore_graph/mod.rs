//! Candidate waypoints offered to the reasoners: sampled graph points,
//! frontier cluster centroids and (appended by the harness) object points.

pub mod kdtree;
pub mod planner;

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Cell, Point};
use crate::mapping::{frontier_cells, CellState, OccupancyGrid};
use crate::world::Pose;

pub use kdtree::KdTree;
pub use planner::{plan_path, GridCost, PathTree, Plan, PlanError, PlanGrid, PlannerParams};

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("no reachable free cell beyond the robot's own cell")]
    NoCandidates,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PointKind {
    Graph,
    Frontier,
    Object,
}

impl PointKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PointKind::Graph => "graph",
            PointKind::Frontier => "frontier",
            PointKind::Object => "object",
        }
    }
}

/// One entry of the numbered candidate list.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphPoint {
    pub id: usize,
    pub position: Point,
    pub kind: PointKind,
    pub is_new: bool,
    pub distance_to_robot: f64,
    /// Class label for object points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    /// Fused object point this entry refers to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_id: Option<usize>,
    /// Room label at the point when the harness knows it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub room: Option<String>,
    /// Fraction of the open space around the point no camera has looked at
    /// yet, when the harness tracks it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unsearched: Option<f64>,
}

impl GraphPoint {
    pub fn new(position: Point, kind: PointKind, robot: &Point) -> Self {
        Self {
            id: 0,
            position,
            kind,
            is_new: false,
            distance_to_robot: position.dist(robot),
            label: None,
            confidence: None,
            object_id: None,
            room: None,
            unsearched: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingParams {
    pub samples: usize,
    pub min_cluster_size: usize,
    pub inflation: usize,
}

impl Default for SamplingParams {
    fn default() -> Self {
        Self { samples: 200, min_cluster_size: 3, inflation: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SparsifyParams {
    pub sigma: f64,
    pub floor_prob: f64,
    /// Graph points closer than this to the robot are always kept.
    pub local_radius: f64,
}

impl Default for SparsifyParams {
    fn default() -> Self {
        Self { sigma: 6.0, floor_prob: 0.05, local_radius: 1.0 }
    }
}

impl SparsifyParams {
    pub fn keep_prob(&self, d: f64) -> f64 {
        if d < self.local_radius {
            return 1.0;
        }
        (-d * d / (2.0 * self.sigma * self.sigma)).exp().max(self.floor_prob)
    }
}

/// Frontier centroids farther than this from any reachable cell are dropped.
const FRONTIER_SNAP_RADIUS: f64 = 3.0;

/// 8-connected clusters of frontier cells, each sorted by cell index, in
/// order of their lowest cell index.
pub fn frontier_clusters(grid: &OccupancyGrid, min_size: usize) -> Vec<Vec<Cell>> {
    let frame = grid.frame();
    let mut is_frontier = vec![false; frame.len()];
    for c in frontier_cells(grid) {
        is_frontier[frame.index(c)] = true;
    }
    let mut seen = vec![false; frame.len()];
    let mut clusters = Vec::new();
    for i in 0..frame.len() {
        if !is_frontier[i] || seen[i] {
            continue;
        }
        let mut members = Vec::new();
        let mut queue = VecDeque::from([i]);
        seen[i] = true;
        while let Some(j) = queue.pop_front() {
            members.push(frame.cell_at(j));
            for n in frame.neighbors8(frame.cell_at(j)) {
                let k = frame.index(n);
                if is_frontier[k] && !seen[k] {
                    seen[k] = true;
                    queue.push_back(k);
                }
            }
        }
        if members.len() >= min_size {
            members.sort_by_key(|c| frame.index(*c));
            clusters.push(members);
        }
    }
    clusters
}

/// Uniform graph points over the reachable inflated free space plus one
/// frontier point per frontier cluster. Ids are provisional (1-based in list
/// order).
pub fn sample_graph_points<R: Rng>(
    grid: &OccupancyGrid,
    pose: &Pose,
    rng: &mut R,
    params: &SamplingParams,
) -> Result<Vec<GraphPoint>, GraphError> {
    let frame = grid.frame();
    let robot = pose.position();
    let start = frame.cell_of(&robot).ok_or(GraphError::NoCandidates)?;
    let pg = PlanGrid::inflated(grid, params.inflation);
    let reachable = pg.component(start);
    let start_i = frame.index(start);
    let pool: Vec<usize> = (0..frame.len()).filter(|&i| reachable[i] && i != start_i && pg.is_passable(frame.cell_at(i))).collect();
    if pool.is_empty() {
        return Err(GraphError::NoCandidates);
    }
    let mut chosen = vec![false; frame.len()];
    let mut points = Vec::new();
    for _ in 0..params.samples {
        let i = pool[rng.random_range(0..pool.len())];
        if !chosen[i] {
            chosen[i] = true;
            points.push(GraphPoint::new(frame.center(frame.cell_at(i)), PointKind::Graph, &robot));
        }
    }
    for cluster in frontier_clusters(grid, params.min_cluster_size) {
        let n = cluster.len() as f64;
        let (sx, sy) = cluster.iter().fold((0.0, 0.0), |acc, c| {
            let p = frame.center(*c);
            (acc.0 + p.x, acc.1 + p.y)
        });
        let centroid = Point::new(sx / n, sy / n);
        if let Some(cell) = pg.snap(&reachable, &centroid, FRONTIER_SNAP_RADIUS) {
            if cell != start {
                points.push(GraphPoint::new(frame.center(cell), PointKind::Frontier, &robot));
            }
        }
    }
    renumber(&mut points);
    Ok(points)
}

/// Keeps each graph point with probability [`SparsifyParams::keep_prob`] of
/// its distance to the robot. Frontier and object points always survive.
/// Ids are reassigned contiguously.
pub fn gaussian_sparsify<R: Rng>(points: Vec<GraphPoint>, pose: &Pose, rng: &mut R, params: &SparsifyParams) -> Vec<GraphPoint> {
    let robot = pose.position();
    let mut kept: Vec<GraphPoint> = points
        .into_iter()
        .filter(|p| {
            // draw for every point so the stream does not depend on kinds
            let u: f64 = rng.random();
            p.kind != PointKind::Graph || u < params.keep_prob(p.position.dist(&robot))
        })
        .collect();
    renumber(&mut kept);
    kept
}

/// Marks points farther than `threshold` from every prior position as new.
pub fn label_new(points: &mut [GraphPoint], prior: &KdTree, threshold: f64) {
    assert!(threshold > 0.0, "novelty threshold must be positive");
    for p in points {
        p.is_new = prior.nearest(&p.position).is_none_or(|(_, d)| d > threshold);
    }
}

pub fn renumber(points: &mut [GraphPoint]) {
    for (i, p) in points.iter_mut().enumerate() {
        p.id = i + 1;
    }
}

/// The numbered candidate list exactly as it appears in prompts and logs.
pub fn format_point_list(points: &[GraphPoint]) -> String {
    let mut s = String::new();
    for p in points {
        let label = p.label.as_deref().unwrap_or("-");
        let conf = p.confidence.map_or_else(|| "-".to_string(), |c| format!("{c:.2}"));
        let _ = writeln!(
            s,
            "{}) kind={} label={} new={} x={:.2} y={:.2} z=0.0 dist={:.2} conf={}",
            p.id,
            p.kind.as_str(),
            label,
            u8::from(p.is_new),
            p.position.x,
            p.position.y,
            p.distance_to_robot,
            conf
        );
    }
    s
}

/// Checks the per-round invariants of a candidate list.
pub fn validate_points(points: &[GraphPoint], grid: &OccupancyGrid, robot: &Point) -> Result<(), String> {
    for (i, p) in points.iter().enumerate() {
        if p.id != i + 1 {
            return Err(format!("point at position {i} has id {}, expected {}", p.id, i + 1));
        }
        if (p.distance_to_robot - p.position.dist(robot)).abs() > 1e-9 {
            return Err(format!("point {} has a stale distance", p.id));
        }
        if p.kind != PointKind::Object {
            match grid.cell_of(&p.position) {
                Some(c) if grid.get(c) == CellState::Free => {}
                _ => return Err(format!("point {} is not on a free cell", p.id)),
            }
        }
    }
    Ok(())
}
