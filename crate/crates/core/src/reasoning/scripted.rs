//! Deterministic semantic reasoner: room and cue affinities, novelty,
//! exploration gain and a recency-weighted revisit penalty.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::explore_graph::{GraphPoint, PointKind};
use crate::geometry::Point;
use crate::mapping::{CellState, OccupancyGrid};

use super::gain::{path_gain_with, GainCache};
use super::{best_target, DecisionContext, ReasonError, ReasonerChoice, ReasoningParams, Routes};

/// Affinity scores in [0, 1] from cue object classes and room labels to
/// target classes.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AffinityTable {
    #[serde(default)]
    pub cues: BTreeMap<String, BTreeMap<String, f64>>,
    #[serde(default)]
    pub rooms: BTreeMap<String, BTreeMap<String, f64>>,
}

impl AffinityTable {
    pub fn from_json(text: &str) -> Result<Self, String> {
        let t: Self = serde_json::from_str(text).map_err(|e| e.to_string())?;
        for (kind, map) in [("cue", &t.cues), ("room", &t.rooms)] {
            for (from, row) in map {
                for (to, v) in row {
                    if !(0.0..=1.0).contains(v) {
                        return Err(format!("{kind} affinity {from} -> {to} = {v} outside [0, 1]"));
                    }
                }
            }
        }
        Ok(t)
    }

    /// Shared default table overlaid with the environment's own table, if one
    /// is bundled.
    pub fn bundled(env_name: &str) -> Self {
        let mut t = Self::from_json(include_str!("../../assets/affinity/default.json")).expect("bundled table parses");
        let extra = match env_name {
            "office1" => Some(include_str!("../../assets/affinity/office1.json")),
            "office2" => Some(include_str!("../../assets/affinity/office2.json")),
            "school" => Some(include_str!("../../assets/affinity/school.json")),
            _ => None,
        };
        if let Some(src) = extra {
            t.merge(Self::from_json(src).expect("bundled table parses"));
        }
        t
    }

    pub fn merge(&mut self, other: AffinityTable) {
        for (k, row) in other.cues {
            self.cues.entry(k).or_default().extend(row);
        }
        for (k, row) in other.rooms {
            self.rooms.entry(k).or_default().extend(row);
        }
    }

    pub fn cue(&self, cue: &str, target: &str) -> f64 {
        self.cues.get(cue).and_then(|r| r.get(target)).copied().unwrap_or(0.0)
    }

    pub fn room(&self, room: &str, target: &str) -> f64 {
        self.rooms.get(room).and_then(|r| r.get(target)).copied().unwrap_or(0.0)
    }

    /// Detector label list: the target first, then the strongest cue classes.
    pub fn top_labels(&self, target: &str, max_len: usize) -> Vec<String> {
        let mut cues: Vec<(&String, f64)> = self
            .cues
            .iter()
            .filter(|(c, _)| c.as_str() != target)
            .map(|(c, row)| (c, row.get(target).copied().unwrap_or(0.0)))
            .filter(|(_, v)| *v > 0.0)
            .collect();
        cues.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
        std::iter::once(target.to_string())
            .chain(cues.into_iter().map(|(c, _)| c.clone()))
            .take(max_len.max(1))
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScoreTerms {
    pub affinity: f64,
    pub novelty: f64,
    pub gain: f64,
    pub revisit: f64,
}

impl ScoreTerms {
    pub fn total(&self, w: &super::ScriptedWeights) -> f64 {
        w.alpha * self.affinity + w.beta * self.novelty + w.gamma * self.gain - w.delta * self.revisit
    }
}

/// Number of remembered poses within `radius` of `p`.
fn near_visits(ctx: &DecisionContext, p: &GraphPoint, radius: f64) -> usize {
    ctx.memory.iter().filter(|r| r.pose.position().dist(&p.position) <= radius).count()
}

/// Affinity of a point: the best of its room's score and any nearby cue
/// object's score.
pub fn point_affinity(ctx: &DecisionContext, p: &GraphPoint, table: &AffinityTable, cue_radius: f64) -> (f64, Option<String>) {
    let target = ctx.task.target_class.as_str();
    let mut best = (p.room.as_deref().map_or(0.0, |r| table.room(r, target)), p.room.clone());
    for o in &ctx.object_points {
        if o.class == target || o.position().dist(&p.position) > cue_radius {
            continue;
        }
        let a = table.cue(&o.class, target);
        if a > best.0 {
            best = (a, Some(o.class.clone()));
        }
    }
    best
}

/// The belief grid with free cells no camera has covered turned back into
/// unknown ones, so gain rewards unseen space rather than unmapped space.
pub fn search_belief(grid: &OccupancyGrid, viewed: &[bool]) -> OccupancyGrid {
    let mut out = grid.clone();
    let frame = grid.frame();
    for (i, seen) in viewed.iter().enumerate() {
        if !seen && grid.at_index(i) == CellState::Free {
            out.set(frame.cell_at(i), CellState::Unknown);
        }
    }
    out
}

/// Fraction of non-occupied cells within `radius` of `p` that are not
/// marked in `viewed`; 0 when there are none.
pub fn unsearched_fraction(grid: &OccupancyGrid, viewed: &[bool], p: &Point, radius: f64) -> f64 {
    let Some(center) = grid.cell_of(p) else { return 0.0 };
    let frame = grid.frame();
    let r = (radius / grid.cell_size()).floor() as isize;
    let r2 = (radius / grid.cell_size()).powi(2);
    let (mut open, mut unseen) = (0usize, 0usize);
    for dr in -r..=r {
        for dc in -r..=r {
            if (dc * dc + dr * dr) as f64 > r2 {
                continue;
            }
            let Some(c) = frame.shift(center, dc, dr) else { continue };
            if grid.get(c) == CellState::Occupied {
                continue;
            }
            open += 1;
            if !viewed[frame.index(c)] {
                unseen += 1;
            }
        }
    }
    if open == 0 {
        0.0
    } else {
        unseen as f64 / open as f64
    }
}

/// Recency-weighted proximity to remembered choices: 1 for the newest record,
/// decreasing linearly with age.
pub fn revisit_penalty(ctx: &DecisionContext, p: &GraphPoint, radius: f64) -> f64 {
    let n = ctx.memory.len();
    let cap = ctx.memory.capacity() as f64;
    ctx.memory
        .iter()
        .enumerate()
        .filter(|(_, r)| r.chosen.position.dist(&p.position) <= radius)
        .map(|(i, _)| 1.0 - (n - 1 - i) as f64 / cap)
        .fold(0.0, f64::max)
}

pub fn scripted_select(
    ctx: &DecisionContext,
    grid: &OccupancyGrid,
    table: &AffinityTable,
    params: &ReasoningParams,
) -> Result<ReasonerChoice, ReasonError> {
    if ctx.candidates.is_empty() {
        return Err(ReasonError::NoCandidates);
    }
    let exhausted = |p: &GraphPoint| {
        near_visits(ctx, p, params.near_visit_radius) >= params.max_near_visits
            || ctx.checked.iter().any(|c| c.dist(&p.position) <= ctx.task.success_radius)
    };
    if let Some(t) = best_target(ctx, |p| !exhausted(p)) {
        return Ok(ReasonerChoice {
            point_id: t.id,
            environment_description: ctx.description.clone(),
            justification: format!(
                "Point {} is a detected {} that I have not inspected yet, so I am going to confirm it.",
                t.id, ctx.task.target_class
            ),
        });
    }

    let pool: Vec<&GraphPoint> = ctx.candidates.iter().filter(|p| p.kind != PointKind::Object).collect();
    let pool = if pool.is_empty() { ctx.candidates.iter().collect() } else { pool };

    let routes = Routes::new(grid, &ctx.pose, &params.planner);
    let searched;
    let gain_grid = match &ctx.viewed {
        Some(v) => {
            searched = search_belief(grid, v);
            &searched
        }
        None => grid,
    };
    let mut cache = GainCache::new(gain_grid, params.sensor_range);
    let (gains, reach): (Vec<f64>, Vec<f64>) = pool
        .iter()
        .map(|p| {
            routes.polyline(&ctx.pose, p.position, params.planner.snap_radius).map_or((0.0, 0.0), |(line, len)| {
                (path_gain_with(&line, params.search_lambda, |v| cache.gain(v)), (-params.affinity_decay * len).exp())
            })
        })
        .unzip();
    let norm = gains.iter().copied().fold(0.0, f64::max);

    let w = &params.weights;
    let mut best: Option<(f64, &GraphPoint, ScoreTerms, Option<String>)> = None;
    for ((p, g), r) in pool.iter().zip(&gains).zip(&reach) {
        let (affinity, cue) = point_affinity(ctx, p, table, params.cue_radius);
        let affinity = affinity.max(params.prior_affinity);
        let terms = ScoreTerms {
            // semantic pull fades once the cameras have covered the area
            affinity: affinity * p.unsearched.unwrap_or(1.0) * r,
            novelty: if p.is_new { 1.0 } else { 0.0 },
            gain: if norm > 0.0 { g / norm } else { 0.0 },
            revisit: revisit_penalty(ctx, p, params.revisit_radius),
        };
        let score = terms.total(w);
        if best.as_ref().is_none_or(|b| score > b.0 || (score == b.0 && p.id < b.1.id)) {
            best = Some((score, p, terms, cue));
        }
    }
    let (_, p, terms, cue) = best.expect("pool is nonempty");
    Ok(ReasonerChoice {
        point_id: p.id,
        environment_description: ctx.description.clone(),
        justification: justify(p, &terms, cue.as_deref(), w, &ctx.task.target_class),
    })
}

fn justify(p: &GraphPoint, t: &ScoreTerms, cue: Option<&str>, w: &super::ScriptedWeights, target: &str) -> String {
    let parts = [w.alpha * t.affinity, w.beta * t.novelty, w.gamma * t.gain];
    let dominant = (0..3).fold(0, |b, i| if parts[i] > parts[b] { i } else { b });
    let mut s = match (dominant, parts[dominant] > 0.0) {
        (0, true) => format!(
            "Point {} is near {} which is where a {target} is likely to be.",
            p.id,
            cue.map_or("this area".to_string(), |c| format!("the {c}"))
        ),
        (1, true) => format!("Point {} is newly discovered and opens space I have not seen.", p.id),
        (2, true) => format!("Point {} leads past the most unexplored space.", p.id),
        _ => format!("Point {} is the best remaining option.", p.id),
    };
    if t.revisit > 0.0 {
        s.push_str(" It is close to a place I chose before.");
    }
    s
}
