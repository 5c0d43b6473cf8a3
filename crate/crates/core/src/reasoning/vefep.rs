//! Volumetric-gain frontier baseline with a detector shortcut.

use crate::explore_graph::PointKind;
use crate::mapping::OccupancyGrid;

use super::gain::{path_gain_with, GainCache};
use super::{best_target, DecisionContext, ReasonError, ReasonerChoice, ReasoningParams, Routes};

/// Drives to a detected target object if there is one, otherwise to the
/// frontier whose route collects the most decayed volumetric gain.
pub fn vefep_select(ctx: &DecisionContext, grid: &OccupancyGrid, params: &ReasoningParams) -> Result<ReasonerChoice, ReasonError> {
    if ctx.candidates.is_empty() {
        return Err(ReasonError::NoCandidates);
    }
    let robot = ctx.pose.position();
    let last_decision_step = ctx.memory.last().map(|r| r.step);
    let lingering = |p: &crate::explore_graph::GraphPoint| {
        let stale = match (p.object_id.and_then(|id| ctx.object(id)), last_decision_step) {
            (Some(o), Some(s)) => o.last_step <= s,
            _ => false,
        };
        stale && p.position.dist(&robot) <= params.linger_radius
    };
    if let Some(t) = best_target(ctx, |p| !lingering(p)) {
        return Ok(ReasonerChoice {
            point_id: t.id,
            environment_description: ctx.description.clone(),
            justification: format!("Point {} is a detected {}; driving straight to it.", t.id, ctx.task.target_class),
        });
    }

    let frontiers: Vec<_> = ctx.candidates.iter().filter(|p| p.kind == PointKind::Frontier).collect();
    let pool: Vec<_> = if frontiers.is_empty() {
        ctx.candidates.iter().filter(|p| !(p.kind == PointKind::Object && lingering(p))).collect()
    } else {
        frontiers
    };
    let routes = Routes::new(grid, &ctx.pose, &params.planner);
    let mut cache = GainCache::new(grid, params.sensor_range);
    let mut best: Option<(f64, f64, usize)> = None;
    for p in &pool {
        let Some((line, length)) = routes.polyline(&ctx.pose, p.position, params.planner.snap_radius) else { continue };
        let g = path_gain_with(&line, params.lambda, |v| cache.gain(v));
        let better = match best {
            None => true,
            Some((bg, bl, bid)) => g > bg || (g == bg && (length < bl || (length == bl && p.id < bid))),
        };
        if better {
            best = Some((g, length, p.id));
        }
    }
    let (point_id, justification) = match best {
        Some((g, len, id)) => (id, format!("Point {id} has the highest path gain ({g:.1}) over a {len:.1} m route.")),
        None => {
            let p = pool
                .iter()
                .copied()
                .min_by(|a, b| a.distance_to_robot.total_cmp(&b.distance_to_robot).then(a.id.cmp(&b.id)))
                .unwrap_or(&ctx.candidates[0]);
            (p.id, format!("No candidate is plannable; taking the nearest, point {}.", p.id))
        }
    };
    Ok(ReasonerChoice { point_id, environment_description: ctx.description.clone(), justification })
}
