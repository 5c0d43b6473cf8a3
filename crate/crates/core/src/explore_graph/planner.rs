//! 8-connected grid search over inflated free space.
//!
//! Costs are kept as integer counts of straight and diagonal moves so that
//! two searches agree on a cost exactly, not just to rounding.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Cell, GridFrame, Point};
use crate::mapping::{CellState, OccupancyGrid};
use crate::world::{EnvironmentSpec, Pose};

#[derive(Debug, Error, PartialEq)]
pub enum PlanError {
    #[error("no reachable free cell within {radius} m of ({x:.2}, {y:.2})")]
    Unreachable { x: f64, y: f64, radius: f64 },
    #[error("start position is outside the grid")]
    StartOutside,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlannerParams {
    /// Obstacle inflation in cells.
    pub inflation: usize,
    /// How far from the requested goal a reachable substitute may be.
    pub snap_radius: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self { inflation: 1, snap_radius: 3.0 }
    }
}

/// Path cost as `straight + diagonal * sqrt(2)` cell widths.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCost {
    pub straight: u32,
    pub diagonal: u32,
}

impl GridCost {
    pub fn key(&self) -> f64 {
        self.straight as f64 + self.diagonal as f64 * SQRT_2
    }

    pub fn meters(&self, cell_size: f64) -> f64 {
        self.key() * cell_size
    }

    fn add(self, diagonal: bool) -> Self {
        if diagonal {
            Self { straight: self.straight, diagonal: self.diagonal + 1 }
        } else {
            Self { straight: self.straight + 1, diagonal: self.diagonal }
        }
    }
}

/// Traversability bitmap for planning.
#[derive(Clone, Debug)]
pub struct PlanGrid {
    frame: GridFrame,
    passable: Vec<bool>,
}

impl PlanGrid {
    /// Free belief cells with no occupied cell within `inflation` cells
    /// (Chebyshev distance).
    pub fn inflated(grid: &OccupancyGrid, inflation: usize) -> Self {
        let frame = grid.frame();
        let (w, h) = (frame.width, frame.height);
        let occ: Vec<bool> = grid.states().iter().map(|s| *s == CellState::Occupied).collect();
        // separable dilation: rows then columns
        let r = inflation;
        let mut tmp = vec![false; w * h];
        for row in 0..h {
            let mut last_occ: Option<usize> = None;
            let line = &occ[row * w..(row + 1) * w];
            let mut next_occ = vec![usize::MAX; w];
            let mut nxt = usize::MAX;
            for col in (0..w).rev() {
                if line[col] {
                    nxt = col;
                }
                next_occ[col] = nxt;
            }
            for col in 0..w {
                if line[col] {
                    last_occ = Some(col);
                }
                let near_prev = last_occ.is_some_and(|c| col - c <= r);
                let near_next = next_occ[col] != usize::MAX && next_occ[col] - col <= r;
                tmp[row * w + col] = near_prev || near_next;
            }
        }
        let mut passable = vec![false; w * h];
        for col in 0..w {
            for row in 0..h {
                let lo = row.saturating_sub(r);
                let hi = (row + r).min(h - 1);
                let blocked = (lo..=hi).any(|rr| tmp[rr * w + col]);
                passable[row * w + col] = !blocked && grid.states()[row * w + col] == CellState::Free;
            }
        }
        Self { frame, passable }
    }

    /// Ground-truth free cells, no inflation.
    pub fn from_truth(env: &EnvironmentSpec) -> Self {
        let frame = env.frame();
        let passable = (0..frame.len()).map(|i| env.is_free(frame.cell_at(i))).collect();
        Self { frame, passable }
    }

    pub fn from_fn(frame: GridFrame, f: impl Fn(Cell) -> bool) -> Self {
        let passable = (0..frame.len()).map(|i| f(frame.cell_at(i))).collect();
        Self { frame, passable }
    }

    pub fn frame(&self) -> GridFrame {
        self.frame
    }

    pub fn is_passable(&self, cell: Cell) -> bool {
        self.passable[self.frame.index(cell)]
    }

    /// Legal moves out of `cell`: 8-connected, diagonals only when both
    /// orthogonal neighbors are passable.
    pub fn moves(&self, cell: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
        const D: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, 1), (1, -1), (-1, -1)];
        D.iter().filter_map(move |&(dc, dr)| {
            let n = self.frame.shift(cell, dc, dr)?;
            if !self.is_passable(n) {
                return None;
            }
            let diagonal = dc != 0 && dr != 0;
            if diagonal {
                let a = self.frame.shift(cell, dc, 0)?;
                let b = self.frame.shift(cell, 0, dr)?;
                if !(self.is_passable(a) && self.is_passable(b)) {
                    return None;
                }
            }
            Some((n, diagonal))
        })
    }

    /// Cells reachable from `start` (which is always included).
    pub fn component(&self, start: Cell) -> Vec<bool> {
        let mut seen = vec![false; self.frame.len()];
        let mut queue = VecDeque::from([start]);
        seen[self.frame.index(start)] = true;
        while let Some(c) = queue.pop_front() {
            for (n, _) in self.moves(c) {
                let i = self.frame.index(n);
                if !seen[i] {
                    seen[i] = true;
                    queue.push_back(n);
                }
            }
        }
        seen
    }

    /// Reachable cell whose center is nearest `target`, within `radius`.
    /// Ties go to the lowest cell index.
    pub fn snap(&self, reachable: &[bool], target: &Point, radius: f64) -> Option<Cell> {
        if let Some(c) = self.frame.cell_of(target) {
            if reachable[self.frame.index(c)] {
                return Some(c);
            }
        }
        let cs = self.frame.cell_size;
        let span = (radius / cs).ceil() as isize + 1;
        let (tc, tr) = ((target.x / cs).floor() as isize, (target.y / cs).floor() as isize);
        let mut best: Option<(f64, usize)> = None;
        for r in (tr - span).max(0)..=(tr + span).min(self.frame.height as isize - 1) {
            for c in (tc - span).max(0)..=(tc + span).min(self.frame.width as isize - 1) {
                let cell = (c as usize, r as usize);
                let i = self.frame.index(cell);
                if !reachable[i] {
                    continue;
                }
                let d = self.frame.center(cell).dist(target);
                if d <= radius && best.is_none_or(|(bd, bi)| d < bd || (d == bd && i < bi)) {
                    best = Some((d, i));
                }
            }
        }
        best.map(|(_, i)| self.frame.cell_at(i))
    }
}

#[derive(Clone, Copy, PartialEq)]
struct QueueEntry {
    key: f64,
    tie: f64,
    index: usize,
}

impl Eq for QueueEntry {}

impl Ord for QueueEntry {
    // reversed for a min-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .key
            .total_cmp(&self.key)
            .then_with(|| other.tie.total_cmp(&self.tie))
            .then_with(|| other.index.cmp(&self.index))
    }
}

impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    /// Cells from start to goal inclusive.
    pub cells: Vec<Cell>,
    /// Polyline to follow: the start cell center when the robot is off it,
    /// then each direction change, then the goal center.
    pub waypoints: Vec<Point>,
    pub cost: GridCost,
    /// Center-to-center length in meters.
    pub length: f64,
    pub goal: Cell,
}

fn octile(a: Cell, b: Cell) -> f64 {
    let dx = a.0.abs_diff(b.0) as f64;
    let dy = a.1.abs_diff(b.1) as f64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    (hi - lo) + lo * SQRT_2
}

/// A* between two cells. `start` need not itself be passable.
pub fn astar(pg: &PlanGrid, start: Cell, goal: Cell) -> Option<(Vec<Cell>, GridCost)> {
    let frame = pg.frame();
    let n = frame.len();
    let mut g: Vec<Option<GridCost>> = vec![None; n];
    let mut parent = vec![usize::MAX; n];
    let mut closed = vec![false; n];
    let si = frame.index(start);
    let gi = frame.index(goal);
    g[si] = Some(GridCost::default());
    let mut heap = BinaryHeap::from([QueueEntry { key: octile(start, goal), tie: octile(start, goal), index: si }]);
    while let Some(QueueEntry { index, .. }) = heap.pop() {
        if closed[index] {
            continue;
        }
        closed[index] = true;
        if index == gi {
            break;
        }
        let cell = frame.cell_at(index);
        let gc = g[index].expect("expanded nodes have a cost");
        for (nb, diag) in pg.moves(cell) {
            let ni = frame.index(nb);
            if closed[ni] {
                continue;
            }
            let cand = gc.add(diag);
            if g[ni].is_none_or(|old| cand.key() < old.key()) {
                g[ni] = Some(cand);
                parent[ni] = index;
                let h = octile(nb, goal);
                heap.push(QueueEntry { key: cand.key() + h, tie: h, index: ni });
            }
        }
    }
    let cost = g[gi]?;
    if !closed[gi] {
        return None;
    }
    let mut cells = vec![goal];
    let mut cur = gi;
    while cur != si {
        cur = parent[cur];
        cells.push(frame.cell_at(cur));
    }
    cells.reverse();
    Some((cells, cost))
}

/// Plans from the robot pose to the reachable cell nearest `to`.
pub fn plan_path(grid: &OccupancyGrid, from: &Pose, to: Point, params: &PlannerParams) -> Result<Plan, PlanError> {
    let pg = PlanGrid::inflated(grid, params.inflation);
    plan_on(&pg, from, to, params.snap_radius)
}

pub fn plan_on(pg: &PlanGrid, from: &Pose, to: Point, snap_radius: f64) -> Result<Plan, PlanError> {
    let frame = pg.frame();
    let start = frame.cell_of(&from.position()).ok_or(PlanError::StartOutside)?;
    let reachable = pg.component(start);
    let goal = pg
        .snap(&reachable, &to, snap_radius)
        .ok_or(PlanError::Unreachable { x: to.x, y: to.y, radius: snap_radius })?;
    let (cells, cost) = astar(pg, start, goal).expect("goal is in the start component");
    Ok(make_plan(frame, from, cells, cost))
}

pub(crate) fn make_plan(frame: GridFrame, from: &Pose, cells: Vec<Cell>, cost: GridCost) -> Plan {
    let mut waypoints = Vec::new();
    let start_center = frame.center(cells[0]);
    if from.position() != start_center {
        waypoints.push(start_center);
    }
    for k in 1..cells.len() {
        let last = k + 1 == cells.len();
        let turn = !last && {
            let d0 = (cells[k].0 as isize - cells[k - 1].0 as isize, cells[k].1 as isize - cells[k - 1].1 as isize);
            let d1 = (cells[k + 1].0 as isize - cells[k].0 as isize, cells[k + 1].1 as isize - cells[k].1 as isize);
            d0 != d1
        };
        if last || turn {
            waypoints.push(frame.center(cells[k]));
        }
    }
    let goal = *cells.last().expect("nonempty path");
    Plan { length: cost.meters(frame.cell_size), cells, waypoints, cost, goal }
}

/// Single-source shortest-path tree over the start's component.
#[derive(Clone, Debug)]
pub struct PathTree {
    frame: GridFrame,
    pub start: Cell,
    cost: Vec<Option<GridCost>>,
    parent: Vec<usize>,
    reachable: Vec<bool>,
}

impl PathTree {
    pub fn build(pg: &PlanGrid, start: Cell) -> Self {
        let frame = pg.frame();
        let n = frame.len();
        let mut cost: Vec<Option<GridCost>> = vec![None; n];
        let mut parent = vec![usize::MAX; n];
        let mut done = vec![false; n];
        let si = frame.index(start);
        cost[si] = Some(GridCost::default());
        let mut heap = BinaryHeap::from([QueueEntry { key: 0.0, tie: 0.0, index: si }]);
        while let Some(QueueEntry { index, .. }) = heap.pop() {
            if done[index] {
                continue;
            }
            done[index] = true;
            let gc = cost[index].expect("queued nodes have a cost");
            for (nb, diag) in pg.moves(frame.cell_at(index)) {
                let ni = frame.index(nb);
                let cand = gc.add(diag);
                if !done[ni] && cost[ni].is_none_or(|old| cand.key() < old.key()) {
                    cost[ni] = Some(cand);
                    parent[ni] = index;
                    heap.push(QueueEntry { key: cand.key(), tie: 0.0, index: ni });
                }
            }
        }
        Self { frame, start, cost, parent, reachable: done }
    }

    pub fn reachable(&self) -> &[bool] {
        &self.reachable
    }

    pub fn cost(&self, cell: Cell) -> Option<GridCost> {
        self.cost[self.frame.index(cell)]
    }

    pub fn cells_to(&self, goal: Cell) -> Option<Vec<Cell>> {
        let gi = self.frame.index(goal);
        self.cost[gi]?;
        let si = self.frame.index(self.start);
        let mut cells = vec![goal];
        let mut cur = gi;
        while cur != si {
            cur = self.parent[cur];
            cells.push(self.frame.cell_at(cur));
        }
        cells.reverse();
        Some(cells)
    }

    pub fn plan_to(&self, pg: &PlanGrid, from: &Pose, to: Point, snap_radius: f64) -> Result<Plan, PlanError> {
        let goal = pg
            .snap(&self.reachable, &to, snap_radius)
            .ok_or(PlanError::Unreachable { x: to.x, y: to.y, radius: snap_radius })?;
        let cells = self.cells_to(goal).expect("snapped goal is reachable");
        let cost = self.cost(goal).expect("snapped goal is reachable");
        Ok(make_plan(self.frame, from, cells, cost))
    }
}

/// Length of the shortest ground-truth route (no inflation) from `from` to
/// any cell whose center lies within `radius` of `target`.
pub fn direct_path_length(env: &EnvironmentSpec, from: &Point, target: &Point, radius: f64) -> Option<f64> {
    let pg = PlanGrid::from_truth(env);
    let start = env.frame().cell_of(from)?;
    let tree = PathTree::build(&pg, start);
    let frame = env.frame();
    (0..frame.len())
        .filter(|&i| tree.reachable[i] && frame.center(frame.cell_at(i)).dist(target) <= radius)
        .filter_map(|i| tree.cost[i])
        .map(|c| c.key())
        .min_by(f64::total_cmp)
        .map(|k| k * env.cell_size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn corridor_grid() -> OccupancyGrid {
        // 5 rows: walls at rows 0 and 4, free between
        let mut g = OccupancyGrid::new(30, 5, 0.25);
        for c in 0..30 {
            for r in 0..5 {
                let st = if r == 0 || r == 4 || c == 0 || c == 29 { CellState::Occupied } else { CellState::Free };
                g.set((c, r), st);
            }
        }
        g
    }

    #[test]
    fn straight_corridor_four_meters() {
        let g = corridor_grid();
        let from = Pose::new(g.center((3, 2)).x, g.center((3, 2)).y, 0.0);
        let plan = plan_path(&g, &from, g.center((19, 2)), &PlannerParams::default()).unwrap();
        assert!((plan.length - 4.0).abs() <= 0.25);
        assert_eq!(plan.waypoints, vec![g.center((19, 2))]);
    }

    #[test]
    fn same_cell_is_empty_path() {
        let g = corridor_grid();
        let c = g.center((5, 2));
        let plan = plan_path(&g, &Pose::new(c.x, c.y, 0.0), c, &PlannerParams::default()).unwrap();
        assert!(plan.waypoints.is_empty());
        assert_eq!(plan.length, 0.0);
    }

    #[test]
    fn unreachable_far_goal() {
        let g = corridor_grid();
        let c = g.center((5, 2));
        let err = plan_path(&g, &Pose::new(c.x, c.y, 0.0), Point::new(3.6, 30.0), &PlannerParams::default());
        assert!(matches!(err, Err(PlanError::Unreachable { .. })));
    }

    #[test]
    fn inflation_blocks_cells_next_to_walls() {
        let g = corridor_grid();
        let pg = PlanGrid::inflated(&g, 1);
        assert!(pg.is_passable((5, 2)));
        assert!(!pg.is_passable((5, 1)));
        assert!(!pg.is_passable((1, 2)));
    }

    #[test]
    fn tree_and_astar_agree() {
        let g = corridor_grid();
        let pg = PlanGrid::inflated(&g, 0);
        let tree = PathTree::build(&pg, (1, 1));
        let (_, c) = astar(&pg, (1, 1), (27, 3)).unwrap();
        assert_eq!(tree.cost((27, 3)), Some(c));
        assert_eq!(c, GridCost { straight: 24, diagonal: 2 });
    }
}
