//! Online belief map built from a simulated lidar.

use std::fmt::Write as _;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::geometry::{Cell, GridFrame, GridRay, Point};
use crate::world::{EnvironmentSpec, Pose, RayMask};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CellState {
    Unknown,
    Free,
    Occupied,
}

impl CellState {
    pub fn to_char(self) -> char {
        match self {
            CellState::Unknown => '?',
            CellState::Free => '.',
            CellState::Occupied => '#',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            '?' => Some(CellState::Unknown),
            '.' => Some(CellState::Free),
            '#' => Some(CellState::Occupied),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LidarModel {
    pub ray_count: usize,
    pub max_range: f64,
}

impl Default for LidarModel {
    fn default() -> Self {
        Self { ray_count: 360, max_range: 8.0 }
    }
}

impl LidarModel {
    pub fn new(ray_count: usize, max_range: f64) -> Self {
        assert!(ray_count >= 8, "lidar needs at least 8 rays");
        assert!(max_range > 0.0, "lidar range must be positive");
        Self { ray_count, max_range }
    }

    /// World-frame ray angles. Rays are fixed in the world frame so a scan
    /// does not depend on the robot's heading.
    pub fn angles(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.ray_count).map(move |i| 2.0 * PI * i as f64 / self.ray_count as f64)
    }
}

/// Tri-state belief grid. Knowledge is monotone: a cell only ever leaves the
/// `Unknown` state.
#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    frame: GridFrame,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn new(width: usize, height: usize, cell_size: f64) -> Self {
        Self {
            frame: GridFrame { width, height, cell_size },
            cells: vec![CellState::Unknown; width * height],
        }
    }

    pub fn for_env(env: &EnvironmentSpec) -> Self {
        Self::new(env.width, env.height, env.cell_size)
    }

    /// Fully known grid mirroring the ground truth.
    pub fn from_truth(env: &EnvironmentSpec) -> Self {
        let mut g = Self::for_env(env);
        for i in 0..g.cells.len() {
            let cell = g.frame.cell_at(i);
            g.cells[i] = if env.is_free(cell) { CellState::Free } else { CellState::Occupied };
        }
        g
    }

    pub fn frame(&self) -> GridFrame {
        self.frame
    }

    pub fn width(&self) -> usize {
        self.frame.width
    }

    pub fn height(&self) -> usize {
        self.frame.height
    }

    pub fn cell_size(&self) -> f64 {
        self.frame.cell_size
    }

    pub fn get(&self, cell: Cell) -> CellState {
        self.cells[self.frame.index(cell)]
    }

    pub fn at_index(&self, i: usize) -> CellState {
        self.cells[i]
    }

    pub fn set(&mut self, cell: Cell, state: CellState) {
        let i = self.frame.index(cell);
        self.cells[i] = state;
    }

    pub fn states(&self) -> &[CellState] {
        &self.cells
    }

    pub fn cell_of(&self, p: &Point) -> Option<Cell> {
        self.frame.cell_of(p)
    }

    pub fn center(&self, cell: Cell) -> Point {
        self.frame.center(cell)
    }

    pub fn count(&self, state: CellState) -> usize {
        self.cells.iter().filter(|s| **s == state).count()
    }

    /// Records an observation, refusing transitions back toward `Unknown`.
    fn observe(&mut self, cell: Cell, state: CellState) {
        let i = self.frame.index(cell);
        if self.cells[i] == CellState::Unknown {
            self.cells[i] = state;
        }
    }

    /// One character per cell, top row (highest y) first.
    pub fn to_ascii(&self) -> String {
        let mut s = String::with_capacity((self.width() + 1) * self.height());
        for row in (0..self.height()).rev() {
            for col in 0..self.width() {
                s.push(self.get((col, row)).to_char());
            }
            s.push('\n');
        }
        s
    }

    pub fn from_ascii(text: &str, cell_size: f64) -> Result<Self, String> {
        let lines: Vec<&str> = text.lines().filter(|l| !l.is_empty()).collect();
        let height = lines.len();
        let width = lines.first().map_or(0, |l| l.chars().count());
        if width == 0 {
            return Err("empty grid".into());
        }
        let mut g = Self::new(width, height, cell_size);
        for (i, line) in lines.iter().enumerate() {
            let row = height - 1 - i;
            if line.chars().count() != width {
                return Err(format!("line {} has {} cells, expected {width}", i + 1, line.chars().count()));
            }
            for (col, ch) in line.chars().enumerate() {
                let st = CellState::from_char(ch).ok_or_else(|| format!("bad cell character {ch:?}"))?;
                g.set((col, row), st);
            }
        }
        Ok(g)
    }
}

/// Integrates one full lidar sweep from `pose` against the ground truth.
///
/// Cells a ray passes through before its hit become `Free`, the hit cell
/// becomes `Occupied`, and nothing beyond the hit or the range is touched.
pub fn integrate_scan(grid: &mut OccupancyGrid, env: &EnvironmentSpec, pose: &Pose, lidar: &LidarModel) {
    let origin = pose.position();
    let frame = grid.frame();
    for angle in lidar.angles() {
        for rc in GridRay::new(frame, origin, angle, lidar.max_range) {
            if env.blocks(rc.cell, RayMask::Lidar) {
                grid.observe(rc.cell, CellState::Occupied);
                break;
            }
            grid.observe(rc.cell, CellState::Free);
        }
    }
}

/// Free cells with at least one 4-neighbor still unknown.
pub fn frontier_cells(grid: &OccupancyGrid) -> Vec<Cell> {
    let frame = grid.frame();
    let mut out = Vec::new();
    for row in 0..frame.height {
        for col in 0..frame.width {
            let cell = (col, row);
            if grid.get(cell) == CellState::Free
                && frame.neighbors4(cell).any(|n| grid.get(n) == CellState::Unknown)
            {
                out.push(cell);
            }
        }
    }
    out
}

/// Fraction of the environment's free cells that the grid knows to be free.
pub fn coverage(grid: &OccupancyGrid, env: &EnvironmentSpec) -> f64 {
    let total = env.free_cell_count();
    if total == 0 {
        return 1.0;
    }
    let frame = grid.frame();
    let known = (0..frame.len())
        .filter(|&i| grid.at_index(i) == CellState::Free && env.is_free(frame.cell_at(i)))
        .count();
    known as f64 / total as f64
}

/// Compact summary used in logs.
pub fn describe_counts(grid: &OccupancyGrid) -> String {
    let mut s = String::new();
    let _ = write!(
        s,
        "free={} occupied={} unknown={}",
        grid.count(CellState::Free),
        grid.count(CellState::Occupied),
        grid.count(CellState::Unknown)
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::Terrain;

    fn boxed_room(n: usize) -> EnvironmentSpec {
        let mut walls = Vec::new();
        for i in 0..n {
            walls.extend([(i, 0), (i, n - 1), (0, i), (n - 1, i)]);
        }
        let c = n as f64 * 0.25 / 2.0;
        EnvironmentSpec::from_parts("room", 0.25, n, n, &walls, &[], Pose::new(c + 0.125, c + 0.125, 0.0))
    }

    #[test]
    fn first_scan_in_open_room_frees_the_interior() {
        let env = boxed_room(20);
        let mut grid = OccupancyGrid::for_env(&env);
        integrate_scan(&mut grid, &env, &env.start, &LidarModel::default());
        for row in 0..20 {
            for col in 0..20 {
                let expect = if env.terrain((col, row)) == Terrain::Wall { CellState::Occupied } else { CellState::Free };
                let corner = (col == 0 || col == 19) && (row == 0 || row == 19);
                if !corner {
                    assert_eq!(grid.get((col, row)), expect, "cell {col},{row}");
                }
            }
        }
    }

    #[test]
    fn repeated_scan_is_idempotent() {
        let env = boxed_room(30);
        let mut grid = OccupancyGrid::for_env(&env);
        let lidar = LidarModel::default();
        integrate_scan(&mut grid, &env, &env.start, &lidar);
        let once = grid.clone();
        integrate_scan(&mut grid, &env, &env.start, &lidar);
        assert_eq!(grid, once);
    }

    #[test]
    fn frontier_trivial_cases() {
        let mut g = OccupancyGrid::new(5, 5, 0.25);
        assert!(frontier_cells(&g).is_empty());
        g.set((2, 2), CellState::Free);
        assert_eq!(frontier_cells(&g), vec![(2, 2)]);
    }

    #[test]
    fn coverage_endpoints() {
        let env = boxed_room(10);
        assert_eq!(coverage(&OccupancyGrid::for_env(&env), &env), 0.0);
        assert_eq!(coverage(&OccupancyGrid::from_truth(&env), &env), 1.0);
    }

    #[test]
    fn coverage_hand_count() {
        // 10x10 box: 64 interior free cells; reveal the 3x4 block in one corner
        let env = boxed_room(10);
        let mut g = OccupancyGrid::for_env(&env);
        for col in 1..4 {
            for row in 1..5 {
                g.set((col, row), CellState::Free);
            }
        }
        g.set((0, 1), CellState::Occupied);
        assert_eq!(coverage(&g, &env), 12.0 / 64.0);
    }

    #[test]
    fn ascii_round_trip() {
        let text = "?.#\n..#\n???\n";
        let g = OccupancyGrid::from_ascii(text, 0.5).unwrap();
        assert_eq!(g.get((2, 2)), CellState::Occupied);
        assert_eq!(g.get((0, 0)), CellState::Unknown);
        assert_eq!(g.to_ascii(), text);
    }
}
