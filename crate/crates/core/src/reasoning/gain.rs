//! Volumetric exploration gain.

use crate::geometry::{center_line, Cell, Point};
use crate::mapping::{CellState, OccupancyGrid};

/// Unknown cells whose centers lie within `sensor_range` of the vertex cell's
/// center and are visible from it through non-occupied cells.
pub fn volumetric_gain(grid: &OccupancyGrid, vertex: &Point, sensor_range: f64) -> u32 {
    let Some(v) = grid.cell_of(vertex) else { return 0 };
    let offsets = disc_offsets(sensor_range / grid.cell_size());
    gain_at(grid, v, &offsets)
}

fn disc_offsets(radius_cells: f64) -> Vec<(isize, isize)> {
    let r = radius_cells.floor() as isize;
    let r2 = radius_cells * radius_cells;
    let mut out = Vec::new();
    for dr in -r..=r {
        for dc in -r..=r {
            if (dc * dc + dr * dr) as f64 <= r2 {
                out.push((dc, dr));
            }
        }
    }
    out
}

fn gain_at(grid: &OccupancyGrid, v: Cell, offsets: &[(isize, isize)]) -> u32 {
    let frame = grid.frame();
    let mut count = 0;
    for &(dc, dr) in offsets {
        let Some(c) = frame.shift(v, dc, dr) else { continue };
        if grid.get(c) != CellState::Unknown {
            continue;
        }
        let clear = center_line(v, c).take_while(|x| *x != c).all(|x| grid.get(x) != CellState::Occupied);
        if clear {
            count += 1;
        }
    }
    count
}

/// Per-cell memo of volumetric gain for one grid state.
pub struct GainCache<'a> {
    grid: &'a OccupancyGrid,
    offsets: Vec<(isize, isize)>,
    /// Summed-area table of unknown cells, for skipping fully known areas.
    sat: Vec<u32>,
    radius_cells: usize,
    memo: Vec<Option<u32>>,
}

impl<'a> GainCache<'a> {
    pub fn new(grid: &'a OccupancyGrid, sensor_range: f64) -> Self {
        let (w, h) = (grid.width(), grid.height());
        let mut sat = vec![0u32; (w + 1) * (h + 1)];
        for r in 0..h {
            for c in 0..w {
                let u = u32::from(grid.get((c, r)) == CellState::Unknown);
                sat[(r + 1) * (w + 1) + c + 1] = u + sat[r * (w + 1) + c + 1] + sat[(r + 1) * (w + 1) + c] - sat[r * (w + 1) + c];
            }
        }
        let radius = sensor_range / grid.cell_size();
        Self {
            grid,
            offsets: disc_offsets(radius),
            sat,
            radius_cells: radius.floor() as usize,
            memo: vec![None; w * h],
        }
    }

    fn unknown_in_box(&self, v: Cell) -> u32 {
        let w = self.grid.width();
        let r = self.radius_cells;
        let c0 = v.0.saturating_sub(r);
        let r0 = v.1.saturating_sub(r);
        let c1 = (v.0 + r + 1).min(w);
        let r1 = (v.1 + r + 1).min(self.grid.height());
        let at = |row: usize, col: usize| self.sat[row * (w + 1) + col];
        at(r1, c1) + at(r0, c0) - at(r0, c1) - at(r1, c0)
    }

    pub fn gain_cell(&mut self, v: Cell) -> u32 {
        let i = self.grid.frame().index(v);
        if let Some(g) = self.memo[i] {
            return g;
        }
        let g = if self.unknown_in_box(v) == 0 { 0 } else { gain_at(self.grid, v, &self.offsets) };
        self.memo[i] = Some(g);
        g
    }

    pub fn gain(&mut self, p: &Point) -> u32 {
        match self.grid.cell_of(p) {
            Some(c) => self.gain_cell(c),
            None => 0,
        }
    }
}

/// Points along a polyline at every `spacing` meters of arc length, plus the
/// endpoint, paired with their arc length.
pub fn path_vertices(polyline: &[Point], spacing: f64) -> Vec<(Point, f64)> {
    let Some(&first) = polyline.first() else { return Vec::new() };
    let mut out = vec![(first, 0.0)];
    let mut arc = 0.0;
    let mut next = spacing;
    for w in polyline.windows(2) {
        let seg = w[0].dist(&w[1]);
        if seg == 0.0 {
            continue;
        }
        let angle = w[0].bearing_to(&w[1]);
        while next < arc + seg {
            out.push((w[0].offset(angle, next - arc), next));
            next += spacing;
        }
        arc += seg;
    }
    let last = *polyline.last().expect("nonempty");
    if arc > out.last().expect("nonempty").1 + 1e-9 {
        out.push((last, arc));
    }
    out
}

/// Sum of `vg(v) * exp(-lambda * arc(v))` over the path's 1 m vertices.
pub fn path_gain_with(polyline: &[Point], lambda: f64, mut vg: impl FnMut(&Point) -> u32) -> f64 {
    assert!(!polyline.is_empty(), "path gain needs at least one vertex");
    path_vertices(polyline, 1.0)
        .iter()
        .map(|(p, arc)| vg(p) as f64 * (-lambda * arc).exp())
        .sum()
}

pub fn path_gain(grid: &OccupancyGrid, polyline: &[Point], lambda: f64, sensor_range: f64) -> f64 {
    path_gain_with(polyline, lambda, |p| volumetric_gain(grid, p, sensor_range))
}
