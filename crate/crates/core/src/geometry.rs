//! Planar geometry and grid traversal shared by the world, the belief map and
//! the gain computations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// Grid cell as `(col, row)`. Column grows with x, row grows with y.
pub type Cell = (usize, usize);

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn dist_sq(&self, other: &Point) -> f64 {
        let dx = self.x - other.x;
        let dy = self.y - other.y;
        dx * dx + dy * dy
    }

    /// Bearing from `self` to `other` in the world frame.
    pub fn bearing_to(&self, other: &Point) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }

    pub fn offset(&self, angle: f64, distance: f64) -> Point {
        Point::new(self.x + angle.cos() * distance, self.y + angle.sin() * distance)
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let mut a = angle % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Dimensions and resolution of a cell grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridFrame {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
}

impl GridFrame {
    pub fn cell_of(&self, p: &Point) -> Option<Cell> {
        if !(p.x.is_finite() && p.y.is_finite()) || p.x < 0.0 || p.y < 0.0 {
            return None;
        }
        let col = (p.x / self.cell_size).floor() as usize;
        let row = (p.y / self.cell_size).floor() as usize;
        (col < self.width && row < self.height).then_some((col, row))
    }

    pub fn center(&self, cell: Cell) -> Point {
        Point::new(
            (cell.0 as f64 + 0.5) * self.cell_size,
            (cell.1 as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn index(&self, cell: Cell) -> usize {
        cell.1 * self.width + cell.0
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        (index % self.width, index / self.width)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn neighbors4(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        const D: [(isize, isize); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        D.iter().filter_map(move |&(dc, dr)| self.shift(cell, dc, dr))
    }

    pub fn neighbors8(&self, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
        const D: [(isize, isize); 8] = [
            (1, 0),
            (-1, 0),
            (0, 1),
            (0, -1),
            (1, 1),
            (-1, 1),
            (1, -1),
            (-1, -1),
        ];
        D.iter().filter_map(move |&(dc, dr)| self.shift(cell, dc, dr))
    }

    pub fn shift(&self, cell: Cell, dc: isize, dr: isize) -> Option<Cell> {
        let c = cell.0 as isize + dc;
        let r = cell.1 as isize + dr;
        (c >= 0 && r >= 0 && (c as usize) < self.width && (r as usize) < self.height)
            .then_some((c as usize, r as usize))
    }
}

/// One cell visited by a ray, with the ray parameters (meters) at which the
/// ray enters and leaves it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayCell {
    pub cell: Cell,
    pub t_enter: f64,
    pub t_exit: f64,
}

/// Amanatides-Woo traversal of the cells pierced by a ray, in order.
///
/// Stops when the ray leaves the grid or when a cell's entry parameter reaches
/// `max_range`. When the ray passes exactly through a cell corner both axes
/// step at once, so cells only touched at a corner are skipped.
pub struct GridRay {
    frame: GridFrame,
    col: isize,
    row: isize,
    step_c: isize,
    step_r: isize,
    t_max_x: f64,
    t_max_y: f64,
    t_delta_x: f64,
    t_delta_y: f64,
    t: f64,
    max_range: f64,
    done: bool,
}

impl GridRay {
    pub fn new(frame: GridFrame, origin: Point, angle: f64, max_range: f64) -> Self {
        let (dy, dx) = angle.sin_cos();
        let cs = frame.cell_size;
        let col = (origin.x / cs).floor() as isize;
        let row = (origin.y / cs).floor() as isize;
        let (step_c, t_max_x, t_delta_x) = axis_setup(origin.x, dx, col, cs);
        let (step_r, t_max_y, t_delta_y) = axis_setup(origin.y, dy, row, cs);
        let inside = col >= 0 && row >= 0 && (col as usize) < frame.width && (row as usize) < frame.height;
        Self {
            frame,
            col,
            row,
            step_c,
            step_r,
            t_max_x,
            t_max_y,
            t_delta_x,
            t_delta_y,
            t: 0.0,
            max_range,
            done: !inside || max_range <= 0.0,
        }
    }
}

fn axis_setup(origin: f64, d: f64, cell: isize, cs: f64) -> (isize, f64, f64) {
    if d > 0.0 {
        (1, ((cell + 1) as f64 * cs - origin) / d, cs / d)
    } else if d < 0.0 {
        (-1, (cell as f64 * cs - origin) / d, -cs / d)
    } else {
        (0, f64::INFINITY, f64::INFINITY)
    }
}

impl Iterator for GridRay {
    type Item = RayCell;

    fn next(&mut self) -> Option<RayCell> {
        if self.done {
            return None;
        }
        let cell = (self.col as usize, self.row as usize);
        let t_enter = self.t;
        let t_exit = self.t_max_x.min(self.t_max_y);
        if self.t_max_x < self.t_max_y {
            self.t = self.t_max_x;
            self.t_max_x += self.t_delta_x;
            self.col += self.step_c;
        } else if self.t_max_y < self.t_max_x {
            self.t = self.t_max_y;
            self.t_max_y += self.t_delta_y;
            self.row += self.step_r;
        } else {
            self.t = self.t_max_x;
            self.t_max_x += self.t_delta_x;
            self.t_max_y += self.t_delta_y;
            self.col += self.step_c;
            self.row += self.step_r;
        }
        let f = self.frame;
        if self.t >= self.max_range
            || self.col < 0
            || self.row < 0
            || self.col as usize >= f.width
            || self.row as usize >= f.height
        {
            self.done = true;
        }
        Some(RayCell { cell, t_enter, t_exit })
    }
}

/// Cells whose interior is crossed by the segment joining the centers of `a`
/// and `b`, excluding `a`, in traversal order and ending with `b`.
///
/// Works in exact integer arithmetic: crossing parameters along x are
/// `(2i+1)/(2|dc|)` and along y `(2j+1)/(2|dr|)`, compared by
/// cross-multiplication.
pub fn center_line(a: Cell, b: Cell) -> CenterLine {
    let dc = b.0 as i64 - a.0 as i64;
    let dr = b.1 as i64 - a.1 as i64;
    CenterLine {
        col: a.0 as i64,
        row: a.1 as i64,
        sc: dc.signum(),
        sr: dr.signum(),
        adc: dc.abs(),
        adr: dr.abs(),
        ix: 0,
        iy: 0,
    }
}

pub struct CenterLine {
    col: i64,
    row: i64,
    sc: i64,
    sr: i64,
    adc: i64,
    adr: i64,
    ix: i64,
    iy: i64,
}

impl Iterator for CenterLine {
    type Item = Cell;

    fn next(&mut self) -> Option<Cell> {
        if self.ix >= self.adc && self.iy >= self.adr {
            return None;
        }
        if self.ix >= self.adc {
            self.iy += 1;
            self.row += self.sr;
        } else if self.iy >= self.adr {
            self.ix += 1;
            self.col += self.sc;
        } else {
            // next x crossing at (2ix+1)/(2adc), next y crossing at (2iy+1)/(2adr)
            let lhs = (2 * self.ix + 1) * self.adr;
            let rhs = (2 * self.iy + 1) * self.adc;
            match lhs.cmp(&rhs) {
                std::cmp::Ordering::Less => {
                    self.ix += 1;
                    self.col += self.sc;
                }
                std::cmp::Ordering::Greater => {
                    self.iy += 1;
                    self.row += self.sr;
                }
                std::cmp::Ordering::Equal => {
                    self.ix += 1;
                    self.iy += 1;
                    self.col += self.sc;
                    self.row += self.sr;
                }
            }
        }
        Some((self.col as usize, self.row as usize))
    }
}
