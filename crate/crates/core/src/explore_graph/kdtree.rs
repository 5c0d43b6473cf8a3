//! Balanced 2D tree for nearest-neighbor queries.

use crate::geometry::Point;

#[derive(Clone, Debug, Default)]
pub struct KdTree {
    // implicit balanced layout: node i splits on axis depth % 2, with its
    // subtrees in the ranges left and right of it
    points: Vec<Point>,
}

impl KdTree {
    pub fn build(points: &[Point]) -> Self {
        let mut pts = points.to_vec();
        build_rec(&mut pts, 0);
        Self { points: pts }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Nearest stored point and its distance.
    pub fn nearest(&self, q: &Point) -> Option<(Point, f64)> {
        if self.points.is_empty() {
            return None;
        }
        let mut best = (self.points[self.points.len() / 2], f64::INFINITY);
        nearest_rec(&self.points, 0, q, &mut best);
        Some((best.0, best.1.sqrt()))
    }
}

fn coord(p: &Point, axis: usize) -> f64 {
    if axis == 0 {
        p.x
    } else {
        p.y
    }
}

fn build_rec(pts: &mut [Point], depth: usize) {
    if pts.len() <= 1 {
        return;
    }
    let axis = depth % 2;
    let mid = pts.len() / 2;
    pts.select_nth_unstable_by(mid, |a, b| coord(a, axis).total_cmp(&coord(b, axis)));
    let (left, right) = pts.split_at_mut(mid);
    build_rec(left, depth + 1);
    build_rec(&mut right[1..], depth + 1);
}

fn nearest_rec(pts: &[Point], depth: usize, q: &Point, best: &mut (Point, f64)) {
    if pts.is_empty() {
        return;
    }
    let mid = pts.len() / 2;
    let p = pts[mid];
    let d = p.dist_sq(q);
    if d < best.1 {
        *best = (p, d);
    }
    let axis = depth % 2;
    let diff = coord(q, axis) - coord(&p, axis);
    let (near, far) = if diff < 0.0 { (&pts[..mid], &pts[mid + 1..]) } else { (&pts[mid + 1..], &pts[..mid]) };
    nearest_rec(near, depth + 1, q, best);
    if diff * diff < best.1 {
        nearest_rec(far, depth + 1, q, best);
    }
}
