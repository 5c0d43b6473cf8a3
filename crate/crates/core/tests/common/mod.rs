//! Independent oracles, fixtures and golden-file helpers shared by the
//! integration tests. Oracles are written from the definitions, not from
//! the library code, and favor clarity over speed.
#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};
use std::path::PathBuf;

use cogx_core::explore_graph::{GraphPoint, PointKind};
use cogx_core::reasoning::{ChosenPoint, DecisionContext, MemoryWindow, StateRecord};
use cogx_core::{Cell, CellState, OccupancyGrid, Point, Pose, Task};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random belief grid with the given unknown and occupied fractions.
pub fn random_grid(rng: &mut impl Rng, w: usize, h: usize, p_unknown: f64, p_occupied: f64) -> OccupancyGrid {
    let mut g = OccupancyGrid::new(w, h, 0.25);
    for r in 0..h {
        for c in 0..w {
            let u: f64 = rng.random();
            let s = if u < p_unknown {
                CellState::Unknown
            } else if u < p_unknown + p_occupied {
                CellState::Occupied
            } else {
                CellState::Free
            };
            g.set((c, r), s);
        }
    }
    g
}

pub fn neighbors4(w: usize, h: usize, (c, r): Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    if c > 0 {
        out.push((c - 1, r));
    }
    if c + 1 < w {
        out.push((c + 1, r));
    }
    if r > 0 {
        out.push((c, r - 1));
    }
    if r + 1 < h {
        out.push((c, r + 1));
    }
    out
}

/// Free cells with a 4-neighbor that is unknown.
pub fn frontier_oracle(g: &OccupancyGrid) -> BTreeSet<Cell> {
    let (w, h) = (g.width(), g.height());
    let mut out = BTreeSet::new();
    for r in 0..h {
        for c in 0..w {
            if g.get((c, r)) == CellState::Free
                && neighbors4(w, h, (c, r)).iter().any(|n| g.get(*n) == CellState::Unknown)
            {
                out.insert((c, r));
            }
        }
    }
    out
}

pub fn min_dist_brute(points: &[Point], q: &Point) -> f64 {
    points.iter().map(|p| ((p.x - q.x).powi(2) + (p.y - q.y).powi(2)).sqrt()).fold(f64::INFINITY, f64::min)
}

/// Passability for planning: a free cell with no occupied cell within
/// `inflation` cells in either axis.
pub fn passable_oracle(g: &OccupancyGrid, inflation: usize) -> Vec<Vec<bool>> {
    let (w, h) = (g.width(), g.height());
    let mut out = vec![vec![false; w]; h];
    for r in 0..h {
        for c in 0..w {
            if g.get((c, r)) != CellState::Free {
                continue;
            }
            let mut clear = true;
            for rr in r.saturating_sub(inflation)..=(r + inflation).min(h - 1) {
                for cc in c.saturating_sub(inflation)..=(c + inflation).min(w - 1) {
                    if g.get((cc, rr)) == CellState::Occupied {
                        clear = false;
                    }
                }
            }
            out[r][c] = clear;
        }
    }
    out
}

#[derive(PartialEq)]
struct Entry {
    cost: f64,
    moves: (u32, u32),
    cell: Cell,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, o: &Self) -> Ordering {
        o.cost.total_cmp(&self.cost).then_with(|| o.cell.cmp(&self.cell))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

/// Uniform-cost search over an 8-connected lattice where diagonal moves need
/// both side cells passable. Returns the (straight, diagonal) move counts of
/// the cheapest route, or none if unreachable. `start` is expanded even when
/// not itself passable.
pub fn dijkstra_oracle(pass: &[Vec<bool>], start: Cell, goal: Cell) -> Option<(u32, u32)> {
    let (h, w) = (pass.len(), pass[0].len());
    let ok = |c: isize, r: isize| c >= 0 && r >= 0 && (c as usize) < w && (r as usize) < h && pass[r as usize][c as usize];
    let mut best: BTreeMap<Cell, f64> = BTreeMap::new();
    let mut heap = BinaryHeap::from([Entry { cost: 0.0, moves: (0, 0), cell: start }]);
    best.insert(start, 0.0);
    let mut done = BTreeSet::new();
    while let Some(Entry { cost, moves, cell }) = heap.pop() {
        if !done.insert(cell) {
            continue;
        }
        if cell == goal {
            return Some(moves);
        }
        let (c, r) = (cell.0 as isize, cell.1 as isize);
        for dc in -1isize..=1 {
            for dr in -1isize..=1 {
                if (dc, dr) == (0, 0) || !ok(c + dc, r + dr) {
                    continue;
                }
                let diag = dc != 0 && dr != 0;
                if diag && !(ok(c + dc, r) && ok(c, r + dr)) {
                    continue;
                }
                let n = ((c + dc) as usize, (r + dr) as usize);
                let nm = if diag { (moves.0, moves.1 + 1) } else { (moves.0 + 1, moves.1) };
                let nc = nm.0 as f64 + nm.1 as f64 * std::f64::consts::SQRT_2;
                if best.get(&n).is_none_or(|&b| nc < b) {
                    best.insert(n, nc);
                    heap.push(Entry { cost: nc, moves: nm, cell: n });
                }
            }
        }
        let _ = cost;
    }
    None
}

/// Compares fractions `a/b < c/d` with positive denominators.
fn frac_lt(a: (i64, i64), c: (i64, i64)) -> bool {
    a.0 * c.1 < c.0 * a.1
}

/// Does the open segment between the centers of `a` and `b` pass through the
/// open interior of cell `x`? Exact: coordinates are doubled so centers are
/// odd integers and cell `x` spans `(2x, 2x + 2)`.
pub fn segment_crosses_cell(a: Cell, b: Cell, x: Cell) -> bool {
    let mut lo = (0i64, 1i64);
    let mut hi = (1i64, 1i64);
    for (p0, p1, xc) in [(a.0, b.0, x.0), (a.1, b.1, x.1)] {
        let p = 2 * p0 as i64 + 1;
        let d = 2 * (p1 as i64 - p0 as i64);
        let (lo_edge, hi_edge) = (2 * xc as i64, 2 * xc as i64 + 2);
        if d == 0 {
            if !(lo_edge < p && p < hi_edge) {
                return false;
            }
            continue;
        }
        // t at which the coordinate reaches each edge, with a positive denominator
        let norm = |num: i64| if d > 0 { (num, d) } else { (-num, -d) };
        let (t0, t1) = (norm(lo_edge - p), norm(hi_edge - p));
        let (enter, exit) = if frac_lt(t0, t1) { (t0, t1) } else { (t1, t0) };
        if frac_lt(lo, enter) {
            lo = enter;
        }
        if frac_lt(exit, hi) {
            hi = exit;
        }
    }
    frac_lt(lo, hi)
}

/// Unknown cells within `range` meters (center to center) of the vertex cell
/// whose center segment crosses no occupied cell.
pub fn volumetric_gain_oracle(g: &OccupancyGrid, v: Cell, range: f64) -> u32 {
    let rc = range / g.cell_size();
    let mut count = 0;
    for r in 0..g.height() {
        for c in 0..g.width() {
            let (dc, dr) = (c as f64 - v.0 as f64, r as f64 - v.1 as f64);
            if dc * dc + dr * dr > rc * rc || g.get((c, r)) != CellState::Unknown {
                continue;
            }
            let (c0, c1) = (v.0.min(c), v.0.max(c));
            let (r0, r1) = (v.1.min(r), v.1.max(r));
            let mut blocked = false;
            for rr in r0..=r1 {
                for cc in c0..=c1 {
                    let x = (cc, rr);
                    if x != v && x != (c, r) && g.get(x) == CellState::Occupied && segment_crosses_cell(v, (c, r), x) {
                        blocked = true;
                    }
                }
            }
            if !blocked {
                count += 1;
            }
        }
    }
    count
}

/// Smallest value whose cumulative weight, in ascending value order, reaches
/// half the total.
pub fn weighted_median_oracle(items: &[(f64, f64)]) -> f64 {
    let mut v = items.to_vec();
    v.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = v.iter().map(|i| i.1).sum();
    let mut acc = 0.0;
    for (x, w) in &v {
        acc += w;
        if acc >= total / 2.0 {
            return *x;
        }
    }
    v.last().expect("nonempty").0
}

/// Mean, type-7 quartiles by direct sorting.
pub fn stats_oracle(xs: &[f64]) -> (f64, f64, f64, f64) {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let q = |p: f64| {
        let h = (v.len() - 1) as f64 * p;
        let (i, f) = (h.floor() as usize, h - h.floor());
        if i + 1 < v.len() {
            v[i] + f * (v[i + 1] - v[i])
        } else {
            v[i]
        }
    };
    (v.iter().sum::<f64>() / v.len() as f64, q(0.25), q(0.5), q(0.75))
}

pub fn polyline_length(points: &[Point]) -> f64 {
    points.windows(2).map(|w| ((w[1].x - w[0].x).powi(2) + (w[1].y - w[0].y).powi(2)).sqrt()).sum()
}

/// Root of the core crate, also when this module is compiled into another
/// crate's tests.
pub fn core_dir() -> PathBuf {
    let here = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    if here.ends_with("core") {
        here
    } else {
        here.join("../core")
    }
}

pub fn golden_path(name: &str) -> PathBuf {
    core_dir().join("tests/golden").join(name)
}

/// Compares `actual` with the committed golden file. With `UPDATE_GOLDEN=1`
/// the file is rewritten instead.
pub fn check_golden(name: &str, actual: &str) -> Result<(), String> {
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().expect("golden dir")).expect("create golden dir");
        std::fs::write(&path, actual).expect("write golden");
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        return Ok(());
    }
    let line = expected.lines().zip(actual.lines()).position(|(a, b)| a != b).map_or_else(
        || format!("length {} vs {}", expected.len(), actual.len()),
        |i| format!("first difference on line {}", i + 1),
    );
    Err(format!("{} differs from the rendered output ({line})", path.display()))
}

pub fn assert_golden(name: &str, actual: &str) {
    if let Err(e) = check_golden(name, actual) {
        panic!("{e}");
    }
}

pub fn fixture_path(name: &str) -> PathBuf {
    core_dir().join("tests/fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture exists")
}

fn point(id: usize, x: f64, y: f64, kind: PointKind, robot: &Point, new: bool) -> GraphPoint {
    let mut p = GraphPoint::new(Point::new(x, y), kind, robot);
    p.id = id;
    p.is_new = new;
    p
}

/// Fixed decision context used by prompt golden tests: three graph and
/// frontier points, one object point, two memory records and an interrupt.
pub fn prompt_context() -> DecisionContext {
    let pose = Pose::new(4.0, 6.5, 0.0);
    let robot = pose.position();
    let mut object = point(4, 9.25, 3.5, PointKind::Object, &robot, false);
    object.label = Some("whiteboard eraser".into());
    object.confidence = Some(0.82);
    let candidates = vec![
        point(1, 6.0, 6.5, PointKind::Graph, &robot, false),
        point(2, 2.25, 11.75, PointKind::Graph, &robot, true),
        point(3, 14.5, 7.0, PointKind::Frontier, &robot, true),
        object,
    ];
    let mut memory = MemoryWindow::new(10);
    for (i, (x, y, text)) in [
        (1.5, 2.0, "I started in the hallway and chose a frontier to the north because the doorway there leads toward rooms I have not seen."),
        (3.0, 5.5, "I moved into the first classroom doorway and saw desks and a whiteboard, so the eraser could be nearby."),
    ]
    .into_iter()
    .enumerate()
    {
        memory.push(StateRecord {
            call_index: i + 1,
            step: 20 * (i as u64 + 1),
            pose: Pose::new(x, y, 0.0),
            chosen: ChosenPoint { id: 3, position: Point::new(x + 2.0, y + 2.0), kind: PointKind::Frontier },
            compressed_text: text.to_string(),
            sim_seconds: 10.0 * (i as f64 + 1.0),
        });
    }
    DecisionContext {
        task: Task {
            id: "WE".into(),
            query: "Go find the whiteboard eraser".into(),
            target_class: "whiteboard eraser".into(),
            success_radius: 2.0,
            target_id: None,
        },
        pose,
        step: 40,
        sim_seconds: 20.0,
        candidates,
        object_points: Vec::new(),
        description: "The robot is in an indoor school building. It is in a classroom. It can see a desk and a whiteboard."
            .into(),
        memory,
        total_calls: 2,
        interrupt_note: "The robot stopped early at step 40 because a new whiteboard eraser detection appeared at x=9.25 y=3.50 z=0.0."
            .into(),
        active_labels: vec!["whiteboard eraser".into(), "whiteboard".into(), "desk".into()],
        viewed: None,
        checked: Vec::new(),
    }
}

/// Outcome of watching the chair behind the half wall for a while.
pub struct OcclusionRun {
    pub fused: Point,
    pub truth: Point,
    pub on_occluder: bool,
}

/// Robot parked just south of the half wall, facing the chair 5 m away on
/// the far side. The lidar map stops at the half wall, so projections do too.
/// Returns the most-observed fused chair point after 120 noisy frames.
pub fn occlusion_run(seed: u64) -> OcclusionRun {
    use cogx_core::mapping::integrate_scan;
    use cogx_core::params::ExperimentParams;
    use cogx_core::perception::{perceive_step, ObjectStore};
    use cogx_core::rng::{stream_rng, Stream};
    use cogx_core::world::Terrain;
    use cogx_core::EnvironmentSpec;

    let env = EnvironmentSpec::bundled("halfwall").expect("bundled fixture");
    let params = ExperimentParams::default();
    let rig = params.camera_rig();
    let truth = env.objects[0].position;
    let pose = Pose::new(truth.x, 4.625, std::f64::consts::FRAC_PI_2);
    let mut grid = OccupancyGrid::for_env(&env);
    integrate_scan(&mut grid, &env, &pose, &params.lidar);
    let labels = vec![env.objects[0].class.clone(), "desk".to_string()];
    let mut store = ObjectStore::new();
    let mut rng = stream_rng(seed, Stream::Noise);
    for step in 0..120 {
        perceive_step(&env, &grid, &pose, &rig, &params.noise, &params.fusion, &labels, step, &mut store, &mut rng);
    }
    let best = store
        .of_class(&labels[0])
        .max_by(|a, b| a.observation_count.cmp(&b.observation_count).then(b.id.cmp(&a.id)))
        .expect("the chair is detected at least once");
    let fused = best.position();
    let on_occluder = env.frame().cell_of(&fused).is_some_and(|c| env.terrain(c) == Terrain::HalfWall);
    OcclusionRun { fused, truth, on_occluder }
}
