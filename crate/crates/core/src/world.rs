//! Static environment model and simulation kernel.
//!
//! Environments are cell grids loaded from JSON. Each cell is free, a wall, or
//! a half wall. Half walls are low partitions: they stop the lidar and the
//! robot but cameras see over them.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, Cell, GridFrame, GridRay, Point};
use crate::perception::CameraRig;

#[derive(Debug, Error)]
pub enum EnvError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("unknown task `{0}`")]
    UnknownTask(String),
}

#[derive(Debug, Error, PartialEq)]
pub enum WorldError {
    #[error("path blocked at cell {0:?}")]
    BlockedPath(Cell),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Terrain {
    Free,
    Wall,
    HalfWall,
}

/// Which obstacles stop a ray.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RayMask {
    /// Walls and half walls.
    Lidar,
    /// Walls only.
    Camera,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Self { x, y, heading: wrap_angle(heading) }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub query: String,
    pub target_class: String,
    #[serde(default = "default_success_radius")]
    pub success_radius: f64,
    /// Restricts success to one object instance; any object of
    /// `target_class` counts when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_id: Option<String>,
}

fn default_success_radius() -> f64 {
    2.0
}

#[derive(Clone, Debug, PartialEq)]
pub struct Room {
    pub label: String,
    /// Inclusive cell bounds `(col0, row0, col1, row1)`.
    pub rect: (usize, usize, usize, usize),
}

impl Room {
    pub fn contains(&self, cell: Cell) -> bool {
        let (c0, r0, c1, r1) = self.rect;
        (c0..=c1).contains(&cell.0) && (r0..=r1).contains(&cell.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorldObject {
    pub id: String,
    pub class: String,
    pub position: Point,
    pub room_label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimClock {
    pub step: u64,
    pub seconds_per_step: f64,
}

impl Default for SimClock {
    fn default() -> Self {
        Self { step: 0, seconds_per_step: 0.5 }
    }
}

impl SimClock {
    pub fn new(seconds_per_step: f64) -> Self {
        Self { step: 0, seconds_per_step }
    }

    pub fn seconds(&self) -> f64 {
        self.step as f64 * self.seconds_per_step
    }

    pub fn tick(&mut self) {
        self.step += 1;
    }
}

/// A task bundled with its optional per-task objects and start pose.
#[derive(Clone, Debug)]
struct TaskEntry {
    task: Task,
    objects: Vec<WorldObject>,
    start: Option<Pose>,
}

#[derive(Clone, Debug)]
pub struct EnvironmentSpec {
    pub name: String,
    pub setting: String,
    pub cell_size: f64,
    pub width: usize,
    pub height: usize,
    terrain: Vec<Terrain>,
    pub rooms: Vec<Room>,
    pub objects: Vec<WorldObject>,
    pub start: Pose,
    tasks: Vec<TaskEntry>,
    /// Detector confusion designated by the environment: true class to
    /// (reported class, probability).
    pub confusion: BTreeMap<String, (String, f64)>,
}

/// An environment specialised to one task: task objects merged in and the
/// task's start pose applied.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub env: EnvironmentSpec,
    pub task: Task,
}

impl Scenario {
    /// Ground-truth objects that satisfy the task.
    pub fn targets(&self) -> Vec<&WorldObject> {
        targets_of(&self.env, &self.task)
    }
}

pub fn targets_of<'a>(env: &'a EnvironmentSpec, task: &Task) -> Vec<&'a WorldObject> {
    env.objects
        .iter()
        .filter(|o| match &task.target_id {
            Some(id) => &o.id == id,
            None => o.class == task.target_class,
        })
        .collect()
}

// ---------------------------------------------------------------------------
// File schema
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvFile {
    name: String,
    #[serde(default)]
    setting: Option<String>,
    cell_size: f64,
    grid: GridDims,
    #[serde(default)]
    walls: Vec<[usize; 2]>,
    #[serde(default)]
    wall_runs: Vec<[usize; 3]>,
    #[serde(default)]
    half_walls: Vec<[usize; 2]>,
    #[serde(default)]
    half_wall_runs: Vec<[usize; 3]>,
    #[serde(default)]
    rooms: Vec<RoomFile>,
    objects: Vec<ObjectFile>,
    start: Pose,
    tasks: Vec<TaskFile>,
    #[serde(default)]
    confusion: BTreeMap<String, (String, f64)>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridDims {
    width: usize,
    height: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RoomFile {
    label: String,
    rect: [usize; 4],
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ObjectFile {
    id: String,
    class: String,
    x: f64,
    y: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaskFile {
    id: String,
    query: String,
    target_class: String,
    #[serde(default = "default_success_radius")]
    success_radius: f64,
    #[serde(default)]
    target_id: Option<String>,
    #[serde(default)]
    objects: Vec<ObjectFile>,
    #[serde(default)]
    start: Option<Pose>,
}

pub const BUNDLED: [&str; 3] = ["office1", "office2", "school"];

fn bundled_source(name: &str) -> Option<&'static str> {
    Some(match name {
        "office1" => include_str!("../assets/envs/office1.json"),
        "office2" => include_str!("../assets/envs/office2.json"),
        "school" => include_str!("../assets/envs/school.json"),
        "halfwall" => include_str!("../assets/fixtures/halfwall.json"),
        "trivial" => include_str!("../assets/fixtures/trivial.json"),
        _ => return None,
    })
}

/// Loads and validates an environment file.
pub fn load_environment(path: impl AsRef<Path>) -> Result<EnvironmentSpec, EnvError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| EnvError::Io {
        path: path.display().to_string(),
        source,
    })?;
    EnvironmentSpec::from_json(&text)
}

/// Resolves a CLI-style environment argument: an existing file path, or the
/// name of a bundled environment or fixture.
pub fn resolve_environment(arg: &str) -> Result<EnvironmentSpec, EnvError> {
    let path = Path::new(arg);
    if path.exists() {
        return load_environment(path);
    }
    match bundled_source(arg) {
        Some(src) => EnvironmentSpec::from_json(src),
        None => load_environment(path),
    }
}

impl EnvironmentSpec {
    pub fn bundled(name: &str) -> Result<Self, EnvError> {
        let src = bundled_source(name)
            .ok_or_else(|| EnvError::Parse(format!("no bundled environment named `{name}`")))?;
        Self::from_json(src)
    }

    pub fn from_json(text: &str) -> Result<Self, EnvError> {
        let file: EnvFile = serde_json::from_str(text).map_err(|e| EnvError::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    fn from_file(f: EnvFile) -> Result<Self, EnvError> {
        let invalid = |msg: String| Err(EnvError::Validation(msg));
        if !(f.cell_size.is_finite() && f.cell_size > 0.0) {
            return invalid(format!("cell_size must be positive, got {}", f.cell_size));
        }
        let (w, h) = (f.grid.width, f.grid.height);
        if w == 0 || h == 0 {
            return invalid("grid width and height must be nonzero".into());
        }
        let mut terrain = vec![Terrain::Free; w * h];
        let mut mark = |col: usize, row: usize, t: Terrain, what: &str| -> Result<(), EnvError> {
            if col >= w || row >= h {
                return Err(EnvError::Validation(format!(
                    "{what} cell ({col},{row}) is outside the {w}x{h} grid"
                )));
            }
            let cell = &mut terrain[row * w + col];
            if *cell != Terrain::Wall {
                *cell = t;
            }
            Ok(())
        };
        for &[col, row] in &f.walls {
            mark(col, row, Terrain::Wall, "wall")?;
        }
        for &[row, col, len] in &f.wall_runs {
            for c in col..col + len {
                mark(c, row, Terrain::Wall, "wall run")?;
            }
        }
        for &[col, row] in &f.half_walls {
            mark(col, row, Terrain::HalfWall, "half wall")?;
        }
        for &[row, col, len] in &f.half_wall_runs {
            for c in col..col + len {
                mark(c, row, Terrain::HalfWall, "half wall run")?;
            }
        }

        let mut rooms = Vec::with_capacity(f.rooms.len());
        for r in &f.rooms {
            let [c0, r0, c1, r1] = r.rect;
            if c0 > c1 || r0 > r1 || c1 >= w || r1 >= h {
                return invalid(format!(
                    "room `{}` rect {:?} must be ordered and within the {w}x{h} grid",
                    r.label, r.rect
                ));
            }
            rooms.push(Room { label: r.label.clone(), rect: (c0, r0, c1, r1) });
        }

        let mut env = EnvironmentSpec {
            name: f.name,
            setting: f.setting.unwrap_or_else(|| "an indoor environment".to_string()),
            cell_size: f.cell_size,
            width: w,
            height: h,
            terrain,
            rooms,
            objects: Vec::new(),
            start: Pose::new(f.start.x, f.start.y, f.start.heading),
            tasks: Vec::new(),
            confusion: f.confusion,
        };

        env.objects = f.objects.iter().map(|o| env.make_object(o)).collect();
        for o in &env.objects {
            env.check_object(o)?;
        }
        env.check_pose(&env.start, "start pose")?;

        let mut ids = BTreeSet::new();
        for t in f.tasks {
            if !ids.insert(t.id.clone()) {
                return invalid(format!("duplicate task id `{}`", t.id));
            }
            if t.target_class.trim().is_empty() {
                return invalid(format!("task `{}` has an empty target_class", t.id));
            }
            if !(t.success_radius.is_finite() && t.success_radius > 0.0) {
                return invalid(format!("task `{}` success_radius must be positive", t.id));
            }
            let objects: Vec<WorldObject> = t.objects.iter().map(|o| env.make_object(o)).collect();
            for o in &objects {
                env.check_object(o)?;
            }
            let start = t.start.map(|p| Pose::new(p.x, p.y, p.heading));
            if let Some(p) = &start {
                env.check_pose(p, &format!("task `{}` start pose", t.id))?;
            }
            let task = Task {
                id: t.id,
                query: t.query,
                target_class: t.target_class,
                success_radius: t.success_radius,
                target_id: t.target_id,
            };
            let all: Vec<&WorldObject> = env.objects.iter().chain(objects.iter()).collect();
            if !all.iter().any(|o| o.class == task.target_class) {
                return invalid(format!(
                    "task `{}` target class `{}` does not appear among the objects",
                    task.id, task.target_class
                ));
            }
            if let Some(id) = &task.target_id {
                if !all.iter().any(|o| &o.id == id && o.class == task.target_class) {
                    return invalid(format!(
                        "task `{}` target_id `{id}` is not an object of class `{}`",
                        task.id, task.target_class
                    ));
                }
            }
            env.tasks.push(TaskEntry { task, objects, start });
        }

        let mut object_ids = BTreeSet::new();
        for o in env.objects.iter().chain(env.tasks.iter().flat_map(|t| t.objects.iter())) {
            if env.objects.iter().any(|e| e.id == o.id) && !object_ids.insert(o.id.clone()) {
                return invalid(format!("duplicate object id `{}`", o.id));
            }
        }
        for (from, (to, p)) in &env.confusion {
            if !(0.0..=1.0).contains(p) {
                return invalid(format!("confusion {from} -> {to} probability {p} outside [0,1]"));
            }
        }
        Ok(env)
    }

    fn make_object(&self, o: &ObjectFile) -> WorldObject {
        let position = Point::new(o.x, o.y);
        let room_label = self.frame().cell_of(&position).and_then(|c| self.room_at(c)).map(|r| r.label.clone());
        WorldObject { id: o.id.clone(), class: o.class.clone(), position, room_label }
    }

    fn check_object(&self, o: &WorldObject) -> Result<(), EnvError> {
        match self.frame().cell_of(&o.position) {
            None => Err(EnvError::Validation(format!(
                "object `{}` at ({}, {}) is outside the grid",
                o.id, o.position.x, o.position.y
            ))),
            Some(cell) if self.terrain(cell) != Terrain::Free => Err(EnvError::Validation(format!(
                "object `{}` lies in occupied cell {cell:?}; objects must be in non-occupied cells",
                o.id
            ))),
            Some(_) => Ok(()),
        }
    }

    fn check_pose(&self, p: &Pose, what: &str) -> Result<(), EnvError> {
        match self.frame().cell_of(&p.position()) {
            Some(cell) if self.terrain(cell) == Terrain::Free => Ok(()),
            Some(cell) => Err(EnvError::Validation(format!("{what} lies in occupied cell {cell:?}"))),
            None => Err(EnvError::Validation(format!("{what} is outside the grid"))),
        }
    }

    pub fn frame(&self) -> GridFrame {
        GridFrame { width: self.width, height: self.height, cell_size: self.cell_size }
    }

    pub fn terrain(&self, cell: Cell) -> Terrain {
        self.terrain[cell.1 * self.width + cell.0]
    }

    pub fn is_free(&self, cell: Cell) -> bool {
        self.terrain(cell) == Terrain::Free
    }

    /// Whether `cell` stops a ray of the given kind.
    pub fn blocks(&self, cell: Cell, mask: RayMask) -> bool {
        match (self.terrain(cell), mask) {
            (Terrain::Free, _) => false,
            (Terrain::Wall, _) => true,
            (Terrain::HalfWall, RayMask::Lidar) => true,
            (Terrain::HalfWall, RayMask::Camera) => false,
        }
    }

    pub fn area_m2(&self) -> f64 {
        self.width as f64 * self.height as f64 * self.cell_size * self.cell_size
    }

    pub fn free_cell_count(&self) -> usize {
        self.terrain.iter().filter(|t| **t == Terrain::Free).count()
    }

    pub fn room_at(&self, cell: Cell) -> Option<&Room> {
        self.rooms.iter().find(|r| r.contains(cell))
    }

    pub fn room_label_at(&self, p: &Point) -> Option<&str> {
        self.frame().cell_of(p).and_then(|c| self.room_at(c)).map(|r| r.label.as_str())
    }

    pub fn tasks(&self) -> impl Iterator<Item = &Task> {
        self.tasks.iter().map(|t| &t.task)
    }

    pub fn task(&self, id: &str) -> Option<&Task> {
        self.tasks().find(|t| t.id == id)
    }

    /// Specialises the environment to one task.
    pub fn scenario(&self, task_id: &str) -> Result<Scenario, EnvError> {
        let entry = self
            .tasks
            .iter()
            .find(|t| t.task.id == task_id)
            .ok_or_else(|| EnvError::UnknownTask(task_id.to_string()))?;
        let mut env = self.clone();
        env.objects.extend(entry.objects.iter().cloned());
        if let Some(start) = entry.start {
            env.start = start;
        }
        Ok(Scenario { env, task: entry.task.clone() })
    }

    /// Builds an environment programmatically (used by tests and fixtures).
    pub fn from_parts(
        name: &str,
        cell_size: f64,
        width: usize,
        height: usize,
        walls: &[Cell],
        half_walls: &[Cell],
        start: Pose,
    ) -> Self {
        let mut terrain = vec![Terrain::Free; width * height];
        for &(c, r) in walls {
            terrain[r * width + c] = Terrain::Wall;
        }
        for &(c, r) in half_walls {
            terrain[r * width + c] = Terrain::HalfWall;
        }
        EnvironmentSpec {
            name: name.to_string(),
            setting: "a test environment".into(),
            cell_size,
            width,
            height,
            terrain,
            rooms: Vec::new(),
            objects: Vec::new(),
            start,
            tasks: Vec::new(),
            confusion: BTreeMap::new(),
        }
    }

    pub fn add_object(&mut self, id: &str, class: &str, position: Point) {
        let o = self.make_object(&ObjectFile { id: id.into(), class: class.into(), x: position.x, y: position.y });
        self.objects.push(o);
    }

    pub fn add_room(&mut self, label: &str, rect: (usize, usize, usize, usize)) {
        self.rooms.push(Room { label: label.into(), rect });
        let rooms = self.rooms.clone();
        let frame = self.frame();
        for o in &mut self.objects {
            if o.room_label.is_none() {
                let cell = frame.cell_of(&o.position);
                o.room_label = cell.and_then(|c| rooms.iter().find(|r| r.contains(c))).map(|r| r.label.clone());
            }
        }
    }

    pub fn add_task(&mut self, task: Task) {
        self.tasks.push(TaskEntry { task, objects: Vec::new(), start: None });
    }

    /// Writes the environment back to the JSON file schema.
    pub fn to_json(&self) -> String {
        let runs = |t: Terrain| -> Vec<[usize; 3]> {
            let mut out = Vec::new();
            for row in 0..self.height {
                let mut col = 0;
                while col < self.width {
                    if self.terrain((col, row)) == t {
                        let s = col;
                        while col < self.width && self.terrain((col, row)) == t {
                            col += 1;
                        }
                        out.push([row, s, col - s]);
                    } else {
                        col += 1;
                    }
                }
            }
            out
        };
        let obj = |o: &WorldObject| serde_json::json!({"id": o.id, "class": o.class, "x": o.position.x, "y": o.position.y});
        let doc = serde_json::json!({
            "name": self.name,
            "setting": self.setting,
            "cell_size": self.cell_size,
            "grid": {"width": self.width, "height": self.height},
            "wall_runs": runs(Terrain::Wall),
            "half_wall_runs": runs(Terrain::HalfWall),
            "rooms": self.rooms.iter().map(|r| serde_json::json!({"label": r.label, "rect": [r.rect.0, r.rect.1, r.rect.2, r.rect.3]})).collect::<Vec<_>>(),
            "objects": self.objects.iter().map(obj).collect::<Vec<_>>(),
            "start": self.start,
            "tasks": self.tasks.iter().map(|t| {
                let mut v = serde_json::to_value(&t.task).expect("task serializes");
                if !t.objects.is_empty() {
                    v["objects"] = t.objects.iter().map(obj).collect::<Vec<_>>().into();
                }
                if let Some(s) = &t.start {
                    v["start"] = serde_json::to_value(s).expect("pose serializes");
                }
                v
            }).collect::<Vec<_>>(),
            "confusion": self.confusion,
        });
        serde_json::to_string_pretty(&doc).expect("environment serializes")
    }
}

// ---------------------------------------------------------------------------
// Raycasting
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RayHit {
    pub hit: bool,
    pub distance: f64,
    pub cell: Option<Cell>,
}

/// Lidar raycast against the ground truth: walls and half walls block.
pub fn raycast(env: &EnvironmentSpec, origin: Point, angle: f64, max_range: f64) -> RayHit {
    raycast_masked(env, origin, angle, max_range, RayMask::Lidar)
}

/// Distance along the ray to the boundary of the first blocking cell, or
/// `max_range` with `hit = false`. Leaving the grid counts as a hit without a
/// cell.
pub fn raycast_masked(env: &EnvironmentSpec, origin: Point, angle: f64, max_range: f64, mask: RayMask) -> RayHit {
    debug_assert!(
        env.frame().cell_of(&origin).is_some_and(|c| !env.blocks(c, mask)),
        "raycast origin must be in free space"
    );
    let mut last_exit = 0.0;
    for rc in GridRay::new(env.frame(), origin, angle, max_range) {
        if env.blocks(rc.cell, mask) {
            return RayHit { hit: true, distance: rc.t_enter, cell: Some(rc.cell) };
        }
        last_exit = rc.t_exit;
    }
    if last_exit < max_range {
        RayHit { hit: true, distance: last_exit, cell: None }
    } else {
        RayHit { hit: false, distance: max_range, cell: None }
    }
}

/// Whether the straight segment from `from` to `to` is clear for `mask`.
pub fn line_of_sight(env: &EnvironmentSpec, from: Point, to: Point, mask: RayMask) -> bool {
    let d = from.dist(&to);
    if d < 1e-12 {
        return true;
    }
    let angle = from.bearing_to(&to);
    GridRay::new(env.frame(), from, angle, d).all(|rc| !env.blocks(rc.cell, mask))
}

// ---------------------------------------------------------------------------
// Motion
// ---------------------------------------------------------------------------

/// Progress along a waypoint polyline, starting from wherever the robot is
/// when the cursor is created.
#[derive(Clone, Debug, Default)]
pub struct PathCursor {
    pub waypoints: Vec<Point>,
    next: usize,
}

impl PathCursor {
    pub fn new(waypoints: Vec<Point>) -> Self {
        Self { waypoints, next: 0 }
    }

    pub fn is_done(&self) -> bool {
        self.next >= self.waypoints.len()
    }

    pub fn remaining(&self) -> &[Point] {
        &self.waypoints[self.next.min(self.waypoints.len())..]
    }
}

/// Result of one motion step.
#[derive(Clone, Debug, PartialEq)]
pub struct StepMotion {
    pub pose: Pose,
    /// Arc length travelled in this step.
    pub distance: f64,
    /// Waypoints reached during the step, in order (includes the final
    /// position when the step ended exactly on a waypoint).
    pub corners: Vec<Point>,
}

const SNAP_EPS: f64 = 1e-9;

/// Moves the robot `speed` meters along the remaining polyline (less if the
/// polyline ends) and advances the clock by one step.
pub fn advance_along(
    env: &EnvironmentSpec,
    pose: Pose,
    cursor: &mut PathCursor,
    speed: f64,
    clock: &mut SimClock,
) -> Result<StepMotion, WorldError> {
    clock.tick();
    let mut pos = pose.position();
    let mut heading = pose.heading;
    let mut remaining = speed;
    let mut distance = 0.0;
    let mut corners = Vec::new();
    let frame = env.frame();
    while remaining > 0.0 && !cursor.is_done() {
        let wp = cursor.waypoints[cursor.next];
        if let Some(cell) = frame.cell_of(&wp) {
            if !env.is_free(cell) {
                return Err(WorldError::BlockedPath(cell));
            }
        }
        let d = pos.dist(&wp);
        if d > 1e-12 {
            heading = pos.bearing_to(&wp);
        }
        if d <= remaining + SNAP_EPS {
            distance += d;
            remaining -= d;
            pos = wp;
            corners.push(wp);
            cursor.next += 1;
        } else {
            pos = pos.offset(heading, remaining);
            distance += remaining;
            remaining = 0.0;
        }
    }
    Ok(StepMotion { pose: Pose::new(pos.x, pos.y, heading), distance, corners })
}

/// Success test: the robot is within the task's radius of a target object and
/// that object is inside some camera frustum with a clear camera sightline.
pub fn check_success(env: &EnvironmentSpec, pose: &Pose, task: &Task, rig: &CameraRig) -> bool {
    targets_of(env, task).iter().any(|o| {
        pose.position().dist(&o.position) <= task.success_radius
            && rig.sees(env, pose, &o.position).is_some()
    })
}

pub fn angle_diff(a: f64, b: f64) -> f64 {
    wrap_angle(a - b)
}

pub const FULL_TURN: f64 = 2.0 * PI;

#[cfg(test)]
mod tests {
    use super::*;

    fn corridor() -> EnvironmentSpec {
        // 40x5 cells of 0.25 m, walls on the border and a wall at col 13
        let mut walls = Vec::new();
        for c in 0..40 {
            walls.push((c, 0));
            walls.push((c, 4));
        }
        for r in 0..5 {
            walls.push((0, r));
            walls.push((39, r));
        }
        EnvironmentSpec::from_parts("corridor", 0.25, 40, 5, &walls, &[], Pose::new(0.375, 0.625, 0.0))
    }

    #[test]
    fn raycast_hits_wall_ahead() {
        let mut env = corridor();
        env.terrain[2 * 40 + 13] = Terrain::Wall;
        // origin at x = 0.25 (boundary of col 1), wall cell 13 begins at x = 3.25
        let hit = raycast(&env, Point::new(0.25, 0.625), 0.0, 10.0);
        assert!(hit.hit);
        assert!((hit.distance - 3.0).abs() <= 0.25);
        assert_eq!(hit.cell, Some((13, 2)));
    }

    #[test]
    fn raycast_reports_max_range_when_clear() {
        let env = EnvironmentSpec::from_parts("open", 0.25, 100, 100, &[], &[], Pose::new(1.0, 1.0, 0.0));
        let hit = raycast(&env, Point::new(0.6, 12.4), 0.0, 10.0);
        assert!(!hit.hit);
        assert_eq!(hit.distance, 10.0);
        assert_eq!(hit.cell, None);
    }

    #[test]
    fn half_walls_only_block_lidar() {
        let mut env = corridor();
        env.terrain[2 * 40 + 10] = Terrain::HalfWall;
        let o = Point::new(0.375, 0.625);
        assert!(raycast_masked(&env, o, 0.0, 5.0, RayMask::Lidar).cell == Some((10, 2)));
        assert!(raycast_masked(&env, o, 0.0, 12.0, RayMask::Camera).cell == Some((39, 2)));
    }

    #[test]
    fn advance_straight_segment_in_four_steps() {
        let env = corridor();
        let mut clock = SimClock::default();
        let mut pose = Pose::new(0.375, 0.625, 0.0);
        let mut cursor = PathCursor::new(vec![Point::new(2.375, 0.625)]);
        let mut total = 0.0;
        for _ in 0..4 {
            let m = advance_along(&env, pose, &mut cursor, 0.5, &mut clock).unwrap();
            pose = m.pose;
            total += m.distance;
        }
        assert!(cursor.is_done());
        assert_eq!(pose.position(), Point::new(2.375, 0.625));
        assert_eq!(clock.step, 4);
        assert!((total - 2.0).abs() < 1e-9);
    }

    #[test]
    fn advance_with_empty_path_still_ticks() {
        let env = corridor();
        let mut clock = SimClock::default();
        let pose = Pose::new(0.375, 0.625, 1.0);
        let m = advance_along(&env, pose, &mut PathCursor::default(), 0.5, &mut clock).unwrap();
        assert_eq!(m.pose, pose);
        assert_eq!(m.distance, 0.0);
        assert_eq!(clock.step, 1);
    }

    #[test]
    fn advance_blocked_waypoint() {
        let env = corridor();
        let mut clock = SimClock::default();
        let pose = Pose::new(0.375, 0.625, 0.0);
        let mut cursor = PathCursor::new(vec![Point::new(0.375, 0.125)]);
        let err = advance_along(&env, pose, &mut cursor, 0.5, &mut clock).unwrap_err();
        assert_eq!(err, WorldError::BlockedPath((1, 0)));
    }

    #[test]
    fn bundled_office1_area_matches() {
        let env = EnvironmentSpec::bundled("office1").unwrap();
        assert!((env.area_m2() - 572.0).abs() / 572.0 <= 0.02);
        assert_eq!(env.tasks().map(|t| t.id.as_str()).collect::<Vec<_>>(), ["FE1", "FE2", "FE3"]);
    }

    #[test]
    fn object_inside_wall_is_rejected() {
        let text = r#"{"name":"bad","cell_size":0.5,"grid":{"width":4,"height":4},
            "walls":[[2,2]],"objects":[{"id":"a","class":"cup","x":1.25,"y":1.25}],
            "start":{"x":0.25,"y":0.25,"heading":0.0},
            "tasks":[{"id":"T","query":"find the cup","target_class":"cup","success_radius":1.0}]}"#;
        match EnvironmentSpec::from_json(text) {
            Err(EnvError::Validation(msg)) => assert!(msg.contains("occupied"), "{msg}"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_environment_without_rooms_loads() {
        let text = r#"{"name":"min","cell_size":0.5,"grid":{"width":4,"height":4},
            "objects":[{"id":"a","class":"cup","x":1.25,"y":1.25}],
            "start":{"x":0.25,"y":0.25,"heading":0.0},
            "tasks":[{"id":"T","query":"find the cup","target_class":"cup","success_radius":1.0}]}"#;
        let env = EnvironmentSpec::from_json(text).unwrap();
        assert!(env.rooms.is_empty());
        assert_eq!(env.objects.len(), 1);
    }

    #[test]
    fn malformed_file_is_parse_error() {
        assert!(matches!(EnvironmentSpec::from_json("{not json"), Err(EnvError::Parse(_))));
    }

    #[test]
    fn task_without_target_object_is_rejected() {
        let text = r#"{"name":"min","cell_size":0.5,"grid":{"width":4,"height":4},
            "objects":[{"id":"a","class":"cup","x":1.25,"y":1.25}],
            "start":{"x":0.25,"y":0.25,"heading":0.0},
            "tasks":[{"id":"T","query":"find the mug","target_class":"mug","success_radius":1.0}]}"#;
        assert!(matches!(EnvironmentSpec::from_json(text), Err(EnvError::Validation(_))));
    }
}
