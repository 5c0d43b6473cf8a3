//! Synthetic open-vocabulary detector, raycast projection onto the belief
//! map and weighted-median fusion into object points.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{wrap_angle, GridRay, Point};
use crate::mapping::{CellState, OccupancyGrid};
use crate::world::{line_of_sight, EnvironmentSpec, Pose, RayMask};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Camera {
    pub name: &'static str,
    pub yaw_offset: f64,
    pub fov: f64,
    pub max_range: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CameraRig {
    pub cameras: Vec<Camera>,
}

impl Default for CameraRig {
    fn default() -> Self {
        Self::new(PI / 2.0, 6.0)
    }
}

impl CameraRig {
    /// Left, front and right cameras at +90, 0 and -90 degrees.
    pub fn new(fov: f64, max_range: f64) -> Self {
        assert!(fov > 0.0 && fov < PI, "camera fov must lie in (0, pi)");
        let cam = |name, yaw_offset| Camera { name, yaw_offset, fov, max_range };
        Self { cameras: vec![cam("left", PI / 2.0), cam("front", 0.0), cam("right", -PI / 2.0)] }
    }

    pub fn max_range(&self) -> f64 {
        self.cameras.iter().map(|c| c.max_range).fold(0.0, f64::max)
    }

    /// Index of the first camera whose frustum contains `target` with a clear
    /// camera sightline.
    pub fn sees(&self, env: &EnvironmentSpec, pose: &Pose, target: &Point) -> Option<usize> {
        let origin = pose.position();
        let d = origin.dist(target);
        let rel = wrap_angle(origin.bearing_to(target) - pose.heading);
        let cam = self.cameras.iter().position(|c| {
            d <= c.max_range && (d < 1e-9 || wrap_angle(rel - c.yaw_offset).abs() <= c.fov / 2.0)
        })?;
        line_of_sight(env, origin, *target, RayMask::Camera).then_some(cam)
    }
}

/// Per-cell probability that the detector would still have missed a target
/// standing there, given every frame so far.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchMap {
    miss: Vec<f64>,
    stamp: Vec<u64>,
    frame_no: u64,
}

impl SearchMap {
    pub fn new(len: usize) -> Self {
        Self { miss: vec![1.0; len], stamp: vec![0; len], frame_no: 0 }
    }

    pub fn miss(&self) -> &[f64] {
        &self.miss
    }

    /// Folds in one frame: every cell inside a camera frustum with a clear
    /// camera sightline has its miss probability scaled by one minus the
    /// detection probability at its distance. Rays are cast every degree of
    /// each frustum; each cell counts once per frame.
    pub fn observe(&mut self, env: &EnvironmentSpec, pose: &Pose, rig: &CameraRig, noise: &NoiseModel) {
        self.frame_no += 1;
        let frame = env.frame();
        let origin = pose.position();
        for cam in &rig.cameras {
            let rays = (cam.fov.to_degrees().ceil() as usize).max(1);
            for k in 0..=rays {
                let angle = pose.heading + cam.yaw_offset - cam.fov / 2.0 + cam.fov * k as f64 / rays as f64;
                for rc in GridRay::new(frame, origin, angle, cam.max_range) {
                    if env.blocks(rc.cell, RayMask::Camera) {
                        break;
                    }
                    let i = frame.index(rc.cell);
                    if self.stamp[i] == self.frame_no {
                        continue;
                    }
                    self.stamp[i] = self.frame_no;
                    let d = origin.dist(&frame.center(rc.cell));
                    self.miss[i] *= 1.0 - noise.detect_prob(d, cam.max_range);
                }
            }
        }
    }

    /// Cells whose miss probability is at most `max_miss`.
    pub fn searched(&self, max_miss: f64) -> Vec<bool> {
        self.miss.iter().map(|&m| m <= max_miss).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Detection probability at zero range; decays linearly to zero at the
    /// camera's max range.
    pub p0: f64,
    /// Expected spurious detections per frame.
    pub false_positive_rate: f64,
    pub bearing_sigma: f64,
    /// True class to (reported sibling class, probability). Usually taken
    /// from the environment file.
    pub confusion: BTreeMap<String, (String, f64)>,
    pub true_confidence: (f64, f64),
    pub false_confidence: (f64, f64),
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self {
            p0: 0.9,
            false_positive_rate: 0.05,
            bearing_sigma: 2f64.to_radians(),
            confusion: BTreeMap::new(),
            true_confidence: (0.55, 0.95),
            false_confidence: (0.3, 0.7),
        }
    }
}

impl NoiseModel {
    /// Perfect detector: every visible object, exact bearing, no spurious or
    /// confused reports.
    pub fn noiseless() -> Self {
        Self {
            p0: 1.0,
            false_positive_rate: 0.0,
            bearing_sigma: 0.0,
            ..Self::default()
        }
    }

    pub fn with_confusion(mut self, confusion: &BTreeMap<String, (String, f64)>) -> Self {
        self.confusion = confusion.clone();
        self
    }

    pub fn detect_prob(&self, d: f64, max_range: f64) -> f64 {
        self.p0 * (1.0 - d / max_range).clamp(0.0, 1.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub class: String,
    pub confidence: f64,
    /// Robot-frame bearing.
    pub bearing: f64,
    pub frame_step: u64,
    /// Ground-truth object id, `None` for spurious detections. Never shown to
    /// reasoners; kept for logs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// Runs the detector on one frame from every camera.
pub fn sense_objects<R: Rng>(
    env: &EnvironmentSpec,
    pose: &Pose,
    rig: &CameraRig,
    noise: &NoiseModel,
    active_labels: &[String],
    step: u64,
    rng: &mut R,
) -> Vec<Detection> {
    assert!(!active_labels.is_empty(), "detector needs at least one label");
    let active = |c: &str| active_labels.iter().any(|l| l == c);
    let jitter = Normal::new(0.0, noise.bearing_sigma.max(0.0)).expect("finite sigma");
    let mut out = Vec::new();
    for obj in &env.objects {
        let (sibling, confusion_prob) = match noise.confusion.get(&obj.class) {
            Some((c, p)) => (Some(c.as_str()), *p),
            None => (None, 0.0),
        };
        let own_active = active(&obj.class);
        let sibling_active = sibling.is_some_and(active);
        if !own_active && !sibling_active {
            continue;
        }
        let Some(cam) = rig.sees(env, pose, &obj.position) else { continue };
        let d = pose.position().dist(&obj.position);
        if rng.random::<f64>() >= noise.detect_prob(d, rig.cameras[cam].max_range) {
            continue;
        }
        let confused = sibling.is_some() && rng.random::<f64>() < confusion_prob;
        let class = match (confused, sibling) {
            (true, Some(s)) => s.to_string(),
            _ if own_active => obj.class.clone(),
            _ => continue,
        };
        let bearing = wrap_angle(pose.position().bearing_to(&obj.position) - pose.heading + jitter.sample(rng));
        let (lo, hi) = noise.true_confidence;
        out.push(Detection {
            class,
            confidence: rng.random_range(lo..hi),
            bearing,
            frame_step: step,
            source: Some(obj.id.clone()),
        });
    }
    if noise.false_positive_rate > 0.0 {
        let n = Poisson::new(noise.false_positive_rate).expect("positive rate").sample(rng) as usize;
        for _ in 0..n {
            let cam = &rig.cameras[rng.random_range(0..rig.cameras.len())];
            let offset = rng.random_range(-cam.fov / 2.0..cam.fov / 2.0);
            let class = active_labels[rng.random_range(0..active_labels.len())].clone();
            let (lo, hi) = noise.false_confidence;
            out.push(Detection {
                class,
                confidence: rng.random_range(lo..hi),
                bearing: wrap_angle(cam.yaw_offset + offset),
                frame_step: step,
                source: None,
            });
        }
    }
    out
}

#[derive(Debug, Error, PartialEq)]
pub enum ProjectionError {
    #[error("no surface within camera range")]
    NoSurface,
}

/// Casts the detection bearing into the belief grid. The first occupied cell
/// wins; failing that, the first unknown cell. Returns the ray's entry point
/// into that cell.
pub fn project_detection(grid: &OccupancyGrid, pose: &Pose, det: &Detection, max_range: f64) -> Result<Point, ProjectionError> {
    let origin = pose.position();
    let angle = pose.heading + det.bearing;
    let mut first_unknown = None;
    for rc in GridRay::new(grid.frame(), origin, angle, max_range) {
        match grid.get(rc.cell) {
            CellState::Occupied => return Ok(origin.offset(angle, rc.t_enter)),
            CellState::Unknown if first_unknown.is_none() => first_unknown = Some(rc.t_enter),
            _ => {}
        }
    }
    first_unknown.map(|t| origin.offset(angle, t)).ok_or(ProjectionError::NoSurface)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionParams {
    pub cluster_radius: f64,
    pub window: usize,
}

impl Default for FusionParams {
    fn default() -> Self {
        Self { cluster_radius: 1.5, window: 15 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectPoint {
    pub id: usize,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub class: String,
    pub p: f64,
    pub observation_count: u32,
    pub first_step: u64,
    pub last_step: u64,
    #[serde(skip)]
    history: VecDeque<(f64, f64, f64)>,
}

impl ObjectPoint {
    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

/// Episode-local set of fused object points.
#[derive(Clone, Debug, Default)]
pub struct ObjectStore {
    pub points: Vec<ObjectPoint>,
}

impl ObjectStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, id: usize) -> Option<&ObjectPoint> {
        self.points.iter().find(|p| p.id == id)
    }

    pub fn of_class<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a ObjectPoint> + 'a {
        self.points.iter().filter(move |p| p.class == class)
    }

    /// Adds one projected observation and returns the id of the point it was
    /// fused into.
    pub fn fuse(&mut self, candidate: Point, class: &str, confidence: f64, step: u64, params: &FusionParams) -> usize {
        assert!(confidence > 0.0 && confidence <= 1.0, "confidence must lie in (0, 1]");
        let nearest = self
            .points
            .iter_mut()
            .filter(|p| p.class == class)
            .map(|p| (p.position().dist(&candidate), p))
            .filter(|(d, _)| *d <= params.cluster_radius)
            .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.id.cmp(&b.1.id)));
        if let Some((_, p)) = nearest {
            p.history.push_back((candidate.x, candidate.y, confidence));
            while p.history.len() > params.window {
                p.history.pop_front();
            }
            let mut xs: Vec<(f64, f64)> = p.history.iter().map(|h| (h.0, h.2)).collect();
            let mut ys: Vec<(f64, f64)> = p.history.iter().map(|h| (h.1, h.2)).collect();
            p.x = weighted_median(&mut xs);
            p.y = weighted_median(&mut ys);
            p.p = p.p.max(confidence);
            p.observation_count += 1;
            p.last_step = step;
            return p.id;
        }
        let id = self.points.len() + 1;
        self.points.push(ObjectPoint {
            id,
            x: candidate.x,
            y: candidate.y,
            z: 0.0,
            class: class.to_string(),
            p: confidence,
            observation_count: 1,
            first_step: step,
            last_step: step,
            history: VecDeque::from([(candidate.x, candidate.y, confidence)]),
        });
        id
    }
}

/// Lower weighted median of `(value, weight)` pairs: the smallest value whose
/// cumulative weight reaches half the total. Expected linear time; reorders
/// the slice.
pub fn weighted_median(items: &mut [(f64, f64)]) -> f64 {
    assert!(!items.is_empty(), "weighted median of an empty set");
    let half = items.iter().map(|i| i.1).sum::<f64>() / 2.0;
    let (mut lo, mut hi) = (0, items.len());
    let mut below = 0.0;
    let mut last = items[0].0;
    while lo < hi {
        let slice = &mut items[lo..hi];
        let mid = slice.len() / 2;
        let pivot = slice.select_nth_unstable_by(mid, |a, b| a.0.total_cmp(&b.0)).1 .0;
        // three-way partition: [< pivot | == pivot | > pivot]
        let (mut lt, mut i, mut gt) = (0, 0, slice.len());
        while i < gt {
            match slice[i].0.total_cmp(&pivot) {
                std::cmp::Ordering::Less => {
                    slice.swap(i, lt);
                    lt += 1;
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    gt -= 1;
                    slice.swap(i, gt);
                }
                std::cmp::Ordering::Equal => i += 1,
            }
        }
        let w_less: f64 = slice[..lt].iter().map(|i| i.1).sum();
        let w_eq: f64 = slice[lt..gt].iter().map(|i| i.1).sum();
        last = pivot;
        if lt > 0 && below + w_less >= half {
            hi = lo + lt;
        } else if below + w_less + w_eq >= half {
            return pivot;
        } else {
            below += w_less + w_eq;
            lo += gt;
        }
    }
    last
}

/// Per-step log record of one detection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionLogEntry {
    pub step: u64,
    pub class: String,
    pub conf: f64,
    pub bearing: f64,
    pub projected: Option<Point3>,
    pub fused_id: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl From<Point> for Point3 {
    fn from(p: Point) -> Self {
        Self { x: p.x, y: p.y, z: 0.0 }
    }
}

/// Detect, project and fuse for one frame.
#[allow(clippy::too_many_arguments)]
pub fn perceive_step<R: Rng>(
    env: &EnvironmentSpec,
    grid: &OccupancyGrid,
    pose: &Pose,
    rig: &CameraRig,
    noise: &NoiseModel,
    fusion: &FusionParams,
    active_labels: &[String],
    step: u64,
    store: &mut ObjectStore,
    rng: &mut R,
) -> Vec<DetectionLogEntry> {
    let range = rig.max_range();
    sense_objects(env, pose, rig, noise, active_labels, step, rng)
        .into_iter()
        .map(|det| {
            let projected = project_detection(grid, pose, &det, range).ok();
            let fused_id = projected.map(|p| store.fuse(p, &det.class, det.confidence, step, fusion));
            DetectionLogEntry {
                step,
                class: det.class,
                conf: det.confidence,
                bearing: det.bearing,
                projected: projected.map(Point3::from),
                fused_id,
            }
        })
        .collect()
}

/// Classes of objects currently visible, for scene descriptions.
pub fn visible_classes(env: &EnvironmentSpec, pose: &Pose, rig: &CameraRig) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for o in &env.objects {
        if rig.sees(env, pose, &o.position).is_some() {
            *out.entry(o.class.clone()).or_insert(0) += 1;
        }
    }
    out
}
