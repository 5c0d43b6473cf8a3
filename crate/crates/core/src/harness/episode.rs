//! One search episode: map, perceive, decide, move, repeat.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::explore_graph::{
    gaussian_sparsify, label_new, plan_path, planner::direct_path_length, renumber, sample_graph_points, GraphPoint, KdTree,
    PointKind,
};
use crate::geometry::Point;
use crate::llm_bridge::{generate_descriptions, llm_compress, llm_labels, llm_questions, llm_select, ChatBackend, HeuristicBackend};
use crate::mapping::{coverage, integrate_scan, OccupancyGrid};
use crate::params::ExperimentParams;
use crate::perception::{perceive_step, CameraRig, DetectionLogEntry, NoiseModel, ObjectStore, SearchMap};
use crate::reasoning::{
    compress_state, scripted::unsearched_fraction, scripted_select, vefep_select, AffinityTable, ChosenPoint, DecisionContext,
    MemoryWindow, ReasonerChoice, ReasonerKind, StateRecord,
};
use crate::rng::{stream_rng, Stream};
use crate::world::{advance_along, check_success, targets_of, EnvironmentSpec, PathCursor, Pose, SimClock};

use super::HarnessError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone)]
pub struct EpisodeConfig {
    pub env: Arc<EnvironmentSpec>,
    pub task_id: String,
    pub reasoner: ReasonerKind,
    pub seed: u64,
    pub params: ExperimentParams,
    pub affinity: AffinityTable,
    /// Backend for the language-model reasoner; the in-process heuristic
    /// backend when absent.
    pub backend: Option<Arc<dyn ChatBackend>>,
    pub record_detections: bool,
}

impl std::fmt::Debug for EpisodeConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EpisodeConfig")
            .field("env", &self.env.name)
            .field("task_id", &self.task_id)
            .field("reasoner", &self.reasoner)
            .field("seed", &self.seed)
            .finish_non_exhaustive()
    }
}

impl EpisodeConfig {
    pub fn new(env: EnvironmentSpec, task_id: &str, reasoner: ReasonerKind, seed: u64) -> Self {
        let affinity = AffinityTable::bundled(&env.name);
        Self {
            env: Arc::new(env),
            task_id: task_id.to_string(),
            reasoner,
            seed,
            params: ExperimentParams::default(),
            affinity,
            backend: None,
            record_detections: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub x: f64,
    pub y: f64,
    pub step: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LoggedPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub kind: PointKind,
    pub new: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionLog {
    pub call: usize,
    pub reasoner: ReasonerKind,
    pub point_id: usize,
    pub point: LoggedPoint,
    pub justification: String,
    pub description: String,
    /// Compressed state stored in memory for this decision.
    #[serde(default)]
    pub state: String,
    pub memory_len: usize,
    pub step: u64,
    pub candidates: usize,
    #[serde(default)]
    pub fallback: bool,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub interrupt: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub schema_version: u32,
    pub env: String,
    pub task: String,
    pub reasoner: ReasonerKind,
    pub seed: u64,
    pub success: bool,
    pub timeout: bool,
    pub path_length: f64,
    pub steps: u64,
    pub decision_count: usize,
    pub direct_path: f64,
    pub coverage: f64,
    /// Fraction of free cells the detector has searched to the configured
    /// miss probability.
    pub search_coverage: f64,
    pub labels: Vec<String>,
    pub fallback_count: usize,
    /// Polyline vertices of the driven route: the start, every corner and the
    /// position at the end of every decision.
    pub trajectory: Vec<TrajectoryPoint>,
    pub decisions: Vec<DecisionLog>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detections: Vec<DetectionLogEntry>,
}

impl EpisodeResult {
    pub fn trajectory_length(&self) -> f64 {
        self.trajectory
            .windows(2)
            .map(|w| Point::new(w[0].x, w[0].y).dist(&Point::new(w[1].x, w[1].y)))
            .sum()
    }

    /// Chosen waypoint positions in decision order.
    pub fn waypoints(&self) -> Vec<Point> {
        self.decisions.iter().map(|d| Point::new(d.point.x, d.point.y)).collect()
    }
}

/// Mutable state of a running episode.
struct Run<'a> {
    cfg: &'a EpisodeConfig,
    env: &'a EnvironmentSpec,
    task: &'a crate::world::Task,
    rig: CameraRig,
    noise: NoiseModel,
    grid: OccupancyGrid,
    pose: Pose,
    clock: SimClock,
    store: ObjectStore,
    labels: Vec<String>,
    noise_rng: rand_chacha::ChaCha8Rng,
    path_length: f64,
    trajectory: Vec<TrajectoryPoint>,
    detections: Vec<DetectionLogEntry>,
    search: SearchMap,
    success: bool,
}

impl Run<'_> {
    fn sense(&mut self) {
        let p = &self.cfg.params;
        integrate_scan(&mut self.grid, self.env, &self.pose, &p.lidar);
        let log = perceive_step(
            self.env,
            &self.grid,
            &self.pose,
            &self.rig,
            &self.noise,
            &p.fusion,
            &self.labels,
            self.clock.step,
            &mut self.store,
            &mut self.noise_rng,
        );
        if self.cfg.record_detections {
            self.detections.extend(log);
        }
        self.search.observe(self.env, &self.pose, &self.rig, &self.noise);
        if check_success(self.env, &self.pose, self.task, &self.rig) {
            self.success = true;
        }
    }

    fn push_vertex(&mut self, p: Point) {
        let last = self.trajectory.last().expect("trajectory starts with the start pose");
        if last.x != p.x || last.y != p.y {
            self.trajectory.push(TrajectoryPoint { x: p.x, y: p.y, step: self.clock.step });
        }
    }

    /// Object ids of target-class points that may be offered as candidates.
    fn admissible_targets(&self) -> BTreeSet<usize> {
        let min = self.cfg.params.min_object_observations;
        self.store
            .of_class(&self.task.target_class)
            .filter(|o| o.observation_count >= min)
            .map(|o| o.id)
            .collect()
    }

    /// Turn in place by a quarter turn; one step, no distance.
    fn spin(&mut self) {
        self.clock.tick();
        self.pose = Pose::new(self.pose.x, self.pose.y, self.pose.heading + FRAC_PI_2);
        self.sense();
    }
}

pub fn run_episode(cfg: &EpisodeConfig) -> Result<EpisodeResult, HarnessError> {
    let p = &cfg.params;
    p.validate().map_err(HarnessError::Config)?;
    let scenario = cfg.env.scenario(&cfg.task_id)?;
    let env = &scenario.env;
    let task = &scenario.task;
    let rig = p.camera_rig();
    let noise = if p.env_confusion { p.noise.clone().with_confusion(&env.confusion) } else { p.noise.clone() };

    let backend: Arc<dyn ChatBackend> = cfg.backend.clone().unwrap_or_else(|| Arc::new(HeuristicBackend));
    let mut sampling_rng = stream_rng(cfg.seed, Stream::Sampling);
    let mut sparsify_rng = stream_rng(cfg.seed, Stream::Sparsify);

    let start = env.start;
    let radius = task.success_radius + env.cell_size * std::f64::consts::SQRT_2 / 2.0;
    let direct_path = targets_of(env, task)
        .iter()
        .filter_map(|o| direct_path_length(env, &start.position(), &o.position, radius))
        .min_by(f64::total_cmp)
        .unwrap_or(f64::INFINITY);

    let mut run = Run {
        cfg,
        env,
        task,
        rig,
        noise,
        grid: OccupancyGrid::for_env(env),
        pose: start,
        clock: SimClock::new(p.seconds_per_step),
        store: ObjectStore::new(),
        labels: Vec::new(),
        noise_rng: stream_rng(cfg.seed, Stream::Noise),
        path_length: 0.0,
        trajectory: vec![TrajectoryPoint { x: start.x, y: start.y, step: 0 }],
        detections: Vec::new(),
        search: SearchMap::new(env.frame().len()),
        success: false,
    };

    integrate_scan(&mut run.grid, env, &run.pose, &p.lidar);
    run.labels = match cfg.reasoner {
        ReasonerKind::Llm => {
            let description = generate_descriptions(env, &run.pose, &run.rig);
            let questions = llm_questions(backend.as_ref(), &task.query);
            log::debug!("scene questions: {questions:?}");
            llm_labels(backend.as_ref(), &description, &task.query, &task.target_class, p.max_labels)
        }
        _ => cfg.affinity.top_labels(&task.target_class, p.max_labels),
    };
    run.sense();

    let mut memory = MemoryWindow::new(p.memory_capacity);
    let mut prior: Vec<Point> = Vec::new();
    let mut decisions = Vec::new();
    let mut fallback_count = 0;
    let mut interrupt_note = String::new();
    let mut checked: Vec<Point> = Vec::new();

    while !run.success && run.clock.step < p.max_steps {
        let description = generate_descriptions(env, &run.pose, &run.rig);
        let mut candidates =
            sample_graph_points(&run.grid, &run.pose, &mut sampling_rng, &p.sampling).unwrap_or_default();
        candidates = gaussian_sparsify(candidates, &run.pose, &mut sparsify_rng, &p.sparsify);
        let admitted = run.admissible_targets();
        let robot = run.pose.position();
        for id in &admitted {
            let o = run.store.get(*id).expect("admitted ids exist");
            let mut gp = GraphPoint::new(o.position(), PointKind::Object, &robot);
            gp.label = Some(o.class.clone());
            gp.confidence = Some(o.p);
            gp.object_id = Some(o.id);
            candidates.push(gp);
        }
        renumber(&mut candidates);
        label_new(&mut candidates, &KdTree::build(&prior), p.novelty_threshold);
        let viewed = run.search.searched(p.reasoning.max_miss);
        for c in candidates.iter_mut() {
            c.room = env.room_label_at(&c.position).map(str::to_string);
            c.unsearched = Some(unsearched_fraction(&run.grid, &viewed, &c.position, p.reasoning.cue_radius));
        }
        prior.extend(candidates.iter().map(|c| c.position));

        if candidates.is_empty() {
            run.spin();
            continue;
        }

        let ctx = DecisionContext {
            task: task.clone(),
            pose: run.pose,
            step: run.clock.step,
            sim_seconds: run.clock.seconds(),
            candidates,
            object_points: run.store.points.clone(),
            description: description.clone(),
            memory: memory.clone(),
            total_calls: decisions.len(),
            interrupt_note: std::mem::take(&mut interrupt_note),
            active_labels: run.labels.clone(),
            viewed: (cfg.reasoner == ReasonerKind::Scripted).then_some(viewed),
            checked: checked.clone(),
        };
        let (choice, fallback, raw) = decide(cfg, &ctx, &run.grid, backend.as_ref());
        if fallback {
            fallback_count += 1;
        }
        let chosen = ctx.candidate(choice.point_id).unwrap_or(&ctx.candidates[0]).clone();

        let mut cursor = match plan_path(&run.grid, &run.pose, chosen.position, &p.reasoning.planner) {
            Ok(plan) => PathCursor::new(plan.waypoints),
            Err(e) => {
                log::debug!("cannot plan to point {}: {e}", chosen.id);
                PathCursor::default()
            }
        };
        if cursor.is_done() {
            run.spin();
        } else {
            let phase_start = run.clock.step;
            loop {
                let m = advance_along(env, run.pose, &mut cursor, p.speed, &mut run.clock)?;
                run.path_length += m.distance;
                for c in &m.corners {
                    run.push_vertex(*c);
                }
                run.pose = m.pose;
                run.sense();
                if run.success || cursor.is_done() || run.clock.step >= p.max_steps {
                    break;
                }
                let fresh: Vec<usize> = run.admissible_targets().difference(&admitted).copied().collect();
                if let Some(id) = fresh.first() {
                    let o = run.store.get(*id).expect("fresh ids exist");
                    interrupt_note = format!(
                        "The robot stopped early at step {} because a new {} detection appeared at x={:.2} y={:.2} z=0.0.",
                        run.clock.step, o.class, o.x, o.y
                    );
                    break;
                }
                if run.clock.step - phase_start >= p.replan_interval {
                    break;
                }
            }
            // straight motion between corners, so the phase end closes the polyline
            run.push_vertex(run.pose.position());
        }

        if chosen.kind == PointKind::Object && run.pose.position().dist(&chosen.position) <= task.success_radius {
            checked.push(chosen.position);
        }

        let call = decisions.len() + 1;
        let chosen_point = ChosenPoint { id: chosen.id, position: chosen.position, kind: chosen.kind };
        let mut record = compress_state(&choice, &chosen_point, &run.pose, call, run.clock.step, run.clock.seconds());
        if let Some(text) = raw {
            record = StateRecord { compressed_text: llm_compress(&text, backend.as_ref()), ..record };
        }
        debug_assert!({
            let n = crate::reasoning::word_count(&record.compressed_text);
            (50..=100).contains(&n)
        });
        let state = record.compressed_text.clone();
        memory.push(record);
        decisions.push(DecisionLog {
            call,
            reasoner: cfg.reasoner,
            point_id: chosen.id,
            point: LoggedPoint { x: chosen.position.x, y: chosen.position.y, z: 0.0, kind: chosen.kind, new: chosen.is_new },
            justification: choice.justification,
            description,
            state,
            memory_len: memory.len(),
            step: run.clock.step,
            candidates: ctx.candidates.len(),
            fallback,
            interrupt: ctx.interrupt_note.clone(),
        });
    }

    let success = run.success;
    Ok(EpisodeResult {
        schema_version: SCHEMA_VERSION,
        env: env.name.clone(),
        task: task.id.clone(),
        reasoner: cfg.reasoner,
        seed: cfg.seed,
        success,
        timeout: !success,
        path_length: run.path_length,
        steps: run.clock.step,
        decision_count: decisions.len(),
        direct_path,
        coverage: coverage(&run.grid, env),
        search_coverage: {
            let searched = run.search.searched(p.reasoning.max_miss);
            let free = (0..searched.len()).filter(|&i| env.is_free(env.frame().cell_at(i)));
            let (n, k) = free.fold((0usize, 0usize), |(n, k), i| (n + 1, k + usize::from(searched[i])));
            k as f64 / n.max(1) as f64
        },
        labels: run.labels,
        fallback_count,
        trajectory: run.trajectory,
        decisions,
        detections: run.detections,
    })
}

/// Runs the configured reasoner. Returns the choice, whether the language
/// model fell back to the scripted reasoner, and the raw model answer.
fn decide(
    cfg: &EpisodeConfig,
    ctx: &DecisionContext,
    grid: &OccupancyGrid,
    backend: &dyn ChatBackend,
) -> (ReasonerChoice, bool, Option<String>) {
    let p = &cfg.params;
    let first = || ReasonerChoice {
        point_id: 1,
        environment_description: ctx.description.clone(),
        justification: "No reasoner output; taking the first point.".into(),
    };
    match cfg.reasoner {
        ReasonerKind::Vefep => (vefep_select(ctx, grid, &p.reasoning).unwrap_or_else(|_| first()), false, None),
        ReasonerKind::Scripted => {
            (scripted_select(ctx, grid, &cfg.affinity, &p.reasoning).unwrap_or_else(|_| first()), false, None)
        }
        ReasonerKind::Llm => {
            let d = llm_select(ctx, grid, backend, &p.llm, &cfg.affinity, &p.reasoning);
            (d.choice, d.fallback, d.raw)
        }
    }
}
