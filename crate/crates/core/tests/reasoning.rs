mod common;

use std::collections::{BTreeMap, VecDeque};

use cogx_core::explore_graph::{GraphPoint, PointKind};
use cogx_core::reasoning::{
    compress_state, enforce_word_bounds, path_gain, path_gain_with, push_memory, scripted_select, vefep_select, volumetric_gain,
    word_count, AffinityTable, ChosenPoint, DecisionContext, MemoryWindow, ReasonError, ReasonerChoice,
    ReasoningParams, StateRecord,
};
use cogx_core::{CellState, OccupancyGrid, Point, Pose};
use proptest::prelude::*;

fn record(i: usize, at: Point) -> StateRecord {
    StateRecord {
        call_index: i,
        step: i as u64 * 10,
        pose: Pose::new(at.x, at.y, 0.0),
        chosen: ChosenPoint { id: 1, position: at, kind: PointKind::Graph },
        compressed_text: format!("record {i}"),
        sim_seconds: i as f64 * 5.0,
    }
}

#[test]
fn eleventh_push_evicts_the_first() {
    let mut w = MemoryWindow::new(10);
    for i in 1..=11 {
        push_memory(&mut w, record(i, Point::new(0.0, 0.0)));
    }
    let ids: Vec<_> = w.iter().map(|r| r.call_index).collect();
    assert_eq!(ids, (2..=11).collect::<Vec<_>>());
}

#[test]
fn first_push_gives_length_one() {
    let mut w = MemoryWindow::new(10);
    assert_eq!(w.render(), "No prior states.");
    push_memory(&mut w, record(1, Point::new(0.0, 0.0)));
    assert_eq!(w.len(), 1);
    assert_eq!(w.render(), "State 1 (t=5.0 s): record 1");
}

#[test]
fn window_replays_like_a_bounded_deque() {
    let mut w = MemoryWindow::new(10);
    let mut reference = VecDeque::new();
    for i in 0..1000 {
        push_memory(&mut w, record(i, Point::new(i as f64, 0.0)));
        reference.push_back(i);
        if reference.len() > 10 {
            reference.pop_front();
        }
        assert!(w.len() <= 10);
    }
    assert!(w.iter().map(|r| r.call_index).eq(reference.iter().copied()));
}

/// Grid with the given free rectangle, walls around it, unknown elsewhere.
fn room(w: usize, h: usize) -> OccupancyGrid {
    let mut g = OccupancyGrid::new(w, h, 0.25);
    for r in 0..h {
        for c in 0..w {
            let border = r == 0 || c == 0 || r + 1 == h || c + 1 == w;
            g.set((c, r), if border { CellState::Occupied } else { CellState::Free });
        }
    }
    g
}

#[test]
fn known_grid_has_no_gain() {
    let g = room(30, 30);
    assert_eq!(volumetric_gain(&g, &g.center((15, 15)), 8.0), 0);
}

#[test]
fn open_unknown_patch_matches_enumeration() {
    let mut g = OccupancyGrid::new(21, 21, 0.25);
    g.set((10, 10), CellState::Free);
    let v = g.center((10, 10));
    // 4 m = 16 cells reaches the patch corners
    let expected = common::volumetric_gain_oracle(&g, (10, 10), 4.0);
    assert_eq!(volumetric_gain(&g, &v, 4.0), expected);
    assert_eq!(expected, 21 * 21 - 1);
}

#[test]
fn gain_matches_enumeration_on_random_fixtures() {
    let mut rng = common::rng(21);
    for k in 0..20 {
        let mut g = common::random_grid(&mut rng, 41, 41, 0.5, 0.1 + 0.01 * k as f64);
        g.set((20, 20), CellState::Free);
        let range = 2.0 + 0.25 * k as f64;
        assert_eq!(
            volumetric_gain(&g, &g.center((20, 20)), range),
            common::volumetric_gain_oracle(&g, (20, 20), range),
            "fixture {k}"
        );
    }
}

#[test]
fn wall_in_front_of_unknown_space_lowers_gain() {
    let mut open = OccupancyGrid::new(40, 40, 0.25);
    for r in 0..40 {
        for c in 0..20 {
            open.set((c, r), CellState::Free);
        }
    }
    let mut walled = open.clone();
    for r in 0..40 {
        walled.set((19, r), CellState::Occupied);
    }
    let v = open.center((17, 20));
    let (a, b) = (volumetric_gain(&open, &v, 4.0), volumetric_gain(&walled, &v, 4.0));
    assert!(b < a, "walled {b} vs open {a}");
    assert_eq!(b, common::volumetric_gain_oracle(&walled, (17, 20), 4.0));
}

#[test]
fn path_gain_matches_hand_values() {
    let line = [Point::new(0.0, 0.0), Point::new(2.0, 0.0)];
    let vg = |p: &Point| [5, 2, 0][p.x.round() as usize];
    assert_eq!(path_gain_with(&line, 0.5, vg), 5.0 + 2.0 * (-0.5f64).exp());
    assert_eq!(path_gain_with(&line, 0.0, vg), 7.0);
    assert_eq!(path_gain_with(&line[..1], 0.5, vg), 5.0);
    let mut g = OccupancyGrid::new(21, 21, 0.25);
    g.set((10, 10), CellState::Free);
    let v = g.center((10, 10));
    assert_eq!(path_gain(&g, &[v], 0.5, 3.0), volumetric_gain(&g, &v, 3.0) as f64);
}

fn candidate(id: usize, x: f64, y: f64, kind: PointKind, robot: &Point) -> GraphPoint {
    GraphPoint { id, ..GraphPoint::new(Point::new(x, y), kind, robot) }
}

/// Robot in the middle of a fully mapped 10 m room, no memory, no objects.
fn room_context(candidates: Vec<GraphPoint>) -> DecisionContext {
    let mut ctx = common::prompt_context();
    ctx.pose = Pose::new(5.125, 5.125, 0.0);
    ctx.candidates = candidates;
    ctx.memory = MemoryWindow::new(10);
    ctx.task.target_class = "whiteboard eraser".into();
    ctx
}

fn eraser_table() -> AffinityTable {
    let mut rooms = BTreeMap::new();
    rooms.insert("classroom".to_string(), BTreeMap::from([("whiteboard eraser".to_string(), 0.9)]));
    rooms.insert("hallway".to_string(), BTreeMap::from([("whiteboard eraser".to_string(), 0.1)]));
    AffinityTable { cues: BTreeMap::new(), rooms }
}

#[test]
fn classroom_point_beats_hallway_points() {
    let g = room(41, 41);
    let robot = Point::new(5.125, 5.125);
    let mut pts = vec![
        candidate(1, 3.125, 5.125, PointKind::Graph, &robot),
        candidate(2, 7.125, 5.125, PointKind::Graph, &robot),
        candidate(3, 5.125, 8.125, PointKind::Graph, &robot),
    ];
    pts[0].room = Some("hallway".into());
    pts[1].room = Some("hallway".into());
    pts[2].room = Some("classroom".into());
    let ctx = room_context(pts);
    let choice = scripted_select(&ctx, &g, &eraser_table(), &ReasoningParams::default()).unwrap();
    assert_eq!(choice.point_id, 3);
    assert!(choice.justification.contains("classroom"), "{}", choice.justification);
}

#[test]
fn twice_visited_target_is_passed_over() {
    let g = room(41, 41);
    let robot = Point::new(5.125, 5.125);
    let mut target = candidate(2, 6.125, 5.125, PointKind::Object, &robot);
    target.label = Some("whiteboard eraser".into());
    let mut ctx = room_context(vec![candidate(1, 2.125, 2.125, PointKind::Graph, &robot), target]);
    let params = ReasoningParams::default();
    assert_eq!(scripted_select(&ctx, &g, &eraser_table(), &params).unwrap().point_id, 2);
    push_memory(&mut ctx.memory, record(1, Point::new(5.5, 5.0)));
    assert_eq!(scripted_select(&ctx, &g, &eraser_table(), &params).unwrap().point_id, 2);
    push_memory(&mut ctx.memory, record(2, Point::new(6.0, 5.5)));
    assert_eq!(scripted_select(&ctx, &g, &eraser_table(), &params).unwrap().point_id, 1);
}

#[test]
fn equal_scores_pick_the_lowest_id() {
    let g = room(41, 41);
    let robot = Point::new(5.125, 5.125);
    // mirror images around the robot
    let pts = vec![
        candidate(1, 7.125, 5.125, PointKind::Graph, &robot),
        candidate(2, 3.125, 5.125, PointKind::Graph, &robot),
        candidate(3, 5.125, 3.125, PointKind::Graph, &robot),
    ];
    let ctx = room_context(pts);
    assert_eq!(scripted_select(&ctx, &g, &AffinityTable::default(), &ReasoningParams::default()).unwrap().point_id, 1);
}

#[test]
fn crowded_memory_pushes_the_robot_elsewhere() {
    let g = room(41, 41);
    let robot = Point::new(5.125, 5.125);
    let pts = vec![candidate(1, 7.125, 5.125, PointKind::Graph, &robot), candidate(2, 3.125, 5.125, PointKind::Graph, &robot)];
    let mut ctx = room_context(pts);
    let params = ReasoningParams::default();
    assert_eq!(scripted_select(&ctx, &g, &AffinityTable::default(), &params).unwrap().point_id, 1);
    for i in 0..10 {
        push_memory(&mut ctx.memory, record(i, Point::new(7.0 + 0.05 * i as f64, 5.0)));
    }
    assert_eq!(scripted_select(&ctx, &g, &AffinityTable::default(), &params).unwrap().point_id, 2);
}

#[test]
fn empty_candidate_list_is_an_error() {
    let g = room(20, 20);
    let ctx = room_context(Vec::new());
    let params = ReasoningParams::default();
    assert_eq!(scripted_select(&ctx, &g, &AffinityTable::default(), &params), Err(ReasonError::NoCandidates));
    assert_eq!(vefep_select(&ctx, &g, &params), Err(ReasonError::NoCandidates));
}

/// Room with an unknown region east of x = 7 m and scattered candidates.
fn mixed_world(seed: u64, n: usize) -> (OccupancyGrid, DecisionContext) {
    use rand::Rng;
    let mut g = room(41, 41);
    for r in 1..40 {
        for c in 28..40 {
            g.set((c, r), CellState::Unknown);
        }
    }
    let mut rng = common::rng(seed);
    let robot = Point::new(5.125, 5.125);
    let pts = (1..=n)
        .map(|id| {
            let cell = (rng.random_range(1..28), rng.random_range(1..40));
            let c = g.center(cell);
            let kind = if rng.random_bool(0.3) { PointKind::Frontier } else { PointKind::Graph };
            let mut p = candidate(id, c.x, c.y, kind, &robot);
            p.is_new = rng.random_bool(0.5);
            p.room = Some(["classroom", "hallway", "office"][rng.random_range(0..3)].into());
            p
        })
        .collect();
    let mut ctx = room_context(pts);
    for i in 0..rng.random_range(0..10) {
        push_memory(&mut ctx.memory, record(i, g.center((rng.random_range(1..28), rng.random_range(1..40)))));
    }
    (g, ctx)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn scripted_choice_is_valid_pure_and_scale_free(seed in any::<u64>(), n in 1usize..12, k in -4i32..5) {
        let (g, ctx) = mixed_world(seed, n);
        let params = ReasoningParams::default();
        let table = eraser_table();
        let a = scripted_select(&ctx, &g, &table, &params).unwrap();
        prop_assert!(ctx.candidate(a.point_id).is_some());
        prop_assert_eq!(&scripted_select(&ctx, &g, &table, &params).unwrap(), &a);
        let c = 2f64.powi(k);
        let mut scaled = params.clone();
        scaled.weights.alpha *= c;
        scaled.weights.beta *= c;
        scaled.weights.gamma *= c;
        scaled.weights.delta *= c;
        prop_assert_eq!(scripted_select(&ctx, &g, &table, &scaled).unwrap().point_id, a.point_id);
        let v = vefep_select(&ctx, &g, &params).unwrap();
        prop_assert!(ctx.candidate(v.point_id).is_some());
        prop_assert_eq!(vefep_select(&ctx, &g, &params).unwrap(), v);
    }
}

#[test]
fn single_candidate_is_chosen() {
    let g = room(30, 30);
    let robot = Point::new(5.125, 5.125);
    let ctx = room_context(vec![candidate(1, 2.125, 2.125, PointKind::Graph, &robot)]);
    assert_eq!(vefep_select(&ctx, &g, &ReasoningParams::default()).unwrap().point_id, 1);
}

#[test]
fn frontier_by_the_large_unknown_region_wins() {
    // open doorway to the east into unknown space, closed one to the west
    let mut g = room(41, 41);
    for r in 15..26 {
        g.set((40, r), CellState::Free);
    }
    let mut wide = OccupancyGrid::new(61, 41, 0.25);
    for i in 0..41 * 41 {
        let c = g.frame().cell_at(i);
        wide.set(c, g.get(c));
    }
    let robot = Point::new(5.125, 5.125);
    let east = wide.center((38, 20));
    let west = wide.center((3, 20));
    let ctx = room_context(vec![
        candidate(1, west.x, west.y, PointKind::Frontier, &robot),
        candidate(2, east.x, east.y, PointKind::Frontier, &robot),
    ]);
    let params = ReasoningParams::default();
    let ge = volumetric_gain(&wide, &east, params.sensor_range);
    let gw = volumetric_gain(&wide, &west, params.sensor_range);
    assert!(ge > gw && gw == common::volumetric_gain_oracle(&wide, (3, 20), params.sensor_range));
    assert_eq!(vefep_select(&ctx, &wide, &params).unwrap().point_id, 2);
}

#[test]
fn detected_target_overrides_gain() {
    let g = room(41, 41);
    let robot = Point::new(5.125, 5.125);
    let mut target = candidate(2, 2.125, 2.125, PointKind::Object, &robot);
    target.label = Some("whiteboard eraser".into());
    let ctx = room_context(vec![candidate(1, 8.125, 8.125, PointKind::Frontier, &robot), target]);
    assert_eq!(vefep_select(&ctx, &g, &ReasoningParams::default()).unwrap().point_id, 2);
}

fn fixture_choice() -> (ReasonerChoice, ChosenPoint) {
    (
        ReasonerChoice {
            point_id: 3,
            environment_description: "The robot is in an indoor school building. It is in a hallway. It can see a door and a bench.".into(),
            justification: "Point 3 is a frontier that opens into unexplored space next to the classrooms.".into(),
        },
        ChosenPoint { id: 3, position: Point::new(14.5, 7.0), kind: PointKind::Frontier },
    )
}

#[test]
fn compressed_state_matches_golden() {
    let (choice, chosen) = fixture_choice();
    let rec = compress_state(&choice, &chosen, &Pose::new(4.0, 6.5, 0.3), 4, 120, 60.0);
    let n = word_count(&rec.compressed_text);
    assert!((50..=100).contains(&n), "{n} words");
    assert_eq!(rec, compress_state(&choice, &chosen, &Pose::new(4.0, 6.5, 0.3), 4, 120, 60.0));
    common::assert_golden("compressed_state.txt", &format!("{}\n", rec.compressed_text));
}

proptest! {
    #[test]
    fn compressed_states_stay_in_band(words in 0usize..400, pad in 0usize..80, id in 1usize..60) {
        let (mut choice, chosen) = fixture_choice();
        choice.justification = "because ".repeat(words);
        choice.environment_description = "room ".repeat(pad);
        let rec = compress_state(&choice, &chosen, &Pose::new(1.0, 2.0, 0.0), id, 0, 0.0);
        prop_assert!((50..=100).contains(&word_count(&rec.compressed_text)));
    }

    #[test]
    fn word_bounds_keep_in_band_text(n in 50usize..=100) {
        let text = (0..n).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
        prop_assert_eq!(enforce_word_bounds(&text, "pad"), text);
    }
}
