//! Prints the decision log of one episode.
//!
//! cargo run --release -p cogx-core --example trace <env> <task> <reasoner> <seed>

use cogx_core::harness::{run_episode, EpisodeConfig};
use cogx_core::world::{resolve_environment, targets_of};

fn main() {
    let a: Vec<String> = std::env::args().skip(1).collect();
    let env = resolve_environment(&a[0]).expect("environment");
    let mut cfg = EpisodeConfig::new(env.clone(), &a[1], a[2].parse().expect("reasoner"), a[3].parse().expect("seed"));
    cfg.record_detections = true;
    let r = run_episode(&cfg).expect("episode");
    let scen = env.scenario(&a[1]).expect("task");
    for t in targets_of(&scen.env, &scen.task) {
        println!("target {} at ({:.2}, {:.2})", t.id, t.position.x, t.position.y);
    }
    for d in &r.decisions {
        println!(
            "#{:<3} step {:<5} {:>8} ({:6.2},{:6.2}) new={} n={:<3} {}{}",
            d.call,
            d.step,
            d.point.kind.as_str(),
            d.point.x,
            d.point.y,
            u8::from(d.point.new),
            d.candidates,
            d.justification,
            if d.interrupt.is_empty() { "" } else { " [interrupt]" }
        );
    }
    let target_dets = r.detections.iter().filter(|d| d.class == scen.task.target_class).count();
    println!("target-class detections: {target_dets}");
    for t in targets_of(&scen.env, &scen.task) {
        let near = r
            .detections
            .iter()
            .filter(|d| d.class == scen.task.target_class)
            .filter_map(|d| d.projected.as_ref())
            .filter(|p| ((p.x - t.position.x).powi(2) + (p.y - t.position.y).powi(2)).sqrt() < 3.0)
            .count();
        let closest = r
            .trajectory
            .iter()
            .map(|p| ((p.x - t.position.x).powi(2) + (p.y - t.position.y).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        println!("{}: detections projected within 3 m: {near}; closest vertex {closest:.2} m", t.id);
    }
    if let Ok(range) = std::env::var("TRACE_STEPS") {
        let (a, b) = range.split_once('-').expect("TRACE_STEPS=a-b");
        let (a, b): (u64, u64) = (a.parse().unwrap(), b.parse().unwrap());
        for d in r.detections.iter().filter(|d| d.step >= a && d.step <= b) {
            println!("  det step {} {} conf {:.2} bearing {:.1} -> {:?} fused {:?}", d.step, d.class, d.conf, d.bearing.to_degrees(), d.projected, d.fused_id);
        }
        for t in r.trajectory.iter().filter(|t| t.step >= a && t.step <= b) {
            println!("  vertex step {} ({:.2}, {:.2})", t.step, t.x, t.y);
        }
    }
    println!("success={} steps={} path={:.2} direct={:.2} coverage={:.2} searched={:.2}", r.success, r.steps, r.path_length, r.direct_path, r.coverage, r.search_coverage);
}
