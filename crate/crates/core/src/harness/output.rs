//! JSONL episode logs, CSV summaries and SVG route plots.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::episode::EpisodeResult;
use super::trials::TrialSummary;
use super::HarnessError;
use crate::world::{targets_of, EnvironmentSpec, Terrain};

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

/// One JSON object per line, in the given order.
pub fn write_jsonl(path: &Path, results: &[EpisodeResult]) -> Result<(), HarnessError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    for r in results {
        let line = serde_json::to_string(r).expect("results serialize");
        writeln!(w, "{line}").map_err(io_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_jsonl(path: &Path) -> Result<Vec<EpisodeResult>, HarnessError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let r = serde_json::from_str(&line).map_err(|e| HarnessError::Format { line: i + 1, message: e.to_string() })?;
        out.push(r);
    }
    Ok(out)
}

const SUMMARY_HEADER: [&str; 14] = [
    "env", "task", "reasoner", "trials", "successes", "success_rate", "timeouts", "direct_path", "mean", "median", "q1", "q3",
    "min", "max",
];

/// One row per summary, with a header row even when there are none. Path
/// columns are empty when no trial succeeded.
pub fn write_summary_csv(path: &Path, summaries: &[TrialSummary]) -> Result<(), HarnessError> {
    let csv_err = |e: csv::Error| HarnessError::Io { path: path.display().to_string(), source: std::io::Error::other(e) };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for s in summaries {
        let stats = match &s.path {
            Some(p) => [p.mean, p.median, p.q1, p.q3, p.min, p.max].map(|v| format!("{v:.3}")),
            None => std::array::from_fn(|_| String::new()),
        };
        let mut row = vec![
            s.env.clone(),
            s.task.clone(),
            s.reasoner.as_str().to_string(),
            s.trials.to_string(),
            s.successes.to_string(),
            format!("{:.4}", s.success_rate),
            s.timeouts.to_string(),
            format!("{:.3}", s.direct_path),
        ];
        row.extend(stats);
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(io_err(path))
}

const PX_PER_CELL: f64 = 4.0;

/// Top-down plot of the floor plan, objects, chosen waypoints and route.
pub fn render_svg(env: &EnvironmentSpec, result: &EpisodeResult) -> String {
    let scale = PX_PER_CELL / env.cell_size;
    let w = env.width as f64 * PX_PER_CELL;
    let h = env.height as f64 * PX_PER_CELL;
    let sx = |x: f64| x * scale;
    let sy = |y: f64| h - y * scale;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.0}" height="{h:.0}" viewBox="0 0 {w:.0} {h:.0}">"#
    );
    let _ = writeln!(s, r##"<rect x="0" y="0" width="{w:.0}" height="{h:.0}" fill="#ffffff"/>"##);
    // walls as horizontal runs
    for r in 0..env.height {
        let mut c = 0;
        while c < env.width {
            let t = env.terrain((c, r));
            if t == Terrain::Free {
                c += 1;
                continue;
            }
            let start = c;
            while c < env.width && env.terrain((c, r)) == t {
                c += 1;
            }
            let fill = if t == Terrain::Wall { "#333333" } else { "#999999" };
            let _ = writeln!(
                s,
                r#"<rect x="{:.0}" y="{:.0}" width="{:.0}" height="{:.0}" fill="{fill}"/>"#,
                start as f64 * PX_PER_CELL,
                h - (r + 1) as f64 * PX_PER_CELL,
                (c - start) as f64 * PX_PER_CELL,
                PX_PER_CELL
            );
        }
    }
    let targets: Vec<&str> = env
        .task(&result.task)
        .map(|t| targets_of(env, t).into_iter().map(|o| o.id.as_str()).collect())
        .unwrap_or_default();
    for o in &env.objects {
        let fill = if targets.contains(&o.id.as_str()) { "#d62728" } else { "#7f7f7f" };
        let _ = writeln!(
            s,
            r#"<circle cx="{:.1}" cy="{:.1}" r="5" fill="{fill}"><title>{}</title></circle>"#,
            sx(o.position.x),
            sy(o.position.y),
            o.id
        );
    }
    if !result.trajectory.is_empty() {
        let pts: Vec<String> =
            result.trajectory.iter().map(|p| format!("{:.1},{:.1}", sx(p.x), sy(p.y))).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
            pts.join(" ")
        );
        let p0 = &result.trajectory[0];
        let _ = writeln!(s, r##"<circle cx="{:.1}" cy="{:.1}" r="6" fill="#2ca02c"/>"##, sx(p0.x), sy(p0.y));
    }
    for d in &result.decisions {
        let _ = writeln!(
            s,
            r##"<rect x="{:.1}" y="{:.1}" width="6" height="6" fill="#ff7f0e"/>"##,
            sx(d.point.x) - 3.0,
            sy(d.point.y) - 3.0
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="4" y="14" font-family="monospace" font-size="12" fill="#000000">{} {} {} seed={} path={:.2} {}</text>"##,
        result.env,
        result.task,
        result.reasoner.as_str(),
        result.seed,
        result.path_length,
        if result.success { "found" } else { "timeout" }
    );
    s.push_str("</svg>\n");
    s
}
