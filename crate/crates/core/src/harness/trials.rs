//! Repeated trials, summary statistics and reasoner comparison.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::{run_episode, EpisodeConfig, EpisodeResult};
use super::HarnessError;
use crate::reasoning::ReasonerKind;

/// Quantile by linear interpolation between order statistics (type 7).
/// `sorted` must be ascending and nonempty.
pub fn quantile7(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Path length statistics over a nonempty sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathStats {
    pub mean: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub min: f64,
    pub max: f64,
}

impl PathStats {
    pub fn of(lengths: &[f64]) -> Option<Self> {
        if lengths.is_empty() {
            return None;
        }
        let mut v = lengths.to_vec();
        v.sort_by(f64::total_cmp);
        Some(Self {
            mean: v.iter().sum::<f64>() / v.len() as f64,
            median: quantile7(&v, 0.5),
            q1: quantile7(&v, 0.25),
            q3: quantile7(&v, 0.75),
            min: v[0],
            max: v[v.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub env: String,
    pub task: String,
    pub reasoner: ReasonerKind,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub timeouts: usize,
    pub direct_path: f64,
    /// Over successful trials only; none when every trial timed out.
    pub path: Option<PathStats>,
}

impl TrialSummary {
    pub fn from_results(results: &[EpisodeResult]) -> Option<Self> {
        let first = results.first()?;
        let found: Vec<f64> = results.iter().filter(|r| r.success).map(|r| r.path_length).collect();
        Some(Self {
            env: first.env.clone(),
            task: first.task.clone(),
            reasoner: first.reasoner,
            trials: results.len(),
            successes: found.len(),
            success_rate: found.len() as f64 / results.len() as f64,
            timeouts: results.iter().filter(|r| r.timeout).count(),
            direct_path: first.direct_path,
            path: PathStats::of(&found),
        })
    }
}

/// Runs `trials` episodes with seeds `base.seed + i`. Results are sorted by
/// seed, so parallel and serial runs are identical.
pub fn run_trials(
    base: &EpisodeConfig,
    trials: usize,
    parallel: bool,
) -> Result<(TrialSummary, Vec<EpisodeResult>), HarnessError> {
    if trials == 0 {
        return Err(HarnessError::Config("trials must be at least 1".into()));
    }
    let configs: Vec<EpisodeConfig> = (0..trials as u64)
        .map(|i| EpisodeConfig { seed: base.seed + i, ..base.clone() })
        .collect();
    let mut results: Vec<EpisodeResult> = if parallel {
        configs.par_iter().map(run_episode).collect::<Result<_, _>>()?
    } else {
        configs.iter().map(run_episode).collect::<Result<_, _>>()?
    };
    results.sort_by_key(|r| r.seed);
    let summary = TrialSummary::from_results(&results).expect("at least one trial");
    Ok((summary, results))
}

/// A list of (environment, task) pairs to compare reasoners on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Suite {
    pub entries: Vec<SuiteEntry>,
    #[serde(default = "default_reasoners")]
    pub reasoners: Vec<ReasonerKind>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteEntry {
    pub env: String,
    pub task: String,
}

fn default_reasoners() -> Vec<ReasonerKind> {
    vec![ReasonerKind::Vefep, ReasonerKind::Scripted]
}

fn default_trials() -> usize {
    15
}

impl Suite {
    /// Every bundled task with the default reasoners.
    pub fn bundled() -> Self {
        let mut entries = Vec::new();
        for name in crate::world::BUNDLED {
            let env = crate::world::EnvironmentSpec::bundled(name).expect("bundled environments load");
            for t in env.tasks() {
                entries.push(SuiteEntry { env: (*name).to_string(), task: t.id.clone() });
            }
        }
        Self { entries, reasoners: default_reasoners(), trials: default_trials(), seed: 0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub env: String,
    pub task: String,
    pub direct_path: f64,
    pub summaries: Vec<TrialSummary>,
}

impl ComparisonRow {
    pub fn summary(&self, kind: ReasonerKind) -> Option<&TrialSummary> {
        self.summaries.iter().find(|s| s.reasoner == kind)
    }
}

/// Runs every suite entry with every reasoner. `configure` adjusts the base
/// configuration of each entry before trials start.
pub fn compare_reasoners(
    suite: &Suite,
    parallel: bool,
    configure: &dyn Fn(&mut EpisodeConfig),
) -> Result<(Vec<ComparisonRow>, Vec<EpisodeResult>), HarnessError> {
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for entry in &suite.entries {
        let env = crate::world::resolve_environment(&entry.env)?;
        let mut summaries = Vec::new();
        let mut direct_path = f64::INFINITY;
        for &kind in &suite.reasoners {
            let mut cfg = EpisodeConfig::new(env.clone(), &entry.task, kind, suite.seed);
            configure(&mut cfg);
            let (summary, results) = run_trials(&cfg, suite.trials, parallel)?;
            direct_path = summary.direct_path;
            summaries.push(summary);
            all.extend(results);
        }
        rows.push(ComparisonRow { env: env.name.clone(), task: entry.task.clone(), direct_path, summaries });
    }
    Ok((rows, all))
}

/// Fixed-width text table of a comparison. Path statistics cover
/// successful trials.
pub fn format_comparison(rows: &[ComparisonRow]) -> String {
    let mut s = format!(
        "{:<10} {:<5} {:>7} {:<9} {:>8} {:>8} {:>8} {:>8} {:>5} {:>8}\n",
        "env", "task", "direct", "reasoner", "mean", "median", "q1", "q3", "found", "timeouts"
    );
    for r in rows {
        for t in &r.summaries {
            let cols: [String; 4] = match &t.path {
                Some(p) => [p.mean, p.median, p.q1, p.q3].map(|v| format!("{v:.2}")),
                None => std::array::from_fn(|_| "-".to_string()),
            };
            s.push_str(&format!(
                "{:<10} {:<5} {:>7.2} {:<9} {:>8} {:>8} {:>8} {:>8} {:>2}/{:<2} {:>8}\n",
                r.env,
                r.task,
                r.direct_path,
                t.reasoner.as_str(),
                cols[0],
                cols[1],
                cols[2],
                cols[3],
                t.successes,
                t.trials,
                t.timeouts
            ));
        }
    }
    s
}
