//! Episode runner, trial aggregation and result output.

pub mod episode;
pub mod output;
pub mod trials;

use thiserror::Error;

use crate::world::{EnvError, WorldError};

pub use episode::{run_episode, DecisionLog, EpisodeConfig, EpisodeResult, LoggedPoint, TrajectoryPoint, SCHEMA_VERSION};
pub use output::{read_jsonl, render_svg, write_jsonl, write_summary_csv};
pub use trials::{compare_reasoners, format_comparison, quantile7, run_trials, ComparisonRow, PathStats, Suite, SuiteEntry, TrialSummary};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed result line {line}: {message}")]
    Format { line: usize, message: String },
}
