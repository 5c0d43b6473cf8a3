//! Prompt assembly, chat transport, completion parsing and the
//! language-model implementations of label generation, waypoint selection
//! and state compression.

pub mod client;
pub mod describe;
pub mod mock;
pub mod parse;
pub mod templates;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::explore_graph::format_point_list;
use crate::mapping::OccupancyGrid;
use crate::reasoning::{enforce_word_bounds, scripted_select, AffinityTable, DecisionContext, ReasonerChoice, ReasoningParams};

pub use client::{call_chat, ChatBackend, ChatExchange, ChatMessage, ChatReply, HttpBackend, LlmError};
pub use describe::generate_descriptions;
pub use mock::{CannedResponse, HeuristicBackend, MockServer};
pub use parse::{parse_bracket_list, parse_waypoint_form, ParseError, ParsedForm};
pub use templates::{python_list, PromptTemplate, TemplateError, TemplateId};

/// Which model-specific addendum is appended to the exploration prompt.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AddendumStyle {
    /// GPT-style instructions.
    #[default]
    A,
    /// Claude-style instructions.
    B,
}

impl AddendumStyle {
    pub fn template(&self) -> TemplateId {
        match self {
            AddendumStyle::A => TemplateId::ModelAddendumA,
            AddendumStyle::B => TemplateId::ModelAddendumB,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LlmConfig {
    pub model: String,
    pub addendum: AddendumStyle,
    pub temperature: f64,
    pub timeout: f64,
    pub max_retries: u32,
    /// Overrides `COGX_LLM_BASE_URL`.
    pub endpoint: Option<String>,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            model: "gpt-3.5-turbo-0125".into(),
            addendum: AddendumStyle::A,
            temperature: 0.2,
            timeout: 60.0,
            max_retries: 3,
            endpoint: None,
        }
    }
}

const CORRECTION: &str = "Your previous answer could not be used. Fill out the form exactly as written and choose a point number from the list above.";

fn subs(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

/// The exploration prompt for a decision context.
pub fn render_explore(ctx: &DecisionContext, addendum: AddendumStyle) -> Result<String, TemplateError> {
    let pairs = [
        ("INSERT_QUERY_HERE", ctx.task.query.clone()),
        ("INSERT_CURRENT_TIME", format!("{:.1}", ctx.sim_seconds)),
        ("INSERT_CURRENT_POSITION", format!("x={:.2} y={:.2} z=0.0", ctx.pose.x, ctx.pose.y)),
        ("INSERT_SCENE_DESCRIPTION", ctx.description.clone()),
        ("INSERT_OBJECT_LIST", python_list(&ctx.active_labels)),
        ("INSERT_FRONTIER_OBJECT_POINT_NUMBERED_LIST", format_point_list(&ctx.candidates).trim_end().to_string()),
        ("INSERT_TOTAL_CALLS", ctx.total_calls.to_string()),
        ("INSERT_MEMORY_LENGTH", ctx.memory.len().to_string()),
        ("INSERT_PRIOR_STATES", ctx.memory.render()),
        ("INSERT_INTERRUPT_DESCRIPTION", ctx.interrupt_note.clone()),
        ("INSERT_SPECIFIC_MODEL_INSTRUCTIONS", addendum.template().text().trim_end().to_string()),
    ];
    PromptTemplate::builtin(TemplateId::Explore).render(&subs(&pairs))
}

pub fn render_labels(description: &str, query: &str) -> Result<String, TemplateError> {
    let pairs = [("INSERT_SCENE_DESCRIPTION", description.to_string()), ("INSERT_QUERY_HERE", query.to_string())];
    PromptTemplate::builtin(TemplateId::ObjectLabels).render(&subs(&pairs))
}

pub fn render_questions(query: &str) -> Result<String, TemplateError> {
    PromptTemplate::builtin(TemplateId::VqaQuestions).render(&subs(&[("INSERT_QUERY_HERE", query.to_string())]))
}

pub fn render_compress(prior_output: &str) -> Result<String, TemplateError> {
    PromptTemplate::builtin(TemplateId::Compress).render(&subs(&[("INSERT_PRIOR_OUTPUT", prior_output.to_string())]))
}

/// Puts the target first, drops duplicates and blanks, and keeps at most
/// `max_len` labels.
pub fn normalize_labels(labels: Vec<String>, target: &str, max_len: usize) -> Vec<String> {
    let mut out = vec![target.to_string()];
    for l in labels {
        let l = l.trim().to_lowercase();
        if !l.is_empty() && !out.contains(&l) {
            out.push(l);
        }
    }
    out.truncate(max_len.max(1));
    out
}

/// Detector labels from the label prompt; falls back to the target alone.
pub fn llm_labels(backend: &dyn ChatBackend, description: &str, query: &str, target: &str, max_len: usize) -> Vec<String> {
    let parsed = render_labels(description, query)
        .ok()
        .and_then(|p| backend.complete(&[ChatMessage::user(p)]).ok())
        .and_then(|r| parse_bracket_list(&r.text).ok())
        .unwrap_or_default();
    normalize_labels(parsed, target, max_len)
}

/// Three to five VQA questions, or none if the reply is unusable.
pub fn llm_questions(backend: &dyn ChatBackend, query: &str) -> Vec<String> {
    render_questions(query)
        .ok()
        .and_then(|p| backend.complete(&[ChatMessage::user(p)]).ok())
        .and_then(|r| parse_bracket_list(&r.text).ok())
        .filter(|l| (3..=5).contains(&l.len()))
        .unwrap_or_default()
}

/// Outcome of a language-model decision.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlmDecision {
    pub choice: ReasonerChoice,
    /// The scripted reasoner chose because both model answers were unusable.
    pub fallback: bool,
    pub attempts: u32,
    /// Raw text of the accepted answer.
    pub raw: Option<String>,
}

fn try_parse(ctx: &DecisionContext, text: &str) -> Option<ReasonerChoice> {
    let form = parse_waypoint_form(text).ok()?;
    ctx.candidate(form.point_number)?;
    Some(ReasonerChoice {
        point_id: form.point_number,
        environment_description: if form.environment_description.is_empty() {
            ctx.description.clone()
        } else {
            form.environment_description
        },
        justification: form.reasoning,
    })
}

/// Asks the model for a waypoint; on an unusable answer asks once more with
/// a corrective note, then falls back to the scripted reasoner.
pub fn llm_select(
    ctx: &DecisionContext,
    grid: &OccupancyGrid,
    backend: &dyn ChatBackend,
    config: &LlmConfig,
    table: &AffinityTable,
    params: &ReasoningParams,
) -> LlmDecision {
    let mut attempts = 0;
    if let Ok(prompt) = render_explore(ctx, config.addendum) {
        for round in 0..2 {
            let text = if round == 0 { prompt.clone() } else { format!("{prompt}\n\n{CORRECTION}") };
            attempts += 1;
            match backend.complete(&[ChatMessage::user(text)]) {
                Ok(reply) => {
                    if let Some(choice) = try_parse(ctx, &reply.text) {
                        return LlmDecision { choice, fallback: false, attempts, raw: Some(reply.text) };
                    }
                    log::info!("unusable waypoint answer on attempt {attempts}");
                }
                Err(e) => log::warn!("chat call failed: {e}"),
            }
        }
    }
    log::warn!("falling back to the scripted reasoner");
    let choice = scripted_select(ctx, grid, table, params).unwrap_or_else(|_| ReasonerChoice {
        point_id: 1,
        environment_description: ctx.description.clone(),
        justification: "No usable answer; taking the first point.".into(),
    });
    LlmDecision { choice, fallback: true, attempts, raw: None }
}

/// Compresses a model answer into a 50 to 100 word state, falling back to
/// extractive truncation when the call fails.
pub fn llm_compress(prior_output: &str, backend: &dyn ChatBackend) -> String {
    let reply = render_compress(prior_output).ok().and_then(|p| backend.complete(&[ChatMessage::user(p)]).ok());
    match reply {
        Some(r) => enforce_word_bounds(&r.text, prior_output),
        None => enforce_word_bounds(prior_output, ""),
    }
}
