//! Prompt templates with `*INSERT_..*` placeholders.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TemplateError {
    #[error("missing substitution for placeholder {0}")]
    MissingPlaceholder(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TemplateId {
    VqaQuestions,
    ObjectLabels,
    Explore,
    Compress,
    ModelAddendumA,
    ModelAddendumB,
}

impl TemplateId {
    pub const ALL: [TemplateId; 6] = [
        TemplateId::VqaQuestions,
        TemplateId::ObjectLabels,
        TemplateId::Explore,
        TemplateId::Compress,
        TemplateId::ModelAddendumA,
        TemplateId::ModelAddendumB,
    ];

    pub fn text(&self) -> &'static str {
        match self {
            TemplateId::VqaQuestions => include_str!("../../assets/templates/vqa_questions.txt"),
            TemplateId::ObjectLabels => include_str!("../../assets/templates/object_labels.txt"),
            TemplateId::Explore => include_str!("../../assets/templates/explore.txt"),
            TemplateId::Compress => include_str!("../../assets/templates/compress.txt"),
            TemplateId::ModelAddendumA => include_str!("../../assets/templates/model_addendum_a.txt"),
            TemplateId::ModelAddendumB => include_str!("../../assets/templates/model_addendum_b.txt"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PromptTemplate {
    pub id: Option<TemplateId>,
    pub text: String,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Span {
    start: usize,
    end: usize,
}

/// Placeholder occurrences in order: `*INSERT_` followed by `[A-Z_]+` and a
/// closing `*`.
fn scan(text: &str) -> Vec<Span> {
    const OPEN: &str = "*INSERT_";
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut from = 0;
    while let Some(off) = text[from..].find(OPEN) {
        let start = from + off;
        let mut j = start + OPEN.len();
        while j < bytes.len() && (bytes[j].is_ascii_uppercase() || bytes[j] == b'_') {
            j += 1;
        }
        if j < bytes.len() && bytes[j] == b'*' {
            out.push(Span { start, end: j + 1 });
            from = j + 1;
        } else {
            from = start + 1;
        }
    }
    out
}

impl PromptTemplate {
    pub fn builtin(id: TemplateId) -> Self {
        Self { id: Some(id), text: id.text().to_string() }
    }

    pub fn from_text(text: impl Into<String>) -> Self {
        Self { id: None, text: text.into() }
    }

    /// Distinct placeholder names (without asterisks) in first-seen order.
    pub fn placeholders(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for s in scan(&self.text) {
            let name = &self.text[s.start + 1..s.end - 1];
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        }
        names
    }

    /// Replaces every placeholder in one pass; substituted text is never
    /// rescanned. Keys are placeholder names without asterisks.
    pub fn render(&self, subs: &BTreeMap<String, String>) -> Result<String, TemplateError> {
        let mut out = String::with_capacity(self.text.len() * 2);
        let mut last = 0;
        for s in scan(&self.text) {
            let name = &self.text[s.start + 1..s.end - 1];
            let value = subs.get(name).ok_or_else(|| TemplateError::MissingPlaceholder(name.to_string()))?;
            out.push_str(&self.text[last..s.start]);
            out.push_str(value);
            last = s.end;
        }
        out.push_str(&self.text[last..]);
        Ok(out)
    }
}

/// Renders a list of strings the way the prompts ask for them:
/// `["a", "b"]`.
pub fn python_list(items: &[String]) -> String {
    let quoted: Vec<String> = items.iter().map(|s| format!("\"{}\"", s.replace('"', "'"))).collect();
    format!("[{}]", quoted.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn placeholder_names() {
        let t = PromptTemplate::builtin(TemplateId::ObjectLabels);
        assert_eq!(t.placeholders(), vec!["INSERT_SCENE_DESCRIPTION", "INSERT_QUERY_HERE"]);
    }

    #[test]
    fn missing_placeholder_is_named() {
        let t = PromptTemplate::builtin(TemplateId::VqaQuestions);
        assert_eq!(t.render(&BTreeMap::new()), Err(TemplateError::MissingPlaceholder("INSERT_QUERY_HERE".into())));
    }

    #[test]
    fn substitution_is_single_pass() {
        let t = PromptTemplate::from_text("a *INSERT_X* b");
        let subs = BTreeMap::from([("INSERT_X".to_string(), "*INSERT_Y*".to_string())]);
        assert_eq!(t.render(&subs).unwrap(), "a *INSERT_Y* b");
    }

    #[test]
    fn lone_asterisks_are_not_placeholders() {
        let t = PromptTemplate::from_text("*INSERT_lower* and *INSERT_ unfinished");
        assert!(t.placeholders().is_empty());
    }
}
