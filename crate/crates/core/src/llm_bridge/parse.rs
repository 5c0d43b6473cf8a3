//! Tolerant parsers for model completions.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("unparseable completion: {0}")]
    Unparseable(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParsedForm {
    pub point_number: usize,
    pub environment_description: String,
    pub reasoning: String,
}

/// First well-formed `[...]` list of quoted strings in `text`. Both quote
/// styles are accepted; entries are trimmed.
pub fn parse_bracket_list(text: &str) -> Result<Vec<String>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    for (start, _) in chars.iter().enumerate().filter(|(_, c)| **c == '[') {
        if let Some(items) = list_at(&chars, start + 1) {
            return Ok(items);
        }
    }
    Err(ParseError::Unparseable("no bracketed list of quoted strings".into()))
}

fn list_at(chars: &[char], mut i: usize) -> Option<Vec<String>> {
    let skip_ws = |i: &mut usize| {
        while *i < chars.len() && chars[*i].is_whitespace() {
            *i += 1;
        }
    };
    let mut items = Vec::new();
    skip_ws(&mut i);
    if chars.get(i) == Some(&']') {
        return None;
    }
    loop {
        skip_ws(&mut i);
        let quote = *chars.get(i)?;
        if quote != '"' && quote != '\'' {
            return None;
        }
        i += 1;
        let mut item = String::new();
        loop {
            let c = *chars.get(i)?;
            i += 1;
            if c == '\\' {
                item.push(*chars.get(i)?);
                i += 1;
            } else if c == quote {
                break;
            } else {
                item.push(c);
            }
        }
        items.push(item.trim().to_string());
        skip_ws(&mut i);
        match chars.get(i)? {
            ',' => {
                i += 1;
                skip_ws(&mut i);
                // trailing comma before the closing bracket
                if chars.get(i) == Some(&']') {
                    return Some(items);
                }
            }
            ']' => return Some(items),
            _ => return None,
        }
    }
}

fn find_ci(hay: &str, needle: &str, from: usize) -> Option<usize> {
    hay.get(from..)?.to_ascii_lowercase().find(&needle.to_ascii_lowercase()).map(|i| i + from)
}

/// Byte range of the first "point number", in any case and with any run of
/// whitespace between the two words.
fn find_point_number(text: &str) -> Option<(usize, usize)> {
    let lower = text.to_ascii_lowercase();
    let mut from = 0;
    while let Some(i) = lower.get(from..)?.find("point").map(|i| i + from) {
        let rest = &lower[i + "point".len()..];
        let gap = rest.len() - rest.trim_start().len();
        if gap > 0 && rest[gap..].starts_with("number") {
            return Some((i, i + "point".len() + gap + "number".len()));
        }
        from = i + 1;
    }
    None
}

/// Reads the filled-in waypoint form. The point number is the first integer
/// after the phrase "point number"; bracket residue and punctuation around it
/// are ignored.
pub fn parse_waypoint_form(text: &str) -> Result<ParsedForm, ParseError> {
    let (anchor, end) = find_point_number(text).ok_or_else(|| ParseError::Unparseable("no \"point number\" phrase".into()))?;
    let after = &text[end..];
    let digits_start = after
        .char_indices()
        .find(|(_, c)| c.is_ascii_digit())
        .map(|(i, _)| i)
        .ok_or_else(|| ParseError::Unparseable("no integer after \"point number\"".into()))?;
    // only separators may sit between the phrase and the number
    let gap = &after[..digits_start];
    if gap.chars().any(|c| c.is_alphabetic()) && !gap.to_ascii_lowercase().trim_start_matches([' ', ':']).starts_with("is") {
        return Err(ParseError::Unparseable("text between \"point number\" and the integer".into()));
    }
    let digits: String = after[digits_start..].chars().take_while(|c| c.is_ascii_digit()).collect();
    let point_number: usize = digits.parse().map_err(|_| ParseError::Unparseable("integer out of range".into()))?;
    if point_number == 0 {
        return Err(ParseError::Unparseable("point number must be at least 1".into()));
    }
    let environment_description = find_ci(text, "described as", anchor)
        .map(|i| {
            let rest = &text[i + "described as".len()..];
            let end = rest.find('.').unwrap_or(rest.len());
            clean(&rest[..end])
        })
        .unwrap_or_default();
    // the reasoning sentence is the last "this point" of the form
    let reasoning = text
        .to_ascii_lowercase()
        .rfind("this point")
        .filter(|&i| i > anchor)
        .map(|i| clean(&text[i + "this point".len()..]))
        .unwrap_or_default();
    Ok(ParsedForm { point_number, environment_description, reasoning })
}

fn clean(s: &str) -> String {
    s.trim().trim_matches(|c: char| c == '[' || c == ']' || c == ':' || c.is_whitespace()).trim().to_string()
}
