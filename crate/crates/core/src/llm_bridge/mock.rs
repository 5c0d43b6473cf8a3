//! Offline stand-ins for a chat endpoint: a scripted local HTTP server for
//! client tests and a deterministic in-process backend for episodes.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::client::{ChatBackend, ChatMessage, ChatReply, LlmError};
use super::parse::parse_bracket_list;
use crate::reasoning::enforce_word_bounds;

/// One scripted response. `content` is shorthand for a chat-completion body
/// carrying that assistant text; otherwise `body` is sent as-is (strings raw,
/// anything else as JSON).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CannedResponse {
    pub status: u16,
    #[serde(default)]
    pub body: Option<serde_json::Value>,
    #[serde(default)]
    pub content: Option<String>,
}

impl CannedResponse {
    pub fn ok(content: &str) -> Self {
        Self { status: 200, body: None, content: Some(content.to_string()) }
    }

    pub fn status(status: u16) -> Self {
        Self { status, body: Some(json!({"error": {"message": "scripted failure"}})), content: None }
    }

    fn payload(&self) -> String {
        match (&self.content, &self.body) {
            (Some(c), _) => json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": c}}]}).to_string(),
            (None, Some(serde_json::Value::String(s))) => s.clone(),
            (None, Some(v)) => v.to_string(),
            (None, None) => String::new(),
        }
    }
}

/// Parses a fixture file: a JSON array of canned responses, served in order.
pub fn load_fixture(text: &str) -> Result<Vec<CannedResponse>, String> {
    serde_json::from_str(text).map_err(|e| e.to_string())
}

/// Local HTTP server that answers each request with the next canned
/// response; once the script runs out it answers 500.
pub struct MockServer {
    addr: String,
    requests: Arc<Mutex<Vec<String>>>,
    stop: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl MockServer {
    pub fn start(responses: Vec<CannedResponse>) -> std::io::Result<Self> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?.to_string();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let stop = Arc::new(AtomicBool::new(false));
        let (req_log, stop_flag) = (requests.clone(), stop.clone());
        let handle = std::thread::spawn(move || {
            let mut script = responses.into_iter();
            for stream in listener.incoming() {
                if stop_flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                let canned = script.next().unwrap_or_else(|| CannedResponse::status(500));
                if let Ok(body) = serve(stream, &canned) {
                    req_log.lock().expect("request log").push(body);
                }
            }
        });
        Ok(Self { addr, requests, stop, handle: Some(handle) })
    }

    pub fn url(&self) -> String {
        format!("http://{}/v1", self.addr)
    }

    /// Request bodies received so far.
    pub fn requests(&self) -> Vec<String> {
        self.requests.lock().expect("request log").clone()
    }
}

impl Drop for MockServer {
    fn drop(&mut self) {
        self.stop.store(true, Ordering::SeqCst);
        let _ = TcpStream::connect(&self.addr);
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve(stream: TcpStream, canned: &CannedResponse) -> std::io::Result<String> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut content_length = 0usize;
    let mut line = String::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            break;
        }
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            if k.eq_ignore_ascii_case("content-length") {
                content_length = v.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    let payload = canned.payload();
    let mut out = stream;
    write!(
        out,
        "HTTP/1.1 {} Scripted\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        canned.status,
        payload.len(),
        payload
    )?;
    out.flush()?;
    Ok(String::from_utf8_lossy(&body).into_owned())
}

/// Deterministic in-process backend that fills each prompt's expected
/// answer format from the prompt itself. Used for `llm` episodes without a
/// live endpoint.
#[derive(Clone, Debug, Default)]
pub struct HeuristicBackend;

impl ChatBackend for HeuristicBackend {
    fn complete(&self, messages: &[ChatMessage]) -> Result<ChatReply, LlmError> {
        let prompt = &messages.last().ok_or_else(|| LlmError::BadResponse("empty conversation".into()))?.content;
        Ok(ChatReply { text: heuristic_answer(prompt), attempts: 1, backoffs: Vec::new() })
    }
}

struct ListedPoint {
    id: usize,
    kind: String,
    label: String,
    new: bool,
    dist: f64,
}

fn listed_points(prompt: &str) -> Vec<ListedPoint> {
    prompt
        .lines()
        .filter_map(|l| {
            let (id, rest) = l.split_once(") kind=")?;
            let id = id.trim().parse().ok()?;
            let field = |name: &str| -> Option<String> {
                let start = rest.find(&format!(" {name}="))? + name.len() + 2;
                let tail = &rest[start..];
                // labels may contain spaces; they end at the next " new="
                let end = if name == "label" { tail.find(" new=")? } else { tail.find(' ').unwrap_or(tail.len()) };
                Some(tail[..end].to_string())
            };
            Some(ListedPoint {
                id,
                kind: rest.split(' ').next()?.to_string(),
                label: field("label")?,
                new: field("new")? == "1",
                dist: field("dist")?.parse().ok()?,
            })
        })
        .collect()
}

fn heuristic_answer(prompt: &str) -> String {
    if prompt.contains("The point I have selected is point number") {
        let target = prompt
            .split("The robot has been instructed to search for these objects:")
            .nth(1)
            .and_then(|s| parse_bracket_list(s).ok())
            .and_then(|l| l.into_iter().next())
            .unwrap_or_default();
        let pts = listed_points(prompt);
        let by_dist = |a: &&ListedPoint, b: &&ListedPoint| a.dist.total_cmp(&b.dist).then(b.id.cmp(&a.id));
        let pick = pts
            .iter()
            .filter(|p| p.kind == "object" && p.label == target && p.dist > 2.0)
            .min_by(by_dist)
            .or_else(|| pts.iter().filter(|p| p.new && p.kind != "object").max_by(by_dist))
            .or_else(|| pts.iter().filter(|p| p.kind == "frontier").max_by(by_dist))
            .or_else(|| pts.iter().max_by(by_dist));
        let id = pick.map_or(1, |p| p.id);
        let why = match pick {
            Some(p) if p.kind == "object" => format!("is a detected {} I have not reached yet", p.label),
            Some(p) if p.new => "is newly discovered and far from where I have been".to_string(),
            _ => "is the farthest option and should reveal new space".to_string(),
        };
        return format!(
            "I need to select a waypoint from a numbered list of graph points, frontier points and object points. \
             The point I have selected is point number: {id}. I am selecting this point because I believe it makes \
             strategic sense to get me closer to solving my navigation task. My environment can be described as an \
             indoor space with several rooms. My reasoning is that this point {why}."
        );
    }
    if prompt.contains("first entry must be the goal object") {
        let goal = prompt
            .split("fulfill the goal:")
            .nth(1)
            .and_then(|s| s.lines().next())
            .map(|q| q.trim().rsplit(" the ").next().unwrap_or("").trim_end_matches('.').trim().to_string())
            .unwrap_or_default();
        return format!("[\"{goal}\", \"chair\", \"table\"]");
    }
    if prompt.contains("VQA") {
        return "[\"Is there a door visible?\", \"Is this a hallway or a room?\", \"Are there tables or desks in the image?\"]"
            .to_string();
    }
    if let Some(prior) = prompt.split("\n\n").nth(1).filter(|_| prompt.contains("Compress this output")) {
        let words: Vec<&str> = prior.split_whitespace().take(80).collect();
        return enforce_word_bounds(&words.join(" "), prior);
    }
    "I am not sure how to answer that.".to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heuristic_prefers_new_far_points() {
        let prompt = "The robot has been instructed to search for these objects:\n[\"cup\"]\n\
                      1) kind=graph label=- new=0 x=1.00 y=1.00 z=0.0 dist=9.00 conf=-\n\
                      2) kind=graph label=- new=1 x=1.00 y=1.00 z=0.0 dist=3.00 conf=-\n\
                      3) kind=frontier label=- new=1 x=1.00 y=1.00 z=0.0 dist=5.00 conf=-\n\
                      The point I have selected is point number: [..]";
        assert!(heuristic_answer(prompt).contains("point number: 3."));
        let with_obj = prompt.replace("3) kind=frontier label=-", "3) kind=object label=cup");
        assert!(heuristic_answer(&with_obj).contains("point number: 3."));
    }

    #[test]
    fn canned_content_shorthand() {
        let c = CannedResponse::ok("hello");
        assert_eq!(super::super::client::extract_content(&c.payload()).as_deref(), Some("hello"));
    }
}
