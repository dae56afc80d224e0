//! Client for an external sentiment service, fronted by an append-only
//! on-disk cache keyed by the SHA-256 of the review text.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::lexicon::{tokenize, SentimentScore};
use super::{Scorer, SentimentError};

pub const ENDPOINT_ENV: &str = "SENTIMENT_ENDPOINT";

/// Sends one JSON request body and returns the raw reply body.
pub trait Transport: Send + Sync {
    fn post_json(&self, endpoint: &str, body: &str) -> Result<String, SentimentError>;
}

pub struct HttpTransport {
    client: reqwest::blocking::Client,
}

impl HttpTransport {
    pub fn new(timeout: Duration) -> Result<Self, SentimentError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| SentimentError::Network(e.to_string()))?;
        Ok(HttpTransport { client })
    }
}

impl Transport for HttpTransport {
    fn post_json(&self, endpoint: &str, body: &str) -> Result<String, SentimentError> {
        let resp = self
            .client
            .post(endpoint)
            .header(reqwest::header::CONTENT_TYPE, "application/json")
            .body(body.to_string())
            .send()
            .map_err(|e| SentimentError::Network(e.to_string()))?;
        let status = resp.status();
        let text = resp
            .text()
            .map_err(|e| SentimentError::Network(e.to_string()))?;
        if !status.is_success() {
            return Err(SentimentError::Network(format!("HTTP {status}: {text}")));
        }
        Ok(text)
    }
}

#[derive(Serialize, Deserialize)]
struct CacheLine {
    hash: String,
    score: f64,
}

#[derive(Serialize)]
struct Request<'a> {
    text: &'a str,
}

#[derive(Deserialize)]
struct Reply {
    score: serde_json::Value,
}

pub fn content_hash(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

/// Append-only JSONL cache of `{hash, score}` lines.
pub struct ScoreCache {
    path: PathBuf,
    scores: RwLock<HashMap<String, f64>>,
    file: Mutex<File>,
}

impl ScoreCache {
    pub fn open(path: &Path) -> Result<Self, SentimentError> {
        let io = |e: std::io::Error| SentimentError::Cache(format!("{}: {e}", path.display()));
        let mut scores = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(io)?);
            for (i, line) in reader.lines().enumerate() {
                let line = line.map_err(io)?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheLine>(&line) {
                    Ok(l) => {
                        scores.insert(l.hash, l.score);
                    }
                    // a torn final write is skipped rather than poisoning the cache
                    Err(e) => log::warn!("{}:{}: skipping cache line: {e}", path.display(), i + 1),
                }
            }
        }
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(io)?;
        Ok(ScoreCache {
            path: path.to_path_buf(),
            scores: RwLock::new(scores),
            file: Mutex::new(file),
        })
    }

    pub fn get(&self, hash: &str) -> Option<f64> {
        self.scores.read().unwrap().get(hash).copied()
    }

    pub fn insert(&self, hash: String, score: f64) -> Result<(), SentimentError> {
        let mut line = serde_json::to_string(&CacheLine {
            hash: hash.clone(),
            score,
        })
        .map_err(|e| SentimentError::Cache(e.to_string()))?;
        line.push('\n');
        {
            let mut f = self.file.lock().unwrap();
            f.write_all(line.as_bytes())
                .and_then(|_| f.flush())
                .map_err(|e| SentimentError::Cache(format!("{}: {e}", self.path.display())))?;
        }
        self.scores.write().unwrap().insert(hash, score);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.scores.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct RemoteScorer<T: Transport = HttpTransport> {
    endpoint: String,
    cache: ScoreCache,
    transport: T,
}

impl RemoteScorer<HttpTransport> {
    pub fn http(endpoint: &str, cache: &Path) -> Result<Self, SentimentError> {
        Self::with_transport(endpoint, cache, HttpTransport::new(Duration::from_secs(30))?)
    }
}

impl<T: Transport> RemoteScorer<T> {
    pub fn with_transport(endpoint: &str, cache: &Path, transport: T) -> Result<Self, SentimentError> {
        Ok(RemoteScorer {
            endpoint: endpoint.to_string(),
            cache: ScoreCache::open(cache)?,
            transport,
        })
    }

    pub fn cache(&self) -> &ScoreCache {
        &self.cache
    }

    pub fn transport(&self) -> &T {
        &self.transport
    }

    /// Cached score if present, otherwise one request to the service.
    pub fn score_text(&self, text: &str) -> Result<SentimentScore, SentimentError> {
        let hash = content_hash(text);
        let value = match self.cache.get(&hash) {
            Some(v) => v,
            None => {
                let body = serde_json::to_string(&Request { text })
                    .map_err(|e| SentimentError::Protocol(e.to_string()))?;
                let reply = self.transport.post_json(&self.endpoint, &body)?;
                let v = parse_reply(&reply)?;
                self.cache.insert(hash, v)?;
                v
            }
        };
        Ok(SentimentScore {
            value,
            n_tokens: tokenize(text).len(),
            // the service reports no hit count; a nonzero score counts as one
            n_hits: usize::from(value != 0.0),
        })
    }
}

impl<T: Transport> Scorer for RemoteScorer<T> {
    fn score(&self, text: &str) -> Result<SentimentScore, SentimentError> {
        self.score_text(text)
    }
}

fn parse_reply(body: &str) -> Result<f64, SentimentError> {
    let reply: Reply = serde_json::from_str(body)
        .map_err(|e| SentimentError::Protocol(format!("malformed reply `{body}`: {e}")))?;
    let v = reply
        .score
        .as_f64()
        .filter(|v| v.is_finite())
        .ok_or_else(|| SentimentError::Protocol(format!("non-numeric score in `{body}`")))?;
    if !(-1.0..=1.0).contains(&v) {
        log::warn!("sentiment service returned {v}; clamped to [-1, 1]");
    }
    Ok(v.clamp(-1.0, 1.0))
}

/// One-shot scoring against `endpoint` through the cache file at `cache`.
pub fn score_remote(text: &str, endpoint: &str, cache: &Path) -> Result<SentimentScore, SentimentError> {
    RemoteScorer::http(endpoint, cache)?.score_text(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Read;
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};

    struct Canned {
        reply: Result<String, String>,
        calls: AtomicUsize,
        last_body: Mutex<String>,
    }

    impl Canned {
        fn ok(reply: &str) -> Self {
            Canned {
                reply: Ok(reply.into()),
                calls: AtomicUsize::new(0),
                last_body: Mutex::new(String::new()),
            }
        }
        fn down() -> Self {
            Canned {
                reply: Err("connection refused".into()),
                calls: AtomicUsize::new(0),
                last_body: Mutex::new(String::new()),
            }
        }
    }

    impl Transport for Canned {
        fn post_json(&self, _endpoint: &str, body: &str) -> Result<String, SentimentError> {
            self.calls.fetch_add(1, Ordering::SeqCst);
            *self.last_body.lock().unwrap() = body.to_string();
            self.reply.clone().map_err(SentimentError::Network)
        }
    }

    #[test]
    fn pass_through_and_single_call() {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("cache.jsonl");
        let s = RemoteScorer::with_transport("http://x", &cache, Canned::ok(r#"{"score": 0.42}"#)).unwrap();
        assert_eq!(s.score_text("nice flight").unwrap().value, 0.42);
        assert_eq!(s.score_text("nice flight").unwrap().value, 0.42);
        assert_eq!(s.transport().calls.load(Ordering::SeqCst), 1);
        assert_eq!(*s.transport().last_body.lock().unwrap(), r#"{"text":"nice flight"}"#);
    }

    #[test]
    fn cache_survives_reopen_and_bypasses_network() {
        let dir = tempfile::tempdir().unwrap();
        let cache = dir.path().join("cache.jsonl");
        {
            let s = RemoteScorer::with_transport("http://x", &cache, Canned::ok(r#"{"score": -0.25}"#)).unwrap();
            s.score_text("late again").unwrap();
        }
        let s = RemoteScorer::with_transport("http://x", &cache, Canned::down()).unwrap();
        assert_eq!(s.score_text("late again").unwrap().value, -0.25);
        assert_eq!(s.transport().calls.load(Ordering::SeqCst), 0);
        let content = std::fs::read_to_string(&cache).unwrap();
        assert_eq!(
            content,
            format!("{{\"hash\":\"{}\",\"score\":-0.25}}\n", content_hash("late again"))
        );
    }

    #[test]
    fn out_of_range_reply_is_clamped() {
        let dir = tempfile::tempdir().unwrap();
        let s = RemoteScorer::with_transport("http://x", &dir.path().join("c"), Canned::ok(r#"{"score": 7}"#)).unwrap();
        assert_eq!(s.score_text("t").unwrap().value, 1.0);
    }

    #[test]
    fn network_failure_is_an_error_not_zero() {
        let dir = tempfile::tempdir().unwrap();
        let s = RemoteScorer::with_transport("http://x", &dir.path().join("c"), Canned::down()).unwrap();
        assert!(matches!(s.score_text("t"), Err(SentimentError::Network(_))));
        assert!(s.cache().is_empty());
    }

    #[test]
    fn malformed_reply_is_protocol_error() {
        let dir = tempfile::tempdir().unwrap();
        for bad in ["not json", r#"{"value": 0.3}"#, r#"{"score": "high"}"#] {
            let s = RemoteScorer::with_transport("http://x", &dir.path().join("c"), Canned::ok(bad)).unwrap();
            assert!(matches!(s.score_text("t"), Err(SentimentError::Protocol(_))), "{bad}");
        }
    }

    /// Serves `n` requests on a local socket, replying with `body`.
    fn serve(n: usize, body: &'static str) -> (String, std::thread::JoinHandle<Vec<String>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let handle = std::thread::spawn(move || {
            let mut seen = Vec::new();
            for stream in listener.incoming().take(n) {
                let mut stream = stream.unwrap();
                let mut buf = vec![0u8; 8192];
                let mut req = Vec::new();
                loop {
                    let k = stream.read(&mut buf).unwrap();
                    req.extend_from_slice(&buf[..k]);
                    let s = String::from_utf8_lossy(&req);
                    if let Some(split) = s.find("\r\n\r\n") {
                        let len = s[..split]
                            .lines()
                            .find_map(|l| l.to_ascii_lowercase().strip_prefix("content-length:").map(|v| v.trim().parse::<usize>().unwrap()))
                            .unwrap_or(0);
                        if req.len() >= split + 4 + len {
                            seen.push(s[split + 4..].to_string());
                            break;
                        }
                    }
                    if k == 0 {
                        break;
                    }
                }
                let resp = format!(
                    "HTTP/1.1 200 OK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
                    body.len(),
                    body
                );
                stream.write_all(resp.as_bytes()).unwrap();
            }
            seen
        });
        (format!("http://{addr}/sentiment"), handle)
    }

    #[test]
    fn http_transport_round_trip() {
        let (endpoint, server) = serve(1, r#"{"score": -0.5}"#);
        let dir = tempfile::tempdir().unwrap();
        let got = score_remote("gate chaos", &endpoint, &dir.path().join("c.jsonl")).unwrap();
        assert_eq!(got.value, -0.5);
        assert_eq!(got.n_tokens, 2);
        let bodies = server.join().unwrap();
        assert_eq!(bodies, vec![r#"{"text":"gate chaos"}"#.to_string()]);
    }
}
