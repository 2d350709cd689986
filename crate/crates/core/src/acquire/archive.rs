use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde_json::Value;

use super::{BackendError, Revision, RevisionBackend, SourceBackend};

pub const ENV_BASE_URL: &str = "SECMSG_ARCHIVE_URL";
pub const ENV_TOKEN: &str = "SECMSG_ARCHIVE_TOKEN";
pub const DEFAULT_BASE_URL: &str = "https://archive.softwareheritage.org/api/1";

#[derive(Debug, Clone)]
pub struct ArchiveConfig {
    pub base_url: String,
    pub token: Option<String>,
    /// Sustained request rate of the token bucket.
    pub requests_per_second: f64,
    /// Burst size of the token bucket.
    pub burst: u32,
    pub max_retries: u32,
    /// First backoff after a transport failure; doubles per attempt.
    pub initial_backoff: Duration,
    /// Upper bound on any single wait, including server-requested ones.
    pub max_backoff: Duration,
    pub timeout: Duration,
}

impl Default for ArchiveConfig {
    fn default() -> Self {
        ArchiveConfig {
            base_url: DEFAULT_BASE_URL.into(),
            token: None,
            requests_per_second: 2.0,
            burst: 4,
            max_retries: 5,
            initial_backoff: Duration::from_millis(500),
            max_backoff: Duration::from_secs(120),
            timeout: Duration::from_secs(30),
        }
    }
}

impl ArchiveConfig {
    /// Defaults, with base URL and token taken from the environment when set.
    pub fn from_env() -> Self {
        let mut cfg = ArchiveConfig::default();
        if let Ok(url) = std::env::var(ENV_BASE_URL) {
            if !url.trim().is_empty() {
                cfg.base_url = url.trim().trim_end_matches('/').to_string();
            }
        }
        cfg.token = std::env::var(ENV_TOKEN).ok().filter(|t| !t.trim().is_empty());
        cfg
    }
}

struct TokenBucket {
    state: Mutex<(f64, Instant)>,
    rate: f64,
    capacity: f64,
}

impl TokenBucket {
    fn new(rate: f64, burst: u32) -> Self {
        let capacity = f64::from(burst.max(1));
        TokenBucket { state: Mutex::new((capacity, Instant::now())), rate: rate.max(1e-3), capacity }
    }

    fn acquire(&self) {
        loop {
            let wait = {
                let mut guard = self.state.lock().expect("token bucket lock");
                let (tokens, last) = &mut *guard;
                let now = Instant::now();
                *tokens = (*tokens + now.duration_since(*last).as_secs_f64() * self.rate).min(self.capacity);
                *last = now;
                if *tokens >= 1.0 {
                    *tokens -= 1.0;
                    return;
                }
                Duration::from_secs_f64((1.0 - *tokens) / self.rate)
            };
            std::thread::sleep(wait);
        }
    }
}

/// Blocking client for a Software Heritage style archive API.
///
/// * `GET {base}/revision/{hash}/` returns one revision or 404.
/// * `GET {base}/revision/prefix/{prefix}/` returns a JSON array of revisions,
///   paged with `Link: <...>; rel="next"` headers.
///
/// 429 responses honour `Retry-After` (or `X-RateLimit-Reset`) and retry;
/// 5xx and connection failures retry with exponential backoff.
pub struct ArchiveClient {
    config: ArchiveConfig,
    agent: ureq::Agent,
    bucket: TokenBucket,
}

enum Fetch {
    Body(Value, Option<String>),
    NotFound,
}

impl ArchiveClient {
    pub fn new(config: ArchiveConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        let bucket = TokenBucket::new(config.requests_per_second, config.burst);
        ArchiveClient { config, agent, bucket }
    }

    pub fn from_env() -> Self {
        Self::new(ArchiveConfig::from_env())
    }

    fn backoff(&self, attempt: u32) -> Duration {
        let factor = 2u32.saturating_pow(attempt);
        self.config.initial_backoff.saturating_mul(factor).min(self.config.max_backoff)
    }

    fn server_wait(&self, resp: &ureq::Response) -> Option<Duration> {
        if let Some(secs) = resp.header("Retry-After").and_then(|v| v.trim().parse::<u64>().ok()) {
            return Some(Duration::from_secs(secs));
        }
        let reset = resp.header("X-RateLimit-Reset")?.trim().parse::<i64>().ok()?;
        let delta = reset - Utc::now().timestamp();
        Some(Duration::from_secs(delta.max(0) as u64))
    }

    fn fetch(&self, url: &str) -> Result<Fetch, BackendError> {
        let mut attempt = 0;
        loop {
            self.bucket.acquire();
            let mut req = self.agent.get(url).set("Accept", "application/json");
            if let Some(token) = &self.config.token {
                req = req.set("Authorization", &format!("Bearer {token}"));
            }
            tracing::debug!(url, attempt, "archive request");
            let (retryable, wait) = match req.call() {
                Ok(resp) => {
                    let next = resp.header("Link").and_then(next_link);
                    let body = resp.into_string().map_err(|e| BackendError::Transport(e.to_string()))?;
                    tracing::debug!(url, body = %body, "archive response");
                    let value = serde_json::from_str(&body)
                        .map_err(|e| BackendError::Transport(format!("invalid JSON from {url}: {e}")))?;
                    return Ok(Fetch::Body(value, next));
                }
                Err(ureq::Error::Status(404, _)) => return Ok(Fetch::NotFound),
                Err(ureq::Error::Status(429, resp)) => {
                    let wait = self.server_wait(&resp).unwrap_or_else(|| self.backoff(attempt));
                    (BackendError::RateLimited(format!("{url}: HTTP 429")), wait)
                }
                Err(ureq::Error::Status(code, _)) if code >= 500 => {
                    (BackendError::Transport(format!("{url}: HTTP {code}")), self.backoff(attempt))
                }
                Err(ureq::Error::Status(code, _)) => {
                    return Err(BackendError::Transport(format!("{url}: HTTP {code}")));
                }
                Err(ureq::Error::Transport(t)) => (BackendError::Transport(t.to_string()), self.backoff(attempt)),
            };
            if attempt >= self.config.max_retries {
                return Err(retryable);
            }
            std::thread::sleep(wait.min(self.config.max_backoff));
            attempt += 1;
        }
    }
}

/// Target of the `rel="next"` entry of an RFC 8288 `Link` header.
fn next_link(header: &str) -> Option<String> {
    header.split(',').find_map(|part| {
        let (target, params) = part.split_once(';')?;
        let is_next = params.split(';').any(|p| matches!(p.trim(), "rel=\"next\"" | "rel=next"));
        is_next.then(|| target.trim().trim_start_matches('<').trim_end_matches('>').to_string())
    })
}

fn parse_date(v: &Value) -> Option<DateTime<Utc>> {
    match v {
        Value::String(s) => DateTime::parse_from_rfc3339(s).ok().map(|t| t.with_timezone(&Utc)),
        Value::Object(_) => {
            let secs = v.pointer("/timestamp/seconds").or_else(|| v.get("timestamp"))?.as_i64()?;
            DateTime::from_timestamp(secs, 0)
        }
        _ => None,
    }
}

fn revision_from_json(v: &Value) -> Option<Revision> {
    let hash = v.get("id").and_then(Value::as_str)?.to_ascii_lowercase();
    let message = v.get("message").and_then(Value::as_str).unwrap_or_default();
    let author = v
        .pointer("/author/name")
        .or_else(|| v.pointer("/author/fullname"))
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let author_date = v.get("date").and_then(parse_date)?;
    Some(Revision {
        hash,
        message: message.trim_end().to_string(),
        author,
        author_date,
        origin: v.get("origin").and_then(Value::as_str).map(str::to_string),
    })
}

impl RevisionBackend for ArchiveClient {
    fn kind(&self) -> SourceBackend {
        SourceBackend::ArchiveApi
    }

    fn get(&self, hash: &str) -> Result<Option<Revision>, BackendError> {
        let url = format!("{}/revision/{hash}/", self.config.base_url);
        match self.fetch(&url)? {
            Fetch::NotFound => Ok(None),
            Fetch::Body(v, _) => revision_from_json(&v)
                .map(Some)
                .ok_or_else(|| BackendError::Transport(format!("{url}: response is not a revision"))),
        }
    }

    fn find_prefix(&self, prefix: &str) -> Result<Vec<Revision>, BackendError> {
        let mut url = Some(format!("{}/revision/prefix/{prefix}/", self.config.base_url));
        let mut out = Vec::new();
        while let Some(current) = url.take() {
            match self.fetch(&current)? {
                Fetch::NotFound => break,
                Fetch::Body(v, next) => {
                    let items = v.as_array().cloned().unwrap_or_default();
                    out.extend(items.iter().filter_map(revision_from_json));
                    url = next;
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Write};
    use std::net::TcpListener;
    use std::sync::{Arc, Mutex as StdMutex};

    /// Serves canned responses in order and records request lines and headers.
    fn serve(responses: Vec<String>) -> (String, Arc<StdMutex<Vec<String>>>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let seen = Arc::new(StdMutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        std::thread::spawn(move || {
            for response in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut request = String::new();
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                        break;
                    }
                    request.push_str(&line);
                }
                log.lock().unwrap().push(request);
                stream.write_all(response.as_bytes()).unwrap();
            }
        });
        (format!("http://{addr}/api/1"), seen)
    }

    fn response(status: &str, headers: &[&str], body: &str) -> String {
        let mut r = format!("HTTP/1.1 {status}\r\nContent-Length: {}\r\nConnection: close\r\n", body.len());
        for h in headers {
            r.push_str(h);
            r.push_str("\r\n");
        }
        r.push_str("\r\n");
        r.push_str(body);
        r
    }

    fn client(base: String) -> ArchiveClient {
        ArchiveClient::new(ArchiveConfig {
            base_url: base,
            token: Some("sekret".into()),
            requests_per_second: 1000.0,
            burst: 100,
            max_retries: 2,
            initial_backoff: Duration::from_millis(5),
            max_backoff: Duration::from_millis(50),
            timeout: Duration::from_secs(5),
        })
    }

    const HASH: &str = "0123456789abcdef0123456789abcdef01234567";

    fn revision_body(id: &str) -> String {
        format!(
            r#"{{"id":"{id}","message":"Fix XSS in template\n","author":{{"name":"Ann","fullname":"Ann <a@x>"}},"date":"2019-05-06T07:08:09+02:00"}}"#
        )
    }

    #[test]
    fn exact_lookup_with_auth_header() {
        let (base, seen) = serve(vec![response("200 OK", &[], &revision_body(HASH))]);
        let rev = client(base).get(HASH).unwrap().unwrap();
        assert_eq!(rev.hash, HASH);
        assert_eq!(rev.message, "Fix XSS in template");
        assert_eq!(rev.author, "Ann");
        assert_eq!(rev.author_date.to_rfc3339(), "2019-05-06T05:08:09+00:00");
        let req = seen.lock().unwrap()[0].clone();
        assert!(req.starts_with(&format!("GET /api/1/revision/{HASH}/ ")));
        assert!(req.to_ascii_lowercase().contains("authorization: bearer sekret"));
    }

    #[test]
    fn not_found_is_missing_not_error() {
        let (base, _) = serve(vec![response("404 Not Found", &[], "{}")]);
        assert_eq!(client(base).get(HASH).unwrap(), None);
    }

    #[test]
    fn rate_limit_then_success() {
        let (base, seen) = serve(vec![
            response("429 Too Many Requests", &["Retry-After: 0"], "{}"),
            response("503 Service Unavailable", &[], "{}"),
            response("200 OK", &[], &revision_body(HASH)),
        ]);
        assert!(client(base).get(HASH).unwrap().is_some());
        assert_eq!(seen.lock().unwrap().len(), 3);
    }

    #[test]
    fn retries_exhausted_is_transport_error() {
        let (base, _) = serve(vec![
            response("502 Bad Gateway", &[], "{}"),
            response("502 Bad Gateway", &[], "{}"),
            response("502 Bad Gateway", &[], "{}"),
        ]);
        assert!(matches!(client(base).get(HASH), Err(BackendError::Transport(_))));
    }

    #[test]
    fn unreachable_host_is_transport_error() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        drop(listener);
        let c = client(format!("http://{addr}/api/1"));
        assert!(matches!(c.get(HASH), Err(BackendError::Transport(_))));
    }

    #[test]
    fn prefix_lookup_follows_pages() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let port = listener.local_addr().unwrap().port();
        drop(listener);
        // Rebinding the same port keeps the Link target predictable.
        let base_host = format!("http://127.0.0.1:{port}");
        let page2 = format!("{base_host}/api/1/revision/prefix/0123456/?page=2");
        let responses = vec![
            response("200 OK", &[&format!("Link: <{page2}>; rel=\"next\"")], &format!("[{}]", revision_body(HASH))),
            response("200 OK", &[], &format!("[{}]", revision_body("0123456fffffffffffffffffffffffffffffffff"))),
        ];
        let listener = TcpListener::bind(("127.0.0.1", port)).unwrap();
        let seen = Arc::new(StdMutex::new(Vec::new()));
        let log = Arc::clone(&seen);
        std::thread::spawn(move || {
            for r in responses {
                let (mut stream, _) = listener.accept().unwrap();
                let mut reader = BufReader::new(stream.try_clone().unwrap());
                let mut first = String::new();
                reader.read_line(&mut first).unwrap();
                loop {
                    let mut line = String::new();
                    if reader.read_line(&mut line).unwrap() == 0 || line == "\r\n" {
                        break;
                    }
                }
                log.lock().unwrap().push(first);
                stream.write_all(r.as_bytes()).unwrap();
            }
        });
        let revs = client(format!("{base_host}/api/1")).find_prefix("0123456").unwrap();
        assert_eq!(revs.len(), 2);
        assert!(seen.lock().unwrap()[1].contains("page=2"));
    }

    #[test]
    fn link_header_parsing() {
        assert_eq!(
            next_link(r#"<https://a/x?page=2>; rel="next", <https://a/x?page=9>; rel="last""#).as_deref(),
            Some("https://a/x?page=2")
        );
        assert_eq!(next_link(r#"<https://a/x>; rel="prev""#), None);
    }

    #[test]
    fn numeric_dates() {
        let v: Value = serde_json::from_str(
            r#"{"id":"ab","date":{"timestamp":{"seconds":1500000000,"microseconds":0},"offset":0}}"#,
        )
        .unwrap();
        let rev = revision_from_json(&v).unwrap();
        assert_eq!(rev.author_date.timestamp(), 1_500_000_000);
    }
}
