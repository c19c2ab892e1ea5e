use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{digest_str, embedding_wire_body, ChatRequest, GatewayError};

static NETWORK_REQUESTS: AtomicUsize = AtomicUsize::new(0);

/// Number of HTTP requests issued by live backends in this process.
pub fn network_request_count() -> usize {
    NETWORK_REQUESTS.load(Ordering::SeqCst)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Live,
    Mock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendSpec {
    /// Label used in diagnostics and as the generator tag of interpretations.
    pub name: String,
    pub kind: BackendKind,
    pub endpoint: String,
    pub model: String,
    /// `Header-Name: value` with `${ENV_VAR}` references, e.g.
    /// `Authorization: Bearer ${OPENAI_API_KEY}`.
    pub auth: Option<String>,
    /// Replay file for mock backends.
    pub fixture_path: Option<PathBuf>,
    /// Live backends append every exchange here when set.
    pub record_path: Option<PathBuf>,
    pub max_in_flight: usize,
    pub retry_limit: usize,
    pub backoff_ms: u64,
    pub timeout_secs: u64,
    /// JSON pointer to the assistant text in a chat response.
    pub content_path: String,
    /// JSON pointer to the vector list in an embedding response.
    pub embedding_path: String,
}

impl Default for BackendSpec {
    fn default() -> Self {
        BackendSpec {
            name: "default".into(),
            kind: BackendKind::Mock,
            endpoint: String::new(),
            model: String::new(),
            auth: None,
            fixture_path: None,
            record_path: None,
            max_in_flight: 4,
            retry_limit: 2,
            backoff_ms: 500,
            timeout_secs: 120,
            content_path: "/choices/0/message/content".into(),
            embedding_path: "/data".into(),
        }
    }
}

impl BackendSpec {
    pub fn mock(name: &str, fixture_path: impl Into<PathBuf>) -> Self {
        BackendSpec {
            name: name.into(),
            kind: BackendKind::Mock,
            fixture_path: Some(fixture_path.into()),
            ..Default::default()
        }
    }

    pub fn live(name: &str, endpoint: &str, model: &str) -> Self {
        BackendSpec {
            name: name.into(),
            kind: BackendKind::Live,
            endpoint: endpoint.into(),
            model: model.into(),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), GatewayError> {
        if self.max_in_flight == 0 {
            return Err(GatewayError::Config(format!("{}: max_in_flight must be >= 1", self.name)));
        }
        match self.kind {
            BackendKind::Live if self.endpoint.is_empty() => {
                Err(GatewayError::Config(format!("{}: live backend needs an endpoint", self.name)))
            }
            BackendKind::Mock if self.fixture_path.is_none() => {
                Err(GatewayError::Config(format!("{}: mock backend needs a fixture_path", self.name)))
            }
            _ => Ok(()),
        }
    }
}

pub trait ChatBackend: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &ChatRequest) -> Result<String, GatewayError>;
    /// How many times callers may re-ask after an unusable response.
    fn retry_limit(&self) -> usize {
        0
    }
    /// Digest under which this backend would record or replay `request`.
    fn request_digest(&self, request: &ChatRequest) -> String {
        request.digest()
    }
}

pub trait EmbeddingBackend: Send + Sync {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError>;
}

pub fn complete(backend: &dyn ChatBackend, request: &ChatRequest) -> Result<String, GatewayError> {
    backend.complete(request)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub request_digest: String,
    pub response_text: String,
}

/// Recorded responses keyed by request digest.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Fixture {
    entries: BTreeMap<String, String>,
}

impl Fixture {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, GatewayError> {
        let path = path.as_ref();
        let file = File::open(path)
            .map_err(|e| GatewayError::Fixture(format!("{}: {e}", path.display())))?;
        let mut fixture = Fixture::default();
        for (n, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| GatewayError::Fixture(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: FixtureEntry = serde_json::from_str(&line).map_err(|e| {
                GatewayError::Fixture(format!("{}:{}: {e}", path.display(), n + 1))
            })?;
            fixture.entries.insert(entry.request_digest, entry.response_text);
        }
        Ok(fixture)
    }

    pub fn insert_digest(&mut self, digest: impl Into<String>, response: impl Into<String>) {
        self.entries.insert(digest.into(), response.into());
    }

    pub fn insert(&mut self, request: &ChatRequest, response: impl Into<String>) {
        self.insert_digest(request.digest(), response);
    }

    /// Records the vectors an embedding backend using `model` returns for
    /// `texts`.
    pub fn insert_embeddings(&mut self, model: &str, texts: &[String], vectors: &[Vec<f64>]) {
        let body = embedding_wire_body(model, texts);
        let json = serde_json::to_string(vectors).expect("vectors serialize");
        self.insert_digest(digest_str(&body), json);
    }

    pub fn extend(&mut self, other: Fixture) {
        self.entries.extend(other.entries);
    }

    pub fn get(&self, digest: &str) -> Option<&str> {
        self.entries.get(digest).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Writes entries sorted by digest.
    pub fn write(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut out = std::io::BufWriter::new(File::create(path)?);
        for (digest, text) in &self.entries {
            let entry = FixtureEntry {
                request_digest: digest.clone(),
                response_text: text.clone(),
            };
            writeln!(out, "{}", serde_json::to_string(&entry).map_err(std::io::Error::other)?)?;
        }
        out.flush()
    }
}

/// Counting semaphore bounding concurrent requests.
#[derive(Debug)]
struct Gate {
    max: usize,
    used: Mutex<usize>,
    cv: Condvar,
}

struct GateGuard<'a>(&'a Gate);

impl Gate {
    fn new(max: usize) -> Self {
        Gate {
            max: max.max(1),
            used: Mutex::new(0),
            cv: Condvar::new(),
        }
    }

    fn acquire(&self) -> GateGuard<'_> {
        let mut used = self.used.lock().unwrap_or_else(|e| e.into_inner());
        while *used >= self.max {
            used = self.cv.wait(used).unwrap_or_else(|e| e.into_inner());
        }
        *used += 1;
        GateGuard(self)
    }
}

impl Drop for GateGuard<'_> {
    fn drop(&mut self) {
        let mut used = self.0.used.lock().unwrap_or_else(|e| e.into_inner());
        *used -= 1;
        self.0.cv.notify_one();
    }
}

enum Inner {
    Mock(Fixture),
    Live(Live),
}

struct Live {
    agent: ureq::Agent,
    auth: Option<(String, String)>,
    recorder: Option<Mutex<File>>,
}

/// A configured chat/embedding backend.
pub struct Backend {
    spec: BackendSpec,
    inner: Inner,
    gate: Gate,
}

impl std::fmt::Debug for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Backend").field("spec", &self.spec).finish()
    }
}

impl Backend {
    pub fn from_spec(spec: &BackendSpec) -> Result<Self, GatewayError> {
        spec.validate()?;
        let inner = match spec.kind {
            BackendKind::Mock => {
                Inner::Mock(Fixture::load(spec.fixture_path.as_ref().expect("validated"))?)
            }
            BackendKind::Live => {
                let config = ureq::Agent::config_builder()
                    .http_status_as_error(false)
                    .timeout_global(Some(Duration::from_secs(spec.timeout_secs.max(1))))
                    .build();
                let auth = spec.auth.as_deref().map(resolve_auth).transpose()?;
                let recorder = match &spec.record_path {
                    Some(p) => Some(Mutex::new(
                        OpenOptions::new()
                            .create(true)
                            .append(true)
                            .open(p)
                            .map_err(|e| GatewayError::Fixture(format!("{}: {e}", p.display())))?,
                    )),
                    None => None,
                };
                Inner::Live(Live {
                    agent: config.into(),
                    auth,
                    recorder,
                })
            }
        };
        Ok(Backend {
            spec: spec.clone(),
            inner,
            gate: Gate::new(spec.max_in_flight),
        })
    }

    /// A mock backend over an in-memory fixture.
    pub fn from_fixture(name: &str, fixture: Fixture) -> Self {
        let spec = BackendSpec {
            name: name.into(),
            ..Default::default()
        };
        Backend {
            gate: Gate::new(spec.max_in_flight),
            spec,
            inner: Inner::Mock(fixture),
        }
    }

    pub fn spec(&self) -> &BackendSpec {
        &self.spec
    }

    fn prepare(&self, request: &ChatRequest) -> ChatRequest {
        let mut req = request.clone();
        if req.model_name.is_empty() {
            req.model_name = self.spec.model.clone();
        }
        req
    }

    fn exchange(&self, body: &str, pointer_for: impl Fn(&Value) -> Result<String, GatewayError>) -> Result<String, GatewayError> {
        let digest = digest_str(body);
        match &self.inner {
            Inner::Mock(fixture) => fixture
                .get(&digest)
                .map(str::to_string)
                .ok_or(GatewayError::FixtureMiss { digest }),
            Inner::Live(live) => {
                let _permit = self.gate.acquire();
                let raw = self.post_with_retry(live, body)?;
                let value: Value = serde_json::from_str(&raw)
                    .map_err(|e| GatewayError::UnparsableResponse(format!("backend body: {e}")))?;
                let text = pointer_for(&value)?;
                if let Some(rec) = &live.recorder {
                    let entry = FixtureEntry {
                        request_digest: digest,
                        response_text: text.clone(),
                    };
                    let mut f = rec.lock().unwrap_or_else(|e| e.into_inner());
                    writeln!(f, "{}", serde_json::to_string(&entry).expect("entry serializes"))
                        .map_err(|e| GatewayError::Fixture(e.to_string()))?;
                }
                Ok(text)
            }
        }
    }

    fn post_with_retry(&self, live: &Live, body: &str) -> Result<String, GatewayError> {
        let mut last = GatewayError::TransportError("no attempt made".into());
        for attempt in 0..=self.spec.retry_limit {
            if attempt > 0 {
                let delay = self.spec.backoff_ms.saturating_mul(1 << (attempt - 1).min(16));
                std::thread::sleep(Duration::from_millis(delay));
            }
            NETWORK_REQUESTS.fetch_add(1, Ordering::SeqCst);
            let mut req = live
                .agent
                .post(&self.spec.endpoint)
                .header("Content-Type", "application/json");
            if let Some((name, value)) = &live.auth {
                req = req.header(name.as_str(), value.as_str());
            }
            match req.send(body) {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    let text = resp.body_mut().read_to_string().unwrap_or_default();
                    match status {
                        200..=299 => return Ok(text),
                        401 | 403 => {
                            return Err(GatewayError::AuthError(format!("HTTP {status}: {text:.200}")))
                        }
                        429 | 500..=599 => {
                            log::warn!("{}: HTTP {status}, attempt {}", self.spec.name, attempt + 1);
                            last = GatewayError::TransportError(format!("HTTP {status}: {text:.200}"));
                        }
                        _ => {
                            return Err(GatewayError::TransportError(format!(
                                "HTTP {status}: {text:.200}"
                            )))
                        }
                    }
                }
                Err(e) => {
                    log::warn!("{}: {e}, attempt {}", self.spec.name, attempt + 1);
                    last = GatewayError::TransportError(e.to_string());
                }
            }
        }
        Err(last)
    }
}

fn resolve_auth(template: &str) -> Result<(String, String), GatewayError> {
    let (name, value) = template
        .split_once(':')
        .ok_or_else(|| GatewayError::Config(format!("auth template {template:?} lacks 'Name: value'")))?;
    let mut out = String::new();
    let mut rest = value.trim();
    while let Some(start) = rest.find("${") {
        out.push_str(&rest[..start]);
        let end = rest[start..]
            .find('}')
            .ok_or_else(|| GatewayError::Config("unterminated ${ in auth template".into()))?;
        let var = &rest[start + 2..start + end];
        let val = std::env::var(var)
            .map_err(|_| GatewayError::AuthError(format!("environment variable {var} is not set")))?;
        out.push_str(&val);
        rest = &rest[start + end + 1..];
    }
    out.push_str(rest);
    Ok((name.trim().to_string(), out))
}

fn extract_text(value: &Value, pointer: &str) -> Result<String, GatewayError> {
    value
        .pointer(pointer)
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| GatewayError::UnparsableResponse(format!("no string at {pointer}")))
}

/// Accepts `[[..], ..]` or `[{"embedding": [..]}, ..]`.
fn parse_vectors(value: &Value) -> Result<Vec<Vec<f64>>, GatewayError> {
    let items = value
        .as_array()
        .ok_or_else(|| GatewayError::UnparsableResponse("embeddings must be an array".into()))?;
    items
        .iter()
        .map(|item| {
            let vec = match item {
                Value::Array(_) => item,
                Value::Object(o) => o.get("embedding").ok_or_else(|| {
                    GatewayError::UnparsableResponse("embedding item lacks \"embedding\"".into())
                })?,
                _ => return Err(GatewayError::UnparsableResponse("bad embedding item".into())),
            };
            vec.as_array()
                .ok_or_else(|| GatewayError::UnparsableResponse("embedding must be an array".into()))?
                .iter()
                .map(|x| {
                    x.as_f64()
                        .ok_or_else(|| GatewayError::UnparsableResponse("non-numeric embedding".into()))
                })
                .collect()
        })
        .collect()
}

impl ChatBackend for Backend {
    fn name(&self) -> &str {
        &self.spec.name
    }

    fn complete(&self, request: &ChatRequest) -> Result<String, GatewayError> {
        let req = self.prepare(request);
        let pointer = self.spec.content_path.clone();
        self.exchange(&req.wire_body(), |v| extract_text(v, &pointer))
    }

    fn retry_limit(&self) -> usize {
        self.spec.retry_limit
    }

    fn request_digest(&self, request: &ChatRequest) -> String {
        self.prepare(request).digest()
    }
}

impl EmbeddingBackend for Backend {
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, GatewayError> {
        if texts.is_empty() {
            return Ok(Vec::new());
        }
        let body = embedding_wire_body(&self.spec.model, texts);
        let pointer = self.spec.embedding_path.clone();
        // Live responses are reduced to the vector list before recording, so
        // mock fixtures hold plain JSON arrays.
        let text = self.exchange(&body, |v| {
            let at = v
                .pointer(&pointer)
                .ok_or_else(|| GatewayError::UnparsableResponse(format!("no value at {pointer}")))?;
            let vectors = parse_vectors(at)?;
            Ok(serde_json::to_string(&vectors).expect("vectors serialize"))
        })?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| GatewayError::UnparsableResponse(format!("embedding fixture: {e}")))?;
        let vectors = parse_vectors(&value)?;
        if vectors.len() != texts.len() {
            return Err(GatewayError::UnparsableResponse(format!(
                "{} embeddings for {} inputs",
                vectors.len(),
                texts.len()
            )));
        }
        Ok(vectors)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mock_replays_fixture() {
        let req = ChatRequest::new("s", "u");
        let mut fx = Fixture::default();
        fx.insert(&req, "NONE");
        let backend = Backend::from_fixture("m", fx);
        assert_eq!(complete(&backend, &req).unwrap(), "NONE");
        assert_eq!(complete(&backend, &req).unwrap(), "NONE");
    }

    #[test]
    fn mock_miss_reports_digest() {
        let req = ChatRequest::new("s", "u");
        let backend = Backend::from_fixture("m", Fixture::default());
        assert_eq!(
            complete(&backend, &req).unwrap_err(),
            GatewayError::FixtureMiss {
                digest: req.digest()
            }
        );
    }

    #[test]
    fn fixture_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("fx.jsonl");
        let mut fx = Fixture::default();
        fx.insert_digest("b", "two\nlines");
        fx.insert_digest("a", "one");
        fx.write(&path).unwrap();
        let again = Fixture::load(&path).unwrap();
        assert_eq!(fx, again);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(r#"{"request_digest":"a","response_text":"one"}"#));
    }

    #[test]
    fn mock_embeddings() {
        let texts = vec!["a".to_string(), "b".to_string()];
        let mut fx = Fixture::default();
        fx.insert_digest(digest_str(&embedding_wire_body("", &texts)), "[[1,0],[0,1]]");
        let b = Backend::from_fixture("e", fx);
        assert_eq!(b.embed(&texts).unwrap(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
    }

    #[test]
    fn parse_vector_shapes() {
        let v: Value = serde_json::from_str(r#"[{"embedding":[0.5,1]},{"embedding":[2,3]}]"#).unwrap();
        assert_eq!(parse_vectors(&v).unwrap()[1], vec![2.0, 3.0]);
        assert!(parse_vectors(&Value::Null).is_err());
    }

    #[test]
    fn auth_template() {
        std::env::set_var("DT_TEST_TOKEN", "abc");
        assert_eq!(
            resolve_auth("Authorization: Bearer ${DT_TEST_TOKEN}").unwrap(),
            ("Authorization".to_string(), "Bearer abc".to_string())
        );
        assert!(matches!(
            resolve_auth("X-Key: ${DT_TEST_SURELY_UNSET_VAR}"),
            Err(GatewayError::AuthError(_))
        ));
        assert!(resolve_auth("no colon").is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = BackendSpec::live("x", "", "m");
        assert!(s.validate().is_err());
        s.endpoint = "http://localhost:1/v1".into();
        assert!(s.validate().is_ok());
        s.max_in_flight = 0;
        assert!(s.validate().is_err());
        assert!(BackendSpec::default().validate().is_err());
    }

    #[test]
    fn gate_bounds_concurrency() {
        use std::sync::Arc;
        let gate = Arc::new(Gate::new(2));
        let peak = Arc::new(AtomicUsize::new(0));
        let current = Arc::new(AtomicUsize::new(0));
        std::thread::scope(|s| {
            for _ in 0..8 {
                let (gate, peak, current) = (gate.clone(), peak.clone(), current.clone());
                s.spawn(move || {
                    let _g = gate.acquire();
                    let now = current.fetch_add(1, Ordering::SeqCst) + 1;
                    peak.fetch_max(now, Ordering::SeqCst);
                    std::thread::sleep(Duration::from_millis(5));
                    current.fetch_sub(1, Ordering::SeqCst);
                });
            }
        });
        assert!(peak.load(Ordering::SeqCst) <= 2);
    }
}
