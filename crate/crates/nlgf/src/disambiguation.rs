//! LLM toponym disambiguation: prompt construction, backend invocation with
//! retries, tolerant response parsing, polygon verification, and an
//! append-only result cache.

use std::collections::HashMap;
use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Mutex, RwLock};

use regex::Regex;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::gazetteer::{AdminLevel, Gazetteer, GeoPoint, Resolution};
use crate::recognition::ToponymMention;

/// One disambiguation task: a mention plus the publisher location that
/// anchors it. `publisher_state` is substituted into the prompt verbatim, so
/// callers pass the display name ("Hawaii"), not the code.
#[derive(Debug, Clone, PartialEq)]
pub struct DisambiguationRequest {
    pub mention: ToponymMention,
    pub publisher_city: String,
    pub publisher_state: String,
}

/// Parsed LLM response: coordinates plus claimed administrative level.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDisambiguation {
    pub point: GeoPoint,
    pub adm: AdminLevel,
}

/// Resolved admin-unit ids from polygon verification.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResolvedIds {
    pub county_id: Option<String>,
    pub state_id: Option<String>,
    pub country_id: Option<String>,
}

impl ResolvedIds {
    pub fn from_resolution(r: &Resolution<'_>) -> ResolvedIds {
        ResolvedIds {
            county_id: r.county.map(|u| u.unit_id.clone()),
            state_id: r.state.map(|u| u.unit_id.clone()),
            country_id: r.country.map(|u| u.unit_id.clone()),
        }
    }

    pub fn at(&self, level: AdminLevel) -> Option<&str> {
        match level {
            AdminLevel::County => self.county_id.as_deref(),
            AdminLevel::State => self.state_id.as_deref(),
            AdminLevel::Country => self.country_id.as_deref(),
        }
    }
}

/// A disambiguated mention. `verified` is true iff the returned coordinate
/// falls inside a loaded polygon at the claimed administrative level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisambiguatedToponym {
    pub mention: ToponymMention,
    pub point: GeoPoint,
    pub adm: AdminLevel,
    pub resolution: ResolvedIds,
    pub verified: bool,
}

const PROMPT_TEMPLATE: &str = "The following sentence is from a news media located in {city}, {state}. \
Disambiguate the {entity_class} toponym entity '{entity}' in the sentence: {sentence}. \
Return both the coordinates (in decimal format) and the administrative level it refers to \
(county, state, or country). Format: latitude:<value>, longitude: <value>, \
administrative level (ADM):<county/state/country>.";

/// Suffix appended on the single re-prompt after a parse failure. Kept out of
/// the golden template.
const RETRY_SUFFIX: &str = " Respond only in the requested format.";

/// Renders the disambiguation prompt; placeholders are substituted literally
/// with no escaping.
pub fn build_prompt(req: &DisambiguationRequest) -> String {
    PROMPT_TEMPLATE
        .replace("{city}", &req.publisher_city)
        .replace("{state}", &req.publisher_state)
        .replace("{entity_class}", req.mention.entity_class.as_str())
        .replace("{entity}", &req.mention.surface)
        .replace("{sentence}", &req.mention.sentence)
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("missing {0} key in response")]
    MissingKey(&'static str),
    #[error("non-numeric {0} in response: '{1}'")]
    NonNumeric(&'static str, String),
    #[error("{0} out of range: {1}")]
    OutOfRange(&'static str, f64),
    #[error("unknown administrative level in response: '{0}'")]
    UnknownAdm(String),
}

fn extract_coord(text: &str, key: &'static str) -> Result<f64, ParseError> {
    let key_re = Regex::new(&format!(r"(?i)\b{key}\s*:")).unwrap();
    let m = key_re.find(text).ok_or(ParseError::MissingKey(key))?;
    let rest = text[m.end()..].trim_start();
    let token: String = rest
        .chars()
        .take_while(|c| !c.is_whitespace() && *c != ',' && *c != ';')
        .collect();
    let cleaned = token.trim_matches(|c| matches!(c, '<' | '>' | '(' | ')'));
    cleaned
        .parse::<f64>()
        .map_err(|_| ParseError::NonNumeric(key, token.clone()))
}

/// Tolerant extraction from an LLM response: case-insensitive keys, optional
/// whitespace, decimal degrees, and a case-insensitive ADM token.
pub fn parse_response(text: &str) -> Result<RawDisambiguation, ParseError> {
    let lat = extract_coord(text, "latitude")?;
    let lon = extract_coord(text, "longitude")?;
    if !(-90.0..=90.0).contains(&lat) {
        return Err(ParseError::OutOfRange("latitude", lat));
    }
    if !(-180.0..=180.0).contains(&lon) {
        return Err(ParseError::OutOfRange("longitude", lon));
    }
    let adm_re =
        Regex::new(r"(?i)\b(?:administrative\s+level\s*(?:\(\s*adm\s*\))?|adm)\s*:\s*<?\s*([a-z]+)")
            .unwrap();
    let caps = adm_re
        .captures(text)
        .ok_or(ParseError::MissingKey("administrative level"))?;
    let token = caps.get(1).unwrap().as_str();
    let adm = match token.to_ascii_lowercase().as_str() {
        "county" => AdminLevel::County,
        "state" => AdminLevel::State,
        "country" => AdminLevel::Country,
        other => return Err(ParseError::UnknownAdm(other.to_string())),
    };
    Ok(RawDisambiguation {
        point: GeoPoint::new(lat, lon).expect("range checked"),
        adm,
    })
}

/// Canonical rendering of a parsed response; `parse_response` is its inverse
/// on well-formed values.
pub fn format_response(raw: &RawDisambiguation) -> String {
    format!(
        "latitude: {}, longitude: {}, ADM: {}",
        raw.point.lat(),
        raw.point.lon(),
        raw.adm.as_str()
    )
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("backend has no response for key '{0}'")]
    NoFixture(String),
    #[error("authentication failure: {0}")]
    Auth(String),
}

/// Text-in/text-out LLM backend. Implementations declare whether concurrent
/// calls are safe; the batch runner serializes calls otherwise.
pub trait LlmBackend: Sync {
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
    fn supports_concurrency(&self) -> bool {
        true
    }
}

/// Transport retry policy: `max_retries` attempts after the first, with
/// exponential backoff starting at `base_backoff_ms`.
#[derive(Debug, Clone, Copy)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub base_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_backoff_ms: 500,
        }
    }
}

fn call_with_retry(
    backend: &dyn LlmBackend,
    prompt: &str,
    policy: &RetryPolicy,
) -> Result<String, BackendError> {
    let mut attempt = 0u32;
    loop {
        match backend.complete(prompt) {
            Ok(text) => return Ok(text),
            Err(BackendError::Transport(msg)) if attempt < policy.max_retries => {
                let backoff = policy.base_backoff_ms.saturating_mul(1 << attempt);
                log::warn!("transport failure (attempt {}): {msg}; retrying in {backoff} ms", attempt + 1);
                if backoff > 0 {
                    std::thread::sleep(std::time::Duration::from_millis(backoff));
                }
                attempt += 1;
            }
            Err(e) => return Err(e),
        }
    }
}

#[derive(Debug, Error)]
pub enum DisambiguationFailure {
    #[error("backend failure: {0}")]
    Backend(#[from] BackendError),
    #[error("unparseable response after re-prompt: {0}")]
    Unresolved(ParseError),
}

/// Deterministic table-driven backend for tests and offline runs. The TSV
/// fixture maps `surface<TAB>city<TAB>state_code<TAB>response`.
pub struct StubBackend {
    responses: HashMap<(String, String, String), String>,
    calls: AtomicUsize,
}

impl StubBackend {
    pub fn from_tsv(content: &str) -> Result<StubBackend, BackendError> {
        let mut responses = HashMap::new();
        for (i, line) in content.lines().enumerate() {
            let line = line.trim_end();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parts: Vec<&str> = line.split('\t').collect();
            if parts.len() != 4 {
                return Err(BackendError::Transport(format!(
                    "stub fixture line {}: expected 4 tab-separated fields",
                    i + 1
                )));
            }
            responses.insert(
                (parts[0].to_string(), parts[1].to_string(), parts[2].to_string()),
                parts[3].to_string(),
            );
        }
        Ok(StubBackend {
            responses,
            calls: AtomicUsize::new(0),
        })
    }

    pub fn load(path: &Path) -> Result<StubBackend, BackendError> {
        let content = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Transport(format!("{}: {e}", path.display())))?;
        StubBackend::from_tsv(&content)
    }

    pub fn call_count(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }
}

impl LlmBackend for StubBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        static RE: std::sync::OnceLock<Regex> = std::sync::OnceLock::new();
        let re = RE.get_or_init(|| {
            Regex::new(
                r"located in (.+?), (.+?)\. Disambiguate the (?:GPE|LOC|FAC) toponym entity '(.*?)' in the sentence:",
            )
            .unwrap()
        });
        self.calls.fetch_add(1, Ordering::SeqCst);
        let caps = re
            .captures(prompt)
            .ok_or_else(|| BackendError::Transport("stub could not parse prompt".into()))?;
        let city = caps.get(1).unwrap().as_str();
        let state = caps.get(2).unwrap().as_str();
        let entity = caps.get(3).unwrap().as_str();
        let state_code = crate::us_states::normalize_state(state)
            .map(str::to_string)
            .unwrap_or_else(|| state.to_string());
        self.responses
            .get(&(entity.to_string(), city.to_string(), state_code.clone()))
            .cloned()
            .ok_or_else(|| BackendError::NoFixture(format!("{entity} @ {city}, {state_code}")))
    }
}

/// HTTP adapter for an OpenAI-compatible chat-completions endpoint.
pub struct HttpBackend {
    client: reqwest::blocking::Client,
    endpoint: String,
    model: String,
    api_key: Option<String>,
}

impl HttpBackend {
    pub fn new(
        base_url: &str,
        model: &str,
        api_key: Option<String>,
        timeout_secs: u64,
    ) -> Result<HttpBackend, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(std::time::Duration::from_secs(timeout_secs))
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend {
            client,
            endpoint: format!("{}/chat/completions", base_url.trim_end_matches('/')),
            model: model.to_string(),
            api_key,
        })
    }
}

impl LlmBackend for HttpBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let body = serde_json::json!({
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": 0,
        });
        let mut req = self.client.post(&self.endpoint).json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req
            .send()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        let status = resp.status();
        if status.as_u16() == 401 || status.as_u16() == 403 {
            return Err(BackendError::Auth(format!("endpoint returned {status}")));
        }
        if !status.is_success() {
            return Err(BackendError::Transport(format!("endpoint returned {status}")));
        }
        let json: serde_json::Value = resp
            .json()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        json["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| BackendError::Transport("response missing choices[0].message.content".into()))
    }
}

/// Cache key: all four request dimensions, with the sentence content hashed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CacheKey {
    pub surface: String,
    pub entity_class: String,
    pub sentence_sha256: String,
    pub publisher_city: String,
    pub publisher_state: String,
}

impl CacheKey {
    pub fn for_request(req: &DisambiguationRequest) -> CacheKey {
        let mut hasher = Sha256::new();
        hasher.update(req.mention.sentence.as_bytes());
        CacheKey {
            surface: req.mention.surface.clone(),
            entity_class: req.mention.entity_class.as_str().to_string(),
            sentence_sha256: format!("{:x}", hasher.finalize()),
            publisher_city: req.publisher_city.clone(),
            publisher_state: req.publisher_state.clone(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct CacheRecord {
    #[serde(flatten)]
    key: CacheKey,
    lat: f64,
    lon: f64,
    adm: String,
    verified: bool,
    #[serde(flatten)]
    resolution: ResolvedIds,
}

/// Disambiguation result cache: in-memory map persisted as an append-only
/// JSONL file. Reads are concurrent; writes are serialized.
pub struct DisambiguationCache {
    entries: RwLock<HashMap<CacheKey, CacheRecord>>,
    writer: Option<Mutex<std::fs::File>>,
    path: Option<PathBuf>,
}

impl DisambiguationCache {
    /// Volatile in-memory cache.
    pub fn in_memory() -> DisambiguationCache {
        DisambiguationCache {
            entries: RwLock::new(HashMap::new()),
            writer: None,
            path: None,
        }
    }

    /// Opens (or creates) a persistent cache file and replays its records.
    pub fn open(path: &Path) -> std::io::Result<DisambiguationCache> {
        let mut entries = HashMap::new();
        if path.exists() {
            let reader = BufReader::new(std::fs::File::open(path)?);
            for line in reader.lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheRecord>(&line) {
                    Ok(rec) => {
                        entries.insert(rec.key.clone(), rec);
                    }
                    Err(e) => log::warn!("{}: skipping corrupt cache line: {e}", path.display()),
                }
            }
        }
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(DisambiguationCache {
            entries: RwLock::new(entries),
            writer: Some(Mutex::new(file)),
            path: Some(path.to_path_buf()),
        })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.read().unwrap().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn get(&self, key: &CacheKey, mention: &ToponymMention) -> Option<DisambiguatedToponym> {
        let entries = self.entries.read().unwrap();
        let rec = entries.get(key)?;
        let adm = match rec.adm.as_str() {
            "county" => AdminLevel::County,
            "state" => AdminLevel::State,
            "country" => AdminLevel::Country,
            _ => return None,
        };
        let point = GeoPoint::new(rec.lat, rec.lon).ok()?;
        Some(DisambiguatedToponym {
            mention: mention.clone(),
            point,
            adm,
            resolution: rec.resolution.clone(),
            verified: rec.verified,
        })
    }

    fn put(&self, key: CacheKey, result: &DisambiguatedToponym) {
        let rec = CacheRecord {
            key: key.clone(),
            lat: result.point.lat(),
            lon: result.point.lon(),
            adm: result.adm.as_str().to_string(),
            verified: result.verified,
            resolution: result.resolution.clone(),
        };
        if let Some(writer) = &self.writer {
            let mut file = writer.lock().unwrap();
            let line = serde_json::to_string(&rec).expect("cache record serializes");
            let _ = writeln!(file, "{line}");
        }
        self.entries.write().unwrap().insert(key, rec);
    }
}

/// Full single-mention flow: cache -> prompt -> backend (with transport
/// retries) -> parse (with one re-prompt) -> polygon verification -> cache.
pub fn disambiguate(
    req: &DisambiguationRequest,
    backend: &dyn LlmBackend,
    gazetteer: &Gazetteer,
    cache: &DisambiguationCache,
    policy: &RetryPolicy,
) -> Result<DisambiguatedToponym, DisambiguationFailure> {
    let key = CacheKey::for_request(req);
    if let Some(hit) = cache.get(&key, &req.mention) {
        return Ok(hit);
    }
    let prompt = build_prompt(req);
    let text = call_with_retry(backend, &prompt, policy)?;
    let raw = match parse_response(&text) {
        Ok(raw) => raw,
        Err(_) => {
            let retry_prompt = format!("{prompt}{RETRY_SUFFIX}");
            let text = call_with_retry(backend, &retry_prompt, policy)?;
            parse_response(&text).map_err(DisambiguationFailure::Unresolved)?
        }
    };
    let resolution = gazetteer.resolve_point(&raw.point);
    let verified = resolution.at(raw.adm).is_some();
    let result = DisambiguatedToponym {
        mention: req.mention.clone(),
        point: raw.point,
        adm: raw.adm,
        resolution: ResolvedIds::from_resolution(&resolution),
        verified,
    };
    cache.put(key, &result);
    Ok(result)
}

/// Runs requests through `disambiguate` with at most `max_in_flight`
/// concurrent backend calls. Output order equals input order; individual
/// failures are carried in place and never abort the batch.
pub fn batch_disambiguate(
    requests: &[DisambiguationRequest],
    backend: &dyn LlmBackend,
    gazetteer: &Gazetteer,
    cache: &DisambiguationCache,
    max_in_flight: usize,
    policy: &RetryPolicy,
) -> Vec<Result<DisambiguatedToponym, DisambiguationFailure>> {
    assert!(max_in_flight >= 1, "max_in_flight must be >= 1");
    let workers = if backend.supports_concurrency() {
        max_in_flight.min(requests.len().max(1))
    } else {
        1
    };
    if workers <= 1 {
        return requests
            .iter()
            .map(|req| disambiguate(req, backend, gazetteer, cache, policy))
            .collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<DisambiguatedToponym, DisambiguationFailure>>>> =
        requests.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= requests.len() {
                    break;
                }
                let result = disambiguate(&requests[i], backend, gazetteer, cache, policy);
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    slots
        .into_iter()
        .map(|slot| slot.into_inner().unwrap().expect("worker filled slot"))
        .collect()
}
