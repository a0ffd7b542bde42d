//! Resolution of link targets to knowledge-base classes over SPARQL.
//!
//! Targets are looked up in batches with a `VALUES` clause. A batch that
//! still fails after its retries is split into single-target queries, and a
//! target whose own query fails is reported as unresolved. Class lists keep
//! the order of the result bindings, which is then frozen by the cache.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::thread;
use std::time::{Duration, Instant};

use serde::Deserialize;
use uner_core::catalog::ClassCatalog;
use uner_core::uri::{build_entity_uri, EntityUri, DEFAULT_RESOURCE_BASE};

pub const DEFAULT_ENDPOINT: &str = "https://dbpedia.org/sparql";
pub const ENDPOINT_ENV: &str = "UNER_SPARQL_ENDPOINT";
pub const DEFAULT_BATCH_SIZE: usize = 50;

/// Every `rdf:type` of each entity in `{values}`.
pub const QUERY_TEMPLATE: &str = "\
PREFIX rdf: <http://www.w3.org/1999/02/22-rdf-syntax-ns#>
SELECT ?entity ?type WHERE {
  VALUES ?entity { {values} }
  ?entity rdf:type ?type .
}";

/// IRI namespaces written as `prefix:local` in the catalog.
pub const PREFIXES: &[(&str, &str)] = &[
    ("dbo", "http://dbpedia.org/ontology/"),
    ("owl", "http://www.w3.org/2002/07/owl#"),
    ("schema", "http://schema.org/"),
    ("foaf", "http://xmlns.com/foaf/0.1/"),
    ("wikidata", "http://www.wikidata.org/entity/"),
    ("dul", "http://www.ontologydesignpatterns.org/ont/dul/DUL.owl#"),
    ("yago", "http://dbpedia.org/class/yago/"),
    ("umbel-rc", "http://umbel.org/umbel/rc/"),
    ("skos", "http://www.w3.org/2004/02/skos/core#"),
    ("rdfs", "http://www.w3.org/2000/01/rdf-schema#"),
];

pub fn compact_iri(iri: &str) -> String {
    for (prefix, ns) in PREFIXES {
        if let Some(local) = iri.strip_prefix(ns) {
            if !local.is_empty() {
                return format!("{prefix}:{local}");
            }
        }
    }
    iri.to_owned()
}

pub fn build_query(uris: &[&str]) -> String {
    let values: Vec<String> = uris.iter().map(|u| format!("<{u}>")).collect();
    QUERY_TEMPLATE.replace("{values}", &values.join(" "))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransportError(pub String);

impl fmt::Display for TransportError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for TransportError {}

/// Sends one SPARQL query and returns the JSON results document.
pub trait SparqlTransport: Send + Sync {
    fn execute(&self, query: &str) -> Result<String, TransportError>;
}

pub struct HttpTransport {
    agent: ureq::Agent,
    endpoint: String,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .user_agent(concat!("uner/", env!("CARGO_PKG_VERSION")))
            .build()
            .into();
        HttpTransport {
            agent,
            endpoint: endpoint.into(),
        }
    }
}

impl SparqlTransport for HttpTransport {
    fn execute(&self, query: &str) -> Result<String, TransportError> {
        let mut resp = self
            .agent
            .post(&self.endpoint)
            .header("Accept", "application/sparql-results+json")
            .send_form([("query", query)])
            .map_err(|e| TransportError(e.to_string()))?;
        resp.body_mut()
            .read_to_string()
            .map_err(|e| TransportError(e.to_string()))
    }
}

/// Monotonic time source, replaceable in tests.
pub trait Clock: Send + Sync {
    fn now(&self) -> Duration;
    fn sleep(&self, d: Duration);
}

pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, d: Duration) {
        thread::sleep(d);
    }
}

/// Spaces request start times at least `1 / rate` seconds apart.
pub struct RateLimiter {
    interval: Duration,
    next: Mutex<Duration>,
    clock: Arc<dyn Clock>,
}

impl RateLimiter {
    /// A rate of zero or below disables limiting.
    pub fn new(requests_per_second: f64, clock: Arc<dyn Clock>) -> Self {
        let interval = if requests_per_second > 0.0 {
            Duration::from_secs_f64(1.0 / requests_per_second)
        } else {
            Duration::ZERO
        };
        RateLimiter {
            interval,
            next: Mutex::new(Duration::ZERO),
            clock,
        }
    }

    /// Blocks until the caller may send; returns the granted start time.
    pub fn acquire(&self) -> Duration {
        let (slot, wait) = {
            let mut next = self.next.lock().expect("limiter lock");
            let now = self.clock.now();
            let slot = (*next).max(now);
            *next = slot + self.interval;
            (slot, slot.saturating_sub(now))
        };
        if !wait.is_zero() {
            self.clock.sleep(wait);
        }
        slot
    }

    pub fn clock(&self) -> &Arc<dyn Clock> {
        &self.clock
    }
}

#[derive(Debug, Clone)]
pub struct LinkerConfig {
    pub resource_base: String,
    pub batch_size: usize,
    /// Extra attempts after the first failure.
    pub retries: u32,
    /// Wait before the first retry; doubled for each further retry.
    pub backoff: Duration,
    pub concurrency: usize,
    pub requests_per_second: f64,
}

impl Default for LinkerConfig {
    fn default() -> Self {
        LinkerConfig {
            resource_base: DEFAULT_RESOURCE_BASE.to_owned(),
            batch_size: DEFAULT_BATCH_SIZE,
            retries: 2,
            backoff: Duration::from_millis(500),
            concurrency: 4,
            requests_per_second: 5.0,
        }
    }
}

pub struct Linker {
    transport: Arc<dyn SparqlTransport>,
    limiter: RateLimiter,
    config: LinkerConfig,
    requests: AtomicUsize,
    failures: AtomicUsize,
}

#[derive(Deserialize)]
struct Results {
    results: Bindings,
}

#[derive(Deserialize)]
struct Bindings {
    bindings: Vec<BTreeMap<String, Term>>,
}

#[derive(Deserialize)]
struct Term {
    value: String,
}

/// Entity IRI → types in binding order.
pub fn parse_results(body: &str) -> Result<Vec<(String, String)>, TransportError> {
    let parsed: Results =
        serde_json::from_str(body).map_err(|e| TransportError(format!("bad SPARQL JSON: {e}")))?;
    Ok(parsed
        .results
        .bindings
        .into_iter()
        .filter_map(|mut b| Some((b.remove("entity")?.value, b.remove("type")?.value)))
        .collect())
}

/// Targets whose lookup failed, with the last error.
pub type Failures = Vec<(String, TransportError)>;

/// Outcome of one lookup unit (a batch or a single target).
enum Lookup {
    Resolved(Vec<(String, Vec<String>)>),
    Failed(TransportError),
}

impl Linker {
    pub fn new(transport: Arc<dyn SparqlTransport>, clock: Arc<dyn Clock>, config: LinkerConfig) -> Self {
        Linker {
            limiter: RateLimiter::new(config.requests_per_second, clock),
            transport,
            config,
            requests: AtomicUsize::new(0),
            failures: AtomicUsize::new(0),
        }
    }

    /// Requests sent so far, retries included.
    pub fn requests(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }

    pub fn failed_requests(&self) -> usize {
        self.failures.load(Ordering::SeqCst)
    }

    fn send(&self, query: &str) -> Result<String, TransportError> {
        let mut delay = self.config.backoff;
        let mut attempt = 0;
        loop {
            self.limiter.acquire();
            self.requests.fetch_add(1, Ordering::SeqCst);
            match self.transport.execute(query) {
                Ok(body) => return Ok(body),
                Err(e) => {
                    self.failures.fetch_add(1, Ordering::SeqCst);
                    if attempt >= self.config.retries {
                        return Err(e);
                    }
                }
            }
            attempt += 1;
            self.limiter.clock().sleep(delay);
            delay = delay.saturating_mul(2);
        }
    }

    fn lookup(&self, targets: &[String]) -> Lookup {
        let mut by_uri: BTreeMap<String, &str> = BTreeMap::new();
        for t in targets {
            match build_entity_uri(t, &self.config.resource_base) {
                Ok(uri) => {
                    by_uri.insert(uri.as_str().to_owned(), t);
                }
                Err(e) => return Lookup::Failed(TransportError(format!("{t:?}: {e}"))),
            }
        }
        let uris: Vec<&str> = by_uri.keys().map(String::as_str).collect();
        let body = match self.send(&build_query(&uris)) {
            Ok(b) => b,
            Err(e) => return Lookup::Failed(e),
        };
        let rows = match parse_results(&body) {
            Ok(r) => r,
            Err(e) => return Lookup::Failed(e),
        };
        let mut classes: BTreeMap<&str, Vec<String>> = targets.iter().map(|t| (t.as_str(), Vec::new())).collect();
        for (entity, ty) in rows {
            if let Some(target) = by_uri.get(&entity) {
                classes.get_mut(target).expect("seeded").push(compact_iri(&ty));
            }
        }
        Lookup::Resolved(
            targets
                .iter()
                .map(|t| (t.clone(), classes.remove(t.as_str()).unwrap_or_default()))
                .collect(),
        )
    }

    /// Every rdf:type of one entity, deduplicated, in response order.
    pub fn query_classes(&self, uri: &EntityUri) -> Result<Vec<String>, TransportError> {
        let body = self.send(&build_query(&[uri.as_str()]))?;
        let mut classes: Vec<String> = Vec::new();
        for (entity, ty) in parse_results(&body)? {
            let ty = compact_iri(&ty);
            if entity == uri.as_str() && !classes.contains(&ty) {
                classes.push(ty);
            }
        }
        Ok(classes)
    }

    /// Looks up one batch, falling back to one query per target.
    fn lookup_batch(&self, batch: &[String]) -> (Vec<(String, Vec<String>)>, Failures) {
        match self.lookup(batch) {
            Lookup::Resolved(r) => (r, Vec::new()),
            Lookup::Failed(e) if batch.len() == 1 => (Vec::new(), vec![(batch[0].clone(), e)]),
            Lookup::Failed(_) => {
                let mut ok = Vec::new();
                let mut failed = Vec::new();
                for t in batch {
                    match self.lookup(std::slice::from_ref(t)) {
                        Lookup::Resolved(r) => ok.extend(r),
                        Lookup::Failed(e) => failed.push((t.clone(), e)),
                    }
                }
                (ok, failed)
            }
        }
    }

    /// Queries `targets` with up to `concurrency` requests in flight. The
    /// calling thread is the only one writing to the returned catalog.
    pub fn query_all(&self, targets: &[String]) -> (ClassCatalog, Failures) {
        let batches: Vec<&[String]> = targets.chunks(self.config.batch_size.max(1)).collect();
        let next = AtomicUsize::new(0);
        let workers = self.config.concurrency.max(1).min(batches.len().max(1));
        let mut catalog = ClassCatalog::new();
        let mut failed = Vec::new();
        thread::scope(|s| {
            let (tx, rx) = mpsc::channel();
            for _ in 0..workers {
                let tx = tx.clone();
                let next = &next;
                let batches = &batches;
                s.spawn(move || loop {
                    let i = next.fetch_add(1, Ordering::SeqCst);
                    let Some(batch) = batches.get(i) else { break };
                    if tx.send(self.lookup_batch(batch)).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for (ok, bad) in rx {
                for (target, classes) in ok {
                    catalog.insert(target, classes);
                }
                failed.extend(bad);
            }
        });
        failed.sort_by(|a, b| a.0.cmp(&b.0));
        (catalog, failed)
    }
}

/// One-off lookup against a live endpoint.
pub fn query_classes(
    uri: &EntityUri,
    endpoint: &str,
    timeout: Duration,
    retries: u32,
) -> Result<Vec<String>, TransportError> {
    let linker = Linker::new(
        Arc::new(HttpTransport::new(endpoint, timeout)),
        Arc::new(SystemClock::default()),
        LinkerConfig {
            retries,
            concurrency: 1,
            ..LinkerConfig::default()
        },
    );
    linker.query_classes(uri)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Resolution {
    /// Class lists for every target that has one, restricted to the input.
    pub catalog: ClassCatalog,
    /// Distinct targets asked for.
    pub targets: usize,
    /// The previous cache plus everything newly resolved.
    pub cache: ClassCatalog,
    pub cache_hits: usize,
    pub queried: usize,
    pub requests: usize,
    pub unresolved: Vec<String>,
    /// True when requests were sent and every one of them failed.
    pub network_exhausted: bool,
    pub errors: Vec<String>,
}

/// Resolves `targets` from `cache`, querying `linker` for the rest. Without a
/// linker every cache miss is unresolved.
pub fn resolve_all(targets: &[String], cache: &ClassCatalog, linker: Option<&Linker>) -> Resolution {
    let wanted: BTreeSet<&str> = targets.iter().map(String::as_str).collect();
    let misses: Vec<String> = wanted
        .iter()
        .filter(|t| !cache.contains(t))
        .map(|t| (*t).to_owned())
        .collect();
    let mut res = Resolution {
        cache: cache.clone(),
        targets: wanted.len(),
        cache_hits: wanted.len() - misses.len(),
        ..Resolution::default()
    };
    match linker {
        None => res.unresolved = misses,
        Some(linker) => {
            let before = (linker.requests(), linker.failed_requests());
            let (found, failed) = linker.query_all(&misses);
            let sent = linker.requests() - before.0;
            let failures = linker.failed_requests() - before.1;
            res.queried = misses.len();
            res.requests = sent;
            res.network_exhausted = sent > 0 && failures == sent;
            res.errors = failed.iter().map(|(t, e)| format!("{t}: {e}")).collect();
            res.unresolved = failed.into_iter().map(|(t, _)| t).collect();
            res.cache.extend(found);
        }
    }
    res.catalog = res.cache.restrict(wanted.iter().copied());
    res
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Default)]
    struct ManualClock {
        now: Mutex<Duration>,
    }

    impl Clock for ManualClock {
        fn now(&self) -> Duration {
            *self.now.lock().unwrap()
        }

        fn sleep(&self, d: Duration) {
            *self.now.lock().unwrap() += d;
        }
    }

    #[test]
    fn limiter_spaces_requests() {
        let clock = Arc::new(ManualClock::default());
        let limiter = RateLimiter::new(4.0, clock.clone());
        let slots: Vec<Duration> = (0..9).map(|_| limiter.acquire()).collect();
        for w in slots.windows(2) {
            assert!(w[1] - w[0] >= Duration::from_millis(250));
        }
        // at most 4 starts in any one-second window
        for (i, s) in slots.iter().enumerate() {
            let within = slots[i..].iter().filter(|t| **t < *s + Duration::from_secs(1)).count();
            assert!(within <= 4);
        }
    }

    #[test]
    fn prefixed_names() {
        assert_eq!(compact_iri("http://dbpedia.org/ontology/SportsEvent"), "dbo:SportsEvent");
        assert_eq!(compact_iri("http://www.w3.org/2002/07/owl#Thing"), "owl:Thing");
        assert_eq!(compact_iri("http://example.org/X"), "http://example.org/X");
    }

    #[test]
    fn query_lists_every_uri() {
        let q = build_query(&["http://dbpedia.org/resource/A", "http://dbpedia.org/resource/B"]);
        assert!(q.contains("VALUES ?entity { <http://dbpedia.org/resource/A> <http://dbpedia.org/resource/B> }"));
    }

    #[test]
    fn results_keep_binding_order() {
        let body = r#"{"head":{"vars":["entity","type"]},"results":{"bindings":[
            {"entity":{"type":"uri","value":"e"},"type":{"type":"uri","value":"b"}},
            {"entity":{"type":"uri","value":"e"},"type":{"type":"uri","value":"a"}}]}}"#;
        assert_eq!(
            parse_results(body).unwrap(),
            [("e".to_owned(), "b".to_owned()), ("e".to_owned(), "a".to_owned())]
        );
        assert!(parse_results("<html>").is_err());
    }

    #[test]
    fn offline_misses_are_unresolved() {
        let mut cache = ClassCatalog::new();
        cache.insert("X", ["dbo:Event"]);
        let r = resolve_all(&["X".to_owned(), "Y".to_owned()], &cache, None);
        assert_eq!(r.catalog.get("X").unwrap(), ["dbo:Event"]);
        assert_eq!(r.unresolved, ["Y"]);
        assert_eq!(r.requests, 0);
        assert!(!r.network_exhausted);
    }
}
