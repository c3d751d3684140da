//! HTTP service for predictive editors: parse sessions that grow one token
//! at a time, their next-token options, and runtime lexicon extension.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{delete, get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as Json_};

use crate::chart::{parse, ParseSession, Status};
use crate::grammar::{Category, FeatureStructure, Grammar, LexiconUpdate, Rule, RuleKind, Value};
use crate::lookahead::{next_tokens, AbstractOption};
use crate::symbol::Sym;

pub const DEFAULT_SESSION_TTL: Duration = Duration::from_secs(30 * 60);

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError { status, message: message.into() }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

struct StoredGrammar {
    grammar: Grammar,
    /// Bumped on every lexicon change, so sessions can pick up new entries.
    version: u64,
}

struct SessionEntry {
    grammar_id: String,
    version: u64,
    session: ParseSession,
    created: Instant,
    last_access: Instant,
}

struct Inner {
    grammars: RwLock<BTreeMap<String, StoredGrammar>>,
    sessions: Mutex<HashMap<String, Arc<Mutex<SessionEntry>>>>,
    ttl: Duration,
}

/// Shared service state: the grammar store and the session table.
#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

impl AppState {
    pub fn new(ttl: Duration) -> Self {
        AppState {
            inner: Arc::new(Inner {
                grammars: RwLock::new(BTreeMap::new()),
                sessions: Mutex::new(HashMap::new()),
                ttl,
            }),
        }
    }

    pub fn add_grammar(&self, id: &str, grammar: Grammar) {
        self.inner.grammars.write().unwrap().insert(id.to_owned(), StoredGrammar { grammar, version: 0 });
    }

    pub fn grammar(&self, id: &str) -> Option<Grammar> {
        self.inner.grammars.read().unwrap().get(id).map(|g| g.grammar.clone())
    }

    pub fn session_count(&self) -> usize {
        self.inner.sessions.lock().unwrap().len()
    }

    /// Drops sessions idle for longer than the configured time to live.
    pub fn expire_idle(&self) -> usize {
        let now = Instant::now();
        let mut sessions = self.inner.sessions.lock().unwrap();
        let before = sessions.len();
        sessions.retain(|_, entry| match entry.try_lock() {
            Ok(e) => now.duration_since(e.last_access) <= self.inner.ttl,
            Err(_) => true,
        });
        before - sessions.len()
    }

    fn session(&self, id: &str) -> Result<Arc<Mutex<SessionEntry>>, ApiError> {
        self.expire_idle();
        self.inner
            .sessions
            .lock()
            .unwrap()
            .get(id)
            .cloned()
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown session '{id}'")))
    }

    /// Runs `f` on a session under its lock, after bringing its lexicon up
    /// to date.
    fn with_session<T>(
        &self,
        id: &str,
        f: impl FnOnce(&mut SessionEntry) -> Result<T, ApiError>,
    ) -> Result<T, ApiError> {
        let entry = self.session(id)?;
        let mut entry = entry.lock().unwrap();
        entry.last_access = Instant::now();
        if let Some(stored) = self.inner.grammars.read().unwrap().get(&entry.grammar_id) {
            if stored.version != entry.version {
                entry.session.set_grammar(stored.grammar.clone());
                entry.version = stored.version;
            }
        }
        f(&mut entry)
    }
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/sessions", post(create_session))
        .route("/sessions/{id}", get(session_info).delete(delete_session))
        .route("/sessions/{id}/tokens", post(push_token))
        .route("/sessions/{id}/tokens/last", delete(pop_token))
        .route("/sessions/{id}/options", get(options))
        .route("/sessions/{id}/tree", get(tree))
        .route("/grammar/{id}/lexicon", post(add_word))
        .with_state(state)
}

/// Serves until the process is stopped, expiring idle sessions once a minute.
pub async fn serve(state: AppState, listener: tokio::net::TcpListener) -> std::io::Result<()> {
    let sweeper = state.clone();
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            sweeper.expire_idle();
        }
    });
    axum::serve(listener, router(state)).await
}

#[derive(Deserialize)]
#[serde(rename_all = "camelCase")]
struct CreateSession {
    grammar_id: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct Created {
    session_id: String,
}

async fn create_session(State(state): State<AppState>, Json(req): Json<CreateSession>) -> Result<Response, ApiError> {
    let (grammar, version) = {
        let grammars = state.inner.grammars.read().unwrap();
        let stored = grammars
            .get(&req.grammar_id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown grammar '{}'", req.grammar_id)))?;
        (stored.grammar.clone(), stored.version)
    };
    let id = uuid::Uuid::new_v4().to_string();
    let now = Instant::now();
    let entry = SessionEntry {
        grammar_id: req.grammar_id,
        version,
        session: ParseSession::new(grammar),
        created: now,
        last_access: now,
    };
    state.expire_idle();
    state.inner.sessions.lock().unwrap().insert(id.clone(), Arc::new(Mutex::new(entry)));
    Ok((StatusCode::CREATED, Json(Created { session_id: id })).into_response())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionState {
    status: Status,
    tokens: Vec<String>,
}

fn state_of(entry: &SessionEntry) -> SessionState {
    SessionState { status: entry.session.status(), tokens: entry.session.tokens().to_vec() }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SessionInfo {
    grammar_id: String,
    status: Status,
    tokens: Vec<String>,
    age_seconds: u64,
}

async fn session_info(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionInfo> {
    state.with_session(&id, |e| {
        Ok(Json(SessionInfo {
            grammar_id: e.grammar_id.clone(),
            status: e.session.status(),
            tokens: e.session.tokens().to_vec(),
            age_seconds: e.created.elapsed().as_secs(),
        }))
    })
}

async fn delete_session(State(state): State<AppState>, Path(id): Path<String>) -> Result<StatusCode, ApiError> {
    match state.inner.sessions.lock().unwrap().remove(&id) {
        Some(_) => Ok(StatusCode::NO_CONTENT),
        None => Err(ApiError::new(StatusCode::NOT_FOUND, format!("unknown session '{id}'"))),
    }
}

#[derive(Deserialize)]
struct PushToken {
    token: String,
}

async fn push_token(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(req): Json<PushToken>,
) -> ApiResult<SessionState> {
    state.with_session(&id, |e| match e.session.push(&req.token) {
        Ok(_) => Ok(Json(state_of(e))),
        Err(refused) => Err(ApiError::new(StatusCode::CONFLICT, refused.to_string())),
    })
}

async fn pop_token(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<SessionState> {
    state.with_session(&id, |e| {
        let mut tokens = e.session.tokens().to_vec();
        if tokens.pop().is_none() {
            return Err(ApiError::new(StatusCode::CONFLICT, "the session has no tokens"));
        }
        e.session = parse(e.session.grammar(), &tokens);
        Ok(Json(state_of(e)))
    })
}

#[derive(Serialize)]
struct ConcreteJson {
    surface: String,
    source: Option<String>,
}

#[derive(Serialize)]
struct AbstractJson {
    category: String,
    kind: &'static str,
    features: BTreeMap<String, Option<String>>,
    exceptions: Vec<BTreeMap<String, Option<String>>>,
    text: String,
}

#[derive(Serialize)]
struct OptionsJson {
    status: Status,
    concrete: Vec<ConcreteJson>,
    #[serde(rename = "abstract")]
    abstract_options: Vec<AbstractJson>,
}

/// Features as a JSON object; unbound variables become `null`.
fn features_json(fs: &FeatureStructure) -> BTreeMap<String, Option<String>> {
    fs.iter()
        .map(|(name, value)| {
            let v = match value {
                Value::Const(c) => Some(c.as_str().to_owned()),
                Value::Var(_) => None,
            };
            (name.as_str().to_owned(), v)
        })
        .collect()
}

fn abstract_json(option: &AbstractOption) -> AbstractJson {
    AbstractJson {
        category: option.category.name.as_str().to_owned(),
        kind: if option.category.is_terminal() { "terminal" } else { "preterminal" },
        features: features_json(&option.category.fs),
        exceptions: option.exceptions.iter().map(|x| features_json(&x.fs)).collect(),
        text: option.to_string(),
    }
}

async fn options(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<OptionsJson> {
    state.with_session(&id, |e| {
        let options = next_tokens(&e.session);
        Ok(Json(OptionsJson {
            status: e.session.status(),
            concrete: options
                .concrete
                .into_iter()
                .map(|c| ConcreteJson { surface: c.surface, source: c.source })
                .collect(),
            abstract_options: options.abstract_options.iter().map(abstract_json).collect(),
        }))
    })
}

async fn tree(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json_> {
    state.with_session(&id, |e| {
        if !e.session.is_complete() {
            return Err(ApiError::new(StatusCode::CONFLICT, "the text is not complete"));
        }
        let trees = e.session.trees(1);
        let tree = trees.first().ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "no syntax tree"))?;
        Ok(Json(json!({
            "tree": tree,
            "text": tree.to_string(),
            "derivations": e.session.derivation_count().to_string(),
        })))
    })
}

#[derive(Deserialize)]
struct NewWord {
    preterminal: String,
    #[serde(default)]
    features: BTreeMap<String, String>,
    surface: String,
}

fn lexical_rule(word: &NewWord) -> Result<Rule, String> {
    let name = word.preterminal.trim();
    if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
        return Err(format!("invalid pre-terminal name '{}'", word.preterminal));
    }
    if word.surface.trim().is_empty() {
        return Err("the surface must not be empty".into());
    }
    let mut pairs = Vec::new();
    for (feature, value) in &word.features {
        if feature.is_empty() || value.is_empty() {
            return Err(format!("invalid feature '{feature}:{value}'"));
        }
        pairs.push((Sym::new(feature), Value::constant(value)));
    }
    let fs = FeatureStructure::from_pairs(pairs).map_err(|f| format!("feature '{f}' given twice"))?;
    Ok(Rule {
        head: Category::preterminal(name, fs),
        kind: RuleKind::Lexical,
        body: vec![crate::grammar::Element::Cat(Category::terminal(word.surface.trim()))],
        var_names: Vec::new(),
    })
}

async fn add_word(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Json(word): Json<NewWord>,
) -> Result<Response, ApiError> {
    let rule = lexical_rule(&word).map_err(|m| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, m))?;
    let mut grammars = state.inner.grammars.write().unwrap();
    let stored =
        grammars.get_mut(&id).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown grammar '{id}'")))?;
    if !stored.grammar.preterminals().contains(&rule.head.name) {
        return Err(ApiError::new(
            StatusCode::UNPROCESSABLE_ENTITY,
            format!("'{}' is not a pre-terminal of grammar '{id}'", rule.head.name),
        ));
    }
    let mut grammar = stored.grammar.clone();
    let update = grammar
        .add_lexical_rule(rule.clone())
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()))?;
    if update == LexiconUpdate::Added {
        stored.grammar = grammar;
        stored.version += 1;
    }
    let status = if update == LexiconUpdate::Added { StatusCode::CREATED } else { StatusCode::OK };
    let body = json!({ "added": update == LexiconUpdate::Added, "rule": rule.to_string() });
    Ok((status, Json(body)).into_response())
}
