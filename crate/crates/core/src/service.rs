//! REST API over the annotation pipeline.
//!
//! | method | path | |
//! |---|---|---|
//! | POST | `/sessions` | upload a ZIP or a single book XML (raw body or multipart) |
//! | GET | `/sessions/{id}/taxonomy?minChapters=k` | filtered tree, topics and codes with previous-edition marks |
//! | GET | `/sessions/{id}/topics/{topic}/explanation` | ranked excerpts for a topic |
//! | GET | `/sessions/{id}/chapters` | chapters with evidence and abstract highlights |
//! | POST | `/sessions/{id}/submit` | persist an annotation record |
//! | GET | `/series/{id}/history` | stored records of a conference series |
//! | GET | `/topics/{topic}` | ontology entry for a topic |
//! | GET | `/health` | liveness and counters |
//!
//! Every error body is `{"code": ..., "message": ...}`.

use std::collections::{BTreeSet, HashMap};
use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};
use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Path, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use chrono::{DateTime, Datelike, Utc};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::history::{AddedTopic, AnnotationRecord, AnnotationStore, RecordError, StoredRecord};
use crate::ingest::{parse_upload, IngestError};
use crate::ontology::TopicId;
use crate::pipeline::{Analysis, Engine};

pub const DEFAULT_IDLE_TIMEOUT: Duration = Duration::from_secs(2 * 60 * 60);
const MAX_UPLOAD_BYTES: usize = 512 * 1024 * 1024;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        ApiError { status, code, message: message.into() }
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    fn internal(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({"code": self.code, "message": self.message}))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

pub struct Session {
    pub id: String,
    pub created_at: DateTime<Utc>,
    pub analysis: Analysis,
    last_access: Mutex<Instant>,
}

impl Session {
    fn touch(&self) {
        if let Ok(mut t) = self.last_access.lock() {
            *t = Instant::now();
        }
    }

    fn idle_for(&self) -> Duration {
        self.last_access.lock().map(|t| t.elapsed()).unwrap_or_default()
    }
}

pub struct AppState {
    pub engine: Arc<Engine>,
    pub store: Arc<AnnotationStore>,
    pub default_min_chapters: usize,
    pub idle_timeout: Duration,
    sessions: RwLock<HashMap<String, Arc<Session>>>,
}

impl AppState {
    pub fn new(engine: Arc<Engine>, store: Arc<AnnotationStore>) -> Self {
        AppState {
            engine,
            store,
            default_min_chapters: 1,
            idle_timeout: DEFAULT_IDLE_TIMEOUT,
            sessions: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_idle_timeout(mut self, timeout: Duration) -> Self {
        self.idle_timeout = timeout;
        self
    }

    pub fn with_default_min_chapters(mut self, k: usize) -> Self {
        self.default_min_chapters = k.max(1);
        self
    }

    pub fn session_count(&self) -> usize {
        self.sessions.read().map(|s| s.len()).unwrap_or(0)
    }

    /// Drop sessions idle longer than the timeout; returns how many were dropped.
    pub fn evict_idle(&self) -> usize {
        let Ok(mut sessions) = self.sessions.write() else { return 0 };
        let before = sessions.len();
        sessions.retain(|_, s| s.idle_for() < self.idle_timeout);
        before - sessions.len()
    }

    fn session(&self, id: &str) -> ApiResult<Arc<Session>> {
        let sessions = self.sessions.read().map_err(|_| ApiError::internal("session table poisoned"))?;
        match sessions.get(id) {
            Some(s) if s.idle_for() < self.idle_timeout => {
                s.touch();
                Ok(Arc::clone(s))
            }
            _ => Err(ApiError::not_found(format!("no session {id}"))),
        }
    }

    fn previous(&self, a: &Analysis) -> ApiResult<Option<StoredRecord>> {
        let Some(series) = a.conf_series_id() else { return Ok(None) };
        self.store
            .previous_annotations(series, a.year())
            .map_err(|e| ApiError::internal(e.to_string()))
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create_session))
        .route("/sessions/{id}/taxonomy", get(get_taxonomy))
        .route("/sessions/{id}/topics/{topic}/explanation", get(get_explanation))
        .route("/sessions/{id}/chapters", get(get_chapters))
        .route("/sessions/{id}/submit", post(submit))
        .route("/series/{id}/history", get(get_history))
        .route("/topics/{topic}", get(get_topic))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(state)
}

/// Serve until ctrl-c, evicting idle sessions in the background.
pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    let sweeper = Arc::clone(&state);
    tokio::spawn(async move {
        let mut tick = tokio::time::interval(Duration::from_secs(60));
        loop {
            tick.tick().await;
            let n = sweeper.evict_idle();
            if n > 0 {
                log::info!("evicted {n} idle sessions");
            }
        }
    });
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}

async fn health(State(state): State<Arc<AppState>>) -> Json<Value> {
    let engine = &state.engine;
    Json(json!({
        "status": "ok",
        "topics": engine.ontology().len(),
        "modelTokens": engine.classifier().model().map_or(0, |m| m.len()),
        "codes": engine.scheme().map_or(0, |s| s.codes().count()),
        "sessions": state.session_count(),
        "classificationRuns": engine.classification_runs(),
        "annotations": state.store.len(),
    }))
}

async fn upload_bytes(state: &Arc<AppState>, req: Request) -> ApiResult<Bytes> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    if !is_multipart {
        return Bytes::from_request(req, state)
            .await
            .map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", e.body_text()));
    }
    let bad = |m: String| ApiError::new(StatusCode::BAD_REQUEST, "bad_request", m);
    let mut form = Multipart::from_request(req, state).await.map_err(|e| bad(e.body_text()))?;
    while let Some(field) = form.next_field().await.map_err(|e| bad(e.body_text()))? {
        if field.file_name().is_some() || field.name() == Some("archive") {
            return field.bytes().await.map_err(|e| bad(e.body_text()));
        }
    }
    Err(bad("multipart body has no file field".into()))
}

async fn create_session(State(state): State<Arc<AppState>>, req: Request) -> ApiResult<Response> {
    let bytes = upload_bytes(&state, req).await?;
    let contents = parse_upload(&bytes).map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "parse_error", e.to_string()))?;
    if contents.books.is_empty() {
        let detail: Vec<String> = contents.errors.iter().map(|e| e.to_string()).collect();
        if contents.errors.iter().any(|e| matches!(e.error, IngestError::Xml(_))) {
            return Err(ApiError::new(StatusCode::BAD_REQUEST, "parse_error", detail.join("; ")));
        }
        let message = if detail.is_empty() { "no books".to_string() } else { format!("no books: {}", detail.join("; ")) };
        return Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "schema_error", message));
    }

    let engine = Arc::clone(&state.engine);
    let analysis = tokio::task::spawn_blocking(move || engine.analyze(contents.books, contents.errors, true))
        .await
        .map_err(|e| ApiError::internal(format!("classification failed: {e}")))?;

    let id = uuid::Uuid::new_v4().simple().to_string();
    let summary = json!({
        "sessionId": id,
        "books": analysis.books.iter().map(|b| json!({"volumeNumber": b.volume_number, "title": b.title})).collect::<Vec<_>>(),
        "confSeriesId": analysis.conf_series_id(),
        "year": analysis.year(),
        "chapterCount": analysis.chapter_count(),
        "topicCount": analysis.classification.topic_chapter_count.len(),
        "pmcCount": analysis.pmcs.len(),
        "ingestErrors": analysis.ingest_errors.iter().map(|e| json!({"entry": e.entry, "message": e.error.to_string()})).collect::<Vec<_>>(),
    });
    let session = Arc::new(Session {
        id: id.clone(),
        created_at: Utc::now(),
        analysis,
        last_access: Mutex::new(Instant::now()),
    });
    state.evict_idle();
    state
        .sessions
        .write()
        .map_err(|_| ApiError::internal("session table poisoned"))?
        .insert(id.clone(), session);
    log::info!("session {id} created");
    Ok((StatusCode::CREATED, Json(summary)).into_response())
}

async fn get_taxonomy(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(params): Query<HashMap<String, String>>,
) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let min_chapters = match params.get("minChapters") {
        None => state.default_min_chapters,
        Some(raw) => match raw.parse::<i64>() {
            Ok(k) if k >= 1 => k as usize,
            _ => {
                return Err(ApiError::new(
                    StatusCode::BAD_REQUEST,
                    "bad_request",
                    format!("minChapters must be an integer >= 1, got {raw:?}"),
                ))
            }
        },
    };
    let a = &session.analysis;
    let previous = state.previous(a)?;
    Ok(Json(json!({
        "sessionId": session.id,
        "createdAt": session.created_at,
        "minChapters": min_chapters,
        "chapterCount": a.chapter_count(),
        "confSeriesId": a.conf_series_id(),
        "taxonomy": a.taxonomy(min_chapters),
        "topics": a.topics(previous.as_ref()),
        "pmcs": a.pmcs(previous.as_ref()),
        "previousEdition": previous.map(|p| json!({"receipt": p.receipt, "year": p.record.year})),
    })))
}

/// Classified topic named by `raw`, directly or through an alias.
fn session_topic(a: &Analysis, ontology: &crate::ontology::Ontology, raw: &str) -> Option<TopicId> {
    let direct = TopicId::new(raw)?;
    if a.classification.contains(&direct) {
        return Some(direct);
    }
    ontology.resolve_label(raw).into_iter().find(|t| a.classification.contains(t))
}

async fn get_explanation(
    State(state): State<Arc<AppState>>,
    Path((id, topic)): Path<(String, String)>,
) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    let a = &session.analysis;
    let t = session_topic(a, state.engine.ontology(), &topic)
        .ok_or_else(|| ApiError::not_found(format!("topic {topic:?} is not classified in session {id}")))?;
    let ex = a.explanations.get(&t).ok_or_else(|| ApiError::not_found(format!("no explanation for {t}")))?;
    Ok(Json(json!({
        "topic": t,
        "label": a.label(&t),
        "chapterCount": a.classification.topic_chapter_count[&t],
        "excerpts": ex.excerpts,
    })))
}

async fn get_chapters(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let session = state.session(&id)?;
    Ok(Json(json!({"sessionId": session.id, "chapters": session.analysis.chapters_json()})))
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
struct SubmitRequest {
    conf_series_id: Option<String>,
    year: Option<i32>,
    volumes: Option<Vec<String>>,
    selected_topics: Vec<TopicId>,
    #[serde(default)]
    renames: std::collections::BTreeMap<TopicId, String>,
    #[serde(default)]
    added_topics: Vec<AddedTopic>,
    #[serde(default)]
    removed_topics: Vec<TopicId>,
    #[serde(default)]
    selected_pmcs: Vec<String>,
}

async fn submit(State(state): State<Arc<AppState>>, Path(id): Path<String>, body: Bytes) -> ApiResult<Response> {
    let session = state.session(&id)?;
    let a = &session.analysis;
    let req: SubmitRequest = serde_json::from_slice(&body)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_record", e.to_string()))?;

    let conflict = |m: String| ApiError::new(StatusCode::CONFLICT, "conflict", m);
    let added: BTreeSet<&TopicId> = req.added_topics.iter().map(|t| &t.topic).collect();
    let known = |t: &TopicId| a.classification.contains(t) || added.contains(t);
    for (what, list) in [("selected", &req.selected_topics), ("removed", &req.removed_topics)] {
        if let Some(t) = list.iter().find(|t| !known(t)) {
            return Err(conflict(format!("{what} topic {t} is not in the session and not declared as added")));
        }
    }
    if let Some(t) = req.renames.keys().find(|t| !known(t)) {
        return Err(conflict(format!("renamed topic {t} is not in the session and not declared as added")));
    }
    if let Some(t) = req.added_topics.iter().find(|t| !known(&t.parent)) {
        return Err(conflict(format!("added topic {} has unknown parent {}", t.topic, t.parent)));
    }
    let session_codes: BTreeSet<&str> = a.pmcs.iter().map(|p| p.code.as_str()).collect();
    let scheme = state.engine.scheme();
    if let Some(c) = req
        .selected_pmcs
        .iter()
        .find(|c| !session_codes.contains(c.as_str()) && scheme.is_none_or(|s| s.code(c).is_none()))
    {
        return Err(conflict(format!("code {c} is neither inferred for the session nor part of the scheme")));
    }

    let submitted_at = Utc::now();
    let conf_series_id = req
        .conf_series_id
        .or_else(|| a.conf_series_id().map(str::to_string))
        .ok_or_else(|| {
            ApiError::new(
                StatusCode::UNPROCESSABLE_ENTITY,
                "invalid_record",
                "confSeriesId is required when the books carry none",
            )
        })?;
    let record = AnnotationRecord {
        conf_series_id,
        year: req.year.or(a.year()).unwrap_or_else(|| submitted_at.year()),
        volumes: req.volumes.unwrap_or_else(|| a.volumes()),
        selected_topics: req.selected_topics,
        renames: req.renames,
        added_topics: req.added_topics,
        removed_topics: req.removed_topics,
        selected_pmcs: req.selected_pmcs,
        submitted_at,
    };
    let store = Arc::clone(&state.store);
    let to_store = record.clone();
    let receipt = tokio::task::spawn_blocking(move || store.record_annotation(to_store))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
        .map_err(|e| match e {
            RecordError::Validation(v) => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_record", v.0),
            RecordError::Store(s) => ApiError::internal(s.to_string()),
        })?;
    log::info!("session {id}: stored annotation receipt {receipt}");
    let stored = StoredRecord { receipt, record };
    Ok((StatusCode::CREATED, Json(json!({"receipt": receipt, "record": stored}))).into_response())
}

async fn get_history(State(state): State<Arc<AppState>>, Path(series): Path<String>) -> ApiResult<Json<Value>> {
    let records = state.store.history(&series).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(json!({"confSeriesId": series, "records": records})))
}

async fn get_topic(State(state): State<Arc<AppState>>, Path(topic): Path<String>) -> ApiResult<Json<Value>> {
    let o = state.engine.ontology();
    let t = TopicId::new(&topic)
        .filter(|t| o.contains(t))
        .or_else(|| o.resolve_label(&topic).into_iter().next())
        .ok_or_else(|| ApiError::not_found(format!("unknown topic {topic:?}")))?;
    let entry = o.topic(&t).ok_or_else(|| ApiError::not_found(format!("unknown topic {topic:?}")))?;
    let supers = o.super_topics(&t).unwrap_or_default();
    let pmcs: Vec<&String> = state.engine.scheme().map(|s| s.mapped_codes(&t).collect()).unwrap_or_default();
    Ok(Json(json!({
        "topic": t,
        "label": entry.label,
        "aliases": entry.aliases,
        "parents": o.parents(&t).collect::<Vec<_>>(),
        "children": o.children(&t).collect::<Vec<_>>(),
        "superTopics": supers,
        "pmcs": pmcs,
    })))
}
