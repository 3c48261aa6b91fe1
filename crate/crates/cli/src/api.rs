//! JSON-over-HTTP API and the server-sent event stream.

use std::convert::Infallible;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{FromRequest, Path, Query, Request, State};
use axum::http::{HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::routing::{get, patch, post};
use axum::{Json, Router};
use modelgate_core::store::SnapshotMeta;
use modelgate_core::{AssessmentReport, Assessor, Hat, QualityAttribute, ReviewStatus, StoreError, Verdict};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tokio_stream::wrappers::BroadcastStream;
use tokio_stream::{Stream, StreamExt};

use crate::error::ApiError;
use crate::events::{ApiEvent, EventKind, EventLog};
use crate::DEFAULT_AUTHOR;

pub struct AppState {
    assessor: Assessor,
    events: EventLog,
    // mutation plus its events, so stream order is commit order
    writer: Mutex<()>,
}

impl AppState {
    pub fn new(assessor: Assessor) -> Self {
        Self { assessor, events: EventLog::new(), writer: Mutex::new(()) }
    }

    pub fn assessor(&self) -> &Assessor {
        &self.assessor
    }

    pub fn events(&self) -> &EventLog {
        &self.events
    }

    fn mutate<T: Serialize>(
        &self,
        kind: EventKind,
        entry_id: impl FnOnce(&T) -> String,
        op: impl FnOnce(&Assessor) -> Result<Option<(T, AssessmentReport)>, StoreError>,
    ) -> Result<Option<(T, AssessmentReport)>, ApiError> {
        let _guard = self.writer.lock().unwrap_or_else(|p| p.into_inner());
        let out = op(&self.assessor)?;
        if let Some((record, report)) = &out {
            let id = entry_id(record);
            self.events.publish(kind, &id, to_value(record));
            self.events.publish(EventKind::Assessment, &id, to_value(report));
        }
        Ok(out)
    }
}

type Shared = Arc<AppState>;
type ApiResult<T> = Result<T, ApiError>;

fn to_value(v: &impl Serialize) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> ApiResult<T> + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f).await.map_err(|e| ApiError::internal(e.to_string()))?
}

/// `Json` whose rejection is an [`ApiError`].
pub struct Body<T>(pub T);

impl<S: Send + Sync, T> FromRequest<S> for Body<T>
where
    Json<T>: FromRequest<S, Rejection = JsonRejection>,
{
    type Rejection = ApiError;

    async fn from_request(req: Request, state: &S) -> Result<Self, Self::Rejection> {
        Json::<T>::from_request(req, state).await.map(|Json(v)| Body(v)).map_err(|r| ApiError::invalid(r.body_text()))
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ListQuery {
    pub limit: Option<usize>,
}

fn limit(q: Result<Query<ListQuery>, QueryRejection>) -> ApiResult<usize> {
    let Query(q) = q.map_err(|r| ApiError::invalid(r.body_text()))?;
    Ok(q.limit.unwrap_or(usize::MAX))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewEntry {
    pub entry_id: String,
    pub source: String,
    pub author: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewSnapshot {
    pub source: String,
    pub author: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewReview {
    pub hat: Hat,
    pub text: String,
    pub author: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReviewPatch {
    pub status: ReviewStatus,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewAttestation {
    pub attribute: QualityAttribute,
    pub verdict: Verdict,
    pub reviewer: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewOverride {
    pub metric_id: String,
    pub element_path: String,
    pub justification: String,
    pub author: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideKey {
    pub metric_id: String,
    pub element_path: String,
}

/// Row of `GET /api/entries`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntrySummary {
    pub entry_id: String,
    pub head: SnapshotMeta,
    pub stage: Option<String>,
    pub color: Option<String>,
}

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/api/entries", get(list_entries).post(create_entry))
        .route("/api/entries/{id}", get(get_entry))
        .route("/api/entries/{id}/snapshots", get(list_snapshots).post(commit_snapshot))
        .route("/api/entries/{id}/snapshots/{seq}", get(get_snapshot))
        .route("/api/entries/{id}/assessment", get(get_assessment))
        .route("/api/entries/{id}/reviews", get(list_reviews).post(add_review))
        .route("/api/reviews/{rid}", patch(set_review_status))
        .route("/api/entries/{id}/attestations", post(add_attestation))
        .route("/api/entries/{id}/overrides", post(add_override).delete(revoke_override))
        .route("/api/events", get(events))
        .fallback(|| async { ApiError::new("not_found", "no such route").with_status(StatusCode::NOT_FOUND) })
        .with_state(state)
}

impl ApiError {
    fn with_status(mut self, status: StatusCode) -> Self {
        self.status = status.as_u16();
        self
    }
}

async fn list_entries(State(st): State<Shared>, q: Result<Query<ListQuery>, QueryRejection>) -> ApiResult<Json<Vec<EntrySummary>>> {
    let n = limit(q)?;
    blocking(move || {
        let lib = st.assessor.library();
        let mut out = Vec::new();
        for id in lib.entry_ids()?.into_iter().take(n) {
            let meta = lib.meta(&id)?;
            let stage = meta.last_assessment.as_ref().map(|r| r.stage);
            out.push(EntrySummary {
                entry_id: meta.entry_id.clone(),
                head: meta.head().clone(),
                stage: stage.map(|s| s.as_str().to_string()),
                color: stage.map(|s| s.color().to_string()),
            });
        }
        Ok(Json(out))
    })
    .await
}

async fn create_entry(State(st): State<Shared>, Body(req): Body<NewEntry>) -> ApiResult<(StatusCode, Json<Value>)> {
    blocking(move || {
        let author = req.author.unwrap_or_else(|| DEFAULT_AUTHOR.into());
        let out = st.mutate(
            EventKind::Snapshot,
            |_| req.entry_id.clone(),
            |a| {
                let (meta, snapshot, report) = a.create_entry(&req.entry_id, &req.source, &author)?;
                Ok(Some((json!({ "entry_id": meta.entry_id, "snapshot": snapshot }), report)))
            },
        )?;
        let (record, report) = out.expect("creation always commits");
        Ok((StatusCode::CREATED, Json(json!({ "entry_id": record["entry_id"], "snapshot": record["snapshot"], "report": report }))))
    })
    .await
}

async fn get_entry(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    blocking(move || Ok(Json(to_value(&st.assessor.library().meta(&id)?)))).await
}

async fn list_snapshots(
    State(st): State<Shared>,
    Path(id): Path<String>,
    q: Result<Query<ListQuery>, QueryRejection>,
) -> ApiResult<Json<Vec<SnapshotMeta>>> {
    let n = limit(q)?;
    blocking(move || Ok(Json(st.assessor.library().meta(&id)?.snapshots.into_iter().take(n).collect()))).await
}

async fn get_snapshot(State(st): State<Shared>, Path((id, seq)): Path<(String, u64)>) -> ApiResult<Json<Value>> {
    blocking(move || {
        let lib = st.assessor.library();
        let meta = lib.meta(&id)?;
        if !meta.snapshots.iter().any(|s| s.seq_no == seq) {
            return Err(ApiError::new("unknown_snapshot", format!("entry `{id}` has no snapshot {seq}")).with_status(StatusCode::NOT_FOUND));
        }
        Ok(Json(to_value(&lib.snapshot(&id, seq)?)))
    })
    .await
}

async fn commit_snapshot(State(st): State<Shared>, Path(id): Path<String>, Body(req): Body<NewSnapshot>) -> ApiResult<(StatusCode, Json<Value>)> {
    blocking(move || {
        let author = req.author.unwrap_or_else(|| DEFAULT_AUTHOR.into());
        let mut no_op_result = None;
        let out = st.mutate(
            EventKind::Snapshot,
            |_| id.clone(),
            |a| {
                let (outcome, report) = a.commit(&id, &req.source, &author)?;
                if outcome.no_op {
                    no_op_result = Some(json!({ "snapshot": outcome.snapshot, "no_op": true, "report": report }));
                    return Ok(None);
                }
                Ok(Some((outcome.snapshot, report)))
            },
        )?;
        match out {
            Some((snapshot, report)) => Ok((StatusCode::CREATED, Json(json!({ "snapshot": snapshot, "no_op": false, "report": report })))),
            None => Ok((StatusCode::OK, Json(no_op_result.unwrap_or(Value::Null)))),
        }
    })
    .await
}

async fn get_assessment(State(st): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<AssessmentReport>> {
    blocking(move || Ok(Json(st.assessor.latest(&id)?))).await
}

async fn list_reviews(
    State(st): State<Shared>,
    Path(id): Path<String>,
    q: Result<Query<ListQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let n = limit(q)?;
    blocking(move || {
        let reviews: Vec<_> = st.assessor.library().meta(&id)?.reviews.into_iter().take(n).collect();
        Ok(Json(to_value(&reviews)))
    })
    .await
}

fn created(record: impl Serialize, key: &str, report: AssessmentReport) -> (StatusCode, Json<Value>) {
    (StatusCode::CREATED, Json(json!({ key: to_value(&record), "report": report })))
}

async fn add_review(State(st): State<Shared>, Path(id): Path<String>, Body(req): Body<NewReview>) -> ApiResult<(StatusCode, Json<Value>)> {
    blocking(move || {
        let author = req.author.unwrap_or_else(|| DEFAULT_AUTHOR.into());
        let (review, report) = st
            .mutate(EventKind::Review, |_| id.clone(), |a| a.add_review(&id, req.hat, &req.text, &author).map(Some))?
            .expect("always committed");
        Ok(created(review, "review", report))
    })
    .await
}

async fn set_review_status(State(st): State<Shared>, Path(rid): Path<String>, Body(req): Body<ReviewPatch>) -> ApiResult<Json<Value>> {
    blocking(move || {
        let entry = modelgate_core::Library::review_entry(&rid)?.to_string();
        let (review, report) = st
            .mutate(EventKind::Review, |_| entry, |a| a.set_review_status(&rid, req.status).map(Some))?
            .expect("always committed");
        Ok(Json(json!({ "review": review, "report": report })))
    })
    .await
}

async fn add_attestation(State(st): State<Shared>, Path(id): Path<String>, Body(req): Body<NewAttestation>) -> ApiResult<(StatusCode, Json<Value>)> {
    blocking(move || {
        let reviewer = req.reviewer.unwrap_or_else(|| DEFAULT_AUTHOR.into());
        let (att, report) = st
            .mutate(EventKind::Attestation, |_| id.clone(), |a| a.record_attestation(&id, req.attribute, req.verdict, &reviewer).map(Some))?
            .expect("always committed");
        Ok(created(att, "attestation", report))
    })
    .await
}

async fn add_override(State(st): State<Shared>, Path(id): Path<String>, Body(req): Body<NewOverride>) -> ApiResult<(StatusCode, Json<Value>)> {
    blocking(move || {
        let author = req.author.unwrap_or_else(|| DEFAULT_AUTHOR.into());
        let (ov, report) = st
            .mutate(EventKind::Override, |_| id.clone(), |a| {
                a.record_override(&id, &req.metric_id, &req.element_path, &req.justification, &author).map(Some)
            })?
            .expect("always committed");
        Ok(created(ov, "override", report))
    })
    .await
}

async fn revoke_override(State(st): State<Shared>, Path(id): Path<String>, Body(req): Body<OverrideKey>) -> ApiResult<Json<Value>> {
    blocking(move || {
        let (ov, report) = st
            .mutate(EventKind::Override, |_| id.clone(), |a| a.revoke_override(&id, &req.metric_id, &req.element_path).map(Some))?
            .expect("always committed");
        Ok(Json(json!({ "override": ov, "report": report })))
    })
    .await
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventsQuery {
    /// Replay events with an id greater than this.
    pub since: Option<u64>,
}

fn sse_event(ev: &ApiEvent) -> Event {
    Event::default().id(ev.id.to_string()).event(ev.kind.as_str()).data(serde_json::to_string(ev).unwrap_or_default())
}

/// `text/event-stream` of [`ApiEvent`]s. Without `?since=` or a
/// `Last-Event-ID` header only new events are sent. A subscriber that falls
/// too far behind is disconnected and can resume with `Last-Event-ID`.
async fn events(
    State(st): State<Shared>,
    headers: HeaderMap,
    q: Result<Query<EventsQuery>, QueryRejection>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let Query(q) = q.map_err(|r| ApiError::invalid(r.body_text()))?;
    let since = q.since.or_else(|| headers.get("last-event-id").and_then(|v| v.to_str().ok()).and_then(|s| s.trim().parse().ok()));
    let (replay, rx) = st.events.subscribe(since);
    let live = BroadcastStream::new(rx).map_while(Result::ok);
    let stream = tokio_stream::iter(replay).chain(live).map(|ev| Ok(sse_event(&ev)));
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

/// Serves until Ctrl-C. `on_ready` receives the bound address.
pub async fn serve(state: Shared, addr: SocketAddr, on_ready: impl FnOnce(SocketAddr)) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_ready(listener.local_addr()?);
    let server = axum::serve(listener, router(state));
    tokio::select! {
        res = server => res,
        _ = tokio::signal::ctrl_c() => Ok(()),
    }
}
