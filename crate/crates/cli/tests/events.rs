//! Event stream completeness and framing.

mod common;

use std::time::Duration;

use axum::body::Body;
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use common::*;
use http_body_util::BodyExt;
use modelgate_cli::{router, ApiEvent, EventKind};
use serde_json::{json, Value};
use tower::ServiceExt;

/// Opens `/api/events` and reads `n` events off the wire.
async fn read_events(app: &Router, query: &str, last_event_id: Option<u64>, n: usize) -> Vec<ApiEvent> {
    let mut req = Request::builder().uri(format!("/api/events{query}"));
    if let Some(id) = last_event_id {
        req = req.header("last-event-id", id.to_string());
    }
    let resp = app.clone().oneshot(req.body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
    assert_eq!(resp.headers()["content-type"], "text/event-stream");
    collect(resp.into_body(), n).await
}

async fn collect(mut body: Body, n: usize) -> Vec<ApiEvent> {
    let mut buf = String::new();
    let mut out = Vec::new();
    while out.len() < n {
        let frame = tokio::time::timeout(Duration::from_secs(5), body.frame())
            .await
            .unwrap_or_else(|_| panic!("only {} of {n} events arrived", out.len()))
            .expect("stream ended")
            .unwrap();
        if let Ok(data) = frame.into_data() {
            buf.push_str(std::str::from_utf8(&data).unwrap());
        }
        while let Some(end) = buf.find("\n\n") {
            let block: String = buf.drain(..end + 2).collect();
            let (mut id, mut kind, mut data) = (None, None, None);
            for line in block.lines() {
                if let Some(v) = line.strip_prefix("id: ") {
                    id = Some(v.parse::<u64>().unwrap());
                } else if let Some(v) = line.strip_prefix("event: ") {
                    kind = Some(v.to_string());
                } else if let Some(v) = line.strip_prefix("data: ") {
                    data = Some(v.to_string());
                }
            }
            // keep-alive comments carry no data
            if let Some(data) = data {
                let ev: ApiEvent = serde_json::from_str(&data).unwrap();
                assert_eq!(Some(ev.id), id);
                assert_eq!(kind.as_deref(), Some(ev.kind.as_str()));
                out.push(ev);
            }
        }
    }
    out
}

/// Deterministic pseudo-random mutation script; returns the kinds of the
/// mutations that committed, in order.
async fn drive(app: &Router, seed: u64, steps: usize) -> Vec<(EventKind, String)> {
    let mut x = seed;
    let mut next = move || {
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        x
    };
    let mut committed = Vec::new();
    let entries = ["a", "b"];
    let sources = [media(), dao(), dao().replace("SongDAO", "Song"), fixture("seeded/high-fanout.mdl"), "model broken {".to_string()];
    for e in entries {
        let (s, _) = call(app, Method::POST, "/api/entries", Some(json!({"entry_id": e, "source": media()}))).await;
        assert_eq!(s, StatusCode::CREATED);
        committed.push((EventKind::Snapshot, e.to_string()));
    }
    for _ in 0..steps {
        let e = entries[(next() % 2) as usize];
        let (kind, method, uri, body) = match next() % 6 {
            0 => (EventKind::Snapshot, Method::POST, format!("/api/entries/{e}/snapshots"), json!({"source": sources[(next() % 5) as usize]})),
            1 => (EventKind::Review, Method::POST, format!("/api/entries/{e}/reviews"), {
                let hat = ["black", "white", "red"][(next() % 3) as usize];
                json!({"hat": hat, "text": "t"})
            }),
            2 => {
                let n = next() % 4 + 1;
                let to = ["done", "reopened"][(next() % 2) as usize];
                (EventKind::Review, Method::PATCH, format!("/api/reviews/{e}.r{n}"), json!({"status": to}))
            }
            3 => (
                EventKind::Attestation,
                Method::POST,
                format!("/api/entries/{e}/attestations"),
                {
                    let verdict = ["pass", "fail"][(next() % 2) as usize];
                    json!({"attribute": WEAK[(next() % 4) as usize], "verdict": verdict})
                },
            ),
            4 => (
                EventKind::Override,
                Method::POST,
                format!("/api/entries/{e}/overrides"),
                json!({"metric_id": "high-fanout", "element_path": "Hub", "justification": "hub by design"}),
            ),
            _ => (
                EventKind::Override,
                Method::DELETE,
                format!("/api/entries/{e}/overrides"),
                json!({"metric_id": "high-fanout", "element_path": "Hub"}),
            ),
        };
        let (s, resp) = call(app, method, &uri, Some(body)).await;
        // failures and no-op commits are not mutations
        let no_op = resp.get("no_op") == Some(&Value::Bool(true));
        if s.is_success() && !no_op {
            committed.push((kind, e.to_string()));
        }
    }
    committed
}

fn check(events: &[ApiEvent], committed: &[(EventKind, String)]) {
    assert_eq!(events.len(), committed.len() * 2, "one mutation event plus one assessment per commit");
    for (i, ev) in events.iter().enumerate() {
        assert_eq!(ev.id, i as u64 + 1);
    }
    for (pair, (kind, entry)) in events.chunks(2).zip(committed) {
        assert_eq!((pair[0].kind, &pair[0].entry_id), (*kind, entry));
        assert_eq!((pair[1].kind, &pair[1].entry_id), (EventKind::Assessment, entry));
        assert_eq!(pair[1].data["entry_id"], entry.as_str());
    }
}

#[tokio::test]
async fn replay_contains_exactly_the_committed_mutations() {
    for seed in 1..=20u64 {
        let (_d, root) = new_root();
        let app = router(state(&root));
        let committed = drive(&app, seed * 7919, 60).await;
        let events = read_events(&app, "?since=0", None, committed.len() * 2).await;
        check(&events, &committed);
    }
}

#[tokio::test]
async fn live_subscriber_sees_everything_in_order() {
    let (_d, root) = new_root();
    let app = router(state(&root));
    let resp = app.clone().oneshot(Request::builder().uri("/api/events").body(Body::empty()).unwrap()).await.unwrap();
    let committed = drive(&app, 42, 80).await;
    let events = collect(resp.into_body(), committed.len() * 2).await;
    check(&events, &committed);
}

#[tokio::test]
async fn resume_with_last_event_id() {
    let (_d, root) = new_root();
    let st = state(&root);
    let app = router(st.clone());
    let committed = drive(&app, 5, 30).await;
    let total = committed.len() * 2;
    let tail = read_events(&app, "", Some(4), total - 4).await;
    assert_eq!(tail.first().unwrap().id, 5);
    assert_eq!(tail, st.events().history()[4..]);
    let tail = read_events(&app, "?since=6", Some(1), total - 6).await;
    assert_eq!(tail.first().unwrap().id, 7);
}
