mod common;

use axum::http::{Method, StatusCode};
use common::*;
use modelgate_cli::router;
use serde_json::json;

#[tokio::test]
async fn entry_lifecycle_over_http() {
    let (_d, root) = new_root();
    let app = router(state(&root));

    let (s, body) = call(&app, Method::POST, "/api/entries", Some(json!({"entry_id": "media-model", "source": dao()}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(body["snapshot"]["seq_no"], 1);
    let findings = body["report"]["findings"].as_array().unwrap();
    let leftover = findings.iter().find(|f| f["metric_id"] == "technology-leftover-name").unwrap();
    assert_eq!(leftover["element_path"], "SongDAO");

    let renamed = dao().replace("SongDAO", "Song");
    let (s, body) = call(&app, Method::POST, "/api/entries/media-model/snapshots", Some(json!({"source": renamed}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(body["no_op"], false);
    assert_eq!(body["report"]["delta"]["resolved"][0]["fingerprint"], leftover["fingerprint"]);

    let (s, body) = call(&app, Method::POST, "/api/entries/media-model/snapshots", Some(json!({"source": renamed}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["no_op"], true);
    assert_eq!(body["snapshot"]["seq_no"], 2);

    for attr in WEAK {
        let (s, _) =
            call(&app, Method::POST, "/api/entries/media-model/attestations", Some(json!({"attribute": attr, "verdict": "pass"}))).await;
        assert_eq!(s, StatusCode::CREATED);
    }
    let (s, report) = call(&app, Method::GET, "/api/entries/media-model/assessment", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(report["stage"], "fine");

    let (_, list) = call(&app, Method::GET, "/api/entries", None).await;
    assert_eq!(list[0]["entry_id"], "media-model");
    assert_eq!(list[0]["stage"], "fine");
    assert_eq!(list[0]["color"], "green");
    assert_eq!(list[0]["head"]["seq_no"], 2);

    let (_, snaps) = call(&app, Method::GET, "/api/entries/media-model/snapshots", None).await;
    assert_eq!(snaps.as_array().unwrap().len(), 2);
    let (_, snaps) = call(&app, Method::GET, "/api/entries/media-model/snapshots?limit=1", None).await;
    assert_eq!(snaps.as_array().unwrap().len(), 1);
    let (s, snap) = call(&app, Method::GET, "/api/entries/media-model/snapshots/1", None).await;
    assert_eq!(s, StatusCode::OK);
    assert!(snap["source_text"].as_str().unwrap().contains("SongDAO"));
    let (s, body) = call(&app, Method::GET, "/api/entries/media-model/snapshots/9", None).await;
    assert_eq!((s, body["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_snapshot")));

    let (s, meta) = call(&app, Method::GET, "/api/entries/media-model", None).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(meta["attestations"].as_array().unwrap().len(), 4);
    assert_eq!(meta["attestations"][0]["reviewer"], modelgate_cli::DEFAULT_AUTHOR);
}

#[tokio::test]
async fn reviews_and_black_hat() {
    let (_d, root) = new_root();
    let app = router(state(&root));
    call(&app, Method::POST, "/api/entries", Some(json!({"entry_id": "m", "source": media()}))).await;
    for attr in WEAK {
        call(&app, Method::POST, "/api/entries/m/attestations", Some(json!({"attribute": attr, "verdict": "pass"}))).await;
    }
    let (s, body) =
        call(&app, Method::POST, "/api/entries/m/reviews", Some(json!({"hat": "black", "text": "Playlist order is undefined"}))).await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(body["review"]["review_id"], "m.r1");
    assert_eq!(body["review"]["status"], "open");
    let (_, report) = call(&app, Method::GET, "/api/entries/m/assessment", None).await;
    assert_eq!(report["stage"], "vague");
    assert_eq!(report["transition"]["demoted"], true);

    let (s, body) = call(&app, Method::PATCH, "/api/reviews/m.r1", Some(json!({"status": "reopened"}))).await;
    assert_eq!(s, StatusCode::CONFLICT);
    assert_eq!(body["code"], "illegal_transition");

    let (s, body) = call(&app, Method::PATCH, "/api/reviews/m.r1", Some(json!({"status": "done"}))).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["report"]["stage"], "fine");

    let (_, reviews) = call(&app, Method::GET, "/api/entries/m/reviews", None).await;
    assert_eq!(reviews[0]["status"], "done");
    let (s, body) = call(&app, Method::PATCH, "/api/reviews/m.r7", Some(json!({"status": "done"}))).await;
    assert_eq!((s, body["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_review")));
}

#[tokio::test]
async fn overrides_add_and_revoke() {
    let (_d, root) = new_root();
    let app = router(state(&root));
    call(&app, Method::POST, "/api/entries", Some(json!({"entry_id": "w", "source": fixture("seeded/long-parameter-list.mdl")}))).await;
    let (_, report) = call(&app, Method::GET, "/api/entries/w/assessment", None).await;
    assert_eq!(report["statuses"]["maintainability"], "violated");
    let key = json!({"metric_id": "long-parameter-list", "element_path": "Song.op.seek"});

    let (s, body) = call(
        &app,
        Method::POST,
        "/api/entries/w/overrides",
        Some(json!({"metric_id": "long-parameter-list", "element_path": "Song.op.seek", "justification": "external API"})),
    )
    .await;
    assert_eq!(s, StatusCode::CREATED);
    assert_eq!(body["report"]["statuses"]["maintainability"], "satisfied");

    let (s, body) = call(&app, Method::DELETE, "/api/entries/w/overrides", Some(key.clone())).await;
    assert_eq!(s, StatusCode::OK);
    assert_eq!(body["override"]["revoked"], true);
    assert_eq!(body["report"]["statuses"]["maintainability"], "violated");

    let (s, body) = call(&app, Method::DELETE, "/api/entries/w/overrides", Some(key)).await;
    assert_eq!((s, body["code"].as_str()), (StatusCode::NOT_FOUND, Some("unknown_override")));
}

#[tokio::test]
async fn error_codes_and_statuses() {
    let (_d, root) = new_root();
    let app = router(state(&root));
    call(&app, Method::POST, "/api/entries", Some(json!({"entry_id": "m", "source": media()}))).await;

    let cases = [
        (Method::GET, "/api/entries/ghost", None, StatusCode::NOT_FOUND, "unknown_entry"),
        (Method::POST, "/api/entries", Some(json!({"entry_id": "m", "source": media()})), StatusCode::CONFLICT, "duplicate_entry"),
        (Method::POST, "/api/entries", Some(json!({"entry_id": "../x", "source": media()})), StatusCode::UNPROCESSABLE_ENTITY, "invalid_entry_id"),
        (Method::POST, "/api/entries/m/snapshots", Some(json!({"source": "model M {"})), StatusCode::UNPROCESSABLE_ENTITY, "parse_error"),
        (
            Method::POST,
            "/api/entries/m/attestations",
            Some(json!({"attribute": "defect-freeness", "verdict": "pass"})),
            StatusCode::UNPROCESSABLE_ENTITY,
            "not_weak_attribute",
        ),
        (
            Method::POST,
            "/api/entries/m/overrides",
            Some(json!({"metric_id": "inheritance-cycle", "element_path": "Song", "justification": "x"})),
            StatusCode::UNPROCESSABLE_ENTITY,
            "not_medium_metric",
        ),
        (
            Method::POST,
            "/api/entries/m/overrides",
            Some(json!({"metric_id": "deep-inheritance", "element_path": "Song", "justification": "  "})),
            StatusCode::UNPROCESSABLE_ENTITY,
            "empty_justification",
        ),
        (Method::POST, "/api/entries/m/reviews", Some(json!({"hat": "black", "text": ""})), StatusCode::UNPROCESSABLE_ENTITY, "empty_review_text"),
        (Method::POST, "/api/entries/m/reviews", Some(json!({"hat": "purple", "text": "x"})), StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
        (Method::POST, "/api/entries/m/reviews", Some(json!({"text": "x"})), StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
        (Method::GET, "/api/entries?limit=abc", None, StatusCode::UNPROCESSABLE_ENTITY, "invalid_input"),
        (Method::GET, "/api/nothing", None, StatusCode::NOT_FOUND, "not_found"),
    ];
    for (method, uri, body, status, code) in cases {
        let (s, b) = call(&app, method.clone(), uri, body).await;
        assert_eq!((s, b["code"].as_str()), (status, Some(code)), "{method} {uri}: {b}");
        assert!(!b["message"].as_str().unwrap().is_empty());
    }

    let (_, b) = call(&app, Method::POST, "/api/entries/m/snapshots", Some(json!({"source": "model M {"}))).await;
    assert!(b["message"].as_str().unwrap().contains("line 1, column"), "{b}");
    // nothing was committed
    let (_, snaps) = call(&app, Method::GET, "/api/entries/m/snapshots", None).await;
    assert_eq!(snaps.as_array().unwrap().len(), 1);
}

#[tokio::test]
async fn read_only_server_refuses_mutations() {
    let (_d, root) = new_root();
    {
        let app = router(state(&root));
        call(&app, Method::POST, "/api/entries", Some(json!({"entry_id": "m", "source": media()}))).await;
    }
    let ro = router(read_only_state(&root));
    let (s, b) = call(&ro, Method::POST, "/api/entries/m/reviews", Some(json!({"hat": "white", "text": "x"}))).await;
    assert_eq!((s, b["code"].as_str()), (StatusCode::CONFLICT, Some("read_only")));
    let (s, _) = call(&ro, Method::GET, "/api/entries/m/assessment", None).await;
    assert_eq!(s, StatusCode::OK);
}
