mod common;

use axum::http::{Method, StatusCode};
use common::{app, call, call_raw, schema, without_id};
use optlab_core::presets::presets;
use optlab_core::trace::deserialize_trace;
use serde_json::{json, Value};

#[tokio::test]
async fn query_returns_a_schema_valid_trace() {
    let app = app(None);
    let (status, trace) = call(
        &app,
        Method::POST,
        "/api/v1/query",
        Some(json!({"sql": "SELECT * FROM customer c, orders o WHERE c.c_custkey = o.o_custkey"})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert!(schema().is_valid(&trace), "{trace}");
    assert_eq!(trace["runs"][0]["kind"], "dp");
    deserialize_trace(&trace.to_string()).unwrap();
}

#[tokio::test]
async fn threshold_override_switches_planner() {
    let app = app(None);
    let sql = presets()
        .iter()
        .find(|p| p.name == "q2-minimum-cost-supplier")
        .unwrap()
        .sql;
    let (status, trace) = call(
        &app,
        Method::POST,
        "/api/v1/query",
        Some(json!({"sql": sql, "params": {"geqo_threshold": 5}})),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(trace["runs"][0]["kind"], "geqo");
    assert_eq!(trace["params"]["geqo_threshold"], 5);
}

#[tokio::test]
async fn errors_are_structured() {
    let app = app(None);
    let cases = [
        (
            json!({"sql": "SELECT * FROM\n  customer c WHERE"}),
            "syntax_error",
            true,
        ),
        (
            json!({"sql": "SELECT * FROM nowhere n"}),
            "unknown_relation",
            false,
        ),
        (
            json!({"sql": "SELECT * FROM region r", "params": {"cpu_tuple_cost": -1}}),
            "invalid_params",
            false,
        ),
        (
            json!({"sql": "SELECT * FROM region r", "params": {"bogus": 1}}),
            "invalid_request",
            false,
        ),
        (
            json!({"sql": "SELECT * FROM region r", "catalog": "tpcds"}),
            "unknown_catalog",
            false,
        ),
        (json!({"query": "SELECT 1"}), "invalid_request", false),
    ];
    for (body, code, positioned) in cases {
        let (status, err) = call(&app, Method::POST, "/api/v1/query", Some(body.clone())).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{body}");
        assert_eq!(err["code"], code, "{body}: {err}");
        assert!(err["message"].as_str().is_some_and(|m| !m.is_empty()));
        assert_eq!(err.get("line").is_some(), positioned, "{err}");
        assert_eq!(err.get("column").is_some(), positioned, "{err}");
    }
    let (status, err) = call_raw(
        &app,
        Method::POST,
        "/api/v1/query",
        Some("{not json".into()),
    )
    .await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    let err: Value = serde_json::from_slice(&err).unwrap();
    assert_eq!(err["code"], "invalid_request");
}

#[tokio::test]
async fn history_lists_newest_first_and_returns_traces() {
    let app = app(None);
    let (_, empty) = call(&app, Method::GET, "/api/v1/history", None).await;
    assert_eq!(empty, json!([]));
    let mut ids = Vec::new();
    for sql in [
        "SELECT * FROM region r",
        "SELECT * FROM nation n",
        "SELECT * FROM part p",
    ] {
        let (_, trace) = call(
            &app,
            Method::POST,
            "/api/v1/query",
            Some(json!({"sql": sql})),
        )
        .await;
        ids.push(trace["query_id"].as_str().unwrap().to_string());
    }
    let (status, list) = call(&app, Method::GET, "/api/v1/history", None).await;
    assert_eq!(status, StatusCode::OK);
    let listed: Vec<&str> = list
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["query_id"].as_str().unwrap())
        .collect();
    assert_eq!(listed, [&ids[2], &ids[1], &ids[0]]);
    let entry = &list[0];
    assert_eq!(entry["sql"], "SELECT * FROM part p");
    assert_eq!(entry["catalog"], "tpch-like");
    assert!(entry.get("trace").is_none());
    chrono::DateTime::parse_from_rfc3339(entry["timestamp"].as_str().unwrap()).unwrap();

    let (status, trace) = call(
        &app,
        Method::GET,
        &format!("/api/v1/history/{}", ids[1]),
        None,
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(trace["sql"], "SELECT * FROM nation n");
    let (status, err) = call(&app, Method::GET, "/api/v1/history/unknown", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(err["code"], "not_found");
}

#[tokio::test]
async fn ids_are_unique_and_traces_repeat() {
    let app = app(None);
    let body = json!({"sql": presets().iter().find(|p| p.name == "snowflake-12").unwrap().sql,
                      "params": {"rng_seed": 11, "geqo_pool_size": 16, "geqo_generations": 16}});
    let (_, a) = call(&app, Method::POST, "/api/v1/query", Some(body.clone())).await;
    let (_, b) = call(&app, Method::POST, "/api/v1/query", Some(body)).await;
    assert_ne!(a["query_id"], b["query_id"]);
    uuid::Uuid::parse_str(a["query_id"].as_str().unwrap()).unwrap();
    assert_eq!(without_id(a), without_id(b));
}

#[tokio::test]
async fn presets_and_catalogs_are_listed() {
    let app = app(None);
    let (status, list) = call(&app, Method::GET, "/api/v1/presets", None).await;
    assert_eq!(status, StatusCode::OK);
    let list = list.as_array().unwrap();
    assert_eq!(list.len(), presets().len());
    assert!(list.len() >= 8);
    for preset in list {
        assert!(preset["name"].is_string() && preset["sql"].is_string());
        assert_eq!(preset["catalog"], "tpch-like");
    }
    assert!(list
        .iter()
        .any(|p| p["sql"].as_str().unwrap().starts_with("WITH")));

    let (status, catalogs) = call(&app, Method::GET, "/api/v1/catalogs", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(catalogs[0]["name"], "tpch-like");
    assert_eq!(catalogs[0]["relations"].as_array().unwrap().len(), 8);
}

#[tokio::test]
async fn root_serves_a_page() {
    let (status, body) = call_raw(&app(None), Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert!(String::from_utf8(body).unwrap().contains("/api/v1/query"));
}

#[tokio::test]
async fn ui_dir_is_served_statically() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<p>bundle</p>").unwrap();
    let service = optlab_server::service::Service::new(
        Default::default(),
        optlab_server::history::HistoryStore::in_memory(),
        None,
    )
    .unwrap();
    let app = optlab_server::api::router(std::sync::Arc::new(service), Some(dir.path().into()));
    let (status, body) = call_raw(&app, Method::GET, "/", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body, b"<p>bundle</p>");
    let (status, _) = call(&app, Method::GET, "/api/v1/presets", None).await;
    assert_eq!(status, StatusCode::OK);
}

#[tokio::test]
async fn history_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("history.jsonl");
    let first = app(Some(&path));
    let (_, trace) = call(
        &first,
        Method::POST,
        "/api/v1/query",
        Some(json!({"sql": "SELECT * FROM region r"})),
    )
    .await;
    let (_, before) = call(&first, Method::GET, "/api/v1/history", None).await;
    drop(first);

    let second = app(Some(&path));
    let (_, after) = call(&second, Method::GET, "/api/v1/history", None).await;
    assert_eq!(before, after);
    let id = trace["query_id"].as_str().unwrap();
    let (status, stored) = call(&second, Method::GET, &format!("/api/v1/history/{id}"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(stored, trace);
}
