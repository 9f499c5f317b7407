//! Acceptance gate for the HTTP service.

mod common;

use std::time::{Duration, Instant};

use axum::http::{Method, StatusCode};
use common::{app, call, schema, without_id};
use optlab_core::presets::presets;
use serde_json::json;

#[tokio::test]
async fn acceptance() {
    let start = Instant::now();
    let outcome = server_contract().await;
    let elapsed = start.elapsed();
    let outcome = match outcome {
        Ok(detail) if elapsed > Duration::from_secs(2) => {
            Err(format!("{detail}, but took {elapsed:.2?}, limit 2s"))
        }
        other => other,
    };
    match &outcome {
        Ok(detail) => println!("PASS  Server contract: {detail} ({elapsed:.2?})"),
        Err(reason) => println!("FAIL  Server contract: {reason} ({elapsed:.2?})"),
    }
    assert!(outcome.is_ok());
}

async fn server_contract() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("history.jsonl");
    let validator = schema();
    let first = app(Some(&path));
    let mut ids = Vec::new();
    for preset in presets() {
        let body = json!({"sql": preset.sql, "catalog": preset.catalog, "params": {"rng_seed": 5}});
        let (status, a) = call(&first, Method::POST, "/api/v1/query", Some(body.clone())).await;
        if status != StatusCode::OK {
            return Err(format!("{}: status {status}: {a}", preset.name));
        }
        if let Err(e) = validator.validate(&a) {
            return Err(format!("{}: schema violation: {e}", preset.name));
        }
        let (_, b) = call(&first, Method::POST, "/api/v1/query", Some(body)).await;
        if a["query_id"] == b["query_id"] || without_id(a.clone()) != without_id(b.clone()) {
            return Err(format!(
                "{}: repeated request differs beyond query_id",
                preset.name
            ));
        }
        ids.push(a["query_id"].clone());
        ids.push(b["query_id"].clone());
    }
    let (_, before) = call(&first, Method::GET, "/api/v1/history", None).await;
    drop(first);
    let second = app(Some(&path));
    let (_, after) = call(&second, Method::GET, "/api/v1/history", None).await;
    if before != after || after.as_array().map(Vec::len) != Some(ids.len()) {
        return Err("history changed across restart".into());
    }
    ids.reverse();
    let listed: Vec<_> = after
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["query_id"].clone())
        .collect();
    if listed != ids {
        return Err("history is not newest-first".into());
    }
    Ok(format!(
        "{} presets schema-valid, repeatable modulo query_id, {} entries survive restart",
        presets().len(),
        ids.len()
    ))
}
