//! Shared helpers: an in-process router and schema checks.
#![allow(dead_code)]

use std::path::Path;
use std::time::{Duration, Instant};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use gavis::agents::PipelineConfig;
use gavis_service::api::SharedPlanner;
use gavis_service::{router, AppState, TaskStore};
use serde_json::{json, Value};
use tower::ServiceExt;

pub const API_SCHEMA: &str = include_str!("../../../../docs/schemas/api-v1.schema.json");
pub const IR_SCHEMA: &str = include_str!("../../../../docs/schemas/ir-v1.schema.json");

pub const WORKED: &str = "Visualization formula $S = C - \\frac{1}{2} r^2 e_\\infty$: In conformal space, create three spheres S1, S2, S3 with centers at X1 (0, 0, 0), X2 (0, 0.4, 0), and X3 (0, 0.45, 0.2) with radii of 0.5, 0.4, and 0.3, respectively, S1, S2, S3 are visualized in blue, red, and green, respectively. Finally, calculate the intersection points x4 and x5 of the three balls and visualize them in yellow. I need Python code.";

pub fn app(data_dir: &Path, planner: Option<SharedPlanner>) -> Router {
    router(AppState::new(
        TaskStore::open(data_dir).unwrap(),
        PipelineConfig::default(),
        planner,
    ))
}

fn errors(schema: &Value, instance: &Value) -> Vec<String> {
    let validator = jsonschema::validator_for(schema).expect("schema compiles");
    validator
        .iter_errors(instance)
        .map(|e| format!("{e} at {}", e.instance_path))
        .collect()
}

/// Panics unless `instance` matches definition `name` of the API schema.
pub fn assert_matches(name: &str, instance: &Value) {
    let mut schema: Value = serde_json::from_str(API_SCHEMA).unwrap();
    assert!(schema["$defs"].get(name).is_some(), "no definition {name}");
    schema["$ref"] = json!(format!("#/$defs/{name}"));
    let errors = errors(&schema, instance);
    assert!(errors.is_empty(), "{name}: {errors:#?}\n{instance:#}");
}

pub fn assert_ir(instance: &Value) {
    let errors = errors(&serde_json::from_str(IR_SCHEMA).unwrap(), instance);
    assert!(errors.is_empty(), "{errors:#?}");
}

pub struct Reply {
    pub status: StatusCode,
    pub content_type: String,
    pub text: String,
}

impl Reply {
    pub fn json(&self) -> Value {
        serde_json::from_str(&self.text).unwrap_or_else(|e| panic!("{e}: {}", self.text))
    }
}

pub async fn call(app: &Router, method: &str, uri: &str, body: Option<&str>) -> Reply {
    let request = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map_or_else(Body::empty, |b| Body::from(b.to_string())))
        .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let content_type = response
        .headers()
        .get("content-type")
        .map(|v| v.to_str().unwrap().to_string())
        .unwrap_or_default();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX)
        .await
        .unwrap();
    Reply {
        status,
        content_type,
        text: String::from_utf8(bytes.to_vec()).unwrap(),
    }
}

pub async fn submit(app: &Router, body: Value) -> String {
    let reply = call(app, "POST", "/api/tasks", Some(&body.to_string())).await;
    assert_eq!(reply.status, StatusCode::OK, "{}", reply.text);
    let created = reply.json();
    assert_matches("TaskCreated", &created);
    created["id"].as_str().unwrap().to_string()
}

/// Polls until the task reaches a terminal status.
pub async fn wait(app: &Router, id: &str) -> Value {
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        let reply = call(app, "GET", &format!("/api/tasks/{id}"), None).await;
        assert_eq!(reply.status, StatusCode::OK, "{}", reply.text);
        let record = reply.json();
        assert_matches("TaskRecord", &record);
        if matches!(record["status"].as_str(), Some("succeeded" | "failed")) {
            return record;
        }
        assert!(Instant::now() < deadline, "task {id} did not finish");
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
}
