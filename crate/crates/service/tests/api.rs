use std::sync::Arc;

use axum::http::StatusCode;
use axum::routing::post;
use axum::Json;
use gavis::agents::{plan, BackendRequest, BackendResponse, MockBackend, PlanRequest};
use gavis_service::record::{TaskRecord, TaskStatus};
use gavis_service::runner::HttpPlanner;
use gavis_service::TaskStore;
use serde_json::{json, Value};

mod common;
use common::{app, assert_ir, assert_matches, call, submit, wait, WORKED};

#[tokio::test]
async fn health_and_registry_match_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let health = call(&app, "GET", "/api/health", None).await;
    assert_eq!(health.status, StatusCode::OK);
    assert_matches("Health", &health.json());
    let registry = call(&app, "GET", "/api/registry", None).await;
    assert_eq!(registry.status, StatusCode::OK);
    assert_matches("Registry", &registry.json());
    assert!(registry.json().as_array().unwrap().len() >= 30);
}

#[tokio::test(flavor = "multi_thread")]
async fn three_sphere_task_succeeds_with_five_objects() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let id = submit(&app, json!({ "description": WORKED })).await;
    let record = wait(&app, &id).await;
    assert_eq!(record["status"], "succeeded", "{record:#}");
    assert_eq!(record["plan"]["subtasks"].as_array().unwrap().len(), 3);

    let scene = call(&app, "GET", &format!("/api/tasks/{id}/scene"), None).await;
    assert_eq!(scene.status, StatusCode::OK);
    let scene = scene.json();
    assert_matches("Scene", &scene);
    let kinds: Vec<&str> = scene["objects"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["sphere", "sphere", "sphere", "point", "point"]);

    let code = call(&app, "GET", &format!("/api/tasks/{id}/code"), None).await;
    assert_eq!(code.status, StatusCode::OK);
    assert!(code.content_type.starts_with("text/plain"));
    for section in [
        "# --- assignments ---",
        "# --- optimization code ---",
        "# --- visualization ---",
    ] {
        assert!(code.text.contains(section), "{}", code.text);
    }
    assert_eq!(Some(code.text.as_str()), record["code"].as_str());
}

#[tokio::test(flavor = "multi_thread")]
async fn gets_are_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let id = submit(
        &app,
        json!({ "description": "Create a point p1 (1, 2, 3) and visualize it in red" }),
    )
    .await;
    wait(&app, &id).await;
    for uri in [
        format!("/api/tasks/{id}"),
        format!("/api/tasks/{id}/scene"),
        format!("/api/tasks/{id}/code"),
    ] {
        let a = call(&app, "GET", &uri, None).await;
        let b = call(&app, "GET", &uri, None).await;
        assert_eq!((a.status, a.text), (b.status, b.text), "{uri}");
    }
}

#[tokio::test]
async fn unknown_ids_are_not_found() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    for uri in [
        "/api/tasks/nope",
        "/api/tasks/nope/scene",
        "/api/tasks/nope/code",
        "/api/tasks/..%2Fx",
        "/api/nothing",
    ] {
        let reply = call(&app, "GET", uri, None).await;
        assert_eq!(reply.status, StatusCode::NOT_FOUND, "{uri}");
        assert_matches("Error", &reply.json());
    }
}

#[tokio::test]
async fn malformed_task_requests_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let bodies = [
        "not json",
        "{}",
        r#"{"description": 3}"#,
        r#"{"description": "   "}"#,
        r#"{"description": "x", "colour": "red"}"#,
        r#"{"description": "x", "space": "cl(99,0)"}"#,
        r#"{"description": "x", "language": "cobol"}"#,
    ];
    for body in bodies {
        let reply = call(&app, "POST", "/api/tasks", Some(body)).await;
        assert_eq!(reply.status, StatusCode::BAD_REQUEST, "{body}");
        assert_matches("Error", &reply.json());
    }
    let listed = call(&app, "GET", "/api/tasks", None).await.json();
    assert_eq!(listed, json!([]));
}

#[tokio::test(flavor = "multi_thread")]
async fn unplannable_tasks_fail_with_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let id = submit(
        &app,
        json!({ "description": "Tell me a story about a teapot" }),
    )
    .await;
    let record = wait(&app, &id).await;
    assert_eq!(record["status"], "failed");
    assert_eq!(record["failure"]["kind"], "pipeline");
    for uri in [
        format!("/api/tasks/{id}/scene"),
        format!("/api/tasks/{id}/code"),
    ] {
        let reply = call(&app, "GET", &uri, None).await;
        assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
        let body = reply.json();
        assert_matches("Error", &body);
        assert_eq!(body["diagnostics"][0]["code"], "A006");
        assert_eq!(body["status"], "failed");
    }
}

#[tokio::test]
async fn unfinished_tasks_conflict() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let store = TaskStore::open(dir.path()).unwrap();
    store
        .save(&TaskRecord::new(
            "pending",
            PlanRequest::new("Create a point p1 (1, 2, 3)"),
        ))
        .unwrap();
    let reply = call(&app, "GET", "/api/tasks/pending/scene", None).await;
    assert_eq!(reply.status, StatusCode::CONFLICT);
    assert_eq!(reply.json()["status"], "queued");
}

#[tokio::test(flavor = "multi_thread")]
async fn unreachable_planner_is_service_unavailable() {
    let port = {
        let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        listener.local_addr().unwrap().port()
    };
    let dir = tempfile::tempdir().unwrap();
    let planner = Arc::new(HttpPlanner::new(format!("http://127.0.0.1:{port}/plan")));
    let app = app(dir.path(), Some(planner));
    let id = submit(&app, json!({ "description": WORKED })).await;
    let record = wait(&app, &id).await;
    assert_eq!(
        record["failure"]["kind"], "planner_unavailable",
        "{record:#}"
    );
    let reply = call(&app, "GET", &format!("/api/tasks/{id}/scene"), None).await;
    assert_eq!(reply.status, StatusCode::SERVICE_UNAVAILABLE);
    assert_matches("Error", &reply.json());
}

#[tokio::test(flavor = "multi_thread")]
async fn malformed_planner_replies_are_unprocessable() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(
        dir.path(),
        Some(Arc::new(MockBackend::replying(
            r#"{"subtasks": 7, "trace": []}"#,
        ))),
    );
    let id = submit(&app, json!({ "description": WORKED })).await;
    let record = wait(&app, &id).await;
    assert_eq!(record["failure"]["kind"], "planner_rejected");
    let reply = call(&app, "GET", &format!("/api/tasks/{id}/scene"), None).await;
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
    assert!(reply.json()["error"].as_str().unwrap().contains("subtasks"));
}

#[tokio::test(flavor = "multi_thread")]
async fn http_planner_drives_the_pipeline() {
    let local = plan(&PlanRequest::new(WORKED)).unwrap();
    let reply = BackendResponse {
        subtasks: local.subtasks.clone(),
        trace: local.trace.steps.clone(),
    };
    let planner_app = axum::Router::new().route(
        "/plan",
        post(move |Json(request): Json<BackendRequest>| {
            let reply = reply.clone();
            async move {
                assert_eq!(request.subtask_schema_version, "1");
                Json(reply)
            }
        }),
    );
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, planner_app).await.unwrap() });

    let dir = tempfile::tempdir().unwrap();
    let app = app(
        dir.path(),
        Some(Arc::new(HttpPlanner::new(format!("http://{addr}/plan")))),
    );
    let id = submit(&app, json!({ "description": WORKED })).await;
    let record = wait(&app, &id).await;
    assert_eq!(record["status"], "succeeded", "{record:#}");
    let remote: gavis::agents::Plan = serde_json::from_value(record["plan"].clone()).unwrap();
    assert_eq!(remote, local);
}

#[tokio::test]
async fn compile_returns_code_and_scene() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let script = "r = 0.5;\n?S = createSphere(createPoint(0, 0, 0), r);\n:S blue;\n";
    let body = json!({ "script": script, "bindings": { "r": 2.0 } });
    let reply = call(&app, "POST", "/api/compile", Some(&body.to_string())).await;
    assert_eq!(reply.status, StatusCode::OK, "{}", reply.text);
    let response = reply.json();
    assert_matches("CompileResponse", &response);
    assert_eq!(response["scene"]["objects"][0]["params"]["r"], 2.0);
    assert_eq!(response["inputs"], json!([{ "name": "r", "value": 2.0 }]));

    let body = json!({ "script": script, "target": "json-ir" });
    let response = call(&app, "POST", "/api/compile", Some(&body.to_string()))
        .await
        .json();
    let ir: Value = serde_json::from_str(response["code"].as_str().unwrap()).unwrap();
    assert_ir(&ir);
}

#[tokio::test]
async fn compile_reports_spans_for_syntax_errors() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let body = json!({ "script": "?a = e1;\n?b = (a + ;\n" });
    let reply = call(&app, "POST", "/api/compile", Some(&body.to_string())).await;
    assert_eq!(reply.status, StatusCode::UNPROCESSABLE_ENTITY);
    let body = reply.json();
    assert_matches("Error", &body);
    assert_eq!(body["diagnostics"][0]["span"]["line"], 2);

    let reply = call(
        &app,
        "POST",
        "/api/compile",
        Some(r#"{"script": "?a = e1;", "space": "nowhere"}"#),
    )
    .await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
    let reply = call(
        &app,
        "POST",
        "/api/compile",
        Some(r#"{"source": "?a = e1;"}"#),
    )
    .await;
    assert_eq!(reply.status, StatusCode::BAD_REQUEST);
}

#[tokio::test(flavor = "multi_thread")]
async fn tasks_survive_a_restart() {
    let dir = tempfile::tempdir().unwrap();
    let first = app(dir.path(), None);
    let a = submit(&first, json!({ "description": WORKED })).await;
    let b = submit(
        &first,
        json!({ "description": "Create a point p1 (1, 2, 3)" }),
    )
    .await;
    let before = (wait(&first, &a).await, wait(&first, &b).await);
    drop(first);

    let second = app(dir.path(), None);
    let after = (
        call(&second, "GET", &format!("/api/tasks/{a}"), None)
            .await
            .json(),
        call(&second, "GET", &format!("/api/tasks/{b}"), None)
            .await
            .json(),
    );
    assert_eq!(before, after);
    let listed = call(&second, "GET", "/api/tasks", None).await.json();
    assert_matches("TaskList", &listed);
    assert_eq!(listed.as_array().unwrap().len(), 2);
}

#[tokio::test(flavor = "multi_thread")]
async fn concurrent_tasks_run_independently() {
    let dir = tempfile::tempdir().unwrap();
    let app = app(dir.path(), None);
    let descriptions: Vec<String> = (0..8)
        .map(|i| format!("Create a point p{i} ({i}, 1, 2) and visualize it in green"))
        .collect();
    let mut ids = Vec::new();
    for d in &descriptions {
        ids.push(submit(&app, json!({ "description": d })).await);
    }
    for id in &ids {
        let record = wait(&app, id).await;
        assert_eq!(record["status"], "succeeded");
        assert_eq!(
            serde_json::from_value::<TaskStatus>(record["status"].clone()).unwrap(),
            TaskStatus::Succeeded
        );
    }
    let listed = call(&app, "GET", "/api/tasks", None).await.json();
    assert_eq!(listed.as_array().unwrap().len(), ids.len());
}
