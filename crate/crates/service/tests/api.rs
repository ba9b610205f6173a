//! HTTP API exercised in-process.

use std::sync::Arc;
use std::time::{Duration, SystemTime};

use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use relint_core::data::{simulate, write_csv, Dataset, SimulationSpec};
use relint_core::pool::WorkerPool;
use relint_core::{analyze, AnalysisParams};
use relint_service::{router, AppState, ManualClock, ServiceConfig, SessionSnapshot};
use relint_testkit::fixtures;
use serde_json::{json, Value};
use tower::ServiceExt;

struct Harness {
    app: Router,
    state: Arc<AppState>,
    clock: Arc<ManualClock>,
}

fn harness(config: ServiceConfig) -> Harness {
    let clock = Arc::new(ManualClock::new(SystemTime::UNIX_EPOCH + Duration::from_secs(1_000_000)));
    let state = AppState::new(config, WorkerPool::sequential(), clock.clone());
    Harness { app: router(Arc::clone(&state)), state, clock }
}

impl Harness {
    async fn send(&self, req: Request<Body>) -> (StatusCode, Value) {
        let resp = self.app.clone().oneshot(req).await.unwrap();
        let status = resp.status();
        let bytes = resp.into_body().collect().await.unwrap().to_bytes();
        let value = if bytes.is_empty() { Value::Null } else { serde_json::from_slice(&bytes).unwrap() };
        (status, value)
    }

    async fn upload(&self, csv: &str, query: &str) -> (StatusCode, Value) {
        let req = Request::post(format!("/sessions?{query}"))
            .header("content-type", "text/csv")
            .body(Body::from(csv.to_string()))
            .unwrap();
        self.send(req).await
    }

    async fn create(&self, csv: &str, query: &str) -> String {
        let (status, body) = self.upload(csv, query).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        body["id"].as_str().unwrap().to_string()
    }

    async fn results(&self, id: &str) -> (StatusCode, Value) {
        self.send(Request::get(format!("/sessions/{id}/results")).body(Body::empty()).unwrap()).await
    }

    async fn constrain(&self, id: &str, body: impl Into<String>) -> (StatusCode, Value) {
        let req = Request::put(format!("/sessions/{id}/constraints"))
            .header("content-type", "application/json")
            .body(Body::from(body.into()))
            .unwrap();
        self.send(req).await
    }

    async fn delete(&self, id: &str) -> StatusCode {
        self.send(Request::delete(format!("/sessions/{id}")).body(Body::empty()).unwrap()).await.0
    }
}

fn csv_of(data: &Dataset) -> String {
    let mut buf = Vec::new();
    write_csv(data, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn small_csv(seed: u64) -> String {
    csv_of(&simulate(&SimulationSpec::new(2, 2, 3, 80, seed)).unwrap().0)
}

const FAST: &str = "probes=8&seed=4";

fn uppers(results: &Value) -> Vec<f64> {
    results["features"].as_array().unwrap().iter().map(|f| f["upper"].as_f64().unwrap()).collect()
}

fn lowers(results: &Value) -> Vec<f64> {
    results["features"].as_array().unwrap().iter().map(|f| f["lower"].as_f64().unwrap()).collect()
}

#[tokio::test]
async fn health_answers() {
    let h = harness(ServiceConfig::default());
    let (status, body) = h.send(Request::get("/health").body(Body::empty()).unwrap()).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
}

#[tokio::test]
async fn upload_and_fetch_results() {
    let h = harness(ServiceConfig::default());
    let csv = small_csv(1);
    let (status, created) = h.upload(&csv, FAST).await;
    assert_eq!(status, StatusCode::CREATED);
    for key in ["C", "mu", "rho"] {
        assert!(created["baseline"][key].is_number(), "{key}");
    }
    let id = created["id"].as_str().unwrap();
    let (status, results) = h.results(id).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(results["schema"], 1);
    let features = results["features"].as_array().unwrap();
    assert_eq!(features.len(), 7);
    assert!(features.iter().all(|f| [0, 1, 2].contains(&f["class"].as_u64().unwrap())));

    // Same numbers as the library on the same bytes.
    let data = relint_core::data::read_csv(csv.as_bytes(), "label").unwrap();
    let params = AnalysisParams { n_probes: 8, seed: 4, ..Default::default() };
    let direct = analyze(&data, &params, &WorkerPool::sequential()).unwrap().report();
    assert_eq!(results, serde_json::to_value(&direct).unwrap());
}

#[tokio::test]
async fn json_upload_honours_parameters() {
    let h = harness(ServiceConfig::default());
    let body = json!({ "csv": small_csv(2).replace("label", "target"), "label": "target", "probes": 5, "seed": 9, "delta": 0.01 });
    let req = Request::post("/sessions")
        .header("content-type", "application/json")
        .body(Body::from(body.to_string()))
        .unwrap();
    let (status, created) = h.send(req).await;
    assert_eq!(status, StatusCode::CREATED, "{created}");
    let id = created["id"].as_str().unwrap();
    let session = h.state.store.get(id).unwrap();
    let params = session.read().await.analysis.params.clone();
    assert_eq!((params.n_probes, params.seed, params.delta), (5, 9, 0.01));
}

#[tokio::test]
async fn bad_uploads_are_rejected() {
    let h = harness(ServiceConfig::default());
    let (status, body) = h.upload("x,label\n1,1\n2,1\n3,1\n", "").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(body["error"].as_str().unwrap().contains("label"), "{body}");
    assert_eq!(h.upload("x,label\nfoo,1\n2,-1\n", "").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(h.upload(&small_csv(1), "label=nope").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(h.upload(&small_csv(1), "delta=abc").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(h.upload(&small_csv(1), "p=0.3").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(h.upload(&small_csv(1), "probes=1").await.0, StatusCode::BAD_REQUEST);
    let req = Request::post("/sessions").header("content-type", "image/png").body(Body::from("x")).unwrap();
    assert_eq!(h.send(req).await.0, StatusCode::UNSUPPORTED_MEDIA_TYPE);
    let req = Request::post("/sessions").header("content-type", "application/json").body(Body::from("{")).unwrap();
    assert_eq!(h.send(req).await.0, StatusCode::BAD_REQUEST);
    assert!(h.state.store.is_empty());
}

#[tokio::test]
async fn oversized_upload_is_rejected() {
    let h = harness(ServiceConfig::default());
    let row = "0.123456789,0.987654321,1\n";
    let mut csv = String::from("a,b,label\n");
    while csv.len() <= relint_service::DEFAULT_MAX_BODY {
        csv.push_str(row);
    }
    assert_eq!(h.upload(&csv, "").await.0, StatusCode::PAYLOAD_TOO_LARGE);
}

#[tokio::test]
async fn unknown_sessions_are_not_found() {
    let h = harness(ServiceConfig::default());
    assert_eq!(h.results("missing").await.0, StatusCode::NOT_FOUND);
    assert_eq!(h.constrain("missing", "[]").await.0, StatusCode::NOT_FOUND);
    assert_eq!(h.delete("missing").await, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn delete_lifecycle() {
    let h = harness(ServiceConfig::default());
    let id = h.create(&small_csv(3), FAST).await;
    assert_eq!(h.delete(&id).await, StatusCode::NO_CONTENT);
    assert_eq!(h.results(&id).await.0, StatusCode::NOT_FOUND);
    assert_eq!(h.delete(&id).await, StatusCode::NOT_FOUND);
}

#[tokio::test]
async fn sessions_expire_after_inactivity() {
    let h = harness(ServiceConfig { ttl: Duration::from_secs(3600), ..Default::default() });
    let id = h.create(&small_csv(4), FAST).await;
    h.clock.advance(Duration::from_secs(3000));
    assert_eq!(h.results(&id).await.0, StatusCode::OK);
    // The read above refreshed the session.
    h.clock.advance(Duration::from_secs(3000));
    assert_eq!(h.results(&id).await.0, StatusCode::OK);
    h.clock.advance(Duration::from_secs(3601));
    assert_eq!(h.results(&id).await.0, StatusCode::NOT_FOUND);
    assert!(h.state.store.is_empty());
}

#[tokio::test]
async fn constraint_scenarios_on_identical_copies() {
    let h = harness(ServiceConfig::default());
    let csv = csv_of(&fixtures::strong_triplet_noise(3, 500));
    let id = h.create(&csv, "seed=3").await;
    let (_, free) = h.results(&id).await;
    let (free_lo, free_hi) = (lowers(&free), uppers(&free));

    // Pin the first copy to its maximum: the other copies lose all weight.
    let body = json!([{ "feature": 4, "min": free_hi[4], "max": free_hi[4] }]).to_string();
    let (status, pinned) = h.constrain(&id, body.clone()).await;
    assert_eq!(status, StatusCode::OK, "{pinned}");
    assert_eq!(pinned["infeasible"], false);
    assert_eq!(pinned["constraints"], serde_json::from_str::<Value>(&body).unwrap());
    for j in [5, 6] {
        let norm = pinned["results"]["features"][j]["upper_norm"].as_f64().unwrap();
        assert!(norm < 1e-3, "feature {j}: {norm}");
    }

    // Pin it to its minimum: the others keep their intervals.
    let body = json!([{ "feature": 4, "min": free_lo[4], "max": free_lo[4] }]).to_string();
    let (_, pinned) = h.constrain(&id, body).await;
    for j in [5, 6] {
        assert!((lowers(&pinned["results"])[j] - free_lo[j]).abs() < 1e-6);
        assert!((uppers(&pinned["results"])[j] - free_hi[j]).abs() < 1e-6);
    }

    // A constraint equal to a feature's own interval changes nothing else.
    let body = json!([{ "feature": 0, "min": free_lo[0], "max": free_hi[0] }]).to_string();
    let (_, pinned) = h.constrain(&id, body).await;
    for j in 1..8 {
        assert!((lowers(&pinned["results"])[j] - free_lo[j]).abs() < 1e-6, "feature {j}");
        assert!((uppers(&pinned["results"])[j] - free_hi[j]).abs() < 1e-6, "feature {j}");
    }

    // The stored unconstrained results never change.
    assert_eq!(h.results(&id).await.1, free);

    // An empty set clears the constraints.
    let (_, cleared) = h.constrain(&id, "[]").await;
    assert_eq!(cleared["results"], free);
}

#[tokio::test]
async fn bad_and_infeasible_constraints() {
    let h = harness(ServiceConfig::default());
    let id = h.create(&small_csv(5), FAST).await;
    let (_, free) = h.results(&id).await;
    assert_eq!(h.constrain(&id, "not json").await.0, StatusCode::BAD_REQUEST);
    assert_eq!(h.constrain(&id, r#"[{"feature":0,"min":2,"max":1}]"#).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(h.constrain(&id, r#"[{"feature":0,"min":-1,"max":1}]"#).await.0, StatusCode::BAD_REQUEST);
    assert_eq!(h.constrain(&id, r#"[{"feature":70,"min":0,"max":1}]"#).await.0, StatusCode::BAD_REQUEST);

    let mu = free["baseline"]["mu"].as_f64().unwrap();
    let body = json!([{ "feature": 6, "min": 2.0 * mu, "max": 3.0 * mu }]).to_string();
    let (status, err) = h.constrain(&id, body).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(err["infeasible"], true);
    let session = h.state.store.get(&id).unwrap();
    assert!(session.read().await.constraints.is_empty());
}

#[tokio::test]
async fn exhausted_budget_reports_unavailable() {
    let h = harness(ServiceConfig { compute_budget: Duration::from_nanos(1), ..Default::default() });
    let id = h.create(&small_csv(6), FAST).await;
    let (_, free) = h.results(&id).await;
    let hi = uppers(&free)[0];
    let body = json!([{ "feature": 0, "min": hi, "max": hi }]).to_string();
    assert_eq!(h.constrain(&id, body).await.0, StatusCode::SERVICE_UNAVAILABLE);
    assert_eq!(h.results(&id).await.1, free);
    let session = h.state.store.get(&id).unwrap();
    assert!(session.read().await.constraints.is_empty());
}

#[tokio::test]
async fn cors_headers_are_sent() {
    let h = harness(ServiceConfig { cors_origins: vec!["http://ui.example".into()], ..Default::default() });
    let req = Request::get("/health").header("origin", "http://ui.example").body(Body::empty()).unwrap();
    let resp = h.app.clone().oneshot(req).await.unwrap();
    assert_eq!(resp.headers()["access-control-allow-origin"], "http://ui.example");
}

#[tokio::test]
async fn static_files_are_served_outside_the_api() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("index.html"), "<html></html>").unwrap();
    let h = harness(ServiceConfig { static_dir: Some(dir.path().to_path_buf()), ..Default::default() });
    let resp = h.app.clone().oneshot(Request::get("/index.html").body(Body::empty()).unwrap()).await.unwrap();
    assert_eq!(resp.status(), StatusCode::OK);
}

#[tokio::test]
async fn snapshot_round_trip() {
    let h = harness(ServiceConfig::default());
    let id = h.create(&small_csv(7), FAST).await;
    let session = h.state.store.get(&id).unwrap().read().await.clone();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("session.json");
    SessionSnapshot { schema: SessionSnapshot::SCHEMA, session: session.clone() }.save(&path).unwrap();
    let back = SessionSnapshot::load(&path).unwrap();
    assert_eq!(back.session, session);
    std::fs::write(&path, "{}").unwrap();
    assert!(SessionSnapshot::load(&path).is_err());
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_sessions_do_not_interfere() {
    let h = Arc::new(harness(ServiceConfig::default()));
    let mut tasks = Vec::new();
    for seed in 10..16u64 {
        let h = Arc::clone(&h);
        tasks.push(tokio::spawn(async move {
            let csv = small_csv(seed);
            let id = h.create(&csv, &format!("probes=6&seed={seed}")).await;
            let (_, free) = h.results(&id).await;
            let hi = uppers(&free)[0];
            let body = json!([{ "feature": 0, "min": hi, "max": hi }]).to_string();
            let (status, pinned) = h.constrain(&id, body).await;
            assert_eq!(status, StatusCode::OK);
            (seed, csv, free, pinned)
        }));
    }
    for task in tasks {
        let (seed, csv, free, pinned) = task.await.unwrap();
        let data = relint_core::data::read_csv(csv.as_bytes(), "label").unwrap();
        let params = AnalysisParams { n_probes: 6, seed, ..Default::default() };
        let pool = WorkerPool::sequential();
        let a = analyze(&data, &params, &pool).unwrap();
        assert_eq!(free, serde_json::to_value(a.report()).unwrap(), "seed {seed}");
        let mut k = relint_core::bounds::ConstraintSet::new();
        k.insert(0, a.intervals.upper[0], a.intervals.upper[0]).unwrap();
        let c = a.constrained(&data, &k, &pool).unwrap();
        assert_eq!(pinned["results"], serde_json::to_value(c.report(&a.baseline)).unwrap());
    }
    assert_eq!(h.state.store.len(), 6);
}
