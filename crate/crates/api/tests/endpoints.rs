use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};
use std::time::Duration;

use axum::body::Body;
use axum::http::{HeaderMap, Method, Request, StatusCode};
use axum::routing::post;
use axum::Router;
use catalogue_api::{router, AppState, ClusterPoint, ForwardStatus, ReportStore, WebhookConfig, VERSION_HEADER};
use catalogue_core::{
    build_cluster_model, filter_records, to_json_payload, CatalogSnapshot, KMeansParams,
    LocalProvider, Schema, SourceFormat,
};
use catalogue_refresh::{rebuild, Fetched, Providers, RebuildConfig, SnapshotCell};
use catalogue_testkit::naive::filter_indices;
use catalogue_testkit::{fixture, naive_histogram, naive_tags, random_query, random_records, random_schema, rng, url_encode};
use serde_json::{json, Value as Json};
use tower::ServiceExt;

static FIXTURE: OnceLock<Arc<CatalogSnapshot>> = OnceLock::new();

fn fixture_snapshot() -> Arc<CatalogSnapshot> {
    FIXTURE.get_or_init(build_fixture).clone()
}

fn build_fixture() -> Arc<CatalogSnapshot> {
    let schema = Arc::new(Schema::load(fixture("schema.json")).unwrap());
    let fetched = Fetched::new(std::fs::read(fixture("catalogue.csv")).unwrap());
    let cfg = RebuildConfig {
        format: SourceFormat::Csv,
        checksum_skip: true,
        kmeans: KMeansParams::new(8, 0),
    };
    rebuild(&fetched, None, &schema, &Providers::local(256, 0), &cfg)
        .unwrap()
        .snapshot()
        .clone()
}

struct Harness {
    app: Router,
    state: AppState,
    _dir: tempfile::TempDir,
}

fn harness(snapshot: Option<Arc<CatalogSnapshot>>, webhook: Option<WebhookConfig>) -> Harness {
    let dir = tempfile::tempdir().unwrap();
    let cell = Arc::new(match snapshot {
        Some(s) => SnapshotCell::with_snapshot(s),
        None => SnapshotCell::new(),
    });
    let state = AppState {
        cell,
        reports: Arc::new(ReportStore::open(dir.path().join("reports.jsonl"), webhook).unwrap()),
        stats_features: Arc::new(
            catalogue_api::config::DEFAULT_STATS_FEATURES.iter().map(|s| s.to_string()).collect(),
        ),
    };
    Harness {
        app: router(state.clone()),
        state,
        _dir: dir,
    }
}

async fn call(app: &Router, method: Method, uri: &str, body: Option<Json>) -> (StatusCode, HeaderMap, String) {
    let request = Request::builder().method(method).uri(uri);
    let request = match body {
        Some(b) => request
            .header("content-type", "application/json")
            .body(Body::from(b.to_string())),
        None => request.body(Body::empty()),
    }
    .unwrap();
    let response = app.clone().oneshot(request).await.unwrap();
    let status = response.status();
    let headers = response.headers().clone();
    let bytes = axum::body::to_bytes(response.into_body(), usize::MAX).await.unwrap();
    (status, headers, String::from_utf8(bytes.to_vec()).unwrap())
}

async fn get(app: &Router, uri: &str) -> (StatusCode, HeaderMap, String) {
    call(app, Method::GET, uri, None).await
}

fn parse(body: &str) -> Json {
    serde_json::from_str(body).unwrap()
}

#[tokio::test]
async fn every_endpoint_is_503_before_first_snapshot() {
    let h = harness(None, None);
    for uri in ["/datasets", "/datasets/schema", "/datasets/tags", "/datasets/stats", "/datasets/clusters", "/datasets/0"] {
        let (status, _, body) = get(&h.app, uri).await;
        assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE, "{uri}");
        assert_eq!(parse(&body)["error"], "NotReady");
    }
    let (status, _, _) = call(&h.app, Method::POST, "/reports", Some(json!({"dataset_index": 0, "message": "x"}))).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

#[tokio::test]
async fn schema_lists_features_in_order() {
    let snap = fixture_snapshot();
    let h = harness(Some(snap.clone()), None);
    let (status, headers, body) = get(&h.app, "/datasets/schema").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(headers[VERSION_HEADER], "1");
    assert_eq!(headers["content-type"], "application/json");
    let names: Vec<String> = serde_json::from_str(&body).unwrap();
    assert_eq!(&names[..3], ["Name", "Year", "Unit"]);
    assert_eq!(names, snap.schema_names());
}

#[tokio::test]
async fn documented_query_with_features() {
    let snap = fixture_snapshot();
    let h = harness(Some(snap.clone()), None);
    let query = "Year>2003 and Year<2008 and Unit=='tokens'";
    let uri = format!("/datasets?query={}&features=Name,Year,Unit", url_encode(query));
    let (status, _, body) = get(&h.app, &uri).await;
    assert_eq!(status, StatusCode::OK);
    let rows: Vec<Json> = serde_json::from_str(&body).unwrap();
    let expected = filter_indices(query, snap.records(), snap.schema()).unwrap();
    assert_eq!(rows.len(), expected.len());
    assert!(!rows.is_empty());
    for (row, &i) in rows.iter().zip(&expected) {
        let record = &snap.records()[i];
        assert_eq!(row.as_object().unwrap().keys().collect::<Vec<_>>(), ["Name", "Year", "Unit"]);
        assert_eq!(row["Name"], serde_json::to_value(record.value("Name")).unwrap());
        let year = row["Year"].as_i64().unwrap();
        assert!(year > 2003 && year < 2008);
        assert_eq!(row["Unit"], "tokens");
    }

    let (_, _, body) = get(&h.app, "/datasets?features=Name,Year,Unit").await;
    let rows: Vec<Json> = serde_json::from_str(&body).unwrap();
    assert!(rows.contains(&json!({"Name": "Shami", "Unit": "sentences", "Year": 2018})));
}

#[tokio::test]
async fn plain_query_returns_everything() {
    let snap = fixture_snapshot();
    let h = harness(Some(snap.clone()), None);
    let (status, _, body) = get(&h.app, "/datasets").await;
    assert_eq!(status, StatusCode::OK);
    let rows: Vec<Json> = serde_json::from_str(&body).unwrap();
    assert_eq!(rows.len(), 500);
    assert_eq!(body, to_json_payload(&snap.records()));
}

#[tokio::test]
async fn query_errors_are_400_with_offset() {
    let h = harness(Some(fixture_snapshot()), None);
    let (status, headers, body) = get(&h.app, &format!("/datasets?query={}", url_encode("Year>>2003"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(headers[VERSION_HEADER], "1");
    let body = parse(&body);
    assert_eq!(body["error"], "SyntaxError");
    assert_eq!(body["offset"], 5);

    let (status, _, body) = get(&h.app, &format!("/datasets?query={}", url_encode("Year >== 2003"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert!(parse(&body)["offset"].is_u64());

    let (status, _, body) = get(&h.app, &format!("/datasets?query={}", url_encode("Nope == 1"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&body)["error"], "UnknownFeature");

    let (status, _, body) = get(&h.app, &format!("/datasets?query={}", url_encode("Name > 3"))).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&body)["error"], "TypeMismatch");

    let (status, _, body) = get(&h.app, "/datasets?features=Name,Nope").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&body)["error"], "UnknownFeature");
}

#[tokio::test]
async fn single_dataset_by_index() {
    let snap = fixture_snapshot();
    let h = harness(Some(snap.clone()), None);
    let (status, _, body) = get(&h.app, "/datasets/2").await;
    assert_eq!(status, StatusCode::OK);
    let labr = parse(&body);
    assert_eq!(labr["Name"], "LABR");
    assert_eq!(labr["Year"], 2018);
    assert_eq!(labr["Dialect"], "mixed");
    assert_eq!(labr.as_object().unwrap().len(), snap.schema().len());

    let (_, _, body) = get(&h.app, "/datasets/0").await;
    assert_eq!(body, to_json_payload(&snap.records()[0]));

    for (uri, status, error) in [
        ("/datasets/999999", StatusCode::NOT_FOUND, "OutOfRange"),
        ("/datasets/500", StatusCode::NOT_FOUND, "OutOfRange"),
        ("/datasets/-1", StatusCode::NOT_FOUND, "OutOfRange"),
        ("/datasets/abc", StatusCode::BAD_REQUEST, "InvalidIndex"),
        ("/datasets/1.5", StatusCode::BAD_REQUEST, "InvalidIndex"),
    ] {
        let (got, _, body) = get(&h.app, uri).await;
        assert_eq!(got, status, "{uri}");
        assert_eq!(parse(&body)["error"], error, "{uri}");
    }
}

#[tokio::test]
async fn tags_are_sorted_unique_values() {
    let snap = fixture_snapshot();
    let h = harness(Some(snap.clone()), None);
    let (status, _, body) = get(&h.app, "/datasets/tags?features=Dialect,Year").await;
    assert_eq!(status, StatusCode::OK);
    let tags = parse(&body);
    assert_eq!(tags.as_object().unwrap().keys().collect::<Vec<_>>(), ["Year", "Dialect"]);
    let years: Vec<String> = tags["Year"].as_array().unwrap().iter().map(|v| v.as_i64().unwrap().to_string()).collect();
    assert_eq!(years, naive_tags(snap.records(), "Year"));
    assert_eq!(tags["Year"][0], 2001);
    let dialects: Vec<&str> = tags["Dialect"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(dialects, naive_tags(snap.records(), "Dialect"));
    assert_eq!(&dialects[..2], ["Algeria", "Bahrain"]);

    let (_, _, all) = get(&h.app, "/datasets/tags").await;
    assert_eq!(parse(&all).as_object().unwrap().len(), snap.schema().len());

    let (status, _, body) = get(&h.app, "/datasets/tags?features=Nope").await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(parse(&body)["error"], "UnknownFeature");
}

#[tokio::test]
async fn stats_match_histograms() {
    let snap = fixture_snapshot();
    let h = harness(Some(snap.clone()), None);
    let (status, _, body) = get(&h.app, "/datasets/stats").await;
    assert_eq!(status, StatusCode::OK);
    let stats = parse(&body);
    let stats = stats.as_object().unwrap();
    assert_eq!(stats.len(), 11);
    for (feature, counts) in stats {
        let hist = naive_histogram(snap.records(), feature);
        let counts = counts.as_array().unwrap();
        assert_eq!(counts.len(), hist.len(), "{feature}");
        for c in counts {
            let key = match &c["value"] {
                Json::String(s) => s.clone(),
                other => other.to_string(),
            };
            assert_eq!(c["count"].as_u64().unwrap() as usize, hist[&key], "{feature} {key}");
        }
    }
}

#[tokio::test]
async fn stats_on_empty_catalogue_and_unknown_features() {
    let schema = Arc::new(Schema::load(fixture("schema.json")).unwrap());
    let empty = Arc::new(CatalogSnapshot::new(1, schema, vec![], None, 0));
    let mut h = harness(Some(empty), None);
    let (_, _, body) = get(&h.app, "/datasets/stats").await;
    let stats = parse(&body);
    assert_eq!(stats.as_object().unwrap().len(), 11);
    assert!(stats.as_object().unwrap().values().all(|v| v.as_array().unwrap().is_empty()));
    let (status, _, _) = get(&h.app, "/datasets/clusters").await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);

    h.state.stats_features = Arc::new(vec!["Year".into(), "Nope".into()]);
    let app = router(h.state.clone());
    let (status, _, body) = get(&app, "/datasets/stats").await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(parse(&body).as_object().unwrap().keys().collect::<Vec<_>>(), ["Year"]);
}

#[tokio::test]
async fn clusters_match_direct_build() {
    let snap = fixture_snapshot();
    let h = harness(Some(snap.clone()), None);
    let (status, _, body) = get(&h.app, "/datasets/clusters").await;
    assert_eq!(status, StatusCode::OK);
    let points: Vec<Json> = serde_json::from_str(&body).unwrap();
    assert_eq!(points.len(), 500);
    let model = build_cluster_model(snap.records(), &LocalProvider::new(256, 0), &KMeansParams::new(8, 0)).unwrap();
    let expected: Vec<ClusterPoint> = (0..500)
        .map(|i| ClusterPoint {
            index: i,
            name: snap.records()[i].value("Name").as_text().map(str::to_string),
            x: model.coords2d.get(i, 0),
            y: model.coords2d.get(i, 1),
            cluster: model.assignments[i],
        })
        .collect();
    assert_eq!(body, to_json_payload(&expected));
    for (i, p) in points.iter().enumerate() {
        assert_eq!(p["index"], i);
        assert!(p["cluster"].as_u64().unwrap() < 8);
    }
}

#[tokio::test]
async fn two_record_catalogue_has_two_clusters() {
    let schema = Arc::new(Schema::load(fixture("schema.json")).unwrap());
    let text = std::fs::read_to_string(fixture("catalogue.csv")).unwrap();
    let head: Vec<&str> = text.lines().take(3).collect();
    let fetched = Fetched::new(format!("{}\n", head.join("\n")).into_bytes());
    let cfg = RebuildConfig { format: SourceFormat::Csv, checksum_skip: true, kmeans: KMeansParams::new(2, 0) };
    let snap = rebuild(&fetched, None, &schema, &Providers::local(64, 0), &cfg).unwrap().snapshot().clone();
    let h = harness(Some(snap), None);
    let (_, _, body) = get(&h.app, "/datasets/clusters").await;
    let points: Vec<Json> = serde_json::from_str(&body).unwrap();
    assert_eq!(points.len(), 2);
    assert_ne!(points[0]["cluster"], points[1]["cluster"]);
}

#[tokio::test]
async fn endpoint_algebra_on_random_catalogues() {
    let schema = random_schema();
    let mut r = rng(2024);
    for round in 0..40u64 {
        let records = random_records(&mut r, 60);
        let snap = Arc::new(CatalogSnapshot::new(round + 1, schema.clone(), records, None, 0));
        let h = harness(Some(snap.clone()), None);
        for _ in 0..10 {
            let q = random_query(&mut r, 3);
            let (status, _, body) = get(&h.app, &format!("/datasets?query={}", url_encode(&q))).await;
            match filter_indices(&q, snap.records(), &schema) {
                Ok(indices) => {
                    assert_eq!(status, StatusCode::OK, "{q}: {body}");
                    let expected: Vec<_> = indices.iter().map(|&i| &snap.records()[i]).collect();
                    assert_eq!(body, to_json_payload(&expected), "{q}");
                    let direct = filter_records(&snap, &q).unwrap();
                    assert_eq!(direct.iter().map(|r| r.index).collect::<Vec<_>>(), indices);
                }
                Err(_) => assert_eq!(status, StatusCode::BAD_REQUEST, "{q}"),
            }
        }
        let (_, _, body) = get(&h.app, "/datasets/tags").await;
        assert_eq!(body, to_json_payload(&snap.unique_tags(&[] as &[&str]).unwrap()));
    }
}

#[tokio::test]
async fn anonymous_report_is_logged() {
    let h = harness(Some(fixture_snapshot()), None);
    let (status, headers, body) = call(
        &h.app,
        Method::POST,
        "/reports",
        Some(json!({"dataset_index": 2, "message": "wrong year"})),
    )
    .await;
    assert_eq!(status, StatusCode::CREATED);
    assert_eq!(headers[VERSION_HEADER], "1");
    let id = parse(&body)["id"].as_str().unwrap().to_string();
    assert_eq!(h.state.reports.status(&id), Some(ForwardStatus::Disabled));

    let log = std::fs::read_to_string(h.state.reports.path()).unwrap();
    let line = parse(log.lines().next().unwrap());
    assert_eq!(line["kind"], "report");
    assert_eq!(line["id"], id.as_str());
    assert_eq!(line["dataset_index"], 2);
    assert_eq!(line["message"], "wrong year");
    assert_eq!(line["forward_status"], "disabled");
    assert!(line.get("reporter").is_none());
}

#[tokio::test]
async fn report_validation() {
    let h = harness(Some(fixture_snapshot()), None);
    let long = "x".repeat(4001);
    for (body, status) in [
        (json!({"dataset_index": 2, "message": ""}), StatusCode::BAD_REQUEST),
        (json!({"dataset_index": 2, "message": "   "}), StatusCode::BAD_REQUEST),
        (json!({"dataset_index": 2, "message": long}), StatusCode::BAD_REQUEST),
        (json!({"dataset_index": 2, "message": "x", "field": "Nope"}), StatusCode::BAD_REQUEST),
        (json!({"dataset_index": "two", "message": "x"}), StatusCode::BAD_REQUEST),
        (json!({"message": "x"}), StatusCode::BAD_REQUEST),
        (json!({"dataset_index": 500, "message": "x"}), StatusCode::NOT_FOUND),
        (json!({"dataset_index": -3, "message": "x"}), StatusCode::NOT_FOUND),
    ] {
        let (got, _, text) = call(&h.app, Method::POST, "/reports", Some(body.clone())).await;
        assert_eq!(got, status, "{body}");
        assert!(parse(&text)["error"].is_string());
    }
    assert!(h.state.reports.is_empty());

    let ok = json!({"dataset_index": 2, "message": "x".repeat(4000), "field": "Year", "reporter": "octocat"});
    let (got, _, _) = call(&h.app, Method::POST, "/reports", Some(ok)).await;
    assert_eq!(got, StatusCode::CREATED);
}

#[tokio::test]
async fn report_log_is_append_only() {
    let snap = fixture_snapshot();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("reports.jsonl");
    let mut ids = Vec::new();
    let mut previous = String::new();
    for round in 0..3 {
        let store = Arc::new(ReportStore::open(&path, None).unwrap());
        let state = AppState {
            cell: Arc::new(SnapshotCell::with_snapshot(snap.clone())),
            reports: store.clone(),
            stats_features: Arc::new(vec![]),
        };
        let app = router(state);
        for i in 0..5 {
            let (status, _, body) = call(
                &app,
                Method::POST,
                "/reports",
                Some(json!({"dataset_index": i, "message": format!("round {round}")})),
            )
            .await;
            assert_eq!(status, StatusCode::CREATED);
            ids.push(parse(&body)["id"].as_str().unwrap().to_string());
        }
        let now = std::fs::read_to_string(&path).unwrap();
        assert!(now.starts_with(&previous));
        previous = now;
        assert_eq!(store.len(), ids.len());
    }
    let unique: std::collections::HashSet<_> = ids.iter().collect();
    assert_eq!(unique.len(), ids.len());
}

fn webhook(url: String) -> WebhookConfig {
    WebhookConfig {
        url,
        token: Some("hook-token".into()),
        retries: 2,
        backoff_ms: 10,
        timeout_seconds: 2,
    }
}

async fn wait_for(store: &ReportStore, id: &str, want: ForwardStatus) {
    for _ in 0..300 {
        if store.status(id) == Some(want) {
            return;
        }
        tokio::time::sleep(Duration::from_millis(10)).await;
    }
    panic!("status of {id} stayed {:?}", store.status(id));
}

#[tokio::test(flavor = "multi_thread")]
async fn unreachable_webhook_eventually_fails() {
    let h = harness(Some(fixture_snapshot()), Some(webhook("http://127.0.0.1:9/hook".into())));
    let started = std::time::Instant::now();
    let (status, _, body) = call(&h.app, Method::POST, "/reports", Some(json!({"dataset_index": 2, "message": "bad"}))).await;
    assert_eq!(status, StatusCode::CREATED);
    assert!(started.elapsed() < Duration::from_millis(500));
    let id = parse(&body)["id"].as_str().unwrap().to_string();
    assert_eq!(h.state.reports.status(&id), Some(ForwardStatus::Pending));
    wait_for(&h.state.reports, &id, ForwardStatus::Failed).await;
    let log = std::fs::read_to_string(h.state.reports.path()).unwrap();
    let last = parse(log.lines().last().unwrap());
    assert_eq!(last["kind"], "status");
    assert_eq!(last["forward_status"], "failed");
    assert_eq!(last["attempts"], 3);
}

#[tokio::test(flavor = "multi_thread")]
async fn webhook_receives_report_after_retry() {
    let received = Arc::new(Mutex::new(Vec::new()));
    let failures = Arc::new(AtomicUsize::new(1));
    let hook = {
        let received = received.clone();
        Router::new().route(
            "/hook",
            post(move |headers: HeaderMap, axum::Json(body): axum::Json<Json>| {
                let received = received.clone();
                let failures = failures.clone();
                async move {
                    if failures.fetch_sub(1, Ordering::SeqCst) > 0 {
                        return StatusCode::BAD_GATEWAY;
                    }
                    received.lock().unwrap().push((headers["authorization"].to_str().unwrap().to_string(), body));
                    StatusCode::CREATED
                }
            }),
        )
    };
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, hook).await.unwrap() });

    let h = harness(Some(fixture_snapshot()), Some(webhook(format!("http://{addr}/hook"))));
    let (_, _, body) = call(
        &h.app,
        Method::POST,
        "/reports",
        Some(json!({"dataset_index": 2, "message": "year is 2019", "reporter": "maintainer"})),
    )
    .await;
    let id = parse(&body)["id"].as_str().unwrap().to_string();
    wait_for(&h.state.reports, &id, ForwardStatus::Forwarded).await;
    let received = received.lock().unwrap();
    assert_eq!(received.len(), 1);
    assert_eq!(received[0].0, "Bearer hook-token");
    assert_eq!(received[0].1["dataset_name"], "LABR");
    assert_eq!(received[0].1["report"]["id"], id.as_str());
    assert_eq!(received[0].1["report"]["reporter"], "maintainer");
}

#[tokio::test]
async fn version_header_tracks_swaps() {
    let snap = fixture_snapshot();
    let h = harness(Some(snap.clone()), None);
    let (_, headers, _) = get(&h.app, "/datasets/schema").await;
    assert_eq!(headers[VERSION_HEADER], "1");
    let next = CatalogSnapshot::new(2, snap.schema_arc().clone(), snap.records()[..3].to_vec(), None, 0);
    h.state.cell.publish(Arc::new(next)).unwrap();
    let (_, headers, body) = get(&h.app, "/datasets").await;
    assert_eq!(headers[VERSION_HEADER], "2");
    assert_eq!(serde_json::from_str::<Vec<Json>>(&body).unwrap().len(), 3);
}
