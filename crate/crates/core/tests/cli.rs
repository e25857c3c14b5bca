mod common;

use common::cli::{agent, fetch, full_run, hades, ok, s, Server};
use common::crawl::Crawler;
use common::{fixture, snapshot_dir};

#[test]
fn pipeline_runs_end_to_end_and_reproducibly() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    full_run(&a);
    full_run(&b);
    let bundle = snapshot_dir(&a.join("bundle"));
    assert!(bundle.contains_key("manifest.json"));
    assert_eq!(bundle, snapshot_dir(&b.join("bundle")));
}

#[test]
fn progress_is_json_lines_and_reruns_skip() {
    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("work");
    let manifest = fixture("plans/manifest.json");
    let first = ok(&["ingest", "--manifest", s(&manifest), "--out", s(&work)]);
    for line in first.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap_or_else(|e| panic!("{line}: {e}"));
    }
    assert!(first.contains("section_ingested"));
    let again = ok(&["ingest", "--manifest", s(&manifest), "--out", s(&work)]);
    assert!(again.contains("skipped"), "{again}");
    assert!(ok(&["--quiet", "ingest", "--manifest", s(&manifest), "--out", s(&work)]).is_empty());
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(hades(&["fit", "--bogus"]).status.code(), Some(1));
    assert_eq!(hades(&[]).status.code(), Some(1));
    assert_eq!(hades(&["--help"]).status.code(), Some(0));

    let tmp = tempfile::tempdir().unwrap();
    let work = tmp.path().join("work");
    ok(&[
        "ingest",
        "--manifest",
        s(&fixture("plans/manifest.json")),
        "--out",
        s(&work),
    ]);
    let bad = tmp.path().join("bad.json");
    std::fs::write(&bad, r#"{"fit": {"k_candidates": []}}"#).unwrap();
    let out = hades(&["fit", "--corpus", s(&work), "--config", s(&bad)]);
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));
    let out = hades(&["fit", "--corpus", s(&work), "--sections", "energy,nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nope"));
}

#[test]
fn runtime_errors_exit_two_and_name_the_path() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("missing.json");
    let out = hades(&["run-app", "--config", s(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(s(&missing)));

    let out = hades(&["analyze", "--models", s(&tmp.path().join("models"))]);
    assert_eq!(out.status.code(), Some(2));

    let app = tmp.path().join("app.json");
    std::fs::write(&app, r#"{"bundle": "nowhere"}"#).unwrap();
    let out = hades(&["run-app", "--config", s(&app)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere"));
}

#[test]
fn served_api_passes_the_crawl() {
    let tmp = tempfile::tempdir().unwrap();
    full_run(tmp.path());
    let app = tmp.path().join("app.json");
    std::fs::write(
        &app,
        r#"{"bundle": "bundle", "port": 0, "cors_origins": ["http://example.org"]}"#,
    )
    .unwrap();
    let server = Server::spawn(&app);
    let base = server.base.as_str();
    let agent = agent();
    let fetch = |url: &str| fetch(&agent, base, url);
    let report = Crawler::new(fetch).run().unwrap();
    assert!(report.requests > 50);

    let (status, body) = fetch("/api/sections/energy/terms?lambda=7");
    assert_eq!(status, 400);
    assert!(String::from_utf8_lossy(&body).contains("lambda"));
    let resp = agent
        .get(&format!("{base}/api/meta"))
        .header("Origin", "http://example.org")
        .call()
        .unwrap();
    assert_eq!(
        resp.headers().get("access-control-allow-origin").unwrap(),
        "http://example.org"
    );
    let resp = agent
        .get(&format!("{base}/api/meta"))
        .header("Origin", "http://evil.test")
        .call()
        .unwrap();
    assert!(resp.headers().get("access-control-allow-origin").is_none());
    let resp = agent.post(&format!("{base}/api/meta")).send_empty().unwrap();
    assert_eq!(resp.status().as_u16(), 405);
}
