//! Drives the built `hades` binary.

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Output, Stdio};

use super::fixture;

pub fn hades(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hades"))
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .output()
        .unwrap()
}

/// Runs a command that must exit 0; returns its stderr.
pub fn ok(args: &[&str]) -> String {
    let out = hades(args);
    let stderr = String::from_utf8_lossy(&out.stderr).into_owned();
    assert_eq!(out.status.code(), Some(0), "{args:?}: {stderr}");
    stderr
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Runs the whole pipeline into `root`/work and exports to `root`/bundle.
pub fn full_run(root: &Path) {
    let work = root.join("work");
    let config = fixture("plans/config.json");
    ok(&[
        "ingest",
        "--manifest",
        s(&fixture("plans/manifest.json")),
        "--out",
        s(&work),
    ]);
    ok(&["fit", "--corpus", s(&work), "--sections", "all", "--config", s(&config)]);
    ok(&["analyze", "--models", s(&work.join("models"))]);
    ok(&["summarize", "--corpus", s(&work), "--stub"]);
    ok(&["export", "--corpus", s(&work), "--out", s(&root.join("bundle"))]);
}

/// A running `run-app`, killed on drop.
pub struct Server {
    child: Child,
    pub base: String,
}

impl Server {
    pub fn spawn(app_config: &Path) -> Server {
        let mut child = Command::new(env!("CARGO_BIN_EXE_hades"))
            .args(["run-app", "--config", s(app_config)])
            .stderr(Stdio::piped())
            .stdout(Stdio::null())
            .spawn()
            .unwrap();
        let stderr = BufReader::new(child.stderr.take().unwrap());
        let mut address = None;
        for line in stderr.lines() {
            let event: serde_json::Value = serde_json::from_str(&line.unwrap()).unwrap();
            if event["event"] == "listening" {
                address = event["address"].as_str().map(String::from);
                break;
            }
        }
        let base = format!("http://{}", address.expect("server never reported its address"));
        Server { child, base }
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

pub fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

pub fn fetch(agent: &ureq::Agent, base: &str, url: &str) -> (u16, Vec<u8>) {
    let mut resp = agent.get(&format!("{base}{url}")).call().unwrap();
    (resp.status().as_u16(), resp.body_mut().read_to_vec().unwrap())
}
