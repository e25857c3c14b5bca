//! Client-side crawl of the HTTP API: follows every id a response mentions
//! and checks that it resolves through another endpoint.

use std::collections::BTreeSet;

use serde_json::Value;

pub struct CrawlReport {
    pub requests: usize,
    pub checked_ids: usize,
}

pub struct Crawler<F: FnMut(&str) -> (u16, Vec<u8>)> {
    fetch: F,
    pub requests: usize,
    pub checked_ids: usize,
}

impl<F: FnMut(&str) -> (u16, Vec<u8>)> Crawler<F> {
    pub fn new(fetch: F) -> Self {
        Crawler {
            fetch,
            requests: 0,
            checked_ids: 0,
        }
    }

    /// GET twice, require 200 and identical bytes, return the parsed body.
    fn get(&mut self, url: &str) -> Result<Value, String> {
        let (s1, b1) = (self.fetch)(url);
        let (s2, b2) = (self.fetch)(url);
        self.requests += 2;
        if s1 != 200 {
            return Err(format!("GET {url} -> {s1}: {}", String::from_utf8_lossy(&b1)));
        }
        if s1 != s2 || b1 != b2 {
            return Err(format!("GET {url} is not byte-stable"));
        }
        serde_json::from_slice(&b1).map_err(|e| format!("GET {url}: invalid JSON: {e}"))
    }

    fn resolve(&mut self, set: &BTreeSet<String>, id: &str, what: &str, at: &str) -> Result<(), String> {
        self.checked_ids += 1;
        if set.contains(id) {
            Ok(())
        } else {
            Err(format!("{at}: {what} '{id}' does not resolve"))
        }
    }

    pub fn run(mut self) -> Result<CrawlReport, String> {
        let meta = self.get("/api/meta")?;
        let strings = |v: &Value| -> Vec<String> {
            v.as_array()
                .map(|a| a.iter().filter_map(|x| x.as_str().map(str::to_string)).collect())
                .unwrap_or_default()
        };
        let section_ids: BTreeSet<String> = strings(&meta["section_ids"]).into_iter().collect();
        let covariates: BTreeSet<String> = strings(&meta["covariates"]).into_iter().collect();
        let mut doc_ids = BTreeSet::new();
        for d in meta["documents"].as_array().ok_or("meta.documents missing")? {
            let id = d["doc_id"].as_str().ok_or("doc_id missing")?.to_string();
            doc_ids.insert(id);
        }
        for id in doc_ids.clone() {
            let s = self.get(&format!("/api/documents/{id}/summary"))?;
            for (sec, summary) in s["summaries"].as_object().ok_or("summaries missing")? {
                self.resolve(&section_ids, sec, "section", "summary")?;
                self.resolve(&doc_ids, summary["doc_id"].as_str().unwrap_or(""), "doc_id", "summary")?;
            }
        }
        let listed = self.get("/api/sections")?;
        let listed = listed.as_array().ok_or("sections is not a list")?.clone();
        if listed.len() != section_ids.len() {
            return Err("sections list differs from meta.section_ids".into());
        }
        for entry in listed {
            let sid = entry["id"].as_str().ok_or("section id missing")?.to_string();
            self.resolve(&section_ids, &sid, "section", "/api/sections")?;
            let model = self.get(&format!("/api/sections/{sid}/model"))?;
            let k = model["K"].as_u64().ok_or("K missing")? as usize;
            let topics: BTreeSet<String> = (0..k).map(|t| t.to_string()).collect();
            let section_docs = strings(&model["doc_ids"]);
            for d in &section_docs {
                self.resolve(&doc_ids, d, "doc_id", &format!("{sid}/model"))?;
            }
            let terms = self.get(&format!("/api/sections/{sid}/terms"))?;
            if terms["topics"].as_array().map(Vec::len) != Some(k) {
                return Err(format!("{sid}/terms does not cover K topics"));
            }
            for id in strings(&terms["intertopic"]["ids"]) {
                self.resolve(&topics, &id, "topic", &format!("{sid}/terms intertopic"))?;
            }
            self.get(&format!("/api/sections/{sid}/terms?lambda=1"))?;
            for (algo, variants) in entry["clusters"].as_object().ok_or("clusters missing")? {
                for key in strings(variants) {
                    let c = self.get(&format!("/api/sections/{sid}/clusters?algo={algo}&variant={key}"))?;
                    for d in strings(&c["doc_ids"]) {
                        self.resolve(&doc_ids, &d, "doc_id", &format!("{sid}/clusters/{algo}"))?;
                    }
                    if c["result"]["labels"].as_array().map(Vec::len) != Some(section_docs.len()) {
                        return Err(format!(
                            "{sid}/clusters/{algo}/{key} labels do not align with documents"
                        ));
                    }
                    self.get(&format!("/api/sections/{sid}/manova?algo={algo}&variant={key}"))?;
                }
            }
            for method in strings(&entry["mappings"]) {
                let m = self.get(&format!("/api/sections/{sid}/mapping?method={method}"))?;
                for d in strings(&m["mapping"]["ids"]) {
                    self.resolve(&doc_ids, &d, "doc_id", &format!("{sid}/mapping/{method}"))?;
                }
            }
            let corr = self.get(&format!("/api/correlations?section={sid}"))?;
            for c in corr["correlations"].as_array().ok_or("correlations missing")? {
                if c["matrix"].is_null() {
                    continue;
                }
                for t in strings(&c["matrix"]["topics"]) {
                    self.resolve(&topics, &t, "topic", &format!("{sid}/correlations"))?;
                }
                for cov in strings(&c["matrix"]["covariates"]) {
                    self.resolve(&covariates, &cov, "covariate", &format!("{sid}/correlations"))?;
                }
            }
            if let Some(pair) = section_docs.get(..2) {
                let cmp = self.get(&format!("/api/compare?section={sid}&ids={},{}", pair[0], pair[1]))?;
                for d in cmp["documents"].as_array().ok_or("compare documents missing")? {
                    self.resolve(&doc_ids, d["doc_id"].as_str().unwrap_or(""), "doc_id", "compare")?;
                }
            }
            for d in &section_docs {
                self.get(&format!("/api/documents/{d}/summary?section={sid}"))?;
            }
        }
        Ok(CrawlReport {
            requests: self.requests,
            checked_ids: self.checked_ids,
        })
    }
}
