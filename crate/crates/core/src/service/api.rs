//! Read-only JSON API over a loaded bundle.
//!
//! Handlers are plain functions of (path, query) so responses can be tested
//! without a socket; [`router`] mounts them under axum.

use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::body::Body;
use axum::http::{header, HeaderValue, Method, Request, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Router;
use serde_json::{json, Value};
use tower_http::cors::{AllowOrigin, Any, CorsLayer};
use tower_http::services::ServeDir;

use super::bundle::{load_bundle, AnalysisBundle, ClusterSet, ClusterVariant, SectionBundle};
use super::config::{AppConfig, UiDefaults};
use super::ServiceError;
use crate::analysis::{relevance, MappingMethod};

#[derive(Debug, Clone, PartialEq)]
pub struct ApiResponse {
    pub status: u16,
    pub body: Value,
}

impl ApiResponse {
    fn ok(body: Value) -> Self {
        ApiResponse { status: 200, body }
    }

    fn bad_request(param: &str, reason: impl std::fmt::Display) -> Self {
        ApiResponse {
            status: 400,
            body: json!({"error": "bad_request", "parameter": param, "message": format!("{param}: {reason}")}),
        }
    }

    fn not_found(resource: &str, id: &str) -> Self {
        ApiResponse {
            status: 404,
            body: json!({"error": "not_found", "resource": resource, "id": id, "message": format!("unknown {resource} '{id}'")}),
        }
    }

    /// Compact JSON with a trailing newline.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = serde_json::to_vec(&self.body).expect("json value serializes");
        out.push(b'\n');
        out
    }
}

type Query = BTreeMap<String, String>;

fn parse_query(raw: &str) -> Query {
    form_urlencoded::parse(raw.as_bytes()).into_owned().collect()
}

fn parse_param<T: std::str::FromStr>(q: &Query, name: &str) -> Result<Option<T>, ApiResponse>
where
    T::Err: std::fmt::Display,
{
    match q.get(name) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|e| ApiResponse::bad_request(name, format!("cannot parse '{v}': {e}"))),
    }
}

pub struct Api {
    bundle: AnalysisBundle,
    defaults: UiDefaults,
}

impl Api {
    pub fn new(bundle: AnalysisBundle, defaults: UiDefaults) -> Self {
        Api { bundle, defaults }
    }

    pub fn bundle(&self) -> &AnalysisBundle {
        &self.bundle
    }

    /// Dispatch a GET request.
    pub fn get(&self, path: &str, raw_query: &str) -> ApiResponse {
        let q = parse_query(raw_query);
        let parts: Vec<&str> = path.trim_matches('/').split('/').collect();
        let result = match parts.as_slice() {
            ["api", "meta"] => Ok(self.meta()),
            ["api", "sections"] => Ok(ApiResponse::ok(json!(self.bundle.manifest.sections))),
            ["api", "sections" | "topics", s, rest @ ..] => match self.bundle.section(s) {
                None => Err(ApiResponse::not_found("section", s)),
                Some(sec) => match rest {
                    ["model"] => Ok(self.model(s, sec)),
                    ["terms"] => self.terms(s, sec, &q),
                    ["clusters"] => self.clusters(s, sec, &q),
                    ["manova"] => self.manova(s, sec, &q),
                    ["mapping"] => self.mapping(s, sec, &q),
                    ["correlations"] => self.correlations(s, sec, &q),
                    _ => Err(ApiResponse::not_found("endpoint", path)),
                },
            },
            ["api", "documents", id, "summary"] => self.summary(id, &q),
            ["api", "compare"] => self.compare(&q),
            ["api", "correlations"] => self
                .section_param(&q)
                .and_then(|(s, sec)| self.correlations(s, sec, &q)),
            ["api", "geo"] => self.geo(&q),
            _ => Err(ApiResponse::not_found("endpoint", path)),
        };
        result.unwrap_or_else(|e| e)
    }

    fn meta(&self) -> ApiResponse {
        let m = &self.bundle.manifest;
        ApiResponse::ok(json!({
            "version": m.version,
            "created_unix": m.created_unix,
            "documents": m.documents,
            "section_ids": m.section_ids,
            "covariates": m.covariate_names,
            "geo": m.geo,
            "defaults": self.defaults,
            "sections": m.sections,
        }))
    }

    fn section_param<'a>(&'a self, q: &Query) -> Result<(&'a str, &'a SectionBundle), ApiResponse> {
        let id = match q.get("section").or(self.defaults.section.as_ref()) {
            Some(id) => id.as_str(),
            None => self
                .bundle
                .manifest
                .section_ids
                .first()
                .map(String::as_str)
                .ok_or_else(|| ApiResponse::bad_request("section", "bundle has no sections"))?,
        };
        match self.bundle.sections.get_key_value(id) {
            Some((k, s)) => Ok((k.as_str(), s)),
            None => Err(ApiResponse::not_found("section", id)),
        }
    }

    fn model(&self, id: &str, s: &SectionBundle) -> ApiResponse {
        let m = &s.model;
        ApiResponse::ok(json!({
            "section": id,
            "method": m.method,
            "K": m.k,
            "alpha": m.alpha,
            "beta": m.beta,
            "seed": m.seed,
            "coherence": m.coherence,
            "labels": m.labels,
            "doc_ids": m.doc_ids,
            "doc_lengths": m.doc_lengths,
            "theta": m.theta,
            "vocab": m.vocab,
            "phi": m.phi,
            "topic_prevalence": s.terms.topic_prevalence,
            "selection": s.selection,
        }))
    }

    fn terms(&self, id: &str, s: &SectionBundle, q: &Query) -> Result<ApiResponse, ApiResponse> {
        let lambda = parse_param::<f64>(q, "lambda")?.unwrap_or(s.terms.default_lambda);
        if !(0.0..=1.0).contains(&lambda) {
            return Err(ApiResponse::bad_request(
                "lambda",
                format!("{lambda} is outside [0, 1]"),
            ));
        }
        let top_n = parse_param::<usize>(q, "top_n")?.unwrap_or(s.terms.top_n);
        if top_n == 0 {
            return Err(ApiResponse::bad_request("top_n", "must be positive"));
        }
        let ranking = if lambda == s.terms.default_lambda && top_n == s.terms.top_n {
            s.terms.ranking.clone()
        } else {
            relevance(&s.model, lambda, top_n)
        };
        Ok(ApiResponse::ok(json!({
            "section": id,
            "lambda": lambda,
            "default_lambda": s.terms.default_lambda,
            "labels": s.model.labels,
            "topic_prevalence": s.terms.topic_prevalence,
            "topics": ranking.topics,
            "saliency": s.terms.saliency.iter().take(top_n).collect::<Vec<_>>(),
            "intertopic": s.terms.intertopic,
        })))
    }

    fn cluster_set<'a>(&self, s: &'a SectionBundle, q: &Query) -> Result<&'a ClusterSet, ApiResponse> {
        let algo = match q.get("algo") {
            Some(a) => a.as_str(),
            None if s.clusters.contains_key(&self.defaults.cluster_algo) => self.defaults.cluster_algo.as_str(),
            None => s
                .clusters
                .keys()
                .next()
                .map(String::as_str)
                .ok_or_else(|| ApiResponse::not_found("cluster algorithm", "(none computed)"))?,
        };
        s.clusters
            .get(algo)
            .ok_or_else(|| ApiResponse::not_found("cluster algorithm", algo))
    }

    /// `variant` names a key; otherwise `k` matches the cluster count, falling
    /// back to the default k and then to the first stored variant.
    fn cluster_variant<'a>(&self, set: &'a ClusterSet, q: &Query) -> Result<&'a ClusterVariant, ApiResponse> {
        if let Some(key) = q.get("variant") {
            return set
                .variants
                .iter()
                .find(|v| &v.key == key)
                .ok_or_else(|| ApiResponse::not_found("cluster variant", key));
        }
        if let Some(k) = parse_param::<usize>(q, "k")? {
            return set
                .variants
                .iter()
                .find(|v| v.result.n_clusters == k)
                .ok_or_else(|| ApiResponse::not_found("cluster variant", &format!("{}:k={k}", set.algo)));
        }
        self.defaults
            .k
            .and_then(|k| set.variants.iter().find(|v| v.result.n_clusters == k))
            .or_else(|| set.variants.first())
            .ok_or_else(|| ApiResponse::not_found("cluster variant", &set.algo))
    }

    fn clusters(&self, id: &str, s: &SectionBundle, q: &Query) -> Result<ApiResponse, ApiResponse> {
        let set = self.cluster_set(s, q)?;
        let v = self.cluster_variant(set, q)?;
        Ok(ApiResponse::ok(json!({
            "section": id,
            "algo": set.algo,
            "variant": v.key,
            "available": set.variants.iter().map(|v| &v.key).collect::<Vec<_>>(),
            "doc_ids": s.model.doc_ids,
            "result": v.result,
            "manova": v.manova,
        })))
    }

    fn manova(&self, id: &str, s: &SectionBundle, q: &Query) -> Result<ApiResponse, ApiResponse> {
        let set = self.cluster_set(s, q)?;
        let v = self.cluster_variant(set, q)?;
        Ok(ApiResponse::ok(json!({
            "section": id,
            "algo": set.algo,
            "variant": v.key,
            "report": v.manova.report,
            "error": v.manova.error,
        })))
    }

    fn mapping(&self, id: &str, s: &SectionBundle, q: &Query) -> Result<ApiResponse, ApiResponse> {
        let method = match q.get("method") {
            Some(m) => m
                .parse::<MappingMethod>()
                .map_err(|e| ApiResponse::bad_request("method", e))?,
            None if s.mappings.contains_key(&self.defaults.mapping) => self.defaults.mapping,
            None => *s
                .mappings
                .keys()
                .next()
                .ok_or_else(|| ApiResponse::not_found("mapping", "(none computed)"))?,
        };
        let e = s
            .mappings
            .get(&method)
            .ok_or_else(|| ApiResponse::not_found("mapping", &format!("{id}/{}", method.name())))?;
        Ok(ApiResponse::ok(json!({"section": id, "mapping": e})))
    }

    fn correlations(&self, id: &str, s: &SectionBundle, q: &Query) -> Result<ApiResponse, ApiResponse> {
        let entries: Vec<_> = match q.get("method") {
            None => s.correlations.iter().collect(),
            Some(m) => {
                let method = serde_json::from_value(Value::String(m.clone()))
                    .map_err(|_| ApiResponse::bad_request("method", format!("unknown correlation method '{m}'")))?;
                s.correlations.iter().filter(|c| c.method == method).collect()
            }
        };
        Ok(ApiResponse::ok(json!({
            "section": id,
            "labels": s.model.labels,
            "correlations": entries,
        })))
    }

    fn summary(&self, doc: &str, q: &Query) -> Result<ApiResponse, ApiResponse> {
        if !self.bundle.manifest.documents.iter().any(|d| d.doc_id == doc) {
            return Err(ApiResponse::not_found("document", doc));
        }
        let mut out = serde_json::Map::new();
        match q.get("section") {
            Some(sid) => {
                let s = self
                    .bundle
                    .section(sid)
                    .ok_or_else(|| ApiResponse::not_found("section", sid))?;
                let summary = s
                    .summaries
                    .get(doc)
                    .ok_or_else(|| ApiResponse::not_found("summary", &format!("{doc}/{sid}")))?;
                out.insert(sid.clone(), json!(summary));
            }
            None => {
                for (sid, s) in &self.bundle.sections {
                    if let Some(summary) = s.summaries.get(doc) {
                        out.insert(sid.clone(), json!(summary));
                    }
                }
            }
        }
        Ok(ApiResponse::ok(json!({"doc_id": doc, "summaries": out})))
    }

    fn compare(&self, q: &Query) -> Result<ApiResponse, ApiResponse> {
        let (sid, s) = self.section_param(q)?;
        let raw = q
            .get("ids")
            .ok_or_else(|| ApiResponse::bad_request("ids", "required (comma-separated doc ids)"))?;
        let ids: Vec<&str> = raw.split(',').map(str::trim).filter(|x| !x.is_empty()).collect();
        if ids.is_empty() {
            return Err(ApiResponse::bad_request("ids", "no document ids given"));
        }
        let m = &s.model;
        let mut docs = Vec::new();
        for id in &ids {
            let row = m
                .doc_ids
                .iter()
                .position(|d| d == id)
                .ok_or_else(|| ApiResponse::not_found("document", id))?;
            docs.push(json!({"doc_id": id, "theta": m.theta[row]}));
        }
        let topics: Vec<Value> = (0..m.k)
            .map(|t| {
                let values: Vec<f64> = m.theta.iter().map(|r| r[t]).collect();
                let s = five_number(&values);
                json!({
                    "topic": t,
                    "label": m.labels[t],
                    "min": s[0], "q1": s[1], "median": s[2], "q3": s[3], "max": s[4],
                    "mean": values.iter().sum::<f64>() / values.len() as f64,
                    "values": values,
                })
            })
            .collect();
        Ok(ApiResponse::ok(json!({
            "section": sid,
            "doc_ids": m.doc_ids,
            "documents": docs,
            "topics": topics,
        })))
    }

    fn geo(&self, q: &Query) -> Result<ApiResponse, ApiResponse> {
        if !self.bundle.manifest.geo {
            return Err(ApiResponse::not_found(
                "geo view",
                "entity ids are not ISO country codes",
            ));
        }
        let (sid, s) = self.section_param(q)?;
        let topic = parse_param::<usize>(q, "topic")?.unwrap_or(0);
        if topic >= s.model.k {
            return Err(ApiResponse::bad_request(
                "topic",
                format!("{topic} is not below K = {}", s.model.k),
            ));
        }
        let entity: BTreeMap<&str, &str> = self
            .bundle
            .manifest
            .documents
            .iter()
            .map(|d| (d.doc_id.as_str(), d.entity_id.as_str()))
            .collect();
        let values: Vec<Value> = s
            .model
            .doc_ids
            .iter()
            .zip(&s.model.theta)
            .map(|(d, row)| json!({"doc_id": d, "entity_id": entity[d.as_str()], "value": row[topic]}))
            .collect();
        Ok(ApiResponse::ok(json!({
            "section": sid,
            "topic": topic,
            "label": s.model.labels[topic],
            "values": values,
        })))
    }
}

/// Min, quartiles (linear interpolation) and max.
pub fn five_number(values: &[f64]) -> [f64; 5] {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let at = |p: f64| {
        let pos = p * (v.len() - 1) as f64;
        let lo = pos.floor() as usize;
        let hi = pos.ceil() as usize;
        v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
    };
    if v.is_empty() {
        return [f64::NAN; 5];
    }
    [v[0], at(0.25), at(0.5), at(0.75), v[v.len() - 1]]
}

fn into_http(r: ApiResponse) -> Response {
    let status = StatusCode::from_u16(r.status).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
    (
        status,
        [(header::CONTENT_TYPE, HeaderValue::from_static("application/json"))],
        r.to_bytes(),
    )
        .into_response()
}

fn cors_layer(origins: &[String]) -> Option<CorsLayer> {
    if origins.is_empty() {
        return None;
    }
    let allow = if origins.iter().any(|o| o == "*") {
        AllowOrigin::any()
    } else {
        AllowOrigin::list(origins.iter().filter_map(|o| HeaderValue::from_str(o).ok()))
    };
    Some(
        CorsLayer::new()
            .allow_origin(allow)
            .allow_methods([Method::GET])
            .allow_headers(Any),
    )
}

/// API under `/api`, optional static assets everywhere else.
pub fn router(api: Arc<Api>, config: &AppConfig) -> Router {
    let api_handler = move |req: Request<Body>| {
        let api = api.clone();
        async move {
            if req.method() != Method::GET {
                return into_http(ApiResponse {
                    status: 405,
                    body: json!({"error": "method_not_allowed", "message": "only GET is supported"}),
                });
            }
            into_http(api.get(req.uri().path(), req.uri().query().unwrap_or("")))
        }
    };
    let mut router = Router::new()
        .route("/api", axum::routing::any(api_handler.clone()))
        .route("/api/{*rest}", axum::routing::any(api_handler));
    if let Some(dir) = &config.static_dir {
        router = router.fallback_service(ServeDir::new(dir));
    }
    match cors_layer(&config.cors_origins) {
        Some(layer) => router.layer(layer),
        None => router,
    }
}

/// Load the bundle, bind, report the address through `on_listen`, then serve
/// until ctrl-c.
pub async fn serve(config: AppConfig, on_listen: impl FnOnce(SocketAddr)) -> Result<(), ServiceError> {
    let bundle = load_bundle(&config.bundle)?;
    let api = Arc::new(Api::new(bundle, config.defaults.clone()));
    let app = router(api, &config);
    let addr = format!("{}:{}", config.host, config.port);
    let listener = tokio::net::TcpListener::bind(&addr)
        .await
        .map_err(|source| ServiceError::Io {
            path: addr.clone().into(),
            source,
        })?;
    let local = listener.local_addr().map_err(|source| ServiceError::Io {
        path: addr.clone().into(),
        source,
    })?;
    on_listen(local);
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|source| ServiceError::Io {
            path: local.to_string().into(),
            source,
        })
}
