//! CLI stages over a work directory:
//!
//! ```text
//! <work>/corpus.json            ingest
//! <work>/config.json            fit (pipeline config snapshot)
//! <work>/models/<section>.json  fit (+ <section>.selection.json)
//! <work>/analysis/<section>/…   analyze (bundle section layout)
//! <work>/labels.json            summarize (LLM topic labels)
//! <work>/summaries.json         summarize
//! ```
//!
//! Each stage is a no-op when its outputs exist, unless forced. Running a
//! stage invalidates the outputs of the stages that depend on it.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::bundle::{
    is_iso_alpha2, save_bundle, variant_key, AnalysisBundle, BundleManifest, ClusterSet, ClusterVariant,
    CorrelationEntry, ManovaEntry, SectionBundle, SectionEntry, SectionTerms, BUNDLE_VERSION,
};
use super::config::{create_dir, io_err, read_json, to_json_bytes, write_json, PipelineConfig};
use super::ServiceError;
use crate::analysis::{
    self, agglomerative, classical_mds, correlation_matrix, distance_matrix, hdbscan, kmeans, manova, relevance,
    ClusterParams, ClusterResult, DistanceMatrix, Embedding2D, MappingMethod, Metric, TsneParams,
};
use crate::corpus::{build_corpus, load_manifest, Corpus, CorpusOptions, PreprocessOptions};
use crate::summarize::{summarize_all, EmbeddingProvider, LexicalEmbedder, LlmClient, SectionSummary, SummaryJob};
use crate::topics::{label_topics, optimize_model, LabelMode, SelectionReport, TopicModel};

/// Sink for machine-readable progress events.
pub type Progress<'a> = &'a (dyn Fn(serde_json::Value) + Sync);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageOutcome {
    Ran,
    Skipped,
}

const COMPLETE_MARKER: &str = "complete.json";

fn remove_if_exists(path: &Path) -> Result<(), ServiceError> {
    if path.is_dir() {
        std::fs::remove_dir_all(path).map_err(io_err(path))
    } else if path.exists() {
        std::fs::remove_file(path).map_err(io_err(path))
    } else {
        Ok(())
    }
}

pub fn corpus_path(work: &Path) -> PathBuf {
    work.join("corpus.json")
}

pub fn load_corpus(work: &Path) -> Result<Corpus, ServiceError> {
    let path = corpus_path(work);
    if !path.is_file() {
        return Err(ServiceError::MissingStage { stage: "ingest", path });
    }
    read_json(&path)
}

pub fn run_ingest(manifest: &Path, out: &Path, force: bool, progress: Progress) -> Result<StageOutcome, ServiceError> {
    let target = corpus_path(out);
    if target.is_file() && !force {
        progress(json!({"event": "stage_skipped", "stage": "ingest", "output": target}));
        return Ok(StageOutcome::Skipped);
    }
    progress(json!({"event": "stage_start", "stage": "ingest", "manifest": manifest}));
    let manifest = load_manifest(manifest)?;
    let corpus = build_corpus(&manifest, &CorpusOptions::default())?;
    for id in &corpus.section_ids {
        let bow = &corpus.bow[id];
        progress(json!({
            "event": "section_ingested",
            "section": id,
            "documents": bow.n_docs(),
            "terms": bow.n_terms(),
            "tokens": bow.total_tokens(),
        }));
    }
    create_dir(out)?;
    for stale in ["models", "analysis", "labels.json", "summaries.json", "config.json"] {
        remove_if_exists(&out.join(stale))?;
    }
    write_json(&target, &corpus)?;
    progress(json!({"event": "stage_done", "stage": "ingest", "output": target}));
    Ok(StageOutcome::Ran)
}

/// `--sections all` or a comma-separated list.
pub fn resolve_sections(corpus: &Corpus, spec: &str) -> Result<Vec<String>, ServiceError> {
    if spec == "all" {
        return Ok(corpus.section_ids.clone());
    }
    let mut out = Vec::new();
    for id in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if !corpus.section_ids.iter().any(|s| s == id) {
            return Err(ServiceError::Usage(format!(
                "unknown section '{id}' (available: {})",
                corpus.section_ids.join(", ")
            )));
        }
        out.push(id.to_string());
    }
    if out.is_empty() {
        return Err(ServiceError::Usage("--sections is empty".into()));
    }
    Ok(out)
}

pub fn load_pipeline_config(path: Option<&Path>) -> Result<PipelineConfig, ServiceError> {
    let config = match path {
        Some(p) => read_json(p)?,
        None => PipelineConfig::default(),
    };
    config.validate()?;
    Ok(config)
}

fn model_path(work: &Path, section: &str) -> PathBuf {
    work.join("models").join(format!("{section}.json"))
}

fn selection_path(work: &Path, section: &str) -> PathBuf {
    work.join("models").join(format!("{section}.selection.json"))
}

pub fn run_fit(
    work: &Path,
    sections: &str,
    config: &PipelineConfig,
    force: bool,
    progress: Progress,
) -> Result<StageOutcome, ServiceError> {
    config.validate()?;
    let corpus = load_corpus(work)?;
    let sections = resolve_sections(&corpus, sections)?;
    let snapshot = work.join("config.json");
    let same_config = std::fs::read(&snapshot).is_ok_and(|b| b == to_json_bytes(config));
    let todo: Vec<&String> = sections
        .iter()
        .filter(|s| force || !same_config || !model_path(work, s).is_file())
        .collect();
    if todo.is_empty() {
        progress(json!({"event": "stage_skipped", "stage": "fit"}));
        return Ok(StageOutcome::Skipped);
    }
    progress(json!({"event": "stage_start", "stage": "fit", "sections": todo}));
    remove_if_exists(&work.join("analysis").join(COMPLETE_MARKER))?;
    remove_if_exists(&work.join("labels.json"))?;
    write_json(&snapshot, config)?;
    for section in todo {
        let bow = &corpus.bow[section];
        let (model, report) = optimize_model(bow, &config.fit).map_err(|e| ServiceError::Section {
            section: section.clone(),
            source: Box::new(e.into()),
        })?;
        write_json(&model_path(work, section), &model)?;
        write_json(&selection_path(work, section), &report)?;
        progress(json!({
            "event": "section_fitted",
            "section": section,
            "method": model.method,
            "K": model.k,
            "seed": model.seed,
            "coherence": model.coherence,
            "candidates": report.candidates.len(),
        }));
    }
    progress(json!({"event": "stage_done", "stage": "fit"}));
    Ok(StageOutcome::Ran)
}

/// Fitted sections present under `<work>/models`, in corpus order.
pub fn fitted_sections(work: &Path, corpus: &Corpus) -> Vec<String> {
    corpus
        .section_ids
        .iter()
        .filter(|s| model_path(work, s).is_file())
        .cloned()
        .collect()
}

fn stored_config(work: &Path) -> Result<PipelineConfig, ServiceError> {
    let path = work.join("config.json");
    if path.is_file() {
        let config: PipelineConfig = read_json(&path)?;
        config.validate()?;
        Ok(config)
    } else {
        Ok(PipelineConfig::default())
    }
}

fn section_distances(model: &TopicModel, metric: Metric) -> Result<DistanceMatrix, ServiceError> {
    Ok(distance_matrix(&model.theta, &model.doc_ids, metric)?)
}

fn cluster_variant(
    model: &TopicModel,
    params: &ClusterParams,
    primary: &DistanceMatrix,
) -> Result<ClusterResult, analysis::AnalysisError> {
    let dist_for = |metric: Metric| -> Result<DistanceMatrix, analysis::AnalysisError> {
        if metric == primary.metric {
            Ok(primary.clone())
        } else {
            distance_matrix(&model.theta, &model.doc_ids, metric)
        }
    };
    match *params {
        ClusterParams::Hierarchical { linkage, k, metric } => agglomerative(&dist_for(metric)?, linkage, k),
        ClusterParams::Kmeans {
            k,
            seed,
            restarts,
            space,
        } => kmeans(&model.theta, k, seed, restarts, space),
        ClusterParams::Hdbscan {
            min_cluster_size,
            min_samples,
            metric,
        } => hdbscan(&dist_for(metric)?, min_cluster_size, min_samples),
    }
}

/// Topics placed by classical MDS over pairwise JSD of their term distributions.
pub fn intertopic_map(model: &TopicModel) -> Result<Embedding2D, ServiceError> {
    let ids: Vec<String> = (0..model.k).map(|t| t.to_string()).collect();
    if model.k < 2 {
        return Ok(Embedding2D {
            method: MappingMethod::Mds,
            ids,
            coords: vec![[0.0, 0.0]; model.k],
            objective_trace: Vec::new(),
            perplexity: None,
            seed: None,
            eigenvalues: Some([0.0, 0.0]),
        });
    }
    let dist = distance_matrix(&model.phi, &ids, Metric::Jsd)?;
    Ok(classical_mds(&dist))
}

fn covariate_columns(corpus: &Corpus, doc_ids: &[String]) -> BTreeMap<String, Vec<Option<f64>>> {
    let mut out = BTreeMap::new();
    for name in &corpus.covariate_names {
        let column = doc_ids
            .iter()
            .map(|id| {
                corpus
                    .documents
                    .iter()
                    .find(|d| &d.doc_id == id)
                    .and_then(|d| d.covariates.get(name).copied().flatten())
            })
            .collect();
        out.insert(name.clone(), column);
    }
    out
}

/// Analysis outputs of one section (the bundle section minus summaries).
pub fn analyze_section(
    corpus: &Corpus,
    section: &str,
    model: &TopicModel,
    config: &PipelineConfig,
    progress: Progress,
) -> Result<SectionBundle, ServiceError> {
    let cfg = &config.analyze;
    let distances = section_distances(model, cfg.metric)?;

    let mut clusters: BTreeMap<String, ClusterSet> = BTreeMap::new();
    for params in &cfg.clustering {
        let algo = params.algo_name().to_string();
        let key = variant_key(params);
        match cluster_variant(model, params, &distances) {
            Ok(result) => {
                let manova = match manova(&model.theta, &result.labels) {
                    Ok(report) => ManovaEntry {
                        report: Some(report),
                        error: None,
                    },
                    Err(e) => ManovaEntry {
                        report: None,
                        error: Some(e.to_string()),
                    },
                };
                let set = clusters.entry(algo.clone()).or_insert_with(|| ClusterSet {
                    algo,
                    variants: Vec::new(),
                });
                if set.variants.iter().all(|v| v.key != key) {
                    set.variants.push(ClusterVariant { key, result, manova });
                }
            }
            Err(e) => progress(json!({
                "event": "variant_skipped",
                "section": section,
                "algo": algo,
                "variant": key,
                "reason": e.to_string(),
            })),
        }
    }

    let mut mappings = BTreeMap::new();
    for method in &cfg.mappings {
        match method {
            MappingMethod::Mds => {
                mappings.insert(MappingMethod::Mds, classical_mds(&distances));
            }
            MappingMethod::Tsne => {
                let mut params = TsneParams::new(distances.len(), cfg.tsne_seed);
                params.iterations = cfg.tsne_iterations;
                if let Some(p) = cfg.tsne_perplexity {
                    params.perplexity = p;
                }
                match analysis::tsne(&distances, &params) {
                    Ok(e) => {
                        mappings.insert(MappingMethod::Tsne, e);
                    }
                    Err(e) => progress(json!({
                        "event": "variant_skipped",
                        "section": section,
                        "mapping": "tsne",
                        "reason": e.to_string(),
                    })),
                }
            }
        }
    }

    let ranking = relevance(model, cfg.lambda, cfg.top_n_terms);
    let terms = SectionTerms {
        default_lambda: cfg.lambda,
        top_n: cfg.top_n_terms,
        topic_prevalence: model.topic_prevalence(),
        saliency: ranking.saliency.clone(),
        ranking,
        intertopic: intertopic_map(model)?,
    };

    let topic_ids: Vec<String> = (0..model.k).map(|t| t.to_string()).collect();
    let covariates = covariate_columns(corpus, &model.doc_ids);
    let correlations = cfg
        .correlation_methods
        .iter()
        .map(
            |&method| match correlation_matrix(&model.theta, &topic_ids, &covariates, method) {
                Ok(m) => CorrelationEntry {
                    method,
                    matrix: Some(m),
                    error: None,
                },
                Err(e) => CorrelationEntry {
                    method,
                    matrix: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect();

    Ok(SectionBundle {
        model: model.clone(),
        selection: None,
        distances,
        clusters,
        mappings,
        terms,
        summaries: BTreeMap::new(),
        correlations,
    })
}

fn analysis_dir(work: &Path, section: &str) -> PathBuf {
    work.join("analysis").join(section)
}

fn write_section_analysis(dir: &Path, s: &SectionBundle) -> Result<(), ServiceError> {
    remove_if_exists(dir)?;
    write_json(&dir.join("distances.json"), &s.distances)?;
    for (algo, set) in &s.clusters {
        write_json(&dir.join("clusters").join(format!("{algo}.json")), set)?;
    }
    for (method, e) in &s.mappings {
        write_json(&dir.join("mapping").join(format!("{}.json", method.name())), e)?;
    }
    write_json(&dir.join("correlations.json"), &s.correlations)?;
    write_json(&dir.join("terms.json"), &s.terms)
}

fn read_section_analysis(dir: &Path, model: TopicModel) -> Result<SectionBundle, ServiceError> {
    let mut clusters = BTreeMap::new();
    let cdir = dir.join("clusters");
    if cdir.is_dir() {
        let mut entries: Vec<PathBuf> = std::fs::read_dir(&cdir)
            .map_err(io_err(&cdir))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        entries.sort();
        for p in entries {
            let set: ClusterSet = read_json(&p)?;
            clusters.insert(set.algo.clone(), set);
        }
    }
    let mut mappings = BTreeMap::new();
    for method in [MappingMethod::Mds, MappingMethod::Tsne] {
        let p = dir.join("mapping").join(format!("{}.json", method.name()));
        if p.is_file() {
            mappings.insert(method, read_json(&p)?);
        }
    }
    Ok(SectionBundle {
        model,
        selection: None,
        distances: read_json(&dir.join("distances.json"))?,
        clusters,
        mappings,
        terms: read_json(&dir.join("terms.json"))?,
        summaries: BTreeMap::new(),
        correlations: read_json(&dir.join("correlations.json"))?,
    })
}

/// `analyze --models DIR`; the work directory is the parent of `DIR`.
pub fn run_analyze(models_dir: &Path, force: bool, progress: Progress) -> Result<StageOutcome, ServiceError> {
    let work = models_dir.parent().unwrap_or(Path::new(".")).to_path_buf();
    let work = if work.as_os_str().is_empty() {
        PathBuf::from(".")
    } else {
        work
    };
    let marker = work.join("analysis").join(COMPLETE_MARKER);
    if marker.is_file() && !force {
        progress(json!({"event": "stage_skipped", "stage": "analyze"}));
        return Ok(StageOutcome::Skipped);
    }
    let corpus = load_corpus(&work)?;
    let config = stored_config(&work)?;
    let sections = fitted_sections(&work, &corpus);
    if sections.is_empty() {
        return Err(ServiceError::MissingStage {
            stage: "fit",
            path: models_dir.to_path_buf(),
        });
    }
    progress(json!({"event": "stage_start", "stage": "analyze", "sections": sections}));
    remove_if_exists(&marker)?;
    for section in &sections {
        let model: TopicModel = read_json(&model_path(&work, section))?;
        let s = analyze_section(&corpus, section, &model, &config, progress).map_err(|e| ServiceError::Section {
            section: section.clone(),
            source: Box::new(e),
        })?;
        write_section_analysis(&analysis_dir(&work, section), &s)?;
        progress(json!({
            "event": "section_analyzed",
            "section": section,
            "cluster_variants": s.clusters.values().map(|c| c.variants.len()).sum::<usize>(),
            "mappings": s.mappings.keys().map(|m| m.name()).collect::<Vec<_>>(),
        }));
    }
    write_json(&marker, &sections)?;
    progress(json!({"event": "stage_done", "stage": "analyze"}));
    Ok(StageOutcome::Ran)
}

pub fn summary_jobs(corpus: &Corpus) -> Vec<SummaryJob> {
    let mut jobs = Vec::new();
    for section_id in &corpus.section_ids {
        for s in &corpus.sections[section_id] {
            jobs.push(SummaryJob {
                doc_id: s.doc_id.clone(),
                section_id: section_id.clone(),
                text: s.body().to_string(),
            });
        }
    }
    jobs
}

pub fn embedding_provider(
    corpus: &Corpus,
    section: &str,
    config: &PipelineConfig,
    preprocess: &PreprocessOptions,
) -> Option<EmbeddingProvider> {
    match &config.summarize.embedding {
        Some(external) => Some(EmbeddingProvider::ExternalHttp(external.clone())),
        None => corpus
            .bow
            .get(section)
            .map(|bow| EmbeddingProvider::BuiltinLexical(LexicalEmbedder::from_bow(bow, preprocess.clone()))),
    }
}

pub type SummaryStore = BTreeMap<String, BTreeMap<String, SectionSummary>>;

/// `summarize --corpus DIR [--stub]`: topic labels for fitted sections, then
/// one summary per (document, section).
pub fn run_summarize(work: &Path, stub: bool, force: bool, progress: Progress) -> Result<StageOutcome, ServiceError> {
    let target = work.join("summaries.json");
    if target.is_file() && !force {
        progress(json!({"event": "stage_skipped", "stage": "summarize"}));
        return Ok(StageOutcome::Skipped);
    }
    let corpus = load_corpus(work)?;
    let mut config = stored_config(work)?;
    if stub {
        config.summarize.llm.stub = true;
    }
    let client = LlmClient::new(config.summarize.llm.clone());
    progress(json!({"event": "stage_start", "stage": "summarize", "stub": client.is_stub()}));

    let mut labels: BTreeMap<String, Vec<String>> = BTreeMap::new();
    if config.summarize.label_topics {
        for section in fitted_sections(work, &corpus) {
            if config.labels.contains_key(&section) {
                continue;
            }
            let model: TopicModel = read_json(&model_path(work, &section))?;
            let labeled = label_topics(model, LabelMode::Llm(&client)).map_err(|e| ServiceError::Section {
                section: section.clone(),
                source: Box::new(e.into()),
            })?;
            progress(json!({"event": "topics_labeled", "section": section, "labels": labeled.labels}));
            labels.insert(section, labeled.labels);
        }
    }

    let jobs = summary_jobs(&corpus);
    let preprocess = corpus.preprocess.clone();
    let results = summarize_all(
        &jobs,
        &client,
        |section| embedding_provider(&corpus, section, &config, &preprocess),
        &config.summarize.options,
    )?;
    let mut store: SummaryStore = BTreeMap::new();
    for r in results {
        debug_assert!(r.input_words <= r.budget_words);
        progress(json!({
            "event": "section_summarized",
            "doc_id": r.doc_id,
            "section": r.section_id,
            "path": r.path,
            "input_words": r.input_words,
            "retries": r.retries,
        }));
        store
            .entry(r.section_id.clone())
            .or_default()
            .insert(r.doc_id.clone(), r);
    }
    write_json(&work.join("labels.json"), &labels)?;
    write_json(&target, &store)?;
    progress(json!({"event": "stage_done", "stage": "summarize", "summaries": jobs.len()}));
    Ok(StageOutcome::Ran)
}

/// `SOURCE_DATE_EPOCH` when set and valid, otherwise the current time.
pub fn creation_time() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| {
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map_or(0, |d| d.as_secs())
        })
}

/// Assemble the bundle from a work directory's stage outputs.
pub fn assemble_bundle(work: &Path, created_unix: u64) -> Result<AnalysisBundle, ServiceError> {
    let corpus = load_corpus(work)?;
    let config = stored_config(work)?;
    let marker = work.join("analysis").join(COMPLETE_MARKER);
    if !marker.is_file() {
        return Err(ServiceError::MissingStage {
            stage: "analyze",
            path: work.join("analysis"),
        });
    }
    let analyzed: Vec<String> = read_json(&marker)?;
    let labels_path = work.join("labels.json");
    let llm_labels: BTreeMap<String, Vec<String>> = if labels_path.is_file() {
        read_json(&labels_path)?
    } else {
        BTreeMap::new()
    };
    let summaries_path = work.join("summaries.json");
    let mut summaries: SummaryStore = if summaries_path.is_file() {
        read_json(&summaries_path)?
    } else {
        BTreeMap::new()
    };

    let mut sections = BTreeMap::new();
    let mut entries = Vec::new();
    for id in corpus.section_ids.iter().filter(|s| analyzed.contains(s)) {
        let mut model: TopicModel = read_json(&model_path(work, id))?;
        if let Some(manual) = config.labels.get(id) {
            model = label_topics(model, LabelMode::Manual(manual.clone())).map_err(|e| ServiceError::Section {
                section: id.clone(),
                source: Box::new(e.into()),
            })?;
        } else if let Some(l) = llm_labels.get(id).filter(|l| l.len() == model.k) {
            model.labels = l.clone();
        }
        let mut s = read_section_analysis(&analysis_dir(work, id), model)?;
        let sel = selection_path(work, id);
        if sel.is_file() {
            s.selection = Some(read_json::<SelectionReport>(&sel)?);
        }
        s.summaries = summaries.remove(id).unwrap_or_default();
        entries.push(SectionEntry {
            id: id.clone(),
            k: s.model.k,
            labels: s.model.labels.clone(),
            n_docs: s.model.n_docs(),
            clusters: s
                .clusters
                .iter()
                .map(|(a, set)| (a.clone(), set.variants.iter().map(|v| v.key.clone()).collect()))
                .collect(),
            mappings: s.mappings.keys().copied().collect(),
        });
        sections.insert(id.clone(), s);
    }
    let manifest = BundleManifest {
        version: BUNDLE_VERSION,
        created_unix,
        geo: !corpus.documents.is_empty() && corpus.documents.iter().all(|d| is_iso_alpha2(&d.entity_id)),
        documents: corpus.documents.clone(),
        section_ids: entries.iter().map(|e| e.id.clone()).collect(),
        covariate_names: corpus.covariate_names.clone(),
        sections: entries,
        config: serde_json::to_value(&config).expect("config serializes"),
    };
    Ok(AnalysisBundle { manifest, sections })
}

pub fn run_export(work: &Path, out: &Path, progress: Progress) -> Result<StageOutcome, ServiceError> {
    progress(json!({"event": "stage_start", "stage": "export", "output": out}));
    let bundle = assemble_bundle(work, creation_time())?;
    save_bundle(&bundle, out)?;
    progress(json!({"event": "stage_done", "stage": "export", "output": out, "sections": bundle.manifest.section_ids}));
    Ok(StageOutcome::Ran)
}
