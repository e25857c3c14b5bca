#![allow(dead_code)]

pub mod cli;
pub mod crawl;
pub mod oracle;

use std::path::PathBuf;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use hades::corpus::{BowMatrix, Vocabulary};
use hades::rng::seeded;

pub fn fixture(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(rel)
}

pub const SYNTH_SEED: u64 = 20240611;
pub const SYNTH_TOPICS: usize = 3;
pub const SYNTH_WORDS_PER_TOPIC: usize = 20;
pub const SYNTH_DOCS: usize = 60;
pub const SYNTH_DOC_LEN: usize = 120;

/// Sampled corpus with its generating parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticCorpus {
    pub seed: u64,
    pub vocab: Vec<String>,
    /// K×V, each topic supported on its own block of 20 words.
    pub phi: Vec<Vec<f64>>,
    pub theta: Vec<Vec<f64>>,
    /// Word ids per document.
    pub docs: Vec<Vec<usize>>,
}

fn dirichlet(alpha: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let draws: Vec<f64> = alpha
        .iter()
        .map(|&a| Gamma::new(a, 1.0).expect("positive shape").sample(rng))
        .collect();
    let s: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / s).collect()
}

fn categorical(p: &[f64], rng: &mut impl Rng) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, &x) in p.iter().enumerate() {
        acc += x;
        if u < acc {
            return i;
        }
    }
    p.len() - 1
}

/// 60 documents over 3 disjoint 20-word topics; document i leans on topic i mod 3.
pub fn synthetic_corpus() -> SyntheticCorpus {
    let mut rng = seeded(SYNTH_SEED);
    let v = SYNTH_TOPICS * SYNTH_WORDS_PER_TOPIC;
    let vocab: Vec<String> = (0..v)
        .map(|w| format!("t{}w{:02}", w / SYNTH_WORDS_PER_TOPIC, w % SYNTH_WORDS_PER_TOPIC))
        .collect();
    let phi: Vec<Vec<f64>> = (0..SYNTH_TOPICS)
        .map(|t| {
            let block = dirichlet(&[2.0; SYNTH_WORDS_PER_TOPIC], &mut rng);
            let mut row = vec![0.0; v];
            row[t * SYNTH_WORDS_PER_TOPIC..(t + 1) * SYNTH_WORDS_PER_TOPIC].copy_from_slice(&block);
            row
        })
        .collect();
    let mut theta = Vec::new();
    let mut docs = Vec::new();
    for d in 0..SYNTH_DOCS {
        let mut alpha = [0.3; SYNTH_TOPICS];
        alpha[d % SYNTH_TOPICS] = 2.0;
        let th = dirichlet(&alpha, &mut rng);
        let words: Vec<usize> = (0..SYNTH_DOC_LEN)
            .map(|_| {
                let t = categorical(&th, &mut rng);
                categorical(&phi[t], &mut rng)
            })
            .collect();
        theta.push(th);
        docs.push(words);
    }
    SyntheticCorpus {
        seed: SYNTH_SEED,
        vocab,
        phi,
        theta,
        docs,
    }
}

/// Bag of words over word-id documents, with the full vocabulary kept.
pub fn bow_from_ids(vocab: &[String], docs: &[Vec<usize>]) -> BowMatrix {
    let v = vocab.len();
    let mut doc_freq = vec![0usize; v];
    let rows = docs
        .iter()
        .map(|doc| {
            let mut counts = vec![0u32; v];
            for &w in doc {
                counts[w] += 1;
            }
            counts
                .iter()
                .enumerate()
                .filter(|(_, &c)| c > 0)
                .map(|(w, &c)| {
                    doc_freq[w] += 1;
                    (w, c)
                })
                .collect()
        })
        .collect();
    BowMatrix {
        section_id: "synthetic".into(),
        doc_ids: (0..docs.len()).map(|d| format!("d{d:02}")).collect(),
        vocab: Vocabulary::from_parts(vocab.to_vec(), doc_freq),
        rows,
    }
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Greedy one-to-one matching of fitted to true rows by cosine, best pair first.
/// Returns the matched cosines in true-row order.
pub fn greedy_matched_cosines(fitted: &[Vec<f64>], truth: &[Vec<f64>]) -> Vec<f64> {
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, f) in fitted.iter().enumerate() {
        for (j, t) in truth.iter().enumerate() {
            pairs.push((cosine(f, t), i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut used_f = vec![false; fitted.len()];
    let mut out = vec![f64::NAN; truth.len()];
    for (c, i, j) in pairs {
        if !used_f[i] && out[j].is_nan() {
            used_f[i] = true;
            out[j] = c;
        }
    }
    out
}

pub fn random_distribution(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    dirichlet(&vec![1.0; k], rng)
}

/// Distribution sampler whose rows include exact zeros some of the time.
pub fn sparse_distribution(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let mut p = random_distribution(rng, k);
    if rng.random_bool(0.3) {
        let z = rng.random_range(0..k);
        p[z] = 0.0;
        let s: f64 = p.iter().sum();
        if s > 0.0 {
            p.iter_mut().for_each(|x| *x /= s);
        } else {
            p[(z + 1) % k] = 1.0;
        }
    }
    p
}

/// Topic model assembled from hand-set parameters.
pub fn toy_model(phi: Vec<Vec<f64>>, theta: Vec<Vec<f64>>, doc_lengths: Vec<u64>) -> hades::topics::TopicModel {
    let k = phi.len();
    let v = phi[0].len();
    hades::topics::TopicModel {
        version: hades::topics::MODEL_VERSION,
        method: hades::topics::Method::Lda,
        k,
        alpha: None,
        beta: None,
        seed: 0,
        coherence: 0.0,
        labels: hades::topics::TopicModel::default_labels(k),
        phi,
        doc_ids: (0..theta.len()).map(|d| format!("d{d}")).collect(),
        theta,
        vocab: (0..v).map(|w| format!("w{w}")).collect(),
        doc_lengths,
        trace: Vec::new(),
    }
}

/// Euclidean distance matrix over 2D points.
pub fn euclidean_matrix(points: &[[f64; 2]]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|a| {
            points
                .iter()
                .map(|b| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
                .collect()
        })
        .collect()
}

pub fn as_distance_matrix(values: Vec<Vec<f64>>) -> hades::analysis::DistanceMatrix {
    let ids = (0..values.len()).map(|i| format!("p{i}")).collect();
    hades::analysis::DistanceMatrix::from_values(hades::analysis::Metric::Jsd, ids, values).unwrap()
}

pub fn random_points(rng: &mut impl Rng, n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|_| [rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
        .collect()
}

/// Determinant by Gaussian elimination with partial pivoting.
pub fn determinant(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))
            .unwrap();
        if a[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in (col + 1)..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                a[r][c] -= f * a[col][c];
            }
        }
    }
    det
}

/// Two groups of `per_group` rows on the 3-simplex; group means differ by
/// `shift` in the first coordinate, with uniform noise of half-width `noise`.
pub fn two_group_simplex(rng: &mut impl Rng, per_group: usize, shift: f64, noise: f64) -> (Vec<Vec<f64>>, Vec<i64>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for g in 0..2 {
        let base = if g == 0 {
            [0.2, 0.4, 0.4]
        } else {
            [0.2 + shift, 0.4 - shift / 2.0, 0.4 - shift / 2.0]
        };
        for _ in 0..per_group {
            let e1 = rng.random_range(-noise..noise);
            let e2 = rng.random_range(-noise..noise);
            rows.push(vec![base[0] + e1, base[1] + e2, base[2] - e1 - e2]);
            labels.push(g as i64);
        }
    }
    (rows, labels)
}

pub const FIXTURE_EPOCH: u64 = 1_700_000_000;

/// Run every stage on the country-plan fixture inside `work` with the stub LLM.
pub fn run_fixture_pipeline(work: &std::path::Path) -> hades::service::AnalysisBundle {
    use hades::service::pipeline;
    let quiet = |_: serde_json::Value| {};
    let config = pipeline::load_pipeline_config(Some(&fixture("plans/config.json"))).unwrap();
    pipeline::run_ingest(&fixture("plans/manifest.json"), work, false, &quiet).unwrap();
    pipeline::run_fit(work, "all", &config, false, &quiet).unwrap();
    pipeline::run_analyze(&work.join("models"), false, &quiet).unwrap();
    pipeline::run_summarize(work, true, false, &quiet).unwrap();
    pipeline::assemble_bundle(work, FIXTURE_EPOCH).unwrap()
}

/// Every file under `root` with its bytes, keyed by relative path.
pub fn snapshot_dir(root: &std::path::Path) -> std::collections::BTreeMap<String, Vec<u8>> {
    fn walk(root: &std::path::Path, dir: &std::path::Path, out: &mut std::collections::BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = std::collections::BTreeMap::new();
    walk(root, root, &mut out);
    out
}
