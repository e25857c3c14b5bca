//! Topic share vs document covariate correlations.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::AnalysisError;

pub const MIN_PAIRS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationMethod {
    #[default]
    Pearson,
    Spearman,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub r: Option<f64>,
    pub p_value: Option<f64>,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

/// K×C matrix: `cells[topic][covariate]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub method: CorrelationMethod,
    pub topics: Vec<String>,
    pub covariates: Vec<String>,
    pub cells: Vec<Vec<CorrelationCell>>,
}

fn pearson_r(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// 1-based ranks, ties get the average rank.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(a.cmp(&b)));
    let mut ranks = vec![0.0; x.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

/// Two-sided p-value for a correlation coefficient with `n` pairs.
pub fn correlation_p_value(r: f64, n: usize) -> Option<f64> {
    if n < MIN_PAIRS {
        return None;
    }
    let df = (n - 2) as f64;
    if r.abs() >= 1.0 {
        return Some(0.0);
    }
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).ok()?;
    Some((2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
}

pub fn correlate(x: &[f64], y: &[f64], method: CorrelationMethod) -> CorrelationCell {
    let n = x.len();
    let r = match method {
        CorrelationMethod::Pearson => pearson_r(x, y),
        CorrelationMethod::Spearman => pearson_r(&average_ranks(x), &average_ranks(y)),
    };
    match r {
        Some(r) => CorrelationCell {
            r: Some(r),
            p_value: correlation_p_value(r, n),
            n,
            reason: None,
        },
        None => CorrelationCell {
            r: None,
            p_value: None,
            n,
            reason: Some("zero variance".into()),
        },
    }
}

/// Correlate each θ column with each covariate; rows with a missing covariate
/// value are dropped per cell.
pub fn correlation_matrix(
    thetas: &[Vec<f64>],
    topic_labels: &[String],
    covariates: &BTreeMap<String, Vec<Option<f64>>>,
    method: CorrelationMethod,
) -> Result<CorrelationMatrix, AnalysisError> {
    let k = topic_labels.len();
    for (name, values) in covariates {
        if values.len() != thetas.len() {
            return Err(AnalysisError::InvalidInput(format!(
                "covariate '{name}' has {} values for {} documents",
                values.len(),
                thetas.len()
            )));
        }
    }
    let mut cells = Vec::with_capacity(k);
    for t in 0..k {
        let mut row = Vec::with_capacity(covariates.len());
        for (name, values) in covariates {
            let (x, y): (Vec<f64>, Vec<f64>) = thetas
                .iter()
                .zip(values)
                .filter_map(|(theta, v)| v.map(|v| (theta[t], v)))
                .unzip();
            if x.len() < MIN_PAIRS {
                return Err(AnalysisError::InsufficientPairs {
                    topic: topic_labels[t].clone(),
                    covariate: name.clone(),
                    n: x.len(),
                });
            }
            row.push(correlate(&x, &y, method));
        }
        cells.push(row);
    }
    Ok(CorrelationMatrix {
        method,
        topics: topic_labels.to_vec(),
        covariates: covariates.keys().cloned().collect(),
        cells,
    })
}
