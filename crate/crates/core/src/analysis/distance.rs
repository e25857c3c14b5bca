use serde::{Deserialize, Serialize};

use super::divergence::{check_distribution, hellinger_unchecked, jensen_shannon_unchecked};
use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    #[default]
    Jsd,
    Hellinger,
}

impl Metric {
    pub fn eval(self, p: &[f64], q: &[f64]) -> f64 {
        match self {
            Metric::Jsd => jensen_shannon_unchecked(p, q),
            Metric::Hellinger => hellinger_unchecked(p, q),
        }
    }
}

/// Symmetric pairwise dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub metric: Metric,
    pub ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// A matrix from raw values (e.g. Euclidean distances) for the clustering
    /// and mapping routines; checks shape, symmetry and the zero diagonal.
    pub fn from_values(metric: Metric, ids: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self, AnalysisError> {
        let n = values.len();
        if ids.len() != n {
            return Err(AnalysisError::InvalidInput(format!("{} ids for {n} rows", ids.len())));
        }
        for (i, row) in values.iter().enumerate() {
            if row.len() != n {
                return Err(AnalysisError::InvalidInput(format!("row {i} has length {}", row.len())));
            }
            if row[i] != 0.0 {
                return Err(AnalysisError::InvalidInput(format!("diagonal entry {i} is not zero")));
            }
            for (j, &v) in row.iter().enumerate() {
                if !(v >= 0.0) || !v.is_finite() || (v - values[j][i]).abs() > 1e-12 {
                    return Err(AnalysisError::InvalidInput(format!(
                        "entry ({i}, {j}) is negative, non-finite or asymmetric"
                    )));
                }
            }
        }
        Ok(Self { metric, ids, values })
    }

    /// Row/column subset in the given order.
    pub fn subset(&self, indices: &[usize]) -> DistanceMatrix {
        DistanceMatrix {
            metric: self.metric,
            ids: indices.iter().map(|&i| self.ids[i].clone()).collect(),
            values: indices
                .iter()
                .map(|&i| indices.iter().map(|&j| self.values[i][j]).collect())
                .collect(),
        }
    }
}

pub fn distance_matrix(thetas: &[Vec<f64>], ids: &[String], metric: Metric) -> Result<DistanceMatrix, AnalysisError> {
    let n = thetas.len();
    if n < 2 {
        return Err(AnalysisError::InvalidInput(format!("need at least 2 rows, got {n}")));
    }
    if ids.len() != n {
        return Err(AnalysisError::InvalidInput(format!("{} ids for {n} rows", ids.len())));
    }
    let k = thetas[0].len();
    for (i, row) in thetas.iter().enumerate() {
        if row.len() != k {
            return Err(AnalysisError::AtRow {
                row: i,
                source: Box::new(AnalysisError::DimensionMismatch {
                    left: k,
                    right: row.len(),
                }),
            });
        }
        check_distribution(row).map_err(|e| AnalysisError::AtRow {
            row: i,
            source: Box::new(e),
        })?;
    }
    let mut values = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = metric.eval(&thetas[i], &thetas[j]);
            values[i][j] = d;
            values[j][i] = d;
        }
    }
    Ok(DistanceMatrix {
        metric,
        ids: ids.to_vec(),
        values,
    })
}
