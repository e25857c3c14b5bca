//! Dissimilarities between discrete distributions. Natural logarithms throughout.

use super::AnalysisError;

const SUM_TOL: f64 = 1e-6;

fn check_pair(p: &[f64], q: &[f64]) -> Result<(), AnalysisError> {
    if p.len() != q.len() {
        return Err(AnalysisError::DimensionMismatch {
            left: p.len(),
            right: q.len(),
        });
    }
    check_distribution(p)?;
    check_distribution(q)
}

pub fn check_distribution(p: &[f64]) -> Result<(), AnalysisError> {
    if p.is_empty() {
        return Err(AnalysisError::NotADistribution("empty vector".into()));
    }
    if let Some(i) = p.iter().position(|&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(AnalysisError::NotADistribution(format!(
            "entry {i} is {} (must be finite and non-negative)",
            p[i]
        )));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > SUM_TOL {
        return Err(AnalysisError::NotADistribution(format!("sums to {sum}")));
    }
    Ok(())
}

/// `(1/√2) · ‖√p − √q‖₂`, in [0, 1].
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64, AnalysisError> {
    check_pair(p, q)?;
    Ok(hellinger_unchecked(p, q))
}

pub(crate) fn hellinger_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let sq: f64 = p
        .iter()
        .zip(q)
        .map(|(a, b)| {
            let d = a.sqrt() - b.sqrt();
            d * d
        })
        .sum();
    (sq.sqrt() / std::f64::consts::SQRT_2).min(1.0)
}

/// KL(p‖q). Terms with `p_i = 0` contribute 0; `q_i = 0` with `p_i > 0` is an error.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64, AnalysisError> {
    check_pair(p, q)?;
    if let Some(i) = p.iter().zip(q).position(|(&a, &b)| a > 0.0 && b == 0.0) {
        return Err(AnalysisError::NotADistribution(format!(
            "q[{i}] = 0 where p[{i}] > 0; KL is infinite"
        )));
    }
    Ok(kl_unchecked(p, q))
}

fn kl_unchecked(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(&a, _)| a > 0.0)
        .map(|(&a, &b)| a * (a / b).ln())
        .sum()
}

/// `½ KL(p‖m) + ½ KL(q‖m)` with `m = (p + q) / 2`, in [0, ln 2].
pub fn jensen_shannon(p: &[f64], q: &[f64]) -> Result<f64, AnalysisError> {
    check_pair(p, q)?;
    Ok(jensen_shannon_unchecked(p, q))
}

pub(crate) fn jensen_shannon_unchecked(p: &[f64], q: &[f64]) -> f64 {
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let js = 0.5 * kl_unchecked(p, &m) + 0.5 * kl_unchecked(q, &m);
    js.clamp(0.0, std::f64::consts::LN_2)
}
