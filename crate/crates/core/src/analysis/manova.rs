//! One-way MANOVA on topic distributions grouped by cluster label.
//!
//! The last topic coordinate is dropped (rows of θ sum to one, so the full
//! vectors live in a (K−1)-dimensional affine subspace). Wilks' Λ with Rao's F
//! approximation is reported when the within-group SSCP matrix is well
//! conditioned; otherwise Pillai's trace on the range of the total SSCP.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::cluster::NOISE;
use super::AnalysisError;

pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fallback {
    None,
    Pillai,
    /// No variation at all in the reduced coordinates; no statistic is defined.
    Undefined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManovaReport {
    pub wilks_lambda: Option<f64>,
    pub pillai_trace: Option<f64>,
    pub f_stat: Option<f64>,
    pub df1: Option<f64>,
    pub df2: Option<f64>,
    pub p_value: Option<f64>,
    pub fallback_used: Fallback,
    pub n: usize,
    pub groups: usize,
    pub dims: usize,
}

/// Between-group (B) and within-group (W) SSCP matrices.
pub struct Sscp {
    pub between: DMatrix<f64>,
    pub within: DMatrix<f64>,
    pub n: usize,
    pub groups: usize,
}

pub fn reduced_sscp(thetas: &[Vec<f64>], labels: &[i64]) -> Result<Sscp, AnalysisError> {
    if thetas.len() != labels.len() {
        return Err(AnalysisError::InvalidInput(format!(
            "{} rows but {} labels",
            thetas.len(),
            labels.len()
        )));
    }
    let mut groups: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        if l != NOISE {
            groups.entry(l).or_default().push(i);
        }
    }
    if groups.len() < 2 {
        return Err(AnalysisError::TooFewGroups(groups.len()));
    }
    if let Some((&label, members)) = groups.iter().find(|(_, m)| m.len() < 2) {
        return Err(AnalysisError::GroupTooSmall {
            label,
            size: members.len(),
        });
    }
    let k = thetas[0].len();
    let p = k.saturating_sub(1);
    let row = |i: usize| DVector::from_iterator(p, thetas[i][..p].iter().copied());

    let members: Vec<usize> = groups.values().flatten().copied().collect();
    let n = members.len();
    let mut grand = DVector::zeros(p);
    for &i in &members {
        grand += row(i);
    }
    grand /= n as f64;

    let mut between = DMatrix::zeros(p, p);
    let mut within = DMatrix::zeros(p, p);
    for idx in groups.values() {
        let mut mean = DVector::zeros(p);
        for &i in idx {
            mean += row(i);
        }
        mean /= idx.len() as f64;
        let diff = &mean - &grand;
        between += idx.len() as f64 * &diff * diff.transpose();
        for &i in idx {
            let d = row(i) - &mean;
            within += &d * d.transpose();
        }
    }
    Ok(Sscp {
        between,
        within,
        n,
        groups: groups.len(),
    })
}

fn f_upper_tail(f: f64, df1: f64, df2: f64) -> Option<f64> {
    if !(df1 > 0.0 && df2 > 0.0) || f.is_nan() {
        return None;
    }
    if f <= 0.0 {
        return Some(1.0);
    }
    if f.is_infinite() {
        return Some(0.0);
    }
    let dist = FisherSnedecor::new(df1, df2).ok()?;
    Some(dist.sf(f).clamp(0.0, 1.0))
}

/// Rao's F approximation for Wilks' Λ with `p` variables, `df_h` hypothesis
/// and `df_e` error degrees of freedom. Returns (F, df1, df2).
pub fn rao_f(lambda: f64, p: f64, df_h: f64, df_e: f64) -> (f64, f64, f64) {
    let denom = p * p + df_h * df_h - 5.0;
    let t = if denom > 0.0 {
        ((p * p * df_h * df_h - 4.0) / denom).sqrt()
    } else {
        1.0
    };
    let w = df_e + df_h - (p + df_h + 1.0) / 2.0;
    let df1 = p * df_h;
    let df2 = w * t - (p * df_h - 2.0) / 2.0;
    let root = lambda.powf(1.0 / t);
    let f = (1.0 - root) / root * df2 / df1;
    (f, df1, df2)
}

pub fn manova(thetas: &[Vec<f64>], labels: &[i64]) -> Result<ManovaReport, AnalysisError> {
    let sscp = reduced_sscp(thetas, labels)?;
    let p = sscp.within.nrows();
    let df_h = (sscp.groups - 1) as f64;
    let df_e = (sscp.n - sscp.groups) as f64;
    let mut report = ManovaReport {
        wilks_lambda: None,
        pillai_trace: None,
        f_stat: None,
        df1: None,
        df2: None,
        p_value: None,
        fallback_used: Fallback::Undefined,
        n: sscp.n,
        groups: sscp.groups,
        dims: p,
    };
    if p == 0 {
        return Ok(report);
    }

    let within_eigen = SymmetricEigen::new(sscp.within.clone()).eigenvalues;
    let w_max = within_eigen.max();
    let w_min = within_eigen.min();
    let well_conditioned = w_min > 0.0 && w_max / w_min <= MAX_CONDITION;

    let total = &sscp.between + &sscp.within;
    if well_conditioned {
        let lambda = (sscp.within.determinant() / total.determinant()).clamp(f64::MIN_POSITIVE, 1.0);
        let (f, df1, df2) = rao_f(lambda, p as f64, df_h, df_e);
        report.wilks_lambda = Some(lambda);
        report.f_stat = Some(f.max(0.0));
        report.df1 = Some(df1);
        report.df2 = Some(df2);
        report.p_value = f_upper_tail(f.max(0.0), df1, df2);
        report.fallback_used = Fallback::None;
        return Ok(report);
    }

    // Pillai's trace tr(B T⁺) on the range of T = B + W.
    let eig = SymmetricEigen::new(total);
    let t_max = eig.eigenvalues.max();
    if !(t_max > 0.0) {
        return Ok(report);
    }
    let cutoff = t_max / MAX_CONDITION;
    let mut pinv = DMatrix::zeros(p, p);
    let mut rank = 0usize;
    for (i, &ev) in eig.eigenvalues.iter().enumerate() {
        if ev > cutoff {
            let v = eig.eigenvectors.column(i);
            pinv += (1.0 / ev) * v * v.transpose();
            rank += 1;
        }
    }
    let pillai = (&sscp.between * &pinv).trace().max(0.0);
    let r = rank as f64;
    let s = r.min(df_h);
    let m = ((r - df_h).abs() - 1.0) / 2.0;
    let nn = (df_e - r - 1.0) / 2.0;
    report.pillai_trace = Some(pillai);
    report.fallback_used = Fallback::Pillai;
    if pillai < s - 1e-12 {
        let df1 = s * (2.0 * m + s + 1.0);
        let df2 = s * (2.0 * nn + s + 1.0);
        let f = (2.0 * nn + s + 1.0) / (2.0 * m + s + 1.0) * pillai / (s - pillai);
        if df2 > 0.0 {
            report.f_stat = Some(f);
            report.df1 = Some(df1);
            report.df2 = Some(df2);
            report.p_value = f_upper_tail(f, df1, df2);
        }
    }
    Ok(report)
}
