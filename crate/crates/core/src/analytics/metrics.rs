//! Saliency metrics: Judd AUC, similarity, Pearson correlation and
//! normalised scanpath saliency.
//!
//! Fixations are given as `(x, y)` cell indices of the prediction grid.
//! A constant prediction scores 0 on CC and NSS.

use serde::Serialize;

use crate::analytics::{AnalyticsError, FixationMap};
use crate::geometry::{sphere_to_erp, SphericalCoord};

/// Cell containing a direction on a `width x height` grid.
pub fn fixation_cell(p: SphericalCoord, width: u32, height: u32) -> (u32, u32) {
    let e = sphere_to_erp(p, width, height);
    let x = ((e.x + 0.5).floor() as i64).rem_euclid(i64::from(width)) as u32;
    let y = ((e.y + 0.5).floor() as i64).clamp(0, i64::from(height) - 1) as u32;
    (x, y)
}

fn check_fixations(pred: &FixationMap, fixations: &[(u32, u32)]) -> Result<(), AnalyticsError> {
    if fixations.is_empty() {
        return Err(AnalyticsError::EmptyInput);
    }
    if let Some(&(x, y)) = fixations
        .iter()
        .find(|&&(x, y)| x >= pred.width() || y >= pred.height())
    {
        return Err(AnalyticsError::Range(format!(
            "fixation ({x}, {y}) outside the map"
        )));
    }
    Ok(())
}

fn is_constant(v: &[f64]) -> bool {
    v.iter().all(|x| *x == v[0])
}

fn mean_std(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Judd AUC: each fixated value is a threshold; the true positive rate is the
/// share of fixations at or above it and the false positive rate the share of
/// non-fixated cells at or above it.
pub fn metric_auc_judd(
    pred: &FixationMap,
    fixations: &[(u32, u32)],
) -> Result<f64, AnalyticsError> {
    check_fixations(pred, fixations)?;
    let values = pred.values();
    let n_pixels = values.len();
    let mut fix_vals: Vec<f64> = fixations
        .iter()
        .map(|&(x, y)| values[(y * pred.width() + x) as usize])
        .collect();
    fix_vals.sort_by(|a, b| b.total_cmp(a));
    let n_fix = fix_vals.len();
    if n_pixels <= n_fix {
        return Err(AnalyticsError::Range(
            "more fixations than non-fixated cells".into(),
        ));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut tp = vec![0.0];
    let mut fp = vec![0.0];
    for (i, &thresh) in fix_vals.iter().enumerate() {
        let above = sorted.partition_point(|v| *v >= thresh);
        tp.push((i + 1) as f64 / n_fix as f64);
        fp.push((above.saturating_sub(i + 1)) as f64 / (n_pixels - n_fix) as f64);
    }
    tp.push(1.0);
    fp.push(1.0);
    let auc = tp
        .windows(2)
        .zip(fp.windows(2))
        .map(|(t, f)| 0.5 * (t[0] + t[1]) * (f[1] - f[0]))
        .sum::<f64>();
    Ok(auc.clamp(0.0, 1.0))
}

/// Histogram intersection of the two maps after normalising each to sum 1.
pub fn metric_sim(pred: &FixationMap, gt: &FixationMap) -> Result<f64, AnalyticsError> {
    pred.same_shape(gt)?;
    let p = pred.normalized()?;
    let g = gt.normalized()?;
    let s: f64 = p
        .values()
        .iter()
        .zip(g.values())
        .map(|(a, b)| a.min(*b))
        .sum();
    Ok(s.clamp(0.0, 1.0))
}

/// Pearson correlation coefficient.
pub fn metric_cc(pred: &FixationMap, gt: &FixationMap) -> Result<f64, AnalyticsError> {
    pred.same_shape(gt)?;
    if is_constant(pred.values()) || is_constant(gt.values()) {
        return Ok(0.0);
    }
    let (mp, _) = mean_std(pred.values());
    let (mg, _) = mean_std(gt.values());
    let mut cov = 0.0;
    let mut vp = 0.0;
    let mut vg = 0.0;
    for (a, b) in pred.values().iter().zip(gt.values()) {
        let (da, db) = (a - mp, b - mg);
        cov += da * db;
        vp += da * da;
        vg += db * db;
    }
    if vp == 0.0 || vg == 0.0 {
        return Ok(0.0);
    }
    Ok((cov / (vp.sqrt() * vg.sqrt())).clamp(-1.0, 1.0))
}

/// Mean of the z-scored prediction at the fixated cells.
pub fn metric_nss(pred: &FixationMap, fixations: &[(u32, u32)]) -> Result<f64, AnalyticsError> {
    check_fixations(pred, fixations)?;
    let (mean, std) = mean_std(pred.values());
    if is_constant(pred.values()) || std == 0.0 {
        return Ok(0.0);
    }
    let total: f64 = fixations
        .iter()
        .map(|&(x, y)| (pred.get(x, y) - mean) / std)
        .sum();
    Ok(total / fixations.len() as f64)
}

/// One row of a metric table. AUC-J and NSS are absent without fixations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    #[serde(rename = "AUC-J")]
    pub auc_judd: Option<f64>,
    #[serde(rename = "SIM")]
    pub sim: f64,
    #[serde(rename = "CC")]
    pub cc: f64,
    #[serde(rename = "NSS")]
    pub nss: Option<f64>,
}

impl MetricReport {
    pub fn evaluate(
        pred: &FixationMap,
        gt: &FixationMap,
        fixations: Option<&[(u32, u32)]>,
    ) -> Result<Self, AnalyticsError> {
        let fixations = fixations.filter(|f| !f.is_empty());
        Ok(Self {
            auc_judd: fixations.map(|f| metric_auc_judd(pred, f)).transpose()?,
            sim: metric_sim(pred, gt)?,
            cc: metric_cc(pred, gt)?,
            nss: fixations.map(|f| metric_nss(pred, f)).transpose()?,
        })
    }

    /// Per-metric mean over several reports; optional metrics average over
    /// the reports that have them.
    pub fn mean(reports: &[MetricReport]) -> Option<MetricReport> {
        if reports.is_empty() {
            return None;
        }
        let n = reports.len() as f64;
        let opt_mean = |f: fn(&MetricReport) -> Option<f64>| {
            let v: Vec<f64> = reports.iter().filter_map(f).collect();
            (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
        };
        Some(MetricReport {
            auc_judd: opt_mean(|r| r.auc_judd),
            sim: reports.iter().map(|r| r.sim).sum::<f64>() / n,
            cc: reports.iter().map(|r| r.cc).sum::<f64>() / n,
            nss: opt_mean(|r| r.nss),
        })
    }
}
