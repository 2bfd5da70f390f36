//! KL divergence and the fixation-shifting loss.

use crate::analytics::cluster::{cluster_fixations, ClusterConfig};
use crate::analytics::metrics::fixation_cell;
use crate::analytics::spot::{extract_spot, lightup, shift_weight_or_zero, FilterConfig, Spot};
use crate::analytics::{cell_center, AnalyticsError, FixationMap};
use crate::geometry::{spherical_centroid, spherical_distance, SphericalCoord};

/// Floor applied to normalised predictions before taking the log.
pub const KL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossConfig {
    /// Weight of the shift-weight MSE term.
    pub lambda: f64,
    /// Clustering used to find each ground-truth frame's dominant group.
    pub cluster: ClusterConfig,
}

impl Default for LossConfig {
    fn default() -> Self {
        Self {
            lambda: 5.0,
            cluster: ClusterConfig::default(),
        }
    }
}

impl LossConfig {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(AnalyticsError::Config(format!(
                "lambda {} must be non-negative",
                self.lambda
            )));
        }
        self.cluster.validate()
    }
}

/// One ground-truth frame: its fixation map and the fixations behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthFrame {
    pub map: FixationMap,
    pub fixations: Vec<SphericalCoord>,
}

/// `Σ gt · ln(gt / pred)` over normalised maps, with `pred` floored at
/// [`KL_EPS`]. Cells where `gt` is zero contribute nothing.
pub fn kl_divergence(pred: &FixationMap, gt: &FixationMap) -> Result<f64, AnalyticsError> {
    pred.same_shape(gt)?;
    let p = pred.normalized()?;
    let g = gt.normalized()?;
    Ok(p.values()
        .iter()
        .zip(g.values())
        .filter(|(_, &gv)| gv > 0.0)
        .map(|(&pv, &gv)| gv * (gv / pv.max(KL_EPS)).ln())
        .sum())
}

/// Spot of the largest fixation cluster: the map cells within `eps` of any
/// member, plus the cells the members fall in. `None` when every fixation is
/// noise.
pub fn gt_spot(gt: &GroundTruthFrame, cfg: &ClusterConfig) -> Result<Option<Spot>, AnalyticsError> {
    let clustering = cluster_fixations(&gt.fixations, cfg)?;
    let Some(members) = clustering.largest() else {
        return Ok(None);
    };
    let pts: Vec<SphericalCoord> = members.iter().map(|&i| gt.fixations[i]).collect();
    let (w, h) = (gt.map.width(), gt.map.height());
    let eps = cfg.eps_rad();
    let mut cells = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let c = cell_center(x, y, w, h);
            if pts.iter().any(|p| spherical_distance(c, *p) <= eps) {
                cells.push((x, y));
            }
        }
    }
    cells.extend(pts.iter().map(|p| fixation_cell(*p, w, h)));
    let mut spot = Spot::from_cells(cells, w, h, 0.0)?;
    spot.mean_response = spot
        .cells
        .iter()
        .map(|&(x, y)| gt.map.get(x, y))
        .sum::<f64>()
        / spot.cells.len() as f64;
    if let Some(c) = spherical_centroid(pts.iter().copied()) {
        spot.centroid = c;
    }
    Ok(Some(spot))
}

/// Ground truth with its dominant cluster lit up by `omega_star`.
pub fn build_gt_star(
    gt: &GroundTruthFrame,
    omega_star: f64,
    cfg: &ClusterConfig,
) -> Result<FixationMap, AnalyticsError> {
    match gt_spot(gt, cfg)? {
        Some(spot) => FixationMap::from_grid(lightup(gt.map.as_grid(), &spot, omega_star)?),
        None => {
            if !(omega_star.is_finite() && omega_star >= 0.0) {
                return Err(AnalyticsError::Range(format!(
                    "omega {omega_star} must be non-negative"
                )));
            }
            Ok(gt.map.clone())
        }
    }
}

/// `ω*_t` between the ground-truth spots of frames `t` and `t + m`.
pub fn gt_shift_weights(
    gt_seq: &[GroundTruthFrame],
    offset: usize,
    cfg: &ClusterConfig,
) -> Result<Vec<f64>, AnalyticsError> {
    let spots = gt_seq
        .iter()
        .map(|g| gt_spot(g, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pairwise_weights(&spots, offset))
}

/// `ω_t` between the extracted spots of predicted frames `t` and `t + m`.
pub fn pred_shift_weights(
    pred_seq: &[FixationMap],
    offset: usize,
    cfg: &FilterConfig,
) -> Result<Vec<f64>, AnalyticsError> {
    let spots = pred_seq
        .iter()
        .map(|p| extract_spot(p.as_grid(), cfg))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(pairwise_weights(&spots, offset))
}

fn pairwise_weights(spots: &[Option<Spot>], offset: usize) -> Vec<f64> {
    if offset == 0 || spots.len() <= offset {
        return Vec::new();
    }
    (0..spots.len() - offset)
        .map(|t| shift_weight_or_zero(spots[t].as_ref(), spots[t + offset].as_ref()))
        .collect()
}

/// `Σ_t KL(pred_t, GT*_t) + λ Σ_t (ω_t - ω*_t)^2`, where `GT*_t` lights up
/// frame `t`'s dominant cluster by `ω*_t` (frames past the end of
/// `omega_star` use zero).
pub fn shifting_loss(
    pred_seq: &[FixationMap],
    gt_seq: &[GroundTruthFrame],
    omega: &[f64],
    omega_star: &[f64],
    cfg: &LossConfig,
) -> Result<f64, AnalyticsError> {
    cfg.validate()?;
    if pred_seq.len() != gt_seq.len() {
        return Err(AnalyticsError::LengthMismatch(pred_seq.len(), gt_seq.len()));
    }
    if omega.len() != omega_star.len() {
        return Err(AnalyticsError::LengthMismatch(
            omega.len(),
            omega_star.len(),
        ));
    }
    if omega_star.len() > gt_seq.len() {
        return Err(AnalyticsError::LengthMismatch(
            omega_star.len(),
            gt_seq.len(),
        ));
    }
    let mut kl = 0.0;
    for (t, (pred, gt)) in pred_seq.iter().zip(gt_seq).enumerate() {
        let w = omega_star.get(t).copied().unwrap_or(0.0);
        kl += kl_divergence(pred, &build_gt_star(gt, w, &cfg.cluster)?)?;
    }
    let mse: f64 = omega
        .iter()
        .zip(omega_star)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(kl + cfg.lambda * mse)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn map(v: &[f64]) -> FixationMap {
        FixationMap::new(v.len() as u32, 1, v.to_vec()).unwrap()
    }

    #[test]
    fn kl_of_identical_maps_is_zero() {
        let p = map(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
    }

    #[test]
    fn kl_is_asymmetric() {
        let p = map(&[0.2, 0.8]);
        let q = map(&[0.5, 0.5]);
        let pq = 0.2 * (0.2f64 / 0.5).ln() + 0.8 * (0.8f64 / 0.5).ln();
        let qp = 0.5 * (0.5f64 / 0.2).ln() + 0.5 * (0.5f64 / 0.8).ln();
        assert_abs_diff_eq!(kl_divergence(&q, &p).unwrap(), pq, epsilon = 1e-12);
        assert_abs_diff_eq!(kl_divergence(&p, &q).unwrap(), qp, epsilon = 1e-12);
        assert!((pq - qp).abs() > 0.01);
    }

    #[test]
    fn uniform_gt_against_delta_pred() {
        // three gt cells see pred = eps: 3 * 0.25 * ln(0.25 / 1e-12) + 0.25 ln(0.25)
        let pred = map(&[1.0, 0.0, 0.0, 0.0]);
        let gt = map(&[1.0, 1.0, 1.0, 1.0]);
        let expected = 0.75 * (0.25f64 / KL_EPS).ln() + 0.25 * 0.25f64.ln();
        assert_abs_diff_eq!(kl_divergence(&pred, &gt).unwrap(), expected, epsilon = 1e-9);
    }

    #[test]
    fn kl_errors() {
        assert_eq!(
            kl_divergence(&map(&[0.0, 0.0]), &map(&[1.0, 0.0])),
            Err(AnalyticsError::Unnormalizable)
        );
        assert!(kl_divergence(&map(&[1.0]), &map(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn length_mismatch() {
        let gt = GroundTruthFrame {
            map: map(&[1.0, 1.0]),
            fixations: vec![],
        };
        let cfg = LossConfig::default();
        assert!(matches!(
            shifting_loss(
                &[map(&[1.0, 1.0])],
                &[gt.clone(), gt.clone()],
                &[],
                &[],
                &cfg
            ),
            Err(AnalyticsError::LengthMismatch(1, 2))
        ));
        assert!(shifting_loss(&[map(&[1.0, 1.0])], &[gt], &[0.1], &[], &cfg).is_err());
    }
}
