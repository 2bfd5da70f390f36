//! DBSCAN over gaze directions with great-circle distance.

use crate::analytics::AnalyticsError;
use crate::geometry::{spherical_distance, SphericalCoord};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClusterConfig {
    pub eps_deg: f64,
    /// Neighbourhood size (the point itself included) that makes a core point.
    pub min_pts: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        Self {
            eps_deg: 10.0,
            min_pts: 3,
        }
    }
}

impl ClusterConfig {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        if !(self.eps_deg.is_finite() && self.eps_deg > 0.0) {
            return Err(AnalyticsError::Config(format!(
                "eps_deg {} must be positive",
                self.eps_deg
            )));
        }
        if self.min_pts == 0 {
            return Err(AnalyticsError::Config("min_pts must be at least 1".into()));
        }
        Ok(())
    }

    pub fn eps_rad(&self) -> f64 {
        self.eps_deg.to_radians()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    /// Cluster id per input point, `None` for noise.
    pub labels: Vec<Option<usize>>,
    /// Member indices per cluster, ascending.
    pub clusters: Vec<Vec<usize>>,
    pub core: Vec<bool>,
}

impl Clustering {
    pub fn noise(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels
            .iter()
            .enumerate()
            .filter_map(|(i, l)| l.is_none().then_some(i))
    }

    /// Cluster with the most members; the lowest id wins ties.
    pub fn largest(&self) -> Option<&[usize]> {
        self.clusters
            .iter()
            .enumerate()
            .max_by(|(ia, a), (ib, b)| a.len().cmp(&b.len()).then(ib.cmp(ia)))
            .map(|(_, c)| c.as_slice())
    }
}

/// Classic DBSCAN. Points are visited in input order and cluster ids follow
/// the order in which their first core point is reached; a border point
/// joins the first cluster that reaches it.
pub fn cluster_fixations(
    points: &[SphericalCoord],
    cfg: &ClusterConfig,
) -> Result<Clustering, AnalyticsError> {
    cfg.validate()?;
    let n = points.len();
    let eps = cfg.eps_rad();
    let neighbourhoods: Vec<Vec<usize>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| spherical_distance(points[i], points[j]) <= eps)
                .collect()
        })
        .collect();
    let core: Vec<bool> = neighbourhoods
        .iter()
        .map(|nb| nb.len() >= cfg.min_pts)
        .collect();
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for start in 0..n {
        if labels[start].is_some() || !core[start] {
            continue;
        }
        let id = clusters.len();
        let mut members = Vec::new();
        let mut stack = vec![start];
        labels[start] = Some(id);
        while let Some(p) = stack.pop() {
            members.push(p);
            if !core[p] {
                continue;
            }
            for &q in &neighbourhoods[p] {
                if labels[q].is_none() {
                    labels[q] = Some(id);
                    stack.push(q);
                }
            }
        }
        members.sort_unstable();
        clusters.push(members);
    }
    Ok(Clustering {
        labels,
        clusters,
        core,
    })
}
