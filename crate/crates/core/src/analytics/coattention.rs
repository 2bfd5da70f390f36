//! Co-attention between two frames' feature grids.
//!
//! With `A` the `n x 2` matrix whose columns are the two flattened grids,
//! the enhanced matrix is `A ⊙ sigmoid(softmax_rows(A Aᵀ) A)`. The `n x n`
//! affinity is never materialised: each output row is computed from one
//! streamed softmax row, so memory stays `O(n)` while time is `O(n^2)`.

use crate::analytics::{AnalyticsError, FeatureGrid};

/// Largest cell count accepted by [`coattention_enhance`].
pub const DEFAULT_MAX_CELLS: usize = 16_384;

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

pub fn coattention_enhance(
    g_t: &FeatureGrid,
    g_tm: &FeatureGrid,
    max_cells: usize,
) -> Result<(FeatureGrid, FeatureGrid), AnalyticsError> {
    g_t.same_shape(g_tm)?;
    let a0 = g_t.values();
    let a1 = g_tm.values();
    let n = a0.len();
    if n > max_cells {
        return Err(AnalyticsError::TooLarge(n, max_cells));
    }
    let mut out0 = Vec::with_capacity(n);
    let mut out1 = Vec::with_capacity(n);
    let mut logits = vec![0.0f64; n];
    for i in 0..n {
        let (ri0, ri1) = (a0[i], a1[i]);
        let mut row_max = f64::NEG_INFINITY;
        for j in 0..n {
            let s = ri0 * a0[j] + ri1 * a1[j];
            logits[j] = s;
            row_max = row_max.max(s);
        }
        let mut z = 0.0;
        let mut m0 = 0.0;
        let mut m1 = 0.0;
        for j in 0..n {
            let e = (logits[j] - row_max).exp();
            z += e;
            m0 += e * a0[j];
            m1 += e * a1[j];
        }
        out0.push(ri0 * sigmoid(m0 / z));
        out1.push(ri1 * sigmoid(m1 / z));
    }
    Ok((
        FeatureGrid::new(g_t.width(), g_t.height(), out0)?,
        FeatureGrid::new(g_t.width(), g_t.height(), out1)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_grids_stay_zero() {
        let z = FeatureGrid::new(3, 2, vec![0.0; 6]).unwrap();
        let (a, b) = coattention_enhance(&z, &z, DEFAULT_MAX_CELLS).unwrap();
        assert_eq!(a, z);
        assert_eq!(b, z);
    }

    #[test]
    fn shape_errors() {
        let a = FeatureGrid::new(3, 2, vec![0.0; 6]).unwrap();
        let b = FeatureGrid::new(2, 3, vec![0.0; 6]).unwrap();
        assert!(matches!(
            coattention_enhance(&a, &b, 100),
            Err(AnalyticsError::ShapeMismatch(..))
        ));
        assert_eq!(
            coattention_enhance(&a, &a, 5),
            Err(AnalyticsError::TooLarge(6, 5))
        );
    }

    #[test]
    fn large_logits_stay_finite() {
        let a = FeatureGrid::new(2, 1, vec![100.0, -100.0]).unwrap();
        let (x, y) = coattention_enhance(&a, &a, 10).unwrap();
        assert!(x.values().iter().chain(y.values()).all(|v| v.is_finite()));
        assert_eq!((x.width(), x.height()), (2, 1));
    }
}
