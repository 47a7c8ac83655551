//! Limit estimation for sequences indexed by a vanishing parameter.

use serde::Serialize;

/// Diagnostics of a sequence `s_k` computed along a schedule `h_k → 0`.
#[derive(Clone, Debug, Serialize)]
pub struct LimitEstimate {
    pub last: f64,
    /// Richardson extrapolation assuming an error linear in `h`.
    pub extrapolated: f64,
    /// `|Δ_K| / |Δ_{K−1}|` for the last two increments.
    pub increment_ratio: f64,
    /// Least-squares slope of `s` against `log(1/h)` over the last three points.
    pub slope: f64,
    pub diverges: bool,
}

pub fn richardson(prev: f64, last: f64, ratio: f64) -> f64 {
    (ratio * last - prev) / (ratio - 1.0)
}

/// Estimate the limit of `values` along the strictly decreasing `params`.
///
/// The sequence is flagged divergent when its last increment is upward, above
/// `floor·(1 + |s_K|)`, and fails to contract: `|Δ_K| > ratio_threshold·|Δ_{K−1}|`.
pub fn estimate(params: &[f64], values: &[f64], ratio_threshold: f64, floor: f64) -> LimitEstimate {
    let n = values.len();
    assert!(n >= 1 && params.len() == n, "estimate: need matching non-empty sequences");
    let last = values[n - 1];
    if n < 3 {
        return LimitEstimate { last, extrapolated: last, increment_ratio: 0.0, slope: 0.0, diverges: false };
    }
    let d1 = values[n - 1] - values[n - 2];
    let d0 = values[n - 2] - values[n - 3];
    let increment_ratio = if d0 == 0.0 {
        if d1 == 0.0 { 0.0 } else { f64::INFINITY }
    } else {
        (d1 / d0).abs()
    };
    let r = params[n - 2] / params[n - 1];
    let extrapolated = richardson(values[n - 2], last, r);

    let xs: Vec<f64> = params[n - 3..].iter().map(|h| -h.ln()).collect();
    let ys = &values[n - 3..];
    let mx = xs.iter().sum::<f64>() / 3.0;
    let my = ys.iter().sum::<f64>() / 3.0;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };

    let diverges = d1 > floor * (1.0 + last.abs()) && increment_ratio > ratio_threshold;
    LimitEstimate { last, extrapolated, increment_ratio, slope, diverges }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_error_is_extrapolated_away() {
        let h: Vec<f64> = (0..5).map(|k| 10f64.powi(-2 - k)).collect();
        let v: Vec<f64> = h.iter().map(|e| 0.5 + 3.0 * e).collect();
        let est = estimate(&h, &v, 0.5, 1e-10);
        assert!((est.extrapolated - 0.5).abs() < 1e-14);
        assert!(!est.diverges);
    }

    #[test]
    fn logarithmic_growth_is_divergent() {
        let h: Vec<f64> = (0..7).map(|k| 10f64.powi(-2 - k)).collect();
        let v: Vec<f64> = h.iter().map(|e| -0.7 * e.ln()).collect();
        let est = estimate(&h, &v, 0.5, 1e-10);
        assert!(est.diverges);
        assert!((est.slope - 0.7).abs() < 1e-12);
    }
}
