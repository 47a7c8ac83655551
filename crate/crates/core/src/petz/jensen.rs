use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::linalg::matrix::{self, c64, CMatrix};
use crate::linalg::HermitianOperator;
use crate::{Error, Result};

/// Scalar instances of the contractive Jensen step that fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Figure {
    /// `(αxα + ξ)^{-1}` against `α(x + ξ)^{-1}α`.
    JensenInverse,
    /// `−log(αxα)` against `−α log(x) α`.
    JensenLog,
}

impl std::str::FromStr for Figure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "jensen-inverse" => Ok(Figure::JensenInverse),
            "jensen-log" => Ok(Figure::JensenLog),
            other => Err(Error::InvalidArgument(format!("unknown figure `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FigureRow {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs > rhs`: the claimed inequality `lhs ≤ rhs` fails here.
    pub violation: bool,
}

/// `x_k = 0.05·k`, `k = 1..=100`.
pub fn default_grid() -> Vec<f64> {
    (1..=100).map(|k| 0.05 * k as f64).collect()
}

pub fn flawed_step_counterexample(which: Figure, alpha: f64, xi: f64, grid: &[f64]) -> Result<Vec<FigureRow>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!("α must lie in (0, 1], got {alpha}")));
    }
    if which == Figure::JensenInverse && !(xi > 0.0) {
        return Err(Error::InvalidArgument(format!("ξ must be positive, got {xi}")));
    }
    if grid.is_empty() {
        return Err(Error::InvalidArgument("grid is empty".into()));
    }
    grid.iter()
        .map(|&x| {
            let (lhs, rhs) = match which {
                Figure::JensenInverse => {
                    if !(x >= 0.0) {
                        return Err(Error::InvalidArgument(format!("grid point {x} is negative")));
                    }
                    (1.0 / (alpha * x * alpha + xi), alpha * alpha / (x + xi))
                }
                Figure::JensenLog => {
                    if !(x > 0.0) {
                        return Err(Error::InvalidArgument(format!("grid point {x} is not positive")));
                    }
                    (-(alpha * x * alpha).ln(), -alpha * x.ln() * alpha)
                }
            };
            Ok(FigureRow { x, lhs, rhs, violation: lhs > rhs })
        })
        .collect()
}

pub fn rows_to_csv(rows: &[FigureRow]) -> String {
    let mut out = String::from("x,lhs,rhs,violation\n");
    for r in rows {
        writeln!(out, "{},{},{},{}", r.x, r.lhs, r.rhs, r.violation).expect("string write");
    }
    out
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let step = pn / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// `−log A = ∫_0^∞ ((A + ξ)^{-1} − (1 + ξ)^{-1}) dξ` by composite Gauss–Legendre
/// in `u = log ξ` over `[-u_max, u_max]`.
pub fn neg_log_by_quadrature(a: &HermitianOperator, panels: usize, order: usize) -> Result<HermitianOperator> {
    let spec = a.eig()?;
    if spec.min_eigenvalue() <= 0.0 {
        return Err(Error::Singular("−log quadrature needs a positive-definite operator".into()));
    }
    let u_max = 40.0 + spec.max_eigenvalue().ln().abs().max(spec.min_eigenvalue().ln().abs());
    let (nodes, weights) = gauss_legendre(order);
    let h = 2.0 * u_max / panels as f64;
    let mut acc = vec![0.0; spec.dim()];
    for p in 0..panels {
        let mid = -u_max + (p as f64 + 0.5) * h;
        for (t, w) in nodes.iter().zip(&weights) {
            let xi = (mid + 0.5 * h * t).exp();
            for (s, &l) in acc.iter_mut().zip(&spec.eigenvalues) {
                *s += 0.5 * h * w * xi * (1.0 / (l + xi) - 1.0 / (1.0 + xi));
            }
        }
    }
    Ok(HermitianOperator::from_raw(spec.recompose_with(&acc)))
}

/// Scalar specialization of [`neg_log_by_quadrature`].
pub fn neg_log_scalar(x: f64) -> Result<f64> {
    let m: CMatrix = matrix::identity(1) * c64(x, 0.0);
    Ok(neg_log_by_quadrature(&HermitianOperator::from_raw(m), 32, 20)?.matrix()[(0, 0)].re)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_counterexample_at_figure_parameters() {
        let rows = flawed_step_counterexample(Figure::JensenInverse, 0.5, 0.5, &[1.0]).unwrap();
        assert!((rows[0].lhs - 4.0 / 3.0).abs() < 1e-15);
        assert!((rows[0].rhs - 1.0 / 6.0).abs() < 1e-15);
        assert!(rows[0].violation);
        let rows = flawed_step_counterexample(Figure::JensenInverse, 0.5, 0.5, &default_grid()).unwrap();
        assert!(rows.iter().all(|r| r.violation));
    }

    #[test]
    fn isometry_limit_is_equality() {
        let rows = flawed_step_counterexample(Figure::JensenInverse, 1.0, 0.3, &default_grid()).unwrap();
        assert!(rows.iter().all(|r| r.lhs == r.rhs && !r.violation));
    }

    #[test]
    fn log_counterexample() {
        let rows = flawed_step_counterexample(Figure::JensenLog, 0.5, 0.5, &[1.0]).unwrap();
        assert!((rows[0].lhs - 4f64.ln()).abs() < 1e-15);
        assert_eq!(rows[0].rhs, 0.0);
        let rows = flawed_step_counterexample(Figure::JensenLog, 0.5, 0.5, &default_grid()).unwrap();
        assert!(rows.iter().all(|r| r.violation));
        // the log counterexample crosses over at x = 4^{4/3}
        let far = flawed_step_counterexample(Figure::JensenLog, 0.5, 0.5, &[7.0]).unwrap();
        assert!(!far[0].violation);
    }

    #[test]
    fn parameter_validation() {
        assert!(flawed_step_counterexample(Figure::JensenInverse, 0.0, 0.5, &[1.0]).is_err());
        assert!(flawed_step_counterexample(Figure::JensenInverse, 0.5, 0.0, &[1.0]).is_err());
        assert!(flawed_step_counterexample(Figure::JensenInverse, 0.5, 0.5, &[]).is_err());
        assert!(flawed_step_counterexample(Figure::JensenLog, 0.5, 0.5, &[0.0]).is_err());
    }

    #[test]
    fn csv_columns() {
        let rows = flawed_step_counterexample(Figure::JensenInverse, 0.5, 0.5, &[1.0]).unwrap();
        let csv = rows_to_csv(&rows);
        assert!(csv.starts_with("x,lhs,rhs,violation\n1,"));
        assert!(csv.trim_end().ends_with("true"));
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(5);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(8)).sum();
        assert!((s - 2.0 / 9.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn integral_identity_recovers_neg_log() {
        for x in [0.01, 0.5, 1.0, 3.0, 100.0] {
            assert!((neg_log_scalar(x).unwrap() + f64::ln(x)).abs() < 1e-10, "x = {x}");
        }
        let a = crate::rng::random_hermitian_with_spectrum(&mut crate::rng::stream(1, 0), 3, 0.1, 2.0);
        let q = neg_log_by_quadrature(&a, 32, 20).unwrap();
        let d = crate::linalg::matrix_function(&a, |x| -x.ln(), crate::linalg::Domain::POSITIVE).unwrap();
        assert!((q.matrix() - d.matrix()).norm() < 1e-10);
    }
}
