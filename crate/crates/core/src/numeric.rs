//! Small numeric helpers: compensated summation, least-squares line fits,
//! finite differences on nonuniform grids.

use crate::error::{EdgeflowError, Result};

/// Kahan compensated summation. Order of `add` calls is fixed by the caller,
/// so reductions are bitwise reproducible.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.sum
    }
}

pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = KahanSum::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

/// Least-squares line fit `y = slope * x + intercept`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub residual_rms: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() {
        return Err(EdgeflowError::Fit(format!(
            "mismatched sample lengths {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 2 {
        return Err(EdgeflowError::Fit(format!(
            "need at least 2 samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = kahan_sum(xs.iter().copied()) / nf;
    let my = kahan_sum(ys.iter().copied()) / nf;
    let sxx = kahan_sum(xs.iter().map(|&x| (x - mx) * (x - mx)));
    let sxy = kahan_sum(xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)));
    let syy = kahan_sum(ys.iter().map(|&y| (y - my) * (y - my)));
    if sxx <= 0.0 {
        return Err(EdgeflowError::Fit("degenerate fit: zero x-variance".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = kahan_sum(
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| (y - slope * x - intercept).powi(2)),
    );
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        r2,
        residual_rms: (ss_res / nf).sqrt(),
    })
}

/// First derivative on a nonuniform grid by the 3-point stencil,
/// one-sided at the ends. Exact for quadratics.
pub fn derivative_nonuniform(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    assert_eq!(n, values.len());
    assert!(n >= 3, "need at least 3 nodes for derivatives");
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (i0, i1, i2) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (x0, x1, x2) = (nodes[i0], nodes[i1], nodes[i2]);
        let (y0, y1, y2) = (values[i0], values[i1], values[i2]);
        let x = nodes[i];
        // derivative of the Lagrange quadratic through the three points,
        // written in difference form so constants differentiate to exact zero
        let c0 = (2.0 * x - x1 - x2) / ((x0 - x1) * (x0 - x2));
        let c2 = (2.0 * x - x0 - x1) / ((x2 - x0) * (x2 - x1));
        out[i] = c0 * (y0 - y1) + c2 * (y2 - y1);
    }
    out
}

/// Second derivative on a nonuniform grid via the Lagrange quadratic.
pub fn second_derivative_nonuniform(nodes: &[f64], values: &[f64]) -> Vec<f64> {
    let n = nodes.len();
    assert_eq!(n, values.len());
    assert!(n >= 3, "need at least 3 nodes for second derivatives");
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (i0, i1, i2) = if i == 0 {
            (0, 1, 2)
        } else if i == n - 1 {
            (n - 3, n - 2, n - 1)
        } else {
            (i - 1, i, i + 1)
        };
        let (x0, x1, x2) = (nodes[i0], nodes[i1], nodes[i2]);
        let (y0, y1, y2) = (values[i0], values[i1], values[i2]);
        let k0 = 2.0 / ((x0 - x1) * (x0 - x2));
        let k2 = 2.0 / ((x2 - x0) * (x2 - x1));
        out[i] = k0 * (y0 - y1) + k2 * (y2 - y1);
    }
    out
}
