//! Graded radial grids on `(0, x_max]` with quadrature weights for the
//! cone measure `s^f ds`.
//!
//! Node `i` sits at `x_max (i/n)^p` for `i = 1..=n`. Weights come from the
//! product-trapezoid rule: on each cell the integrand's smooth factor is
//! interpolated linearly while the `s^f` moments are integrated exactly, so
//! constants are integrated exactly and the rule stays second order despite
//! the fractional powers fields carry near `s = 0`.

use crate::error::{EdgeflowError, Result};
use crate::numeric::KahanSum;

#[derive(Debug, Clone)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    x_max: f64,
    grading: f64,
    fibre_dim: u32,
}

impl RadialGrid {
    pub fn graded(n: usize, x_max: f64, grading: f64, fibre_dim: u32) -> Result<Self> {
        if n < 8 {
            return Err(EdgeflowError::Domain(format!(
                "grid needs at least 8 nodes, got {n}"
            )));
        }
        if !(x_max > 0.0) {
            return Err(EdgeflowError::Domain(format!("x_max must be > 0, got {x_max}")));
        }
        if !(grading >= 1.0) {
            return Err(EdgeflowError::Domain(format!(
                "grading exponent must be >= 1, got {grading}"
            )));
        }
        if fibre_dim == 0 {
            return Err(EdgeflowError::Domain("fibre dimension must be >= 1".into()));
        }
        let nodes: Vec<f64> = (1..=n)
            .map(|i| x_max * (i as f64 / n as f64).powf(grading))
            .collect();
        let weights = product_trapezoid_weights(&nodes, fibre_dim);
        let grid = Self {
            nodes,
            weights,
            x_max,
            grading,
            fibre_dim,
        };
        let total: f64 = grid.weights.iter().sum();
        let exact = x_max.powi(fibre_dim as i32 + 1) / (fibre_dim as f64 + 1.0);
        if ((total - exact) / exact).abs() > 1e-6 {
            return Err(EdgeflowError::Numeric(format!(
                "quadrature weights sum {total} deviates from integral of s^f = {exact}"
            )));
        }
        Ok(grid)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn grading(&self) -> f64 {
        self.grading
    }

    pub fn fibre_dim(&self) -> u32 {
        self.fibre_dim
    }

    pub fn max_spacing(&self) -> f64 {
        let mut h = self.nodes[0];
        for w in self.nodes.windows(2) {
            h = h.max(w[1] - w[0]);
        }
        h
    }

    /// `int_0^{x_max} field(s) s^f ds` by the grid weights.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        debug_assert_eq!(field.len(), self.len());
        let mut acc = KahanSum::new();
        for (v, w) in field.iter().zip(&self.weights) {
            acc.add(v * w);
        }
        acc.total()
    }

    /// Discrete `L^2(s^f ds)` inner product.
    pub fn inner_product(&self, a: &[f64], b: &[f64]) -> f64 {
        debug_assert_eq!(a.len(), self.len());
        debug_assert_eq!(b.len(), self.len());
        let mut acc = KahanSum::new();
        for i in 0..self.len() {
            acc.add(a[i] * b[i] * self.weights[i]);
        }
        acc.total()
    }

    pub fn norm(&self, a: &[f64]) -> f64 {
        self.inner_product(a, a).max(0.0).sqrt()
    }

    /// 4-point Lagrange interpolation of node values at `x` (clamped to the
    /// grid range; 2- or 3-point near the ends).
    pub fn interp_cubic(&self, values: &[f64], x: f64) -> f64 {
        interp_cubic_on(&self.nodes, values, x)
    }
}

pub(crate) fn interp_cubic_on(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    debug_assert_eq!(nodes.len(), values.len());
    let n = nodes.len();
    let j = match nodes.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(j) => return values[j],
        Err(j) => j,
    };
    // stencil of up to 4 nodes around the insertion point
    let lo = j.saturating_sub(2).min(n.saturating_sub(4));
    let hi = (lo + 4).min(n);
    let xs = &nodes[lo..hi];
    let ys = &values[lo..hi];
    let mut out = 0.0;
    for (i, &xi) in xs.iter().enumerate() {
        let mut l = 1.0;
        for (k, &xk) in xs.iter().enumerate() {
            if k != i {
                l *= (x - xk) / (xi - xk);
            }
        }
        out += ys[i] * l;
    }
    out
}

/// Per-node weights such that `sum_j w_j phi(s_j)` approximates
/// `int_0^{x_max} phi(s) s^f ds`, with the `s^f` moments of each cell exact.
/// The first cell `[0, s_1]` uses constant extension of `phi`.
fn product_trapezoid_weights(nodes: &[f64], fibre_dim: u32) -> Vec<f64> {
    let n = nodes.len();
    let f = fibre_dim as i32;
    let mut w = vec![0.0; n];
    let mut prev = 0.0_f64;
    for j in 0..n {
        let a: f64 = prev;
        let b = nodes[j];
        let m0 = (b.powi(f + 1) - a.powi(f + 1)) / (f as f64 + 1.0);
        let m1 = (b.powi(f + 2) - a.powi(f + 2)) / (f as f64 + 2.0);
        if j == 0 {
            w[0] += m0;
        } else {
            let dx = b - a;
            w[j - 1] += (b * m0 - m1) / dx;
            w[j] += (m1 - a * m0) / dx;
        }
        prev = b;
    }
    w
}
