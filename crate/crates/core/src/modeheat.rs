//! Exact per-mode heat kernels of the model operator
//! `l_mu = -d^2/ds^2 - (f/s) d/ds + (mu^2 - ((f-1)/2)^2)/s^2`
//! and their use as propagators on a radial grid.
//!
//! The kernel of the Friedrichs extension is
//! `e^{-t l_mu}(s, s~) = (1/2t) (s s~)^{(1-f)/2} I_mu(s s~ / 2t) e^{-(s^2+s~^2)/4t}`.
//! It is always formed in log space through the scaled Bessel function:
//! `ln K = -ln 2t + (1-f)/2 ln(s s~) + ln(e^{-z} I_mu(z)) - (s - s~)^2 / 4t`
//! with `z = s s~ / 2t`, which is overflow-safe and symmetric by construction.

use crate::error::{EdgeflowError, Result};
use crate::grid::{interp_cubic_on, RadialGrid};
use crate::numeric::KahanSum;
use crate::specfun::bessel_i_ln_scaled;
use crate::numeric;
use rayon::prelude::*;
use serde::Serialize;

/// Indicial order and fibre dimension of one tangential mode.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModeKernelSpec {
    mu: f64,
    fibre_dim: u32,
    /// Generating tangential eigenvalue, when the mode came from a spectrum:
    /// `mu^2 = lambda + ((f-1)/2)^2`.
    eigenvalue: Option<f64>,
}

impl ModeKernelSpec {
    pub fn new(mu: f64, fibre_dim: u32) -> Result<Self> {
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(EdgeflowError::Domain(format!(
                "indicial order mu must be >= 0, got {mu}"
            )));
        }
        if fibre_dim == 0 {
            return Err(EdgeflowError::Domain("fibre dimension must be >= 1".into()));
        }
        Ok(Self {
            mu,
            fibre_dim,
            eigenvalue: None,
        })
    }

    /// Mode from a tangential eigenvalue: `mu = sqrt(lambda + ((f-1)/2)^2)`.
    pub fn from_eigenvalue(lambda: f64, fibre_dim: u32) -> Result<Self> {
        let half = 0.5 * (fibre_dim as f64 - 1.0);
        let disc = lambda + half * half;
        if disc < 0.0 {
            return Err(EdgeflowError::Domain(format!(
                "eigenvalue {lambda} below -((f-1)/2)^2; mode order is complex"
            )));
        }
        Ok(Self {
            mu: disc.sqrt(),
            fibre_dim,
            eigenvalue: Some(lambda),
        })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn fibre_dim(&self) -> u32 {
        self.fibre_dim
    }

    pub fn eigenvalue(&self) -> Option<f64> {
        self.eigenvalue
    }

    /// Index-set element `mu - (f-1)/2`; the boundary exponent of the kernel.
    pub fn indicial_element(&self) -> f64 {
        self.mu - 0.5 * (self.fibre_dim as f64 - 1.0)
    }
}

fn check_kernel_args(t: f64, s: f64, s_tilde: f64) -> Result<()> {
    if !(t > 0.0) {
        return Err(EdgeflowError::Domain(format!("time t must be > 0, got {t}")));
    }
    if !(s > 0.0) || !(s_tilde > 0.0) {
        return Err(EdgeflowError::Domain(format!(
            "radial arguments must be > 0, got s = {s}, s~ = {s_tilde}"
        )));
    }
    Ok(())
}

/// `ln e^{-t l_mu}(s, s~)`. `-inf` (kernel underflow) is a legitimate value.
pub fn mode_heat_kernel_ln(spec: &ModeKernelSpec, t: f64, s: f64, s_tilde: f64) -> Result<f64> {
    check_kernel_args(t, s, s_tilde)?;
    let z = s * s_tilde / (2.0 * t);
    let ln_bessel = bessel_i_ln_scaled(spec.mu, z)?;
    let d = s - s_tilde;
    Ok(-(2.0 * t).ln() + 0.5 * (1.0 - spec.fibre_dim as f64) * (s * s_tilde).ln() + ln_bessel
        - d * d / (4.0 * t))
}

/// The per-mode heat kernel value. Positive for all positive arguments;
/// underflow to `0.0` is a value, never a NaN.
pub fn mode_heat_kernel(spec: &ModeKernelSpec, t: f64, s: f64, s_tilde: f64) -> Result<f64> {
    Ok(mode_heat_kernel_ln(spec, t, s, s_tilde)?.exp())
}

/// How a grid resolves the kernel width `sqrt(2t)`: direct quadrature when
/// at least two nodes fall per width, otherwise quadrature on an auxiliary
/// uniform grid with the field interpolated cubically.
fn resolved_directly(grid: &RadialGrid, t: f64) -> bool {
    grid.max_spacing() <= 0.5 * (2.0 * t).sqrt()
}

const MAX_FINE_NODES: usize = 60_000;

fn fine_grid_for(grid: &RadialGrid, t: f64) -> Result<Vec<f64>> {
    let h = 0.25 * (2.0 * t).sqrt();
    let m = (grid.x_max() / h).ceil() as usize + 1;
    if m > MAX_FINE_NODES {
        return Err(EdgeflowError::Quadrature {
            message: format!(
                "time step {t:.3e} needs {m} auxiliary nodes to resolve the near-delta kernel"
            ),
            recommendation: format!(
                "use t >= {:.3e} or a denser grid",
                2.0 * (grid.x_max() / MAX_FINE_NODES as f64 * 4.0).powi(2)
            ),
        });
    }
    Ok((1..=m)
        .map(|i| grid.x_max() * i as f64 / m as f64)
        .collect())
}

/// `out_i = sum_j K(t, s_i, s_j) field_j w_j`, linear in the field.
pub fn mode_propagate(
    spec: &ModeKernelSpec,
    t: f64,
    grid: &RadialGrid,
    field: &[f64],
) -> Result<Vec<f64>> {
    if field.len() != grid.len() {
        return Err(EdgeflowError::Domain(format!(
            "field length {} does not match grid size {}",
            field.len(),
            grid.len()
        )));
    }
    if field.iter().any(|v| !v.is_finite()) {
        return Err(EdgeflowError::Domain("field contains non-finite values".into()));
    }
    if !(t > 0.0) {
        return Err(EdgeflowError::Domain(format!("time t must be > 0, got {t}")));
    }
    let matrix = propagator_matrix(spec, t, grid)?;
    Ok(apply_matrix(&matrix, field, grid.len()))
}

pub fn apply_matrix(matrix: &[f64], field: &[f64], n: usize) -> Vec<f64> {
    debug_assert_eq!(matrix.len(), n * n);
    debug_assert_eq!(field.len(), n);
    matrix
        .par_chunks(n)
        .map(|row| {
            let mut acc = KahanSum::new();
            for (k, v) in row.iter().zip(field) {
                acc.add(k * v);
            }
            acc.total()
        })
        .collect()
}

/// Dense propagator matrix `P_ij = K(t, s_i, s_j) w_j` (row-major). For
/// under-resolved `t` the rows are assembled on the auxiliary fine grid and
/// composed with cubic interpolation back to the nodes.
pub fn propagator_matrix(spec: &ModeKernelSpec, t: f64, grid: &RadialGrid) -> Result<Vec<f64>> {
    matrix_from_kernel(grid, t, &|s, st| mode_heat_kernel(spec, t, s, st))
}

/// Propagator with an approximate Dirichlet condition at `x_max`, built by
/// subtracting the mirror kernel
/// `M(s, s~) = (s s~)^{-f/2} H_mu(s, 2 x_max - s~)`.
/// The reflection kills the boundary value to leading order in `t`; without
/// it the truncated free kernel leaks mass past `x_max` and decay-rate fits
/// come out systematically below `(j_{mu,1}/x_max)^2`.
pub fn dirichlet_propagator_matrix(
    spec: &ModeKernelSpec,
    t: f64,
    grid: &RadialGrid,
) -> Result<Vec<f64>> {
    let x_max = grid.x_max();
    let f = spec.fibre_dim as f64;
    let mu = spec.mu;
    matrix_from_kernel(grid, t, &move |s: f64, st: f64| {
        let free = mode_heat_kernel(spec, t, s, st)?;
        let sm = 2.0 * x_max - st;
        // ln M = -ln 2t + ln(s sm)/2 - f ln(s st)/2 - (s - sm)^2/4t + ln Ie_mu
        let z = s * sm / (2.0 * t);
        let d = s - sm;
        let ln_m = -(2.0 * t).ln() + 0.5 * (s * sm).ln() - 0.5 * f * (s * st).ln()
            - d * d / (4.0 * t)
            + bessel_i_ln_scaled(mu, z)?;
        Ok(free - ln_m.exp())
    })
}

fn matrix_from_kernel(
    grid: &RadialGrid,
    t: f64,
    kernel: &(dyn Fn(f64, f64) -> Result<f64> + Sync),
) -> Result<Vec<f64>> {
    let n = grid.len();
    let nodes = grid.nodes();
    let fibre_dim = grid.fibre_dim();
    if resolved_directly(grid, t) {
        let weights = grid.weights();
        let rows: Result<Vec<Vec<f64>>> = nodes
            .par_iter()
            .map(|&si| {
                let mut row = Vec::with_capacity(n);
                for j in 0..n {
                    row.push(kernel(si, nodes[j])? * weights[j]);
                }
                Ok(row)
            })
            .collect();
        return Ok(rows?.concat());
    }
    // near-delta regime: quadrature on a fine uniform grid, field values
    // supplied by cubic interpolation from the coarse nodes
    let fine = fine_grid_for(grid, t)?;
    let f = fibre_dim as i32;
    // fine-cell weights for the measure s^f ds, product trapezoid as in RadialGrid
    let mut fw = vec![0.0; fine.len()];
    let mut prev = 0.0_f64;
    for (j, &b) in fine.iter().enumerate() {
        let a: f64 = prev;
        let m0 = (b.powi(f + 1) - a.powi(f + 1)) / (f as f64 + 1.0);
        let m1 = (b.powi(f + 2) - a.powi(f + 2)) / (f as f64 + 2.0);
        if j == 0 {
            fw[0] += m0;
        } else {
            let dx = b - a;
            fw[j - 1] += (b * m0 - m1) / dx;
            fw[j] += (m1 - a * m0) / dx;
        }
        prev = b;
    }
    let rows: Result<Vec<Vec<f64>>> = nodes
        .par_iter()
        .map(|&si| {
            let mut row = vec![0.0; n];
            for (q, &sq) in fine.iter().enumerate() {
                let k = kernel(si, sq)? * fw[q];
                if k == 0.0 {
                    continue;
                }
                // scatter through the cubic interpolation stencil at sq
                let j = match nodes.binary_search_by(|v| v.partial_cmp(&sq).unwrap()) {
                    Ok(j) => {
                        row[j] += k;
                        continue;
                    }
                    Err(j) => j,
                };
                let lo = j.saturating_sub(2).min(n.saturating_sub(4));
                let hi = (lo + 4).min(n);
                for i in lo..hi {
                    let mut l = 1.0;
                    for m in lo..hi {
                        if m != i {
                            l *= (sq - nodes[m]) / (nodes[i] - nodes[m]);
                        }
                    }
                    row[i] += k * l;
                }
            }
            Ok(row)
        })
        .collect();
    Ok(rows?.concat())
}

/// Least-squares slope of `ln K` against `ln s` over `fit_range`, at fixed
/// `(t, s~)`. Matches the indicial element `mu - (f-1)/2` when the range
/// sits well inside the boundary regime `s << min(s~, sqrt(t))`.
pub fn boundary_exponent(
    spec: &ModeKernelSpec,
    t: f64,
    s_tilde: f64,
    fit_range: (f64, f64),
) -> Result<f64> {
    let (s_lo, s_hi) = fit_range;
    if !(s_lo > 0.0 && s_hi > s_lo) {
        return Err(EdgeflowError::Fit(format!(
            "fit range ({s_lo}, {s_hi}) is empty or touches 0"
        )));
    }
    let n_fit = 24;
    let ratio = s_hi / s_lo;
    if ratio < 1.0 + 1e-9 {
        return Err(EdgeflowError::Fit(
            "fit range too narrow for 4 sample points".into(),
        ));
    }
    let mut ln_s = Vec::with_capacity(n_fit);
    let mut ln_k = Vec::with_capacity(n_fit);
    for i in 0..n_fit {
        let s = s_lo * ratio.powf(i as f64 / (n_fit - 1) as f64);
        let lk = mode_heat_kernel_ln(spec, t, s, s_tilde)?;
        if lk.is_finite() {
            ln_s.push(s.ln());
            ln_k.push(lk);
        }
    }
    if ln_s.len() < 4 {
        return Err(EdgeflowError::Fit(format!(
            "only {} usable sample points in fit range",
            ln_s.len()
        )));
    }
    Ok(numeric::fit_line(&ln_s, &ln_k)?.slope)
}

/// One tangential mode with its cross-section pairing weight
/// `phi_lambda(z) phi_lambda(z~)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WeightedMode {
    pub spec: ModeKernelSpec,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConeKernelValue {
    pub value: f64,
    pub modes_used: usize,
    /// Geometric extrapolation of the dropped tail; the Gaussian factor makes
    /// the true tail decay at least this fast.
    pub tail_estimate: f64,
}

/// Mode sum `sum_mu w_mu e^{-t l_mu}(s, s~)` with compensated summation in
/// the given mode order. Truncates once a mode's contribution falls below
/// `1e-14` of the running sum.
pub fn assemble_cone_kernel(
    modes: &[WeightedMode],
    t: f64,
    s: f64,
    s_tilde: f64,
) -> Result<ConeKernelValue> {
    if modes.is_empty() {
        return Err(EdgeflowError::Domain("empty mode list".into()));
    }
    check_kernel_args(t, s, s_tilde)?;
    let mut acc = KahanSum::new();
    let mut used = 0;
    let mut last_mag = 0.0_f64;
    let mut prev_mag = f64::NAN;
    for wm in modes {
        if !wm.weight.is_finite() {
            return Err(EdgeflowError::Domain("non-finite mode weight".into()));
        }
        let k = mode_heat_kernel(&wm.spec, t, s, s_tilde)?;
        let contribution = wm.weight * k;
        prev_mag = last_mag;
        last_mag = contribution.abs();
        acc.add(contribution);
        used += 1;
        let running = acc.total().abs();
        if running > 0.0 && last_mag < 1e-14 * running {
            break;
        }
    }
    let tail_estimate = if used >= 2 {
        let r = if prev_mag.is_nan() || prev_mag == 0.0 {
            0.5
        } else {
            (last_mag / prev_mag).min(0.9)
        };
        last_mag * r / (1.0 - r)
    } else {
        0.0
    };
    Ok(ConeKernelValue {
        value: acc.total(),
        modes_used: used,
        tail_estimate,
    })
}

/// Row of the kernel table export.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KernelTableRow {
    pub t: f64,
    pub s: f64,
    pub s_tilde: f64,
    pub mu: f64,
    pub f: u32,
    pub value: f64,
}

/// CSV serialization with the column layout `(t, s, s~, mu, f, value)`.
pub fn kernel_table_csv(rows: &[KernelTableRow]) -> String {
    let mut out = String::from("t,s,s_tilde,mu,f,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t, r.s, r.s_tilde, r.mu, r.f, r.value
        ));
    }
    out
}

/// Interpolates grid values at `x` (cubic); exported for the flow module.
pub fn interp_field(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    interp_cubic_on(nodes, values, x)
}

/// Reference ground eigenvalue of the truncated cone with a Dirichlet cut at
/// `x_max`: `(j_{mu,1} / x_max)^2`.
pub fn truncated_cone_ground_eigenvalue(mu: f64, x_max: f64) -> Result<f64> {
    if !(x_max > 0.0) {
        return Err(EdgeflowError::Domain(format!("x_max must be > 0, got {x_max}")));
    }
    let j1 = crate::specfun::bessel_j_first_zero(mu)?;
    Ok((j1 / x_max).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn closed_form_f1_half(t: f64, s: f64, st: f64) -> f64 {
        // f=1, mu=1/2: (s s~)^{-1/2} (4 pi t)^{-1/2} [e^{-(s-s~)^2/4t} - e^{-(s+s~)^2/4t}]
        (s * st).powf(-0.5)
            * (4.0 * PI * t).powf(-0.5)
            * ((-(s - st).powi(2) / (4.0 * t)).exp() - (-(s + st).powi(2) / (4.0 * t)).exp())
    }

    #[test]
    fn kernel_matches_closed_form_f1_half() {
        let spec = ModeKernelSpec::new(0.5, 1).unwrap();
        for &t in &[0.01, 0.1, 1.0] {
            for &s in &[0.1, 0.5, 1.3] {
                for &st in &[0.2, 0.9, 2.0] {
                    let k = mode_heat_kernel(&spec, t, s, st).unwrap();
                    let c = closed_form_f1_half(t, s, st);
                    assert!(
                        (k - c).abs() <= 1e-10 * c.abs().max(1e-300),
                        "t={t} s={s} st={st}: {k} vs {c}"
                    );
                }
            }
        }
    }

    #[test]
    fn kernel_symmetric_and_positive() {
        for (mu, f) in [(0.0, 1u32), (0.5, 1), (1.0, 2), (2.0, 3), (3.5, 2)] {
            let spec = ModeKernelSpec::new(mu, f).unwrap();
            for &t in &[0.01, 0.3] {
                for &s in &[0.05, 0.4, 1.1] {
                    for &st in &[0.07, 0.8] {
                        let a = mode_heat_kernel(&spec, t, s, st).unwrap();
                        let b = mode_heat_kernel(&spec, t, st, s).unwrap();
                        assert!(a > 0.0);
                        assert!((a - b).abs() <= 1e-12 * a, "symmetry defect");
                    }
                }
            }
        }
    }

    #[test]
    fn mode_from_eigenvalue_relation() {
        let spec = ModeKernelSpec::from_eigenvalue(3.0, 3).unwrap();
        assert!((spec.mu() - 2.0).abs() < 1e-15);
        assert!((spec.indicial_element() - 1.0).abs() < 1e-15);
        assert_eq!(spec.eigenvalue(), Some(3.0));
    }

    #[test]
    fn propagate_zero_field_is_zero() {
        let grid = RadialGrid::graded(64, 1.0, 3.0, 2).unwrap();
        let spec = ModeKernelSpec::new(1.0, 2).unwrap();
        let out = mode_propagate(&spec, 0.1, &grid, &vec![0.0; 64]).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn propagate_rejects_nonpositive_time() {
        let grid = RadialGrid::graded(32, 1.0, 3.0, 2).unwrap();
        let spec = ModeKernelSpec::new(1.0, 2).unwrap();
        assert!(mode_propagate(&spec, 0.0, &grid, &vec![1.0; 32]).is_err());
        assert!(mode_propagate(&spec, -0.1, &grid, &vec![1.0; 32]).is_err());
    }

    #[test]
    fn propagate_linear_in_field() {
        let grid = RadialGrid::graded(48, 2.0, 3.0, 1).unwrap();
        let spec = ModeKernelSpec::new(0.5, 1).unwrap();
        let a: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&s| (-(s - 1.0_f64).powi(2)).exp())
            .collect();
        let b: Vec<f64> = grid.nodes().iter().map(|&s| s * 0.3).collect();
        let ab: Vec<f64> = a.iter().zip(&b).map(|(x, y)| 2.0 * x - 3.0 * y).collect();
        let pa = mode_propagate(&spec, 0.05, &grid, &a).unwrap();
        let pb = mode_propagate(&spec, 0.05, &grid, &b).unwrap();
        let pab = mode_propagate(&spec, 0.05, &grid, &ab).unwrap();
        for i in 0..grid.len() {
            let lin = 2.0 * pa[i] - 3.0 * pb[i];
            assert!((pab[i] - lin).abs() <= 1e-12 * lin.abs().max(1e-12));
        }
    }

    #[test]
    fn boundary_exponent_zero_element() {
        // mu = (f-1)/2 is element 0: slope ~ 0
        let spec = ModeKernelSpec::new(1.0, 3).unwrap();
        let slope = boundary_exponent(&spec, 0.5, 1.0, (1e-4, 1e-3)).unwrap();
        assert!(slope.abs() < 1e-2, "slope {slope}");
    }

    #[test]
    fn boundary_exponent_f3_mu2() {
        let spec = ModeKernelSpec::new(2.0, 3).unwrap();
        let slope = boundary_exponent(&spec, 0.5, 1.0, (1e-4, 1e-3)).unwrap();
        assert!((slope - 1.0).abs() < 1e-2, "slope {slope}");
    }

    #[test]
    fn boundary_exponent_needs_room_for_samples() {
        let spec = ModeKernelSpec::new(1.0, 2).unwrap();
        assert!(boundary_exponent(&spec, 0.5, 1.0, (1e-3, 1e-3)).is_err());
        assert!(boundary_exponent(&spec, 0.5, 1.0, (0.0, 1e-3)).is_err());
    }

    #[test]
    fn cone_kernel_single_mode_and_zero_weights() {
        let spec = ModeKernelSpec::new(1.0, 2).unwrap();
        let k = mode_heat_kernel(&spec, 0.1, 0.7, 0.9).unwrap();
        let one = assemble_cone_kernel(&[WeightedMode { spec, weight: 1.0 }], 0.1, 0.7, 0.9).unwrap();
        assert!((one.value - k).abs() <= 1e-15 * k);
        let zeros = assemble_cone_kernel(
            &[
                WeightedMode { spec, weight: 0.0 },
                WeightedMode { spec, weight: 0.0 },
            ],
            0.1,
            0.7,
            0.9,
        )
        .unwrap();
        assert_eq!(zeros.value, 0.0);
        assert!(assemble_cone_kernel(&[], 0.1, 0.7, 0.9).is_err());
    }

    #[test]
    fn circle_mode_sum_self_convergence() {
        // f=1 circle of radius 1, diagonal in the cross-section: weights
        // 1/(2 pi) for k=0 and 1/pi for k>=1; mu(k^2) = k.
        let modes = |n: usize| -> Vec<WeightedMode> {
            (0..=n)
                .map(|k| WeightedMode {
                    spec: ModeKernelSpec::from_eigenvalue((k * k) as f64, 1).unwrap(),
                    weight: if k == 0 { 0.5 / PI } else { 1.0 / PI },
                })
                .collect()
        };
        let v60 = assemble_cone_kernel(&modes(60), 0.1, 1.0, 1.0).unwrap();
        let v120 = assemble_cone_kernel(&modes(120), 0.1, 1.0, 1.0).unwrap();
        assert!(
            (v60.value - v120.value).abs() <= 1e-8 * v120.value.abs(),
            "{} vs {}",
            v60.value,
            v120.value
        );
        assert!(v60.tail_estimate >= 0.0);
    }

    #[test]
    fn csv_layout() {
        let rows = vec![KernelTableRow {
            t: 0.1,
            s: 0.5,
            s_tilde: 0.25,
            mu: 1.0,
            f: 2,
            value: 0.125,
        }];
        let csv = kernel_table_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,s,s_tilde,mu,f,value"));
        assert_eq!(lines.next(), Some("0.1,0.5,0.25,1,2,0.125"));
    }
}
