//! Rotationally symmetric cone metrics `g = dx^2 + phi(x)^2 g_F`, their
//! curvature in the orthonormal ie-frame `{d/dx, phi^{-1} e_alpha}`, the
//! conformal transformation rule, the de Turck vector field, and
//! Holder-regularity reports.
//!
//! Curvature comes in two routes. The fast path evaluates the warped-product
//! closed forms (radial sectional `-phi''/phi`, fibre-fibre
//! `(k - phi'^2)/phi^2` for a constant-curvature-`k` cross-section model).
//! The oracle path assembles the full coordinate curvature tensor from
//! finite-difference Christoffel symbols of an `x`-dependent coordinate
//! metric; the two are cross-checked in the test suites.

use crate::error::{EdgeflowError, Result};
use crate::grid::RadialGrid;
use crate::numeric::{self, LineFit};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

/// Warped cone metric over a fixed Einstein cross-section.
#[derive(Debug, Clone)]
pub struct ConeMetric {
    fibre_dim: u32,
    grid: RadialGrid,
    warp: Vec<f64>,
    /// Einstein constant of the cross-section; `f - 1` for the unit round
    /// model, `0` for a flat torus cross-section.
    cross_section_einstein_constant: f64,
    /// `Some(c)` when the metric is the exact cone `phi = c x`.
    exact_cone_slope: Option<f64>,
}

impl ConeMetric {
    /// Exact cone `phi(x) = c x` over the unit round cross-section.
    pub fn exact_cone(fibre_dim: u32, grid: RadialGrid, c: f64) -> Result<Self> {
        if !(c > 0.0) {
            return Err(EdgeflowError::Domain(format!(
                "cone slope must be > 0, got {c}"
            )));
        }
        let warp = grid.nodes().iter().map(|&x| c * x).collect();
        Ok(Self {
            fibre_dim,
            grid,
            warp,
            cross_section_einstein_constant: (fibre_dim as f64 - 1.0).max(0.0),
            exact_cone_slope: Some(c),
        })
    }

    /// General warped metric from a positive radial profile.
    pub fn from_warp(
        fibre_dim: u32,
        grid: RadialGrid,
        warp: Vec<f64>,
        cross_section_einstein_constant: f64,
    ) -> Result<Self> {
        if warp.len() != grid.len() {
            return Err(EdgeflowError::Domain(format!(
                "warp length {} does not match grid size {}",
                warp.len(),
                grid.len()
            )));
        }
        if warp.iter().any(|&p| !(p > 0.0)) {
            return Err(EdgeflowError::Domain(
                "warp function must be positive on all nodes".into(),
            ));
        }
        // tag exact cones so their derivatives stay analytic
        let c0 = warp[0] / grid.nodes()[0];
        let exact = warp
            .iter()
            .zip(grid.nodes())
            .all(|(&p, &x)| (p / x - c0).abs() <= 1e-12 * c0.abs());
        Ok(Self {
            fibre_dim,
            grid,
            warp,
            cross_section_einstein_constant,
            exact_cone_slope: if exact { Some(c0) } else { None },
        })
    }

    pub fn fibre_dim(&self) -> u32 {
        self.fibre_dim
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn warp(&self) -> &[f64] {
        &self.warp
    }

    pub fn cross_section_einstein_constant(&self) -> f64 {
        self.cross_section_einstein_constant
    }

    pub fn is_exact_cone(&self) -> bool {
        self.exact_cone_slope.is_some()
    }

    pub fn exact_cone_slope(&self) -> Option<f64> {
        self.exact_cone_slope
    }

    /// Sectional-curvature parameter of the cross-section model,
    /// `k = Einstein constant / (f - 1)` for `f >= 2`.
    fn cross_section_sectional(&self) -> f64 {
        if self.fibre_dim >= 2 {
            self.cross_section_einstein_constant / (self.fibre_dim as f64 - 1.0)
        } else {
            0.0
        }
    }

    /// `(phi', phi'')` on the nodes; analytic for tagged exact cones.
    pub fn warp_derivatives(&self) -> (Vec<f64>, Vec<f64>) {
        if let Some(c) = self.exact_cone_slope {
            return (vec![c; self.grid.len()], vec![0.0; self.grid.len()]);
        }
        (
            numeric::derivative_nonuniform(self.grid.nodes(), &self.warp),
            numeric::second_derivative_nonuniform(self.grid.nodes(), &self.warp),
        )
    }

    /// Full coordinate metric `diag(1, phi^2, ..., phi^2)` for the oracle
    /// path; valid chart for `f = 1` or a flat cross-section model.
    pub fn coordinate_metric(&self) -> CoordinateMetric {
        let d = self.fibre_dim as usize + 1;
        let comps = self
            .warp
            .iter()
            .map(|&p| {
                let mut m = DMatrix::<f64>::identity(d, d);
                for a in 1..d {
                    m[(a, a)] = p * p;
                }
                m
            })
            .collect();
        CoordinateMetric {
            nodes: self.grid.nodes().to_vec(),
            comps,
        }
    }
}

/// Orthonormal-frame curvature components as radial profiles. The frame is
/// `{e_0 = d/dx, e_a = phi^{-1} (fibre frame)}`; `r_mixed` is `R(e_0, e_a,
/// e_0, e_a)` and `r_fibre` is `R(e_a, e_b, e_a, e_b)` for `a != b`.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureTensors {
    pub fibre_dim: u32,
    pub nodes: Vec<f64>,
    pub r_mixed: Vec<f64>,
    /// Empty for `f = 1` (no fibre-fibre planes).
    pub r_fibre: Vec<f64>,
    pub ric_radial: Vec<f64>,
    pub ric_fibre: Vec<f64>,
    pub scal: Vec<f64>,
    pub tracefree_radial: Vec<f64>,
    pub tracefree_fibre: Vec<f64>,
}

impl CurvatureTensors {
    /// Full (0,4) component in the orthonormal frame, from the stored
    /// profiles and the algebraic symmetries.
    pub fn riemann_component(&self, node: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let rm = self.r_mixed[node];
        let rf = if self.fibre_dim >= 2 {
            self.r_fibre[node]
        } else {
            0.0
        };
        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
        if i == 0 || j == 0 || k == 0 || l == 0 {
            // nonzero pattern: R_{0a0b} = rm d_ab and its symmetries
            let mut v = 0.0;
            if i == 0 && k == 0 && j > 0 && l > 0 {
                v += rm * d(j, l);
            }
            if j == 0 && l == 0 && i > 0 && k > 0 {
                v += rm * d(i, k);
            }
            if i == 0 && l == 0 && j > 0 && k > 0 {
                v -= rm * d(j, k);
            }
            if j == 0 && k == 0 && i > 0 && l > 0 {
                v -= rm * d(i, l);
            }
            v
        } else {
            rf * (d(i, k) * d(j, l) - d(i, l) * d(j, k))
        }
    }

    /// Largest absolute frame component at a node.
    pub fn max_abs_component(&self, node: usize) -> f64 {
        let rf = if self.fibre_dim >= 2 {
            self.r_fibre[node].abs()
        } else {
            0.0
        };
        self.r_mixed[node].abs().max(rf)
    }
}

fn curvature_from_profiles(
    fibre_dim: u32,
    nodes: Vec<f64>,
    r_mixed: Vec<f64>,
    r_fibre: Vec<f64>,
) -> CurvatureTensors {
    let f = fibre_dim as f64;
    let m = f + 1.0;
    let n = nodes.len();
    let mut ric_radial = vec![0.0; n];
    let mut ric_fibre = vec![0.0; n];
    let mut scal = vec![0.0; n];
    let mut tracefree_radial = vec![0.0; n];
    let mut tracefree_fibre = vec![0.0; n];
    for i in 0..n {
        let rm = r_mixed[i];
        let rf = if fibre_dim >= 2 { r_fibre[i] } else { 0.0 };
        ric_radial[i] = f * rm;
        ric_fibre[i] = rm + (f - 1.0) * rf;
        scal[i] = 2.0 * f * rm + f * (f - 1.0) * rf;
        tracefree_radial[i] = ric_radial[i] - scal[i] / m;
        tracefree_fibre[i] = ric_fibre[i] - scal[i] / m;
    }
    CurvatureTensors {
        fibre_dim,
        nodes,
        r_mixed,
        r_fibre,
        ric_radial,
        ric_fibre,
        scal,
        tracefree_radial,
        tracefree_fibre,
    }
}

/// Warped-product curvature of a [`ConeMetric`] (fast path).
pub fn curvature(metric: &ConeMetric) -> Result<CurvatureTensors> {
    if metric.grid.len() < 5 {
        return Err(EdgeflowError::Domain(
            "grid too coarse for second differences (< 5 nodes)".into(),
        ));
    }
    let (dp, ddp) = metric.warp_derivatives();
    let k = metric.cross_section_sectional();
    let n = metric.grid.len();
    let mut r_mixed = vec![0.0; n];
    let mut r_fibre = vec![0.0; n];
    for i in 0..n {
        let p = metric.warp[i];
        r_mixed[i] = -ddp[i] / p;
        if metric.fibre_dim >= 2 {
            r_fibre[i] = (k - dp[i] * dp[i]) / (p * p);
        }
    }
    if metric.fibre_dim == 1 {
        r_fibre.clear();
    }
    Ok(curvature_from_profiles(
        metric.fibre_dim,
        metric.grid.nodes().to_vec(),
        r_mixed,
        r_fibre,
    ))
}

/// Curvature of the conformally transformed metric `e^{2 phi} g` by the
/// Kulkarni-Nomizu rule, reported in the new metric's orthonormal frame.
pub fn conformal_curvature(metric: &ConeMetric, phi: &[f64]) -> Result<CurvatureTensors> {
    if phi.len() != metric.grid.len() {
        return Err(EdgeflowError::Domain(format!(
            "conformal exponent length {} does not match grid size {}",
            phi.len(),
            metric.grid.len()
        )));
    }
    let base = curvature(metric)?;
    let nodes = metric.grid.nodes();
    let dphi = numeric::derivative_nonuniform(nodes, phi);
    let ddphi = numeric::second_derivative_nonuniform(nodes, phi);
    let (dw, _) = metric.warp_derivatives();
    let n = nodes.len();
    let mut r_mixed = vec![0.0; n];
    let mut r_fibre = vec![0.0; n];
    for i in 0..n {
        // B = Hess phi - dphi.dphi + |grad phi|^2 g / 2, in the g-frame
        let b00 = ddphi[i] - 0.5 * dphi[i] * dphi[i];
        let bfib = (dw[i] / metric.warp[i]) * dphi[i] + 0.5 * dphi[i] * dphi[i];
        let scale = (-2.0 * phi[i]).exp();
        r_mixed[i] = scale * (base.r_mixed[i] - (b00 + bfib));
        if metric.fibre_dim >= 2 {
            r_fibre[i] = scale * (base.r_fibre[i] - 2.0 * bfib);
        }
    }
    if metric.fibre_dim == 1 {
        r_fibre.clear();
    }
    Ok(curvature_from_profiles(
        metric.fibre_dim,
        nodes.to_vec(),
        r_mixed,
        r_fibre,
    ))
}

/// An `x`-dependent coordinate metric on a radial chart
/// `(x, z_1, ..., z_{d-1})`; all components are functions of `x` alone.
#[derive(Debug, Clone)]
pub struct CoordinateMetric {
    pub nodes: Vec<f64>,
    pub comps: Vec<DMatrix<f64>>,
}

impl CoordinateMetric {
    pub fn from_fn(nodes: Vec<f64>, dim: usize, f: impl Fn(f64) -> DMatrix<f64>) -> Self {
        let comps = nodes
            .iter()
            .map(|&x| {
                let m = f(x);
                debug_assert_eq!(m.nrows(), dim);
                m
            })
            .collect();
        Self { nodes, comps }
    }

    pub fn dim(&self) -> usize {
        self.comps[0].nrows()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            nodes: self.nodes.clone(),
            comps: self.comps.iter().map(|m| m * factor).collect(),
        }
    }

    fn derivative(&self) -> Vec<DMatrix<f64>> {
        let d = self.dim();
        let mut out = vec![DMatrix::<f64>::zeros(d, d); self.nodes.len()];
        for p in 0..d {
            for q in 0..d {
                let vals: Vec<f64> = self.comps.iter().map(|m| m[(p, q)]).collect();
                let dv = numeric::derivative_nonuniform(&self.nodes, &vals);
                for (i, v) in dv.into_iter().enumerate() {
                    out[i][(p, q)] = v;
                }
            }
        }
        out
    }

    fn inverses(&self) -> Result<Vec<DMatrix<f64>>> {
        self.comps
            .iter()
            .enumerate()
            .map(|(i, m)| {
                m.clone()
                    .try_inverse()
                    .ok_or(EdgeflowError::LinearAlgebra {
                        node: i,
                        message: "singular metric matrix".into(),
                    })
            })
            .collect()
    }
}

/// Christoffel symbols `Gamma^j_{pq}` per node, symmetric in the lower pair.
#[derive(Debug, Clone)]
pub struct ChristoffelField {
    pub nodes: Vec<f64>,
    dim: usize,
    data: Vec<f64>,
}

impl ChristoffelField {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn gamma(&self, node: usize, j: usize, p: usize, q: usize) -> f64 {
        let d = self.dim;
        self.data[((node * d + j) * d + p) * d + q]
    }
}

/// `Gamma^j_{pq} = g^{jm} (d_p g_{mq} + d_q g_{mp} - d_m g_{pq}) / 2` with
/// only radial derivatives nonzero on these charts.
pub fn christoffel(metric: &CoordinateMetric) -> Result<ChristoffelField> {
    let d = metric.dim();
    let n = metric.nodes.len();
    if n < 3 {
        return Err(EdgeflowError::Domain(
            "need at least 3 nodes for metric derivatives".into(),
        ));
    }
    let dg = metric.derivative();
    let inv = metric.inverses()?;
    let mut data = vec![0.0; n * d * d * d];
    for i in 0..n {
        for j in 0..d {
            for p in 0..d {
                for q in p..d {
                    let mut v = 0.0;
                    for m in 0..d {
                        let dp = if p == 0 { dg[i][(m, q)] } else { 0.0 };
                        let dq = if q == 0 { dg[i][(m, p)] } else { 0.0 };
                        let dm = if m == 0 { dg[i][(p, q)] } else { 0.0 };
                        v += inv[i][(j, m)] * (dp + dq - dm);
                    }
                    v *= 0.5;
                    data[((i * d + j) * d + p) * d + q] = v;
                    data[((i * d + j) * d + q) * d + p] = v;
                }
            }
        }
    }
    Ok(ChristoffelField {
        nodes: metric.nodes.clone(),
        dim: d,
        data,
    })
}

/// Full coordinate curvature from finite-difference Christoffel assembly
/// (oracle path).
#[derive(Debug, Clone)]
pub struct CoordinateCurvature {
    pub nodes: Vec<f64>,
    dim: usize,
    /// `R_{ijkl}` (all indices down), flattened per node.
    riemann: Vec<f64>,
    pub ricci: Vec<DMatrix<f64>>,
    pub scal: Vec<f64>,
}

impl CoordinateCurvature {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn riemann(&self, node: usize, i: usize, j: usize, k: usize, l: usize) -> f64 {
        let d = self.dim;
        self.riemann[(((node * d + i) * d + j) * d + k) * d + l]
    }

    /// Frame components for a diagonal coordinate metric: divides by the
    /// norms of the coordinate vectors. Errors if the metric is not
    /// diagonal to within `1e-12` of its norm.
    pub fn frame_profiles(&self, metric: &CoordinateMetric) -> Result<CurvatureTensors> {
        let d = self.dim;
        let n = self.nodes.len();
        for (i, m) in metric.comps.iter().enumerate() {
            let scale = m.norm();
            for p in 0..d {
                for q in 0..d {
                    if p != q && m[(p, q)].abs() > 1e-12 * scale {
                        return Err(EdgeflowError::LinearAlgebra {
                            node: i,
                            message: "frame conversion requires a diagonal metric".into(),
                        });
                    }
                }
            }
        }
        let mut r_mixed = vec![0.0; n];
        let mut r_fibre = vec![0.0; n];
        for node in 0..n {
            let g = &metric.comps[node];
            let nrm = |a: usize| g[(a, a)].sqrt();
            r_mixed[node] = self.riemann(node, 0, 1, 0, 1) / (nrm(0) * nrm(1)).powi(2);
            if d >= 3 {
                r_fibre[node] = self.riemann(node, 1, 2, 1, 2) / (nrm(1) * nrm(2)).powi(2);
            }
        }
        let fibre_dim = (d - 1) as u32;
        if fibre_dim == 1 {
            r_fibre.clear();
        }
        Ok(curvature_from_profiles(
            fibre_dim,
            self.nodes.clone(),
            r_mixed,
            r_fibre,
        ))
    }

    /// First Bianchi defect `max |R_{ijkl} + R_{iklj} + R_{iljk}|` at a node.
    pub fn bianchi_defect(&self, node: usize) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let v = self.riemann(node, i, j, k, l)
                            + self.riemann(node, i, k, l, j)
                            + self.riemann(node, i, l, j, k);
                        worst = worst.max(v.abs());
                    }
                }
            }
        }
        worst
    }
}

pub fn coordinate_curvature(metric: &CoordinateMetric) -> Result<CoordinateCurvature> {
    let d = metric.dim();
    let n = metric.nodes.len();
    if n < 5 {
        return Err(EdgeflowError::Domain(
            "grid too coarse for second differences (< 5 nodes)".into(),
        ));
    }
    let gamma = christoffel(metric)?;
    let inv = metric.inverses()?;
    // radial derivative of every Christoffel component
    let mut dgamma = vec![0.0; n * d * d * d];
    for j in 0..d {
        for p in 0..d {
            for q in 0..d {
                let vals: Vec<f64> = (0..n).map(|i| gamma.gamma(i, j, p, q)).collect();
                let dv = numeric::derivative_nonuniform(&metric.nodes, &vals);
                for (i, v) in dv.into_iter().enumerate() {
                    dgamma[((i * d + j) * d + p) * d + q] = v;
                }
            }
        }
    }
    let dg_at = |i: usize, j: usize, p: usize, q: usize| dgamma[((i * d + j) * d + p) * d + q];

    let mut riemann = vec![0.0; n * d.pow(4)];
    let mut ricci = Vec::with_capacity(n);
    let mut scal = vec![0.0; n];
    for node in 0..n {
        // R^i_{jkl} = d_k Gamma^i_{lj} - d_l Gamma^i_{kj}
        //             + Gamma^i_{km} Gamma^m_{lj} - Gamma^i_{lm} Gamma^m_{kj}
        let mut up = vec![0.0; d.pow(4)];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut v = 0.0;
                        if k == 0 {
                            v += dg_at(node, i, l, j);
                        }
                        if l == 0 {
                            v -= dg_at(node, i, k, j);
                        }
                        for m in 0..d {
                            v += gamma.gamma(node, i, k, m) * gamma.gamma(node, m, l, j)
                                - gamma.gamma(node, i, l, m) * gamma.gamma(node, m, k, j);
                        }
                        up[((i * d + j) * d + k) * d + l] = v;
                    }
                }
            }
        }
        let g = &metric.comps[node];
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        let mut v = 0.0;
                        for m in 0..d {
                            v += g[(i, m)] * up[((m * d + j) * d + k) * d + l];
                        }
                        riemann[(((node * d + i) * d + j) * d + k) * d + l] = v;
                    }
                }
            }
        }
        let mut ric = DMatrix::<f64>::zeros(d, d);
        for j in 0..d {
            for l in 0..d {
                let mut v = 0.0;
                for m in 0..d {
                    v += up[((m * d + j) * d + m) * d + l];
                }
                ric[(j, l)] = v;
            }
        }
        let mut s = 0.0;
        for j in 0..d {
            for l in 0..d {
                s += inv[node][(j, l)] * ric[(j, l)];
            }
        }
        ricci.push(ric);
        scal[node] = s;
    }
    Ok(CoordinateCurvature {
        nodes: metric.nodes.clone(),
        dim: d,
        riemann,
        ricci,
        scal,
    })
}

/// Radial vector field on a coordinate chart; component `m` of `W` at node
/// `i` is `comps[i][m]`.
#[derive(Debug, Clone)]
pub struct VectorField {
    pub nodes: Vec<f64>,
    pub comps: Vec<DVector<f64>>,
}

/// The de Turck vector field
/// `W^j = -g_t^{pq} (Gamma^j_{pq}(g_t) - Gamma^j_{pq}(g_ref))`, reported in
/// coordinates and in the ie-frame (fibre components rescaled by `x`).
#[derive(Debug, Clone)]
pub struct DeturckField {
    pub coordinate: VectorField,
    pub ie_frame: Vec<DVector<f64>>,
    /// Sign of the radial component near `x = 0`: `Some(true)` when inward
    /// pointing (positive), `None` when numerically zero.
    pub inward_at_origin: Option<bool>,
}

pub fn deturck_field(g_t: &CoordinateMetric, g_ref: &CoordinateMetric) -> Result<DeturckField> {
    if g_t.nodes.len() != g_ref.nodes.len() || g_t.dim() != g_ref.dim() {
        return Err(EdgeflowError::Domain(
            "metrics must share grid and dimension".into(),
        ));
    }
    let d = g_t.dim();
    let n = g_t.nodes.len();
    let gamma_t = christoffel(g_t)?;
    let gamma_r = christoffel(g_ref)?;
    let inv_t = g_t.inverses()?;
    let mut comps = Vec::with_capacity(n);
    let mut ie = Vec::with_capacity(n);
    for i in 0..n {
        let mut w = DVector::<f64>::zeros(d);
        for j in 0..d {
            let mut v = 0.0;
            for p in 0..d {
                for q in 0..d {
                    v -= inv_t[i][(p, q)] * (gamma_t.gamma(i, j, p, q) - gamma_r.gamma(i, j, p, q));
                }
            }
            w[j] = v;
        }
        let mut wie = w.clone();
        for j in 1..d {
            wie[j] *= g_t.nodes[i];
        }
        comps.push(w);
        ie.push(wie);
    }
    let probe = comps.len().min(3);
    let mut radial_near_zero = 0.0;
    for c in comps.iter().take(probe) {
        radial_near_zero += c[0];
    }
    radial_near_zero /= probe as f64;
    let inward_at_origin = if radial_near_zero.abs() < 1e-13 {
        None
    } else {
        Some(radial_near_zero > 0.0)
    };
    Ok(DeturckField {
        coordinate: VectorField {
            nodes: g_t.nodes.clone(),
            comps,
        },
        ie_frame: ie,
        inward_at_origin,
    })
}

/// First-order pullback consistency: the Euler step of the flow of `W`
/// pulls `g` back to `g + dt L_W g + O(dt^2)`. Returns the sup-norm defect
/// over nodes whose image stays inside the chart.
pub fn pullback_consistency(g: &CoordinateMetric, w: &VectorField, dt: f64) -> Result<f64> {
    if w.nodes.len() != g.nodes.len() {
        return Err(EdgeflowError::Domain(
            "vector field and metric must share the grid".into(),
        ));
    }
    if !(dt > 0.0) {
        return Err(EdgeflowError::Domain(format!("dt must be > 0, got {dt}")));
    }
    let d = g.dim();
    let n = g.nodes.len();
    let dg = g.derivative();
    // radial derivative of each component of W
    let mut dw = vec![DVector::<f64>::zeros(d); n];
    for m in 0..d {
        let vals: Vec<f64> = w.comps.iter().map(|c| c[m]).collect();
        let der = numeric::derivative_nonuniform(&g.nodes, &vals);
        for (i, v) in der.into_iter().enumerate() {
            dw[i][m] = v;
        }
    }
    let x_lo = g.nodes[0];
    let x_hi = *g.nodes.last().unwrap();
    let mut worst = 0.0_f64;
    let mut any_valid = false;
    for i in 0..n {
        let target = g.nodes[i] + dt * w.comps[i][0];
        if target < x_lo || target > x_hi {
            continue;
        }
        any_valid = true;
        // metric at the shifted point, per component
        let mut g_shift = DMatrix::<f64>::zeros(d, d);
        for p in 0..d {
            for q in 0..d {
                let vals: Vec<f64> = g.comps.iter().map(|m| m[(p, q)]).collect();
                g_shift[(p, q)] = crate::grid::interp_cubic_on(&g.nodes, &vals, target);
            }
        }
        // jacobian of psi(x, z) = (x + dt W^0(x), z + dt W^a(x))
        let mut jac = DMatrix::<f64>::identity(d, d);
        for a in 0..d {
            jac[(a, 0)] += dt * dw[i][a];
        }
        let pullback = jac.transpose() * &g_shift * &jac;
        for p in 0..d {
            for q in 0..d {
                let lie = w.comps[i][0] * dg[i][(p, q)]
                    + if p == 0 {
                        (0..d).map(|m| g.comps[i][(m, q)] * dw[i][m]).sum::<f64>()
                    } else {
                        0.0
                    }
                    + if q == 0 {
                        (0..d).map(|m| g.comps[i][(p, m)] * dw[i][m]).sum::<f64>()
                    } else {
                        0.0
                    };
                let expected = g.comps[i][(p, q)] + dt * lie;
                worst = worst.max((pullback[(p, q)] - expected).abs());
            }
        }
    }
    if !any_valid {
        return Err(EdgeflowError::Domain(
            "flow map exits the grid domain at every node".into(),
        ));
    }
    Ok(worst)
}

/// Fitted boundary exponents of the curvature profiles.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    /// `2 + min(slope(scal), slope(trace-free Ric))`; `None` when the
    /// curvature vanishes identically on the window.
    pub gamma_fit: Option<f64>,
    pub curvature_slope: Option<LineFit>,
    pub scal_slope: Option<LineFit>,
    pub tracefree_slope: Option<LineFit>,
    /// Clause (1): curvature components bounded by `x^{-2}`.
    pub curvature_order_bounded: bool,
    pub note: String,
}

const VANISH_TOL: f64 = 1e-13;

fn loglog_fit(nodes: &[f64], values: &[f64], window: (f64, f64)) -> Result<Option<LineFit>> {
    let mut sup = 0.0_f64;
    for (&x, &v) in nodes.iter().zip(values) {
        if x >= window.0 && x <= window.1 {
            sup = sup.max(v.abs());
        }
    }
    if sup < VANISH_TOL {
        return Ok(None);
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&x, &v) in nodes.iter().zip(values) {
        if x >= window.0 && x <= window.1 && v.abs() > 1e-300 {
            xs.push(x.ln());
            ys.push(v.abs().ln());
        }
    }
    if xs.len() < 4 {
        return Err(EdgeflowError::Fit(format!(
            "only {} usable nodes in window [{}, {}]",
            xs.len(),
            window.0,
            window.1
        )));
    }
    numeric::fit_line(&xs, &ys).map(Some)
}

pub fn regularity_report(metric: &ConeMetric, window: (f64, f64)) -> Result<RegularityReport> {
    let nodes = metric.grid().nodes();
    if window.0 < nodes[0] || window.1 > *nodes.last().unwrap() || window.0 >= window.1 {
        return Err(EdgeflowError::Domain(format!(
            "window [{}, {}] not inside grid support [{}, {}]",
            window.0,
            window.1,
            nodes[0],
            nodes.last().unwrap()
        )));
    }
    let curv = curvature(metric)?;
    let max_comp: Vec<f64> = (0..nodes.len()).map(|i| curv.max_abs_component(i)).collect();
    let tf_max: Vec<f64> = (0..nodes.len())
        .map(|i| {
            curv.tracefree_radial[i]
                .abs()
                .max(curv.tracefree_fibre[i].abs())
        })
        .collect();
    let curvature_slope = loglog_fit(nodes, &max_comp, window)?;
    let scal_slope = loglog_fit(nodes, &curv.scal, window)?;
    let tracefree_slope = loglog_fit(nodes, &tf_max, window)?;
    let gamma_fit = match (&scal_slope, &tracefree_slope) {
        (Some(s), Some(t)) => Some(2.0 + s.slope.min(t.slope)),
        (Some(s), None) => Some(2.0 + s.slope),
        (None, Some(t)) => Some(2.0 + t.slope),
        (None, None) => None,
    };
    let curvature_order_bounded = curvature_slope
        .as_ref()
        .map_or(true, |fitted| fitted.slope >= -2.0 - 1e-2);
    let note = if gamma_fit.is_none() {
        "gamma unconstrained (vanishing curvature)".to_string()
    } else {
        String::new()
    };
    Ok(RegularityReport {
        gamma_fit,
        curvature_slope,
        scal_slope,
        tracefree_slope,
        curvature_order_bounded,
        note,
    })
}

/// Boundary-defining-function renormalization `x~ = (1 + u0)^{1/2} x`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BdfRenormalization {
    pub u0: f64,
    /// `sqrt(1 + u0)`; `x~ = factor * x`, fibre part `(1+u0) x^2 = x~^2`.
    pub factor: f64,
}

pub fn renormalize_bdf(u0: f64) -> Result<BdfRenormalization> {
    if !(u0 > -1.0) {
        return Err(EdgeflowError::Domain(format!(
            "u0 must be > -1 (degenerate metric), got {u0}"
        )));
    }
    Ok(BdfRenormalization {
        u0,
        factor: (1.0 + u0).sqrt(),
    })
}

impl BdfRenormalization {
    pub fn substitute(&self, x: f64) -> f64 {
        self.factor * x
    }

    /// Fits the decay rate of the residual left after renormalization,
    /// whose relative size is `(u(x) - u0) / (1 + u0)`; a flow profile
    /// `u = u0 + O(x^gamma)` produces slope `gamma`.
    pub fn residual_decay(
        &self,
        grid: &RadialGrid,
        u_profile: &[f64],
        window: (f64, f64),
    ) -> Result<LineFit> {
        if u_profile.len() != grid.len() {
            return Err(EdgeflowError::Domain(
                "profile length does not match grid".into(),
            ));
        }
        let residual: Vec<f64> = u_profile
            .iter()
            .map(|&u| (u - self.u0) / (1.0 + self.u0))
            .collect();
        loglog_fit(grid.nodes(), &residual, window)?.ok_or_else(|| {
            EdgeflowError::Fit("residual vanishes on the window; nothing to fit".into())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, x_max: f64, f: u32) -> RadialGrid {
        RadialGrid::graded(n, x_max, 2.0, f).unwrap()
    }

    #[test]
    fn exact_cone_flat_cases() {
        // f = 1, any c: flat away from the tip
        for &c in &[0.3, 1.0, 2.5] {
            let m = ConeMetric::exact_cone(1, grid(64, 1.0, 1), c).unwrap();
            let k = curvature(&m).unwrap();
            assert!(k.r_mixed.iter().all(|&v| v.abs() < 1e-12));
            assert!(k.scal.iter().all(|&v| v.abs() < 1e-12));
        }
        // f >= 2, c = 1 over the unit round cross-section: Euclidean
        for f in 2..=3u32 {
            let m = ConeMetric::exact_cone(f, grid(64, 1.0, f), 1.0).unwrap();
            let k = curvature(&m).unwrap();
            assert!(k.r_mixed.iter().all(|&v| v.abs() < 1e-12));
            assert!(k.r_fibre.iter().all(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn cone_angle_curvature_closed_form() {
        // f=2, phi = c x, c != 1: fibre-fibre component (1 - c^2)/(c^2 x^2)
        let c = 0.7;
        let m = ConeMetric::exact_cone(2, grid(64, 1.0, 2), c).unwrap();
        let k = curvature(&m).unwrap();
        for (i, &x) in m.grid().nodes().iter().enumerate() {
            let expected = (1.0 - c * c) / (c * c * x * x);
            assert!(
                (k.r_fibre[i] - expected).abs() <= 1e-10 * expected.abs(),
                "node {i}"
            );
            assert!(k.r_mixed[i].abs() < 1e-12);
        }
        let fit = loglog_fit(m.grid().nodes(), &k.r_fibre, (0.05, 0.9))
            .unwrap()
            .unwrap();
        assert!((fit.slope + 2.0).abs() < 1e-10);
    }

    #[test]
    fn sphere_normal_chart_has_unit_curvature() {
        // g = dx^2 + sin^2(x) dz^2 is the round 2-sphere: both routes give +1
        let g = RadialGrid::graded(64, 1.5, 1.0, 1).unwrap();
        let warp: Vec<f64> = g.nodes().iter().map(|&x| x.sin()).collect();
        let m = ConeMetric::from_warp(1, g, warp, 0.0).unwrap();
        let k = curvature(&m).unwrap();
        for (i, &x) in m.grid().nodes().iter().enumerate() {
            if x > 0.2 && x < 1.3 {
                assert!((k.r_mixed[i] - 1.0).abs() < 1e-4, "closed form at {x}");
            }
        }
        let nodes: Vec<f64> = (1..200).map(|i| 0.3 + 1.2 * i as f64 / 200.0).collect();
        let cm = CoordinateMetric::from_fn(nodes, 2, |x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x.sin().powi(2)]))
        });
        let curv = coordinate_curvature(&cm).unwrap();
        let frame = curv.frame_profiles(&cm).unwrap();
        for (i, &x) in curv.nodes.iter().enumerate() {
            if x > 0.4 && x < 1.3 {
                assert!(
                    (frame.r_mixed[i] - 1.0).abs() < 1e-3,
                    "oracle at {x}: {}",
                    frame.r_mixed[i]
                );
            }
        }
    }

    #[test]
    fn oracle_matches_closed_form_f2_torus() {
        // flat torus cross-section (einstein constant 0), smooth warp
        let g = grid(400, 1.0, 2);
        let warp: Vec<f64> = g.nodes().iter().map(|&x| x * (1.0 + 0.3 * x)).collect();
        let m = ConeMetric::from_warp(2, g, warp, 0.0).unwrap();
        let fast = curvature(&m).unwrap();
        let oracle = coordinate_curvature(&m.coordinate_metric()).unwrap();
        let frame = oracle.frame_profiles(&m.coordinate_metric()).unwrap();
        for (i, &x) in m.grid().nodes().iter().enumerate() {
            if x > 0.25 && x < 0.9 {
                assert!(
                    (fast.r_mixed[i] - frame.r_mixed[i]).abs()
                        <= 1e-4 * frame.r_mixed[i].abs().max(1.0),
                    "mixed at {x}: {} vs {}",
                    fast.r_mixed[i],
                    frame.r_mixed[i]
                );
                assert!(
                    (fast.r_fibre[i] - frame.r_fibre[i]).abs()
                        <= 1e-4 * frame.r_fibre[i].abs().max(1.0),
                    "fibre at {x}: {} vs {}",
                    fast.r_fibre[i],
                    frame.r_fibre[i]
                );
            }
        }
    }

    #[test]
    fn tracefree_part_traceless() {
        let g = grid(64, 1.0, 3);
        let warp: Vec<f64> = g.nodes().iter().map(|&x| x + 0.2 * x * x).collect();
        let m = ConeMetric::from_warp(3, g, warp, 2.0).unwrap();
        let k = curvature(&m).unwrap();
        for i in 0..k.nodes.len() {
            let trace = k.tracefree_radial[i] + 3.0 * k.tracefree_fibre[i];
            assert!(trace.abs() <= 1e-10, "trace {trace} at node {i}");
        }
    }

    #[test]
    fn christoffel_euclidean_zero_and_cone_values() {
        let nodes: Vec<f64> = (1..=50).map(|i| i as f64 / 50.0).collect();
        let flat = CoordinateMetric::from_fn(nodes.clone(), 2, |_| DMatrix::identity(2, 2));
        let gamma = christoffel(&flat).unwrap();
        for i in 0..nodes.len() {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert!(gamma.gamma(i, j, p, q).abs() < 1e-12);
                    }
                }
            }
        }
        // f=1 cone: Gamma^x_zz = -c^2 x, Gamma^z_xz = 1/x
        let c = 0.8;
        let cone = CoordinateMetric::from_fn(nodes.clone(), 2, |x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, c * c * x * x]))
        });
        let gamma = christoffel(&cone).unwrap();
        for (i, &x) in nodes.iter().enumerate() {
            assert!((gamma.gamma(i, 0, 1, 1) + c * c * x).abs() < 1e-9, "at {x}");
            assert!(
                (gamma.gamma(i, 1, 0, 1) - 1.0 / x).abs() < 1e-9 / x,
                "at {x}"
            );
            assert!(
                (gamma.gamma(i, 1, 0, 1) - gamma.gamma(i, 1, 1, 0)).abs() == 0.0,
                "lower symmetry"
            );
        }
    }

    #[test]
    fn christoffel_scale_invariant() {
        let nodes: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
        let base = CoordinateMetric::from_fn(nodes.clone(), 2, |x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x * x * (1.0 + x)]))
        });
        let scaled = base.scaled(7.3);
        let ga = christoffel(&base).unwrap();
        let gb = christoffel(&scaled).unwrap();
        for i in 0..nodes.len() {
            for j in 0..2 {
                for p in 0..2 {
                    for q in 0..2 {
                        assert!((ga.gamma(i, j, p, q) - gb.gamma(i, j, p, q)).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn christoffel_detects_singular_metric() {
        let nodes: Vec<f64> = (0..20).map(|i| 0.1 + i as f64 / 20.0).collect();
        let bad = CoordinateMetric::from_fn(nodes, 2, |_| DMatrix::zeros(2, 2));
        match christoffel(&bad) {
            Err(EdgeflowError::LinearAlgebra { node, .. }) => assert_eq!(node, 0),
            other => panic!("expected linear algebra error, got {other:?}"),
        }
    }

    #[test]
    fn conformal_constant_scaling() {
        // phi = const c on a curved background: frame components scale by
        // e^{-2c}, i.e. coordinate (0,4) components scale by e^{2c}
        let g = grid(80, 1.0, 2);
        let warp: Vec<f64> = g.nodes().iter().map(|&x| x * (1.0 + 0.2 * x)).collect();
        let m = ConeMetric::from_warp(2, g, warp, 1.0).unwrap();
        let base = curvature(&m).unwrap();
        let c = 0.37;
        let conf = conformal_curvature(&m, &vec![c; m.grid().len()]).unwrap();
        for i in 0..m.grid().len() {
            assert!(
                (conf.r_mixed[i] - (-2.0 * c).exp() * base.r_mixed[i]).abs()
                    <= 1e-10 * base.r_mixed[i].abs().max(1e-10)
            );
            assert!(
                (conf.r_fibre[i] - (-2.0 * c).exp() * base.r_fibre[i]).abs()
                    <= 1e-10 * base.r_fibre[i].abs().max(1e-10)
            );
        }
    }

    #[test]
    fn conformal_flat_constant_stays_flat() {
        let m = ConeMetric::exact_cone(1, grid(64, 1.0, 1), 1.0).unwrap();
        let conf = conformal_curvature(&m, &vec![1.3; m.grid().len()]).unwrap();
        assert!(conf.r_mixed.iter().all(|&v| v.abs() < 1e-12));
    }

    #[test]
    fn conformal_matches_fd_oracle_on_flat_f1_cone() {
        // phi(x) = 0.1 x^2 on a flat f=1 cone
        let n = 1200;
        let g = RadialGrid::graded(n, 1.0, 1.0, 1).unwrap();
        let m = ConeMetric::exact_cone(1, g, 1.0).unwrap();
        let phi: Vec<f64> = m.grid().nodes().iter().map(|&x| 0.1 * x * x).collect();
        let kn = conformal_curvature(&m, &phi).unwrap();
        let nodes = m.grid().nodes().to_vec();
        let cm = CoordinateMetric::from_fn(nodes.clone(), 2, |x| {
            let e = (2.0 * 0.1 * x * x).exp();
            DMatrix::from_diagonal(&DVector::from_vec(vec![e, e * x * x]))
        });
        let oracle = coordinate_curvature(&cm)
            .unwrap()
            .frame_profiles(&cm)
            .unwrap();
        for (i, &x) in nodes.iter().enumerate() {
            if x > 0.1 && x < 0.9 {
                assert!(
                    (kn.r_mixed[i] - oracle.r_mixed[i]).abs() <= 1e-4,
                    "at {x}: {} vs {}",
                    kn.r_mixed[i],
                    oracle.r_mixed[i]
                );
            }
        }
    }

    #[test]
    fn deturck_vanishes_on_equal_and_scaled_metrics() {
        let nodes: Vec<f64> = (1..=60).map(|i| i as f64 / 60.0).collect();
        let g = CoordinateMetric::from_fn(nodes.clone(), 2, |x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x * x]))
        });
        let w = deturck_field(&g, &g).unwrap();
        for c in &w.coordinate.comps {
            assert!(c.amax() < 1e-12);
        }
        let scaled = g.scaled(1.42);
        let w = deturck_field(&scaled, &g).unwrap();
        for c in &w.coordinate.comps {
            assert!(c.amax() < 1e-12, "scale invariance: {}", c.amax());
        }
    }

    #[test]
    fn deturck_conformal_radial_matches_hand_formula() {
        // g_t = (1 + u) g_ref with u = 0.1 x^2 on flat cones. With a = 1 + u,
        // the Christoffel differences of the conformal pair are
        //   Gamma^x_xx: a'/(2a),  Gamma^x_zz: -a' x^2/(2a),  Gamma^z_xz: a'/(2a),
        // so W^x = -(1/a)(a'/(2a)) + f (1/(a x^2))(a' x^2/(2a)) = (f-1) a'/(2a^2).
        // For f = 1 the conformal field cancels identically.
        let u = |x: f64| 0.1 * x * x;
        let du = |x: f64| 0.2 * x;
        for f in [1u32, 2] {
            let d = f as usize + 1;
            let nodes: Vec<f64> = (1..=400).map(|i| 0.2 + 0.6 * i as f64 / 400.0).collect();
            let g_ref = CoordinateMetric::from_fn(nodes.clone(), d, |x| {
                let mut m = DMatrix::<f64>::identity(d, d);
                for a in 1..d {
                    m[(a, a)] = x * x;
                }
                m
            });
            let g_t = CoordinateMetric::from_fn(nodes.clone(), d, |x| {
                let mut m = DMatrix::<f64>::identity(d, d);
                m[(0, 0)] = 1.0 + u(x);
                for a in 1..d {
                    m[(a, a)] = (1.0 + u(x)) * x * x;
                }
                m
            });
            let w = deturck_field(&g_t, &g_ref).unwrap();
            for (i, &x) in nodes.iter().enumerate() {
                let a = 1.0 + u(x);
                let expected = (f as f64 - 1.0) * du(x) / (2.0 * a * a);
                assert!(
                    (w.coordinate.comps[i][0] - expected).abs() < 1e-5,
                    "f={f} at {x}: {} vs {expected}",
                    w.coordinate.comps[i][0]
                );
            }
        }
    }

    #[test]
    fn pullback_translation_exact() {
        let nodes: Vec<f64> = (1..=80).map(|i| i as f64 / 40.0).collect();
        let g = CoordinateMetric::from_fn(nodes.clone(), 2, |_| DMatrix::identity(2, 2));
        let w = VectorField {
            nodes: nodes.clone(),
            comps: nodes
                .iter()
                .map(|_| DVector::from_vec(vec![0.3, 0.1]))
                .collect(),
        };
        let defect = pullback_consistency(&g, &w, 1e-3).unwrap();
        assert!(defect < 1e-12, "defect {defect}");
    }

    #[test]
    fn pullback_zero_field_exact() {
        let nodes: Vec<f64> = (1..=40).map(|i| i as f64 / 40.0).collect();
        let g = CoordinateMetric::from_fn(nodes.clone(), 2, |x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x * x]))
        });
        let w = VectorField {
            nodes: nodes.clone(),
            comps: nodes.iter().map(|_| DVector::zeros(2)).collect(),
        };
        assert!(pullback_consistency(&g, &w, 1e-3).unwrap() < 1e-15);
    }

    #[test]
    fn pullback_second_order_in_dt() {
        // radial W on a flat cone; dt-halving must show order >= 1.9
        let nodes: Vec<f64> = (1..=800).map(|i| 0.2 + 0.8 * i as f64 / 800.0).collect();
        let g = CoordinateMetric::from_fn(nodes.clone(), 2, |x| {
            DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, x * x]))
        });
        let w = VectorField {
            nodes: nodes.clone(),
            comps: nodes
                .iter()
                .map(|&x| DVector::from_vec(vec![0.2 * x * (1.0 - x), 0.0]))
                .collect(),
        };
        let d1 = pullback_consistency(&g, &w, 2e-3).unwrap();
        let d2 = pullback_consistency(&g, &w, 1e-3).unwrap();
        let order = (d1 / d2).log2();
        assert!(order >= 1.9, "measured order {order} ({d1} vs {d2})");
    }

    #[test]
    fn regularity_flat_cone_unconstrained() {
        let m = ConeMetric::exact_cone(1, grid(64, 1.0, 1), 1.0).unwrap();
        let rep = regularity_report(&m, (0.05, 0.9)).unwrap();
        assert!(rep.gamma_fit.is_none());
        assert!(rep.note.contains("unconstrained"));
        assert!(rep.curvature_order_bounded);
    }

    #[test]
    fn regularity_exact_cone_boundary_case() {
        let m = ConeMetric::exact_cone(2, grid(128, 1.0, 2), 0.8).unwrap();
        let rep = regularity_report(&m, (0.05, 0.9)).unwrap();
        let slope = rep.curvature_slope.as_ref().unwrap().slope;
        assert!((slope + 2.0).abs() < 1e-6, "slope {slope}");
        // scal slope -2 means gamma_fit = 0 (clause-1 boundary case)
        assert!(rep.gamma_fit.unwrap().abs() < 1e-6);
    }

    #[test]
    fn regularity_perturbed_warp_has_positive_gamma() {
        let g = grid(256, 1.0, 2);
        let warp: Vec<f64> = g.nodes().iter().map(|&x| x * (1.0 + x)).collect();
        let m = ConeMetric::from_warp(2, g, warp, 1.0).unwrap();
        let rep = regularity_report(&m, (0.02, 0.5)).unwrap();
        let gamma = rep.gamma_fit.unwrap();
        assert!(gamma > 0.5, "gamma_fit {gamma}");
    }

    #[test]
    fn bdf_renormalization_identities() {
        let r = renormalize_bdf(0.0).unwrap();
        assert_eq!(r.factor, 1.0);
        let r = renormalize_bdf(3.0).unwrap();
        assert_eq!(r.factor, 2.0);
        assert_eq!(r.substitute(0.5), 1.0);
        assert!(renormalize_bdf(-1.0).is_err());
    }

    #[test]
    fn bdf_residual_slope_recovers_exponent() {
        let g = RadialGrid::graded(400, 1.0, 2.0, 2).unwrap();
        let u0 = 0.2;
        let u: Vec<f64> = g.nodes().iter().map(|&x| u0 + x.powf(0.8)).collect();
        let r = renormalize_bdf(u0).unwrap();
        let fit = r.residual_decay(&g, &u, (1e-3, 0.5)).unwrap();
        assert!((fit.slope - 0.8).abs() < 0.02, "slope {}", fit.slope);
    }

    #[test]
    fn bianchi_identity_on_oracle_tensor() {
        let g = grid(128, 1.0, 2);
        let warp: Vec<f64> = g.nodes().iter().map(|&x| x * (1.0 + 0.4 * x)).collect();
        let m = ConeMetric::from_warp(2, g, warp, 0.0).unwrap();
        let curv = coordinate_curvature(&m.coordinate_metric()).unwrap();
        for node in [10, 60, 110] {
            assert!(curv.bianchi_defect(node) <= 1e-8, "node {node}");
        }
    }

    #[test]
    fn ie_frame_scaling_law() {
        // components in the ie-frame are invariant under (x, phi) -> (L x, L phi)
        let n = 64;
        let g1 = RadialGrid::graded(n, 1.0, 2.0, 2).unwrap();
        let g2 = RadialGrid::graded(n, 3.0, 2.0, 2).unwrap();
        let c = 0.6;
        let m1 = ConeMetric::exact_cone(2, g1, c).unwrap();
        let m2 = ConeMetric::exact_cone(2, g2, c).unwrap();
        let k1 = curvature(&m1).unwrap();
        let k2 = curvature(&m2).unwrap();
        for i in 0..n {
            let a = k1.r_fibre[i] * m1.grid().nodes()[i].powi(2);
            let b = k2.r_fibre[i] * m2.grid().nodes()[i].powi(2);
            assert!((a - b).abs() <= 1e-10 * a.abs());
        }
    }
}
