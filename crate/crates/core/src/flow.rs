//! The linearized Ricci-de Turck system on an exact cone background,
//! Duhamel/Picard fixed-point iteration, kernel projection, and decay
//! diagnostics.
//!
//! The unknown is `v = u g + omega`, stored as the pure-trace radial field
//! `u` together with one radial coefficient field per supplied trace-free
//! cross-section mode. The linear part evolves per mode through the model
//! heat kernels; the right-hand side assembles the quasilinear and
//! quadratic terms of the flow in the rotationally symmetric frame-diagonal
//! algebra `(a, b) = a e^0 e^0 + b sum_a e^a e^a`:
//!
//! - the inverse-metric perturbation contraction with the covariant Hessian
//!   (second-derivative term) is exact in this algebra;
//! - the curvature terms keep both metric factors, so their formal expansion
//!   cancels identically in pure-trace directions;
//! - the gradient quadratics follow the classical explicit de Turck
//!   expansion specialized to diagonal radial tensors.
//!
//! On a truncated domain the propagators optionally carry a mirror
//! reflection at `x_max`, standing in for a Dirichlet cut; this makes the
//! discrete spectrum bottom `(j_{mu,1}/x_max)^2` the reference decay rate.

use crate::error::{EdgeflowError, Result};
use crate::geometry::{self, ConeMetric};
use crate::grid::RadialGrid;
use crate::indicial::HolderWindow;
use crate::modeheat::{self, apply_matrix, ModeKernelSpec};
use crate::numeric::{self, KahanSum};
use serde::Serialize;

/// One trace-free cross-section mode: its tangential eigenvalue under the
/// trace-free tangential operator, and whether it is the rotationally
/// symmetric diagonal mode fed by the background trace-free Ricci source.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceFreeMode {
    pub eigenvalue: f64,
    pub radial_diag: bool,
}

#[derive(Debug, Clone, Serialize)]
pub enum FlowMode {
    /// Flow starts at the background metric: `v(0) = 0`, constant curvature
    /// sources drive the motion.
    ShortTime,
    /// Flow starts at a perturbation `g - h` of a flat background; optional
    /// projection of the initial datum onto the kernel complement.
    FlatLongTime { project_initial: bool },
}

#[derive(Debug, Clone)]
pub struct FlowConfig {
    pub background: ConeMetric,
    pub modes: Vec<TraceFreeMode>,
    pub t_max: f64,
    pub n_time: usize,
    pub window: HolderWindow,
    pub holder_k: usize,
    pub mode: FlowMode,
    pub tol: f64,
    pub max_iters: usize,
    /// Mirror-reflect the propagators at `x_max` (Dirichlet cut).
    pub dirichlet_cut: bool,
}

/// The flow unknown on the space-time grid: `u[t][i]`, `omega[m][t][i]`.
#[derive(Debug, Clone)]
pub struct PerturbationState {
    pub u: Vec<Vec<f64>>,
    pub omega: Vec<Vec<Vec<f64>>>,
    pub times: Vec<f64>,
}

impl PerturbationState {
    pub fn zero(n_modes: usize, times: Vec<f64>, n_nodes: usize) -> Self {
        let nt = times.len();
        Self {
            u: vec![vec![0.0; n_nodes]; nt],
            omega: vec![vec![vec![0.0; n_nodes]; nt]; n_modes],
            times,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.u[0].len()
    }

    pub fn n_times(&self) -> usize {
        self.times.len()
    }

    pub fn n_modes(&self) -> usize {
        self.omega.len()
    }

    /// Componentwise difference, for residuals.
    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in 0..self.n_times() {
            for i in 0..self.n_nodes() {
                out.u[t][i] -= other.u[t][i];
            }
        }
        for m in 0..self.n_modes() {
            for t in 0..self.n_times() {
                for i in 0..self.n_nodes() {
                    out.omega[m][t][i] -= other.omega[m][t][i];
                }
            }
        }
        out
    }

    /// Diagonal-algebra metric eigenvalue factors `1 + p`, `1 + q` at one
    /// space-time point, for positivity checks.
    fn metric_factors(&self, t: usize, i: usize, fibre_dim: u32) -> (f64, f64) {
        let u = self.u[t][i];
        let mut wsum = 0.0;
        for m in 0..self.n_modes() {
            wsum += self.omega[m][t][i];
        }
        (1.0 + u + wsum, 1.0 + u - wsum / fibre_dim as f64)
    }
}

/// Initial datum `v(0) = u0 g + omega0`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: Vec<f64>,
    pub omega0: Vec<Vec<f64>>,
}

impl InitialData {
    pub fn zero(n_modes: usize, n_nodes: usize) -> Self {
        Self {
            u0: vec![0.0; n_nodes],
            omega0: vec![vec![0.0; n_nodes]; n_modes],
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DecayFit {
    pub rate: f64,
    pub r2: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub holder_trajectory: Vec<f64>,
    pub decay_fit: Option<DecayFit>,
    /// Reference `min_sector (j_{mu,1}/x_max)^2` of the truncated cone.
    pub lambda0: f64,
    pub curvature_bound_trajectory: Vec<f64>,
    pub contracted: bool,
    pub decayed: Option<bool>,
    pub positivity_preserved: bool,
    pub converged: bool,
    pub diverged: bool,
}

struct SectorPropagators {
    /// `heat(l * dt)` for `l = 1..=n_time`.
    lags: Vec<Vec<f64>>,
    /// `int_0^dt heat(tau) dtau`.
    duhamel0: Vec<f64>,
    /// `int_0^dt tau heat(tau) dtau`.
    duhamel1: Vec<f64>,
}

/// Precomputed solver for one configuration.
pub struct FlowSolver {
    config: FlowConfig,
    times: Vec<f64>,
    dt: f64,
    sectors: Vec<SectorPropagators>,
    /// Indicial orders per sector (trace sector first).
    sector_mu: Vec<f64>,
    /// Background curvature profiles.
    scal_over_m: Vec<f64>,
    minus_two_tf_radial: Vec<f64>,
    bg_r_mixed: Vec<f64>,
    bg_r_fibre: Vec<f64>,
    diag_mode: Option<usize>,
}

const DUHAMEL_LEVELS: usize = 8;

/// `D0 = int_0^dt heat(tau) dtau` and `D1 = int_0^dt tau heat(tau) dtau`
/// by a geometric subdivision refined toward `tau = 0`, midpoint rule per
/// level. Refinement stops at the grid's kernel-resolvability floor
/// `tau_res = 2 h_max^2` and closes with the identity (`heat(tau) -> I`
/// continuously); descending further would push the kernel into the
/// under-resolved regime, whose interpolation leaves an absolute noise
/// floor at the innermost nodes that the `x^{-2}` terms of the flow then
/// amplify.
fn duhamel_matrices(
    spec: &ModeKernelSpec,
    dt: f64,
    grid: &RadialGrid,
    dirichlet: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = grid.len();
    let mut d0 = vec![0.0; n * n];
    let mut d1 = vec![0.0; n * n];
    let h = grid.max_spacing();
    let tau_res = 2.0 * h * h;
    let mut upper = dt;
    let mut deepest: Option<Vec<f64>> = None;
    for _ in 0..DUHAMEL_LEVELS {
        let lower = 0.5 * upper;
        let mid = 0.5 * (lower + upper);
        if mid < tau_res && deepest.is_some() {
            break;
        }
        let w = upper - lower;
        let p = if dirichlet {
            modeheat::dirichlet_propagator_matrix(spec, mid, grid)?
        } else {
            modeheat::propagator_matrix(spec, mid, grid)?
        };
        for k in 0..n * n {
            d0[k] += w * p[k];
            d1[k] += w * mid * p[k];
        }
        deepest = Some(p);
        upper = lower;
    }
    // Close the tail [0, upper] with the deepest resolved propagator rather
    // than the identity: nodes with x << sqrt(tau) sit inside the boundary
    // layer of the x^{-2} potential, where heat(tau) != I and an identity
    // closure would break the x^{mu - (f-1)/2} decay the quadratic terms
    // amplify with x^{-2} weights.
    if let Some(p) = deepest {
        for k in 0..n * n {
            d0[k] += upper * p[k];
            d1[k] += 0.5 * upper * upper * p[k];
        }
    } else {
        for i in 0..n {
            d0[i * n + i] += upper;
            d1[i * n + i] += 0.5 * upper * upper;
        }
    }
    Ok((d0, d1))
}

impl FlowSolver {
    pub fn new(config: FlowConfig) -> Result<Self> {
        if !config.window.feasible {
            return Err(EdgeflowError::Domain(format!(
                "Holder window infeasible; binding: {:?}",
                config.window.binding
            )));
        }
        if config.n_time < 2 {
            return Err(EdgeflowError::Domain("need at least 2 time steps".into()));
        }
        if !(config.t_max > 0.0) {
            return Err(EdgeflowError::Domain(format!(
                "t_max must be > 0, got {}",
                config.t_max
            )));
        }
        let f = config.background.fibre_dim();
        let grid = config.background.grid().clone();
        let dt = config.t_max / config.n_time as f64;
        let times: Vec<f64> = (0..=config.n_time).map(|j| j as f64 * dt).collect();

        let mut sector_specs = vec![ModeKernelSpec::from_eigenvalue(0.0, f)?];
        for m in &config.modes {
            sector_specs.push(ModeKernelSpec::from_eigenvalue(m.eigenvalue, f)?);
        }
        let mut sectors = Vec::with_capacity(sector_specs.len());
        for spec in &sector_specs {
            let mut lags = Vec::with_capacity(config.n_time);
            for l in 1..=config.n_time {
                let t = l as f64 * dt;
                let p = if config.dirichlet_cut {
                    modeheat::dirichlet_propagator_matrix(spec, t, &grid)?
                } else {
                    modeheat::propagator_matrix(spec, t, &grid)?
                };
                lags.push(p);
            }
            let (duhamel0, duhamel1) = duhamel_matrices(spec, dt, &grid, config.dirichlet_cut)?;
            sectors.push(SectorPropagators {
                lags,
                duhamel0,
                duhamel1,
            });
        }

        let curv = geometry::curvature(&config.background)?;
        let m_dim = f as f64 + 1.0;
        let scal_over_m: Vec<f64> = curv.scal.iter().map(|&s| s / m_dim).collect();
        let minus_two_tf_radial: Vec<f64> =
            curv.tracefree_radial.iter().map(|&v| -2.0 * v).collect();
        let n = grid.len();
        let bg_r_fibre = if curv.fibre_dim >= 2 {
            curv.r_fibre.clone()
        } else {
            vec![0.0; n]
        };
        let diag_mode = config.modes.iter().position(|m| m.radial_diag);

        Ok(Self {
            sector_mu: sector_specs.iter().map(|s| s.mu()).collect(),
            config,
            times,
            dt,
            sectors,
            scal_over_m,
            minus_two_tf_radial,
            bg_r_mixed: curv.r_mixed,
            bg_r_fibre,
            diag_mode,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn grid(&self) -> &RadialGrid {
        self.config.background.grid()
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    /// `min_sector (j_{mu,1}/x_max)^2`.
    pub fn lambda0(&self) -> Result<f64> {
        let mut best = f64::INFINITY;
        for &mu in &self.sector_mu {
            best = best.min(modeheat::truncated_cone_ground_eigenvalue(
                mu,
                self.grid().x_max(),
            )?);
        }
        Ok(best)
    }

    /// Diagonal-algebra right-hand side for one mode pair `(u, w)`, without
    /// the constant sources. Returns the `(e0 e0, fibre)` component fields.
    fn diag_rhs(&self, u: &[f64], w: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let grid = self.grid();
        let x = grid.nodes();
        let f = self.config.background.fibre_dim() as f64;
        let n = grid.len();
        let p: Vec<f64> = (0..n).map(|i| u[i] + w[i]).collect();
        let q: Vec<f64> = (0..n).map(|i| u[i] - w[i] / f).collect();
        for i in 0..n {
            if 1.0 + p[i] <= 0.0 || 1.0 + q[i] <= 0.0 {
                return Err(EdgeflowError::State(format!(
                    "metric degeneracy at node {i}: eigenvalue factors {} / {}",
                    1.0 + p[i],
                    1.0 + q[i]
                )));
            }
        }
        let dp = numeric::derivative_nonuniform(x, &p);
        let dq = numeric::derivative_nonuniform(x, &q);
        let ddp = numeric::second_derivative_nonuniform(x, &p);
        let ddq = numeric::second_derivative_nonuniform(x, &q);
        let mut out00 = vec![0.0; n];
        let mut outbb = vec![0.0; n];
        for i in 0..n {
            let xi = x[i];
            let w0 = 1.0 / (1.0 + p[i]);
            let w1 = 1.0 / (1.0 + q[i]);
            let d0 = w0 - 1.0;
            let d1 = w1 - 1.0;
            let mix = (p[i] - q[i]) / xi;

            // T1: inverse-metric perturbation against the covariant Hessian
            let t1_00 = d0 * ddp[i] + d1 * ((f / xi) * dp[i] - 2.0 * f * mix / xi);
            let t1_bb = d0 * ddq[i] + d1 * ((f / xi) * dq[i] + 2.0 * mix / xi);

            // T2: curvature contraction with both evolving-metric factors,
            // minus its constant and linear parts (pure-trace input cancels
            // identically)
            let rm = self.bg_r_mixed[i];
            let rf = self.bg_r_fibre[i];
            let a00 = (1.0 + p[i]) * w1 * f * rm;
            let abb = (1.0 + q[i]) * (w0 * rm + w1 * (f - 1.0) * rf);
            let a00_0 = f * rm;
            let abb_0 = rm + (f - 1.0) * rf;
            let da00 = f * rm * (p[i] - q[i]);
            let dabb = (q[i] - p[i]) * rm;
            let t2_00 = 2.0 * (a00 - a00_0 - da00);
            let t2_bb = 2.0 * (abb - abb_0 - dabb);

            // T3: gradient quadratics of the explicit de Turck expansion,
            // specialized to diagonal radial tensors
            let t3_00 =
                0.5 * (-3.0 * w0 * w0 * dp[i] * dp[i] + f * w1 * w1 * dq[i] * (dq[i] - 4.0 * mix));
            let t3_bb = -w0 * w1 * (2.0 * mix * mix + dq[i] * dq[i]);

            out00[i] = t1_00 + t2_00 + t3_00;
            outbb[i] = t1_bb + t2_bb + t3_bb;
        }
        Ok((out00, outbb))
    }

    /// The right-hand side `F(u, omega)` at one time slice: the trace source
    /// (with `scal/m`) and one source per trace-free mode (the diagonal mode
    /// carries `-2 Ric'`).
    pub fn rhs(&self, state: &PerturbationState, t_index: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let f = self.config.background.fibre_dim() as f64;
        let m_dim = f + 1.0;
        let n = state.n_nodes();
        let u = &state.u[t_index];
        // pure-trace nonlinearity, counted once
        let zero = vec![0.0; n];
        let (base00, basebb) = self.diag_rhs(u, &zero)?;
        let mut f_u: Vec<f64> = (0..n)
            .map(|i| (base00[i] + f * basebb[i]) / m_dim + self.scal_over_m[i])
            .collect();
        let mut f_omega = Vec::with_capacity(state.n_modes());
        for mi in 0..state.n_modes() {
            let (c00, cbb) = self.diag_rhs(u, &state.omega[mi][t_index])?;
            let mut fm = vec![0.0; n];
            for i in 0..n {
                let trace_part = (c00[i] + f * cbb[i]) / m_dim;
                // mode feedback into the trace equation, without re-counting
                // the pure-u part
                f_u[i] += trace_part - (base00[i] + f * basebb[i]) / m_dim;
                fm[i] = c00[i] - trace_part;
            }
            if self.diag_mode == Some(mi) {
                for i in 0..n {
                    fm[i] += self.minus_two_tf_radial[i];
                }
            }
            f_omega.push(fm);
        }
        Ok((f_u, f_omega))
    }

    fn sector_step(
        &self,
        sector: &SectorPropagators,
        v0: &[f64],
        rhs: &[Vec<f64>],
    ) -> Vec<Vec<f64>> {
        let n = v0.len();
        let nt = self.times.len();
        let mut out = Vec::with_capacity(nt);
        out.push(v0.to_vec());
        let mut conv = vec![0.0; n];
        for j in 1..nt {
            // recursive Duhamel accumulation:
            // C_j = heat(dt) C_{j-1} + D0 F_j + D1 (F_{j-1} - F_j)/dt
            let mut next_conv = apply_matrix(&sector.lags[0], &conv, n);
            let d0f = apply_matrix(&sector.duhamel0, &rhs[j], n);
            let slope: Vec<f64> = (0..n)
                .map(|i| (rhs[j - 1][i] - rhs[j][i]) / self.dt)
                .collect();
            let d1f = apply_matrix(&sector.duhamel1, &slope, n);
            for i in 0..n {
                next_conv[i] += d0f[i] + d1f[i];
            }
            conv = next_conv;
            // direct heat image of the initial datum plus the convolution
            let h = apply_matrix(&sector.lags[j - 1], v0, n);
            out.push((0..n).map(|i| h[i] + conv[i]).collect());
        }
        out
    }

    /// One application of the Picard map:
    /// `Psi(v)(t_j) = heat(t_j) v0 + int_0^{t_j} heat(t_j - t') F(v)(t') dt'`.
    pub fn picard_step(
        &self,
        state: &PerturbationState,
        initial: &InitialData,
    ) -> Result<PerturbationState> {
        let n = self.grid().len();
        let nt = self.times.len();
        if state.n_times() != nt || state.n_nodes() != n {
            return Err(EdgeflowError::State(
                "state shape does not match solver configuration".into(),
            ));
        }
        let mut rhs_u = Vec::with_capacity(nt);
        let mut rhs_omega = vec![Vec::with_capacity(nt); state.n_modes()];
        for j in 0..nt {
            let (fu, fo) = self.rhs(state, j)?;
            rhs_u.push(fu);
            for (m, fm) in fo.into_iter().enumerate() {
                rhs_omega[m].push(fm);
            }
        }
        let u = self.sector_step(&self.sectors[0], &initial.u0, &rhs_u);
        let mut omega = Vec::with_capacity(state.n_modes());
        for m in 0..state.n_modes() {
            omega.push(self.sector_step(&self.sectors[m + 1], &initial.omega0[m], &rhs_omega[m]));
        }
        Ok(PerturbationState {
            u,
            omega,
            times: self.times.clone(),
        })
    }

    /// Weighted discrete Holder norm of a whole state per the configured
    /// window: trace part at weight `gamma1`, trace-free parts at `gamma0`.
    pub fn state_norm(&self, state: &PerturbationState) -> Result<f64> {
        let w = &self.config.window;
        let mut total = holder_norm_field(
            self.grid(),
            &state.times,
            &state.u,
            w.gamma1,
            w.alpha,
            self.config.holder_k,
            None,
        )?;
        for (m, cfg) in self.config.modes.iter().enumerate() {
            total += holder_norm_field(
                self.grid(),
                &state.times,
                &state.omega[m],
                w.gamma0,
                w.alpha,
                self.config.holder_k,
                Some(cfg.eigenvalue),
            )?;
        }
        Ok(total)
    }

    fn slice_norm(&self, state: &PerturbationState, j: usize) -> Result<f64> {
        let w = &self.config.window;
        let times = vec![state.times[j]];
        let mut total = holder_norm_field(
            self.grid(),
            &times,
            std::slice::from_ref(&state.u[j]),
            w.gamma1,
            w.alpha,
            0,
            None,
        )?;
        for m in 0..state.n_modes() {
            total += holder_norm_field(
                self.grid(),
                &times,
                std::slice::from_ref(&state.omega[m][j]),
                w.gamma0,
                w.alpha,
                0,
                Some(self.config.modes[m].eigenvalue),
            )?;
        }
        Ok(total)
    }

    fn positivity_ok(&self, state: &PerturbationState) -> bool {
        let f = self.config.background.fibre_dim();
        for t in 0..state.n_times() {
            for i in 0..state.n_nodes() {
                if 1.0 + state.u[t][i] <= 0.0 {
                    return false;
                }
                let (a, b) = state.metric_factors(t, i, f);
                if a <= 0.0 || b <= 0.0 {
                    return false;
                }
            }
        }
        true
    }

    fn curvature_bound(&self, state: &PerturbationState, j: usize) -> Result<f64> {
        let grid = self.grid();
        let x = grid.nodes();
        // conformal part: R((1+u) g) by the Kulkarni-Nomizu rule with
        // exponent ln(1+u)/2
        let phi: Vec<f64> = state.u[j].iter().map(|&u| 0.5 * (1.0 + u).ln()).collect();
        let conf = geometry::conformal_curvature(&self.config.background, &phi)?;
        let mut worst = 0.0_f64;
        for i in 0..grid.len() {
            let mut b = conf.max_abs_component(i);
            for m in 0..state.n_modes() {
                let w = &state.omega[m];
                let dwdx = if i > 0 && i + 1 < grid.len() {
                    (w[j][i + 1] - w[j][i - 1]) / (x[i + 1] - x[i - 1])
                } else {
                    0.0
                };
                let d2w = if i > 0 && i + 1 < grid.len() {
                    let k0 = 2.0 / ((x[i - 1] - x[i]) * (x[i - 1] - x[i + 1]));
                    let k2 = 2.0 / ((x[i + 1] - x[i - 1]) * (x[i + 1] - x[i]));
                    k0 * (w[j][i - 1] - w[j][i]) + k2 * (w[j][i + 1] - w[j][i])
                } else {
                    0.0
                };
                b += w[j][i].abs() / (x[i] * x[i]) + dwdx.abs() / x[i] + d2w.abs();
            }
            worst = worst.max(b);
        }
        Ok(worst)
    }

    /// Picard iteration to a fixed point with contraction and decay
    /// diagnostics. Divergence and positivity violations are reported, not
    /// raised.
    pub fn run(&self, initial: &InitialData, basis: Option<&KernelBasis>) -> Result<(PerturbationState, FlowReport)> {
        let n = self.grid().len();
        let n_modes = self.config.modes.len();
        let mut initial = initial.clone();
        if let FlowMode::FlatLongTime { project_initial: true } = self.config.mode {
            if let Some(basis) = basis {
                let slice = StateSlice {
                    u: initial.u0.clone(),
                    omega: initial.omega0.clone(),
                };
                let (_, perp) = kernel_projection(self.grid(), &slice, basis)?;
                initial.u0 = perp.u;
                initial.omega0 = perp.omega;
            }
        }
        let mut state = PerturbationState::zero(n_modes, self.times.clone(), n);
        let mut residual_history = Vec::new();
        let mut positivity_preserved = true;
        let mut converged = false;
        let mut diverged = false;
        let mut iterations = 0;
        for _ in 0..self.config.max_iters {
            iterations += 1;
            let next = self.picard_step(&state, &initial)?;
            if !self.positivity_ok(&next) {
                positivity_preserved = false;
                state = next;
                break;
            }
            let residual = self.state_norm(&next.sub(&state))?;
            residual_history.push(residual);
            state = next;
            if residual <= self.config.tol {
                converged = true;
                break;
            }
            let k = residual_history.len();
            if k >= 4
                && (1..=3).all(|d| residual_history[k - d] > residual_history[k - d - 1])
            {
                diverged = true;
                break;
            }
        }
        let contraction_ratios: Vec<f64> = residual_history
            .windows(2)
            .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
            .collect();
        let contracted = !diverged
            && (residual_history.len() < 2
                || contraction_ratios.iter().all(|&r| r < 1.0));

        let mut holder_trajectory = Vec::with_capacity(state.n_times());
        for j in 0..state.n_times() {
            holder_trajectory.push(self.slice_norm(&state, j)?);
        }
        let mut curvature_bound_trajectory = Vec::with_capacity(state.n_times());
        for j in 0..state.n_times() {
            curvature_bound_trajectory.push(self.curvature_bound(&state, j)?);
        }

        let lambda0 = self.lambda0()?;
        let decay_fit = if matches!(self.config.mode, FlowMode::FlatLongTime { .. }) {
            let mut norms = Vec::with_capacity(state.n_times());
            for j in 0..state.n_times() {
                let slice = StateSlice {
                    u: state.u[j].clone(),
                    omega: state.omega.iter().map(|m| m[j].clone()).collect(),
                };
                let v_perp = match basis {
                    Some(basis) => kernel_projection(self.grid(), &slice, basis)?.1,
                    None => slice,
                };
                norms.push(state_slice_l2(self.grid(), &v_perp));
            }
            let window = (self.config.t_max / 3.0, self.config.t_max);
            decay_rate(&state.times, &norms, window)?
        } else {
            None
        };
        let decayed = decay_fit.map(|fit| fit.rate > 0.0);

        let report = FlowReport {
            iterations,
            residual_history,
            contraction_ratios,
            holder_trajectory,
            decay_fit,
            lambda0,
            curvature_bound_trajectory,
            contracted,
            decayed,
            positivity_preserved,
            converged,
            diverged,
        };
        Ok((state, report))
    }
}

/// One time slice of the unknown, used by the projection.
#[derive(Debug, Clone)]
pub struct StateSlice {
    pub u: Vec<f64>,
    pub omega: Vec<Vec<f64>>,
}

/// Candidate kernel basis: elements of the same shape as a state slice,
/// orthonormal in the weighted inner product.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub elements: Vec<StateSlice>,
}

fn slice_inner(grid: &RadialGrid, a: &StateSlice, b: &StateSlice) -> f64 {
    let f = grid.fibre_dim() as f64;
    // |u g|^2 = (f+1) u^2 pointwise; trace-free modes are unit cross-section
    // eigentensors
    let mut acc = KahanSum::new();
    acc.add((f + 1.0) * grid.inner_product(&a.u, &b.u));
    for (am, bm) in a.omega.iter().zip(&b.omega) {
        acc.add(grid.inner_product(am, bm));
    }
    acc.total()
}

fn state_slice_l2(grid: &RadialGrid, s: &StateSlice) -> f64 {
    slice_inner(grid, s, s).max(0.0).sqrt()
}

/// Orthogonal split `v = v_par + v_perp` along the supplied basis. The
/// basis must be orthonormal in the discrete weighted `L^2` inner product
/// (Gram defect <= 1e-10).
pub fn kernel_projection(
    grid: &RadialGrid,
    slice: &StateSlice,
    basis: &KernelBasis,
) -> Result<(StateSlice, StateSlice)> {
    for (i, e) in basis.elements.iter().enumerate() {
        for (j, e2) in basis.elements.iter().enumerate() {
            let g = slice_inner(grid, e, e2);
            let expected = if i == j { 1.0 } else { 0.0 };
            if (g - expected).abs() > 1e-10 {
                return Err(EdgeflowError::Basis(format!(
                    "Gram defect {:.3e} at pair ({i}, {j})",
                    (g - expected).abs()
                )));
            }
        }
    }
    let n = slice.u.len();
    let mut par = StateSlice {
        u: vec![0.0; n],
        omega: slice.omega.iter().map(|m| vec![0.0; m.len()]).collect(),
    };
    for e in &basis.elements {
        let c = slice_inner(grid, slice, e);
        for i in 0..n {
            par.u[i] += c * e.u[i];
        }
        for (m, em) in e.omega.iter().enumerate() {
            for i in 0..em.len() {
                par.omega[m][i] += c * em[i];
            }
        }
    }
    let mut perp = slice.clone();
    for i in 0..n {
        perp.u[i] -= par.u[i];
    }
    for m in 0..perp.omega.len() {
        for i in 0..perp.omega[m].len() {
            perp.omega[m][i] -= par.omega[m][i];
        }
    }
    Ok((par, perp))
}

/// Discrete residual of the mode operator `l_mu` on a basis element,
/// for auditing candidate kernel elements.
pub fn kernel_basis_residual(
    grid: &RadialGrid,
    mu: f64,
    fibre_dim: u32,
    field: &[f64],
) -> Result<f64> {
    let spec = ModeKernelSpec::new(mu, fibre_dim)?;
    let x = grid.nodes();
    let d1 = numeric::derivative_nonuniform(x, field);
    let d2 = numeric::second_derivative_nonuniform(x, field);
    let f = fibre_dim as f64;
    let shift = spec.mu() * spec.mu() - 0.25 * (f - 1.0) * (f - 1.0);
    let mut worst = 0.0_f64;
    // skip the first and last nodes, where one-sided stencils distort
    for i in 2..x.len().saturating_sub(2) {
        let l = -d2[i] - (f / x[i]) * d1[i] + shift / (x[i] * x[i]) * field[i];
        worst = worst.max(l.abs());
    }
    Ok(worst)
}

/// Least-squares exponential decay rate of a norm trajectory over a time
/// window. `Ok(None)` when the trajectory vanishes or the fit quality
/// `r^2` falls below 0.95.
pub fn decay_rate(times: &[f64], norms: &[f64], window: (f64, f64)) -> Result<Option<DecayFit>> {
    if times.len() != norms.len() {
        return Err(EdgeflowError::Fit("mismatched trajectory lengths".into()));
    }
    let mut ts = Vec::new();
    let mut ln = Vec::new();
    for (&t, &v) in times.iter().zip(norms) {
        if t >= window.0 && t <= window.1 && v > 1e-300 {
            ts.push(t);
            ln.push(v.ln());
        }
    }
    if ts.len() < 3 {
        return Ok(None);
    }
    let fit = numeric::fit_line(&ts, &ln)?;
    if fit.r2 < 0.95 {
        return Ok(None);
    }
    Ok(Some(DecayFit {
        rate: -fit.slope,
        r2: fit.r2,
    }))
}

/// Discrete weighted hybrid Holder norm of a radial space-time field:
/// `|x^{-gamma} v|_alpha + |x^{-gamma-alpha} v|_inf`, with the seminorm
/// sampled over strided node pairs at fixed time and strided time pairs at
/// fixed node, plus the edge-derivative families `{x d/dx, x^2 d/dt}` (and
/// the tangential surrogate `sqrt(lambda) |v|`) for `k >= 1`. A lower bound
/// of the continuum norm by construction.
pub fn holder_norm_field(
    grid: &RadialGrid,
    times: &[f64],
    field: &[Vec<f64>],
    gamma: f64,
    alpha: f64,
    k: usize,
    tangential_eigenvalue: Option<f64>,
) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(EdgeflowError::Domain(format!(
            "Holder exponent alpha must lie in (0,1), got {alpha}"
        )));
    }
    if k > 2 {
        return Err(EdgeflowError::Domain(format!(
            "derivative order k <= 2 supported, got {k}"
        )));
    }
    if field.len() != times.len() {
        return Err(EdgeflowError::Domain(
            "field has one slice per time point".into(),
        ));
    }
    let base = hybrid_norm(grid, times, field, gamma, alpha);
    if k == 0 {
        return Ok(base);
    }
    let x = grid.nodes();
    let nt = times.len();
    let radial: Vec<Vec<f64>> = field
        .iter()
        .map(|slice| {
            let d = numeric::derivative_nonuniform(x, slice);
            (0..x.len()).map(|i| x[i] * d[i]).collect()
        })
        .collect();
    let mut total = base + hybrid_norm(grid, times, &radial, gamma, alpha);
    if let Some(lambda) = tangential_eigenvalue {
        let tang: Vec<Vec<f64>> = field
            .iter()
            .map(|slice| slice.iter().map(|&v| lambda.abs().sqrt() * v).collect())
            .collect();
        total += hybrid_norm(grid, times, &tang, gamma, alpha);
    }
    if nt >= 3 {
        let mut tder = vec![vec![0.0; x.len()]; nt];
        for i in 0..x.len() {
            let series: Vec<f64> = (0..nt).map(|j| field[j][i]).collect();
            let d = numeric::derivative_nonuniform(times, &series);
            for j in 0..nt {
                tder[j][i] = x[i] * x[i] * d[j];
            }
        }
        total += hybrid_norm(grid, times, &tder, gamma, alpha);
    }
    if k == 2 {
        let radial2: Vec<Vec<f64>> = radial
            .iter()
            .map(|slice| {
                let d = numeric::derivative_nonuniform(x, slice);
                (0..x.len()).map(|i| x[i] * d[i]).collect()
            })
            .collect();
        total += hybrid_norm(grid, times, &radial2, gamma, alpha);
    }
    Ok(total)
}

fn hybrid_norm(grid: &RadialGrid, times: &[f64], field: &[Vec<f64>], gamma: f64, alpha: f64) -> f64 {
    let x = grid.nodes();
    let n = x.len();
    let nt = times.len();
    let weighted: Vec<Vec<f64>> = field
        .iter()
        .map(|slice| {
            (0..n)
                .map(|i| x[i].powf(-gamma) * slice[i])
                .collect::<Vec<f64>>()
        })
        .collect();
    let mut sup_w = 0.0_f64;
    let mut sup_hybrid = 0.0_f64;
    for j in 0..nt {
        for i in 0..n {
            sup_w = sup_w.max(weighted[j][i].abs());
            sup_hybrid = sup_hybrid.max(x[i].powf(-gamma - alpha) * field[j][i].abs());
        }
    }
    let mut semi = 0.0_f64;
    for j in 0..nt {
        let mut stride = 1;
        while stride < n {
            for i in 0..n - stride {
                let d = x[i + stride] - x[i];
                if d > 0.0 {
                    semi = semi.max((weighted[j][i + stride] - weighted[j][i]).abs() / d.powf(alpha));
                }
            }
            stride *= 2;
        }
    }
    for i in 0..n {
        let mut stride = 1;
        while stride < nt {
            for j in 0..nt - stride {
                let dt = times[j + stride] - times[j];
                if dt > 0.0 {
                    semi = semi
                        .max((weighted[j + stride][i] - weighted[j][i]).abs() / dt.powf(0.5 * alpha));
                }
            }
            stride *= 2;
        }
    }
    sup_w + semi + sup_hybrid
}
