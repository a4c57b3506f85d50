//! `edgeflow flow`: short-time or flat-long-time Picard runs with
//! contraction, decay and positivity diagnostics. Exit code 3 reports
//! divergence (distinct from a crash).

use crate::config::Config;
use crate::report;
use edgeflow_core::flow::{FlowConfig, FlowMode, FlowReport, InitialData, TraceFreeMode};
use edgeflow_core::geometry::ConeMetric;
use edgeflow_core::grid::RadialGrid;
use edgeflow_core::indicial::holder_window;
use edgeflow_core::{EdgeflowError, FlowSolver, Result};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct FlowBody {
    mode: String,
    epsilon: f64,
    report: FlowReport,
}

fn parse_modes(spec: &str) -> Result<Vec<TraceFreeMode>> {
    let mut out = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        if tok.is_empty() {
            continue;
        }
        let (ev, diag) = match tok.strip_suffix(":diag") {
            Some(head) => (head, true),
            None => (tok, false),
        };
        let eigenvalue: f64 = ev
            .parse()
            .map_err(|e| EdgeflowError::Validation(format!("bad mode `{tok}`: {e}")))?;
        out.push(TraceFreeMode {
            eigenvalue,
            radial_diag: diag,
        });
    }
    if out.is_empty() {
        return Err(EdgeflowError::Validation("empty mode list".into()));
    }
    Ok(out)
}

pub fn run(config: &Config, out: &Path, seed: u64) -> Result<i32> {
    let f = config.u32_or("f", 1)?;
    let n = config.usize_or("grid_n", 160)?;
    let x_max = config.f64_or("x_max", 1.0)?;
    let grading = config.f64_or("grading", 3.0)?;
    let cone_slope = config.f64_or("cone_slope", 1.0)?;
    let grid = RadialGrid::graded(n, x_max, grading, f)?;
    let background = ConeMetric::exact_cone(f, grid, cone_slope)?;

    let modes = parse_modes(config.get("modes").unwrap_or("3.0:diag"))?;
    let mode_str = config.get("mode").unwrap_or("short-time").to_string();
    let mode = match mode_str.as_str() {
        "short-time" => FlowMode::ShortTime,
        "flat-long-time" => FlowMode::FlatLongTime {
            project_initial: config.bool_or("project_initial", false)?,
        },
        other => {
            return Err(EdgeflowError::Validation(format!(
                "mode must be short-time or flat-long-time, got `{other}`"
            )))
        }
    };

    let window = holder_window(
        config.f64_or("window_mu0", 1.5)?,
        config.f64_or("window_mu1", 1.5)?,
        config.u32_or("dim_b", 0)?,
        (
            config.f64_or("gamma0", 0.4)?,
            config.f64_or("gamma1", 0.4)?,
            config.f64_or("alpha", 0.3)?,
        ),
    );

    let flow_config = FlowConfig {
        background,
        modes: modes.clone(),
        t_max: config.f64_or("t_max", 0.3)?,
        n_time: config.usize_or("n_time", 12)?,
        window,
        holder_k: config.usize_or("holder_k", 1)?,
        mode,
        tol: config.f64_or("tol", 1e-10)?,
        max_iters: config.usize_or("max_iters", 20)?,
        dirichlet_cut: config.bool_or("dirichlet", true)?,
    };
    let solver = FlowSolver::new(flow_config)?;

    // initial datum: epsilon-scaled bump (flat-long-time) or zero (short-time)
    let epsilon = config.f64_or("epsilon", 1e-3)?;
    let nodes = solver.grid().nodes().to_vec();
    let mut initial = InitialData::zero(modes.len(), nodes.len());
    if matches!(solver.config().mode, FlowMode::FlatLongTime { .. }) {
        let c = 0.5 * x_max;
        let w = 0.125 * x_max;
        for (i, &x) in nodes.iter().enumerate() {
            initial.u0[i] = epsilon * (-((x - c) / w).powi(2)).exp();
            for m in 0..modes.len() {
                initial.omega0[m][i] = 0.5 * epsilon * (-((x - c) / w).powi(2)).exp();
            }
        }
    }

    let (state, flow_report) = solver.run(&initial, None)?;
    let diverged = flow_report.diverged;
    println!(
        "flow: mode={mode_str} iterations={} converged={} diverged={} positivity={}",
        flow_report.iterations,
        flow_report.converged,
        diverged,
        flow_report.positivity_preserved
    );
    if let Some(fit) = &flow_report.decay_fit {
        println!(
            "flow: decay rate {:.4} (r2 {:.4}) vs lambda0 {:.4}",
            fit.rate, fit.r2, flow_report.lambda0
        );
    }

    // trajectory CSVs: residuals per iteration and Holder norm over time
    let mut traj = String::from("t,holder_norm,curvature_bound\n");
    for (j, &t) in state.times.iter().enumerate() {
        traj.push_str(&format!(
            "{},{},{}\n",
            t, flow_report.holder_trajectory[j], flow_report.curvature_bound_trajectory[j]
        ));
    }
    report::write_text(&out.join("flow_trajectory.csv"), &traj)?;
    let mut resid = String::from("iteration,residual\n");
    for (k, r) in flow_report.residual_history.iter().enumerate() {
        resid.push_str(&format!("{},{}\n", k + 1, r));
    }
    report::write_text(&out.join("flow_residuals.csv"), &resid)?;
    // final profiles: x, u, omega_m at the last time
    let last = state.n_times() - 1;
    let mut prof = String::from("x,u");
    for m in 0..state.n_modes() {
        prof.push_str(&format!(",omega{m}"));
    }
    prof.push('\n');
    for (i, &x) in nodes.iter().enumerate() {
        prof.push_str(&format!("{},{}", x, state.u[last][i]));
        for m in 0..state.n_modes() {
            prof.push_str(&format!(",{}", state.omega[m][last][i]));
        }
        prof.push('\n');
    }
    report::write_text(&out.join("flow_final_profiles.csv"), &prof)?;

    let body = FlowBody {
        mode: mode_str,
        epsilon,
        report: flow_report,
    };
    report::write_json(&out.join("flow_report.json"), &config.raw, seed, body)?;
    Ok(if diverged { 3 } else { 0 })
}
