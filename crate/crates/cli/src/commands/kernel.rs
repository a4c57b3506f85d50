//! `edgeflow kernel`: symmetry / closed-form / delta-limit / semigroup /
//! boundary-exponent suites for the mode heat kernel, with measured defects
//! and a CSV kernel table. Any tolerance violation exits with code 4 and
//! the failing case serialized in the report.

use crate::config::Config;
use crate::report;
use edgeflow_core::grid::RadialGrid;
use edgeflow_core::modeheat::{
    boundary_exponent, kernel_table_csv, mode_heat_kernel, mode_propagate, KernelTableRow,
    ModeKernelSpec,
};
use edgeflow_core::Result;
use serde::Serialize;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Serialize)]
struct CaseResult {
    name: String,
    measured: f64,
    tolerance: f64,
    passed: bool,
}

#[derive(Serialize)]
struct KernelBody {
    cases: Vec<CaseResult>,
    all_passed: bool,
    table_rows: usize,
}

fn push(cases: &mut Vec<CaseResult>, name: impl Into<String>, measured: f64, tolerance: f64) {
    let name = name.into();
    let passed = measured <= tolerance;
    println!(
        "kernel: {:<44} measured {measured:>12.4e}  tol {tolerance:>8.1e}  {}",
        name,
        if passed { "pass" } else { "FAIL" }
    );
    cases.push(CaseResult {
        name,
        measured,
        tolerance,
        passed,
    });
}

pub fn run(config: &Config, out: &Path, seed: u64) -> Result<i32> {
    let symmetry_tol = config.f64_or("symmetry_tol", 1e-12)?;
    let closedform_tol = config.f64_or("closedform_tol", 1e-10)?;
    let delta_tol = config.f64_or("delta_tol", 1e-3)?;
    let semigroup_tol = config.f64_or("semigroup_tol", 1e-4)?;
    let order_min = config.f64_or("semigroup_order_min", 1.8)?;
    let exponent_tol = config.f64_or("exponent_tol", 1e-2)?;
    let mu_list = config.f64_list("mu_list", &[0.5, 1.0, 2.0, 3.5])?;
    let f_list = config.f64_list("f_list", &[1.0, 2.0, 3.0])?;

    let mut cases = Vec::new();

    // symmetry battery
    let mut worst_sym = 0.0_f64;
    for &mu in &mu_list {
        for &ff in &f_list {
            let spec = ModeKernelSpec::new(mu, ff as u32)?;
            for &t in &[0.01, 0.2] {
                for &s in &[0.11, 0.7, 1.9] {
                    for &st in &[0.23, 1.3] {
                        let a = mode_heat_kernel(&spec, t, s, st)?;
                        let b = mode_heat_kernel(&spec, t, st, s)?;
                        if a > 0.0 {
                            worst_sym = worst_sym.max((a - b).abs() / a);
                        }
                    }
                }
            }
        }
    }
    push(&mut cases, "symmetry relative defect", worst_sym, symmetry_tol);

    // f=1, mu=1/2 closed form
    let spec_half = ModeKernelSpec::new(0.5, 1)?;
    let mut worst_cf = 0.0_f64;
    for &t in &[0.02, 0.1, 0.8] {
        for &s in &[0.1, 0.6, 1.4] {
            for &st in &[0.3, 1.0] {
                let k = mode_heat_kernel(&spec_half, t, s, st)?;
                let c = (s * st).powf(-0.5)
                    * (4.0 * PI * t).powf(-0.5)
                    * ((-(s - st) * (s - st) / (4.0 * t)).exp()
                        - (-(s + st) * (s + st) / (4.0 * t)).exp());
                worst_cf = worst_cf.max((k - c).abs() / c.abs().max(1e-300));
            }
        }
    }
    push(
        &mut cases,
        "f=1 mu=1/2 closed-form agreement",
        worst_cf,
        closedform_tol,
    );

    // delta limit at t = 1e-4
    {
        let grid = RadialGrid::graded(6000, 4.0, 3.0, 2)?;
        let spec = ModeKernelSpec::new(1.0, 2)?;
        let phi = |s: f64| (-((s - 2.0) / 0.8f64).powi(2)).exp();
        let mut acc = 0.0;
        for (&s, &w) in grid.nodes().iter().zip(grid.weights()) {
            acc += mode_heat_kernel(&spec, 1e-4, 2.0, s)? * phi(s) * w;
        }
        push(
            &mut cases,
            "delta-limit defect at t=1e-4",
            (acc - phi(2.0)).abs(),
            delta_tol,
        );
    }

    // semigroup defect and refinement order
    let semigroup = |n: usize| -> Result<f64> {
        let grid = RadialGrid::graded(n, 4.0, 3.0, 2)?;
        let spec = ModeKernelSpec::new(1.0, 2)?;
        let field: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|&s| (-((s - 1.2) / 0.25f64).powi(2)).exp())
            .collect();
        let once = mode_propagate(&spec, 0.05, &grid, &field)?;
        let twice = mode_propagate(&spec, 0.05, &grid, &once)?;
        let direct = mode_propagate(&spec, 0.10, &grid, &field)?;
        let sup = direct.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        Ok(twice
            .iter()
            .zip(&direct)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max)
            / sup)
    };
    let d200 = semigroup(200)?;
    let d400 = semigroup(400)?;
    let d800 = semigroup(800)?;
    push(&mut cases, "semigroup defect (400 nodes)", d400, semigroup_tol);
    let order = (d200 / d800).log2() / 2.0;
    // the order check is a lower bound, so record the shortfall
    push(
        &mut cases,
        "semigroup refinement order shortfall",
        (order_min - order).max(0.0),
        0.0,
    );

    // boundary exponents across the (mu, f) battery
    let mut worst_exp = 0.0_f64;
    for &mu in &mu_list {
        for &ff in &f_list {
            let spec = ModeKernelSpec::new(mu, ff as u32)?;
            let slope = boundary_exponent(&spec, 0.5, 1.0, (1e-4, 1e-3))?;
            let element = mu - 0.5 * (ff - 1.0);
            worst_exp = worst_exp.max((slope - element).abs());
        }
    }
    push(
        &mut cases,
        "boundary exponent vs indicial element",
        worst_exp,
        exponent_tol,
    );

    // kernel table export
    let table_t = config.f64_list("table_t", &[0.05, 0.2])?;
    let table_n = config.usize_or("table_samples", 6)?;
    let mut rows = Vec::new();
    for &mu in &mu_list {
        for &ff in &f_list {
            let spec = ModeKernelSpec::new(mu, ff as u32)?;
            for &t in &table_t {
                for i in 1..=table_n {
                    let s = 2.0 * i as f64 / table_n as f64;
                    for j in 1..=table_n {
                        let st = 2.0 * j as f64 / table_n as f64;
                        rows.push(KernelTableRow {
                            t,
                            s,
                            s_tilde: st,
                            mu,
                            f: ff as u32,
                            value: mode_heat_kernel(&spec, t, s, st)?,
                        });
                    }
                }
            }
        }
    }
    report::write_text(&out.join("kernel_table.csv"), &kernel_table_csv(&rows))?;

    let all_passed = cases.iter().all(|c| c.passed);
    let body = KernelBody {
        table_rows: rows.len(),
        all_passed,
        cases,
    };
    report::write_json(&out.join("kernel_report.json"), &config.raw, seed, body)?;
    if all_passed {
        Ok(0)
    } else {
        eprintln!("kernel: tolerance failure; failing cases serialized in kernel_report.json");
        Ok(4)
    }
}
