//! `edgeflow appendix`: randomized audits of the mean-value bound and the
//! Holder-quotient constant, seeded for reproducibility.

use crate::config::Config;
use crate::report;
use edgeflow_core::meanvalue::{
    edge_mean_value_audit, holder_quotient_constant, mean_value_audit, AuditReport, ChartBox,
};
use edgeflow_core::{EdgeflowError, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct AppendixBody {
    n_odd: u32,
    interval: (f64, f64),
    quotient_constant: f64,
    quotient_constant_n1: f64,
    mean_value: AuditReport,
    edge: Option<AuditReport>,
}

pub fn run(config: &Config, out: &Path, seed: u64) -> Result<i32> {
    let n_odd = config.u32_or("n_odd", 3)?;
    let interval_list = config.f64_list("interval", &[0.0, 1.0])?;
    if interval_list.len() != 2 {
        return Err(EdgeflowError::Validation(
            "interval must be `lo,hi`".into(),
        ));
    }
    let interval = (interval_list[0], interval_list[1]);
    let samples = config.usize_or("samples", 10_000)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let quotient_constant = holder_quotient_constant(n_odd, interval)?;
    let quotient_constant_n1 = holder_quotient_constant(1, interval)?;
    let mean_value = mean_value_audit(&mut rng, samples, n_odd, interval)?;
    println!(
        "appendix: N={n_odd} C(N,K)={quotient_constant:.6} worst fitted C={:.6} bound holds: {}",
        mean_value.worst_fitted_c, mean_value.bound_holds_everywhere
    );

    let edge = if config.bool_or("edge_audit", true)? {
        let pairs = config.usize_or("edge_pairs", 1_000)?;
        let chart = ChartBox {
            x: (0.05, 1.0),
            y: (0.0, 0.5),
            z: (0.0, 1.5),
        };
        let field = |x: f64, _y: f64, z: f64| x.powf(0.7) * z.cos();
        let rep = edge_mean_value_audit(&mut rng, &field, pairs, n_odd, chart)?;
        println!(
            "appendix: edge audit over {pairs} pairs, worst fitted C = {:.6}",
            rep.worst_fitted_c
        );
        Some(rep)
    } else {
        None
    };

    let pass = mean_value.bound_holds_everywhere;
    let body = AppendixBody {
        n_odd,
        interval,
        quotient_constant,
        quotient_constant_n1,
        mean_value,
        edge,
    };
    report::write_json(&out.join("appendix_report.json"), &config.raw, seed, body)?;
    Ok(if pass { 0 } else { 4 })
}
