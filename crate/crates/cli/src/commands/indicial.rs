//! `edgeflow indicial`: index-set elements, minimal exponents, and Holder
//! window feasibility.

use crate::config::Config;
use crate::report;
use edgeflow_core::indicial::{
    flat_window, holder_window, index_set, sample_window, HolderWindow, IndicialProfile,
};
use edgeflow_core::spectra::SpectrumTable;
use edgeflow_core::{EdgeflowError, Result};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct IndicialBody {
    elements: Vec<ElementEntry>,
    mu0: Option<f64>,
    mu1: Option<f64>,
    mu_flat: Option<f64>,
    mu1_identification_certified: Option<bool>,
    window: Option<HolderWindow>,
    flat_window: Option<HolderWindow>,
    sampled_windows: Vec<(f64, f64, f64)>,
    sampled_all_recheck: bool,
}

#[derive(Serialize)]
struct ElementEntry {
    eigenvalue: f64,
    element: f64,
    kind: String,
}

pub fn run(config: &Config, out: &Path, seed: u64) -> Result<i32> {
    let f = config.u32_or("f", 0)?;
    if f == 0 {
        return Err(EdgeflowError::Validation(
            "config must set `f` (fibre dimension)".into(),
        ));
    }
    let path = config.path("spectrum").ok_or_else(|| {
        EdgeflowError::Validation("config must set `spectrum=<path>`".into())
    })?;
    let table = SpectrumTable::load(&path)?;
    let profile: IndicialProfile = index_set(&table, f)?;
    let perturbation_order = match config.get("perturbation_order") {
        Some(s) => Some(s.parse::<u32>().map_err(|e| {
            EdgeflowError::Validation(format!("bad perturbation_order: {e}"))
        })?),
        None => None,
    };
    let dim_b = config.u32_or("dim_b", 0)?;

    let window = match (config.get("gamma0"), config.get("gamma1"), config.get("alpha")) {
        (Some(_), Some(_), Some(_)) => {
            let g0 = config.f64_or("gamma0", 0.0)?;
            let g1 = config.f64_or("gamma1", 0.0)?;
            let a = config.f64_or("alpha", 0.0)?;
            let mu0 = profile.mu0.ok_or_else(|| {
                EdgeflowError::Validation(
                    "window check needs lichnerowicz-tracefree records for mu0".into(),
                )
            })?;
            let mu1 = profile.mu1.ok_or_else(|| {
                EdgeflowError::Validation("window check needs a nonzero scalar eigenvalue".into())
            })?;
            Some(holder_window(mu0, mu1, dim_b, (g0, g1, a)))
        }
        _ => None,
    };
    let flat = match (config.get("u"), config.get("gamma"), config.get("alpha_flat")) {
        (Some(_), Some(_), Some(_)) => {
            let u = config.f64_or("u", 0.0)?;
            let g = config.f64_or("gamma", 0.0)?;
            let a = config.f64_or("alpha_flat", 0.0)?;
            Some(flat_window(u, f, (g, a), dim_b)?)
        }
        _ => None,
    };

    let n_samples = config.usize_or("samples", 0)?;
    let (sampled, recheck) = match (profile.mu0, profile.mu1) {
        (Some(mu0), Some(mu1)) if n_samples > 0 => {
            let s = sample_window(mu0, mu1, dim_b, n_samples);
            let ok = s
                .iter()
                .all(|&(g0, g1, a)| holder_window(mu0, mu1, dim_b, (g0, g1, a)).feasible);
            (s, ok)
        }
        _ => (Vec::new(), true),
    };

    println!(
        "indicial: f={f} elements={} mu0={:?} mu1={:?} mu_flat={:?} samples={}",
        profile.elements.len(),
        profile.mu0,
        profile.mu1,
        profile.mu_flat,
        sampled.len()
    );

    let body = IndicialBody {
        elements: profile
            .elements
            .iter()
            .map(|e| ElementEntry {
                eigenvalue: e.eigenvalue,
                element: e.element,
                kind: e.kind.to_string(),
            })
            .collect(),
        mu0: profile.mu0,
        mu1: profile.mu1,
        mu_flat: profile.mu_flat,
        mu1_identification_certified: profile.mu1_certified(perturbation_order),
        window,
        flat_window: flat,
        sampled_windows: sampled,
        sampled_all_recheck: recheck,
    };
    report::write_json(&out.join("indicial_report.json"), &config.raw, seed, body)?;
    Ok(0)
}
