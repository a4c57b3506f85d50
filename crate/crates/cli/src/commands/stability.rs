//! `edgeflow stability`: tangential / weak tangential stability audits of
//! cross-section spectra.

use crate::config::Config;
use crate::report;
use edgeflow_core::spectra::{
    check_tangential_stability, check_weak_tangential_stability, sphere_scalar_spectrum,
    SpectrumTable, StabilityReport,
};
use edgeflow_core::{EdgeflowError, Result};
use serde::Serialize;
use std::path::Path;

#[derive(Serialize)]
struct StabilityBody {
    fibre_dim: u32,
    scalar_source: String,
    einstein_tt_source: String,
    tangential: StabilityReport,
    weak: StabilityReport,
    round_trip_verified: bool,
}

pub fn run(config: &Config, out: &Path, seed: u64) -> Result<i32> {
    let f = config.u32_or("f", 0)?;
    if f == 0 {
        return Err(EdgeflowError::Validation(
            "config must set `f` (fibre dimension)".into(),
        ));
    }
    let scalar = if let Some(path) = config.path("scalar_spectrum") {
        SpectrumTable::load(&path)?
    } else if let Some(k) = config.get("sphere_kmax") {
        let k_max: u32 = k
            .parse()
            .map_err(|e| EdgeflowError::Validation(format!("bad sphere_kmax: {e}")))?;
        sphere_scalar_spectrum(f, k_max)?
    } else {
        return Err(EdgeflowError::Validation(
            "config needs `scalar_spectrum=<path>` or `sphere_kmax=<k>`".into(),
        ));
    };
    // the trace-free table is opaque input; without one, clause 1 runs
    // vacuously over an empty einstein-tt record set
    let (einstein_tt, tt_source) = if let Some(path) = config.path("einstein_tt_spectrum") {
        let t = SpectrumTable::load(&path)?;
        (t, path.display().to_string())
    } else {
        (
            scalar.clone(),
            "not supplied; TT clause vacuous".to_string(),
        )
    };

    // save/load round trip of the ingested table
    let round_trip_verified = {
        let text = scalar.to_text();
        let back = SpectrumTable::parse(&text, "round-trip")?;
        back.to_text() == text
    };

    let tangential = check_tangential_stability(&einstein_tt, &scalar, f)?;
    let weak = check_weak_tangential_stability(&einstein_tt, &scalar, f)?;
    println!(
        "stability: f={f} tangential={:?} weak={:?} violations={}",
        tangential.tangential,
        weak.weak,
        tangential.violations.len()
    );

    let body = StabilityBody {
        fibre_dim: f,
        scalar_source: scalar.source().to_string(),
        einstein_tt_source: tt_source,
        tangential,
        weak,
        round_trip_verified,
    };
    report::write_json(&out.join("stability_report.json"), &config.raw, seed, body)?;
    Ok(0)
}
