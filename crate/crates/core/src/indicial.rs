//! Index sets of the model heat kernel at the side faces, minimal exponents,
//! and feasible Holder-exponent windows.
//!
//! Each tangential eigenvalue `lambda` contributes the indicial element
//! `sqrt(lambda + ((f-1)/2)^2) - (f-1)/2`. Minimal elements `mu0` (trace-free
//! operator) and `mu1` (nonzero scalar spectrum) bound the admissible weights
//! `gamma0, gamma1` and the Holder exponent `alpha`.

use crate::error::{EdgeflowError, Result};
use crate::spectra::{SpectrumKind, SpectrumTable};
use serde::Serialize;

/// `sqrt(lambda + ((f-1)/2)^2) - (f-1)/2`, defined for
/// `lambda >= -((f-1)/2)^2`.
pub fn indicial_element(lambda: f64, fibre_dim: u32) -> Result<f64> {
    let half = 0.5 * (fibre_dim as f64 - 1.0);
    let disc = lambda + half * half;
    if disc < 0.0 {
        return Err(EdgeflowError::Domain(format!(
            "eigenvalue {lambda} below -((f-1)/2)^2 = {}; indicial root is complex",
            -half * half
        )));
    }
    Ok(disc.sqrt() - half)
}

/// Inverse of [`indicial_element`]: `lambda = e^2 + (f-1) e`.
pub fn element_to_eigenvalue(element: f64, fibre_dim: u32) -> f64 {
    element * element + (fibre_dim as f64 - 1.0) * element
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct IndicialElement {
    pub eigenvalue: f64,
    pub element: f64,
    pub kind: SpectrumKind,
}

/// Index-set elements with the minimal exponents populated from the
/// appropriate spectrum kinds.
#[derive(Debug, Clone, Serialize)]
pub struct IndicialProfile {
    pub fibre_dim: u32,
    /// One element per record, sorted ascending by element.
    pub elements: Vec<IndicialElement>,
    /// Minimal element of the trace-free index set (from the
    /// `lichnerowicz-tracefree` kind), when supplied.
    pub mu0: Option<f64>,
    /// Minimal nonzero element of the scalar index set.
    pub mu1: Option<f64>,
    /// The single exponent of the weak/flat setting, from the combined
    /// nonzero spectrum of both tangential operators.
    pub mu_flat: Option<f64>,
}

impl IndicialProfile {
    /// Whether `mu1` is certified to be the minimal nonzero element of the
    /// full scalar index set `E' + N_0`. Unconditional for `mu1 <= 1`;
    /// otherwise requires the metric perturbation order `N >= mu1`.
    pub fn mu1_certified(&self, perturbation_order: Option<u32>) -> Option<bool> {
        self.mu1.map(|mu1| {
            mu1 <= 1.0 || perturbation_order.map_or(false, |n| n as f64 >= mu1)
        })
    }
}

pub fn index_set(spectrum: &SpectrumTable, fibre_dim: u32) -> Result<IndicialProfile> {
    if spectrum.fibre_dim() != fibre_dim {
        return Err(EdgeflowError::Validation(format!(
            "spectrum fibre dimension {} does not match requested f = {fibre_dim}",
            spectrum.fibre_dim()
        )));
    }
    let mut elements = Vec::with_capacity(spectrum.records().len());
    for r in spectrum.records() {
        elements.push(IndicialElement {
            eigenvalue: r.eigenvalue,
            element: indicial_element(r.eigenvalue, fibre_dim)?,
            kind: r.kind,
        });
    }
    elements.sort_by(|a, b| a.element.partial_cmp(&b.element).unwrap());

    let min_of = |kind: SpectrumKind, nonzero: bool| -> Option<f64> {
        elements
            .iter()
            .filter(|e| e.kind == kind && (!nonzero || e.eigenvalue != 0.0))
            .map(|e| e.element)
            .fold(None, |m, e| Some(m.map_or(e, |m: f64| m.min(e))))
    };
    let mu0 = min_of(SpectrumKind::LichnerowiczTracefree, false);
    let mu1 = min_of(SpectrumKind::ScalarLaplacian, true);
    let mu_flat = match (
        min_of(SpectrumKind::LichnerowiczTracefree, true),
        min_of(SpectrumKind::ScalarLaplacian, true),
    ) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    Ok(IndicialProfile {
        fibre_dim,
        elements,
        mu0,
        mu1,
        mu_flat,
    })
}

/// A candidate exponent tuple with its feasibility status. For the
/// two-weight window the tuple is `(gamma0, gamma1, alpha)`; the flat window
/// stores its single weight in both `gamma0` and `gamma1`.
#[derive(Debug, Clone, Serialize)]
pub struct HolderWindow {
    pub gamma0: f64,
    pub gamma1: f64,
    pub alpha: f64,
    pub dim_b: u32,
    pub feasible: bool,
    /// Violated inequalities, by name.
    pub binding: Vec<String>,
    pub flat: bool,
}

/// Checks the candidate `(gamma0, gamma1, alpha)` against the exponent
/// inequalities for minimal elements `(mu0, mu1)`:
/// `gamma0 in (0, mu0)`, `gamma1 in (0, mu1)`, `gamma0 <= 2 gamma1`,
/// `gamma1 <= gamma0`, `alpha in (0, mu0-gamma0) cap (0, mu1-gamma1)`,
/// and for `dim B > 0` additionally `gamma0 <= 2 min(1, gamma1)`,
/// `gamma1 <= 2`.
pub fn holder_window(
    mu0: f64,
    mu1: f64,
    dim_b: u32,
    candidate: (f64, f64, f64),
) -> HolderWindow {
    holder_window_with_alpha_mode(mu0, mu1, dim_b, candidate, false)
}

/// As [`holder_window`]; when `alpha_reciprocal_odd` is set, `alpha` must in
/// addition be of the form `1/N` for an odd integer `N`.
pub fn holder_window_with_alpha_mode(
    mu0: f64,
    mu1: f64,
    dim_b: u32,
    candidate: (f64, f64, f64),
    alpha_reciprocal_odd: bool,
) -> HolderWindow {
    let (gamma0, gamma1, alpha) = candidate;
    let mut binding = Vec::new();
    if !(gamma0 > 0.0 && gamma0 < mu0) {
        binding.push("gamma0 in (0, mu0)".to_string());
    }
    if !(gamma1 > 0.0 && gamma1 < mu1) {
        binding.push("gamma1 in (0, mu1)".to_string());
    }
    if !(gamma0 <= 2.0 * gamma1) {
        binding.push("gamma0 <= 2*gamma1".to_string());
    }
    if !(gamma1 <= gamma0) {
        binding.push("gamma1 <= gamma0".to_string());
    }
    if !(alpha > 0.0 && alpha < mu0 - gamma0) {
        binding.push("alpha in (0, mu0 - gamma0)".to_string());
    }
    if !(alpha > 0.0 && alpha < mu1 - gamma1) {
        binding.push("alpha in (0, mu1 - gamma1)".to_string());
    }
    if dim_b > 0 {
        if !(gamma0 <= 2.0 * 1.0_f64.min(gamma1)) {
            binding.push("gamma0 <= 2*min(1, gamma1)".to_string());
        }
        if !(gamma1 <= 2.0) {
            binding.push("gamma1 <= 2".to_string());
        }
    }
    if alpha_reciprocal_odd && !is_reciprocal_of_odd(alpha) {
        binding.push("alpha = 1/N with N odd".to_string());
    }
    HolderWindow {
        gamma0,
        gamma1,
        alpha,
        dim_b,
        feasible: binding.is_empty(),
        binding,
        flat: false,
    }
}

fn is_reciprocal_of_odd(alpha: f64) -> bool {
    if !(alpha > 0.0) {
        return false;
    }
    let n = (1.0 / alpha).round();
    n > 0.0 && (n as u64) % 2 == 1 && (1.0 / alpha - n).abs() <= 1e-9 * n
}

/// Flat-setting window: `mu` is computed from the weak stability bound `u`,
/// and the candidate `(gamma, alpha)` must satisfy `gamma in (0, mu)`,
/// `alpha in (0, mu - gamma) cap (0, 1)`, and `gamma <= 2` when `dim B > 0`.
pub fn flat_window(
    u: f64,
    fibre_dim: u32,
    candidate: (f64, f64),
    dim_b: u32,
) -> Result<HolderWindow> {
    if u < 0.0 {
        return Err(EdgeflowError::Domain(format!(
            "weak stability bound u must be >= 0, got {u}"
        )));
    }
    let mu = indicial_element(u, fibre_dim)?;
    let (gamma, alpha) = candidate;
    let mut binding = Vec::new();
    if !(gamma > 0.0 && gamma < mu) {
        binding.push("gamma in (0, mu)".to_string());
    }
    if !(alpha > 0.0 && alpha < mu - gamma) {
        binding.push("alpha in (0, mu - gamma)".to_string());
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        binding.push("alpha in (0, 1)".to_string());
    }
    if dim_b > 0 && !(gamma <= 2.0) {
        binding.push("gamma <= 2".to_string());
    }
    Ok(HolderWindow {
        gamma0: gamma,
        gamma1: gamma,
        alpha,
        dim_b,
        feasible: binding.is_empty(),
        binding,
        flat: true,
    })
}

/// Deterministic grid search over the feasibility polytope. Returns at most
/// `n` tuples, every one of which passes [`holder_window`]; empty when the
/// region is empty.
pub fn sample_window(mu0: f64, mu1: f64, dim_b: u32, n: usize) -> Vec<(f64, f64, f64)> {
    let mut out = Vec::new();
    if n == 0 || !(mu0 > 0.0) || !(mu1 > 0.0) {
        return out;
    }
    let m = ((n as f64).cbrt().ceil() as usize).max(2);
    let g1_cap = if dim_b > 0 { mu1.min(2.0) } else { mu1 };
    'outer: for i in 0..m {
        let gamma1 = g1_cap * (i as f64 + 0.5) / m as f64;
        // gamma0 ranges over [gamma1, min(2 gamma1, mu0^-, dim B caps)]
        let mut g0_hi = (2.0 * gamma1).min(mu0 * (1.0 - 1e-12));
        if dim_b > 0 {
            g0_hi = g0_hi.min(2.0 * 1.0_f64.min(gamma1));
        }
        if g0_hi < gamma1 {
            continue;
        }
        for j in 0..m {
            let gamma0 = gamma1 + (g0_hi - gamma1) * j as f64 / (m as f64 - 1.0);
            let alpha_hi = (mu0 - gamma0).min(mu1 - gamma1);
            if alpha_hi <= 0.0 {
                continue;
            }
            for l in 0..m {
                let alpha = alpha_hi * (l as f64 + 0.5) / m as f64;
                let w = holder_window(mu0, mu1, dim_b, (gamma0, gamma1, alpha));
                if w.feasible {
                    out.push((gamma0, gamma1, alpha));
                    if out.len() >= n {
                        break 'outer;
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{SpectrumRecord, SpectrumTable};

    #[test]
    fn element_examples() {
        // lambda = 0 maps to 0 for every f
        for f in 1..=5 {
            assert_eq!(indicial_element(0.0, f).unwrap(), 0.0);
        }
        // f=3, lambda=3: sqrt(3+1) - 1 = 1
        assert!((indicial_element(3.0, 3).unwrap() - 1.0).abs() < 1e-15);
        // f=2, lambda=4: sqrt(17)/2 - 1/2
        let e = indicial_element(4.0, 2).unwrap();
        assert!((e - (17.0_f64.sqrt() / 2.0 - 0.5)).abs() < 1e-13);
        assert!((e - 1.561_552_812_808_830_3).abs() < 1e-12);
    }

    #[test]
    fn element_below_bound_is_domain_error() {
        let err = indicial_element(-1.01, 3).unwrap_err();
        assert!(err.to_string().contains("-1.01"));
    }

    #[test]
    fn inverse_identity() {
        for f in 1..=4u32 {
            for i in 0..50 {
                let lambda = 0.3 * i as f64;
                let e = indicial_element(lambda, f).unwrap();
                let back = element_to_eigenvalue(e, f);
                assert!(
                    (back - lambda).abs() <= 1e-12 * lambda.max(1.0),
                    "f={f} lambda={lambda}"
                );
            }
        }
    }

    #[test]
    fn element_monotone_in_lambda_and_f() {
        for f in 1..=4u32 {
            let mut prev = -1.0;
            for i in 0..40 {
                let e = indicial_element(0.5 * i as f64, f).unwrap();
                assert!(e > prev);
                prev = e;
            }
        }
        for i in 1..40 {
            let lambda = 0.5 * i as f64;
            let mut prev = f64::INFINITY;
            for f in 1..=6u32 {
                let e = indicial_element(lambda, f).unwrap();
                assert!(e < prev, "element not decreasing in f at lambda={lambda}");
                prev = e;
            }
        }
    }

    #[test]
    fn profile_populates_minimal_elements() {
        let table = SpectrumTable::new(
            3,
            vec![
                SpectrumRecord {
                    eigenvalue: 0.0,
                    multiplicity: 1,
                    kind: SpectrumKind::ScalarLaplacian,
                },
                SpectrumRecord {
                    eigenvalue: 3.0,
                    multiplicity: 4,
                    kind: SpectrumKind::ScalarLaplacian,
                },
                SpectrumRecord {
                    eigenvalue: 2.0,
                    multiplicity: 1,
                    kind: SpectrumKind::LichnerowiczTracefree,
                },
            ],
            "test",
        )
        .unwrap();
        let p = index_set(&table, 3).unwrap();
        assert!((p.mu1.unwrap() - 1.0).abs() < 1e-14);
        assert!((p.mu0.unwrap() - (3.0_f64.sqrt() - 1.0)).abs() < 1e-14);
        assert!((p.mu_flat.unwrap() - p.mu0.unwrap()).abs() < 1e-14);
        assert!(p.elements.windows(2).all(|w| w[0].element <= w[1].element));
        // mu1 = 1 <= 1 is unconditionally certified
        assert_eq!(p.mu1_certified(None), Some(true));
    }

    #[test]
    fn mu1_certification_needs_order_above_one() {
        let table = SpectrumTable::new(
            3,
            vec![
                SpectrumRecord {
                    eigenvalue: 0.0,
                    multiplicity: 1,
                    kind: SpectrumKind::ScalarLaplacian,
                },
                SpectrumRecord {
                    eigenvalue: 8.0,
                    multiplicity: 1,
                    kind: SpectrumKind::ScalarLaplacian,
                },
            ],
            "test",
        )
        .unwrap();
        let p = index_set(&table, 3).unwrap();
        // mu1 = 2 > 1
        assert!((p.mu1.unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(p.mu1_certified(None), Some(false));
        assert_eq!(p.mu1_certified(Some(1)), Some(false));
        assert_eq!(p.mu1_certified(Some(2)), Some(true));
    }

    #[test]
    fn window_example_feasible() {
        let w = holder_window(2.0, 1.5, 1, (1.0, 1.0, 0.25));
        assert!(w.feasible, "binding: {:?}", w.binding);
    }

    #[test]
    fn window_infeasible_for_nonpositive_mu0() {
        for alpha in [0.1, 0.5] {
            let w = holder_window(0.0, 1.0, 0, (0.1, 0.1, alpha));
            assert!(!w.feasible);
            assert!(w.binding.iter().any(|b| b == "gamma0 in (0, mu0)"));
        }
    }

    #[test]
    fn window_ordering_violation_named() {
        let w = holder_window(2.0, 2.0, 0, (0.5, 0.8, 0.1));
        assert!(!w.feasible);
        assert!(w.binding.iter().any(|b| b == "gamma1 <= gamma0"));
    }

    #[test]
    fn alpha_reciprocal_odd_mode() {
        let w = holder_window_with_alpha_mode(2.0, 2.0, 0, (0.5, 0.5, 1.0 / 3.0), true);
        assert!(w.feasible, "{:?}", w.binding);
        let w = holder_window_with_alpha_mode(2.0, 2.0, 0, (0.5, 0.5, 0.25), true);
        assert!(!w.feasible);
        assert!(w.binding.iter().any(|b| b.contains("odd")));
    }

    #[test]
    fn flat_window_examples() {
        // u = 0: mu = 0, everything infeasible
        let w = flat_window(0.0, 3, (0.1, 0.05), 0).unwrap();
        assert!(!w.feasible);
        // f=3, u=3: mu = 1, (0.5, 0.25) feasible
        let w = flat_window(3.0, 3, (0.5, 0.25), 0).unwrap();
        assert!(w.feasible, "{:?}", w.binding);
        // f=2, u=4: mu = sqrt(17)/2 - 1/2; 1.5 feasible with small alpha, 1.6 not
        let w = flat_window(4.0, 2, (1.5, 0.05), 0).unwrap();
        assert!(w.feasible, "{:?}", w.binding);
        let w = flat_window(4.0, 2, (1.6, 0.05), 0).unwrap();
        assert!(!w.feasible);
    }

    #[test]
    fn flat_window_rejects_negative_u() {
        assert!(flat_window(-0.5, 3, (0.1, 0.05), 0).is_err());
    }

    #[test]
    fn sample_window_soundness_and_edge_cases() {
        assert!(sample_window(0.0, 0.0, 0, 100).is_empty());
        assert!(sample_window(2.0, 2.0, 0, 0).is_empty());
        for &(mu0, mu1, dim_b) in &[
            (2.0, 2.0, 0u32),
            (0.7, 1.2, 0),
            (3.0, 0.4, 1),
            (1.5, 2.5, 1),
            (0.05, 0.05, 0),
        ] {
            let samples = sample_window(mu0, mu1, dim_b, 200);
            assert!(
                !samples.is_empty(),
                "region (mu0={mu0}, mu1={mu1}, dimB={dim_b}) should be feasible"
            );
            assert!(samples.len() <= 200);
            for &(g0, g1, a) in &samples {
                let w = holder_window(mu0, mu1, dim_b, (g0, g1, a));
                assert!(w.feasible, "emitted tuple fails recheck: {:?}", w.binding);
            }
        }
    }
}
