//! Property tests for the audit and window layers.

use edgeflow_core::indicial::{holder_window, indicial_element, sample_window};
use edgeflow_core::spectra::{
    check_tangential_stability, check_weak_tangential_stability, SpectrumKind, SpectrumRecord,
    SpectrumTable, Verdict,
};
use proptest::prelude::*;

fn scalar_table(f: u32, mut evs: Vec<f64>) -> SpectrumTable {
    evs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    evs.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut records = vec![SpectrumRecord {
        eigenvalue: 0.0,
        multiplicity: 1,
        kind: SpectrumKind::ScalarLaplacian,
    }];
    for e in evs.into_iter().filter(|&e| e > 1e-9) {
        records.push(SpectrumRecord {
            eigenvalue: e,
            multiplicity: 1,
            kind: SpectrumKind::ScalarLaplacian,
        });
    }
    SpectrumTable::new(f, records, "proptest").unwrap()
}

fn tt_table(f: u32, evs: &[f64]) -> SpectrumTable {
    let mut sorted: Vec<f64> = evs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let records = sorted
        .into_iter()
        .map(|e| SpectrumRecord {
            eigenvalue: e,
            multiplicity: 1,
            kind: SpectrumKind::EinsteinTt,
        })
        .collect();
    SpectrumTable::new(f, records, "proptest").unwrap()
}

proptest! {
    #[test]
    fn tangential_implies_weak(
        f in 3u32..=6,
        scalar_evs in prop::collection::vec(0.1f64..40.0, 1..8),
        tt_evs in prop::collection::vec(-2.0f64..20.0, 1..6),
    ) {
        let scalar = scalar_table(f, scalar_evs);
        let tt = tt_table(f, &tt_evs);
        let t = check_tangential_stability(&tt, &scalar, f).unwrap();
        let w = check_weak_tangential_stability(&tt, &scalar, f).unwrap();
        if t.tangential == Verdict::Holds {
            prop_assert_eq!(w.weak, Verdict::Holds);
            prop_assert!(t.u1.unwrap() > 0.0);
        }
    }

    #[test]
    fn verdict_invariant_under_multiplicity_split(
        f in 3u32..=5,
        ev in 0.5f64..30.0,
        mult in 2u64..6,
    ) {
        // one record of multiplicity m vs m records of multiplicity 1
        let merged = SpectrumTable::new(f, vec![
            SpectrumRecord { eigenvalue: 0.0, multiplicity: 1, kind: SpectrumKind::ScalarLaplacian },
            SpectrumRecord { eigenvalue: ev, multiplicity: mult, kind: SpectrumKind::ScalarLaplacian },
        ], "merged").unwrap();
        // splitting multiplicity within a kind keeps eigenvalues strictly
        // increasing only if we perturb infinitesimally; the audit must not
        // care about multiplicities at all, so compare against mult = 1
        let split = SpectrumTable::new(f, vec![
            SpectrumRecord { eigenvalue: 0.0, multiplicity: 1, kind: SpectrumKind::ScalarLaplacian },
            SpectrumRecord { eigenvalue: ev, multiplicity: 1, kind: SpectrumKind::ScalarLaplacian },
        ], "split").unwrap();
        let tt = tt_table(f, &[1.0]);
        let a = check_tangential_stability(&tt, &merged, f).unwrap();
        let b = check_tangential_stability(&tt, &split, f).unwrap();
        prop_assert_eq!(a.tangential, b.tangential);
        prop_assert_eq!(a.weak, b.weak);
        prop_assert_eq!(a.u1, b.u1);
    }

    #[test]
    fn indicial_inverse_identity(
        f in 1u32..=6,
        lambda in 0.0f64..200.0,
    ) {
        let e = indicial_element(lambda, f).unwrap();
        let back = e * e + (f as f64 - 1.0) * e;
        prop_assert!((back - lambda).abs() <= 1e-12 * lambda.max(1.0));
    }

    #[test]
    fn sampled_windows_are_sound(
        mu0 in 0.05f64..4.0,
        mu1 in 0.05f64..4.0,
        dim_b in 0u32..=2,
    ) {
        for (g0, g1, a) in sample_window(mu0, mu1, dim_b, 64) {
            let w = holder_window(mu0, mu1, dim_b, (g0, g1, a));
            prop_assert!(w.feasible, "binding: {:?}", w.binding);
        }
    }
}
