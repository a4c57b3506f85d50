//! Cross-section spectral data and the tangential / weak tangential
//! stability audits.
//!
//! Tangential stability of a compact Einstein cross-section `(F, g_F)` of
//! dimension `f >= 3` with Einstein constant `f - 1` holds iff the Einstein
//! operator on TT-tensors is strictly positive and the nonzero scalar
//! spectrum avoids the half-open interval `(f, 2(f+1)]`. The weak variant
//! allows zero TT-eigenvalues and uses the open interval `(f, 2(f+1))`.
//! Spectra of the trace-free tangential operator itself are accepted as
//! opaque input data under the `lichnerowicz-tracefree` kind.

use crate::error::{EdgeflowError, Result};
use serde::Serialize;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SpectrumKind {
    #[serde(rename = "scalar-laplacian")]
    ScalarLaplacian,
    #[serde(rename = "einstein-tt")]
    EinsteinTt,
    #[serde(rename = "lichnerowicz-tracefree")]
    LichnerowiczTracefree,
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::ScalarLaplacian => "scalar-laplacian",
            Self::EinsteinTt => "einstein-tt",
            Self::LichnerowiczTracefree => "lichnerowicz-tracefree",
        };
        f.write_str(s)
    }
}

impl FromStr for SpectrumKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "scalar-laplacian" => Ok(Self::ScalarLaplacian),
            "einstein-tt" => Ok(Self::EinsteinTt),
            "lichnerowicz-tracefree" => Ok(Self::LichnerowiczTracefree),
            other => Err(format!("unknown spectrum kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SpectrumRecord {
    pub eigenvalue: f64,
    pub multiplicity: u64,
    pub kind: SpectrumKind,
}

/// Eigenvalue/multiplicity records for tangential operators on the
/// cross-section, grouped by kind.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumTable {
    fibre_dim: u32,
    records: Vec<SpectrumRecord>,
    source: String,
}

impl SpectrumTable {
    pub fn new(fibre_dim: u32, records: Vec<SpectrumRecord>, source: impl Into<String>) -> Result<Self> {
        let table = Self {
            fibre_dim,
            records,
            source: source.into(),
        };
        table.validate()?;
        Ok(table)
    }

    fn validate(&self) -> Result<()> {
        if self.fibre_dim == 0 {
            return Err(EdgeflowError::Validation(
                "fibre dimension must be a positive integer".into(),
            ));
        }
        if self.records.is_empty() {
            return Err(EdgeflowError::Validation(
                "empty spectrum: missing zero eigenvalue of the scalar Laplacian".into(),
            ));
        }
        let mut prev: Option<(SpectrumKind, f64)> = None;
        for r in &self.records {
            if !r.eigenvalue.is_finite() {
                return Err(EdgeflowError::Validation(format!(
                    "non-finite eigenvalue in kind {}",
                    r.kind
                )));
            }
            if r.multiplicity == 0 {
                return Err(EdgeflowError::Validation(format!(
                    "multiplicity 0 for eigenvalue {} in kind {}",
                    r.eigenvalue, r.kind
                )));
            }
            if let Some((k, e)) = prev {
                if k == r.kind && r.eigenvalue <= e {
                    return Err(EdgeflowError::Validation(format!(
                        "eigenvalues must be strictly increasing within kind {}: {} after {}",
                        r.kind, r.eigenvalue, e
                    )));
                }
            }
            prev = Some((r.kind, r.eigenvalue));
        }
        let scalars: Vec<&SpectrumRecord> = self
            .records
            .iter()
            .filter(|r| r.kind == SpectrumKind::ScalarLaplacian)
            .collect();
        if !scalars.is_empty() && scalars[0].eigenvalue != 0.0 {
            return Err(EdgeflowError::Validation(
                "scalar-laplacian spectrum must contain eigenvalue 0 (constants)".into(),
            ));
        }
        Ok(())
    }

    pub fn fibre_dim(&self) -> u32 {
        self.fibre_dim
    }

    pub fn records(&self) -> &[SpectrumRecord] {
        &self.records
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn eigenvalues(&self, kind: SpectrumKind) -> impl Iterator<Item = &SpectrumRecord> {
        self.records.iter().filter(move |r| r.kind == kind)
    }

    pub fn has_kind(&self, kind: SpectrumKind) -> bool {
        self.records.iter().any(|r| r.kind == kind)
    }

    pub fn min_eigenvalue(&self, kind: SpectrumKind) -> Option<f64> {
        self.eigenvalues(kind)
            .map(|r| r.eigenvalue)
            .fold(None, |m, e| Some(m.map_or(e, |m: f64| m.min(e))))
    }

    pub fn min_nonzero_eigenvalue(&self, kind: SpectrumKind) -> Option<f64> {
        self.eigenvalues(kind)
            .map(|r| r.eigenvalue)
            .filter(|&e| e != 0.0)
            .fold(None, |m, e| Some(m.map_or(e, |m: f64| m.min(e))))
    }

    /// Line-oriented text form: header, then one `<eigenvalue> <multiplicity> <kind>`
    /// record per line. Floats are formatted shortest-round-trip, so
    /// save/load round-trips bit-exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("fibre_dimension={}\n", self.fibre_dim));
        for r in &self.records {
            out.push_str(&format!("{} {} {}\n", r.eigenvalue, r.multiplicity, r.kind));
        }
        out
    }

    pub fn parse(text: &str, source: impl Into<String>) -> Result<Self> {
        let mut fibre_dim: Option<u32> = None;
        let mut records = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("fibre_dimension=") {
                let f = rest.trim().parse::<u32>().map_err(|e| EdgeflowError::Parse {
                    line: line_no,
                    message: format!("bad fibre_dimension `{rest}`: {e}"),
                })?;
                fibre_dim = Some(f);
                continue;
            }
            let mut parts = line.split_whitespace();
            let ev = parts
                .next()
                .ok_or_else(|| EdgeflowError::Parse {
                    line: line_no,
                    message: "missing eigenvalue".into(),
                })?
                .parse::<f64>()
                .map_err(|e| EdgeflowError::Parse {
                    line: line_no,
                    message: format!("bad eigenvalue: {e}"),
                })?;
            let mult = parts
                .next()
                .ok_or_else(|| EdgeflowError::Parse {
                    line: line_no,
                    message: "missing multiplicity".into(),
                })?
                .parse::<u64>()
                .map_err(|e| EdgeflowError::Parse {
                    line: line_no,
                    message: format!("bad multiplicity: {e}"),
                })?;
            let kind = parts
                .next()
                .ok_or_else(|| EdgeflowError::Parse {
                    line: line_no,
                    message: "missing kind".into(),
                })?
                .parse::<SpectrumKind>()
                .map_err(|e| EdgeflowError::Parse {
                    line: line_no,
                    message: e,
                })?;
            if parts.next().is_some() {
                return Err(EdgeflowError::Parse {
                    line: line_no,
                    message: "trailing tokens after record".into(),
                });
            }
            records.push(SpectrumRecord {
                eigenvalue: ev,
                multiplicity: mult,
                kind,
            });
        }
        let fibre_dim = fibre_dim.ok_or_else(|| EdgeflowError::Validation(
            "missing fibre_dimension header".into(),
        ))?;
        Self::new(fibre_dim, records, source)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path.display().to_string())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Scalar Laplacian spectrum of the unit round sphere `S^f`: eigenvalues
/// `k (k + f - 1)` with the standard multiplicities
/// `binom(f+k, k) - binom(f+k-2, k-2)`.
pub fn sphere_scalar_spectrum(fibre_dim: u32, k_max: u32) -> Result<SpectrumTable> {
    if fibre_dim == 0 || k_max == 0 {
        return Err(EdgeflowError::Domain(
            "sphere spectrum needs f >= 1 and k_max >= 1".into(),
        ));
    }
    let f = fibre_dim as u64;
    let records = (0..=k_max as u64)
        .map(|k| SpectrumRecord {
            eigenvalue: (k * (k + f - 1)) as f64,
            multiplicity: sphere_multiplicity(f, k),
            kind: SpectrumKind::ScalarLaplacian,
        })
        .collect();
    SpectrumTable::new(
        fibre_dim,
        records,
        format!("unit round sphere S^{fibre_dim}, k <= {k_max}"),
    )
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

fn sphere_multiplicity(f: u64, k: u64) -> u64 {
    if k == 0 {
        return 1;
    }
    let a = binomial(f + k, k);
    let b = if k >= 2 { binomial(f + k - 2, k - 2) } else { 0 };
    a - b
}

/// Three-valued audit verdict. `OutsideHypothesis` is reported when the
/// characterization theorem's hypothesis `f >= 3` fails; no stability claim
/// is made in that case.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    OutsideHypothesis,
}

#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub eigenvalue: f64,
    pub rule: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// min Spec of the trace-free tangential operator, when supplied.
    pub u0: Option<f64>,
    /// min of the nonzero scalar spectrum.
    pub u1: Option<f64>,
    /// min over the nonzero spectra of both tangential operators, when the
    /// trace-free table is supplied.
    pub u: Option<f64>,
    pub tangential: Verdict,
    pub weak: Verdict,
    pub violations: Vec<Violation>,
}

fn audit(
    einstein_tt: &SpectrumTable,
    scalar: &SpectrumTable,
    fibre_dim: u32,
) -> Result<StabilityReport> {
    for t in [einstein_tt, scalar] {
        if t.fibre_dim() != fibre_dim {
            return Err(EdgeflowError::Validation(format!(
                "table fibre dimension {} does not match requested f = {fibre_dim}",
                t.fibre_dim()
            )));
        }
    }
    if !scalar.has_kind(SpectrumKind::ScalarLaplacian) {
        return Err(EdgeflowError::Validation(
            "scalar table carries no scalar-laplacian records".into(),
        ));
    }

    let f = fibre_dim as f64;
    let mut violations = Vec::new();

    let mut tt_strict = true;
    let mut tt_nonneg = true;
    for r in einstein_tt.eigenvalues(SpectrumKind::EinsteinTt) {
        if r.eigenvalue <= 0.0 {
            tt_strict = false;
            violations.push(Violation {
                eigenvalue: r.eigenvalue,
                rule: "einstein-tt nonpositive".into(),
            });
        }
        if r.eigenvalue < 0.0 {
            tt_nonneg = false;
            violations.push(Violation {
                eigenvalue: r.eigenvalue,
                rule: "einstein-tt negative".into(),
            });
        }
    }

    let upper = 2.0 * (f + 1.0);
    let mut closed_clean = true;
    let mut open_clean = true;
    for r in scalar.eigenvalues(SpectrumKind::ScalarLaplacian) {
        let e = r.eigenvalue;
        if e == 0.0 {
            continue;
        }
        if e > f && e <= upper {
            closed_clean = false;
            violations.push(Violation {
                eigenvalue: e,
                rule: format!("scalar eigenvalue in (f, 2(f+1)] = ({f}, {upper}]"),
            });
        }
        if e > f && e < upper {
            open_clean = false;
            violations.push(Violation {
                eigenvalue: e,
                rule: format!("scalar eigenvalue in (f, 2(f+1)) = ({f}, {upper})"),
            });
        }
    }

    let (tangential, weak) = if fibre_dim < 3 {
        (Verdict::OutsideHypothesis, Verdict::OutsideHypothesis)
    } else {
        (
            if tt_strict && closed_clean {
                Verdict::Holds
            } else {
                Verdict::Fails
            },
            if tt_nonneg && open_clean {
                Verdict::Holds
            } else {
                Verdict::Fails
            },
        )
    };

    let u1 = scalar.min_nonzero_eigenvalue(SpectrumKind::ScalarLaplacian);
    let u0 = einstein_tt
        .min_eigenvalue(SpectrumKind::LichnerowiczTracefree)
        .or_else(|| scalar.min_eigenvalue(SpectrumKind::LichnerowiczTracefree));
    let u0_nonzero = einstein_tt
        .min_nonzero_eigenvalue(SpectrumKind::LichnerowiczTracefree)
        .or_else(|| scalar.min_nonzero_eigenvalue(SpectrumKind::LichnerowiczTracefree));
    let u = match (u0_nonzero, u1) {
        (Some(a), Some(b)) => Some(a.min(b)),
        _ => None,
    };

    Ok(StabilityReport {
        u0,
        u1,
        u,
        tangential,
        weak,
        violations,
    })
}

/// Tangential stability audit: `Spec(Delta_E|TT) > 0` and the nonzero scalar
/// spectrum misses `(f, 2(f+1)]`.
pub fn check_tangential_stability(
    einstein_tt: &SpectrumTable,
    scalar: &SpectrumTable,
    fibre_dim: u32,
) -> Result<StabilityReport> {
    audit(einstein_tt, scalar, fibre_dim)
}

/// Weak tangential stability audit: `Spec(Delta_E|TT) >= 0` and the nonzero
/// scalar spectrum misses the open interval `(f, 2(f+1))`.
pub fn check_weak_tangential_stability(
    einstein_tt: &SpectrumTable,
    scalar: &SpectrumTable,
    fibre_dim: u32,
) -> Result<StabilityReport> {
    audit(einstein_tt, scalar, fibre_dim)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn positive_tt(f: u32) -> SpectrumTable {
        // Einstein operator spectrum on TT-tensors of the round sphere:
        // k(k + f - 1) - 2 for k >= 2, all positive.
        let records = (2..=6u64)
            .map(|k| SpectrumRecord {
                eigenvalue: (k * (k + f as u64 - 1)) as f64 - 2.0,
                multiplicity: 1,
                kind: SpectrumKind::EinsteinTt,
            })
            .collect();
        SpectrumTable::new(f, records, "test tt").unwrap()
    }

    #[test]
    fn parse_example_table() {
        let t = SpectrumTable::parse(
            "fibre_dimension=3\n0 1 scalar-laplacian\n3 4 scalar-laplacian\n",
            "inline",
        )
        .unwrap();
        assert_eq!(t.records().len(), 2);
        assert_eq!(t.fibre_dim(), 3);
    }

    #[test]
    fn empty_table_rejected() {
        let err = SpectrumTable::parse("fibre_dimension=3\n", "inline").unwrap_err();
        assert!(err.to_string().contains("zero eigenvalue"));
    }

    #[test]
    fn zero_multiplicity_rejected() {
        let err =
            SpectrumTable::parse("fibre_dimension=3\n2 0 scalar-laplacian\n", "inline").unwrap_err();
        assert!(err.to_string().contains("multiplicity"));
    }

    #[test]
    fn unsorted_within_kind_rejected() {
        let text = "fibre_dimension=3\n0 1 scalar-laplacian\n5 1 scalar-laplacian\n3 1 scalar-laplacian\n";
        assert!(SpectrumTable::parse(text, "inline").is_err());
    }

    #[test]
    fn parse_error_carries_line_number() {
        let err = SpectrumTable::parse(
            "fibre_dimension=3\n0 1 scalar-laplacian\nnonsense here now\n",
            "inline",
        )
        .unwrap_err();
        match err {
            EdgeflowError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn text_round_trip_bit_exact() {
        let t = SpectrumTable::new(
            2,
            vec![
                SpectrumRecord {
                    eigenvalue: 0.0,
                    multiplicity: 1,
                    kind: SpectrumKind::ScalarLaplacian,
                },
                SpectrumRecord {
                    eigenvalue: 0.1 + 0.2, // not exactly representable
                    multiplicity: 3,
                    kind: SpectrumKind::ScalarLaplacian,
                },
                SpectrumRecord {
                    eigenvalue: std::f64::consts::PI,
                    multiplicity: 2,
                    kind: SpectrumKind::EinsteinTt,
                },
            ],
            "test",
        )
        .unwrap();
        let text = t.to_text();
        let back = SpectrumTable::parse(&text, "test").unwrap();
        for (a, b) in t.records().iter().zip(back.records()) {
            assert_eq!(a.eigenvalue.to_bits(), b.eigenvalue.to_bits());
            assert_eq!(a.multiplicity, b.multiplicity);
        }
        assert_eq!(text, back.to_text());
    }

    #[test]
    fn sphere_eigenvalues_and_multiplicities() {
        let t = sphere_scalar_spectrum(3, 4).unwrap();
        let evs: Vec<f64> = t.records().iter().map(|r| r.eigenvalue).collect();
        assert_eq!(evs, vec![0.0, 3.0, 8.0, 15.0, 24.0]);
        let mults: Vec<u64> = t.records().iter().map(|r| r.multiplicity).collect();
        // S^3 spherical harmonics: (k+1)^2
        assert_eq!(mults, vec![1, 4, 9, 16, 25]);
        // S^2 check: 2k+1
        let t2 = sphere_scalar_spectrum(2, 3).unwrap();
        let m2: Vec<u64> = t2.records().iter().map(|r| r.multiplicity).collect();
        assert_eq!(m2, vec![1, 3, 5, 7]);
    }

    #[test]
    fn sphere_is_weakly_but_not_tangentially_stable() {
        for f in 3..=6u32 {
            let scalar = sphere_scalar_spectrum(f, 6).unwrap();
            let tt = positive_tt(f);
            let rep = check_tangential_stability(&tt, &scalar, f).unwrap();
            assert_eq!(rep.tangential, Verdict::Fails, "f={f}");
            let witness = 2.0 * (f as f64 + 1.0);
            assert!(
                rep.violations
                    .iter()
                    .any(|v| v.eigenvalue == witness && v.rule.contains("]")),
                "f={f}: witness 2(f+1) missing"
            );
            let rep = check_weak_tangential_stability(&tt, &scalar, f).unwrap();
            assert_eq!(rep.weak, Verdict::Holds, "f={f}");
            assert_eq!(rep.u1, Some(f as f64));
        }
    }

    #[test]
    fn clean_spectrum_is_tangentially_stable() {
        let f = 3u32;
        let scalar = SpectrumTable::parse(
            "fibre_dimension=3\n0 1 scalar-laplacian\n9 1 scalar-laplacian\n",
            "inline",
        )
        .unwrap();
        let tt = positive_tt(f);
        let rep = check_tangential_stability(&tt, &scalar, f).unwrap();
        assert_eq!(rep.tangential, Verdict::Holds);
        assert_eq!(rep.weak, Verdict::Holds);
        assert!(rep.violations.is_empty());
    }

    #[test]
    fn tt_zero_fails_tangential_passes_weak() {
        let f = 3u32;
        let scalar = SpectrumTable::parse(
            "fibre_dimension=3\n0 1 scalar-laplacian\n9 1 scalar-laplacian\n",
            "inline",
        )
        .unwrap();
        let tt = SpectrumTable::new(
            f,
            vec![SpectrumRecord {
                eigenvalue: 0.0,
                multiplicity: 1,
                kind: SpectrumKind::EinsteinTt,
            }],
            "tt with kernel",
        )
        .unwrap();
        let rep = check_tangential_stability(&tt, &scalar, f).unwrap();
        assert_eq!(rep.tangential, Verdict::Fails);
        assert!(rep
            .violations
            .iter()
            .any(|v| v.eigenvalue == 0.0 && v.rule == "einstein-tt nonpositive"));
        assert_eq!(rep.weak, Verdict::Holds);
    }

    #[test]
    fn open_interval_violation_fails_weak() {
        let f = 3u32;
        let scalar = SpectrumTable::parse(
            "fibre_dimension=3\n0 1 scalar-laplacian\n3.5 1 scalar-laplacian\n",
            "inline",
        )
        .unwrap();
        let tt = positive_tt(f);
        let rep = check_weak_tangential_stability(&tt, &scalar, f).unwrap();
        assert_eq!(rep.weak, Verdict::Fails);
        assert_eq!(rep.tangential, Verdict::Fails);
    }

    #[test]
    fn small_f_abstains() {
        let f = 2u32;
        let scalar = sphere_scalar_spectrum(f, 3).unwrap();
        let tt = positive_tt(f);
        let rep = check_tangential_stability(&tt, &scalar, f).unwrap();
        assert_eq!(rep.tangential, Verdict::OutsideHypothesis);
        assert_eq!(rep.weak, Verdict::OutsideHypothesis);
        // the bounds are still computed from the tables
        assert_eq!(rep.u1, Some(2.0));
    }

    #[test]
    fn u_bound_uses_lichnerowicz_table() {
        let f = 3u32;
        let scalar = SpectrumTable::parse(
            "fibre_dimension=3\n0 1 scalar-laplacian\n9 1 scalar-laplacian\n",
            "inline",
        )
        .unwrap();
        let tt = SpectrumTable::parse(
            "fibre_dimension=3\n4 1 einstein-tt\n0 1 lichnerowicz-tracefree\n5.5 2 lichnerowicz-tracefree\n",
            "inline",
        )
        .unwrap();
        let rep = check_weak_tangential_stability(&tt, &scalar, f).unwrap();
        assert_eq!(rep.u0, Some(0.0));
        assert_eq!(rep.u1, Some(9.0));
        assert_eq!(rep.u, Some(5.5));
    }

    #[test]
    fn tangential_implies_weak_on_battery() {
        // random-ish battery: every table where tangential holds must have weak hold
        let f = 4u32;
        let tt = positive_tt(f);
        for evs in [
            vec![0.0, 11.0],
            vec![0.0, 4.0, 12.0],
            vec![0.0, 9.0],
            vec![0.0, 10.0, 10.5],
        ] {
            let recs: Vec<SpectrumRecord> = evs
                .iter()
                .map(|&e| SpectrumRecord {
                    eigenvalue: e,
                    multiplicity: 1,
                    kind: SpectrumKind::ScalarLaplacian,
                })
                .collect();
            let scalar = SpectrumTable::new(f, recs, "battery").unwrap();
            let rep = audit(&tt, &scalar, f).unwrap();
            if rep.tangential == Verdict::Holds {
                assert_eq!(rep.weak, Verdict::Holds);
            }
        }
    }
}
