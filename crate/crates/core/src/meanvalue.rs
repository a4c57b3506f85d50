//! Verification utilities for the mean-value machinery: the fractional
//! mean-value bound
//! `|w(eta) - w(eta')| <= C |eta - eta'|^{1/N} |delta^{(N-1)/N} w'(delta)|`
//! for some `delta` between the endpoints, the Holder-quotient constant
//! `C(N, K)` with `N |eta^{1/N} - eta'^{1/N}| <= C |eta - eta'|^{1/N}`, and
//! the three-term edge variant on `(x, y, z)` charts.

use crate::error::{EdgeflowError, Result};
use rand::Rng;
use serde::Serialize;

fn check_odd(n: u32) -> Result<()> {
    if n == 0 || n % 2 == 0 {
        return Err(EdgeflowError::Domain(format!(
            "N must be a positive odd integer, got {n}"
        )));
    }
    Ok(())
}

/// `sup N |eta^{1/N} - eta'^{1/N}| / |eta - eta'|^{1/N}` over a dense pair
/// grid on `K = [a, b] subset [0, inf)`. Equals `N` on intervals touching 0
/// (attained at `eta' = 0`), and 1 for `N = 1`.
pub fn holder_quotient_constant(n_odd: u32, interval: (f64, f64)) -> Result<f64> {
    check_odd(n_odd)?;
    let (a, b) = interval;
    if !(a >= 0.0 && b > a) {
        return Err(EdgeflowError::Domain(format!(
            "interval [{a}, {b}] must be compact in [0, inf)"
        )));
    }
    if n_odd == 1 {
        return Ok(1.0);
    }
    let nf = n_odd as f64;
    let root = 1.0 / nf;
    // grid graded toward the left endpoint, where the sup concentrates
    let m = 600;
    let pts: Vec<f64> = (0..=m)
        .map(|i| a + (b - a) * (i as f64 / m as f64).powi(3))
        .collect();
    let mut sup = 0.0_f64;
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let (e, ep) = (pts[i], pts[j]);
            let q = nf * (e.powf(root) - ep.powf(root)).abs() / (ep - e).powf(root);
            sup = sup.max(q);
        }
    }
    Ok(sup)
}

/// Result of one mean-value bound check. `rhs` is
/// `C(N,K) |eta - eta'|^{1/N} h(delta)` with `h(delta) = |delta^{(N-1)/N}
/// w'(delta)|`; the lemma asserts existence of a `delta` achieving the
/// bound, so `lhs <= rhs_max` always, while `ratio = lhs / rhs_min` may
/// exceed 1 when `w'` dips inside the interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeanValueCheck {
    pub lhs: f64,
    pub rhs_min: f64,
    pub rhs_max: f64,
    /// `lhs / rhs_min`; 0 for degenerate pairs.
    pub ratio: f64,
    /// Smallest constant making the existential bound true for this pair:
    /// `lhs / (|eta - eta'|^{1/N} h_max)`.
    pub fitted_c: f64,
}

/// Checks the bound for a (possibly vector-valued) continuously
/// differentiable `w` on `K`, with `w'` by central differences of step
/// `1e-6 |K|` and `delta` scanned over a dense grid in `[eta, eta']`.
pub fn mean_value_bound_check(
    w: &dyn Fn(f64) -> Vec<f64>,
    pair: (f64, f64),
    n_odd: u32,
    interval: (f64, f64),
) -> Result<MeanValueCheck> {
    let c = holder_quotient_constant(n_odd, interval)?;
    mean_value_bound_check_with_c(w, pair, n_odd, interval, c)
}

/// As [`mean_value_bound_check`] with the quotient constant supplied, so
/// audits can compute it once.
pub fn mean_value_bound_check_with_c(
    w: &dyn Fn(f64) -> Vec<f64>,
    pair: (f64, f64),
    n_odd: u32,
    interval: (f64, f64),
    quotient_constant: f64,
) -> Result<MeanValueCheck> {
    check_odd(n_odd)?;
    let (lo, hi) = interval;
    if !(lo >= 0.0 && hi > lo) {
        return Err(EdgeflowError::Domain(format!(
            "interval [{lo}, {hi}] must be compact in [0, inf)"
        )));
    }
    let (mut eta, mut eta_p) = pair;
    if eta > eta_p {
        std::mem::swap(&mut eta, &mut eta_p);
    }
    if eta < lo || eta_p > hi {
        return Err(EdgeflowError::Domain(format!(
            "pair ({eta}, {eta_p}) outside interval [{lo}, {hi}]"
        )));
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let fa = w(eta);
    let fb = w(eta_p);
    let lhs = norm(
        &fa.iter()
            .zip(&fb)
            .map(|(a, b)| a - b)
            .collect::<Vec<f64>>(),
    );
    if eta == eta_p {
        return Ok(MeanValueCheck {
            lhs: 0.0,
            rhs_min: 0.0,
            rhs_max: 0.0,
            ratio: 0.0,
            fitted_c: 0.0,
        });
    }
    let c = quotient_constant;
    let nf = n_odd as f64;
    let step = 1e-6 * (hi - lo);
    let h_of = |delta: f64| -> f64 {
        let d_lo = (delta - step).max(lo);
        let d_hi = (delta + step).min(hi);
        let fl = w(d_lo);
        let fr = w(d_hi);
        let deriv: Vec<f64> = fl
            .iter()
            .zip(&fr)
            .map(|(l, r)| (r - l) / (d_hi - d_lo))
            .collect();
        delta.powf((nf - 1.0) / nf) * norm(&deriv)
    };
    let m = 2048;
    let mut h_min = f64::INFINITY;
    let mut h_max = 0.0_f64;
    for i in 0..=m {
        let delta = eta + (eta_p - eta) * i as f64 / m as f64;
        let h = h_of(delta);
        h_min = h_min.min(h);
        h_max = h_max.max(h);
    }
    let x = c * (eta_p - eta).powf(1.0 / nf);
    let rhs_min = x * h_min;
    let rhs_max = x * h_max;
    let ratio = if rhs_min > 0.0 { lhs / rhs_min } else { 0.0 };
    let denom = (eta_p - eta).powf(1.0 / nf) * h_max;
    let fitted_c = if denom > 0.0 { lhs / denom } else { 0.0 };
    Ok(MeanValueCheck {
        lhs,
        rhs_min,
        rhs_max,
        ratio,
        fitted_c,
    })
}

/// Chart box for the edge variant; `x`-range must stay positive.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChartBox {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub z: (f64, f64),
}

impl ChartBox {
    fn contains(&self, p: (f64, f64, f64)) -> bool {
        p.0 >= self.x.0
            && p.0 <= self.x.1
            && p.1 >= self.y.0
            && p.1 <= self.y.1
            && p.2 >= self.z.0
            && p.2 <= self.z.1
    }
}

/// Distance on the singular chart:
/// `d((x,y,z), (x',y',z'))^2 = |x-x'|^2 + (x+x')^2 |z-z'|^2 + |y-y'|^2`.
pub fn edge_distance(p: (f64, f64, f64), q: (f64, f64, f64)) -> f64 {
    let dx = p.0 - q.0;
    let dz = p.2 - q.2;
    let dy = p.1 - q.1;
    (dx * dx + (p.0 + q.0) * (p.0 + q.0) * dz * dz + dy * dy).sqrt()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct EdgeMeanValueCheck {
    /// `|w(p) - w(p')| / d(p,p')^{1/N}`.
    pub lhs_over_d: f64,
    /// Sum of the three weighted derivative suprema along the connecting
    /// segments.
    pub rhs_sum: f64,
    /// `lhs_over_d / rhs_sum`; the pair's fitted constant.
    pub fitted_c: f64,
}

/// Three-term edge bound for a scalar field on an `(x, y, z)` chart, with
/// the reference `y~` shifting the `y`-argument:
/// term 1 `sup xi^{(N-1)/N} |d_x w(xi, y, z)|` over `xi` between `x, x'`;
/// term 2 `sup |gamma - y~|^{(N-1)/N} |d_y w(x', gamma - y~, z)|`;
/// term 3 `sup x'^{-1/N} |d_z w(x', y' - y~, zeta)|`.
pub fn edge_mean_value_check(
    field: &dyn Fn(f64, f64, f64) -> f64,
    p: (f64, f64, f64),
    p_prime: (f64, f64, f64),
    y_ref: f64,
    n_odd: u32,
    chart: ChartBox,
) -> Result<EdgeMeanValueCheck> {
    check_odd(n_odd)?;
    if !(chart.x.0 > 0.0) {
        return Err(EdgeflowError::Domain(
            "chart x-range must stay positive".into(),
        ));
    }
    if !chart.contains(p) || !chart.contains(p_prime) {
        return Err(EdgeflowError::Domain(format!(
            "points {p:?}, {p_prime:?} not in the same chart"
        )));
    }
    // canonical orientation so the result is symmetric under swap
    let (p, p_prime) = if (p.0, p.1, p.2) <= (p_prime.0, p_prime.1, p_prime.2) {
        (p, p_prime)
    } else {
        (p_prime, p)
    };
    let (x, y, z) = p;
    let (xp, yp, zp) = p_prime;
    let nf = n_odd as f64;
    let d = edge_distance(p, p_prime);
    let lhs = (field(x, y - y_ref, z) - field(xp, yp - y_ref, zp)).abs();
    if d == 0.0 {
        return Ok(EdgeMeanValueCheck {
            lhs_over_d: 0.0,
            rhs_sum: 0.0,
            fitted_c: 0.0,
        });
    }
    let lhs_over_d = lhs / d.powf(1.0 / nf);
    let hx = 1e-6 * (chart.x.1 - chart.x.0).max(1e-6);
    let hy = 1e-6 * (chart.y.1 - chart.y.0).max(1e-6);
    let hz = 1e-6 * (chart.z.1 - chart.z.0).max(1e-6);
    let m = 256;
    let seg = |a: f64, b: f64, i: usize| a + (b - a) * i as f64 / m as f64;
    let mut term1 = 0.0_f64;
    let mut term2 = 0.0_f64;
    let mut term3 = 0.0_f64;
    for i in 0..=m {
        let xi = seg(x, xp, i);
        let dfx = (field(xi + hx, y - y_ref, z) - field(xi - hx, y - y_ref, z)) / (2.0 * hx);
        term1 = term1.max(xi.powf((nf - 1.0) / nf) * dfx.abs());

        let gamma = seg(y, yp, i);
        let dfy =
            (field(xp, gamma - y_ref + hy, z) - field(xp, gamma - y_ref - hy, z)) / (2.0 * hy);
        term2 = term2.max((gamma - y_ref).abs().powf((nf - 1.0) / nf) * dfy.abs());

        let zeta = seg(z, zp, i);
        let dfz = (field(xp, yp - y_ref, zeta + hz) - field(xp, yp - y_ref, zeta - hz)) / (2.0 * hz);
        term3 = term3.max(xp.powf(-1.0 / nf) * dfz.abs());
    }
    let rhs_sum = term1 + term2 + term3;
    let fitted_c = if rhs_sum > 0.0 { lhs_over_d / rhs_sum } else { 0.0 };
    Ok(EdgeMeanValueCheck {
        lhs_over_d,
        rhs_sum,
        fitted_c,
    })
}

/// Report of a randomized audit.
#[derive(Debug, Clone, Serialize)]
pub struct AuditReport {
    pub samples: usize,
    pub reference_c: f64,
    /// Largest per-sample fitted constant (existential form).
    pub worst_fitted_c: f64,
    /// Largest `lhs / rhs_min` ratio seen.
    pub worst_ratio: f64,
    pub bound_holds_everywhere: bool,
}

/// Randomized mean-value audit over smooth samples (cubics plus a bounded
/// sine) on `K`; the lemma guarantees `fitted_c <= C(N, K)` up to the
/// `delta`-grid resolution.
pub fn mean_value_audit(
    rng: &mut impl Rng,
    n_samples: usize,
    n_odd: u32,
    interval: (f64, f64),
) -> Result<AuditReport> {
    let reference_c = holder_quotient_constant(n_odd, interval)?;
    let (lo, hi) = interval;
    let mut worst_fitted_c = 0.0_f64;
    let mut worst_ratio = 0.0_f64;
    for _ in 0..n_samples {
        let dim = rng.gen_range(1..=3);
        let coeffs: Vec<[f64; 6]> = (0..dim)
            .map(|_| {
                [
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-0.5..0.5),
                    rng.gen_range(0.5..3.0),
                ]
            })
            .collect();
        let w = move |t: f64| -> Vec<f64> {
            coeffs
                .iter()
                .map(|c| c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t + c[4] * (c[5] * t).sin())
                .collect()
        };
        let a = rng.gen_range(lo..hi);
        let b = rng.gen_range(lo..hi);
        if (a - b).abs() < 1e-12 {
            continue;
        }
        let check = mean_value_bound_check_with_c(&w, (a, b), n_odd, interval, reference_c)?;
        worst_fitted_c = worst_fitted_c.max(check.fitted_c);
        worst_ratio = worst_ratio.max(check.ratio);
    }
    Ok(AuditReport {
        samples: n_samples,
        reference_c,
        worst_fitted_c,
        worst_ratio,
        bound_holds_everywhere: worst_fitted_c <= reference_c + 1e-6,
    })
}

/// Randomized audit of the edge three-term bound on a fixed chart.
pub fn edge_mean_value_audit(
    rng: &mut impl Rng,
    field: &dyn Fn(f64, f64, f64) -> f64,
    n_pairs: usize,
    n_odd: u32,
    chart: ChartBox,
) -> Result<AuditReport> {
    let mut worst = 0.0_f64;
    for _ in 0..n_pairs {
        let p = (
            rng.gen_range(chart.x.0..chart.x.1),
            rng.gen_range(chart.y.0..chart.y.1),
            rng.gen_range(chart.z.0..chart.z.1),
        );
        let q = (
            rng.gen_range(chart.x.0..chart.x.1),
            rng.gen_range(chart.y.0..chart.y.1),
            rng.gen_range(chart.z.0..chart.z.1),
        );
        let y_ref = chart.y.0;
        let check = edge_mean_value_check(field, p, q, y_ref, n_odd, chart)?;
        worst = worst.max(check.fitted_c);
    }
    Ok(AuditReport {
        samples: n_pairs,
        reference_c: worst,
        worst_fitted_c: worst,
        worst_ratio: worst,
        bound_holds_everywhere: worst.is_finite(),
    })
}
