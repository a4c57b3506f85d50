//! Modified Bessel functions `I_nu` of real order, Bessel functions `J_nu`
//! at moderate argument, and first positive zeros of `J_nu`.
//!
//! `I_nu` is evaluated by a power series for `z <= max(10, nu)` and by the
//! continued-fraction/Wronskian route (CF1 for the `I`-ratio, Steed's CF2 for
//! the scaled `K` pair, forward `K`-recurrence) otherwise. The scaled variant
//! `e^{-z} I_nu(z)` never overflows and is the form the heat kernel consumes.

use crate::error::{EdgeflowError, Result};
use statrs::function::gamma::ln_gamma;

/// Largest supported order.
pub const MAX_ORDER: f64 = 200.0;
/// Largest supported argument.
pub const MAX_ARGUMENT: f64 = 1e6;

const MAX_ITER: usize = 100_000;

/// One evaluation of `I_nu(z)` (or its exponentially scaled variant).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct BesselEval {
    pub order: f64,
    pub argument: f64,
    pub value: f64,
    pub scaled: bool,
}

impl BesselEval {
    pub fn compute(order: f64, argument: f64, scaled: bool) -> Result<Self> {
        let value = bessel_i(order, argument, scaled)?;
        Ok(Self {
            order,
            argument,
            value,
            scaled,
        })
    }
}

fn check_domain(order: f64, z: f64) -> Result<()> {
    if !(0.0..=MAX_ORDER).contains(&order) || !order.is_finite() {
        return Err(EdgeflowError::Domain(format!(
            "order {order} outside supported range [0, {MAX_ORDER}]"
        )));
    }
    if !(z > 0.0 && z <= MAX_ARGUMENT) {
        return Err(EdgeflowError::Domain(format!(
            "argument {z} outside supported range (0, {MAX_ARGUMENT:.0}]"
        )));
    }
    Ok(())
}

/// Modified Bessel function of the first kind, `I_nu(z)`, or the scaled
/// variant `e^{-z} I_nu(z)` when `scaled` is set.
pub fn bessel_i(order: f64, z: f64, scaled: bool) -> Result<f64> {
    let ln_scaled = bessel_i_ln_scaled(order, z)?;
    if scaled {
        return Ok(ln_scaled.exp());
    }
    let ln_value = ln_scaled + z;
    if ln_value > f64::MAX.ln() {
        return Err(EdgeflowError::Numeric(format!(
            "I_{order}({z}) overflows f64; use the scaled variant"
        )));
    }
    Ok(ln_value.exp())
}

/// `ln(e^{-z} I_nu(z))`. This is the quantity the mode heat kernel is built
/// from; keeping it in log form avoids both overflow at large `z` and
/// underflow at large order.
pub fn bessel_i_ln_scaled(order: f64, z: f64) -> Result<f64> {
    check_domain(order, z)?;
    if z <= 10.0_f64.max(order) {
        series_ln_scaled(order, z)
    } else {
        cf_ln_scaled(order, z)
    }
}

/// Power-series evaluation in log form:
/// `ln I_nu = nu ln(z/2) - ln Gamma(nu+1) + ln sum_k t_k`, then subtract `z`.
fn series_ln_scaled(order: f64, z: f64) -> Result<f64> {
    let q = 0.25 * z * z;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    let mut k = 0.0_f64;
    loop {
        term *= q / ((k + 1.0) * (k + 1.0 + order));
        sum += term;
        k += 1.0;
        if term < sum * f64::EPSILON {
            break;
        }
        if k as usize > MAX_ITER {
            return Err(EdgeflowError::Numeric(format!(
                "I_{order}({z}) power series did not converge in {MAX_ITER} terms"
            )));
        }
    }
    Ok(order * (0.5 * z).ln() - ln_gamma(order + 1.0) + sum.ln() - z)
}

/// Continued-fraction route for `z > max(10, nu)`:
/// CF2 gives the scaled pair `e^z K_u`, `e^z K_{u+1}` at `u = nu - round(nu)`,
/// the forward recurrence lifts them to order `nu`, CF1 gives
/// `r = I_{nu+1}/I_nu`, and the Wronskian
/// `I_nu K_{nu+1} + I_{nu+1} K_nu = 1/z` closes the system.
fn cf_ln_scaled(order: f64, z: f64) -> Result<f64> {
    let n = order.round();
    let u = order - n;
    let (mut k_lo, mut k_hi) = cf2_scaled_k(u, z)?;
    let mut w = u;
    for _ in 0..(n as usize) {
        let next = k_lo + 2.0 * (w + 1.0) * k_hi / z;
        k_lo = k_hi;
        k_hi = next;
        w += 1.0;
    }
    let ratio = cf1_i_ratio(order, z)?;
    // e^{-z} I_nu = 1 / (z (e^z K_{nu+1} + r e^z K_nu))
    let denom = z * (k_hi + ratio * k_lo);
    if denom <= 0.0 || !denom.is_finite() {
        return Err(EdgeflowError::Numeric(format!(
            "Wronskian closure degenerate for I_{order}({z})"
        )));
    }
    Ok(-denom.ln())
}

/// Steed's continued fraction for `e^z K_u(z)`, `e^z K_{u+1}(z)`, `|u| <= 0.5`,
/// `z > 2`. Follows Thompson-Barnett.
fn cf2_scaled_k(u: f64, z: f64) -> Result<(f64, f64)> {
    debug_assert!(u.abs() <= 0.5 + 1e-12);
    debug_assert!(z > 2.0);
    let mut a = u * u - 0.25;
    let mut b = 2.0 * (z + 1.0);
    let mut d = 1.0 / b;
    let mut delta = d;
    let mut f = d;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut q = -a;
    let mut c = -a;
    let mut s = 1.0 + q * delta;
    for k in 2..MAX_ITER {
        let kf = k as f64;
        a -= 2.0 * (kf - 1.0);
        b += 2.0;
        d = 1.0 / (a * d + b);
        delta *= b * d - 1.0;
        f += delta;
        let t = (prev - (b - 2.0) * cur) / a;
        prev = cur;
        cur = t;
        c *= -a / kf;
        q += c * t;
        s += q * delta;
        if (q * delta).abs() < s.abs() * f64::EPSILON {
            let k_scaled = (std::f64::consts::PI / (2.0 * z)).sqrt() / s;
            let k1_scaled = k_scaled * (0.5 + u + z + (u * u - 0.25) * f) / z;
            return Ok((k_scaled, k1_scaled));
        }
    }
    Err(EdgeflowError::Numeric(format!(
        "CF2 for K_{u}({z}) did not converge"
    )))
}

/// Modified Lentz evaluation of `I_{nu+1}(z) / I_nu(z)`.
fn cf1_i_ratio(order: f64, z: f64) -> Result<f64> {
    let tiny = 1.0 / f64::MAX.sqrt();
    let mut c = tiny;
    let mut f = tiny;
    let mut d = 0.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        let b = 2.0 * (order + kf) / z;
        c = b + 1.0 / c;
        d = b + d;
        if c == 0.0 {
            c = tiny;
        }
        if d == 0.0 {
            d = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() <= f64::EPSILON {
            return Ok(f);
        }
    }
    Err(EdgeflowError::Numeric(format!(
        "CF1 for I-ratio at order {order}, argument {z} did not converge"
    )))
}

/// Bessel function of the first kind `J_nu(z)` by its power series.
///
/// Accurate in f64 for `z <= 30` and `nu <= 50`; that covers the
/// eigenfunction seeds this crate needs. For zero-finding at larger order
/// use [`bessel_j_first_zero`], which works on stable ratios instead.
pub fn bessel_j(order: f64, z: f64) -> Result<f64> {
    if !(0.0..=50.0).contains(&order) {
        return Err(EdgeflowError::Domain(format!(
            "order {order} outside series range [0, 50]"
        )));
    }
    if !(z >= 0.0 && z <= 30.0) {
        return Err(EdgeflowError::Domain(format!(
            "argument {z} outside series range [0, 30]"
        )));
    }
    if z == 0.0 {
        return Ok(if order == 0.0 { 1.0 } else { 0.0 });
    }
    let q = 0.25 * z * z;
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    for k in 0..MAX_ITER {
        let kf = k as f64;
        term *= -q / ((kf + 1.0) * (kf + 1.0 + order));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-30) {
            let ln_pref = order * (0.5 * z).ln() - ln_gamma(order + 1.0);
            return Ok(sum * ln_pref.exp());
        }
    }
    Err(EdgeflowError::Numeric(format!(
        "J_{order}({z}) series did not converge"
    )))
}

/// Lentz evaluation of `J_{nu+1}(z) / J_nu(z)`:
/// `(z/2) / ((nu+1) - (z/2)^2/((nu+2) - (z/2)^2/(...)))`.
/// Converges for every `z > 0`; poles (zeros of `J_nu`) come out as large
/// values, which is exactly what the zero bracketing needs.
fn cf1_j_ratio(order: f64, z: f64) -> Result<f64> {
    let tiny = 1.0 / f64::MAX.sqrt();
    let h = 0.5 * z;
    let a = -h * h;
    let mut c = tiny;
    let mut f = tiny;
    let mut d = 0.0;
    for k in 1..MAX_ITER {
        let kf = k as f64;
        let (ak, bk) = if k == 1 { (h, order + 1.0) } else { (a, order + kf) };
        c = bk + ak / c;
        d = bk + ak * d;
        if c == 0.0 {
            c = tiny;
        }
        if d == 0.0 {
            d = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() <= 1e-16 {
            return Ok(f);
        }
    }
    Err(EdgeflowError::Numeric(format!(
        "continued fraction for J-ratio at order {order}, argument {z} did not converge"
    )))
}

/// Smallest positive zero `j_{nu,1}` of `J_nu`.
///
/// Bracketing runs on `g(z) = J_nu(z) / J_{nu+1}(z) = 1/CF1`. On
/// `(0, j_{nu+1,1})` the ratio is continuous and changes sign exactly at
/// `j_{nu,1}`; the scan step 0.5 is below the gap `j_{nu+1,1} - j_{nu,1} >= 1`,
/// so the first sign change always brackets the first zero.
pub fn bessel_j_first_zero(order: f64) -> Result<f64> {
    if !(0.0..=MAX_ORDER).contains(&order) || !order.is_finite() {
        return Err(EdgeflowError::Domain(format!(
            "order {order} outside supported range [0, {MAX_ORDER}]"
        )));
    }
    let g = |z: f64| -> Result<f64> { Ok(1.0 / cf1_j_ratio(order, z)?) };
    // j_{nu,1} > sqrt(nu (nu+2)), so the scan starts below the zero.
    let mut lo = if order > 0.0 {
        (order * (order + 2.0)).sqrt().max(0.3)
    } else {
        0.3
    };
    let step = 0.5;
    let mut glo = g(lo)?;
    let mut hi = lo;
    let mut found = false;
    for _ in 0..200 {
        hi = lo + step;
        let ghi = g(hi)?;
        if glo > 0.0 && ghi <= 0.0 {
            found = true;
            break;
        }
        lo = hi;
        glo = ghi;
    }
    if !found {
        return Err(EdgeflowError::Numeric(format!(
            "bracketing for j_{{{order},1}} failed; last bracket [{lo}, {hi}] with g({lo}) = {glo}"
        )));
    }
    // bisection to 1e-12 absolute
    let mut a = lo;
    let mut b = hi;
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        let gm = g(mid)?;
        if glo > 0.0 && gm <= 0.0 || glo <= 0.0 && gm > 0.0 {
            b = mid;
        } else {
            a = mid;
            glo = gm;
        }
        if b - a < 1e-12 {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
