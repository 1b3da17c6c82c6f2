//! Bessel functions of orders 0 and 1 and the spherical `sin(x)/x`,
//! `sinh(x)/x` kernels used by the nonsingular general solutions.
//!
//! `J0`, `J1` use the power series for `|x| <= 8`, Miller's backward
//! recurrence on `(8, 25]` and the Hankel asymptotic expansion beyond.
//! `I0`, `I1` use the (positive-term) power series for `|x| <= 30` and the
//! large-argument asymptotic expansion beyond.

use crate::error::{Error, Result};
use crate::math;

const EPS: f64 = f64::EPSILON;
const J_SERIES_MAX: f64 = 8.0;
const J_MILLER_MAX: f64 = 25.0;
const I_SERIES_MAX: f64 = 30.0;
const OVERFLOW_GUARD: f64 = 700.0;
const FRAC_2_PI: f64 = core::f64::consts::FRAC_2_PI;

/// A function value together with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpecialFnResult {
    pub value: f64,
    pub est_abs_error: f64,
}

impl SpecialFnResult {
    fn new(value: f64, est_abs_error: f64) -> Self {
        Self {
            value,
            est_abs_error: est_abs_error.abs(),
        }
    }

    fn negate(self) -> Self {
        Self {
            value: -self.value,
            est_abs_error: self.est_abs_error,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselOrder {
    Zero,
    One,
}

/// Bessel function of the first kind `J_order(x)`.
pub fn bessel_j(order: BesselOrder, x: f64) -> SpecialFnResult {
    let ax = x.abs();
    let r = if ax <= J_SERIES_MAX {
        j_series(order, ax)
    } else if ax <= J_MILLER_MAX {
        j_miller(order, ax)
    } else {
        j_hankel(order, ax)
    };
    match order {
        BesselOrder::One if x.is_sign_negative() => r.negate(),
        _ => r,
    }
}

/// Modified Bessel function of the first kind `I_order(x)`.
pub fn bessel_i(order: BesselOrder, x: f64) -> Result<SpecialFnResult> {
    let ax = x.abs();
    if ax.is_nan() || ax > OVERFLOW_GUARD {
        return Err(Error::OverflowRange(x));
    }
    let r = if ax <= I_SERIES_MAX {
        i_series(order, ax)
    } else {
        i_asymptotic(order, ax)
    };
    Ok(match order {
        BesselOrder::One if x.is_sign_negative() => r.negate(),
        _ => r,
    })
}

/// `(sin(x)/x, sinh(x)/x)` with the removable singularity at zero.
pub fn spherical_kernels(x: f64) -> Result<(f64, f64)> {
    if x.is_nan() || x.abs() > OVERFLOW_GUARD {
        return Err(Error::OverflowRange(x));
    }
    if x.abs() < 1e-4 {
        let x2 = x * x;
        let sinc = 1.0 - x2 / 6.0 * (1.0 - x2 / 20.0);
        let sinhc = 1.0 + x2 / 6.0 * (1.0 + x2 / 20.0);
        return Ok((sinc, sinhc));
    }
    Ok((math::sin(x) / x, math::sinh(x) / x))
}

fn j_series(order: BesselOrder, x: f64) -> SpecialFnResult {
    // J0 = Σ (-q)^k / (k!)^2, J1 = (x/2) Σ (-q)^k / (k!(k+1)!), q = x²/4
    let q = 0.25 * x * x;
    let (mut term, lead) = match order {
        BesselOrder::Zero => (1.0, 1.0),
        BesselOrder::One => (1.0, 0.5 * x),
    };
    let shift = match order {
        BesselOrder::Zero => 0.0,
        BesselOrder::One => 1.0,
    };
    let mut sum = term;
    let mut abs_sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + shift));
        sum += term;
        abs_sum += term.abs();
        if term.abs() <= 1e-18 * abs_sum {
            break;
        }
    }
    SpecialFnResult::new(lead * sum, 4.0 * EPS * abs_sum * lead.abs())
}

fn j_miller(order: BesselOrder, x: f64) -> SpecialFnResult {
    // Backward recurrence J_{n-1} = (2n/x) J_n - J_{n+1}, normalised with
    // J0 + 2 Σ J_{2k} = 1. Start index chosen so that J_start(x) is far
    // below double precision.
    let start = 2 * ((x as usize + 60) / 2);
    let mut next = 0.0; // J_{n+1}
    let mut cur = 1e-30; // J_n
    let mut norm = 0.0;
    let mut j1 = 0.0;
    let mut n = start;
    while n > 0 {
        let prev = (2.0 * n as f64 / x) * cur - next;
        next = cur;
        cur = prev;
        n -= 1;
        // cur is now J_n
        if n % 2 == 0 && n > 0 {
            norm += 2.0 * cur;
        }
        if n == 1 {
            j1 = cur;
        }
        if cur.abs() > 1e250 {
            let s = 1e-250;
            cur *= s;
            next *= s;
            norm *= s;
            j1 *= s;
        }
    }
    let j0 = cur;
    norm += j0;
    let v = match order {
        BesselOrder::Zero => j0 / norm,
        BesselOrder::One => j1 / norm,
    };
    SpecialFnResult::new(v, 8.0 * start as f64 * EPS * 0.5)
}

/// Hankel expansion coefficient ratio: a_k(ν) = a_{k-1}(ν)·(4ν² − (2k−1)²)/(8k).
fn hankel_coeff_step(mu: f64, k: usize) -> f64 {
    let t = (2 * k - 1) as f64;
    (mu - t * t) / (8.0 * k as f64)
}

fn j_hankel(order: BesselOrder, x: f64) -> SpecialFnResult {
    let mu = match order {
        BesselOrder::Zero => 0.0,
        BesselOrder::One => 4.0,
    };
    // P = Σ (-1)^k a_{2k}/x^{2k}, Q = Σ (-1)^k a_{2k+1}/x^{2k+1}
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    let mut omitted = 0.0;
    for k in 1..200 {
        let next = a * hankel_coeff_step(mu, k) / x;
        if next.abs() >= last || next.abs() < 1e-18 {
            omitted = next.abs();
            break;
        }
        a = next;
        last = a.abs();
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * a;
        } else {
            q += sign * a;
        }
    }
    // χ = x − (ν/2 + 1/4)π, expanded to avoid forming χ directly.
    let (s, c) = (math::sin(x), math::cos(x));
    let h = core::f64::consts::FRAC_1_SQRT_2;
    let (cos_chi, sin_chi) = match order {
        BesselOrder::Zero => (h * (c + s), h * (s - c)),
        BesselOrder::One => (h * (s - c), -h * (c + s)),
    };
    let amp = math::sqrt(FRAC_2_PI / x);
    let v = amp * (p * cos_chi - q * sin_chi);
    SpecialFnResult::new(v, amp * (omitted + 8.0 * EPS))
}

fn i_series(order: BesselOrder, x: f64) -> SpecialFnResult {
    let q = 0.25 * x * x;
    let (lead, shift) = match order {
        BesselOrder::Zero => (1.0, 0.0),
        BesselOrder::One => (0.5 * x, 1.0),
    };
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= q / (k * (k + shift));
        sum += term;
        if term <= 1e-18 * sum {
            break;
        }
    }
    let v = lead * sum;
    SpecialFnResult::new(v, (4.0 + 0.1 * k) * EPS * v)
}

fn i_asymptotic(order: BesselOrder, x: f64) -> SpecialFnResult {
    // I_ν(x) ~ e^x / sqrt(2πx) Σ (-1)^k a_k(ν) / x^k
    let mu = match order {
        BesselOrder::Zero => 0.0,
        BesselOrder::One => 4.0,
    };
    let mut sum = 1.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    let mut omitted = 0.0;
    for k in 1..400 {
        let next = -a * hankel_coeff_step(mu, k) / x;
        if next.abs() >= last || next.abs() < 1e-18 {
            omitted = next.abs();
            break;
        }
        a = next;
        last = a.abs();
        sum += a;
    }
    // Split the exponential so e^x / sqrt(x) does not overflow prematurely.
    let half = math::exp(0.5 * x);
    let pre = half / math::sqrt(2.0 * core::f64::consts::PI * x) * half;
    let v = pre * sum;
    SpecialFnResult::new(v, pre * (omitted + 8.0 * EPS))
}

/// `J1(x)/x`, finite at zero.
pub(crate) fn j1_over_x(x: f64) -> f64 {
    if x == 0.0 {
        0.5
    } else {
        bessel_j(BesselOrder::One, x).value / x
    }
}

/// `I1(x)/x`, finite at zero.
pub(crate) fn i1_over_x(x: f64) -> Result<f64> {
    if x == 0.0 {
        Ok(0.5)
    } else {
        Ok(bessel_i(BesselOrder::One, x)?.value / x)
    }
}

/// `(x cos x − sin x)/x³`, the radial derivative of `sin(x)/x` divided by `x`.
pub(crate) fn sinc_d1_over_x(x: f64) -> f64 {
    let x2 = x * x;
    if x.abs() < 0.5 {
        // −Σ_{k≥1} (−1)^{k+1} 2k x^{2k−2} / (2k+1)!
        let mut term: f64 = 1.0 / 3.0;
        let mut sum = term;
        let mut k = 1.0;
        while term.abs() > 1e-18 {
            // ratio of consecutive terms of 2k x^{2k-2}/(2k+1)!
            term *= -x2 * (k + 1.0) / (k * (2.0 * k + 2.0) * (2.0 * k + 3.0));
            sum += term;
            k += 1.0;
        }
        -sum
    } else {
        (x * math::cos(x) - math::sin(x)) / (x2 * x)
    }
}

/// `(x cosh x − sinh x)/x³`.
pub(crate) fn sinhc_d1_over_x(x: f64) -> f64 {
    let x2 = x * x;
    if x.abs() < 0.5 {
        let mut term: f64 = 1.0 / 3.0;
        let mut sum = term;
        let mut k = 1.0;
        while term.abs() > 1e-18 {
            term *= x2 * (k + 1.0) / (k * (2.0 * k + 2.0) * (2.0 * k + 3.0));
            sum += term;
            k += 1.0;
        }
        sum
    } else {
        (x * math::cosh(x) - math::sinh(x)) / (x2 * x)
    }
}

/// `e^{−x} I_n(x)` for `x ≥ 0`, from the trapezoidal rule on
/// `(1/π) ∫_0^π e^{x(cos θ − 1)} cos nθ dθ`, which converges geometrically
/// for a periodic integrand.
pub(crate) fn scaled_bessel_i(n: u32, x: f64) -> f64 {
    let steps = 32 + math::ceil(6.0 * math::sqrt(x)) as usize;
    let h = core::f64::consts::PI / steps as f64;
    let f = |t: f64| math::exp(x * (math::cos(t) - 1.0)) * math::cos(n as f64 * t);
    let mut sum = 0.5 * (f(0.0) + f(core::f64::consts::PI));
    for j in 1..steps {
        sum += f(j as f64 * h);
    }
    sum / steps as f64
}

/// `e^{x} K_n(x)` for `x > 0`, from the trapezoidal rule on
/// `∫_0^∞ e^{−x(cosh t − 1)} cosh nt dt`.
pub(crate) fn scaled_bessel_k(n: u32, x: f64) -> f64 {
    const STEP: f64 = 0.05;
    let mut sum = 0.5;
    let mut j = 1;
    loop {
        let t = j as f64 * STEP;
        let e = x * (math::cosh(t) - 1.0) - n as f64 * t;
        if e > 745.0 {
            break;
        }
        sum += math::exp(-e) * 0.5 * (1.0 + math::exp(-2.0 * n as f64 * t));
        j += 1;
    }
    sum * STEP
}
