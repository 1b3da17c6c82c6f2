//! Radial profiles `w(r)` of the kernels and their numerical construction.
//!
//! Closed forms cover the order-0 general solutions. Everything else
//! (higher-order general solutions, particular-solution kernels) solves
//!
//! ```text
//! D (w'' + (d−1) w'/r) + c w = g(r),   w'(0) = 0
//! ```
//!
//! by marching outward from a Taylor start with classical RK4 on the
//! non-stiff pair `(w, r^{d−1} w')`. The step is halved until a step-doubling
//! error estimate and a midpoint residual check both pass; the result is
//! stored on a uniform grid and evaluated with quintic Hermite
//! interpolation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::special::{self, BesselOrder};

/// Integration tolerance relative to the running magnitude of the profile.
const INTEGRATION_TOL: f64 = 1e-10;
/// Residual certification tolerance for the stored interpolant.
const RESIDUAL_TOL: f64 = 1e-8;
const MIN_CELLS: usize = 2048;
const MAX_CELLS: usize = 1 << 17;
const NEAR_ORIGIN_SUBSTEPS: usize = 256;

/// `w`, `w'`, `w'/r` and `w''` at one radius. `w'/r` is carried separately
/// because it stays finite (→ `w''(0)`) at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialJet {
    pub w: f64,
    pub dw: f64,
    pub dw_over_r: f64,
    pub d2w: f64,
}

/// `D (w'' + (dim−1) w'/r) + shift·w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOde {
    pub dim: usize,
    pub diffusivity: f64,
    pub shift: f64,
}

impl RadialOde {
    pub fn apply(&self, j: &RadialJet) -> f64 {
        self.diffusivity * (j.d2w + (self.dim - 1) as f64 * j.dw_over_r) + self.shift * j.w
    }

    /// Magnitude of the individual terms, used to scale residual checks.
    pub fn term_scale(&self, j: &RadialJet) -> f64 {
        let d = self.diffusivity;
        (d * j.d2w)
            .abs()
            .max((d * (self.dim - 1) as f64 * j.dw_over_r).abs())
            .max((self.shift * j.w).abs())
    }

    /// The bounded-at-origin homogeneous solution with `w(0) = 1`.
    pub(crate) fn order_zero(&self) -> ClosedProfile {
        let ratio = self.shift / self.diffusivity;
        let k = math::sqrt(ratio.abs());
        match (ratio.partial_cmp(&0.0), self.dim) {
            (Some(core::cmp::Ordering::Greater), 2) => ClosedProfile::Bessel(k),
            (Some(core::cmp::Ordering::Greater), _) => ClosedProfile::Sinc(k),
            (Some(core::cmp::Ordering::Less), 2) => ClosedProfile::ModifiedBessel(k),
            (Some(core::cmp::Ordering::Less), _) => ClosedProfile::Sinhc(k),
            _ => ClosedProfile::Constant,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum ClosedProfile {
    Constant,
    /// `J0(k r)`
    Bessel(f64),
    /// `I0(k r)`
    ModifiedBessel(f64),
    /// `sin(k r)/(k r)`
    Sinc(f64),
    /// `sinh(k r)/(k r)`
    Sinhc(f64),
}

impl ClosedProfile {
    pub fn eval(&self, r: f64) -> Result<RadialJet> {
        Ok(match *self {
            ClosedProfile::Constant => RadialJet {
                w: 1.0,
                dw: 0.0,
                dw_over_r: 0.0,
                d2w: 0.0,
            },
            ClosedProfile::Bessel(k) => {
                let x = k * r;
                let w = special::bessel_j(BesselOrder::Zero, x).value;
                let j1x = special::j1_over_x(x);
                let dw_over_r = -k * k * j1x;
                RadialJet {
                    w,
                    dw: dw_over_r * r,
                    dw_over_r,
                    d2w: -k * k * (w - j1x),
                }
            }
            ClosedProfile::ModifiedBessel(k) => {
                let x = k * r;
                let w = special::bessel_i(BesselOrder::Zero, x)?.value;
                let i1x = special::i1_over_x(x)?;
                let dw_over_r = k * k * i1x;
                RadialJet {
                    w,
                    dw: dw_over_r * r,
                    dw_over_r,
                    d2w: k * k * (w - i1x),
                }
            }
            ClosedProfile::Sinc(k) => {
                let x = k * r;
                let (w, _) = special::spherical_kernels(x)?;
                let dw_over_r = k * k * special::sinc_d1_over_x(x);
                RadialJet {
                    w,
                    dw: dw_over_r * r,
                    dw_over_r,
                    d2w: -2.0 * dw_over_r - k * k * w,
                }
            }
            ClosedProfile::Sinhc(k) => {
                let x = k * r;
                if x.abs() > 700.0 {
                    return Err(Error::OverflowRange(x));
                }
                let (_, w) = special::spherical_kernels(x)?;
                let dw_over_r = k * k * special::sinhc_d1_over_x(x);
                RadialJet {
                    w,
                    dw: dw_over_r * r,
                    dw_over_r,
                    d2w: -2.0 * dw_over_r + k * k * w,
                }
            }
        })
    }
}

/// Profile sampled on `r_i = i·h` with value, slope and curvature at every
/// node.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct TabulatedProfile {
    h: f64,
    w: Vec<f64>,
    dw: Vec<f64>,
    d2w: Vec<f64>,
}

impl TabulatedProfile {
    pub fn r_max(&self) -> f64 {
        self.h * (self.w.len() - 1) as f64
    }

    pub fn cells(&self) -> usize {
        self.w.len() - 1
    }

    pub fn eval(&self, r: f64) -> Result<RadialJet> {
        let r_max = self.r_max();
        if !(r >= 0.0) || r > r_max * (1.0 + 1e-12) {
            return Err(Error::RadiusOutOfRange { r, r_max });
        }
        let h = self.h;
        let i = ((r / h) as usize).min(self.cells() - 1);
        let t = (r - i as f64 * h) / h;
        let p0 = self.w[i];
        let p1 = self.w[i + 1];
        let d0 = h * self.dw[i];
        let d1 = h * self.dw[i + 1];
        let s0 = h * h * self.d2w[i];
        let s1 = h * h * self.d2w[i + 1];
        let dp = p1 - p0;
        let c2 = 0.5 * s0;
        let c3 = 10.0 * dp - 6.0 * d0 - 4.0 * d1 - 0.5 * (3.0 * s0 - s1);
        let c4 = -15.0 * dp + 8.0 * d0 + 7.0 * d1 + 0.5 * (3.0 * s0 - 2.0 * s1);
        let c5 = 6.0 * dp - 3.0 * (d0 + d1) - 0.5 * (s0 - s1);
        let w = p0 + t * (d0 + t * (c2 + t * (c3 + t * (c4 + t * c5))));
        let dp_dt = d0 + t * (2.0 * c2 + t * (3.0 * c3 + t * (4.0 * c4 + t * 5.0 * c5)));
        let dw = dp_dt / h;
        // The curvature of the Hermite interpolant amplifies rounding in `w`
        // by 1/h²; the nodal curvatures come from the equation and are
        // interpolated directly instead.
        let (j0, x) = lagrange_window(i, t, self.cells());
        let d2w = lagrange4(x, |k| self.d2w[j0 + k]);
        let dw_over_r = if i == 0 {
            lagrange4(x, |k| {
                let j = j0 + k;
                if j == 0 {
                    self.d2w[0]
                } else {
                    self.dw[j] / (j as f64 * h)
                }
            })
        } else {
            dw / r
        };
        Ok(RadialJet { w, dw, dw_over_r, d2w })
    }
}

/// First node of a four-node window around cell `i` and the position of
/// the evaluation point in that window's local coordinate.
fn lagrange_window(i: usize, t: f64, cells: usize) -> (usize, f64) {
    let j0 = i.saturating_sub(1).min(cells.saturating_sub(3));
    (j0, (i - j0) as f64 + t)
}

/// Cubic through `(k, f(k))`, k = 0..=3, evaluated at `x`.
fn lagrange4(x: f64, f: impl Fn(usize) -> f64) -> f64 {
    let (a, b, c, d) = (x, x - 1.0, x - 2.0, x - 3.0);
    -f(0) * b * c * d / 6.0 + f(1) * a * c * d / 2.0 - f(2) * a * b * d / 2.0 + f(3) * a * b * c / 6.0
}

/// A prescribed radial right-hand side `g(r)` with its derivatives at the
/// origin (as far as they exist).
pub(crate) struct RadialSource<'a> {
    pub value: &'a dyn Fn(f64) -> f64,
    pub taylor: [Option<f64>; 4],
}

/// Integrates `count` coupled profiles: profile 0 is driven by `source` (or
/// is homogeneous with `w(0) = w0` when `source` is `None`), profile `p > 0`
/// is driven by profile `p − 1` and starts from `w(0) = 0`.
pub(crate) fn integrate(
    ode: &RadialOde,
    source: Option<&RadialSource<'_>>,
    w0: f64,
    count: usize,
    r_max: f64,
) -> Result<Vec<TabulatedProfile>> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidParameter("r_max must be positive"));
    }
    let taylor = taylor_at_origin(ode, source, w0, count);
    let mut cells = MIN_CELLS;
    let mut coarse = march(ode, source, &taylor, count, r_max, cells)?;
    let mut estimate = f64::INFINITY;
    while cells <= MAX_CELLS {
        let fine = march(ode, source, &taylor, count, r_max, 2 * cells)?;
        estimate = doubling_error(&coarse, &fine);
        if estimate <= INTEGRATION_TOL {
            let profiles = finish(ode, source, fine.clone(), r_max / (2 * cells) as f64);
            if let Ok(()) = certify(ode, source, &profiles) {
                return Ok(profiles);
            }
        }
        coarse = fine;
        cells *= 2;
    }
    Err(Error::IntegrationFailure { estimate })
}

/// Derivatives `w_p^{(k)}(0)`, k = 0..=5, from differentiating
/// `r w'' + (d−1) w' = r q`, `q = (g − c w)/D`, at the origin:
/// `w^{(k+1)}(0) = k q^{(k−1)}(0) / (k + d − 1)`.
fn taylor_at_origin(ode: &RadialOde, source: Option<&RadialSource<'_>>, w0: f64, count: usize) -> Vec<[Option<f64>; 6]> {
    let d = ode.dim as f64;
    let mut out: Vec<[Option<f64>; 6]> = Vec::with_capacity(count);
    for p in 0..count {
        let g: [Option<f64>; 6] = if p == 0 {
            match source {
                Some(s) => [s.taylor[0], s.taylor[1], s.taylor[2], s.taylor[3], None, None],
                None => [Some(0.0); 6],
            }
        } else {
            out[p - 1]
        };
        let mut w = [None; 6];
        w[0] = Some(if p == 0 { w0 } else { 0.0 });
        w[1] = Some(0.0);
        for k in 1..5 {
            let q = match (g[k - 1], w[k - 1]) {
                (Some(gk), Some(wk)) => (gk - ode.shift * wk) / ode.diffusivity,
                _ => break,
            };
            w[k + 1] = Some(k as f64 * q / (k as f64 + d - 1.0));
        }
        out.push(w);
    }
    out
}

#[derive(Clone)]
struct Marched {
    w: Vec<Vec<f64>>,
    dw: Vec<Vec<f64>>,
}

fn march(
    ode: &RadialOde,
    source: Option<&RadialSource<'_>>,
    taylor: &[[Option<f64>; 6]],
    count: usize,
    r_max: f64,
    cells: usize,
) -> Result<Marched> {
    let h = r_max / cells as f64;
    let dm1 = ode.dim as i32 - 1;
    let mut w = vec![vec![0.0; cells + 1]; count];
    let mut dw = vec![vec![0.0; cells + 1]; count];

    // Node 0 exact, node 1 from the Taylor polynomial.
    let mut state = vec![0.0; 2 * count];
    for p in 0..count {
        w[p][0] = taylor[p][0].unwrap_or(0.0);
        let mut val = 0.0;
        let mut slope = 0.0;
        let mut fact = 1.0;
        for k in 0..6 {
            if k > 0 {
                fact *= k as f64;
            }
            if let Some(c) = taylor[p][k] {
                val += c * math::powi(h, k as i32) / fact;
                if k >= 1 {
                    slope += c * math::powi(h, k as i32 - 1) / (fact / k as f64);
                }
            }
        }
        w[p][1] = val;
        dw[p][1] = slope;
        state[2 * p] = val;
        state[2 * p + 1] = math::powi(h, dm1) * slope;
    }

    let rhs = |r: f64, s: &[f64], out: &mut [f64]| {
        let rp = math::powi(r, dm1);
        for p in 0..count {
            let g = if p == 0 {
                source.map_or(0.0, |src| (src.value)(r))
            } else {
                s[2 * (p - 1)]
            };
            out[2 * p] = s[2 * p + 1] / rp;
            out[2 * p + 1] = rp * (g - ode.shift * s[2 * p]) / ode.diffusivity;
        }
    };

    let n = state.len();
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    // (d−1)/r is stiff relative to h in the first cells; sub-step them.
    let mut step = |r: f64, h: f64, state: &mut [f64]| {
        rhs(r, state, &mut k1);
        for j in 0..n {
            tmp[j] = state[j] + 0.5 * h * k1[j];
        }
        rhs(r + 0.5 * h, &tmp, &mut k2);
        for j in 0..n {
            tmp[j] = state[j] + 0.5 * h * k2[j];
        }
        rhs(r + 0.5 * h, &tmp, &mut k3);
        for j in 0..n {
            tmp[j] = state[j] + h * k3[j];
        }
        rhs(r + h, &tmp, &mut k4);
        for j in 0..n {
            state[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
    };
    for i in 1..cells {
        let r = i as f64 * h;
        let sub = NEAR_ORIGIN_SUBSTEPS.div_ceil(i);
        let hs = h / sub as f64;
        for k in 0..sub {
            step(r + k as f64 * hs, hs, &mut state);
        }
        let r1 = r + h;
        let rp = math::powi(r1, dm1);
        for p in 0..count {
            w[p][i + 1] = state[2 * p];
            dw[p][i + 1] = state[2 * p + 1] / rp;
        }
        if state.iter().any(|v| !v.is_finite()) {
            return Err(Error::IntegrationFailure { estimate: f64::INFINITY });
        }
    }
    Ok(Marched { w, dw })
}

/// Largest step-doubling error estimate, relative to the running maximum of
/// each profile.
fn doubling_error(coarse: &Marched, fine: &Marched) -> f64 {
    let mut worst: f64 = 0.0;
    for (arrays_c, arrays_f) in [(&coarse.w, &fine.w), (&coarse.dw, &fine.dw)] {
        for (c, f) in arrays_c.iter().zip(arrays_f.iter()) {
            // near the origin a profile may start from zero; measure it against
            // its size over the first stretch instead
            let mut running = f[..=f.len() / 8].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            for (i, cv) in c.iter().enumerate() {
                let fv = f[2 * i];
                running = running.max(fv.abs());
                if running > 0.0 {
                    worst = worst.max((fv - cv).abs() / 15.0 / running);
                }
            }
        }
    }
    worst
}

fn finish(ode: &RadialOde, source: Option<&RadialSource<'_>>, m: Marched, h: f64) -> Vec<TabulatedProfile> {
    let count = m.w.len();
    let nodes = m.w[0].len();
    let dm1 = (ode.dim - 1) as f64;
    let mut out: Vec<TabulatedProfile> = Vec::with_capacity(count);
    for p in 0..count {
        let mut d2w = vec![0.0; nodes];
        for i in 0..nodes {
            let r = i as f64 * h;
            let g = if p == 0 {
                source.map_or(0.0, |s| (s.value)(r))
            } else {
                m.w[p - 1][i]
            };
            let q = (g - ode.shift * m.w[p][i]) / ode.diffusivity;
            d2w[i] = if i == 0 { q / ode.dim as f64 } else { q - dm1 * m.dw[p][i] / r };
        }
        out.push(TabulatedProfile {
            h,
            w: m.w[p].clone(),
            dw: m.dw[p].clone(),
            d2w,
        });
    }
    out
}

/// Homogeneous pair for `c < 0` at `x = k r`: the solution `h` regular at
/// the origin and the solution `K` decaying at infinity, as
/// `(e^{−x} h, e^{−x} h', e^{x} K, e^{x} K')` with `'` = `d/dr`.
fn scaled_pair(dim: usize, k: f64, r: f64) -> (f64, f64, f64, f64) {
    let x = k * r;
    if dim == 2 {
        return (
            special::scaled_bessel_i(0, x),
            k * special::scaled_bessel_i(1, x),
            special::scaled_bessel_k(0, x),
            -k * special::scaled_bessel_k(1, x),
        );
    }
    let (h, dh) = if x <= 20.0 {
        let e = math::exp(-x);
        let sinhc = if x == 0.0 { 1.0 } else { math::sinh(x) / x };
        (e * sinhc, e * k * x * special::sinhc_d1_over_x(x))
    } else {
        (0.5 / x, k * (0.5 / x - 0.5 / (x * x)))
    };
    (h, dh, 1.0 / x, -k * (1.0 / x + 1.0 / (x * x)))
}

/// `e^{−kr} h(r)` alone.
fn scaled_regular(dim: usize, k: f64, r: f64) -> f64 {
    let x = k * r;
    match dim {
        2 => special::scaled_bessel_i(0, x),
        _ if x == 0.0 => 1.0,
        _ if x <= 20.0 => math::exp(-x) * math::sinh(x) / x,
        _ => 0.5 / x,
    }
}

/// `e^{kr} K(r)` alone.
fn scaled_decaying(dim: usize, k: f64, r: f64) -> f64 {
    let x = k * r;
    if dim == 2 {
        special::scaled_bessel_k(0, x)
    } else {
        1.0 / x
    }
}

const GAUSS8: [(f64, f64); 4] = [
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_5),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_3),
];

fn gauss(a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    let (m, half) = (0.5 * (a + b), 0.5 * (b - a));
    GAUSS8
        .iter()
        .map(|&(x, w)| w * (f(m - half * x) + f(m + half * x)))
        .sum::<f64>()
        * half
}

/// `∫_a^b f`, with the cell at the origin split geometrically so that
/// logarithmic endpoint behaviour is resolved.
fn cell_integral(a: f64, b: f64, f: &dyn Fn(f64) -> f64) -> f64 {
    if a > 0.0 {
        return gauss(a, b, f);
    }
    let mut sum = 0.0;
    let mut hi = b;
    for _ in 0..48 {
        sum += gauss(0.5 * hi, hi, f);
        hi *= 0.5;
    }
    sum
}

/// The particular solution of `D (w'' + (d−1) w'/r) + c w = g` with `c < 0`
/// that carries no multiple of the growing homogeneous solution:
///
/// ```text
/// w(r) = −(1/ω) [ h(r) ∫_r^∞ K g t^{d−1} dt + K(r) ∫_0^r h g t^{d−1} dt ] / D
/// ```
///
/// with `r^{d−1}(h K' − h' K) = −ω`. The regular solution marched from the
/// origin differs from it by a multiple of `h ~ e^{kr}`, which for large
/// `k r` swamps the profile. Both integrals are accumulated with the
/// exponentials folded in, so no term grows.
pub(crate) fn minimal_growth(ode: &RadialOde, source: &RadialSource<'_>, r_max: f64) -> Result<TabulatedProfile> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidParameter("r_max must be positive"));
    }
    if !(ode.shift < 0.0) {
        return Err(Error::InvalidParameter("minimal-growth profiles need a negative shift"));
    }
    let d = ode.dim;
    let dm1 = (d - 1) as i32;
    let k = math::sqrt(-ode.shift / ode.diffusivity);
    let omega = if d == 2 { 1.0 } else { 1.0 / k };
    let q = |t: f64| (source.value)(t) / ode.diffusivity;
    let cells = MIN_CELLS.max(math::ceil(2.0 * k * r_max) as usize);
    if cells > MAX_CELLS {
        return Err(Error::IntegrationFailure { estimate: f64::INFINITY });
    }
    let h = r_max / cells as f64;
    let decay = math::exp(-k * h);

    // e^{−kr} ∫_0^r h q t^{d−1}
    let mut lower = vec![0.0; cells + 1];
    for i in 0..cells {
        let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
        let f = |t: f64| scaled_regular(d, k, t) * math::exp(-k * (b - t)) * q(t) * math::powi(t, dm1);
        lower[i + 1] = decay * lower[i] + cell_integral(a, b, &f);
    }
    // e^{kr} ∫_r^∞ K q t^{d−1}, started far enough out that the truncated
    // tail is damped by e^{−40}
    let upper_cell = |a: f64, b: f64| {
        let f = |t: f64| scaled_decaying(d, k, t) * math::exp(-k * (t - a)) * q(t) * math::powi(t, dm1);
        cell_integral(a, b, &f)
    };
    let tail_cells = 80;
    let tail_h = 40.0 / (k * tail_cells as f64);
    let tail_decay = math::exp(-k * tail_h);
    let mut acc = 0.0;
    for i in (0..tail_cells).rev() {
        let a = r_max + i as f64 * tail_h;
        acc = tail_decay * acc + upper_cell(a, a + tail_h);
    }
    let mut upper = vec![0.0; cells + 1];
    upper[cells] = acc;
    for i in (0..cells).rev() {
        upper[i] = decay * upper[i + 1] + upper_cell(i as f64 * h, (i + 1) as f64 * h);
    }

    let mut w = vec![0.0; cells + 1];
    let mut dw = vec![0.0; cells + 1];
    let mut d2w = vec![0.0; cells + 1];
    w[0] = -upper[0] / omega;
    d2w[0] = (q(0.0) + k * k * w[0]) / d as f64;
    for i in 1..=cells {
        let r = i as f64 * h;
        let (hs, dhs, ks, dks) = scaled_pair(d, k, r);
        w[i] = -(hs * upper[i] + ks * lower[i]) / omega;
        dw[i] = -(dhs * upper[i] + dks * lower[i]) / omega;
        d2w[i] = q(r) + k * k * w[i] - (d - 1) as f64 * dw[i] / r;
    }
    let profile = TabulatedProfile { h, w, dw, d2w };
    certify(ode, Some(source), core::slice::from_ref(&profile))?;
    Ok(profile)
}

/// Residual of the interpolated profiles at off-grid radii.
fn certify(ode: &RadialOde, source: Option<&RadialSource<'_>>, profiles: &[TabulatedProfile]) -> Result<()> {
    let r_max = profiles[0].r_max();
    let samples = 200;
    let mut worst: f64 = 0.0;
    for (p, prof) in profiles.iter().enumerate() {
        for k in 0..samples {
            // irrational offset keeps samples away from grid nodes
            let r = r_max * ((k as f64 + 0.381_966) / samples as f64);
            let jet = prof.eval(r)?;
            let g = if p == 0 {
                source.map_or(0.0, |s| (s.value)(r))
            } else {
                profiles[p - 1].eval(r)?.w
            };
            let scale = ode.term_scale(&jet).max(g.abs()).max(1.0);
            worst = worst.max((ode.apply(&jet) - g).abs() / scale);
        }
    }
    if worst <= RESIDUAL_TOL {
        Ok(())
    } else {
        Err(Error::IntegrationFailure { estimate: worst })
    }
}
