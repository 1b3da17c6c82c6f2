use alloc::vec::Vec;

use super::radial::{self, ClosedProfile, RadialJet, TabulatedProfile};
use super::{prefactored_jet, FieldProbe, OperatorSpec};
use crate::error::{Error, Result};
use crate::math;
use crate::Point;

/// Which argument of `u#(x; s)` a directional derivative acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivativeAt {
    Field,
    Source,
}

/// The general solutions `u_m#(x; s) = exp(a·(x−s)) w_m(|x−s|)` for
/// `m = 0..=max_order`, with `R{u_0#} = 0` and `R{u_m#} = u_{m−1}#`.
#[derive(Debug, Clone)]
pub struct KernelTable {
    op: OperatorSpec,
    max_order: usize,
    r_max: f64,
    drift: Point,
    order_zero: ClosedProfile,
    higher: Vec<TabulatedProfile>,
}

/// Builds and certifies the kernel family up to `max_order` on `[0, r_max]`.
pub fn build_kernel_table(op: &OperatorSpec, max_order: usize, r_max: f64) -> Result<KernelTable> {
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidParameter("r_max must be positive"));
    }
    let ode = op.radial_ode();
    let order_zero = ode.order_zero();

    // Closed form must solve the homogeneous radial equation.
    let samples = 100;
    for k in 0..=samples {
        let r = r_max * k as f64 / samples as f64;
        let j = order_zero.eval(r)?;
        let scale = ode.term_scale(&j).max(1.0);
        let res = ode.apply(&j).abs() / scale;
        if res > 1e-10 {
            return Err(Error::IntegrationFailure { estimate: res });
        }
    }

    let higher = if max_order == 0 {
        Vec::new()
    } else {
        let mut all = radial::integrate(&ode, None, 1.0, max_order + 1, r_max)?;
        // The integrated order-0 profile must reproduce the closed form.
        for k in 0..=samples {
            let r = r_max * k as f64 / samples as f64;
            let a = all[0].eval(r)?;
            let b = order_zero.eval(r)?;
            let dev = (a.w - b.w).abs() / b.w.abs().max(1.0);
            if dev > 1e-8 {
                return Err(Error::IntegrationFailure { estimate: dev });
            }
        }
        all.remove(0);
        all
    };

    Ok(KernelTable {
        op: *op,
        max_order,
        r_max,
        drift: op.drift(),
        order_zero,
        higher,
    })
}

impl KernelTable {
    pub fn op(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Radial profile `w_m` and its derivatives at `r`.
    pub fn radial(&self, m: usize, r: f64) -> Result<RadialJet> {
        if m > self.max_order {
            return Err(Error::OrderOutOfRange {
                order: m,
                max: self.max_order,
            });
        }
        if r > self.r_max * (1.0 + 1e-12) {
            return Err(Error::RadiusOutOfRange { r, r_max: self.r_max });
        }
        if m == 0 {
            self.order_zero.eval(r)
        } else {
            self.higher[m - 1].eval(r)
        }
    }

    /// Value, gradient and Hessian of `x ↦ u_m#(x; s)`.
    pub fn jet(&self, m: usize, x: &Point, s: &Point) -> Result<FieldProbe> {
        let z = math::sub(x, s);
        let rj = self.radial(m, math::norm(&z))?;
        Ok(prefactored_jet(self.dim(), &self.drift, &z, &rj))
    }

    pub fn kernel_value(&self, m: usize, x: &Point, s: &Point) -> Result<f64> {
        let z = math::sub(x, s);
        let rj = self.radial(m, math::norm(&z))?;
        if self.drift == [0.0; 3] {
            Ok(rj.w)
        } else {
            Ok(math::exp(math::dot(&self.drift, &z)) * rj.w)
        }
    }

    /// `n·∇_x u_m#` (field) or `n·∇_s u_m#` (source). The kernel depends on
    /// `x − s` only, so the source derivative is the negated field one.
    pub fn kernel_dn(&self, m: usize, x: &Point, s: &Point, n: &Point, at: DerivativeAt) -> Result<f64> {
        let d = self.jet(m, x, s)?.directional(n);
        Ok(match at {
            DerivativeAt::Field => d,
            DerivativeAt::Source => -d,
        })
    }

    /// Mixed derivative `∂²u_m# / ∂n_field ∂n_source = −n_fieldᵀ H n_source`.
    pub fn kernel_dn2(&self, m: usize, x: &Point, s: &Point, n_field: &Point, n_source: &Point) -> Result<f64> {
        let j = self.jet(m, x, s)?;
        Ok(-math::quad_form(n_field, &j.hessian, n_source))
    }
}
