//! The differential operators, scalar-field jets, and the order-`m`
//! nonsingular general solutions built from them.
//!
//! Every supported operator is written in the common form
//!
//! ```text
//! R{u} = D ∇²u − v·∇u − κ u
//! ```
//!
//! with Helmholtz `(D, v, κ) = (1, 0, −γ²)` and modified Helmholtz
//! `(1, 0, λ²)`. Substituting `u = exp(a·z) w(|z|)` with `a = v / (2D)`
//! removes the first-order term:
//!
//! ```text
//! R{exp(a·z) w} = exp(a·z) · (D ∇²w + c w),   c = −(|v|²/(4D) + κ)
//! ```
//!
//! so every kernel reduces to a radial ODE in `w` and a known prefactor.

mod kernel;
pub(crate) mod radial;

pub use kernel::{build_kernel_table, DerivativeAt, KernelTable};
pub use radial::{RadialJet, RadialOde};

use crate::error::{Error, Result};
use crate::math;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OperatorKind {
    /// `∇²u + γ²u`. `γ = 0` is the Laplace limit, reachable only through
    /// [`OperatorSpec::laplace`].
    Helmholtz { gamma: f64 },
    /// `∇²u − λ²u`
    ModifiedHelmholtz { lambda: f64 },
    /// `D∇²u − v·∇u − κu`
    ConvectionDiffusion {
        diffusivity: f64,
        velocity: Point,
        reaction: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    dim: usize,
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::InvalidParameter("dimension must be 2 or 3"))
    }
}

impl OperatorSpec {
    pub fn helmholtz(dim: usize, gamma: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter("gamma must be positive"));
        }
        Ok(Self {
            kind: OperatorKind::Helmholtz { gamma },
            dim,
        })
    }

    /// The Laplacian, as the `γ → 0` limit of the Helmholtz operator.
    pub fn laplace(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            kind: OperatorKind::Helmholtz { gamma: 0.0 },
            dim,
        })
    }

    pub fn modified_helmholtz(dim: usize, lambda: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::InvalidParameter("lambda must be positive"));
        }
        Ok(Self {
            kind: OperatorKind::ModifiedHelmholtz { lambda },
            dim,
        })
    }

    pub fn convection_diffusion(dim: usize, diffusivity: f64, velocity: &[f64], reaction: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(diffusivity > 0.0 && diffusivity.is_finite()) {
            return Err(Error::InvalidParameter("diffusivity must be positive"));
        }
        if velocity.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: velocity.len(),
            });
        }
        if !(reaction >= 0.0) {
            return Err(Error::InvalidParameter("reaction coefficient must be non-negative"));
        }
        let mut v = [0.0; 3];
        v[..dim].copy_from_slice(velocity);
        Ok(Self {
            kind: OperatorKind::ConvectionDiffusion {
                diffusivity,
                velocity: v,
                reaction,
            },
            dim,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(D, v, κ)` of the common form `D∇² − v·∇ − κ`.
    pub fn coefficients(&self) -> (f64, Point, f64) {
        match self.kind {
            OperatorKind::Helmholtz { gamma } => (1.0, [0.0; 3], -gamma * gamma),
            OperatorKind::ModifiedHelmholtz { lambda } => (1.0, [0.0; 3], lambda * lambda),
            OperatorKind::ConvectionDiffusion {
                diffusivity,
                velocity,
                reaction,
            } => (diffusivity, velocity, reaction),
        }
    }

    /// The formal adjoint `D∇² + v·∇ − κ`.
    pub fn adjoint(&self) -> Self {
        match self.kind {
            OperatorKind::ConvectionDiffusion {
                diffusivity,
                velocity,
                reaction,
            } => Self {
                kind: OperatorKind::ConvectionDiffusion {
                    diffusivity,
                    velocity: math::scale(&velocity, -1.0),
                    reaction,
                },
                dim: self.dim,
            },
            _ => *self,
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        let (_, v, _) = self.coefficients();
        v == [0.0; 3]
    }

    /// Exponent `a = v/(2D)` of the kernel prefactor `exp(a·(x − s))`.
    pub fn drift(&self) -> Point {
        let (d, v, _) = self.coefficients();
        math::scale(&v, 0.5 / d)
    }

    /// The radial equation `D(w'' + (d−1)w'/r) + c w = g` left after
    /// removing the drift.
    pub fn radial_ode(&self) -> RadialOde {
        let (d, v, kappa) = self.coefficients();
        RadialOde {
            dim: self.dim,
            diffusivity: d,
            shift: -(math::dot(&v, &v) / (4.0 * d) + kappa),
        }
    }
}

/// Value, gradient and Hessian of a scalar field at one point. Components
/// beyond `dim` are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldProbe {
    pub dim: usize,
    pub value: f64,
    pub gradient: Point,
    pub hessian: [[f64; 3]; 3],
}

impl FieldProbe {
    pub fn new(dim: usize, value: f64, gradient: Point, hessian: [[f64; 3]; 3]) -> Self {
        Self {
            dim,
            value,
            gradient,
            hessian,
        }
    }

    pub fn laplacian(&self) -> f64 {
        (0..self.dim).map(|i| self.hessian[i][i]).sum()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..3).all(|i| (0..3).all(|j| (self.hessian[i][j] - self.hessian[j][i]).abs() <= tol))
    }

    /// Derivative along `n`.
    pub fn directional(&self, n: &Point) -> f64 {
        math::dot(&self.gradient, n)
    }
}

/// `R{u}` at the probe point.
pub fn apply_operator(op: &OperatorSpec, probe: &FieldProbe) -> Result<f64> {
    if probe.dim != op.dim {
        return Err(Error::DimensionMismatch {
            expected: op.dim,
            found: probe.dim,
        });
    }
    let lap = probe.laplacian();
    Ok(match op.kind {
        OperatorKind::Helmholtz { gamma } => lap + gamma * gamma * probe.value,
        OperatorKind::ModifiedHelmholtz { lambda } => lap - lambda * lambda * probe.value,
        OperatorKind::ConvectionDiffusion {
            diffusivity,
            velocity,
            reaction,
        } => diffusivity * lap - math::dot(&velocity, &probe.gradient) - reaction * probe.value,
    })
}

/// Jet of `z ↦ exp(a·z) w(|z|)` from the radial jet of `w` at `r = |z|`.
pub(crate) fn prefactored_jet(dim: usize, drift: &Point, z: &Point, rj: &RadialJet) -> FieldProbe {
    let r = math::norm(z);
    let mut h = [[0.0; 3]; 3];
    let mut g = [0.0; 3];
    if r > 0.0 {
        let e = math::scale(z, 1.0 / r);
        g = math::scale(&e, rj.dw);
        for i in 0..dim {
            for j in 0..dim {
                let eij = e[i] * e[j];
                let id = if i == j { 1.0 } else { 0.0 };
                h[i][j] = rj.d2w * eij + rj.dw_over_r * (id - eij);
            }
        }
    } else {
        for (i, row) in h.iter_mut().enumerate().take(dim) {
            row[i] = rj.d2w;
        }
    }
    if *drift == [0.0; 3] {
        return FieldProbe::new(dim, rj.w, g, h);
    }
    let pre = math::exp(math::dot(drift, z));
    let a = drift;
    let mut grad = [0.0; 3];
    let mut hess = [[0.0; 3]; 3];
    for i in 0..dim {
        grad[i] = pre * (a[i] * rj.w + g[i]);
        for j in 0..dim {
            hess[i][j] = pre * (a[i] * a[j] * rj.w + a[i] * g[j] + g[i] * a[j] + h[i][j]);
        }
    }
    FieldProbe::new(dim, pre * rj.w, grad, hess)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn plane_wave_probe(gamma: f64, x: f64) -> FieldProbe {
        let mut h = [[0.0; 3]; 3];
        h[0][0] = -gamma * gamma * math::sin(gamma * x);
        FieldProbe::new(2, math::sin(gamma * x), [gamma * math::cos(gamma * x), 0.0, 0.0], h)
    }

    #[test]
    fn helmholtz_annihilates_plane_wave() {
        let gamma = 1.7;
        let op = OperatorSpec::helmholtz(2, gamma).unwrap();
        for i in 0..20 {
            let probe = plane_wave_probe(gamma, 0.3 * i as f64);
            assert_abs_diff_eq!(apply_operator(&op, &probe).unwrap(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn convection_diffusion_exponential() {
        let sigma = 1.0;
        let kappa = 1.5 * sigma * sigma;
        let eta = 0.5 * (sigma + math::sqrt(sigma * sigma + 2.0 * kappa));
        let op = OperatorSpec::convection_diffusion(2, 1.0, &[-sigma, -sigma], kappa).unwrap();
        for &(x, y) in &[(0.1, 0.2), (0.7, 0.4), (1.0, 1.0)] {
            let e = math::exp(-eta * (x + y));
            let h = [[eta * eta * e, eta * eta * e, 0.0], [eta * eta * e, eta * eta * e, 0.0], [0.0; 3]];
            let probe = FieldProbe::new(2, e, [-eta * e, -eta * e, 0.0], h);
            assert_abs_diff_eq!(apply_operator(&op, &probe).unwrap(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn modified_helmholtz_polynomial() {
        let op = OperatorSpec::modified_helmholtz(2, 1.0).unwrap();
        let mut h = [[0.0; 3]; 3];
        h[0][0] = 2.0;
        let probe = FieldProbe::new(2, 1.0, [2.0, 0.0, 0.0], h);
        assert_eq!(apply_operator(&op, &probe).unwrap(), 1.0);
    }

    #[test]
    fn dimension_mismatch() {
        let op = OperatorSpec::helmholtz(3, 1.0).unwrap();
        let probe = FieldProbe::new(2, 0.0, [0.0; 3], [[0.0; 3]; 3]);
        assert_eq!(
            apply_operator(&op, &probe),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
    }

    #[test]
    fn parameter_validation() {
        assert!(OperatorSpec::helmholtz(2, 0.0).is_err());
        assert!(OperatorSpec::helmholtz(4, 1.0).is_err());
        assert!(OperatorSpec::modified_helmholtz(3, -1.0).is_err());
        assert!(OperatorSpec::convection_diffusion(2, 0.0, &[1.0, 1.0], 0.0).is_err());
        assert_eq!(
            OperatorSpec::convection_diffusion(3, 1.0, &[1.0, 1.0], 0.0),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        );
        assert!(OperatorSpec::laplace(2).is_ok());
    }

    #[test]
    fn adjoint_flips_velocity() {
        let op = OperatorSpec::convection_diffusion(2, 2.0, &[1.0, -3.0], 0.5).unwrap();
        let adj = op.adjoint();
        assert_eq!(adj.coefficients().1, [-1.0, 3.0, 0.0]);
        assert_eq!(adj.adjoint(), op);
        assert!(!op.is_self_adjoint());
        let h = OperatorSpec::helmholtz(2, 1.0).unwrap();
        assert_eq!(h.adjoint(), h);
        assert!(h.is_self_adjoint());
    }

    #[test]
    fn radial_reduction_coefficients() {
        let op = OperatorSpec::convection_diffusion(2, 2.0, &[2.0, 0.0], 1.0).unwrap();
        assert_eq!(op.drift(), [0.5, 0.0, 0.0]);
        // c = −(|v|²/(4D) + κ) = −(4/8 + 1)
        assert_abs_diff_eq!(op.radial_ode().shift, -1.5, epsilon = 1e-15);
        let h = OperatorSpec::helmholtz(3, 2.0).unwrap();
        assert_abs_diff_eq!(h.radial_ode().shift, 4.0, epsilon = 1e-15);
    }
}
