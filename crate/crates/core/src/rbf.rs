//! Dual-reciprocity machinery: radial basis functions for the source term
//! and the particular-solution kernels `φ̂` with `R{φ̂} = φ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::Node;
use crate::linalg::{self, Matrix, SolverChoice};
use crate::math;
use crate::operators::radial::{self, RadialSource, TabulatedProfile};
use crate::operators::{prefactored_jet, FieldProbe, OperatorSpec, RadialJet};
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RbfKind {
    /// `1 + r`
    LinearPlusOne,
    /// `r² log r`
    ThinPlate,
    /// `r³`
    PolyharmonicCubic,
    /// `√(r² + c²)`
    Multiquadric { c: f64 },
}

impl Default for RbfKind {
    /// `r³` with a constant term: parameter-free and markedly more accurate
    /// than `1 + r` on smooth sources.
    fn default() -> Self {
        RbfKind::PolyharmonicCubic
    }
}

impl RbfKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            RbfKind::Multiquadric { c } if !(c > 0.0 && c.is_finite()) => {
                Err(Error::InvalidParameter("multiquadric shape parameter must be positive"))
            }
            _ => Ok(()),
        }
    }

    /// Thin-plate splines and cubics need a constant term appended to the
    /// interpolant.
    pub fn needs_constant(&self) -> bool {
        matches!(self, RbfKind::ThinPlate | RbfKind::PolyharmonicCubic)
    }

    /// `φ^{(k)}(0)` for k = 0..=3 where they exist.
    fn taylor_at_origin(&self) -> [Option<f64>; 4] {
        match *self {
            RbfKind::LinearPlusOne => [Some(1.0), Some(1.0), Some(0.0), Some(0.0)],
            RbfKind::ThinPlate => [Some(0.0), Some(0.0), None, None],
            RbfKind::PolyharmonicCubic => [Some(0.0), Some(0.0), Some(0.0), Some(6.0)],
            RbfKind::Multiquadric { c } => [Some(c), Some(0.0), Some(1.0 / c), Some(0.0)],
        }
    }
}

/// `d^k φ / dr^k` at `r`, with removable singularities at the origin taken
/// by their limits.
pub fn rbf_eval(kind: RbfKind, r: f64, deriv: usize) -> Result<f64> {
    kind.validate()?;
    if !(r >= 0.0) {
        return Err(Error::InvalidParameter("radius must be non-negative"));
    }
    let unsupported = Err(Error::UnsupportedDerivative { deriv });
    match kind {
        RbfKind::LinearPlusOne => match deriv {
            0 => Ok(1.0 + r),
            1 => Ok(1.0),
            2 => Ok(0.0),
            _ => unsupported,
        },
        RbfKind::ThinPlate => {
            if r == 0.0 {
                return match deriv {
                    0 | 1 => Ok(0.0),
                    2 => Ok(f64::NEG_INFINITY),
                    _ => unsupported,
                };
            }
            let l = math::ln(r);
            match deriv {
                0 => Ok(r * r * l),
                1 => Ok(r * (2.0 * l + 1.0)),
                2 => Ok(2.0 * l + 3.0),
                _ => unsupported,
            }
        }
        RbfKind::PolyharmonicCubic => match deriv {
            0 => Ok(r * r * r),
            1 => Ok(3.0 * r * r),
            2 => Ok(6.0 * r),
            3 => Ok(6.0),
            4 => Ok(0.0),
            _ => unsupported,
        },
        RbfKind::Multiquadric { c } => {
            let c2 = c * c;
            let f = math::sqrt(r * r + c2);
            match deriv {
                0 => Ok(f),
                1 => Ok(r / f),
                2 => Ok(c2 / (f * f * f)),
                3 => Ok(-3.0 * c2 * r / math::powi(f, 5)),
                4 => Ok(-3.0 * c2 * (c2 - 4.0 * r * r) / math::powi(f, 7)),
                _ => unsupported,
            }
        }
    }
}

fn phi(kind: RbfKind, r: f64) -> f64 {
    match kind {
        RbfKind::LinearPlusOne => 1.0 + r,
        RbfKind::ThinPlate if r == 0.0 => 0.0,
        RbfKind::ThinPlate => r * r * math::ln(r),
        RbfKind::PolyharmonicCubic => r * r * r,
        RbfKind::Multiquadric { c } => math::sqrt(r * r + c * c),
    }
}

/// Radial profile of the preimage of `φ` (and of the constant term) under the
/// drift-free radial form of an operator. When that form has a growing
/// homogeneous solution, the preimage free of it is used.
#[derive(Debug, Clone)]
pub struct ParticularKernel {
    op: OperatorSpec,
    kind: RbfKind,
    r_max: f64,
    drift: Point,
    profile: TabulatedProfile,
}

pub fn build_particular_kernel(op: &OperatorSpec, kind: RbfKind, r_max: f64) -> Result<ParticularKernel> {
    kind.validate()?;
    if !(r_max > 0.0 && r_max.is_finite()) {
        return Err(Error::InvalidParameter("r_max must be positive"));
    }
    let ode = op.radial_ode();
    let g = move |r: f64| phi(kind, r);
    let source = RadialSource {
        value: &g,
        taylor: kind.taylor_at_origin(),
    };
    let profile = if ode.shift < 0.0 {
        radial::minimal_growth(&ode, &source, r_max)?
    } else {
        radial::integrate(&ode, Some(&source), 0.0, 1, r_max)?.remove(0)
    };
    Ok(ParticularKernel {
        op: *op,
        kind,
        r_max,
        drift: op.drift(),
        profile,
    })
}

impl ParticularKernel {
    pub fn op(&self) -> &OperatorSpec {
        &self.op
    }

    pub fn kind(&self) -> RbfKind {
        self.kind
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn radial(&self, r: f64) -> Result<RadialJet> {
        self.profile.eval(r)
    }

    /// Jet of `x ↦ Φ̂(x; s) = exp(a·(x−s)) φ̂(|x−s|)`.
    pub fn jet(&self, x: &Point, s: &Point) -> Result<FieldProbe> {
        let z = math::sub(x, s);
        let rj = self.profile.eval(math::norm(&z))?;
        Ok(prefactored_jet(self.op.dim(), &self.drift, &z, &rj))
    }

    /// Jet of the preimage of the constant term, `exp(a·x) w(|x|)` with
    /// `D∇²w + c w = 1`.
    fn constant_jet(&self, x: &Point) -> FieldProbe {
        let ode = self.op.radial_ode();
        let rj = if ode.shift != 0.0 {
            RadialJet {
                w: 1.0 / ode.shift,
                dw: 0.0,
                dw_over_r: 0.0,
                d2w: 0.0,
            }
        } else {
            let k = 1.0 / (2.0 * self.op.dim() as f64 * ode.diffusivity);
            let r = math::norm(x);
            RadialJet {
                w: k * r * r,
                dw: 2.0 * k * r,
                dw_over_r: 2.0 * k,
                d2w: 2.0 * k,
            }
        };
        prefactored_jet(self.op.dim(), &self.drift, x, &rj)
    }
}

/// Interpolation matrix `[φ(|x_i − x_j|)]`, bordered by a constant row and
/// column when the basis needs one.
fn interpolation_matrix(points: &[Point], kind: RbfKind) -> Matrix {
    let n = points.len();
    let extra = usize::from(kind.needs_constant());
    Matrix::from_fn(n + extra, n + extra, |i, j| {
        if i < n && j < n {
            phi(kind, math::norm(&math::sub(&points[i], &points[j])))
        } else if i == n && j == n {
            0.0
        } else {
            1.0
        }
    })
}

/// Coefficients `α` of `f ≈ Σ α_j φ(|x − x_j|) (+ α_{N} · 1)`.
pub fn fit_source(nodes: &[Node], f_values: &[f64], kind: RbfKind) -> Result<Vec<f64>> {
    let points: Vec<Point> = nodes.iter().map(|n| n.position).collect();
    fit_points(&points, f_values, kind)
}

fn fit_points(points: &[Point], f_values: &[f64], kind: RbfKind) -> Result<Vec<f64>> {
    kind.validate()?;
    if points.is_empty() {
        return Err(Error::BadCount { count: 0, min: 1 });
    }
    if points.len() != f_values.len() {
        return Err(Error::DimensionMismatch {
            expected: points.len(),
            found: f_values.len(),
        });
    }
    let a = interpolation_matrix(points, kind);
    let mut rhs = f_values.to_vec();
    if kind.needs_constant() {
        rhs.push(0.0);
    }
    let report = linalg::solve_with_fallback(&a, &rhs, SolverChoice::Lu).map_err(|_| Error::SingularInterpolation)?;
    Ok(report.x)
}

/// A fitted source term together with its particular solution.
#[derive(Debug, Clone)]
pub struct DrmBundle {
    pub kernel: ParticularKernel,
    pub centers: Vec<Point>,
    /// Coefficients of `Φ̂(·; x_j)`.
    pub alpha: Vec<f64>,
    /// Coefficient of the constant-term preimage, when the basis has one.
    pub constant: Option<f64>,
}

impl DrmBundle {
    /// Fits `f` at `nodes` and attaches the particular kernel. With a drift
    /// `a` the fit is done on `exp(−a·x) f`, so that every basis function
    /// times `exp(a·x)` has an exact preimage.
    pub fn fit(kernel: ParticularKernel, nodes: &[Node], f_values: &[f64]) -> Result<Self> {
        let centers: Vec<Point> = nodes.iter().map(|n| n.position).collect();
        let a = kernel.drift;
        let weighted: Vec<f64> = centers
            .iter()
            .zip(f_values)
            .map(|(x, f)| f * math::exp(-math::dot(&a, x)))
            .collect();
        let mut coef = fit_points(&centers, &weighted, kernel.kind)?;
        let constant = if kernel.kind.needs_constant() { coef.pop() } else { None };
        let alpha = centers
            .iter()
            .zip(&coef)
            .map(|(x, c)| c * math::exp(math::dot(&a, x)))
            .collect();
        Ok(Self {
            kernel,
            centers,
            alpha,
            constant,
        })
    }

    /// The fitted approximation `f̃(x)` of the source.
    pub fn approximate_source(&self, x: &Point) -> f64 {
        let a = &self.kernel.drift;
        let mut acc = 0.0;
        for (c, al) in self.centers.iter().zip(&self.alpha) {
            let z = math::sub(x, c);
            acc += al * math::exp(math::dot(a, &z)) * phi(self.kernel.kind, math::norm(&z));
        }
        if let Some(k) = self.constant {
            acc += k * math::exp(math::dot(a, x));
        }
        acc
    }

    /// Jet of `u_p` at `x`.
    pub fn jet(&self, x: &Point) -> Result<FieldProbe> {
        let dim = self.kernel.op.dim();
        let mut out = FieldProbe::new(dim, 0.0, [0.0; 3], [[0.0; 3]; 3]);
        let mut add = |p: &FieldProbe, w: f64| {
            out.value += w * p.value;
            for i in 0..3 {
                out.gradient[i] += w * p.gradient[i];
                for j in 0..3 {
                    out.hessian[i][j] += w * p.hessian[i][j];
                }
            }
        };
        for (c, al) in self.centers.iter().zip(&self.alpha) {
            add(&self.kernel.jet(x, c)?, *al);
        }
        if let Some(k) = self.constant {
            add(&self.kernel.constant_jet(x), k);
        }
        Ok(out)
    }
}

/// `u_p(x)` and, when `n` is given, `∂u_p/∂n`.
pub fn particular_field(bundle: &DrmBundle, x: &Point, n: Option<&Point>) -> Result<(f64, Option<f64>)> {
    let a = &bundle.kernel.drift;
    let mut u = 0.0;
    let mut dn = 0.0;
    let mut accumulate = |p: &FieldProbe, w: f64| {
        u += w * p.value;
        if let Some(n) = n {
            dn += w * p.directional(n);
        }
    };
    for (c, al) in bundle.centers.iter().zip(&bundle.alpha) {
        if *al == 0.0 {
            continue;
        }
        let z = math::sub(x, c);
        let rj = bundle.kernel.profile.eval(math::norm(&z))?;
        accumulate(&prefactored_jet(bundle.kernel.op.dim(), a, &z, &rj), *al);
    }
    if let Some(k) = bundle.constant {
        accumulate(&bundle.kernel.constant_jet(x), k);
    }
    Ok((u, n.map(|_| dn)))
}
