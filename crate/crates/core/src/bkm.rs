//! Symmetric boundary knot method.
//!
//! The homogeneous part is expanded as
//!
//! ```text
//! u_h(x) = Σ_{s ∈ D} a_s u#(x; x_s) + Σ_{s ∈ N} a_s ∂u#(x; x_s)/∂n_s
//! ```
//!
//! where the second sum differentiates the kernel in its source argument.
//! Dirichlet rows collocate values, Neumann rows collocate `∂/∂n` at the
//! field point, so the matrix is symmetric whenever the kernel is even in
//! `x − s`. Rows and columns are ordered Dirichlet nodes first, then
//! Neumann nodes.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{Node, Role};
use crate::linalg::{self, Matrix, SolverChoice};
use crate::math;
use crate::operators::KernelTable;
use crate::problem::ProblemData;
use crate::rbf::{particular_field, DrmBundle};
use crate::Point;

/// Boundary nodes split by condition, each Neumann node with its normal.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Knots {
    pub dirichlet: Vec<Node>,
    pub neumann: Vec<Node>,
}

impl Knots {
    pub fn split(boundary: &[Node]) -> Result<Self> {
        let mut dirichlet = Vec::new();
        let mut neumann = Vec::new();
        for (index, node) in boundary.iter().enumerate() {
            match node.role {
                Role::Dirichlet => dirichlet.push(*node),
                Role::Neumann => {
                    if node.normal.is_none() {
                        return Err(Error::MissingNormal { index });
                    }
                    neumann.push(*node);
                }
                _ => return Err(Error::InvalidParameter("boundary list holds a non-boundary node")),
            }
        }
        if dirichlet.is_empty() && neumann.is_empty() {
            return Err(Error::BadCount { count: 0, min: 1 });
        }
        Ok(Self { dirichlet, neumann })
    }

    pub fn len(&self) -> usize {
        self.dirichlet.len() + self.neumann.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Node> {
        self.dirichlet.iter().chain(self.neumann.iter())
    }
}

fn normal(node: &Node) -> Point {
    node.normal.unwrap_or([0.0; 3])
}

/// Basis function of order `m` centred at `source`, evaluated at `x`
/// (value, and derivative along `n` when requested).
pub(crate) fn basis(kernel: &KernelTable, m: usize, source: &Node, x: &Point, n: Option<&Point>) -> Result<(f64, f64)> {
    let jet = kernel.jet(m, x, &source.position)?;
    Ok(match source.role {
        Role::Neumann => {
            let ns = normal(source);
            // ∂/∂s = −∂/∂x for a kernel of x − s
            let value = -jet.directional(&ns);
            let dn = n.map_or(0.0, |n| -math::quad_form(n, &jet.hessian, &ns));
            (value, dn)
        }
        _ => (jet.value, n.map_or(0.0, |n| jet.directional(n))),
    })
}

/// Hermite collocation matrix of order-`m` basis functions at the knots.
pub(crate) fn hermite_matrix(kernel: &KernelTable, m: usize, knots: &Knots) -> Result<Matrix> {
    let nodes: Vec<&Node> = knots.iter().collect();
    let size = nodes.len();
    let mut a = Matrix::zeros(size, size);
    for (i, row) in nodes.iter().enumerate() {
        let n = row.normal;
        let neumann_row = row.role == Role::Neumann;
        for (j, col) in nodes.iter().enumerate() {
            let (v, dn) = basis(kernel, m, col, &row.position, if neumann_row { n.as_ref() } else { None })?;
            a[(i, j)] = if neumann_row { dn } else { v };
        }
    }
    Ok(a)
}

/// Assembled BKM system.
#[derive(Debug, Clone)]
pub struct BkmSystem<'a> {
    pub matrix: Matrix,
    pub rhs: Vec<f64>,
    pub dirichlet_nodes: Vec<Node>,
    pub neumann_nodes: Vec<Node>,
    pub kernel: &'a KernelTable,
    pub particular: Option<&'a DrmBundle>,
}

/// Solved BKM coefficients with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct BkmSolution {
    pub coefficients: Vec<f64>,
    pub residual_norm: f64,
    pub cond_estimate: f64,
    pub used_tsvd: bool,
}

pub fn assemble_bkm<'a>(
    kernel: &'a KernelTable,
    boundary: &[Node],
    particular: Option<&'a DrmBundle>,
    problem: &dyn ProblemData,
) -> Result<BkmSystem<'a>> {
    if !problem.is_homogeneous() && particular.is_none() {
        return Err(Error::MissingParticular);
    }
    let particular = if problem.is_homogeneous() { None } else { particular };
    let knots = Knots::split(boundary)?;
    let matrix = hermite_matrix(kernel, 0, &knots)?;
    let mut rhs = Vec::with_capacity(knots.len());
    for node in knots.iter() {
        let n = node.normal;
        let (up, dup) = match particular {
            Some(b) => particular_field(b, &node.position, n.as_ref())?,
            None => (0.0, Some(0.0)),
        };
        rhs.push(match node.role {
            Role::Neumann => problem.neumann(&node.position, &normal(node)) - dup.unwrap_or(0.0),
            _ => problem.dirichlet(&node.position) - up,
        });
    }
    Ok(BkmSystem {
        matrix,
        rhs,
        dirichlet_nodes: knots.dirichlet,
        neumann_nodes: knots.neumann,
        kernel,
        particular,
    })
}

pub fn solve_bkm(system: &BkmSystem<'_>, solver: SolverChoice) -> Result<BkmSolution> {
    let report = linalg::solve_with_fallback(&system.matrix, &system.rhs, solver)?;
    Ok(BkmSolution {
        coefficients: report.x,
        residual_norm: report.residual_norm,
        cond_estimate: report.cond_estimate,
        used_tsvd: report.used_tsvd,
    })
}

/// `u = u_h + u_p` at each point.
pub fn evaluate_bkm(coefficients: &[f64], system: &BkmSystem<'_>, points: &[Point]) -> Result<Vec<f64>> {
    let sources: Vec<&Node> = system.dirichlet_nodes.iter().chain(system.neumann_nodes.iter()).collect();
    if coefficients.len() != sources.len() {
        return Err(Error::DimensionMismatch {
            expected: sources.len(),
            found: coefficients.len(),
        });
    }
    points
        .iter()
        .map(|x| {
            let mut u = 0.0;
            for (a, s) in coefficients.iter().zip(&sources) {
                u += a * basis(system.kernel, 0, s, x, None)?.0;
            }
            if let Some(b) = system.particular {
                u += particular_field(b, x, None)?.0;
            }
            Ok(u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{boundary_nodes, evaluation_grid, interior_nodes, Domain};
    use crate::operators::{build_kernel_table, OperatorSpec};
    use crate::problem::FnProblem;
    use crate::rbf::{build_particular_kernel, RbfKind};
    use approx::assert_abs_diff_eq;

    fn helmholtz() -> KernelTable {
        build_kernel_table(&OperatorSpec::helmholtz(2, 2f64.sqrt()).unwrap(), 0, 1.25 * 2f64.sqrt()).unwrap()
    }

    fn plane_wave(g: f64) -> impl ProblemData {
        FnProblem {
            solution: move |x: &Point| (math::sin(g * x[0]), [g * math::cos(g * x[0]), 0.0, 0.0]),
            iterates: |_: usize, _: &Point| None,
            homogeneous: true,
        }
    }

    #[test]
    fn dimensions_and_symmetry() {
        let k = helmholtz();
        let nodes = boundary_nodes(&Domain::UnitSquare, 16, 10.0 / 16.0).unwrap();
        let sys = assemble_bkm(&k, &nodes, None, &plane_wave(2f64.sqrt())).unwrap();
        assert_eq!(sys.dirichlet_nodes.len(), 10);
        assert_eq!(sys.neumann_nodes.len(), 6);
        assert_eq!((sys.matrix.rows(), sys.matrix.cols()), (16, 16));
        assert!(sys.matrix.asymmetry() <= 1e-10);
    }

    #[test]
    fn data_in_span_recovers_unit_vector() {
        let k = helmholtz();
        let nodes = boundary_nodes(&Domain::UnitSquare, 12, 1.0).unwrap();
        let src = nodes[4].position;
        let kr = &k;
        let p = FnProblem {
            solution: move |x: &Point| (kr.kernel_value(0, x, &src).unwrap(), [0.0; 3]),
            iterates: |_: usize, _: &Point| None,
            homogeneous: true,
        };
        let sys = assemble_bkm(&k, &nodes, None, &p).unwrap();
        let sol = solve_bkm(&sys, SolverChoice::Lu).unwrap();
        for (i, a) in sol.coefficients.iter().enumerate() {
            assert_abs_diff_eq!(*a, if i == 4 { 1.0 } else { 0.0 }, epsilon = 1e-8);
        }
    }

    #[test]
    fn zero_data_gives_zero_coefficients() {
        let k = helmholtz();
        let nodes = boundary_nodes(&Domain::UnitSquare, 20, 0.5).unwrap();
        let p = FnProblem {
            solution: |_: &Point| (0.0, [0.0; 3]),
            iterates: |_: usize, _: &Point| None,
            homogeneous: true,
        };
        let sys = assemble_bkm(&k, &nodes, None, &p).unwrap();
        assert!(sys.rhs.iter().all(|v| *v == 0.0));
        assert!(solve_bkm(&sys, SolverChoice::Lu).unwrap().coefficients.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn errors() {
        let k = helmholtz();
        let mut nodes = boundary_nodes(&Domain::UnitSquare, 8, 0.5).unwrap();
        let p = FnProblem {
            solution: |_: &Point| (0.0, [0.0; 3]),
            iterates: |_: usize, x: &Point| Some((x[0], [1.0, 0.0, 0.0])),
            homogeneous: false,
        };
        assert!(matches!(assemble_bkm(&k, &nodes, None, &p), Err(Error::MissingParticular)));
        let idx = nodes.iter().position(|n| n.role == Role::Neumann).unwrap();
        nodes[idx].normal = None;
        assert!(matches!(
            assemble_bkm(&k, &nodes, None, &plane_wave(1.0)),
            Err(Error::MissingNormal { .. })
        ));
    }

    #[test]
    fn homogeneous_plane_wave_mixed_conditions() {
        let g = 2f64.sqrt();
        let k = helmholtz();
        let nodes = boundary_nodes(&Domain::UnitSquare, 32, 0.75).unwrap();
        let p = plane_wave(g);
        let sys = assemble_bkm(&k, &nodes, None, &p).unwrap();
        let sol = solve_bkm(&sys, SolverChoice::Lu).unwrap();
        let pts: Vec<Point> = evaluation_grid(&Domain::UnitSquare, 100).unwrap().iter().map(|n| n.position).collect();
        let u = evaluate_bkm(&sol.coefficients, &sys, &pts).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (x, v) in pts.iter().zip(&u) {
            let e = p.dirichlet(x);
            num += (v - e) * (v - e);
            den += e * e;
        }
        assert!(math::sqrt(num / den) < 1e-6, "{}", math::sqrt(num / den));
        // collocation exactness at a Dirichlet knot, up to the solver residual
        // of this (badly conditioned) system
        let x = sys.dirichlet_nodes[3].position;
        let v = evaluate_bkm(&sol.coefficients, &sys, &[x]).unwrap()[0];
        assert_abs_diff_eq!(v, p.dirichlet(&x), epsilon = sol.residual_norm + 1e-12);
    }

    #[test]
    fn inhomogeneous_problem_uses_particular_solution() {
        // u = x² sin(x) cos(y), γ = √2: f = 2 sin x cos y + 4x cos x cos y
        let g = 2f64.sqrt();
        let op = OperatorSpec::helmholtz(2, g).unwrap();
        let r_max = 1.25 * 2f64.sqrt();
        let k = build_kernel_table(&op, 0, r_max).unwrap();
        let u = |x: &Point| {
            let (s, c) = (math::sin(x[0]), math::cos(x[0]));
            let cy = math::cos(x[1]);
            (
                x[0] * x[0] * s * cy,
                [(2.0 * x[0] * s + x[0] * x[0] * c) * cy, -x[0] * x[0] * s * math::sin(x[1]), 0.0],
            )
        };
        let f = |x: &Point| 2.0 * math::sin(x[0]) * math::cos(x[1]) + 4.0 * x[0] * math::cos(x[0]) * math::cos(x[1]);
        let p = FnProblem {
            solution: u,
            iterates: move |j: usize, x: &Point| if j == 0 { Some((f(x), [0.0; 3])) } else { None },
            homogeneous: false,
        };
        let boundary = boundary_nodes(&Domain::UnitSquare, 49, 1.0).unwrap();
        let mut centers = boundary.clone();
        centers.extend(interior_nodes(&Domain::UnitSquare, 15).unwrap());
        let fv: Vec<f64> = centers.iter().map(|n| f(&n.position)).collect();
        let pk = build_particular_kernel(&op, RbfKind::LinearPlusOne, r_max).unwrap();
        let drm = DrmBundle::fit(pk, &centers, &fv).unwrap();
        let sys = assemble_bkm(&k, &boundary, Some(&drm), &p).unwrap();
        let sol = solve_bkm(&sys, SolverChoice::Lu).unwrap();
        let pts: Vec<Point> = evaluation_grid(&Domain::UnitSquare, 200).unwrap().iter().map(|n| n.position).collect();
        let vals = evaluate_bkm(&sol.coefficients, &sys, &pts).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (x, v) in pts.iter().zip(&vals) {
            let e = u(x).0;
            num += (v - e) * (v - e);
            den += e * e;
        }
        assert!(math::sqrt(num / den) < 1e-2, "{}", math::sqrt(num / den));
    }
}
