//! Boundary particle method.
//!
//! The solution is expanded as `u = Σ_{n=0}^{M} Σ_k β_k^n ψ_{n,k}` where
//! `ψ_{n,k}` is the order-`n` Hermite basis function at knot `k`. Applying
//! `R^n` and using `R{u_n#} = u_{n−1}#` gives one boundary system per order,
//! all with the order-0 matrix `Q`:
//!
//! ```text
//! Q β^n = b^n,   b^n = g^n − Σ_{m=n+1}^{M} Σ_k β_k^m ψ_{m−n,k}   (on ∂Ω)
//! ```
//!
//! with `g^0` the boundary data and `g^n = R^{n−1}{f}` for `n ≥ 1`. The
//! orders are solved from `M` down to 0 against one factorization.

use alloc::vec;
use alloc::vec::Vec;

use crate::bkm::{basis, hermite_matrix, Knots};
use crate::error::{Error, Result};
use crate::geometry::{Node, Role};
use crate::linalg::{self, Factorization, Matrix, SolverChoice};
use crate::math;
use crate::operators::KernelTable;
use crate::problem::ProblemData;
use crate::Point;

pub const DEFAULT_ORDER: usize = 5;
/// Trailing orders with `‖β^n‖ ≤ EARLY_STOP·‖β^0‖` are dropped.
pub const EARLY_STOP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpmOptions {
    /// Truncation order `M`.
    pub order: usize,
    pub solver: SolverChoice,
    /// Factorize `Q` once (`true`) or afresh for every order.
    pub reuse_factorization: bool,
    pub early_stop: bool,
}

impl Default for BpmOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_ORDER,
            solver: SolverChoice::Lu,
            reuse_factorization: true,
            early_stop: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BpmSolution<'a> {
    /// `betas[n][k]`, n = 0..=truncation_order.
    pub betas: Vec<Vec<f64>>,
    pub truncation_order: usize,
    pub dirichlet_nodes: Vec<Node>,
    pub neumann_nodes: Vec<Node>,
    pub kernel: &'a KernelTable,
    pub cond_estimate: f64,
    pub used_tsvd: bool,
    /// `‖Q β^0 − b^0‖` after the full recursion.
    pub residual_norm: f64,
}

/// The order-0 Hermite matrix, identical to the homogeneous BKM matrix.
pub fn assemble_q(kernel: &KernelTable, boundary: &[Node]) -> Result<Matrix> {
    hermite_matrix(kernel, 0, &Knots::split(boundary)?)
}

fn nodes_of(knots: &Knots) -> Vec<&Node> {
    knots.iter().collect()
}

/// Right-hand side `b^n` given `β^{n+1..=M}` in `higher` (first entry is
/// order `n + 1`).
pub fn rhs_chain(
    problem: &dyn ProblemData,
    kernel: &KernelTable,
    boundary: &[Node],
    n: usize,
    higher: &[Vec<f64>],
) -> Result<Vec<f64>> {
    rhs_for(problem, kernel, &Knots::split(boundary)?, n, higher)
}

fn rhs_for(problem: &dyn ProblemData, kernel: &KernelTable, knots: &Knots, n: usize, higher: &[Vec<f64>]) -> Result<Vec<f64>> {
    let nodes = nodes_of(knots);
    if let Some(m) = Some(n + higher.len()).filter(|&m| m > kernel.max_order()) {
        return Err(Error::OrderOutOfRange {
            order: m,
            max: kernel.max_order(),
        });
    }
    let mut b = Vec::with_capacity(nodes.len());
    for row in &nodes {
        let x = &row.position;
        let nrm = row.normal.unwrap_or([0.0; 3]);
        let neumann = row.role == Role::Neumann;
        let mut g = if n == 0 {
            if neumann {
                problem.neumann(x, &nrm)
            } else {
                problem.dirichlet(x)
            }
        } else if problem.is_homogeneous() {
            0.0
        } else {
            let (v, grad) = problem
                .forcing_iterate(n - 1, x)
                .ok_or(Error::MissingOperatorIterate { order: n - 1 })?;
            if neumann {
                math::dot(&grad, &nrm)
            } else {
                v
            }
        };
        for (offset, beta) in higher.iter().enumerate() {
            let shift = offset + 1;
            for (coef, src) in beta.iter().zip(&nodes) {
                if *coef == 0.0 {
                    continue;
                }
                let (v, dn) = basis(kernel, shift, src, x, neumann.then_some(&nrm))?;
                g -= coef * if neumann { dn } else { v };
            }
        }
        b.push(g);
    }
    Ok(b)
}

fn norm(v: &[f64]) -> f64 {
    linalg::norm2(v)
}

pub fn solve_bpm<'a>(
    kernel: &'a KernelTable,
    boundary: &[Node],
    problem: &dyn ProblemData,
    options: &BpmOptions,
) -> Result<BpmSolution<'a>> {
    let knots = Knots::split(boundary)?;
    let q = hermite_matrix(kernel, 0, &knots)?;
    let mut order = if problem.is_homogeneous() { 0 } else { options.order };
    if order > kernel.max_order() {
        return Err(Error::OrderOutOfRange {
            order,
            max: kernel.max_order(),
        });
    }

    let b0_plain = rhs_for(problem, kernel, &knots, 0, &[])?;
    // The LU/TSVD decision is always taken against the raw boundary data so a
    // fresh factorization is the same operator as the shared one.
    let factor = || -> Result<Factorization> { linalg::factor_with_fallback(&q, &[&b0_plain], options.solver) };
    let shared = factor()?;
    let solve_with = |b: &[f64]| -> Result<(Vec<f64>, f64, bool)> {
        let x;
        let (cond, tsvd);
        if options.reuse_factorization {
            x = shared.solve(b);
            cond = shared.cond_estimate;
            tsvd = !shared.is_lu();
        } else {
            let f = factor()?;
            x = f.solve(b);
            cond = f.cond_estimate;
            tsvd = !f.is_lu();
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularSystem);
        }
        Ok((x, cond, tsvd))
    };

    // Trim trailing orders whose stand-alone coefficients are negligible
    // against the homogeneous estimate of β^0.
    if options.early_stop && order > 0 {
        let beta0_estimate = norm(&solve_with(&b0_plain)?.0);
        while order > 0 {
            let b = rhs_for(problem, kernel, &knots, order, &[])?;
            let top = solve_with(&b)?.0;
            if norm(&top) > EARLY_STOP * beta0_estimate {
                break;
            }
            order -= 1;
        }
    }

    let mut betas: Vec<Vec<f64>> = vec![Vec::new(); order + 1];
    let mut cond = shared.cond_estimate;
    let mut used_tsvd = !shared.is_lu();
    let mut b_last = Vec::new();
    for n in (0..=order).rev() {
        let b = rhs_for(problem, kernel, &knots, n, &betas[n + 1..])?;
        let (x, c, t) = solve_with(&b)?;
        cond = cond.max(c);
        used_tsvd |= t;
        betas[n] = x;
        b_last = b;
    }
    let residual_norm = linalg::residual_norm(&q, &betas[0], &b_last);
    Ok(BpmSolution {
        betas,
        truncation_order: order,
        dirichlet_nodes: knots.dirichlet,
        neumann_nodes: knots.neumann,
        kernel,
        cond_estimate: cond,
        used_tsvd,
        residual_norm,
    })
}

/// `u(x) = Σ_n Σ_k β_k^n ψ_{n,k}(x)`.
pub fn evaluate_bpm(sol: &BpmSolution<'_>, points: &[Point]) -> Result<Vec<f64>> {
    let sources: Vec<&Node> = sol.dirichlet_nodes.iter().chain(sol.neumann_nodes.iter()).collect();
    points
        .iter()
        .map(|x| {
            let mut u = 0.0;
            for (n, beta) in sol.betas.iter().enumerate() {
                for (coef, s) in beta.iter().zip(&sources) {
                    if *coef != 0.0 {
                        u += coef * basis(sol.kernel, n, s, x, None)?.0;
                    }
                }
            }
            Ok(u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bkm::{assemble_bkm, solve_bkm};
    use crate::geometry::{boundary_nodes, evaluation_grid, Domain};
    use crate::operators::{build_kernel_table, OperatorSpec};
    use crate::problem::FnProblem;

    fn table(order: usize) -> KernelTable {
        build_kernel_table(&OperatorSpec::helmholtz(2, 2f64.sqrt()).unwrap(), order, 1.25 * 2f64.sqrt()).unwrap()
    }

    #[test]
    fn q_matches_bkm_matrix() {
        let k = table(2);
        let nodes = boundary_nodes(&Domain::UnitSquare, 25, 0.6).unwrap();
        let p = FnProblem {
            solution: |x: &Point| (x[0], [1.0, 0.0, 0.0]),
            iterates: |_: usize, _: &Point| None,
            homogeneous: true,
        };
        let q = assemble_q(&k, &nodes).unwrap();
        let sys = assemble_bkm(&k, &nodes, None, &p).unwrap();
        assert_eq!(q, sys.matrix);
        assert_eq!(q.rows(), 25);
        assert!(q.asymmetry() <= 1e-10);
    }

    #[test]
    fn homogeneous_limit_equals_bkm() {
        let k = table(3);
        let nodes = boundary_nodes(&Domain::UnitSquare, 24, 0.75).unwrap();
        let g = 2f64.sqrt();
        let p = FnProblem {
            solution: move |x: &Point| (math::sin(g * x[0]), [g * math::cos(g * x[0]), 0.0, 0.0]),
            iterates: |_: usize, _: &Point| None,
            homogeneous: true,
        };
        let sol = solve_bpm(&k, &nodes, &p, &BpmOptions::default()).unwrap();
        assert_eq!(sol.truncation_order, 0);
        let bkm = solve_bkm(&assemble_bkm(&k, &nodes, None, &p).unwrap(), SolverChoice::Lu).unwrap();
        for (a, b) in sol.betas[0].iter().zip(&bkm.coefficients) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
        }
        for n in 1..4 {
            let b = rhs_chain(&p, &k, &nodes, n, &[]).unwrap();
            assert!(b.iter().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn zero_coefficients_evaluate_to_zero() {
        let k = table(1);
        let nodes = boundary_nodes(&Domain::UnitSquare, 8, 1.0).unwrap();
        let sol = BpmSolution {
            betas: vec![vec![0.0; 8]; 2],
            truncation_order: 1,
            dirichlet_nodes: nodes,
            neumann_nodes: Vec::new(),
            kernel: &k,
            cond_estimate: 1.0,
            used_tsvd: false,
            residual_norm: 0.0,
        };
        assert_eq!(evaluate_bpm(&sol, &[[0.3, 0.3, 0.0]]).unwrap(), vec![0.0]);
    }

    /// `u = x² sin(x) cos(y)` with γ = √2 (d = 1): f and R{f} in closed
    /// form, R²{f} = 0.
    fn quadratic_wave() -> impl ProblemData {
        FnProblem {
            solution: |x: &Point| {
                let (s, c) = (math::sin(x[0]), math::cos(x[0]));
                let (sy, cy) = (math::sin(x[1]), math::cos(x[1]));
                (
                    x[0] * x[0] * s * cy,
                    [(2.0 * x[0] * s + x[0] * x[0] * c) * cy, -x[0] * x[0] * s * sy, 0.0],
                )
            },
            iterates: |j: usize, x: &Point| {
                let (s, c) = (math::sin(x[0]), math::cos(x[0]));
                let (sy, cy) = (math::sin(x[1]), math::cos(x[1]));
                match j {
                    0 => Some((
                        2.0 * s * cy + 4.0 * x[0] * c * cy,
                        [(6.0 * c - 4.0 * x[0] * s) * cy, -(2.0 * s + 4.0 * x[0] * c) * sy, 0.0],
                    )),
                    1 => Some((-8.0 * s * cy, [-8.0 * c * cy, 8.0 * s * sy, 0.0])),
                    _ => Some((0.0, [0.0; 3])),
                }
            },
            homogeneous: false,
        }
    }

    #[test]
    fn reuse_matches_fresh_factorizations() {
        let k = table(5);
        let nodes = boundary_nodes(&Domain::UnitSquare, 30, 1.0).unwrap();
        let p = quadratic_wave();
        let opts = BpmOptions::default();
        let a = solve_bpm(&k, &nodes, &p, &opts).unwrap();
        let b = solve_bpm(
            &k,
            &nodes,
            &p,
            &BpmOptions {
                reuse_factorization: false,
                ..opts
            },
        )
        .unwrap();
        assert_eq!(a.truncation_order, 2);
        for (x, y) in a.betas.iter().flatten().zip(b.betas.iter().flatten()) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1.0));
        }
    }

    #[test]
    fn inhomogeneous_helmholtz_accuracy() {
        let k = table(5);
        let nodes = boundary_nodes(&Domain::UnitSquare, 40, 1.0).unwrap();
        let p = quadratic_wave();
        let sol = solve_bpm(&k, &nodes, &p, &BpmOptions::default()).unwrap();
        let pts: Vec<Point> = evaluation_grid(&Domain::UnitSquare, 100).unwrap().iter().map(|n| n.position).collect();
        let u = evaluate_bpm(&sol, &pts).unwrap();
        let (mut num, mut den) = (0.0, 0.0);
        for (x, v) in pts.iter().zip(&u) {
            let e = p.dirichlet(x);
            num += (v - e) * (v - e);
            den += e * e;
        }
        assert!(math::sqrt(num / den) < 1e-3, "{}", math::sqrt(num / den));
    }

    #[test]
    fn missing_iterate_is_reported() {
        let k = table(3);
        let nodes = boundary_nodes(&Domain::UnitSquare, 10, 1.0).unwrap();
        let p = FnProblem {
            solution: |_: &Point| (0.0, [0.0; 3]),
            iterates: |j: usize, _: &Point| if j == 0 { Some((1.0, [0.0; 3])) } else { None },
            homogeneous: false,
        };
        let opts = BpmOptions {
            order: 3,
            ..BpmOptions::default()
        };
        assert!(matches!(
            solve_bpm(&k, &nodes, &p, &opts),
            Err(Error::MissingOperatorIterate { order: 2 })
        ));
        assert!(matches!(
            solve_bpm(&table(1), &nodes, &p, &opts),
            Err(Error::OrderOutOfRange { .. })
        ));
    }
}
