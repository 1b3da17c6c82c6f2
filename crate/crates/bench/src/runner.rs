//! One benchmark run per table cell, and sweeps over node counts.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rbfpde::bkm::{assemble_bkm, evaluate_bkm, solve_bkm};
use rbfpde::bpm::{evaluate_bpm, solve_bpm, BpmOptions, DEFAULT_ORDER};
use rbfpde::geometry::{boundary_nodes, evaluation_grid, interior_nodes, square_lattice};
use rbfpde::linalg::SolverChoice;
use rbfpde::mkm::{assemble_mkm, default_shape_parameter, evaluate_mkm, solve_mkm};
use rbfpde::operators::build_kernel_table;
use rbfpde::problem::ProblemData;
use rbfpde::rbf::{build_particular_kernel, DrmBundle, RbfKind};
use rbfpde::{Domain, Node, Point};

use crate::metrics::{average_relative_error, l2_relative_error, rms_relative_error};
use crate::registry::{Cell, ProblemSpec, Registry};
use crate::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Bkm,
    Bpm,
    Mkm,
}

impl FromStr for Method {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bkm" => Ok(Method::Bkm),
            "bpm" => Ok(Method::Bpm),
            "mkm" => Ok(Method::Mkm),
            _ => Err(BenchError::UnknownMethod(s.to_string())),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Bkm => "bkm",
            Method::Bpm => "bpm",
            Method::Mkm => "mkm",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub boundary: usize,
    /// DRM interpolation points for BKM, collocation points for MKM.
    pub interior: usize,
    /// Points per side of a unit-square MKM lattice; overrides the counts.
    pub lattice: Option<usize>,
    /// BPM truncation order.
    pub order: usize,
    pub dirichlet_fraction: Option<f64>,
    pub solver: SolverChoice,
    pub drm_basis: RbfKind,
    /// MKM multiquadric shape parameter.
    pub shape: Option<f64>,
    /// Evaluation points; 460 in 2D and 1012 in 3D by default.
    pub eval_points: Option<usize>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            boundary: 32,
            interior: 0,
            lattice: None,
            order: DEFAULT_ORDER,
            dirichlet_fraction: None,
            solver: SolverChoice::Lu,
            drm_basis: RbfKind::default(),
            shape: None,
            eval_points: None,
        }
    }
}

impl RunOptions {
    pub fn for_cell(cell: &Cell) -> Result<Self, BenchError> {
        let method: Method = cell.method.parse()?;
        Ok(Self {
            boundary: cell.boundary,
            interior: cell.interior,
            lattice: if method == Method::Mkm { cell.lattice } else { None },
            ..Self::default()
        })
    }
}

/// Outcome of one run. A failed run carries the error text and `NaN`
/// errors instead of aborting the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    pub problem: String,
    pub method: Method,
    pub boundary_count: usize,
    pub interior_count: usize,
    pub truncation_order: usize,
    pub l2_rel_error: f64,
    pub avg_rel_error: f64,
    pub rms_rel_error: f64,
    pub cond_estimate: f64,
    pub used_tsvd: bool,
    /// Seconds.
    pub wall_time: f64,
    pub failure: Option<String>,
}

impl BenchmarkResult {
    pub fn succeeded(&self) -> bool {
        self.failure.is_none()
    }
}

pub fn default_eval_points(domain: &Domain) -> usize {
    if domain.dimension() == 2 {
        460
    } else {
        1012
    }
}

struct Outcome {
    values: Vec<f64>,
    boundary: usize,
    interior: usize,
    order: usize,
    cond: f64,
    tsvd: bool,
}

fn kernel_radius(domain: &Domain) -> f64 {
    domain.diameter() * (1.0 + 1e-9)
}

fn solve(problem: &ProblemSpec, method: Method, o: &RunOptions, points: &[Point]) -> Result<Outcome, BenchError> {
    let domain = &problem.domain;
    let fraction = o.dirichlet_fraction.unwrap_or(problem.dirichlet_fraction);
    let r_max = kernel_radius(domain);
    match method {
        Method::Bkm => {
            let boundary = boundary_nodes(domain, o.boundary, fraction)?;
            let table = build_kernel_table(&problem.op, 0, r_max)?;
            let mut interior = Vec::new();
            let bundle = if problem.is_homogeneous() {
                None
            } else {
                interior = interior_nodes(domain, o.interior)?;
                let kernel = build_particular_kernel(&problem.op, o.drm_basis, r_max)?;
                let nodes: Vec<Node> = boundary.iter().chain(&interior).copied().collect();
                let f: Vec<f64> = nodes.iter().map(|n| problem.forcing(&n.position)).collect();
                Some(DrmBundle::fit(kernel, &nodes, &f)?)
            };
            let system = assemble_bkm(&table, &boundary, bundle.as_ref(), problem)?;
            let sol = solve_bkm(&system, o.solver)?;
            Ok(Outcome {
                values: evaluate_bkm(&sol.coefficients, &system, points)?,
                boundary: boundary.len(),
                interior: interior.len(),
                order: 0,
                cond: sol.cond_estimate,
                tsvd: sol.used_tsvd,
            })
        }
        Method::Bpm => {
            let boundary = boundary_nodes(domain, o.boundary, fraction)?;
            let order = if problem.is_homogeneous() { 0 } else { o.order };
            let table = build_kernel_table(&problem.op, order, r_max)?;
            let options = BpmOptions {
                order,
                solver: o.solver,
                ..BpmOptions::default()
            };
            let sol = solve_bpm(&table, &boundary, problem, &options)?;
            Ok(Outcome {
                values: evaluate_bpm(&sol, points)?,
                boundary: boundary.len(),
                interior: 0,
                order: sol.truncation_order,
                cond: sol.cond_estimate,
                tsvd: sol.used_tsvd,
            })
        }
        Method::Mkm => {
            let (boundary, interior) = match o.lattice {
                Some(per_side) if *domain == Domain::UnitSquare => square_lattice(per_side, fraction)?,
                Some(_) => {
                    return Err(BenchError::Core(rbfpde::Error::InvalidParameter(
                        "lattices are only defined on the unit square",
                    )))
                }
                None => (boundary_nodes(domain, o.boundary, fraction)?, interior_nodes(domain, o.interior)?),
            };
            let c = o.shape.unwrap_or_else(|| default_shape_parameter(&boundary, &interior));
            let system = assemble_mkm(&problem.op, &boundary, &interior, RbfKind::Multiquadric { c }, problem)?;
            let sol = solve_mkm(&system, o.solver)?;
            Ok(Outcome {
                values: evaluate_mkm(&sol.coefficients, &system, points)?,
                boundary: boundary.len(),
                interior: interior.len(),
                order: 0,
                cond: sol.cond_estimate,
                tsvd: sol.used_tsvd,
            })
        }
    }
}

/// Generates nodes, solves, and measures the error on the standard
/// evaluation grid. Deterministic for fixed inputs.
pub fn run_case(problem: &ProblemSpec, method: Method, options: &RunOptions) -> BenchmarkResult {
    let start = Instant::now();
    let count = options.eval_points.unwrap_or_else(|| default_eval_points(&problem.domain));
    let outcome = evaluation_grid(&problem.domain, count)
        .map_err(BenchError::from)
        .and_then(|grid| {
            let points: Vec<Point> = grid.iter().map(|n| n.position).collect();
            let out = solve(problem, method, options, &points)?;
            let exact: Vec<f64> = points.iter().map(|x| problem.exact_value(x)).collect();
            if out.values.iter().any(|v| !v.is_finite()) {
                return Err(BenchError::Core(rbfpde::Error::SingularSystem));
            }
            let errors = (
                l2_relative_error(&out.values, &exact)?,
                average_relative_error(&out.values, &exact)?,
                rms_relative_error(&out.values, &exact)?,
            );
            Ok((out, errors))
        });
    let wall_time = start.elapsed().as_secs_f64();
    match outcome {
        Ok((out, (l2, avg, rms))) => BenchmarkResult {
            problem: problem.id.clone(),
            method,
            boundary_count: out.boundary,
            interior_count: out.interior,
            truncation_order: out.order,
            l2_rel_error: l2,
            avg_rel_error: avg,
            rms_rel_error: rms,
            cond_estimate: out.cond,
            used_tsvd: out.tsvd,
            wall_time,
            failure: None,
        },
        Err(e) => BenchmarkResult {
            problem: problem.id.clone(),
            method,
            boundary_count: options.lattice.map_or(options.boundary, |p| 4 * (p - 1)),
            interior_count: options.lattice.map_or(options.interior, |p| (p - 2) * (p - 2)),
            truncation_order: options.order,
            l2_rel_error: f64::NAN,
            avg_rel_error: f64::NAN,
            rms_rel_error: f64::NAN,
            cond_estimate: f64::NAN,
            used_tsvd: false,
            wall_time,
            failure: Some(e.to_string()),
        },
    }
}

/// Runs a published cell and reports whether it meets its bound.
pub fn run_cell(registry: &Registry, cell: &Cell) -> Result<(BenchmarkResult, bool), BenchError> {
    let problem = registry.get(&cell.problem)?;
    let method: Method = cell.method.parse()?;
    let result = run_case(problem, method, &RunOptions::for_cell(cell)?);
    let pass = result.succeeded() && result.l2_rel_error <= cell.bound;
    Ok((result, pass))
}

/// One run per boundary count. Failures are recorded and the sweep goes on.
pub fn convergence_sweep(
    problem: &ProblemSpec,
    method: Method,
    schedule: &[usize],
    base: &RunOptions,
) -> Result<Vec<BenchmarkResult>, BenchError> {
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(BenchError::Schedule);
    }
    Ok(schedule
        .iter()
        .map(|&boundary| run_case(problem, method, &RunOptions { boundary, ..base.clone() }))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Bkm, Method::Bpm, Method::Mkm] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert!("fem".parse::<Method>().is_err());
    }

    #[test]
    fn failures_become_records() {
        let r = Registry::builtin().unwrap();
        let p = r.get("helmholtz2d-d1").unwrap();
        let res = run_case(p, Method::Bkm, &RunOptions { boundary: 2, ..RunOptions::default() });
        assert!(!res.succeeded());
        assert!(res.l2_rel_error.is_nan());
    }

    #[test]
    fn sweep_rejects_unsorted_schedules() {
        let r = Registry::builtin().unwrap();
        let p = r.get("helmholtz2d-homogeneous").unwrap();
        assert!(convergence_sweep(p, Method::Bkm, &[], &RunOptions::default()).unwrap().is_empty());
        assert!(convergence_sweep(p, Method::Bkm, &[32, 16], &RunOptions::default()).is_err());
    }

    #[test]
    fn runs_are_deterministic() {
        let r = Registry::builtin().unwrap();
        let p = r.get("helmholtz2d-homogeneous").unwrap();
        let o = RunOptions { boundary: 24, ..RunOptions::default() };
        let a = run_case(p, Method::Bkm, &o);
        let b = run_case(p, Method::Bkm, &o);
        assert!(a.succeeded());
        assert_eq!(a.l2_rel_error.to_bits(), b.l2_rel_error.to_bits());
        assert_eq!(a.cond_estimate.to_bits(), b.cond_estimate.to_bits());
    }
}
