//! Invariant suites: kernel certification against finite differences,
//! matrix symmetry, and the BPM reuse and homogeneous-limit identities.

use rbfpde::bkm::{assemble_bkm, solve_bkm};
use rbfpde::bpm::{solve_bpm, BpmOptions};
use rbfpde::geometry::{boundary_nodes, interior_nodes, square_lattice};
use rbfpde::linalg::SolverChoice;
use rbfpde::mkm::{assemble_mkm, default_shape_parameter};
use rbfpde::operators::build_kernel_table;
use rbfpde::problem::ProblemData;
use rbfpde::rbf::RbfKind;
use rbfpde::{Domain, KernelTable, OperatorSpec, Point};

use crate::registry::Registry;
use crate::BenchError;

/// One named check with its measured defect and the tolerance it must meet.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub defect: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.defect <= self.tolerance
    }
}

/// The six kernel families: three operators in two and three dimensions.
pub fn kernel_families() -> Result<Vec<(String, OperatorSpec)>, BenchError> {
    let mut out = Vec::new();
    for dim in [2, 3] {
        out.push((format!("helmholtz{dim}d"), OperatorSpec::helmholtz(dim, 2.0)?));
        out.push((format!("modified-helmholtz{dim}d"), OperatorSpec::modified_helmholtz(dim, 1.5)?));
        let v = [-2.0, 1.0, 0.5];
        out.push((
            format!("convection-diffusion{dim}d"),
            OperatorSpec::convection_diffusion(dim, 0.8, &v[..dim], 0.6)?,
        ));
    }
    Ok(out)
}

/// `R` applied to `u` at `x` by central differences with one Richardson
/// step, together with the magnitude of its largest term.
fn fd_operator(op: &OperatorSpec, u: &dyn Fn(&Point) -> f64, x: &Point, h: f64) -> (f64, f64) {
    let (dd, v, k) = op.coefficients();
    let dim = op.dim();
    let at = |a: usize, t: f64| {
        let mut y = *x;
        y[a] += t;
        u(&y)
    };
    let u0 = u(x);
    let mut lap = 0.0;
    let mut drift = 0.0;
    for a in 0..dim {
        let second = |t: f64| (at(a, t) - 2.0 * u0 + at(a, -t)) / (t * t);
        let first = |t: f64| (at(a, t) - at(a, -t)) / (2.0 * t);
        lap += (4.0 * second(h / 2.0) - second(h)) / 3.0;
        drift += v[a] * (4.0 * first(h / 2.0) - first(h)) / 3.0;
    }
    let value = dd * lap - drift - k * u0;
    (value, (dd * lap).abs().max(drift.abs()).max((k * u0).abs()))
}

/// Annihilation `R{u_0#} = 0` and the chain `R{u_m#} = u_{m−1}#` for
/// `m = 1..=max_order`, relative to the largest term at each sample.
pub fn certify_kernel(name: &str, table: &KernelTable, max_order: usize, tolerance: f64) -> Result<Vec<Check>, BenchError> {
    let op = *table.op();
    let dim = op.dim();
    let source = [0.1, -0.2, if dim == 3 { 0.15 } else { 0.0 }];
    let directions: [Point; 4] = [
        [1.0, 0.0, 0.0],
        [0.6, 0.8, 0.0],
        [-0.48, 0.6, 0.64],
        [0.0, -0.6, 0.8],
    ];
    let mut checks = Vec::new();
    for m in 0..=max_order {
        let mut worst: f64 = 0.0;
        for (i, dir) in directions.iter().enumerate() {
            let r = table.r_max() * [0.07, 0.3, 0.55, 0.8][i];
            let mut d = *dir;
            if dim == 2 {
                d[2] = 0.0;
            }
            let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
            let x = [0, 1, 2].map(|a| source[a] + r * d[a] / norm);
            let u = |y: &Point| table.kernel_value(m, y, &source).unwrap_or(f64::NAN);
            // w_m ~ r^{2m} near the source, so the step follows the radius
            let (ru, scale) = fd_operator(&op, &u, &x, 1e-2 * r);
            let target = if m == 0 { 0.0 } else { table.kernel_value(m - 1, &x, &source)? };
            let scale = scale.max(target.abs()).max(f64::MIN_POSITIVE);
            worst = worst.max((ru - target).abs() / scale);
        }
        checks.push(Check {
            name: format!("{name} order {m}"),
            defect: if worst.is_nan() { f64::INFINITY } else { worst },
            tolerance,
        });
    }
    Ok(checks)
}

pub fn kernel_certification(max_order: usize, tolerance: f64) -> Result<Vec<Check>, BenchError> {
    let mut out = Vec::new();
    for (name, op) in kernel_families()? {
        let table = build_kernel_table(&op, max_order, 1.5)?;
        out.extend(certify_kernel(&name, &table, max_order, tolerance)?);
    }
    Ok(out)
}

struct ZeroData;

impl ProblemData for ZeroData {
    fn dirichlet(&self, _: &Point) -> f64 {
        0.0
    }
    fn neumann(&self, _: &Point, _: &Point) -> f64 {
        0.0
    }
    fn is_homogeneous(&self) -> bool {
        true
    }
    fn forcing_iterate(&self, _: usize, _: &Point) -> Option<(f64, Point)> {
        Some((0.0, [0.0; 3]))
    }
}

/// BKM and MKM matrices for Helmholtz and modified Helmholtz in two and
/// three dimensions, with all-Dirichlet, mixed and all-Neumann boundaries.
pub fn symmetry_suite(tolerance: f64) -> Result<Vec<Check>, BenchError> {
    let mut out = Vec::new();
    let ops = [
        ("helmholtz2d", OperatorSpec::helmholtz(2, 2f64.sqrt())?, Domain::UnitSquare),
        ("modified-helmholtz2d", OperatorSpec::modified_helmholtz(2, 1.0)?, Domain::UnitSquare),
        ("helmholtz3d", OperatorSpec::helmholtz(3, 3f64.sqrt())?, Domain::Sphere { radius: 1.0 }),
        ("modified-helmholtz3d", OperatorSpec::modified_helmholtz(3, 1.0)?, Domain::Sphere { radius: 1.0 }),
    ];
    for (name, op, domain) in ops {
        let table = build_kernel_table(&op, 0, domain.diameter() * 1.001)?;
        let count = if domain.dimension() == 2 { 40 } else { 80 };
        for fraction in [1.0, 0.5, 0.0] {
            let boundary = boundary_nodes(&domain, count, fraction)?;
            let bkm = assemble_bkm(&table, &boundary, None, &ZeroData)?;
            out.push(Check {
                name: format!("bkm {name} dirichlet fraction {fraction}"),
                defect: bkm.matrix.asymmetry(),
                tolerance,
            });
            let (ring, inner) = if domain == Domain::UnitSquare {
                square_lattice(7, fraction)?
            } else {
                (boundary_nodes(&domain, 40, fraction)?, interior_nodes(&domain, 30)?)
            };
            let c = default_shape_parameter(&ring, &inner);
            let mkm = assemble_mkm(&op, &ring, &inner, RbfKind::Multiquadric { c }, &ZeroData)?;
            out.push(Check {
                name: format!("mkm {name} dirichlet fraction {fraction}"),
                defect: mkm.matrix.asymmetry(),
                tolerance,
            });
        }
    }
    Ok(out)
}

fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = b.iter().fold(0.0, |m: f64, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

/// Factorization reuse against fresh factorizations on an inhomogeneous
/// problem, and the `M = 0` limit against BKM on a homogeneous one.
pub fn bpm_identities(registry: &Registry, tolerance: f64) -> Result<Vec<Check>, BenchError> {
    let mut out = Vec::new();
    let inhom = registry.get("helmholtz2d-d1")?;
    let r_max = inhom.domain.diameter() * 1.001;
    let table = build_kernel_table(&inhom.op, 5, r_max)?;
    let boundary = boundary_nodes(&inhom.domain, 49, inhom.dirichlet_fraction)?;
    let reuse = solve_bpm(&table, &boundary, inhom, &BpmOptions::default())?;
    let fresh = solve_bpm(
        &table,
        &boundary,
        inhom,
        &BpmOptions {
            reuse_factorization: false,
            ..BpmOptions::default()
        },
    )?;
    let mut defect: f64 = if reuse.truncation_order == fresh.truncation_order { 0.0 } else { f64::INFINITY };
    for (a, b) in reuse.betas.iter().zip(&fresh.betas) {
        defect = defect.max(max_rel_diff(a, b));
    }
    out.push(Check {
        name: "bpm factorization reuse".into(),
        defect,
        tolerance,
    });

    for id in ["helmholtz2d-homogeneous", "helmholtz3d-d1"] {
        let hom = registry.get(id)?;
        let table = build_kernel_table(&hom.op, 0, hom.domain.diameter() * 1.001)?;
        let count = if hom.domain.dimension() == 2 { 40 } else { 120 };
        let boundary = boundary_nodes(&hom.domain, count, hom.dirichlet_fraction)?;
        let bpm = solve_bpm(
            &table,
            &boundary,
            hom,
            &BpmOptions {
                order: 0,
                ..BpmOptions::default()
            },
        )?;
        let bkm = solve_bkm(&assemble_bkm(&table, &boundary, None, hom)?, SolverChoice::Lu)?;
        out.push(Check {
            name: format!("bpm order 0 equals bkm ({id})"),
            defect: max_rel_diff(&bpm.betas[0], &bkm.coefficients),
            tolerance,
        });
    }
    Ok(out)
}

/// Manufactured-solution consistency of every registered problem.
pub fn registry_consistency(registry: &Registry) -> Vec<Check> {
    registry
        .problems()
        .iter()
        .filter(|p| !p.manufactured)
        .map(|p| Check {
            name: format!("forcing of {} equals R{{u}}", p.id),
            defect: p.consistency_defect(100),
            tolerance: 1e-10,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_operator_on_a_polynomial() {
        // R{x² y} with D = 1, v = (1, 2), κ = 3 at (0.5, 2): 2y − 2xy − 2x² − 3x²y
        let op = OperatorSpec::convection_diffusion(2, 1.0, &[1.0, 2.0], 3.0).unwrap();
        let u = |p: &Point| p[0] * p[0] * p[1];
        let (v, _) = fd_operator(&op, &u, &[0.5, 2.0, 0.0], 0.1);
        assert!((v - (4.0 - 2.0 - 0.5 - 1.5)).abs() < 1e-10);
    }

    #[test]
    fn certification_detects_a_wrong_chain() {
        let op = OperatorSpec::helmholtz(2, 2.0).unwrap();
        let table = build_kernel_table(&op, 1, 1.5).unwrap();
        let ok = certify_kernel("h", &table, 1, 1e-5).unwrap();
        assert!(ok.iter().all(Check::passed), "{ok:?}");
        // a table for a different γ must fail the same check
        let other = build_kernel_table(&OperatorSpec::helmholtz(2, 2.1).unwrap(), 1, 1.5).unwrap();
        let wrong = |y: &Point| other.kernel_value(1, y, &[0.0; 3]).unwrap();
        let x = [0.5, 0.2, 0.0];
        let (ru, scale) = fd_operator(&op, &wrong, &x, 0.03);
        let target = table.kernel_value(0, &x, &[0.0; 3]).unwrap();
        assert!((ru - target).abs() / scale.max(target.abs()) > 1e-3);
    }
}
