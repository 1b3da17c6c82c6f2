use rbfpde::geometry::{evaluation_grid, square_lattice};
use rbfpde::linalg::SolverChoice;
use rbfpde::mkm::{assemble_mkm, default_shape_parameter, evaluate_mkm, solve_mkm};
use rbfpde::rbf::RbfKind;
use rbfpde::Point;
use rbfpde_bench::Registry;

/// The largest error within 0.05 of the boundary stays within five times the
/// largest error further in.
#[test]
fn boundary_errors_stay_comparable_to_interior_errors() {
    let registry = Registry::builtin().unwrap();
    let problem = registry.get("helmholtz2d-dirichlet-d2").unwrap();
    for per_side in [5, 6, 7, 9] {
        let (ring, inner) = square_lattice(per_side, problem.dirichlet_fraction).unwrap();
        let c = default_shape_parameter(&ring, &inner);
        let system = assemble_mkm(&problem.op, &ring, &inner, RbfKind::Multiquadric { c }, problem).unwrap();
        let sol = solve_mkm(&system, SolverChoice::Lu).unwrap();
        let points: Vec<Point> = evaluation_grid(&problem.domain, 2000).unwrap().iter().map(|n| n.position).collect();
        let values = evaluate_mkm(&sol.coefficients, &system, &points).unwrap();
        let (mut near, mut far) = (0.0f64, 0.0f64);
        for (x, v) in points.iter().zip(&values) {
            let err = (v - problem.exact_value(x)).abs();
            if problem.domain.boundary_distance(x) < 0.05 {
                near = near.max(err);
            } else {
                far = far.max(err);
            }
        }
        assert!(near > 0.0 && far > 0.0);
        assert!(near <= 5.0 * far, "{per_side}×{per_side}: near {near:.2e}, far {far:.2e}");
    }
}
