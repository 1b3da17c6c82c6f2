//! The data a boundary-value problem hands to the solvers.

use crate::Point;

/// Boundary data and forcing of `R{u} = f` with `u = R(x)` on the Dirichlet
/// part and `∂u/∂n = N(x)` on the Neumann part.
pub trait ProblemData {
    /// `R(x)`
    fn dirichlet(&self, x: &Point) -> f64;

    /// `N(x)` for the outward unit normal `n`.
    fn neumann(&self, x: &Point, n: &Point) -> f64;

    /// `true` when `f ≡ 0`.
    fn is_homogeneous(&self) -> bool;

    fn forcing(&self, x: &Point) -> f64 {
        self.forcing_iterate(0, x).map_or(0.0, |(v, _)| v)
    }

    /// Value and gradient of `R^j{f}` at `x`, or `None` when the iterate is
    /// not available.
    fn forcing_iterate(&self, j: usize, x: &Point) -> Option<(f64, Point)>;
}

/// A problem given by plain closures, convenient for tests and small
/// drivers.
pub struct FnProblem<U, F>
where
    U: Fn(&Point) -> (f64, Point),
    F: Fn(usize, &Point) -> Option<(f64, Point)>,
{
    /// Exact solution value and gradient, used for both boundary conditions.
    pub solution: U,
    pub iterates: F,
    pub homogeneous: bool,
}

impl<U, F> ProblemData for FnProblem<U, F>
where
    U: Fn(&Point) -> (f64, Point),
    F: Fn(usize, &Point) -> Option<(f64, Point)>,
{
    fn dirichlet(&self, x: &Point) -> f64 {
        (self.solution)(x).0
    }

    fn neumann(&self, x: &Point, n: &Point) -> f64 {
        crate::math::dot(&(self.solution)(x).1, n)
    }

    fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    fn forcing_iterate(&self, j: usize, x: &Point) -> Option<(f64, Point)> {
        if self.homogeneous {
            return Some((0.0, [0.0; 3]));
        }
        (self.iterates)(j, x)
    }
}
