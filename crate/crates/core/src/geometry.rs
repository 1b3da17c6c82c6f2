//! Test domains and deterministic node layouts: boundary knots with exact
//! outward normals, interior points for source fitting, and evaluation
//! point sets.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;
use crate::Point;

const GOLDEN: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// `[0, 1]²`
    UnitSquare,
    /// Centred at the origin with semi-axes `a` (along x) and `b`.
    Ellipse { a: f64, b: f64 },
    /// `[0, 1]³`
    UnitCube,
    /// Centred at the origin.
    Sphere { radius: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    Dirichlet,
    Neumann,
    Interior,
    Evaluation,
}

impl Role {
    pub fn is_boundary(self) -> bool {
        matches!(self, Role::Dirichlet | Role::Neumann)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub position: Point,
    pub normal: Option<Point>,
    pub role: Role,
}

impl Node {
    pub fn boundary(position: Point, normal: Point, role: Role) -> Self {
        Self {
            position,
            normal: Some(normal),
            role,
        }
    }

    pub fn point(position: Point, role: Role) -> Self {
        Self {
            position,
            normal: None,
            role,
        }
    }
}

impl Domain {
    /// Ellipse with the default 2:1 aspect.
    pub fn default_ellipse() -> Self {
        Domain::Ellipse { a: 2.0, b: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Domain::Ellipse { a, b } if !(a > 0.0 && b > 0.0) => {
                Err(Error::InvalidParameter("ellipse semi-axes must be positive"))
            }
            Domain::Sphere { radius } if !(radius > 0.0) => {
                Err(Error::InvalidParameter("sphere radius must be positive"))
            }
            _ => Ok(()),
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Domain::UnitSquare | Domain::Ellipse { .. } => 2,
            Domain::UnitCube | Domain::Sphere { .. } => 3,
        }
    }

    pub fn diameter(&self) -> f64 {
        match *self {
            Domain::UnitSquare => core::f64::consts::SQRT_2,
            Domain::Ellipse { a, b } => 2.0 * a.max(b),
            Domain::UnitCube => math::sqrt(3.0),
            Domain::Sphere { radius } => 2.0 * radius,
        }
    }

    pub fn centroid(&self) -> Point {
        match self {
            Domain::UnitSquare => [0.5, 0.5, 0.0],
            Domain::UnitCube => [0.5, 0.5, 0.5],
            Domain::Ellipse { .. } | Domain::Sphere { .. } => [0.0; 3],
        }
    }

    /// Implicit surface function: negative inside, zero on the boundary.
    pub fn level_set(&self, p: &Point) -> f64 {
        match *self {
            Domain::UnitSquare => {
                let dx = (p[0] - 0.5).abs();
                let dy = (p[1] - 0.5).abs();
                dx.max(dy) - 0.5
            }
            Domain::UnitCube => {
                let dx = (p[0] - 0.5).abs();
                let dy = (p[1] - 0.5).abs();
                let dz = (p[2] - 0.5).abs();
                dx.max(dy).max(dz) - 0.5
            }
            Domain::Ellipse { a, b } => math::powi(p[0] / a, 2) + math::powi(p[1] / b, 2) - 1.0,
            Domain::Sphere { radius } => math::dot(p, p) / (radius * radius) - 1.0,
        }
    }

    /// Distance from an interior point to the boundary (exact for the box
    /// shapes and the sphere, a lower bound for the ellipse).
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        match *self {
            Domain::UnitSquare => p[0].min(1.0 - p[0]).min(p[1]).min(1.0 - p[1]),
            Domain::UnitCube => p[0]
                .min(1.0 - p[0])
                .min(p[1])
                .min(1.0 - p[1])
                .min(p[2])
                .min(1.0 - p[2]),
            Domain::Sphere { radius } => radius - math::norm(p),
            Domain::Ellipse { a, b } => {
                // Scaled radial distance times the smaller semi-axis.
                let s = math::sqrt(math::powi(p[0] / a, 2) + math::powi(p[1] / b, 2));
                (1.0 - s) * a.min(b)
            }
        }
    }

    fn bounding_box(&self) -> (Point, Point) {
        match *self {
            Domain::UnitSquare => ([0.0; 3], [1.0, 1.0, 0.0]),
            Domain::UnitCube => ([0.0; 3], [1.0; 3]),
            Domain::Ellipse { a, b } => ([-a, -b, 0.0], [a, b, 0.0]),
            Domain::Sphere { radius } => ([-radius; 3], [radius; 3]),
        }
    }
}

/// `count` quasi-uniform boundary knots. The first
/// `⌈dirichlet_fraction·count⌉` in traversal order are Dirichlet knots, the
/// rest Neumann.
pub fn boundary_nodes(domain: &Domain, count: usize, dirichlet_fraction: f64) -> Result<Vec<Node>> {
    domain.validate()?;
    let min = if domain.dimension() == 2 { 4 } else { 6 };
    if count < min {
        return Err(Error::BadCount { count, min });
    }
    if !(0.0..=1.0).contains(&dirichlet_fraction) {
        return Err(Error::InvalidParameter("dirichlet_fraction must lie in [0, 1]"));
    }
    let points: Vec<(Point, Point)> = match *domain {
        Domain::UnitSquare => square_perimeter(count),
        Domain::Ellipse { a, b } => ellipse_perimeter(a, b, count),
        Domain::Sphere { radius } => fibonacci_sphere(count)
            .into_iter()
            .map(|n| (math::scale(&n, radius), n))
            .collect(),
        Domain::UnitCube => cube_faces(count),
    };
    let n_dirichlet = math::ceil(dirichlet_fraction * count as f64) as usize;
    Ok(points
        .into_iter()
        .enumerate()
        .map(|(i, (p, n))| {
            let role = if i < n_dirichlet { Role::Dirichlet } else { Role::Neumann };
            Node::boundary(p, n, role)
        })
        .collect())
}

/// Equal arc-length points on the square perimeter, offset by half a step
/// so that no knot sits on a corner.
fn square_perimeter(count: usize) -> Vec<(Point, Point)> {
    let step = 4.0 / count as f64;
    (0..count)
        .map(|k| {
            let s = (k as f64 + 0.5) * step;
            let side = (s as usize).min(3);
            let t = s - side as f64;
            match side {
                0 => ([t, 0.0, 0.0], [0.0, -1.0, 0.0]),
                1 => ([1.0, t, 0.0], [1.0, 0.0, 0.0]),
                2 => ([1.0 - t, 1.0, 0.0], [0.0, 1.0, 0.0]),
                _ => ([0.0, 1.0 - t, 0.0], [-1.0, 0.0, 0.0]),
            }
        })
        .collect()
}

fn ellipse_speed(a: f64, b: f64, theta: f64) -> f64 {
    math::sqrt(math::powi(a * math::sin(theta), 2) + math::powi(b * math::cos(theta), 2))
}

/// Arc length of the ellipse from 0 to `theta` by composite Gauss-Legendre.
fn ellipse_arc(a: f64, b: f64, theta: f64) -> f64 {
    const NODES: [f64; 5] = [
        -0.906_179_845_938_664,
        -0.538_469_310_105_683,
        0.0,
        0.538_469_310_105_683,
        0.906_179_845_938_664,
    ];
    const WEIGHTS: [f64; 5] = [
        0.236_926_885_056_189,
        0.478_628_670_499_366,
        0.568_888_888_888_889,
        0.478_628_670_499_366,
        0.236_926_885_056_189,
    ];
    let panels = 64;
    let h = theta / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let mid = (p as f64 + 0.5) * h;
        for (x, w) in NODES.iter().zip(WEIGHTS.iter()) {
            acc += w * ellipse_speed(a, b, mid + 0.5 * h * x);
        }
    }
    0.5 * h * acc
}

fn ellipse_perimeter(a: f64, b: f64, count: usize) -> Vec<(Point, Point)> {
    let two_pi = 2.0 * core::f64::consts::PI;
    let total = ellipse_arc(a, b, two_pi);
    (0..count)
        .map(|k| {
            let target = (k as f64 + 0.5) * total / count as f64;
            // Newton on arc(θ) = target, starting from the circle guess.
            let mut theta = target / total * two_pi;
            for _ in 0..50 {
                let f = ellipse_arc(a, b, theta) - target;
                let step = f / ellipse_speed(a, b, theta);
                theta -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let (s, c) = (math::sin(theta), math::cos(theta));
            let p = [a * c, b * s, 0.0];
            let g = [c / a, s / b, 0.0];
            (p, math::scale(&g, 1.0 / math::norm(&g)))
        })
        .collect()
}

/// Fibonacci lattice on the unit sphere, ordered from the north pole down.
pub(crate) fn fibonacci_sphere(count: usize) -> Vec<Point> {
    let golden_angle = 2.0 * core::f64::consts::PI * (1.0 - 1.0 / GOLDEN);
    (0..count)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / count as f64;
            let rho = math::sqrt((1.0 - z * z).max(0.0));
            let phi = golden_angle * i as f64;
            let p = [rho * math::cos(phi), rho * math::sin(phi), z];
            math::scale(&p, 1.0 / math::norm(&p))
        })
        .collect()
}

/// Kronecker lattice per face, counts split as evenly as possible over the
/// six faces. Points stay strictly inside each face.
fn cube_faces(count: usize) -> Vec<(Point, Point)> {
    let mut out = Vec::with_capacity(count);
    for face in 0..6 {
        let n = count / 6 + usize::from(face < count % 6);
        let axis = face / 2;
        let high = face % 2 == 1;
        let mut normal = [0.0; 3];
        normal[axis] = if high { 1.0 } else { -1.0 };
        let (u_axis, v_axis) = ((axis + 1) % 3, (axis + 2) % 3);
        for i in 0..n {
            let u = (i as f64 + 0.5) / n as f64;
            let v = frac(0.5 + i as f64 / GOLDEN);
            let mut p = [0.0; 3];
            p[axis] = if high { 1.0 } else { 0.0 };
            p[u_axis] = u;
            p[v_axis] = v;
            out.push((p, normal));
        }
    }
    out
}

fn frac(x: f64) -> f64 {
    x - math::floor(x)
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut acc = 0.0;
    while i > 0 {
        acc += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    acc
}

/// Halton points mapped into the bounding box, kept when `accept` holds.
fn halton_in_domain(domain: &Domain, count: usize, skip: usize, accept: impl Fn(&Point) -> bool) -> Vec<Point> {
    let (lo, hi) = domain.bounding_box();
    let dim = domain.dimension();
    let bases = [2, 3, 5];
    let mut out = Vec::with_capacity(count);
    let mut i = skip;
    while out.len() < count {
        i += 1;
        let mut p = [0.0; 3];
        for k in 0..dim {
            p[k] = lo[k] + (hi[k] - lo[k]) * radical_inverse(i, bases[k]);
        }
        if accept(&p) {
            out.push(p);
        }
    }
    out
}

/// `count` interior points from a Halton sequence, kept at least 5% of the
/// diameter away from the boundary.
pub fn interior_nodes(domain: &Domain, count: usize) -> Result<Vec<Node>> {
    domain.validate()?;
    let margin = 0.05 * domain.diameter();
    Ok(halton_in_domain(domain, count, 0, |p| domain.boundary_distance(p) > margin)
        .into_iter()
        .map(|p| Node::point(p, Role::Interior))
        .collect())
}

/// Deterministic evaluation set of `count` points covering the closed domain.
pub fn evaluation_grid(domain: &Domain, count: usize) -> Result<Vec<Node>> {
    domain.validate()?;
    // Offset into the sequence so evaluation points differ from interior nodes.
    Ok(halton_in_domain(domain, count, 1000, |p| domain.level_set(p) <= 0.0)
        .into_iter()
        .map(|p| Node::point(p, Role::Evaluation))
        .collect())
}

/// Uniform `per_side × per_side` lattice on the unit square split into the
/// boundary ring and the interior grid. Corner knots take the bisector
/// normal.
pub fn square_lattice(per_side: usize, dirichlet_fraction: f64) -> Result<(Vec<Node>, Vec<Node>)> {
    if per_side < 3 {
        return Err(Error::BadCount {
            count: per_side * per_side,
            min: 9,
        });
    }
    let m = per_side - 1;
    let h = 1.0 / m as f64;
    let mut ring = Vec::with_capacity(4 * m);
    // Counter-clockwise from the origin.
    for k in 0..4 * m {
        let side = k / m;
        let t = (k % m) as f64 * h;
        let (p, n) = match side {
            0 => ([t, 0.0, 0.0], [0.0, -1.0, 0.0]),
            1 => ([1.0, t, 0.0], [1.0, 0.0, 0.0]),
            2 => ([1.0 - t, 1.0, 0.0], [0.0, 1.0, 0.0]),
            _ => ([0.0, 1.0 - t, 0.0], [-1.0, 0.0, 0.0]),
        };
        let n = if k % m == 0 {
            // corner: bisect the incoming and outgoing faces
            let prev = match side {
                0 => [-1.0, 0.0, 0.0],
                1 => [0.0, -1.0, 0.0],
                2 => [1.0, 0.0, 0.0],
                _ => [0.0, 1.0, 0.0],
            };
            let s = [n[0] + prev[0], n[1] + prev[1], 0.0];
            math::scale(&s, 1.0 / math::norm(&s))
        } else {
            n
        };
        ring.push((p, n));
    }
    let n_dirichlet = math::ceil(dirichlet_fraction * ring.len() as f64) as usize;
    let boundary = ring
        .into_iter()
        .enumerate()
        .map(|(i, (p, n))| Node::boundary(p, n, if i < n_dirichlet { Role::Dirichlet } else { Role::Neumann }))
        .collect();
    let mut interior = Vec::with_capacity((m - 1) * (m - 1));
    for j in 1..m {
        for i in 1..m {
            interior.push(Node::point([i as f64 * h, j as f64 * h, 0.0], Role::Interior));
        }
    }
    Ok((boundary, interior))
}

/// Mean distance from each point to its nearest neighbour.
pub fn mean_nearest_spacing(points: &[Point]) -> f64 {
    if points.len() < 2 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (i, p) in points.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, q) in points.iter().enumerate() {
            if i != j {
                best = best.min(math::norm(&math::sub(p, q)));
            }
        }
        acc += best;
    }
    acc / points.len() as f64
}
