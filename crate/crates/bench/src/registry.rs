//! Manufactured-solution problems and the published table cells, loaded
//! from `data/problems.toml`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rbfpde::problem::ProblemData;
use rbfpde::operators::apply_operator;
use rbfpde::{Domain, OperatorSpec, Point};
use serde::Deserialize;

use crate::expr::ExpPoly;
use crate::BenchError;

/// Highest operator iterate `R^j{f}` kept per problem.
pub const MAX_ITERATE: usize = 8;

pub const BUILTIN_REGISTRY: &str = include_str!("../data/problems.toml");

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemEntry {
    id: String,
    family: String,
    domain: String,
    d: Option<f64>,
    sigma: Option<f64>,
    peclet: Option<f64>,
    kappa: Option<String>,
    dirichlet_fraction: f64,
}

/// One published table entry.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cell {
    pub table: u32,
    pub row: String,
    pub problem: String,
    pub method: String,
    #[serde(default)]
    pub boundary: usize,
    #[serde(default)]
    pub interior: usize,
    /// Points per side of an MKM lattice.
    pub lattice: Option<usize>,
    pub published: f64,
    pub bound: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RegistryFile {
    problem: Vec<ProblemEntry>,
    #[serde(default)]
    cell: Vec<Cell>,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub id: String,
    pub op: OperatorSpec,
    pub domain: Domain,
    pub exact: ExpPoly,
    exact_grad: [ExpPoly; 3],
    /// `R^j{f}` for `j = 0..=MAX_ITERATE`.
    iterates: Vec<ExpPoly>,
    iterate_grads: Vec<[ExpPoly; 3]>,
    pub homogeneous: bool,
    pub dirichlet_fraction: f64,
    pub parameters: BTreeMap<String, f64>,
    /// Forcing taken as `R{u}` by construction; skipped by the load check.
    pub manufactured: bool,
}

fn grad_of(p: &ExpPoly) -> [ExpPoly; 3] {
    [p.derivative(0), p.derivative(1), p.derivative(2)]
}

impl ProblemSpec {
    fn build(e: &ProblemEntry) -> Result<Self, BenchError> {
        let bad = |what: &str| BenchError::Registry(format!("problem {}: {what}", e.id));
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| bad(&format!("missing `{name}`")));
        let domain = match e.domain.as_str() {
            "unit-square" => Domain::UnitSquare,
            "unit-cube" => Domain::UnitCube,
            "unit-sphere" => Domain::Sphere { radius: 1.0 },
            "ellipse" => Domain::default_ellipse(),
            other => return Err(bad(&format!("unknown domain `{other}`"))),
        };
        let mut parameters = BTreeMap::new();
        let mut manufactured = false;
        let (op, exact) = match e.family.as_str() {
            "x2-sin-cos" | "sin-cos" => {
                let d = need(e.d, "d")?;
                parameters.insert("d".into(), d);
                parameters.insert("gamma".into(), d * 2f64.sqrt());
                let trig = ExpPoly::sin(0, d).mul(&ExpPoly::cos(1, d));
                let u = if e.family == "sin-cos" { trig } else { ExpPoly::monomial(0, 2).mul(&trig) };
                (OperatorSpec::helmholtz(2, d * 2f64.sqrt())?, u)
            }
            "cos-sin-sin" => {
                let d = need(e.d, "d")?;
                parameters.insert("d".into(), d);
                parameters.insert("gamma".into(), d * 3f64.sqrt());
                let u = ExpPoly::cos(0, d).mul(&ExpPoly::sin(1, d)).mul(&ExpPoly::sin(2, d));
                (OperatorSpec::helmholtz(3, d * 3f64.sqrt())?, u)
            }
            "exp-sum-mh" => {
                let d = need(e.d, "d")?;
                parameters.insert("d".into(), d);
                parameters.insert("lambda".into(), d * 3f64.sqrt());
                (OperatorSpec::modified_helmholtz(3, d * 3f64.sqrt())?, ExpPoly::exp([d; 3]))
            }
            "x2-exp" => {
                let s = need(e.sigma, "sigma")?;
                let kappa = 1.5 * s * s;
                let eta = (s + (s * s + 2.0 * kappa).sqrt()) / 2.0;
                parameters.insert("sigma".into(), s);
                parameters.insert("kappa".into(), kappa);
                parameters.insert("eta".into(), eta);
                let u = ExpPoly::monomial(0, 2).mul(&ExpPoly::exp([-eta, -eta, 0.0]));
                (OperatorSpec::convection_diffusion(2, 1.0, &[-s, -s], kappa)?, u)
            }
            "exp-sum" => {
                let s = need(e.sigma, "sigma")?;
                let kappa = match e.kappa.as_deref() {
                    Some("reaction") => {
                        manufactured = true;
                        7.0 * s * s / 12.0
                    }
                    Some("homogeneous") | None => 0.0,
                    Some(other) => return Err(bad(&format!("unknown kappa `{other}`"))),
                };
                parameters.insert("sigma".into(), s);
                parameters.insert("kappa".into(), kappa);
                (
                    OperatorSpec::convection_diffusion(3, 1.0, &[-s, -s, -s], kappa)?,
                    ExpPoly::exp([-s; 3]),
                )
            }
            "laplace-sines" => {
                let u = ExpPoly::sin(0, PI).scale(2.0).add(&ExpPoly::sin(1, 2.0 * PI));
                (OperatorSpec::laplace(2)?, u)
            }
            other => return Err(bad(&format!("unknown family `{other}`"))),
        };
        if op.dim() != domain.dimension() {
            return Err(bad("operator and domain dimensions differ"));
        }

        let mut iterates = Vec::with_capacity(MAX_ITERATE + 1);
        let mut current = exact.clone();
        for _ in 0..=MAX_ITERATE {
            let (dd, v, k) = op.coefficients();
            let next = current.apply_operator(op.dim(), dd, &v, k);
            // cancellation residue from sin/cos pairs
            current = next.chop(current.coefficient_scale().max(next.coefficient_scale()), 1e-13);
            iterates.push(current.clone());
        }
        let homogeneous = iterates[0].is_identically_zero();
        let iterate_grads = iterates.iter().map(grad_of).collect();

        let spec = Self {
            id: e.id.clone(),
            op,
            domain,
            exact_grad: grad_of(&exact),
            exact,
            iterates,
            iterate_grads,
            homogeneous,
            dirichlet_fraction: e.dirichlet_fraction,
            parameters,
            manufactured,
        };
        if let Some(p) = e.peclet {
            let got = spec.peclet().ok_or_else(|| bad("`peclet` given for a non-transport problem"))?;
            if ((got - p) / p).abs() > 1e-9 {
                return Err(bad(&format!("sigma gives P = {got}, registry says {p}")));
            }
        }
        if !(0.0..=1.0).contains(&e.dirichlet_fraction) {
            return Err(bad("dirichlet_fraction outside [0, 1]"));
        }
        Ok(spec)
    }

    /// `P = ‖v‖·L/D` with `L` the domain diameter.
    pub fn peclet(&self) -> Option<f64> {
        match self.op.kind {
            rbfpde::OperatorKind::ConvectionDiffusion {
                diffusivity, velocity, ..
            } => {
                let speed = velocity.iter().map(|v| v * v).sum::<f64>().sqrt();
                Some(speed * self.domain.diameter() / diffusivity)
            }
            _ => None,
        }
    }

    pub fn exact_value(&self, x: &Point) -> f64 {
        self.exact.value(x)
    }

    /// Largest deviation of the forcing from `R` applied to the exact jet
    /// over `samples` quasi-random points of the bounding box, relative to
    /// the jet's scale.
    pub fn consistency_defect(&self, samples: usize) -> f64 {
        let dim = self.op.dim();
        let (lo, hi) = bounding_box(&self.domain);
        let mut worst: f64 = 0.0;
        for i in 0..samples {
            let mut x = [0.0; 3];
            for (a, base) in [2u32, 3, 5].iter().enumerate().take(dim) {
                x[a] = lo[a] + (hi[a] - lo[a]) * radical_inverse(i as u64 + 1, *base);
            }
            let jet = self.exact.jet(dim, &x);
            let from_jet = apply_operator(&self.op, &jet).unwrap_or(f64::NAN);
            let forcing = self.iterates[0].value(&x);
            let (dd, v, k) = self.op.coefficients();
            let h = &jet.hessian;
            let scale = 1.0
                + dd * (0..dim).map(|a| h[a][a].abs()).sum::<f64>()
                + (0..dim).map(|a| (v[a] * jet.gradient[a]).abs()).sum::<f64>()
                + (k * jet.value).abs();
            worst = worst.max((from_jet - forcing).abs() / scale);
        }
        worst
    }
}

fn bounding_box(domain: &Domain) -> (Point, Point) {
    match *domain {
        Domain::UnitSquare => ([0.0; 3], [1.0, 1.0, 0.0]),
        Domain::UnitCube => ([0.0; 3], [1.0; 3]),
        Domain::Ellipse { a, b } => ([-a, -b, 0.0], [a, b, 0.0]),
        Domain::Sphere { radius } => ([-radius; 3], [radius; 3]),
    }
}

fn radical_inverse(mut i: u64, base: u32) -> f64 {
    let b = base as u64;
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % b) as f64;
        i /= b;
    }
    r
}

impl ProblemData for ProblemSpec {
    fn dirichlet(&self, x: &Point) -> f64 {
        self.exact.value(x)
    }

    fn neumann(&self, x: &Point, n: &Point) -> f64 {
        (0..self.op.dim()).map(|a| self.exact_grad[a].value(x) * n[a]).sum()
    }

    fn is_homogeneous(&self) -> bool {
        self.homogeneous
    }

    fn forcing_iterate(&self, j: usize, x: &Point) -> Option<(f64, Point)> {
        let f = self.iterates.get(j)?;
        let g = &self.iterate_grads[j];
        Some((f.value(x), [g[0].value(x), g[1].value(x), g[2].value(x)]))
    }
}

#[derive(Debug, Clone)]
pub struct Registry {
    problems: Vec<ProblemSpec>,
    pub cells: Vec<Cell>,
}

impl Registry {
    pub fn builtin() -> Result<Self, BenchError> {
        Self::from_toml_str(BUILTIN_REGISTRY)
    }

    /// Parses and validates a registry. Every problem except those with a
    /// manufactured forcing must satisfy `f = R{u}` to 1e-10 at 100 points.
    pub fn from_toml_str(text: &str) -> Result<Self, BenchError> {
        let file: RegistryFile = toml::from_str(text).map_err(|e| BenchError::Registry(e.to_string()))?;
        let mut problems = Vec::with_capacity(file.problem.len());
        for e in &file.problem {
            if problems.iter().any(|p: &ProblemSpec| p.id == e.id) {
                return Err(BenchError::Registry(format!("duplicate problem id `{}`", e.id)));
            }
            let spec = ProblemSpec::build(e)?;
            if !spec.manufactured {
                let defect = spec.consistency_defect(100);
                if !(defect <= 1e-10) {
                    return Err(BenchError::Registry(format!(
                        "problem {}: forcing disagrees with R{{u}} by {defect:e}",
                        spec.id
                    )));
                }
            }
            problems.push(spec);
        }
        for c in &file.cell {
            if !problems.iter().any(|p| p.id == c.problem) {
                return Err(BenchError::UnknownProblem(c.problem.clone()));
            }
        }
        Ok(Self {
            problems,
            cells: file.cell,
        })
    }

    pub fn get(&self, id: &str) -> Result<&ProblemSpec, BenchError> {
        self.problems
            .iter()
            .find(|p| p.id == id)
            .ok_or_else(|| BenchError::UnknownProblem(id.to_string()))
    }

    pub fn problems(&self) -> &[ProblemSpec] {
        &self.problems
    }
}
