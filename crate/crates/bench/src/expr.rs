//! Exponential polynomials `Σ c · xᵖ yᵠ zʳ · exp(k·x)` with complex `c` and
//! `k`. Every manufactured solution in the registry lives in this space,
//! which is closed under constant-coefficient differential operators, so
//! forcing terms and their operator iterates are exact.

use std::fmt;

use num_complex::Complex64;
use rbfpde::{FieldProbe, Point};

#[derive(Debug, Clone, PartialEq)]
struct Term {
    coef: Complex64,
    powers: [u32; 3],
    rate: [Complex64; 3],
}

impl Term {
    fn same_shape(&self, other: &Term) -> bool {
        self.powers == other.powers && self.rate == other.rate
    }

    fn eval(&self, x: &Point) -> Complex64 {
        let mut v = self.coef;
        for a in 0..3 {
            if self.powers[a] > 0 {
                v *= x[a].powi(self.powers[a] as i32);
            }
        }
        let e: Complex64 = (0..3).map(|a| self.rate[a] * x[a]).sum();
        v * e.exp()
    }

    fn derivative(&self, axis: usize) -> [Option<Term>; 2] {
        let mut out = [None, None];
        let p = self.powers[axis];
        if p > 0 {
            let mut t = self.clone();
            t.coef *= p as f64;
            t.powers[axis] = p - 1;
            out[0] = Some(t);
        }
        if self.rate[axis] != Complex64::new(0.0, 0.0) {
            let mut t = self.clone();
            t.coef *= self.rate[axis];
            out[1] = Some(t);
        }
        out
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpPoly {
    terms: Vec<Term>,
}

impl ExpPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::term(Complex64::new(c, 0.0), [0; 3], [Complex64::new(0.0, 0.0); 3])
    }

    fn term(coef: Complex64, powers: [u32; 3], rate: [Complex64; 3]) -> Self {
        let mut p = Self::zero();
        p.push(Term { coef, powers, rate });
        p
    }

    /// `x_axis^power`
    pub fn monomial(axis: usize, power: u32) -> Self {
        let mut powers = [0; 3];
        powers[axis] = power;
        Self::term(Complex64::new(1.0, 0.0), powers, [Complex64::new(0.0, 0.0); 3])
    }

    /// `exp(Σ rate_a x_a)` for real rates.
    pub fn exp(rate: [f64; 3]) -> Self {
        Self::term(
            Complex64::new(1.0, 0.0),
            [0; 3],
            rate.map(|k| Complex64::new(k, 0.0)),
        )
    }

    fn exp_i(axis: usize, w: f64) -> Self {
        let mut rate = [Complex64::new(0.0, 0.0); 3];
        rate[axis] = Complex64::new(0.0, w);
        Self::term(Complex64::new(1.0, 0.0), [0; 3], rate)
    }

    /// `sin(w · x_axis)`
    pub fn sin(axis: usize, w: f64) -> Self {
        let half = Complex64::new(0.0, -0.5);
        Self::exp_i(axis, w).scale_c(half).add(&Self::exp_i(axis, -w).scale_c(-half))
    }

    /// `cos(w · x_axis)`
    pub fn cos(axis: usize, w: f64) -> Self {
        Self::exp_i(axis, w).add(&Self::exp_i(axis, -w)).scale(0.5)
    }

    fn push(&mut self, t: Term) {
        if t.coef == Complex64::new(0.0, 0.0) {
            return;
        }
        match self.terms.iter_mut().find(|s| s.same_shape(&t)) {
            Some(s) => s.coef += t.coef,
            None => self.terms.push(t),
        }
    }

    fn prune(mut self) -> Self {
        self.terms.retain(|t| t.coef.norm() > 0.0);
        self
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for t in &other.terms {
            out.push(t.clone());
        }
        out.prune()
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.scale_c(Complex64::new(s, 0.0))
    }

    fn scale_c(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for t in &mut out.terms {
            t.coef *= s;
        }
        out.prune()
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for a in &self.terms {
            for b in &other.terms {
                out.push(Term {
                    coef: a.coef * b.coef,
                    powers: [0, 1, 2].map(|i| a.powers[i] + b.powers[i]),
                    rate: [0, 1, 2].map(|i| a.rate[i] + b.rate[i]),
                });
            }
        }
        out.prune()
    }

    pub fn derivative(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for t in &self.terms {
            for d in t.derivative(axis).into_iter().flatten() {
                out.push(d);
            }
        }
        out.prune()
    }

    /// `D ∇²u − v·∇u − κ u` over the first `dim` coordinates.
    pub fn apply_operator(&self, dim: usize, diffusivity: f64, velocity: &Point, reaction: f64) -> Self {
        let mut out = self.scale(-reaction);
        for a in 0..dim {
            let d1 = self.derivative(a);
            out = out.add(&d1.derivative(a).scale(diffusivity));
            if velocity[a] != 0.0 {
                out = out.add(&d1.scale(-velocity[a]));
            }
        }
        out
    }

    pub fn value(&self, x: &Point) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum::<Complex64>().re
    }

    pub fn gradient(&self, x: &Point) -> Point {
        [0, 1, 2].map(|a| self.derivative(a).value(x))
    }

    pub fn jet(&self, dim: usize, x: &Point) -> FieldProbe {
        let mut hessian = [[0.0; 3]; 3];
        let mut gradient = [0.0; 3];
        for a in 0..dim {
            let da = self.derivative(a);
            gradient[a] = da.value(x);
            for b in a..dim {
                let h = da.derivative(b).value(x);
                hessian[a][b] = h;
                hessian[b][a] = h;
            }
        }
        FieldProbe::new(dim, self.value(x), gradient, hessian)
    }

    /// Largest coefficient magnitude, a scale for zero tests.
    pub fn coefficient_scale(&self) -> f64 {
        self.terms.iter().map(|t| t.coef.norm()).fold(0.0, f64::max)
    }

    pub fn is_identically_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Drops terms below `rel` times `reference` so cancellations that
    /// leave rounding residue compare equal to zero.
    pub fn chop(&self, reference: f64, rel: f64) -> Self {
        let mut out = self.clone();
        out.terms.retain(|t| t.coef.norm() > rel * reference);
        out
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({:.6})", t.coef)?;
            for (a, name) in ["x", "y", "z"].iter().enumerate() {
                if t.powers[a] > 0 {
                    write!(f, "·{name}^{}", t.powers[a])?;
                }
            }
            let rate: Vec<String> = t.rate.iter().map(|k| format!("{k:.4}")).collect();
            write!(f, "·exp[{}]", rate.join(", "))?;
        }
        Ok(())
    }
}
