//! Dense solvers shared by all schemes: partial-pivoted LU with multi
//! right-hand-side reuse, a truncated SVD for rank-deficient systems, and a
//! 1-norm condition estimate.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `max|A − Aᵀ| / max|A|`.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0.0;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst / scale
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl core::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl core::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    math::sqrt(v.iter().map(|x| x * x).sum())
}

/// `‖A x − b‖₂`
pub fn residual_norm(a: &Matrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.mul_vec(x);
    norm2(&ax.iter().zip(b).map(|(p, q)| p - q).collect::<Vec<_>>())
}

#[derive(Debug, Clone, PartialEq)]
pub struct LuFactors {
    /// Unit-lower `L` below the diagonal, `U` on and above it.
    lu: Matrix,
    /// Row `i` of `P·A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvdFactors {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
    rcut: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FactorKind {
    Lu(LuFactors),
    Tsvd(SvdFactors),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    pub kind: FactorKind,
    pub size: usize,
    pub cond_estimate: f64,
}

/// Partial-pivoted LU factorization.
pub fn lu_factor(a: &Matrix) -> Result<Factorization> {
    let n = a.rows;
    assert_eq!(n, a.cols, "lu_factor needs a square matrix");
    if !a.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries"));
    }
    let anorm = a.norm1();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let mut p = k;
        let mut best = lu[(k, k)].abs();
        for i in k + 1..n {
            let v = lu[(i, k)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            return Err(Error::ExactlySingular { column: k });
        }
        if p != k {
            for j in 0..n {
                lu.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
        }
        let pivot = lu[(k, k)];
        for i in k + 1..n {
            let l = lu[(i, k)] / pivot;
            lu[(i, k)] = l;
            if l != 0.0 {
                let (top, bottom) = lu.data.split_at_mut(i * n);
                let urow = &top[k * n + k + 1..k * n + n];
                let row = &mut bottom[k + 1..n];
                for (r, u) in row.iter_mut().zip(urow) {
                    *r -= l * u;
                }
            }
        }
    }
    let factors = LuFactors { lu, perm };
    let inv_norm = estimate_inverse_norm1(&factors);
    Ok(Factorization {
        kind: FactorKind::Lu(factors),
        size: n,
        cond_estimate: anorm * inv_norm,
    })
}

impl LuFactors {
    fn n(&self) -> usize {
        self.perm.len()
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in 0..i {
                s -= row[j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut s = x[i];
            for j in i + 1..n {
                s -= row[j] * x[j];
            }
            x[i] = s / row[i];
        }
        x
    }

    /// Solves `Aᵀ x = b`.
    fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n();
        // Aᵀ = Uᵀ Lᵀ P
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s / self.lu[(i, i)];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[(j, i)] * y[j];
            }
            y[i] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = y[i];
        }
        x
    }

    /// `P·A` reconstructed from the factors.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.n();
        Matrix::from_fn(n, n, |i, j| {
            let mut s = 0.0;
            for k in 0..=i.min(j) {
                let l = if k == i { 1.0 } else { self.lu[(i, k)] };
                s += l * self.lu[(k, j)];
            }
            s
        })
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }
}

/// Hager–Higham estimate of `‖A⁻¹‖₁`.
fn estimate_inverse_norm1(f: &LuFactors) -> f64 {
    let n = f.n();
    if n == 0 {
        return 0.0;
    }
    let mut x = vec![1.0 / n as f64; n];
    let mut est = 0.0;
    for _ in 0..5 {
        let y = f.solve(&x);
        let new_est: f64 = y.iter().map(|v| v.abs()).sum();
        if !new_est.is_finite() {
            return f64::INFINITY;
        }
        let xi: Vec<f64> = y.iter().map(|v| if *v >= 0.0 { 1.0 } else { -1.0 }).collect();
        let z = f.solve_transpose(&xi);
        let (jmax, zmax) = z
            .iter()
            .enumerate()
            .fold((0, 0.0), |(bj, bv), (j, v)| if v.abs() > bv { (j, v.abs()) } else { (bj, bv) });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| a * b).sum();
        if new_est <= est || zmax <= ztx {
            est = est.max(new_est);
            break;
        }
        est = new_est;
        x = vec![0.0; n];
        x[jmax] = 1.0;
    }
    // Higham's alternating-sign safeguard.
    let alt: Vec<f64> = (0..n)
        .map(|i| {
            let s = if i % 2 == 0 { 1.0 } else { -1.0 };
            s * (1.0 + i as f64 / (n as f64 - 1.0).max(1.0))
        })
        .collect();
    let y = f.solve(&alt);
    let alt_est = 2.0 * y.iter().map(|v| v.abs()).sum::<f64>() / (3.0 * n as f64);
    est.max(alt_est)
}

/// One-sided Jacobi SVD of an `m × n` matrix with `m ≥ n`.
fn jacobi_svd(a: &Matrix) -> (Matrix, Vec<f64>, Matrix) {
    let (m, n) = (a.rows, a.cols);
    // Work on columns: store Aᵀ so column j of A is a contiguous row.
    let mut cols = a.transpose();
    let mut v = Matrix::identity(n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                {
                    let cp = cols.row(p);
                    let cq = cols.row(q);
                    for k in 0..m {
                        alpha += cp[k] * cp[k];
                        beta += cq[k] * cq[k];
                        gamma += cp[k] * cq[k];
                    }
                }
                if gamma == 0.0 || gamma.abs() <= 1e-15 * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + math::sqrt(1.0 + zeta * zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                for k in 0..m {
                    let xp = cols[(p, k)];
                    let xq = cols[(q, k)];
                    cols[(p, k)] = c * xp - s * xq;
                    cols[(q, k)] = s * xp + c * xq;
                }
                for k in 0..n {
                    let vp = v[(k, p)];
                    let vq = v[(k, q)];
                    v[(k, p)] = c * vp - s * vq;
                    v[(k, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sigma = vec![0.0; n];
    let mut u = Matrix::zeros(m, n);
    for j in 0..n {
        let s = norm2(cols.row(j));
        sigma[j] = s;
        if s > 0.0 {
            for k in 0..m {
                u[(k, j)] = cols[(j, k)] / s;
            }
        }
    }
    (u, sigma, v)
}

/// Truncated-SVD factorization keeping `σ_i ≥ rcut·σ_max`.
pub fn tsvd_factor(a: &Matrix, rcut: f64) -> Result<Factorization> {
    if !(rcut > 0.0 && rcut < 1.0) {
        return Err(Error::InvalidParameter("rcut must lie in (0, 1)"));
    }
    if !a.is_finite() {
        return Err(Error::InvalidParameter("matrix has non-finite entries"));
    }
    let (u, sigma, v) = if a.rows >= a.cols {
        jacobi_svd(a)
    } else {
        let (u, s, v) = jacobi_svd(&a.transpose());
        (v, s, u)
    };
    let smax = sigma.iter().fold(0.0, |m: f64, s| m.max(*s));
    let smin_kept = sigma
        .iter()
        .filter(|&&s| s >= rcut * smax && s > 0.0)
        .fold(f64::INFINITY, |m, s| m.min(*s));
    let cond = if smin_kept.is_finite() { smax / smin_kept } else { f64::INFINITY };
    Ok(Factorization {
        kind: FactorKind::Tsvd(SvdFactors { u, sigma, v, rcut }),
        size: a.cols,
        cond_estimate: cond,
    })
}

impl SvdFactors {
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let smax = self.sigma.iter().fold(0.0, |m: f64, s| m.max(*s));
        let n = self.v.rows;
        let mut x = vec![0.0; n];
        for (j, &s) in self.sigma.iter().enumerate() {
            if s == 0.0 || s < self.rcut * smax {
                continue;
            }
            let coef: f64 = (0..self.u.rows).map(|k| self.u[(k, j)] * b[k]).sum::<f64>() / s;
            for (i, xi) in x.iter_mut().enumerate() {
                *xi += coef * self.v[(i, j)];
            }
        }
        x
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }
}

impl Factorization {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match &self.kind {
            FactorKind::Lu(f) => {
                assert_eq!(b.len(), self.size);
                f.solve(b)
            }
            FactorKind::Tsvd(f) => f.solve(b),
        }
    }

    /// Solves for every column of `b`.
    pub fn solve_many(&self, b: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.size, b.cols);
        for j in 0..b.cols {
            let x = self.solve(&b.column(j));
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        out
    }

    pub fn is_lu(&self) -> bool {
        matches!(self.kind, FactorKind::Lu(_))
    }
}

/// Minimum-norm least-squares solution using singular values `≥ rcut·σ_max`.
pub fn tsvd_solve(a: &Matrix, b: &[f64], rcut: f64) -> Result<Vec<f64>> {
    Ok(tsvd_factor(a, rcut)?.solve(b))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum SolverChoice {
    /// LU, retried as a truncated SVD (`rcut = 1e-12`) when the LU residual
    /// exceeds `1e-6·‖b‖`, the condition estimate exceeds `1/ε`, or the
    /// factorization fails.
    #[default]
    Lu,
    Tsvd { rcut: f64 },
}

pub const FALLBACK_RCUT: f64 = 1e-12;
pub const FALLBACK_RESIDUAL: f64 = 1e-6;
/// LU factors whose condition estimate exceeds `1/ε` are treated as failed
/// even when the residual is small: the coefficients are then dominated by
/// rounding and do not generalise away from the collocation points.
pub const FALLBACK_CONDITION: f64 = 1.0 / f64::EPSILON;

/// Solution of one dense system with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub cond_estimate: f64,
    pub used_tsvd: bool,
}

/// Factorizes `a` according to `choice`. LU is kept when its condition
/// estimate is below [`FALLBACK_CONDITION`] and its residual on every
/// supplied right-hand side is within [`FALLBACK_RESIDUAL`]; otherwise a
/// truncated SVD with [`FALLBACK_RCUT`] is used.
pub fn factor_with_fallback(a: &Matrix, rhs: &[&[f64]], choice: SolverChoice) -> Result<Factorization> {
    match choice {
        SolverChoice::Tsvd { rcut } => tsvd_factor(a, rcut).map_err(|_| Error::SingularSystem),
        SolverChoice::Lu => {
            if let Ok(f) = lu_factor(a).and_then(|f| {
                if f.cond_estimate <= FALLBACK_CONDITION {
                    Ok(f)
                } else {
                    Err(Error::SingularSystem)
                }
            }) {
                let ok = rhs.iter().all(|b| {
                    let x = f.solve(b);
                    let r = residual_norm(a, &x, b);
                    r.is_finite() && r <= FALLBACK_RESIDUAL * norm2(b).max(f64::MIN_POSITIVE)
                });
                if ok {
                    return Ok(f);
                }
            }
            let f = tsvd_factor(a, FALLBACK_RCUT).map_err(|_| Error::SingularSystem)?;
            if f.cond_estimate.is_finite() {
                Ok(f)
            } else {
                Err(Error::SingularSystem)
            }
        }
    }
}

pub fn solve_with_fallback(a: &Matrix, b: &[f64], choice: SolverChoice) -> Result<SolveReport> {
    let f = factor_with_fallback(a, &[b], choice)?;
    let x = f.solve(b);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(SolveReport {
        residual_norm: residual_norm(a, &x, b),
        cond_estimate: f.cond_estimate,
        used_tsvd: !f.is_lu(),
        x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// Deterministic pseudo-random entries in [-1, 1).
    fn lcg_matrix(n: usize, seed: u64) -> Matrix {
        let mut s = seed;
        Matrix::from_fn(n, n, |_, _| {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn identity_factorization() {
        let f = lu_factor(&Matrix::identity(6)).unwrap();
        let FactorKind::Lu(lu) = &f.kind else { panic!() };
        assert_eq!(lu.reconstruct(), Matrix::identity(6));
        assert_abs_diff_eq!(f.cond_estimate, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reconstruction_of_random_matrix() {
        let a = lcg_matrix(50, 7);
        let f = lu_factor(&a).unwrap();
        let FactorKind::Lu(lu) = &f.kind else { panic!() };
        let pa = Matrix::from_fn(50, 50, |i, j| a[(lu.permutation()[i], j)]);
        let r = lu.reconstruct();
        let mut worst: f64 = 0.0;
        for i in 0..50 {
            for j in 0..50 {
                worst = worst.max((pa[(i, j)] - r[(i, j)]).abs());
            }
        }
        assert!(worst <= 1e-12 * a.max_abs(), "{worst}");
    }

    #[test]
    fn duplicated_row_is_flagged() {
        let mut a = lcg_matrix(8, 3);
        for j in 0..8 {
            a[(5, j)] = a[(2, j)];
        }
        match lu_factor(&a) {
            Err(Error::ExactlySingular { .. }) => {}
            Ok(f) => assert!(f.cond_estimate > 1e15, "{}", f.cond_estimate),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn simple_solves() {
        let a = Matrix::from_fn(4, 4, |i, j| if i == j { 2.0 } else { 0.0 });
        let f = lu_factor(&a).unwrap();
        assert_eq!(f.solve(&[4.0, 4.0, 4.0, 4.0]), vec![2.0; 4]);
        assert_eq!(f.solve(&[0.0; 4]), vec![0.0; 4]);
    }

    #[test]
    fn multi_rhs_equals_column_solves() {
        let a = lcg_matrix(12, 11);
        let b = lcg_matrix(12, 12);
        let f = lu_factor(&a).unwrap();
        let x = f.solve_many(&b);
        for j in 0..12 {
            assert_eq!(x.column(j), f.solve(&b.column(j)));
        }
    }

    #[test]
    fn backward_stability() {
        let a = lcg_matrix(40, 5);
        let b: Vec<f64> = (0..40).map(|i| (i as f64).sin()).collect();
        let f = lu_factor(&a).unwrap();
        let x = f.solve(&b);
        let budget = f.cond_estimate * f64::EPSILON * a.norm1() * norm2(&x) * 40.0;
        assert!(residual_norm(&a, &x, &b) <= budget);
    }

    #[test]
    fn condition_estimate_tracks_exact_value() {
        // diag(1, 10, 100): κ₁ = 100
        let a = Matrix::from_fn(3, 3, |i, j| if i == j { 10f64.powi(i as i32) } else { 0.0 });
        assert_abs_diff_eq!(lu_factor(&a).unwrap().cond_estimate, 100.0, epsilon = 1e-9);
    }

    #[test]
    fn hilbert_stress_case() {
        let n = 8;
        let a = Matrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        let f = lu_factor(&a).unwrap();
        // κ₁(H₈) ≈ 3.4e10
        assert!(f.cond_estimate > 1e9 && f.cond_estimate < 1e11, "{}", f.cond_estimate);
        let x_true = vec![1.0; n];
        let b = a.mul_vec(&x_true);
        let x = f.solve(&b);
        let err = x.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err <= f.cond_estimate * f64::EPSILON * 10.0);
        assert!(err > 1e-12);
    }

    #[test]
    fn tsvd_matches_lu_when_well_conditioned() {
        let a = Matrix::from_fn(10, 10, |i, j| if i == j { 5.0 } else { 1.0 / (1 + i + j) as f64 });
        let b: Vec<f64> = (0..10).map(|i| i as f64 - 3.0).collect();
        let x1 = lu_factor(&a).unwrap().solve(&b);
        let x2 = tsvd_solve(&a, &b, 1e-12).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-10);
        }
    }

    #[test]
    fn tsvd_rank_one() {
        let u = [1.0, 2.0, -1.0];
        let v = [0.5, 0.0, 1.5];
        let a = Matrix::from_fn(3, 3, |i, j| u[i] * v[j]);
        // b = 3u → x = 3 v / |v|²
        let b: Vec<f64> = u.iter().map(|x| 3.0 * x).collect();
        let x = tsvd_solve(&a, &b, 1e-10).unwrap();
        let vv: f64 = v.iter().map(|t| t * t).sum();
        for k in 0..3 {
            assert_abs_diff_eq!(x[k], 3.0 * v[k] / vv, epsilon = 1e-12);
        }
        // b ⟂ range(A) → x = 0
        let b = [2.0, -1.0, 0.0];
        let x = tsvd_solve(&a, &b, 1e-10).unwrap();
        assert!(x.iter().all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn tsvd_uniform_scaling() {
        let a = lcg_matrix(9, 21);
        let b: Vec<f64> = (0..9).map(|i| 1.0 + i as f64).collect();
        let c = 37.5;
        let sa = Matrix::from_fn(9, 9, |i, j| c * a[(i, j)]);
        let sb: Vec<f64> = b.iter().map(|v| c * v).collect();
        let x1 = tsvd_solve(&a, &b, 1e-8).unwrap();
        let x2 = tsvd_solve(&sa, &sb, 1e-8).unwrap();
        for (p, q) in x1.iter().zip(&x2) {
            assert_abs_diff_eq!(p, q, epsilon = 1e-10 * p.abs().max(1.0));
        }
    }

    #[test]
    fn fallback_handles_singular_matrix() {
        let a = Matrix::from_fn(3, 3, |i, j| ((i + 1) * (j + 1)) as f64);
        let b = [1.0, 2.0, 3.0];
        let r = solve_with_fallback(&a, &b, SolverChoice::Lu).unwrap();
        assert!(r.used_tsvd);
        assert!(r.residual_norm < 1e-12);
        assert!(tsvd_factor(&a, 0.0).is_err());
    }

    #[test]
    fn fallback_rejects_lu_beyond_working_precision() {
        // H₁₄ factors and reproduces b to rounding, but κ₁ ≈ 1e18 > 1/ε
        let n = 14;
        let a = Matrix::from_fn(n, n, |i, j| 1.0 / (i + j + 1) as f64);
        let b = a.mul_vec(&vec![1.0; n]);
        assert!(lu_factor(&a).unwrap().cond_estimate > FALLBACK_CONDITION);
        assert!(solve_with_fallback(&a, &b, SolverChoice::Lu).unwrap().used_tsvd);
        let h8 = Matrix::from_fn(8, 8, |i, j| 1.0 / (i + j + 1) as f64);
        let b8 = h8.mul_vec(&[1.0; 8]);
        assert!(!solve_with_fallback(&h8, &b8, SolverChoice::Lu).unwrap().used_tsvd);
    }
}
