//! Dense symmetric linear algebra at factor scale (`d_k` up to a few
//! hundred): a deterministic cyclic-Jacobi eigensolver, the off-diagonal
//! soft-thresholding proximal map, and spectral bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense rectangular matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mat<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Mat<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn transpose(&self) -> Mat<S> {
        Mat::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn matmul(&self, other: &Mat<S>) -> Mat<S> {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik == S::zero() {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(orow) {
                    *o += aik * b;
                }
            }
        }
        out
    }

    pub fn frobenius(&self) -> S {
        self.data.iter().map(|&x| x * x).sum::<S>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

/// Symmetric matrix; construction symmetrizes, so the stored entries
/// always satisfy `a_ij == a_ji` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix<S> {
    n: usize,
    entries: Vec<S>,
}

impl<S: Scalar> SymMatrix<S> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            entries: vec![S::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = S::one();
        }
        m
    }

    pub fn scaled_identity(n: usize, c: S) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.entries[i * n + i] = c;
        }
        m
    }

    /// Builds from row-major entries, symmetrizing as `(a + aᵀ)/2`.
    pub fn from_entries(n: usize, raw: Vec<S>) -> Result<Self> {
        if raw.len() != n * n {
            return Err(Error::ShapeMismatch(format!(
                "expected {} entries for a {n}×{n} matrix, got {}",
                n * n,
                raw.len()
            )));
        }
        let half = S::from_f64(0.5);
        let mut entries = raw;
        for i in 0..n {
            for j in (i + 1)..n {
                let v = (entries[i * n + j] + entries[j * n + i]) * half;
                entries[i * n + j] = v;
                entries[j * n + i] = v;
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_diag(diag: &[S]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, &v) in diag.iter().enumerate() {
            m.entries[i * n + i] = v;
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> S {
        self.entries[i * self.n + j]
    }

    /// Sets `a_ij` and `a_ji` together.
    #[inline]
    pub fn set_sym(&mut self, i: usize, j: usize, v: S) {
        self.entries[i * self.n + j] = v;
        self.entries[j * self.n + i] = v;
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    pub fn to_mat(&self) -> Mat<S> {
        Mat {
            rows: self.n,
            cols: self.n,
            data: self.entries.clone(),
        }
    }

    pub fn trace(&self) -> S {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius(&self) -> S {
        self.entries.iter().map(|&x| x * x).sum::<S>().sqrt()
    }

    pub fn diag_frobenius(&self) -> S {
        (0..self.n)
            .map(|i| self.get(i, i) * self.get(i, i))
            .sum::<S>()
            .sqrt()
    }

    pub fn offdiag_frobenius_sq(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc += self.get(i, j) * self.get(i, j);
                }
            }
        }
        acc
    }

    /// Sum of |a_ij| over i ≠ j (ordered pairs).
    pub fn offdiag_l1(&self) -> S {
        let mut acc = S::zero();
        for i in 0..self.n {
            for j in 0..self.n {
                if i != j {
                    acc += self.get(i, j).abs();
                }
            }
        }
        acc
    }

    pub fn max_abs(&self) -> S {
        self.entries
            .iter()
            .fold(S::zero(), |acc, &x| acc.max(x.abs()))
    }

    /// Trace inner product `⟨A, B⟩ = Σ_ij a_ij b_ij`.
    pub fn inner(&self, other: &SymMatrix<S>) -> S {
        assert_eq!(self.n, other.n, "inner size mismatch");
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a * b)
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|x| x.is_finite())
    }

    /// `self + c * other`, entrywise.
    pub fn add_scaled(&self, other: &SymMatrix<S>, c: S) -> SymMatrix<S> {
        assert_eq!(self.n, other.n, "add_scaled size mismatch");
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(&a, &b)| a + c * b)
            .collect();
        SymMatrix {
            n: self.n,
            entries,
        }
    }

    pub fn scale(&self, c: S) -> SymMatrix<S> {
        SymMatrix {
            n: self.n,
            entries: self.entries.iter().map(|&x| c * x).collect(),
        }
    }

    /// Adds `c` to every diagonal entry, in place.
    pub fn shift_diag(&mut self, c: S) {
        for i in 0..self.n {
            self.entries[i * self.n + i] += c;
        }
    }
}

/// Orthonormal eigenbasis and ascending eigenvalues of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct EigenPair<S> {
    /// Columns are eigenvectors, ordered to match `lambda`.
    pub q: Mat<S>,
    /// Eigenvalues in ascending order.
    pub lambda: Vec<S>,
}

impl<S: Scalar> EigenPair<S> {
    pub fn min(&self) -> S {
        self.lambda[0]
    }

    pub fn max(&self) -> S {
        self.lambda[self.lambda.len() - 1]
    }

    /// Reconstructs `Q diag(f(λ)) Qᵀ` as a symmetric matrix.
    pub fn reconstruct_mapped(&self, f: impl Fn(S) -> S) -> SymMatrix<S> {
        let n = self.lambda.len();
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in i..n {
                let mut acc = S::zero();
                for (k, &l) in self.lambda.iter().enumerate() {
                    acc += self.q.get(i, k) * self.q.get(j, k) * f(l);
                }
                m.set_sym(i, j, acc);
            }
        }
        m
    }
}

const MAX_JACOBI_SWEEPS: usize = 100;

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Deterministic: fixed sweep order, eigenvalues sorted ascending by a
/// stable sort, and each eigenvector's largest-magnitude component made
/// positive.
pub fn sym_eig<S: Scalar>(a: &SymMatrix<S>) -> Result<EigenPair<S>> {
    if !a.is_finite() {
        return Err(Error::NonFinite("sym_eig input"));
    }
    let n = a.n();
    let mut w = a.entries.clone();
    let mut q = Mat::identity(n);
    let fro = a.frobenius();
    let tol = S::from_f64(1e-13).max(S::epsilon());
    let thresh_sq = (tol * fro) * (tol * fro);

    if n > 1 && fro > S::zero() {
        let mut converged = false;
        for _sweep in 0..MAX_JACOBI_SWEEPS {
            let mut off_sq = S::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off_sq += w[i * n + j] * w[i * n + j];
                }
            }
            off_sq = off_sq + off_sq;
            if off_sq <= thresh_sq {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for r in (p + 1)..n {
                    jacobi_rotate(&mut w, &mut q, n, p, r);
                }
            }
        }
        if !converged {
            // one final check after the last sweep
            let mut off_sq = S::zero();
            for i in 0..n {
                for j in (i + 1)..n {
                    off_sq += w[i * n + j] * w[i * n + j];
                }
            }
            if off_sq + off_sq > thresh_sq {
                return Err(Error::EigenNonConvergence {
                    off: (off_sq + off_sq).sqrt().into_f64(),
                });
            }
        }
    }

    let mut lambda: Vec<S> = (0..n).map(|i| w[i * n + i]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| lambda[i].partial_cmp(&lambda[j]).unwrap());
    lambda = order.iter().map(|&i| lambda[i]).collect();

    let mut q_sorted = Mat::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        // sign convention: largest-magnitude component positive
        let mut best = S::zero();
        let mut sign = S::one();
        for i in 0..n {
            let v = q.get(i, old_col);
            if v.abs() > best {
                best = v.abs();
                sign = if v < S::zero() { -S::one() } else { S::one() };
            }
        }
        for i in 0..n {
            q_sorted.set(i, new_col, sign * q.get(i, old_col));
        }
    }

    Ok(EigenPair {
        q: q_sorted,
        lambda,
    })
}

#[inline]
fn jacobi_rotate<S: Scalar>(w: &mut [S], q: &mut Mat<S>, n: usize, p: usize, r: usize) {
    let apq = w[p * n + r];
    if apq == S::zero() {
        return;
    }
    let app = w[p * n + p];
    let aqq = w[r * n + r];
    let theta = (aqq - app) / (S::from_f64(2.0) * apq);
    let t = if theta.abs() < S::from_f64(1e18) {
        let sgn = if theta < S::zero() { -S::one() } else { S::one() };
        sgn / (theta.abs() + (theta * theta + S::one()).sqrt())
    } else {
        (S::from_f64(2.0) * theta).recip()
    };
    let c = (t * t + S::one()).sqrt().recip();
    let s = t * c;

    w[p * n + p] = app - t * apq;
    w[r * n + r] = aqq + t * apq;
    w[p * n + r] = S::zero();
    w[r * n + p] = S::zero();
    for i in 0..n {
        if i != p && i != r {
            let aip = w[i * n + p];
            let aiq = w[i * n + r];
            let new_p = c * aip - s * aiq;
            let new_q = s * aip + c * aiq;
            w[i * n + p] = new_p;
            w[p * n + i] = new_p;
            w[i * n + r] = new_q;
            w[r * n + i] = new_q;
        }
    }
    for i in 0..n {
        let qip = q.get(i, p);
        let qiq = q.get(i, r);
        q.set(i, p, c * qip - s * qiq);
        q.set(i, r, s * qip + c * qiq);
    }
}

/// Proximal map of the off-diagonal ℓ1 penalty: shrinks off-diagonal
/// entries toward zero by `theta`, leaving the diagonal untouched.
pub fn soft_threshold_offdiag<S: Scalar>(a: &SymMatrix<S>, theta: S) -> Result<SymMatrix<S>> {
    if theta < S::zero() {
        return Err(Error::InvalidParameter(format!(
            "soft threshold must be nonnegative, got {theta}"
        )));
    }
    let n = a.n();
    let mut out = a.clone();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = a.get(i, j);
            let shrunk = v.abs() - theta;
            let v = if shrunk > S::zero() {
                v.signum() * shrunk
            } else {
                S::zero()
            };
            out.set_sym(i, j, v);
        }
    }
    Ok(out)
}

/// Extreme eigenvalues `(λ_min, λ_max)`.
pub fn spectral_bounds<S: Scalar>(a: &SymMatrix<S>) -> Result<(S, S)> {
    let eig = sym_eig(a)?;
    Ok((eig.min(), eig.max()))
}
