//! Kronecker-sum algebra at factor scale.
//!
//! A Kronecker sum `Ω = Ψ_1 ⊕ … ⊕ Ψ_L` is represented by its factor list;
//! the `p × p` matrix `Σ_k I ⊗ Ψ_k ⊗ I` is only materialized by
//! [`assemble_dense`], which serves as the small-`p` oracle for every
//! factor-level routine here. The represented matrix is invariant under
//! shifting factor diagonals by `c_k I` with `Σ_k c_k = 0`, so all
//! comparisons go through represented quantities, never raw factors.
//!
//! Spectral reductions (log-determinant, partial traces) enumerate the
//! full eigenvalue-sum grid of size `p`, which is exact and cheap at desk
//! scale.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_eig, EigenPair, Mat, SymMatrix};
use crate::scalar::Scalar;
use crate::tensor::{advance, mode_multiply, DenseTensor, Dims};

/// Default cap on `p` for dense assembly.
pub const DEFAULT_ORACLE_LIMIT: usize = 4096;

/// Relative floor below which the minimum eigenvalue sum is treated as
/// numerically singular.
const PD_RELATIVE_FLOOR: f64 = 1e-12;

/// `Ω = Ψ_1 ⊕ … ⊕ Ψ_L` as a list of symmetric factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KroneckerSum<S> {
    dims: Dims,
    factors: Vec<SymMatrix<S>>,
}

impl<S: Scalar> KroneckerSum<S> {
    pub fn new(dims: Dims, factors: Vec<SymMatrix<S>>) -> Result<Self> {
        if factors.len() != dims.order() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} factors, got {}",
                dims.order(),
                factors.len()
            )));
        }
        for (k, f) in factors.iter().enumerate() {
            if f.n() != dims.dim(k) {
                return Err(Error::ShapeMismatch(format!(
                    "factor {k} is {}×{}, expected {}×{}",
                    f.n(),
                    f.n(),
                    dims.dim(k),
                    dims.dim(k)
                )));
            }
        }
        Ok(Self { dims, factors })
    }

    /// Representation of `I_p`: identity in the first factor, zeros elsewhere.
    pub fn identity(dims: Dims) -> Self {
        Self::scaled_identity(dims, S::one())
    }

    /// Representation of `c · I_p`.
    pub fn scaled_identity(dims: Dims, c: S) -> Self {
        let factors = (0..dims.order())
            .map(|k| {
                if k == 0 {
                    SymMatrix::scaled_identity(dims.dim(0), c)
                } else {
                    SymMatrix::zeros(dims.dim(k))
                }
            })
            .collect();
        Self { dims, factors }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn factors(&self) -> &[SymMatrix<S>] {
        &self.factors
    }

    pub fn factor(&self, k: usize) -> &SymMatrix<S> {
        &self.factors[k]
    }

    pub fn factors_mut(&mut self) -> &mut [SymMatrix<S>] {
        &mut self.factors
    }

    /// Factorwise difference; represents `Ω_self − Ω_other`.
    pub fn sub(&self, other: &KroneckerSum<S>) -> Result<KroneckerSum<S>> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch(
                "Kronecker sums have different dims".into(),
            ));
        }
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| a.add_scaled(b, -S::one()))
            .collect();
        Ok(KroneckerSum {
            dims: self.dims.clone(),
            factors,
        })
    }

    /// Trace of the represented matrix: `Σ_k m_k tr(Ψ_k)`.
    pub fn represented_trace(&self) -> S {
        self.factors
            .iter()
            .enumerate()
            .map(|(k, f)| S::from_f64(self.dims.m(k) as f64) * f.trace())
            .sum()
    }

    pub fn is_finite(&self) -> bool {
        self.factors.iter().all(|f| f.is_finite())
    }
}

/// Spectral handle: per-factor orthonormal eigenbases and eigenvalues.
/// The eigenvalues of the represented `Ω` are exactly all sums
/// `λ_{1,i_1} + … + λ_{L,i_L}`.
#[derive(Debug, Clone)]
pub struct KsEigen<S> {
    dims: Dims,
    bases: Vec<Mat<S>>,
    spectra: Vec<Vec<S>>,
}

impl<S: Scalar> KsEigen<S> {
    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn basis(&self, k: usize) -> &Mat<S> {
        &self.bases[k]
    }

    pub fn spectrum(&self, k: usize) -> &[S] {
        &self.spectra[k]
    }

    /// `(Σ_k min λ_k, Σ_k max λ_k)` by eigenvalue additivity.
    pub fn min_max_eigsum(&self) -> (S, S) {
        let mut lo = S::zero();
        let mut hi = S::zero();
        for s in &self.spectra {
            lo += s[0];
            hi += s[s.len() - 1];
        }
        (lo, hi)
    }

    /// Positive-definiteness with a relative floor guarding log of
    /// near-zero: `min eigensum > 1e-12 · max |eigensum|`.
    pub fn is_pd(&self) -> bool {
        let (lo, hi) = self.min_max_eigsum();
        let scale = lo.abs().max(hi.abs());
        lo > S::from_f64(PD_RELATIVE_FLOOR) * scale
    }

    fn require_pd(&self) -> Result<()> {
        if self.is_pd() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite {
                min_sum: self.min_max_eigsum().0.into_f64(),
            })
        }
    }

    /// Visits every point of the eigenvalue-sum grid in canonical order.
    fn for_each_eigsum(&self, mut f: impl FnMut(&[usize], S)) {
        let order = self.dims.order();
        let mut idx = vec![0usize; order];
        for _ in 0..self.dims.p() {
            let mut sum = S::zero();
            for k in 0..order {
                sum += self.spectra[k][idx[k]];
            }
            f(&idx, sum);
            advance(&mut idx, self.dims.d());
        }
    }

    /// `tr(Ω⁻¹) = Σ 1/λ` over the grid.
    pub fn trace_inverse(&self) -> Result<S> {
        self.require_pd()?;
        let mut acc = S::zero();
        self.for_each_eigsum(|_, s| acc += s.recip());
        Ok(acc)
    }

    /// Diagonal of `Σ = Ω⁻¹` computed spectrally: the grid of reciprocal
    /// eigenvalue sums contracted by the squared eigenbasis along every
    /// mode.
    pub fn inverse_diagonal(&self) -> Result<Vec<S>> {
        self.require_pd()?;
        let mut grid = DenseTensor::zeros(self.dims.clone());
        {
            let data = grid.data_mut();
            let mut i = 0;
            self.for_each_eigsum(|_, s| {
                data[i] = s.recip();
                i += 1;
            });
        }
        let mut t = grid;
        for k in 0..self.dims.order() {
            let b = &self.bases[k];
            let sq = Mat::from_fn(b.rows(), b.cols(), |i, j| b.get(i, j) * b.get(i, j));
            t = mode_multiply(&t, &sq, k)?;
        }
        Ok(t.data().to_vec())
    }
}

/// Materializes the represented `p × p` matrix. Used as the oracle for the
/// factor-level routines; refuses to run above `limit`.
pub fn assemble_dense_with_limit<S: Scalar>(
    k: &KroneckerSum<S>,
    limit: usize,
) -> Result<SymMatrix<S>> {
    let dims = k.dims();
    let p = dims.p();
    if p > limit {
        return Err(Error::OracleLimit { p, limit });
    }
    let strides = dims.strides();
    let mut out = SymMatrix::zeros(p);
    for (mode, psi) in k.factors().iter().enumerate() {
        let d_k = dims.dim(mode);
        let m_k = dims.m(mode);
        // reduced odometer over the modes other than `mode`
        let reduced: Vec<usize> = (0..dims.order()).filter(|&l| l != mode).collect();
        let reduced_d: Vec<usize> = reduced.iter().map(|&l| dims.dim(l)).collect();
        let mut idx = vec![0usize; reduced.len()];
        for _ in 0..m_k {
            let base: usize = reduced
                .iter()
                .zip(&idx)
                .map(|(&l, &i)| i * strides[l])
                .sum();
            for a in 0..d_k {
                let row = base + a * strides[mode];
                for b in a..d_k {
                    let col = base + b * strides[mode];
                    let v = out.get(row, col) + psi.get(a, b);
                    out.set_sym(row, col, v);
                }
            }
            advance(&mut idx, &reduced_d);
        }
    }
    Ok(out)
}

/// [`assemble_dense_with_limit`] at the default limit.
pub fn assemble_dense<S: Scalar>(k: &KroneckerSum<S>) -> Result<SymMatrix<S>> {
    assemble_dense_with_limit(k, DEFAULT_ORACLE_LIMIT)
}

/// Per-factor eigendecomposition of a Kronecker sum.
pub fn ks_eigen<S: Scalar>(k: &KroneckerSum<S>) -> Result<KsEigen<S>> {
    let mut bases = Vec::with_capacity(k.factors().len());
    let mut spectra = Vec::with_capacity(k.factors().len());
    for f in k.factors() {
        let EigenPair { q, lambda } = sym_eig(f)?;
        bases.push(q);
        spectra.push(lambda);
    }
    Ok(KsEigen {
        dims: k.dims().clone(),
        bases,
        spectra,
    })
}

/// `log |Ω|` by explicit enumeration of the eigenvalue-sum grid.
pub fn logdet<S: Scalar>(e: &KsEigen<S>) -> Result<S> {
    e.require_pd()?;
    let mut acc = S::zero();
    e.for_each_eigsum(|_, s| acc += s.ln());
    Ok(acc)
}

/// `(Σ_k min λ_k, Σ_k max λ_k)`.
pub fn min_max_eigsum<S: Scalar>(e: &KsEigen<S>) -> (S, S) {
    e.min_max_eigsum()
}

/// Partial trace over the modes other than `k` of `Ω⁻¹`, computed as
/// `U_k diag(D_k) U_kᵀ` with `D_k[i] = Σ over the other modes of
/// 1/(λ_{k,i} + Σ_{l≠k} λ_{l,·})`. Rescaled by `1/m_k`, this is the
/// factor-wise marginal covariance of mode `k`.
pub fn partial_trace_inverse<S: Scalar>(e: &KsEigen<S>, k: usize) -> Result<SymMatrix<S>> {
    if k >= e.dims.order() {
        return Err(Error::ModeOutOfRange {
            mode: k,
            order: e.dims.order(),
        });
    }
    Ok(partial_traces_inverse(e)?.swap_remove(k))
}

/// All mode partial traces of `Ω⁻¹` in one grid pass.
pub fn partial_traces_inverse<S: Scalar>(e: &KsEigen<S>) -> Result<Vec<SymMatrix<S>>> {
    e.require_pd()?;
    let order = e.dims.order();
    let mut diag_acc: Vec<Vec<S>> = (0..order)
        .map(|k| vec![S::zero(); e.dims.dim(k)])
        .collect();
    e.for_each_eigsum(|idx, s| {
        let inv = s.recip();
        for k in 0..order {
            diag_acc[k][idx[k]] += inv;
        }
    });
    let mut out = Vec::with_capacity(order);
    for k in 0..order {
        let d_k = e.dims.dim(k);
        let basis = &e.bases[k];
        let mut m = SymMatrix::zeros(d_k);
        for i in 0..d_k {
            for j in i..d_k {
                let mut acc = S::zero();
                for (c, &dv) in diag_acc[k].iter().enumerate() {
                    acc += basis.get(i, c) * basis.get(j, c) * dv;
                }
                m.set_sym(i, j, acc);
            }
        }
        out.push(m);
    }
    Ok(out)
}

/// Trace-zero decomposition `Ω = Δ'_1 ⊕ … ⊕ Δ'_L + τ I_p` with
/// `tr(Δ'_k) = 0`, the unique representation that makes factor-level
/// norms well defined.
#[derive(Debug, Clone)]
pub struct TraceZeroDecomp<S> {
    pub delta_prime: Vec<SymMatrix<S>>,
    pub tau: S,
}

pub fn tracezero_decompose<S: Scalar>(k: &KroneckerSum<S>) -> TraceZeroDecomp<S> {
    let dims = k.dims();
    let tau = k.represented_trace() / S::from_f64(dims.p() as f64);
    let delta_prime = k
        .factors()
        .iter()
        .enumerate()
        .map(|(mode, f)| {
            let mut g = f.clone();
            g.shift_diag(-f.trace() / S::from_f64(dims.dim(mode) as f64));
            g
        })
        .collect();
    TraceZeroDecomp { delta_prime, tau }
}

impl<S: Scalar> TraceZeroDecomp<S> {
    /// Rebuilds the Kronecker sum, splitting `τ` back into factor 1.
    pub fn reassemble(&self, dims: &Dims) -> KroneckerSum<S> {
        let mut factors = self.delta_prime.clone();
        factors[0].shift_diag(self.tau);
        KroneckerSum {
            dims: dims.clone(),
            factors,
        }
    }
}

/// Frobenius norm of the represented matrix, computed exactly from the
/// trace-zero decomposition: off-diagonal supports of distinct factors are
/// disjoint and the centered diagonal replicates are mutually orthogonal,
/// so `‖Ω‖_F² = Σ_k m_k ‖Δ'_k‖_F² + p τ²`.
pub fn ks_frobenius<S: Scalar>(k: &KroneckerSum<S>) -> S {
    let dims = k.dims();
    let dec = tracezero_decompose(k);
    let mut acc = S::from_f64(dims.p() as f64) * dec.tau * dec.tau;
    for (mode, dp) in dec.delta_prime.iter().enumerate() {
        let m_k = S::from_f64(dims.m(mode) as f64);
        let diag = dp.diag_frobenius();
        acc += m_k * (dp.offdiag_frobenius_sq() + diag * diag);
    }
    acc.sqrt()
}

/// Operator norm of the represented matrix via eigenvalue additivity.
pub fn ks_operator_norm<S: Scalar>(k: &KroneckerSum<S>) -> Result<S> {
    let e = ks_eigen(k)?;
    let (lo, hi) = e.min_max_eigsum();
    Ok(lo.abs().max(hi.abs()))
}

/// Applies `Ω^{-1/2}` to a tensor: rotate into the eigenbasis mode by
/// mode, scale by the reciprocal square roots of the eigenvalue sums,
/// rotate back.
pub fn apply_inverse_sqrt<S: Scalar>(
    e: &KsEigen<S>,
    t: &DenseTensor<S>,
) -> Result<DenseTensor<S>> {
    e.require_pd()?;
    if t.dims() != &e.dims {
        return Err(Error::ShapeMismatch(
            "tensor dims do not match the Kronecker sum".into(),
        ));
    }
    let mut work = t.clone();
    for k in 0..e.dims.order() {
        work = mode_multiply(&work, &e.bases[k].transpose(), k)?;
    }
    {
        let data = work.data_mut();
        let mut i = 0;
        e.for_each_eigsum(|_, s| {
            data[i] = data[i] / s.sqrt();
            i += 1;
        });
    }
    for k in 0..e.dims.order() {
        work = mode_multiply(&work, &e.bases[k], k)?;
    }
    Ok(work)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn random_sym(n: usize, rng: &mut SplitMix64) -> SymMatrix<f64> {
        let raw: Vec<f64> = (0..n * n).map(|_| rng.next_in_range(-1.0, 1.0)).collect();
        SymMatrix::from_entries(n, raw).unwrap()
    }

    pub(crate) fn random_ks(d: &[usize], seed: u64) -> KroneckerSum<f64> {
        let dims = Dims::new(d.to_vec()).unwrap();
        let mut rng = SplitMix64::new(seed);
        let factors = d.iter().map(|&dk| random_sym(dk, &mut rng)).collect();
        KroneckerSum::new(dims, factors).unwrap()
    }

    /// Random PD instance: random factors lifted so the min eigensum is 0.5.
    pub(crate) fn random_pd_ks(d: &[usize], seed: u64) -> KroneckerSum<f64> {
        let mut k = random_ks(d, seed);
        let e = ks_eigen(&k).unwrap();
        let (lo, _) = e.min_max_eigsum();
        k.factors_mut()[0].shift_diag(0.5 - lo);
        k
    }

    /// Independent dense oracle: explicit Kronecker products with identities.
    fn kron(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
        Mat::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
            a.get(i / b.rows(), j / b.cols()) * b.get(i % b.rows(), j % b.cols())
        })
    }

    pub(crate) fn dense_oracle(k: &KroneckerSum<f64>) -> Mat<f64> {
        let dims = k.dims();
        let p = dims.p();
        let mut total = Mat::zeros(p, p);
        for (mode, psi) in k.factors().iter().enumerate() {
            let mut term = Mat::identity(1);
            for l in 0..dims.order() {
                let next = if l == mode {
                    psi.to_mat()
                } else {
                    Mat::identity(dims.dim(l))
                };
                term = kron(&term, &next);
            }
            for (o, &t) in total.data_mut().iter_mut().zip(term.data()) {
                *o += t;
            }
        }
        total
    }

    fn dense_eigenvalues(k: &KroneckerSum<f64>) -> Vec<f64> {
        let dense = assemble_dense(k).unwrap();
        sym_eig(&dense).unwrap().lambda
    }

    #[test]
    fn assemble_diagonal_factors() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let k = KroneckerSum::new(
            dims,
            vec![
                SymMatrix::from_diag(&[1.0, 2.0]),
                SymMatrix::from_diag(&[10.0, 20.0]),
            ],
        )
        .unwrap();
        let dense = assemble_dense(&k).unwrap();
        let diag: Vec<f64> = (0..4).map(|i| dense.get(i, i)).collect();
        assert_eq!(diag, vec![11.0, 21.0, 12.0, 22.0]);
        for i in 0..4 {
            for j in 0..4 {
                if i != j {
                    assert_eq!(dense.get(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn assemble_identity_factors() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::new(
            dims,
            vec![SymMatrix::identity(2), SymMatrix::identity(3)],
        )
        .unwrap();
        let dense = assemble_dense(&k).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let expect = if i == j { 2.0 } else { 0.0 };
                assert_eq!(dense.get(i, j), expect);
            }
        }
    }

    #[test]
    fn assemble_matches_naive_kronecker_oracle() {
        for seed in 0..10 {
            let k = random_ks(&[2, 3], seed);
            let dense = assemble_dense(&k).unwrap();
            let oracle = dense_oracle(&k);
            for i in 0..6 {
                for j in 0..6 {
                    assert!((dense.get(i, j) - oracle.get(i, j)).abs() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn assemble_respects_limit() {
        let k = KroneckerSum::<f64>::identity(Dims::new(vec![8, 8]).unwrap());
        assert!(matches!(
            assemble_dense_with_limit(&k, 63),
            Err(Error::OracleLimit { p: 64, limit: 63 })
        ));
    }

    #[test]
    fn eigen_diagonal_spectra() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let k = KroneckerSum::new(
            dims,
            vec![
                SymMatrix::from_diag(&[1.0, 2.0]),
                SymMatrix::from_diag(&[10.0, 20.0]),
            ],
        )
        .unwrap();
        let e = ks_eigen(&k).unwrap();
        assert_eq!(e.spectrum(0), &[1.0, 2.0]);
        assert_eq!(e.spectrum(1), &[10.0, 20.0]);
    }

    #[test]
    fn eigen_identity_sums() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::new(
            dims,
            vec![SymMatrix::identity(2), SymMatrix::identity(3)],
        )
        .unwrap();
        let e = ks_eigen(&k).unwrap();
        let mut sums = Vec::new();
        e.for_each_eigsum(|_, s| sums.push(s));
        assert!(sums.iter().all(|&s| (s - 2.0).abs() < 1e-15));
    }

    #[test]
    fn eigsum_grid_matches_dense_spectrum() {
        for seed in 0..10 {
            let k = random_ks(&[2, 3], seed + 50);
            let e = ks_eigen(&k).unwrap();
            let mut sums = Vec::new();
            e.for_each_eigsum(|_, s| sums.push(s));
            sums.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let dense = dense_eigenvalues(&k);
            for (a, b) in sums.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn logdet_identity_case() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::new(
            dims,
            vec![SymMatrix::identity(2), SymMatrix::identity(3)],
        )
        .unwrap();
        let ld = logdet(&ks_eigen(&k).unwrap()).unwrap();
        assert!((ld - 6.0 * (2.0f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn logdet_rejects_singular() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        // spectra {0,1} ⊕ {0,1} has a zero eigensum
        let k = KroneckerSum::new(
            dims,
            vec![
                SymMatrix::from_diag(&[0.0, 1.0]),
                SymMatrix::from_diag(&[0.0, 1.0]),
            ],
        )
        .unwrap();
        assert!(matches!(
            logdet(&ks_eigen(&k).unwrap()),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn logdet_matches_dense_factorization() {
        for seed in 0..10 {
            let k = random_pd_ks(&[2, 3], seed + 100);
            let ld = logdet(&ks_eigen(&k).unwrap()).unwrap();
            let dense_ld: f64 = dense_eigenvalues(&k).iter().map(|l| l.ln()).sum();
            assert!((ld - dense_ld).abs() <= 1e-9 * dense_ld.abs().max(1.0));
        }
    }

    #[test]
    fn min_max_eigsum_cases() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let k = KroneckerSum::new(
            dims.clone(),
            vec![
                SymMatrix::from_diag(&[1.0, 2.0]),
                SymMatrix::from_diag(&[10.0, 20.0]),
            ],
        )
        .unwrap();
        assert_eq!(min_max_eigsum(&ks_eigen(&k).unwrap()), (11.0, 22.0));

        let i2 = KroneckerSum::new(
            dims,
            vec![SymMatrix::identity(2), SymMatrix::identity(2)],
        )
        .unwrap();
        assert_eq!(min_max_eigsum(&ks_eigen(&i2).unwrap()), (2.0, 2.0));

        for seed in 0..5 {
            let k = random_ks(&[2, 2, 2], seed + 150);
            let (lo, hi) = min_max_eigsum(&ks_eigen(&k).unwrap());
            let dense = dense_eigenvalues(&k);
            assert!((lo - dense[0]).abs() < 1e-9);
            assert!((hi - dense[dense.len() - 1]).abs() < 1e-9);
        }
    }

    #[test]
    fn partial_trace_of_scaled_identity() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::scaled_identity(dims, 2.0);
        let pt = partial_trace_inverse(&ks_eigen(&k).unwrap(), 0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let expect = if i == j { 1.5 } else { 0.0 };
                assert!((pt.get(i, j) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_single_mode_is_inverse() {
        let k = random_pd_ks(&[4], 200);
        let pt = partial_trace_inverse(&ks_eigen(&k).unwrap(), 0).unwrap();
        // multiply by the factor: should give the identity
        let prod = pt.to_mat().matmul(&k.factor(0).to_mat());
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((prod.get(i, j) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn partial_trace_matches_dense_inverse() {
        for seed in 0..10 {
            let k = random_pd_ks(&[2, 3], seed + 250);
            let e = ks_eigen(&k).unwrap();
            let dense = assemble_dense(&k).unwrap();
            let dense_inv = sym_eig(&dense).unwrap().reconstruct_mapped(|l| 1.0 / l);
            for mode in 0..2 {
                let pt = partial_trace_inverse(&e, mode).unwrap();
                let d_k = k.dims().dim(mode);
                let strides = k.dims().strides();
                let other = 1 - mode;
                for a in 0..d_k {
                    for b in 0..d_k {
                        let mut acc = 0.0;
                        for j in 0..k.dims().dim(other) {
                            let row = a * strides[mode] + j * strides[other];
                            let col = b * strides[mode] + j * strides[other];
                            acc += dense_inv.get(row, col);
                        }
                        assert!(
                            (pt.get(a, b) - acc).abs() <= 1e-9 * acc.abs().max(1.0),
                            "mode {mode} entry ({a},{b})"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn tracezero_of_identity_representation() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::identity(dims);
        let dec = tracezero_decompose(&k);
        assert!((dec.tau - 1.0).abs() < 1e-15);
        for dp in &dec.delta_prime {
            assert!(dp.frobenius() < 1e-15);
        }
    }

    #[test]
    fn tracezero_fixed_point() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let k = KroneckerSum::new(
            dims,
            vec![
                SymMatrix::from_diag(&[-1.0, 1.0]),
                SymMatrix::from_entries(2, vec![0.0, 0.7, 0.7, 0.0]).unwrap(),
            ],
        )
        .unwrap();
        let dec = tracezero_decompose(&k);
        assert_eq!(dec.tau, 0.0);
        for (dp, f) in dec.delta_prime.iter().zip(k.factors()) {
            assert_eq!(dp, f);
        }
    }

    #[test]
    fn tracezero_reassembles_exactly() {
        for seed in 0..10 {
            let k = random_ks(&[2, 3], seed + 300);
            let dec = tracezero_decompose(&k);
            for dp in &dec.delta_prime {
                assert!(dp.trace().abs() <= 1e-12 * dp.n() as f64 * dp.max_abs().max(1.0));
            }
            let back = dec.reassemble(k.dims());
            let a = assemble_dense(&k).unwrap();
            let b = assemble_dense(&back).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn frobenius_of_identity_representation() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::<f64>::identity(dims);
        assert!((ks_frobenius(&k) - 6.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn frobenius_single_offdiagonal_pair() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::new(
            dims,
            vec![
                SymMatrix::from_entries(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap(),
                SymMatrix::zeros(3),
            ],
        )
        .unwrap();
        assert!((ks_frobenius(&k) - 6.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn frobenius_matches_dense() {
        for seed in 0..10 {
            let k = random_ks(&[2, 3], seed + 350);
            let dense = assemble_dense(&k).unwrap();
            let expect = dense.frobenius();
            assert!(
                (ks_frobenius(&k) - expect).abs() <= 1e-10 * expect.max(1.0),
                "seed {seed}"
            );
        }
    }

    #[test]
    fn operator_norm_diagonal_case() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::new(
            dims,
            vec![
                SymMatrix::from_diag(&[-0.5, 1.5]),
                SymMatrix::from_diag(&[-2.0, 0.0, 2.0]),
            ],
        )
        .unwrap();
        // trace-zero spectra {-1, 1} and {-2, 0, 2} with tau = 0.5
        let dec = tracezero_decompose(&k);
        assert!((dec.tau - 0.5).abs() < 1e-15);
        assert!((ks_operator_norm(&k).unwrap() - 3.5).abs() < 1e-12);
    }

    #[test]
    fn operator_norm_of_scaled_identity() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::scaled_identity(dims, -2.5);
        assert!((ks_operator_norm(&k).unwrap() - 2.5).abs() < 1e-14);
    }

    #[test]
    fn operator_norm_matches_dense() {
        for seed in 0..10 {
            let k = random_ks(&[2, 2, 2], seed + 400);
            let dense = dense_eigenvalues(&k);
            let expect = dense[0].abs().max(dense[dense.len() - 1].abs());
            assert!((ks_operator_norm(&k).unwrap() - expect).abs() <= 1e-9 * expect.max(1.0));
        }
    }

    #[test]
    fn pivot_norm_comparison() {
        // operator norm ≤ sqrt((L+1)/m_min) · Frobenius norm on the cone
        for d in [vec![2usize, 3], vec![2, 2, 2]] {
            let factor = ((d.len() as f64 + 1.0)
                / Dims::new(d.clone()).unwrap().m_min() as f64)
                .sqrt();
            for seed in 0..100 {
                let k = random_ks(&d, 1000 + seed);
                let op = ks_operator_norm(&k).unwrap();
                let fr = ks_frobenius(&k);
                assert!(op <= factor * fr + 1e-10, "{d:?} seed {seed}");
            }
        }
    }

    #[test]
    fn representation_invariance() {
        for seed in 0..5 {
            let k = random_pd_ks(&[2, 3], seed + 450);
            let mut shifted = k.clone();
            shifted.factors_mut()[0].shift_diag(0.7);
            shifted.factors_mut()[1].shift_diag(-0.7);

            let a = assemble_dense(&k).unwrap();
            let b = assemble_dense(&shifted).unwrap();
            for i in 0..6 {
                for j in 0..6 {
                    assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-12);
                }
            }
            let ld_a = logdet(&ks_eigen(&k).unwrap()).unwrap();
            let ld_b = logdet(&ks_eigen(&shifted).unwrap()).unwrap();
            assert!((ld_a - ld_b).abs() < 1e-10 * ld_a.abs().max(1.0));
            assert!((ks_frobenius(&k) - ks_frobenius(&shifted)).abs() < 1e-10);
            assert!(
                (ks_operator_norm(&k).unwrap() - ks_operator_norm(&shifted).unwrap()).abs()
                    < 1e-10
            );
        }
    }

    #[test]
    fn apply_inverse_sqrt_scaled_identity() {
        let dims = Dims::new(vec![2, 3]).unwrap();
        let k = KroneckerSum::scaled_identity(dims.clone(), 4.0);
        let t = crate::tensor::tests::random_tensor(&[2, 3], 500);
        let r = apply_inverse_sqrt(&ks_eigen(&k).unwrap(), &t).unwrap();
        for (a, b) in r.data().iter().zip(t.data()) {
            assert!((a - b / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_inverse_sqrt_matches_dense() {
        for seed in 0..5 {
            let k = random_pd_ks(&[2, 3], seed + 550);
            let t = crate::tensor::tests::random_tensor(&[2, 3], 600 + seed);
            let r = apply_inverse_sqrt(&ks_eigen(&k).unwrap(), &t).unwrap();

            let dense = assemble_dense(&k).unwrap();
            let root_inv = sym_eig(&dense)
                .unwrap()
                .reconstruct_mapped(|l| 1.0 / l.sqrt());
            let v = t.data();
            for i in 0..6 {
                let mut acc = 0.0;
                for j in 0..6 {
                    acc += root_inv.get(i, j) * v[j];
                }
                assert!((r.data()[i] - acc).abs() < 1e-9, "seed {seed} entry {i}");
            }
        }
    }

    #[test]
    fn apply_inverse_sqrt_rejects_non_pd() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let k = KroneckerSum::scaled_identity(dims.clone(), -1.0);
        let t = DenseTensor::zeros(dims);
        assert!(apply_inverse_sqrt(&ks_eigen(&k).unwrap(), &t).is_err());
    }

    #[test]
    fn pythagorean_identity() {
        for seed in 0..5 {
            let k = random_ks(&[2, 3], seed + 650);
            let dims = k.dims().clone();
            let dec = tracezero_decompose(&k);
            let mut acc = dims.p() as f64 * dec.tau * dec.tau;
            for (mode, dp) in dec.delta_prime.iter().enumerate() {
                acc += dims.m(mode) as f64 * dp.frobenius().powi(2);
            }
            let dense_sq = assemble_dense(&k).unwrap().frobenius().powi(2);
            assert!((acc - dense_sq).abs() <= 1e-10 * dense_sq.max(1.0));
        }
    }
}
