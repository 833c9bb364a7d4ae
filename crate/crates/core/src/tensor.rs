//! Dense order-L tensors: canonical storage, mode-k unfolding,
//! vectorization, mode products, and inner products.
//!
//! Canonical memory layout: the last index varies fastest, so the linear
//! index of `(i_1, …, i_L)` is `Σ_k i_k · stride_k` with
//! `stride_k = d_{k+1} ⋯ d_L`. Vectorization is exactly this linear order.
//! Mode-k unfolding places fiber entry `i_k` in row `i_k`; the column index
//! runs over the remaining modes in ascending order, last varying fastest.
//! Both conventions are fixed so results are bit-reproducible.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::scalar::Scalar;

/// Mode sizes `[d_1, …, d_L]` with the derived product `p` and
/// co-dimensions `m_k = p / d_k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Dims {
    d: Vec<usize>,
    p: usize,
    m: Vec<usize>,
}

impl Dims {
    pub fn new(d: Vec<usize>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidParameter(
                "dimension vector must have at least one mode".into(),
            ));
        }
        if d.iter().any(|&dk| dk == 0) {
            return Err(Error::InvalidParameter(
                "every mode size must be positive".into(),
            ));
        }
        let mut p: usize = 1;
        for &dk in &d {
            p = p
                .checked_mul(dk)
                .ok_or_else(|| Error::InvalidParameter("dimension product overflows".into()))?;
        }
        let m = d.iter().map(|&dk| p / dk).collect();
        Ok(Self { d, p, m })
    }

    /// Number of modes L.
    pub fn order(&self) -> usize {
        self.d.len()
    }

    pub fn d(&self) -> &[usize] {
        &self.d
    }

    pub fn dim(&self, k: usize) -> usize {
        self.d[k]
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn m(&self, k: usize) -> usize {
        self.m[k]
    }

    pub fn m_min(&self) -> usize {
        *self.m.iter().min().unwrap()
    }

    pub fn d_max(&self) -> usize {
        *self.d.iter().max().unwrap()
    }

    /// Row-major strides (last index fastest).
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1usize; self.d.len()];
        for k in (0..self.d.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.d[k + 1];
        }
        s
    }

    fn check_mode(&self, k: usize) -> Result<()> {
        if k >= self.d.len() {
            Err(Error::ModeOutOfRange {
                mode: k,
                order: self.d.len(),
            })
        } else {
            Ok(())
        }
    }
}

impl TryFrom<Vec<usize>> for Dims {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        Dims::new(v)
    }
}

impl From<Dims> for Vec<usize> {
    fn from(d: Dims) -> Self {
        d.d
    }
}

/// Dense order-L tensor holding one sample, entries in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor<S> {
    dims: Dims,
    data: Vec<S>,
}

impl<S: Scalar> DenseTensor<S> {
    pub fn new(dims: Dims, data: Vec<S>) -> Result<Self> {
        if data.len() != dims.p() {
            return Err(Error::ShapeMismatch(format!(
                "tensor data length {} does not match p = {}",
                data.len(),
                dims.p()
            )));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Dims) -> Self {
        let p = dims.p();
        Self {
            dims,
            data: vec![S::zero(); p],
        }
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(&[usize]) -> S) -> Self {
        let p = dims.p();
        let mut data = Vec::with_capacity(p);
        let mut idx = vec![0usize; dims.order()];
        for _ in 0..p {
            data.push(f(&idx));
            advance(&mut idx, dims.d());
        }
        Self { dims, data }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn get(&self, idx: &[usize]) -> S {
        let strides = self.dims.strides();
        let lin: usize = idx.iter().zip(&strides).map(|(&i, &s)| i * s).sum();
        self.data[lin]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn frobenius_sq(&self) -> S {
        self.data.iter().map(|&x| x * x).sum()
    }
}

/// Advances a multi-index in canonical order (last index fastest).
#[inline]
pub(crate) fn advance(idx: &mut [usize], d: &[usize]) {
    for k in (0..d.len()).rev() {
        idx[k] += 1;
        if idx[k] < d[k] {
            return;
        }
        idx[k] = 0;
    }
}

/// Column strides of the mode-k unfolding: remaining modes in ascending
/// order, last varying fastest.
fn column_strides(dims: &Dims, k: usize) -> Vec<usize> {
    let order = dims.order();
    let mut cs = vec![0usize; order];
    let mut stride = 1usize;
    for l in (0..order).rev() {
        if l == k {
            continue;
        }
        cs[l] = stride;
        stride *= dims.dim(l);
    }
    cs
}

/// Mode-k unfolding: a `d_k × m_k` matrix whose columns are mode-k fibers.
pub fn unfold<S: Scalar>(t: &DenseTensor<S>, k: usize) -> Result<Mat<S>> {
    t.dims.check_mode(k)?;
    let dims = &t.dims;
    let d_k = dims.dim(k);
    let m_k = dims.m(k);
    let cs = column_strides(dims, k);
    let mut out = Mat::zeros(d_k, m_k);
    let mut idx = vec![0usize; dims.order()];
    for &v in &t.data {
        let row = idx[k];
        let col: usize = idx
            .iter()
            .zip(&cs)
            .enumerate()
            .filter(|(l, _)| *l != k)
            .map(|(_, (&i, &s))| i * s)
            .sum();
        out.set(row, col, v);
        advance(&mut idx, dims.d());
    }
    Ok(out)
}

/// Inverse of [`unfold`]: rebuilds the tensor from its mode-k unfolding.
pub fn fold<S: Scalar>(mat: &Mat<S>, dims: &Dims, k: usize) -> Result<DenseTensor<S>> {
    dims.check_mode(k)?;
    if mat.rows() != dims.dim(k) || mat.cols() != dims.m(k) {
        return Err(Error::ShapeMismatch(format!(
            "fold expects a {}×{} matrix for mode {k}, got {}×{}",
            dims.dim(k),
            dims.m(k),
            mat.rows(),
            mat.cols()
        )));
    }
    let cs = column_strides(dims, k);
    let mut t = DenseTensor::zeros(dims.clone());
    let mut idx = vec![0usize; dims.order()];
    for slot in t.data.iter_mut() {
        let row = idx[k];
        let col: usize = idx
            .iter()
            .zip(&cs)
            .enumerate()
            .filter(|(l, _)| *l != k)
            .map(|(_, (&i, &s))| i * s)
            .sum();
        *slot = mat.get(row, col);
        advance(&mut idx, dims.d());
    }
    Ok(t)
}

/// Vectorization in canonical order; consistent with the Kronecker-sum
/// assembly so that `vec(x)ᵀ Ω vec(x)` matches the trace identities.
pub fn vec_tensor<S: Scalar>(t: &DenseTensor<S>) -> Vec<S> {
    t.data.clone()
}

/// Mode-k product: the result unfolded along `k` equals `m · unfold(t, k)`.
pub fn mode_multiply<S: Scalar>(t: &DenseTensor<S>, m: &Mat<S>, k: usize) -> Result<DenseTensor<S>> {
    t.dims.check_mode(k)?;
    if m.cols() != t.dims.dim(k) {
        return Err(Error::ShapeMismatch(format!(
            "mode-{k} product expects {} columns, got {}",
            t.dims.dim(k),
            m.cols()
        )));
    }
    let unfolded = unfold(t, k)?;
    let product = m.matmul(&unfolded);
    let mut new_d = t.dims.d().to_vec();
    new_d[k] = m.rows();
    let new_dims = Dims::new(new_d)?;
    fold(&product, &new_dims, k)
}

/// Entrywise inner product of two same-shaped tensors.
pub fn inner<S: Scalar>(a: &DenseTensor<S>, b: &DenseTensor<S>) -> Result<S> {
    if a.dims != b.dims {
        return Err(Error::ShapeMismatch(
            "inner product requires matching dims".into(),
        ));
    }
    Ok(a.data.iter().zip(&b.data).map(|(&x, &y)| x * y).sum())
}

const KSTN_MAGIC: &[u8; 4] = b"KSTN";
const KSTN_VERSION: u8 = 1;

/// Writes the binary tensor format: magic `KSTN`, version byte, L as
/// little-endian u32, the L mode sizes as little-endian u32, then the p
/// entries as little-endian f64 in canonical order.
pub fn write_kstn<W: Write>(w: &mut W, t: &DenseTensor<f64>) -> Result<()> {
    w.write_all(KSTN_MAGIC)?;
    w.write_all(&[KSTN_VERSION])?;
    w.write_all(&(t.dims.order() as u32).to_le_bytes())?;
    for &dk in t.dims.d() {
        w.write_all(&(dk as u32).to_le_bytes())?;
    }
    for &v in &t.data {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

/// Reads the binary tensor format written by [`write_kstn`].
pub fn read_kstn<R: Read>(r: &mut R) -> Result<DenseTensor<f64>> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != KSTN_MAGIC {
        return Err(Error::Format("bad tensor magic".into()));
    }
    let mut version = [0u8; 1];
    r.read_exact(&mut version)?;
    if version[0] != KSTN_VERSION {
        return Err(Error::Format(format!(
            "unsupported tensor version {}",
            version[0]
        )));
    }
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let order = u32::from_le_bytes(b4) as usize;
    if order == 0 || order > 64 {
        return Err(Error::Format(format!("implausible tensor order {order}")));
    }
    let mut d = Vec::with_capacity(order);
    for _ in 0..order {
        r.read_exact(&mut b4)?;
        d.push(u32::from_le_bytes(b4) as usize);
    }
    let dims = Dims::new(d)?;
    let mut data = Vec::with_capacity(dims.p());
    let mut b8 = [0u8; 8];
    for _ in 0..dims.p() {
        r.read_exact(&mut b8)?;
        data.push(f64::from_le_bytes(b8));
    }
    DenseTensor::new(dims, data)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    pub(crate) fn random_tensor(d: &[usize], seed: u64) -> DenseTensor<f64> {
        let dims = Dims::new(d.to_vec()).unwrap();
        let mut rng = SplitMix64::new(seed);
        let data = (0..dims.p()).map(|_| rng.next_in_range(-1.0, 1.0)).collect();
        DenseTensor::new(dims, data).unwrap()
    }

    #[test]
    fn dims_derived_quantities() {
        let dims = Dims::new(vec![2, 3, 4]).unwrap();
        assert_eq!(dims.p(), 24);
        assert_eq!(dims.m(0), 12);
        assert_eq!(dims.m(1), 8);
        assert_eq!(dims.m(2), 6);
        assert_eq!(dims.m_min(), 6);
        assert_eq!(dims.d_max(), 4);
        for k in 0..3 {
            assert_eq!(dims.m(k) * dims.dim(k), dims.p());
        }
    }

    #[test]
    fn dims_rejects_degenerate() {
        assert!(Dims::new(vec![]).is_err());
        assert!(Dims::new(vec![2, 0]).is_err());
    }

    #[test]
    fn unfold_matrix_mode_one_is_identity() {
        let t = random_tensor(&[3, 4], 1);
        let u = unfold(&t, 0).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(u.get(i, j), t.get(&[i, j]));
            }
        }
    }

    #[test]
    fn unfold_matrix_mode_two_is_transpose() {
        let t = random_tensor(&[3, 4], 2);
        let u = unfold(&t, 1).unwrap();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(u.get(j, i), t.get(&[i, j]));
            }
        }
    }

    #[test]
    fn unfold_234_matches_index_formula() {
        // independent oracle: for k = 1 (0-based), remaining modes are
        // (0, 2) in ascending order with mode 2 fastest, so the column of
        // entry (i0, i1, i2) is i0 * d2 + i2 and the row is i1.
        let t = random_tensor(&[2, 3, 4], 3);
        let u = unfold(&t, 1).unwrap();
        assert_eq!((u.rows(), u.cols()), (3, 8));
        for i0 in 0..2 {
            for i1 in 0..3 {
                for i2 in 0..4 {
                    assert_eq!(u.get(i1, i0 * 4 + i2), t.get(&[i0, i1, i2]));
                }
            }
        }
    }

    #[test]
    fn unfold_rejects_bad_mode() {
        let t = random_tensor(&[2, 3], 4);
        assert!(matches!(
            unfold(&t, 2),
            Err(Error::ModeOutOfRange { mode: 2, order: 2 })
        ));
    }

    #[test]
    fn fold_unfold_roundtrip_all_modes() {
        for d in [vec![5usize], vec![2, 3], vec![2, 3, 4], vec![3, 4, 5, 6]] {
            let t = random_tensor(&d, 5);
            for k in 0..d.len() {
                let u = unfold(&t, k).unwrap();
                let back = fold(&u, t.dims(), k).unwrap();
                assert_eq!(back, t, "mode {k} of {d:?}");
            }
        }
    }

    #[test]
    fn vec_of_scalar_tensor() {
        let t = DenseTensor::new(Dims::new(vec![1, 1, 1]).unwrap(), vec![7.5]).unwrap();
        assert_eq!(vec_tensor(&t), vec![7.5]);
    }

    #[test]
    fn vec_of_matrix_in_documented_order() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let t = DenseTensor::new(dims, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(vec_tensor(&t), vec![1.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn vec_dot_is_frobenius_sq() {
        let t = random_tensor(&[2, 3], 6);
        let v = vec_tensor(&t);
        let dot: f64 = v.iter().map(|x| x * x).sum();
        assert!((dot - t.frobenius_sq()).abs() < 1e-14);
    }

    #[test]
    fn mode_multiply_identity() {
        let t = random_tensor(&[2, 3], 7);
        let got = mode_multiply(&t, &Mat::identity(3), 1).unwrap();
        assert_eq!(got, t);
    }

    #[test]
    fn mode_multiply_vector_case() {
        let dims = Dims::new(vec![3]).unwrap();
        let t = DenseTensor::new(dims, vec![1.0, 2.0, 3.0]).unwrap();
        let m = Mat::from_fn(2, 3, |i, j| ((i + 1) * (j + 1)) as f64);
        let got = mode_multiply(&t, &m, 0).unwrap();
        // m * [1,2,3]^T = [14, 28]
        assert_eq!(got.data(), &[14.0, 28.0]);
    }

    #[test]
    fn mode_multiply_matches_unfold_oracle() {
        let t = random_tensor(&[2, 3], 8);
        let mut rng = SplitMix64::new(99);
        let m = Mat::from_fn(2, 2, |_, _| rng.next_in_range(-1.0, 1.0));
        let got = mode_multiply(&t, &m, 0).unwrap();
        let oracle = fold(&m.matmul(&unfold(&t, 0).unwrap()), t.dims(), 0).unwrap();
        assert_eq!(got, oracle);
    }

    #[test]
    fn mode_multiply_rejects_shape_mismatch() {
        let t = random_tensor(&[2, 3], 8);
        let m = Mat::<f64>::identity(2);
        assert!(mode_multiply(&t, &m, 1).is_err());
    }

    #[test]
    fn inner_ones() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let ones = DenseTensor::new(dims, vec![1.0; 4]).unwrap();
        assert_eq!(inner(&ones, &ones).unwrap(), 4.0);
    }

    #[test]
    fn inner_orthogonal_indicators() {
        let dims = Dims::new(vec![2, 2]).unwrap();
        let a = DenseTensor::new(dims.clone(), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let b = DenseTensor::new(dims, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(inner(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn inner_matches_vec_dot() {
        let a = random_tensor(&[2, 3], 10);
        let b = random_tensor(&[2, 3], 11);
        let dot: f64 = vec_tensor(&a)
            .iter()
            .zip(vec_tensor(&b).iter())
            .map(|(x, y)| x * y)
            .sum();
        assert!((inner(&a, &b).unwrap() - dot).abs() < 1e-14);
        assert_eq!(inner(&a, &b).unwrap(), inner(&b, &a).unwrap());
    }

    #[test]
    fn inner_rejects_mismatched_dims() {
        let a = random_tensor(&[2, 3], 12);
        let b = random_tensor(&[3, 2], 12);
        assert!(inner(&a, &b).is_err());
    }

    #[test]
    fn column_energy_is_mode_independent() {
        let t = random_tensor(&[3, 4, 5], 13);
        let total = t.frobenius_sq();
        for k in 0..3 {
            let u = unfold(&t, k).unwrap();
            let m_k = t.dims().m(k) as f64;
            let mean_col_energy = (0..u.cols())
                .map(|j| (0..u.rows()).map(|i| u.get(i, j).powi(2)).sum::<f64>())
                .sum::<f64>()
                / u.cols() as f64;
            assert!((m_k * mean_col_energy - total).abs() < 1e-10 * total);
        }
    }

    #[test]
    fn kstn_roundtrip() {
        let t = random_tensor(&[2, 3, 4], 14);
        let mut buf = Vec::new();
        write_kstn(&mut buf, &t).unwrap();
        assert_eq!(&buf[..4], b"KSTN");
        let back = read_kstn(&mut buf.as_slice()).unwrap();
        assert_eq!(back, t);
    }

    #[test]
    fn kstn_rejects_bad_magic() {
        let mut buf = b"XSTN".to_vec();
        buf.extend_from_slice(&[1, 1, 0, 0, 0]);
        assert!(read_kstn(&mut buf.as_slice()).is_err());
    }
}
