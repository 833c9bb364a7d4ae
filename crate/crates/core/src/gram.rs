//! Mode-k sample Gram matrices, population factor covariances, trace
//! identities, and penalty calibration.
//!
//! The mode-k Gram `S^k = (1/(n m_k)) Σ_i unfold(X_i, k) unfold(X_i, k)ᵀ`
//! is the sufficient statistic of the objective: by the projection
//! identity, `⟨Ŝ, Ω⟩ = Σ_k m_k ⟨S^k, Ψ_k⟩` for any Kronecker sum `Ω`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ksum::{partial_trace_inverse, KroneckerSum};
use crate::linalg::SymMatrix;
use crate::model::GroundTruth;
use crate::scalar::Scalar;
use crate::tensor::{unfold, DenseTensor, Dims};

/// Mode-k sample Gram matrices plus the sample count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorGrams<S> {
    dims: Dims,
    n: usize,
    grams: Vec<SymMatrix<S>>,
}

impl<S: Scalar> FactorGrams<S> {
    pub fn new(dims: Dims, n: usize, grams: Vec<SymMatrix<S>>) -> Result<Self> {
        if grams.len() != dims.order() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} gram matrices, got {}",
                dims.order(),
                grams.len()
            )));
        }
        for (k, g) in grams.iter().enumerate() {
            if g.n() != dims.dim(k) {
                return Err(Error::ShapeMismatch(format!(
                    "gram {k} has size {}, expected {}",
                    g.n(),
                    dims.dim(k)
                )));
            }
        }
        Ok(Self { dims, n, grams })
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gram(&self, k: usize) -> &SymMatrix<S> {
        &self.grams[k]
    }

    pub fn grams(&self) -> &[SymMatrix<S>] {
        &self.grams
    }

    /// `m_k · tr(S^k)`, the per-sample average total energy; identical for
    /// every mode.
    pub fn total_energy(&self) -> S {
        S::from_f64(self.dims.m(0) as f64) * self.grams[0].trace()
    }

    pub fn is_finite(&self) -> bool {
        self.grams.iter().all(|g| g.is_finite())
    }
}

/// Computes the mode-k Grams of a sample set.
pub fn factor_grams<S: Scalar>(samples: &[DenseTensor<S>]) -> Result<FactorGrams<S>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("empty sample list".into()))?;
    let dims = first.dims().clone();
    let n = samples.len();
    let mut grams: Vec<SymMatrix<S>> = (0..dims.order())
        .map(|k| SymMatrix::zeros(dims.dim(k)))
        .collect();
    for sample in samples {
        if sample.dims() != &dims {
            return Err(Error::ShapeMismatch("samples have mixed dims".into()));
        }
        for (k, gram) in grams.iter_mut().enumerate() {
            let u = unfold(sample, k)?;
            let d_k = dims.dim(k);
            let m_k = dims.m(k);
            for i in 0..d_k {
                for j in i..d_k {
                    let mut acc = S::zero();
                    for c in 0..m_k {
                        acc += u.get(i, c) * u.get(j, c);
                    }
                    gram.set_sym(i, j, gram.get(i, j) + acc);
                }
            }
        }
    }
    for (k, gram) in grams.iter_mut().enumerate() {
        let scale = (S::from_f64((n * dims.m(k)) as f64)).recip();
        *gram = gram.scale(scale);
    }
    FactorGrams::new(dims, n, grams)
}

/// Population factor covariance `Σ₀^{(k)} = E[S^k]`: the partial trace of
/// `Σ₀` over the other modes, divided by `m_k`. Computed spectrally.
pub fn population_factor_cov<S: Scalar>(gt: &GroundTruth<S>, k: usize) -> Result<SymMatrix<S>> {
    let pt = partial_trace_inverse(&gt.eigen, k)?;
    Ok(pt.scale(S::from_f64(gt.dims().m(k) as f64).recip()))
}

/// Trace inner product `⟨Ŝ, Ω⟩ = Σ_k m_k ⟨S^k, Ψ_k⟩` evaluated from the
/// factor statistics.
pub fn ks_sample_inner<S: Scalar>(g: &FactorGrams<S>, k: &KroneckerSum<S>) -> Result<S> {
    if g.dims() != k.dims() {
        return Err(Error::ShapeMismatch(
            "grams and Kronecker sum have different dims".into(),
        ));
    }
    let mut acc = S::zero();
    for (mode, (gram, psi)) in g.grams().iter().zip(k.factors()).enumerate() {
        let mut inner = S::zero();
        let d = gram.n();
        for i in 0..d {
            for j in 0..d {
                inner += gram.get(i, j) * psi.get(i, j);
            }
        }
        acc += S::from_f64(g.dims().m(mode) as f64) * inner;
    }
    Ok(acc)
}

/// Per-mode penalty calibration `ρ_k = δ_k / ε_k` with
/// `δ_k = σ · sqrt(log p / (n m_k))`; `σ` is an operator-norm proxy for
/// the true covariance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySet<S> {
    pub rho: Vec<S>,
    pub delta: Vec<S>,
    pub epsilon: Vec<S>,
    pub sigma_scale: S,
}

impl<S: Scalar> PenaltySet<S> {
    /// All-zero penalties (unpenalized fit).
    pub fn zero(order: usize) -> Self {
        Self {
            rho: vec![S::zero(); order],
            delta: vec![S::zero(); order],
            epsilon: vec![S::from_f64(0.5); order],
            sigma_scale: S::one(),
        }
    }
}

/// Default slack `ε_k` in the penalty calibration.
pub const DEFAULT_EPSILON: f64 = 0.5;

pub fn penalties<S: Scalar>(
    dims: &Dims,
    n: usize,
    sigma_scale: S,
    epsilon: &[S],
) -> Result<PenaltySet<S>> {
    if !(sigma_scale > S::zero()) {
        return Err(Error::InvalidParameter(format!(
            "sigma_scale must be positive, got {sigma_scale}"
        )));
    }
    if epsilon.len() != dims.order() {
        return Err(Error::InvalidParameter(format!(
            "expected {} epsilon values, got {}",
            dims.order(),
            epsilon.len()
        )));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("sample count must be ≥ 1".into()));
    }
    for &e in epsilon {
        if !(e > S::zero() && e < S::one()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must lie in (0, 1), got {e}"
            )));
        }
    }
    let log_p = S::from_f64((dims.p() as f64).ln());
    let mut delta = Vec::with_capacity(dims.order());
    let mut rho = Vec::with_capacity(dims.order());
    for k in 0..dims.order() {
        let d = sigma_scale * (log_p / S::from_f64((n * dims.m(k)) as f64)).sqrt();
        delta.push(d);
        rho.push(d / epsilon[k]);
    }
    Ok(PenaltySet {
        rho,
        delta,
        epsilon: epsilon.to_vec(),
        sigma_scale,
    })
}

/// Effective-sample-size condition `min_k m_k ≥ log p` behind the penalty
/// calibration. Violations are reported, not rejected, since boundary
/// regimes are deliberately probed in experiments.
pub fn effective_sample_condition(dims: &Dims) -> bool {
    dims.m_min() as f64 >= (dims.p() as f64).ln()
}

/// Plug-in operator-norm proxy when no ground truth is available:
/// `max_k ‖S^k‖₂`.
pub fn plugin_sigma_scale<S: Scalar>(g: &FactorGrams<S>) -> Result<S> {
    let mut best = S::zero();
    for k in 0..g.dims().order() {
        let (_, hi) = crate::linalg::spectral_bounds(g.gram(k))?;
        best = best.max(hi);
    }
    Ok(best)
}
