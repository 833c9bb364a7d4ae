//! Error norms between estimated and true precision matrices, condition
//! numbers, rate-bound evaluators, and support-recovery scores.
//!
//! The bound evaluators report shapes with unit leading constants — the
//! underlying constants are unspecified — so downstream comparisons are
//! about growth rates and ratios, never absolute certification.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ksum::{ks_frobenius, ks_operator_norm, KroneckerSum};
use crate::model::GroundTruth;
use crate::scalar::Scalar;

/// Norms of `Δ = Ω̂ − Ω₀` in absolute and relative form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    /// `‖Δ‖_F`
    pub frob_abs: f64,
    /// `‖Δ‖₂`
    pub op_abs: f64,
    /// `‖Δ‖_F / ‖Ω₀‖₂`
    pub frob_rel_op: f64,
    /// `‖Δ‖₂ / ‖Ω₀‖₂`
    pub op_rel: f64,
    /// `‖Δ‖_F / ‖Ω₀‖_F`
    pub frob_rel: f64,
}

pub fn error_report<S: Scalar>(
    omega_hat: &KroneckerSum<S>,
    gt: &GroundTruth<S>,
) -> Result<ErrorReport> {
    if omega_hat.dims() != gt.dims() {
        return Err(Error::ShapeMismatch(
            "estimate and ground truth have different dims".into(),
        ));
    }
    let delta = omega_hat.sub(&gt.omega0)?;
    let frob_abs = ks_frobenius(&delta).into_f64();
    let op_abs = ks_operator_norm(&delta)?.into_f64();
    let omega0_op = ks_operator_norm(&gt.omega0)?.into_f64();
    let omega0_frob = ks_frobenius(&gt.omega0).into_f64();
    Ok(ErrorReport {
        frob_abs,
        op_abs,
        frob_rel_op: frob_abs / omega0_op,
        op_rel: op_abs / omega0_op,
        frob_rel: frob_abs / omega0_frob,
    })
}

/// `κ(Σ₀) = (max eigensum) / (min eigensum)` of `Ω₀`.
pub fn condition_number<S: Scalar>(gt: &GroundTruth<S>) -> Result<f64> {
    let (lo, hi) = gt.eigen.min_max_eigsum();
    if !(lo > S::zero()) {
        return Err(Error::NotPositiveDefinite {
            min_sum: lo.into_f64(),
        });
    }
    Ok((hi / lo).into_f64())
}

/// Right-hand sides of the convergence-rate bounds with unit constants.
///
/// The sharper bounds (`main_*`) carry the `s log p + L p` complexity; the
/// earlier bounds (`orig_*`) carry `(s + p) log p`. `cubic` is the
/// aspect-ratio form `sqrt(L d_max / m_min) · sqrt(Σ_k s_k log p / d_k + L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub main_frob: f64,
    pub main_op: f64,
    pub orig_frob: f64,
    pub orig_op: f64,
    pub cubic: f64,
    /// `d_max / m_min`
    pub aspect: f64,
    pub kappa: f64,
    /// Sample-size condition `n m_min² ≥ (L+1) κ⁴ (s log p + L p)` with
    /// unit constant.
    pub a3_satisfied: bool,
}

pub fn bound_report<S: Scalar>(gt: &GroundTruth<S>, n: usize) -> Result<BoundReport> {
    let dims = gt.dims();
    let l = dims.order() as f64;
    let p = dims.p() as f64;
    let log_p = p.ln();
    let m_min = dims.m_min() as f64;
    let d_max = dims.d_max() as f64;
    let s = gt.s as f64;
    let n = n as f64;
    let kappa = condition_number(gt)?;

    let main_complexity = s * log_p + l * p;
    let orig_complexity = (s + p) * log_p;
    let main_frob = kappa * (main_complexity / (n * m_min)).sqrt();
    let main_op = (l + 1.0).sqrt() * kappa * (main_complexity / (n * m_min * m_min)).sqrt();
    let orig_frob = (l + 1.0).sqrt() * kappa * (orig_complexity / (n * m_min)).sqrt();
    let orig_op = (l + 1.0) * kappa * (orig_complexity / (n * m_min * m_min)).sqrt();

    let rel_sparsity: f64 = gt
        .s_k
        .iter()
        .enumerate()
        .map(|(k, &sk)| sk as f64 * log_p / dims.dim(k) as f64)
        .sum();
    let cubic = (l * d_max / m_min).sqrt() * (rel_sparsity + l).sqrt();

    let a3_satisfied = n * m_min * m_min >= (l + 1.0) * kappa.powi(4) * main_complexity;

    Ok(BoundReport {
        main_frob,
        main_op,
        orig_frob,
        orig_op,
        cubic,
        aspect: d_max / m_min,
        kappa,
        a3_satisfied,
    })
}

/// Per-factor support recovery against the true edge sets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupportScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// An estimated edge is `|Ψ̂_k,ij| > threshold`, `i ≠ j`. Empty
/// denominators score 1.0 (nothing predicted and nothing to find is a
/// perfect outcome).
pub fn support_metrics<S: Scalar>(
    omega_hat: &KroneckerSum<S>,
    gt: &GroundTruth<S>,
    threshold: f64,
) -> Result<Vec<SupportScore>> {
    if threshold < 0.0 {
        return Err(Error::InvalidParameter(
            "support threshold must be nonnegative".into(),
        ));
    }
    if omega_hat.dims() != gt.dims() {
        return Err(Error::ShapeMismatch(
            "estimate and ground truth have different dims".into(),
        ));
    }
    let thr = S::from_f64(threshold);
    let mut out = Vec::with_capacity(gt.support.len());
    for (k, edges) in gt.support.iter().enumerate() {
        let psi = omega_hat.factor(k);
        let mut tp = 0usize;
        let mut fp = 0usize;
        let mut fn_ = 0usize;
        for i in 0..psi.n() {
            for j in (i + 1)..psi.n() {
                let predicted = psi.get(i, j).abs() > thr;
                let truth = edges.contains(&(i, j));
                match (predicted, truth) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fn_ += 1,
                    (false, false) => {}
                }
            }
        }
        let precision = if tp + fp == 0 {
            1.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let recall = if tp + fn_ == 0 {
            1.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        out.push(SupportScore {
            precision,
            recall,
            f1,
        });
    }
    Ok(out)
}

/// Default edge-detection threshold; solver zeros are exact after
/// soft-thresholding, so any tiny positive value works.
pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-8;
