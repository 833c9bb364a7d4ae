//! Ground-truth model generation and sub-gaussian sampling.
//!
//! A ground truth is a positive definite Kronecker sum `Ω₀` built from
//! per-factor sparsity graphs, lifted along the diagonal so the minimum
//! eigenvalue sum hits a prescribed target exactly. Samples follow
//! `vec(X) = Σ₀^{1/2} Z` with `Σ₀ = Ω₀⁻¹` and `Z` i.i.d. unit-variance
//! gaussian or Rademacher entries; the square root is applied spectrally
//! at factor scale.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ksum::{apply_inverse_sqrt, ks_eigen, KroneckerSum, KsEigen};
use crate::linalg::SymMatrix;
use crate::rng::{derive_stream, SplitMix64};
use crate::scalar::Scalar;
use crate::tensor::{DenseTensor, Dims};

// stream tags so the factor, sampling, and support draws never collide
const TAG_FACTOR: u64 = 1;
const TAG_SAMPLE: u64 = 2;

/// Sparsity pattern of one factor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum GraphKind {
    /// Path graph: edges (i, i+1).
    Chain,
    /// Uniformly random simple graph with exactly `edges` edges.
    ErdosRenyi { edges: usize },
    /// No off-diagonal structure.
    Diagonal,
}

/// Innovation distribution for the isotropic noise vector `Z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Innovation {
    Gaussian,
    Rademacher,
}

impl Innovation {
    pub fn name(self) -> &'static str {
        match self {
            Innovation::Gaussian => "gaussian",
            Innovation::Rademacher => "rademacher",
        }
    }
}

/// Recipe for a ground-truth precision matrix and its sampler.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub dims: Vec<usize>,
    /// One graph per factor.
    pub graphs: Vec<GraphKind>,
    /// Off-diagonal edge weights are drawn uniformly from this range.
    pub edge_weight_range: [f64; 2],
    /// The minimum eigenvalue sum of the generated `Ω₀`, hit exactly by a
    /// diagonal lift on factor 1.
    pub target_min_eigsum: f64,
    pub innovation: Innovation,
    pub seed: u64,
}

impl ModelSpec {
    /// Uniform spec: the same graph kind on every factor.
    pub fn uniform(
        dims: Vec<usize>,
        graph: GraphKind,
        target_min_eigsum: f64,
        innovation: Innovation,
        seed: u64,
    ) -> Self {
        let graphs = vec![graph; dims.len()];
        Self {
            dims,
            graphs,
            edge_weight_range: [-0.4, 0.4],
            target_min_eigsum,
            innovation,
            seed,
        }
    }

    pub fn validate(&self) -> Result<Dims> {
        let dims = Dims::new(self.dims.clone())?;
        if self.graphs.len() != dims.order() {
            return Err(Error::InvalidParameter(format!(
                "expected {} graphs, got {}",
                dims.order(),
                self.graphs.len()
            )));
        }
        if !(self.target_min_eigsum > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "target_min_eigsum must be positive, got {}",
                self.target_min_eigsum
            )));
        }
        if !(self.edge_weight_range[0] <= self.edge_weight_range[1]) {
            return Err(Error::InvalidParameter(
                "edge_weight_range must be ordered".into(),
            ));
        }
        for (k, g) in self.graphs.iter().enumerate() {
            if let GraphKind::ErdosRenyi { edges } = g {
                let d_k = dims.dim(k);
                let max_edges = d_k * d_k.saturating_sub(1) / 2;
                if *edges > max_edges {
                    return Err(Error::InvalidParameter(format!(
                        "factor {k}: {edges} edges exceed the {max_edges} possible on {d_k} nodes"
                    )));
                }
            }
        }
        Ok(dims)
    }
}

/// Generated model: the precision matrix, its spectral handle, and the
/// true supports.
#[derive(Debug, Clone)]
pub struct GroundTruth<S> {
    pub omega0: KroneckerSum<S>,
    pub eigen: KsEigen<S>,
    /// Per-factor edge sets as unordered pairs (i < j).
    pub support: Vec<BTreeSet<(usize, usize)>>,
    /// Per-factor off-diagonal support sizes, counting ordered pairs.
    pub s_k: Vec<usize>,
    /// Total support `s = Σ_k m_k s_k`.
    pub s: usize,
}

impl<S: Scalar> GroundTruth<S> {
    pub fn dims(&self) -> &Dims {
        self.omega0.dims()
    }

    /// `‖Σ₀‖₂ = 1 / (min eigensum of Ω₀)`.
    pub fn sigma0_op_norm(&self) -> S {
        self.eigen.min_max_eigsum().0.recip()
    }
}

fn edges_for(kind: &GraphKind, d: usize, rng: &mut SplitMix64) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    match kind {
        GraphKind::Diagonal => {}
        GraphKind::Chain => {
            for i in 0..d.saturating_sub(1) {
                edges.insert((i, i + 1));
            }
        }
        GraphKind::ErdosRenyi { edges: want } => {
            while edges.len() < *want {
                let i = rng.next_index(d);
                let j = rng.next_index(d);
                if i != j {
                    edges.insert((i.min(j), i.max(j)));
                }
            }
        }
    }
    edges
}

/// Builds a ground-truth model: per-factor graphs with uniform edge
/// weights, symmetric, then `c · I` added to factor 1 so the minimum
/// eigenvalue sum equals `target_min_eigsum` exactly. Deterministic given
/// the spec's seed.
pub fn gen_model<S: Scalar>(spec: &ModelSpec) -> Result<GroundTruth<S>> {
    let dims = spec.validate()?;
    let [lo, hi] = spec.edge_weight_range;
    let mut factors = Vec::with_capacity(dims.order());
    let mut support = Vec::with_capacity(dims.order());
    for (k, kind) in spec.graphs.iter().enumerate() {
        let d_k = dims.dim(k);
        let mut rng = SplitMix64::new(derive_stream(spec.seed, &[TAG_FACTOR, k as u64]));
        let edges = edges_for(kind, d_k, &mut rng);
        let mut psi = SymMatrix::zeros(d_k);
        // weights are assigned in sorted edge order so the support draw and
        // the weight draw stay independent of set-iteration details
        for &(i, j) in &edges {
            let w = rng.next_in_range(lo, hi);
            psi.set_sym(i, j, S::from_f64(w));
        }
        factors.push(psi);
        support.push(edges);
    }

    let mut omega0 = KroneckerSum::new(dims.clone(), factors)?;
    let eigen = ks_eigen(&omega0)?;
    let (min_sum, _) = eigen.min_max_eigsum();
    let lift = S::from_f64(spec.target_min_eigsum) - min_sum;
    omega0.factors_mut()[0].shift_diag(lift);
    let eigen = ks_eigen(&omega0)?;

    let s_k: Vec<usize> = support.iter().map(|e| 2 * e.len()).collect();
    let s = s_k
        .iter()
        .enumerate()
        .map(|(k, &sk)| dims.m(k) * sk)
        .sum();

    Ok(GroundTruth {
        omega0,
        eigen,
        support,
        s_k,
        s,
    })
}

fn innovation_tensor<S: Scalar>(dims: &Dims, innovation: Innovation, seed: u64) -> DenseTensor<S> {
    let mut rng = SplitMix64::new(seed);
    let data = (0..dims.p())
        .map(|_| {
            S::from_f64(match innovation {
                Innovation::Gaussian => rng.next_gaussian(),
                Innovation::Rademacher => rng.next_rademacher(),
            })
        })
        .collect();
    DenseTensor::new(dims.clone(), data).expect("innovation shape")
}

/// Draws `n` i.i.d. samples `Σ₀^{1/2} Z`. Sample `i` uses the derived
/// stream `derive_stream(seed, [TAG_SAMPLE, i])`, so trials are
/// reproducible and order-independent.
pub fn sample<S: Scalar>(
    gt: &GroundTruth<S>,
    innovation: Innovation,
    n: usize,
    seed: u64,
) -> Result<Vec<DenseTensor<S>>> {
    (0..n)
        .map(|i| {
            let z = innovation_tensor(
                gt.dims(),
                innovation,
                derive_stream(seed, &[TAG_SAMPLE, i as u64]),
            );
            apply_inverse_sqrt(&gt.eigen, &z)
        })
        .collect()
}

/// Stacks `n` samples into one order-(L+1) tensor with leading mode `n`;
/// the mode-(k+1) Gram of the stack equals the n-sample mode-k Gram.
pub fn stack_samples<S: Scalar>(samples: &[DenseTensor<S>]) -> Result<DenseTensor<S>> {
    let first = samples
        .first()
        .ok_or_else(|| Error::InvalidParameter("cannot stack zero samples".into()))?;
    let mut d = vec![samples.len()];
    d.extend_from_slice(first.dims().d());
    let dims = Dims::new(d)?;
    let mut data = Vec::with_capacity(dims.p());
    for s in samples {
        if s.dims() != first.dims() {
            return Err(Error::ShapeMismatch("mixed dims in sample stack".into()));
        }
        data.extend_from_slice(s.data());
    }
    DenseTensor::new(dims, data)
}
