//! Feature maps `φ: X → H` whose pairing reproduces a kernel, plus the
//! Gaussian-process realization of a series kernel.

use std::fmt;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::domain::{PointSet, Scalar};
use crate::error::{KernelError, Result};
use crate::gram::{format_cell, gram};
use crate::kernel::KernelExpr;
use crate::linalg::{to_nested, CMatrix};
use crate::series::SeriesKernel;

/// Draws per reduction chunk. Chunk partials are summed in index order so the
/// estimate does not depend on the thread count.
const GAUSSIAN_CHUNK: u64 = 512;

/// Tag of the target space of a feature map.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "space", rename_all = "kebab-case")]
pub enum SpaceTag {
    Rkhs,
    L2,
    DualRkhs,
    Tensor,
    DirectSum { summands: usize },
    Gaussian { samples: u64, seed: u64 },
    Distributional,
}

type CustomFn = Arc<dyn Fn(Scalar, usize) -> Vec<Scalar> + Send + Sync>;

#[derive(Clone)]
enum Source {
    Onb { series: SeriesKernel, target: Option<SeriesKernel> },
    Tensor(Box<FeatureMap>, Box<FeatureMap>),
    DirectSum(Vec<FeatureMap>),
    Custom { f: CustomFn, bound: Option<(f64, f64)> },
}

/// Lazy coordinate generator: `coeffs(x, n)` yields the first `n`
/// coordinates of `φ(x)` in an orthonormal basis of the target space.
#[derive(Clone)]
pub struct FeatureMap {
    source: Source,
    tag: SpaceTag,
}

impl fmt::Debug for FeatureMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FeatureMap").field("tag", &self.tag).finish_non_exhaustive()
    }
}

impl FeatureMap {
    /// Wraps a closure producing coordinates. `bound` is `(magnitude, tail)`,
    /// an optional uniform bound on `|⟨φ(x), φ(y)⟩|` and on the truncation
    /// error of the pairing.
    pub fn custom<F>(f: F, tag: SpaceTag, bound: Option<(f64, f64)>) -> Self
    where
        F: Fn(Scalar, usize) -> Vec<Scalar> + Send + Sync + 'static,
    {
        FeatureMap { source: Source::Custom { f: Arc::new(f), bound }, tag }
    }

    pub fn tag(&self) -> &SpaceTag {
        &self.tag
    }

    /// First `n` coordinates of `φ(x)`. Tensor maps return `n²` and direct
    /// sums `n` per summand.
    pub fn coeffs(&self, x: Scalar, n: usize) -> Vec<Scalar> {
        match &self.source {
            Source::Onb { series, .. } => {
                let a = series.coefficients().coeffs(n);
                let mut p = Scalar::new(1.0, 0.0);
                a.iter()
                    .map(|ak| {
                        let v = p * ak.sqrt();
                        p *= x;
                        v
                    })
                    .collect()
            }
            Source::Tensor(f, g) => {
                let u = f.coeffs(x, n);
                let v = g.coeffs(x, n);
                u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect()
            }
            Source::DirectSum(fs) => fs.iter().flat_map(|f| f.coeffs(x, n)).collect(),
            Source::Custom { f, .. } => f(x, n),
        }
    }

    /// Truncated `⟨φ(x), φ(y)⟩`, linear in `x`.
    pub fn pairing(&self, x: Scalar, y: Scalar, n: usize) -> Scalar {
        pair(&self.coeffs(x, n), &self.coeffs(y, n))
    }

    /// Uniform bound on `|⟨φ(x), φ(y)⟩|` over `|x|, |y| <= r`.
    pub fn magnitude_bound(&self, r: f64) -> Option<f64> {
        match &self.source {
            Source::Onb { series, .. } => series.coefficients().tail_bound(r * r, 0).ok(),
            Source::Tensor(f, g) => Some(f.magnitude_bound(r)? * g.magnitude_bound(r)?),
            Source::DirectSum(fs) => fs.iter().map(|f| f.magnitude_bound(r)).sum(),
            Source::Custom { bound, .. } => bound.map(|b| b.0),
        }
    }

    /// Bound on the pairing truncation error at `n` over `|x|, |y| <= r`.
    pub fn tail_bound(&self, r: f64, n: usize) -> Option<f64> {
        match &self.source {
            Source::Onb { series, .. } => series.truncation_bound(r, n).ok(),
            Source::Tensor(f, g) => {
                let (ef, eg) = (f.tail_bound(r, n)?, g.tail_bound(r, n)?);
                let (mf, mg) = (f.magnitude_bound(r)?, g.magnitude_bound(r)?);
                Some(ef * mg + mf * eg + ef * eg)
            }
            Source::DirectSum(fs) => fs.iter().map(|f| f.tail_bound(r, n)).sum(),
            Source::Custom { bound, .. } => bound.map(|b| b.1),
        }
    }

    /// `⟨φ(x_i), φ(x_j)⟩` on `pts × pts`.
    pub fn gram(&self, pts: &PointSet, n: usize) -> Result<CMatrix> {
        let coords: Vec<Vec<Scalar>> = pts.values().map(|x| self.coeffs(x, n)).collect();
        for c in &coords {
            if c.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(KernelError::NonFinite("feature coordinates".into()));
            }
        }
        let m = coords.len();
        Ok(CMatrix::from_fn(m, m, |i, j| pair(&coords[i], &coords[j])))
    }

    /// For a dual-pair map, `φ(x)` realized as a function of `z` in the
    /// target space: `Σ f_n(x) g_n(z)` over the two orthonormal bases.
    pub fn realize(&self, x: Scalar, z: Scalar, n: usize) -> Option<Scalar> {
        match &self.source {
            Source::Onb { series, target: Some(t) } => {
                let a = series.coefficients().coeffs(n);
                let b = t.coefficients().coeffs(n);
                let (mut px, mut pz) = (Scalar::new(1.0, 0.0), Scalar::new(1.0, 0.0));
                let mut acc = Scalar::new(0.0, 0.0);
                for (ak, bk) in a.iter().zip(&b) {
                    acc += px * ak.sqrt() * pz * bk.sqrt();
                    px *= x;
                    pz *= z;
                }
                Some(acc)
            }
            _ => None,
        }
    }
}

fn pair(u: &[Scalar], v: &[Scalar]) -> Scalar {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum()
}

/// `x ↦ (√a_n x^n)_n` in `ℓ²`, which pairs to `K`.
pub fn onb_feature(k: &SeriesKernel) -> FeatureMap {
    FeatureMap {
        source: Source::Onb { series: k.clone(), target: None },
        tag: SpaceTag::L2,
    }
}

/// The pair `(φ, ψ)` of Grothendieck type: `φ(x) = Σ f_n(x) g_n ∈ H_L` and
/// `ψ(x) = Σ f_n(x) g_n^* ∈ H_L^*`, both pairing to `K`.
pub fn dual_pair(k: &SeriesKernel, l: &SeriesKernel) -> Result<(FeatureMap, FeatureMap)> {
    let b = l.coefficients();
    if let Some(n) = (0..256).find(|&n| k.coeff(n) > 0.0 && b.coeff(n) == 0.0) {
        return Err(KernelError::SupportMismatch(n));
    }
    let phi = FeatureMap {
        source: Source::Onb { series: k.clone(), target: Some(l.clone()) },
        tag: SpaceTag::Rkhs,
    };
    let psi = FeatureMap {
        source: Source::Onb { series: k.clone(), target: Some(l.clone()) },
        tag: SpaceTag::DualRkhs,
    };
    Ok((phi, psi))
}

/// `x ↦ φ₁(x) ⊗ φ₂(x)`, pairing to the pointwise product.
pub fn tensor_feature(f1: &FeatureMap, f2: &FeatureMap) -> FeatureMap {
    FeatureMap {
        source: Source::Tensor(Box::new(f1.clone()), Box::new(f2.clone())),
        tag: SpaceTag::Tensor,
    }
}

/// `x ↦ (φ_i(x))_i`, pairing to the sum of the kernels.
pub fn direct_sum_feature(fs: &[FeatureMap]) -> Result<FeatureMap> {
    if fs.is_empty() {
        return Err(KernelError::InvalidArgument("direct sum of no feature maps".into()));
    }
    Ok(FeatureMap {
        source: Source::DirectSum(fs.to_vec()),
        tag: SpaceTag::DirectSum { summands: fs.len() },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalGram {
    pub entries: CMatrix,
    pub samples: u64,
    pub seed: u64,
    pub truncation: usize,
}

impl EmpiricalGram {
    pub fn to_json(&self, pts: &PointSet) -> Value {
        let cells: Vec<Vec<String>> = to_nested(&self.entries)
            .into_iter()
            .map(|row| row.into_iter().map(format_cell).collect())
            .collect();
        json!({
            "points": pts.values().map(format_cell).collect::<Vec<_>>(),
            "domain": pts.domain(),
            "entries": cells,
            "samples": self.samples,
            "seed": self.seed,
            "truncation": self.truncation,
        })
    }
}

/// Monte-Carlo estimate of `E[W_x conj(W_y)]` for the Gaussian process
/// `W_x = Σ_{n < N} √a_n x^n Z_n`, `Z_n` i.i.d. standard normal.
///
/// Draw `m` uses its own ChaCha stream `m` under `seed`, so results are
/// reproducible and independent of parallel scheduling.
pub fn gaussian_feature(
    k: &SeriesKernel,
    pts: &PointSet,
    samples: u64,
    seed: u64,
    truncation: usize,
) -> Result<EmpiricalGram> {
    if samples == 0 {
        return Err(KernelError::InvalidArgument("sample count must be >= 1".into()));
    }
    for x in pts.values() {
        k.admits(x)?;
    }
    let fm = onb_feature(k);
    let phi: Vec<Vec<Scalar>> = pts.values().map(|x| fm.coeffs(x, truncation)).collect();
    let m = phi.len();
    let chunks = samples.div_ceil(GAUSSIAN_CHUNK);
    let partials: Vec<CMatrix> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = CMatrix::zeros(m, m);
            let mut z = vec![0.0f64; truncation];
            let mut w = vec![Scalar::new(0.0, 0.0); m];
            let end = ((c + 1) * GAUSSIAN_CHUNK).min(samples);
            for draw in c * GAUSSIAN_CHUNK..end {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(draw);
                for zn in z.iter_mut() {
                    *zn = StandardNormal.sample(&mut rng);
                }
                for (wi, row) in w.iter_mut().zip(&phi) {
                    *wi = row.iter().zip(&z).map(|(p, zn)| p * *zn).sum();
                }
                for j in 0..m {
                    let wj = w[j].conj();
                    for i in 0..m {
                        acc[(i, j)] += w[i] * wj;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = CMatrix::zeros(m, m);
    for p in &partials {
        total += p;
    }
    Ok(EmpiricalGram {
        entries: total / Scalar::new(samples as f64, 0.0),
        samples,
        seed,
        truncation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeatureCheck {
    pub passed: bool,
    pub max_deviation: f64,
    /// `tol` plus the truncation bounds of the feature pairing and of `K`.
    pub allowance: f64,
}

/// Compares `⟨φ(x_i), φ(x_j)⟩` with `K(x_i, x_j)` entrywise.
pub fn verify_feature(
    fm: &FeatureMap,
    k: &KernelExpr,
    pts: &PointSet,
    tol: f64,
    truncation: usize,
) -> Result<FeatureCheck> {
    let gf = fm.gram(pts, truncation)?;
    let gk = gram(k, pts, truncation)?.into_entries();
    let r = pts.max_modulus();
    let allowance = tol
        + fm.tail_bound(r, truncation).unwrap_or(0.0)
        + k.tail_bound(r, truncation).unwrap_or(0.0);
    let max_deviation = (&gf - &gk).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(FeatureCheck {
        passed: max_deviation <= allowance,
        max_deviation,
        allowance,
    })
}
