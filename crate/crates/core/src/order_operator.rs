//! The order operator `C` with `K = L C` when `K <= L`, in sampled and
//! diagonal form, and the multiplier contraction test.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::domain::{PointSet, Scalar};
use crate::error::{KernelError, Result};
use crate::gram::{gram, psd_check_matrix, PsdCertificate};
use crate::kernel::KernelExpr;
use crate::linalg::{hermitian_eigen, max_abs, CMatrix, RANK_FLOOR};
use crate::series::{to_f64, SeriesKernel};

#[derive(Debug, Clone, PartialEq)]
pub struct SampledOrderOperator {
    /// `G_L⁺ G_K`
    pub matrix: CMatrix,
    /// Spectrum of `G_L^{-1/2} G_K G_L^{-1/2}` on the retained range, ascending.
    pub eigenvalues: Vec<f64>,
    pub effective_rank: usize,
}

/// Sampled order operator of `K` relative to `L`. Eigenvalues of `G_L` below
/// `RANK_FLOOR · λ_max` are discarded.
pub fn order_operator_sampled(
    k: &KernelExpr,
    l: &KernelExpr,
    pts: &PointSet,
    truncation: usize,
) -> Result<SampledOrderOperator> {
    let gk = gram(k, pts, truncation)?.into_entries();
    let gl = gram(l, pts, truncation)?.into_entries();
    let eig = hermitian_eigen(&gl);
    let top = eig.values.last().copied().unwrap_or(0.0).max(0.0);
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > RANK_FLOOR * top)
        .collect();
    let n = pts.len();
    let r = keep.len();
    // S = U_r Λ_r^{-1/2}
    let s = CMatrix::from_fn(n, r, |i, c| {
        eig.vectors[(i, keep[c])] / eig.values[keep[c]].sqrt()
    });
    let pencil = s.adjoint() * &gk * &s;
    let eigenvalues = hermitian_eigen(&pencil).values;
    let w = CMatrix::from_fn(n, r, |i, c| {
        eig.vectors[(i, keep[c])] / eig.values[keep[c]]
    });
    let u = CMatrix::from_fn(n, r, |i, c| eig.vectors[(i, keep[c])]);
    let matrix = w * u.adjoint() * gk;
    Ok(SampledOrderOperator {
        matrix,
        eigenvalues,
        effective_rank: r,
    })
}

/// `max |G_L C - G_K|` for the sampled operator.
pub fn isometry_check(
    k: &KernelExpr,
    l: &KernelExpr,
    pts: &PointSet,
    truncation: usize,
) -> Result<f64> {
    let op = order_operator_sampled(k, l, pts, truncation)?;
    let gk = gram(k, pts, truncation)?.into_entries();
    let gl = gram(l, pts, truncation)?.into_entries();
    Ok(max_abs(&(gl * op.matrix - gk)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalSpectrum {
    /// `λ_n = a_n(K) / a_n(L)`, zero where both vanish.
    #[serde(skip)]
    pub exact: Vec<BigRational>,
    pub lambda: Vec<f64>,
    /// `1 / λ_n`, infinite where `λ_n = 0`.
    pub inverse: Vec<f64>,
    /// `sup λ_n <= 1` over the computed range.
    pub contraction: bool,
}

/// Order operator of two diagonal series kernels in the shared monomial
/// basis, for indices `n < count`.
pub fn order_operator_diagonal(k: &SeriesKernel, l: &SeriesKernel, count: usize) -> Result<DiagonalSpectrum> {
    let a = k.coefficients().coeffs_exact(count);
    let b = l.coefficients().coeffs_exact(count);
    let mut exact = Vec::with_capacity(count);
    for (n, (an, bn)) in a.iter().zip(&b).enumerate() {
        if bn.is_zero() {
            if !an.is_zero() {
                return Err(KernelError::SupportMismatch(n));
            }
            exact.push(BigRational::zero());
        } else {
            exact.push(an / bn);
        }
    }
    let lambda: Vec<f64> = exact.iter().map(to_f64).collect();
    let inverse = lambda
        .iter()
        .map(|&x| if x == 0.0 { f64::INFINITY } else { 1.0 / x })
        .collect();
    let one = BigRational::one();
    Ok(DiagonalSpectrum {
        contraction: exact.iter().all(|x| *x <= one),
        exact,
        lambda,
        inverse,
    })
}

/// CSV rows `n,lambda_n`.
pub fn spectrum_csv(lambda: &[f64]) -> String {
    let mut out = String::from("n,lambda_n\n");
    for (n, x) in lambda.iter().enumerate() {
        out.push_str(&format!("{n},{x:e}\n"));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiplierVerdict {
    /// `(1 - conj(φ(w)) φ(z)) K(z, w)` passed the PSD check.
    pub contractive: bool,
    pub witness: PsdCertificate,
    /// `max |φ(x_i)|`, which is at most one for a contractive multiplier.
    pub max_modulus: f64,
    /// Index of the most negative diagonal entry `(1 - |φ(x)|²) K(x, x)`,
    /// when one is negative.
    pub diagonal_witness: Option<usize>,
}

/// Tests whether `φ` is a contractive multiplier of `H_K` on `pts`.
pub fn multiplier_test<F>(
    phi: F,
    k: &KernelExpr,
    pts: &PointSet,
    tol: f64,
    truncation: usize,
) -> Result<MultiplierVerdict>
where
    F: Fn(Scalar) -> Scalar,
{
    let vals: Vec<Scalar> = pts.values().map(&phi).collect();
    for v in &vals {
        crate::domain::check_finite(*v)?;
    }
    let g = gram(k, pts, truncation)?.into_entries();
    let n = pts.len();
    let m = CMatrix::from_fn(n, n, |i, j| (Scalar::new(1.0, 0.0) - vals[i] * vals[j].conj()) * g[(i, j)]);
    let witness = psd_check_matrix(&m, tol)?;
    let diagonal_witness = (0..n)
        .filter(|&i| m[(i, i)].re < 0.0)
        .min_by(|&i, &j| m[(i, i)].re.total_cmp(&m[(j, j)].re));
    Ok(MultiplierVerdict {
        diagonal_witness,
        contractive: witness.is_psd(),
        max_modulus: vals.iter().map(|v| v.norm()).fold(0.0, f64::max),
        witness,
    })
}
