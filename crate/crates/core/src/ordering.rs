//! Loewner order certification, order chains, monotone limits and the
//! super/sub feature-space classification.
//!
//! A failed check is a refutation: the witness vector gives a negative
//! quadratic form. A passing check only covers the sampled points.

use serde::{Deserialize, Serialize};

use crate::algebra::power;
use crate::domain::PointSet;
use crate::error::{KernelError, Result};
use crate::features::FeatureMap;
use crate::gram::{gram, psd_check_matrix, PsdCertificate};
use crate::kernel::KernelExpr;
use crate::linalg::{quadratic_form, CMatrix, CVector};
use crate::series::SeriesKernel;

/// Diagonal growth factor across the probed terms that flags divergence.
pub const DIVERGENCE_GROWTH: f64 = 1e6;

/// Trailing increments inspected by the divergence extrapolation.
const TREND_WINDOW: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strength {
    /// PSD on the sample only.
    Evidence,
    /// A negative quadratic form was exhibited.
    Refutation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderVerdict {
    pub holds: bool,
    pub strength: Strength,
    /// Certificate for the Gram matrix of `L - K`.
    pub witness: PsdCertificate,
    /// `c* (G_L - G_K) c` re-evaluated directly for the witness vector.
    pub witness_form: f64,
    pub sample: PointSet,
    pub truncation: usize,
}

/// Truncation meeting the default tail tolerance for every kernel on `pts`.
pub fn sample_truncation(kernels: &[&KernelExpr], pts: &PointSet) -> Result<usize> {
    let r = pts.max_modulus();
    kernels
        .iter()
        .try_fold(1usize, |n, k| Ok(n.max(k.default_truncation(r)?)))
}

/// Certifies `K <= L` on `pts`, with the truncation picked from the sample.
pub fn loewner_leq(k: &KernelExpr, l: &KernelExpr, pts: &PointSet, tol: f64) -> Result<OrderVerdict> {
    let n = sample_truncation(&[k, l], pts)?;
    loewner_leq_with(k, l, pts, tol, n)
}

pub fn loewner_leq_with(
    k: &KernelExpr,
    l: &KernelExpr,
    pts: &PointSet,
    tol: f64,
    truncation: usize,
) -> Result<OrderVerdict> {
    let gk = gram(k, pts, truncation)?;
    let gl = gram(l, pts, truncation)?;
    let diff = gl.entries() - gk.entries();
    Ok(verdict_from_difference(&diff, pts, tol, truncation)?)
}

fn verdict_from_difference(
    diff: &CMatrix,
    pts: &PointSet,
    tol: f64,
    truncation: usize,
) -> Result<OrderVerdict> {
    let cert = psd_check_matrix(diff, tol)?;
    let c = CVector::from_column_slice(&cert.witness);
    let witness_form = quadratic_form(diff, &c);
    let holds = cert.is_psd();
    Ok(OrderVerdict {
        holds,
        strength: if holds { Strength::Evidence } else { Strength::Refutation },
        witness: cert,
        witness_form,
        sample: pts.clone(),
        truncation,
    })
}

/// Exact coefficient comparison `a_k(K) <= a_k(L)` for `k < upto`; for
/// diagonal series kernels this decides the order without sampling.
pub fn coefficient_dominance(k: &SeriesKernel, l: &SeriesKernel, upto: usize) -> bool {
    let a = k.coefficients().coeffs_exact(upto);
    let b = l.coefficients().coeffs_exact(upto);
    a.iter().zip(&b).all(|(x, y)| x <= y)
}

/// Verdicts for `1 <= K`, `K <= K²`, …, `K^{n_max-1} <= K^{n_max}`.
pub fn verify_chain(k: &KernelExpr, pts: &PointSet, n_max: u32, tol: f64) -> Result<Vec<OrderVerdict>> {
    if n_max == 0 {
        return Err(KernelError::InvalidArgument("n_max must be >= 1".into()));
    }
    let mut powers = Vec::with_capacity(n_max as usize);
    for n in 1..=n_max {
        powers.push(power(k, n)?);
    }
    let refs: Vec<&KernelExpr> = powers.iter().collect();
    let truncation = sample_truncation(&refs, pts)?;
    let one = KernelExpr::constant(1.0);
    let premise = loewner_leq_with(&one, k, pts, tol, truncation)?;
    if !premise.holds {
        return Err(KernelError::ChainPremise {
            min_eigenvalue: premise.witness.min_eigenvalue,
        });
    }
    let mut out = vec![premise];
    let mut grams: Vec<CMatrix> = Vec::with_capacity(powers.len());
    for p in &powers {
        grams.push(gram(p, pts, truncation)?.into_entries());
    }
    for w in grams.windows(2) {
        out.push(verdict_from_difference(&(&w[1] - &w[0]), pts, tol, truncation)?);
    }
    Ok(out)
}

/// CSV rows `n,min_eig,verdict` for a chain report.
pub fn chain_csv(verdicts: &[OrderVerdict]) -> String {
    let mut out = String::from("n,min_eig,verdict\n");
    for (n, v) in verdicts.iter().enumerate() {
        let tag = if v.holds { "holds" } else { "fails" };
        out.push_str(&format!("{n},{:e},{tag}\n", v.witness.min_eigenvalue));
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneLimit {
    /// `K_{n_terms}` on `pts × pts`, the limit estimate.
    pub limit: CMatrix,
    /// `sup_n K_n(x_i, x_i)`.
    pub sup_diag: Vec<f64>,
    /// `max_ij |K_n - K_{n-1}|` for `n = 2..=n_terms`.
    pub cauchy_increments: Vec<f64>,
    /// Smallest eigenvalue of each consecutive difference Gram.
    pub step_min_eigenvalues: Vec<f64>,
    /// Indices `n` where `K_n <= K_{n+1}` failed on the sample.
    pub monotone_violations: Vec<usize>,
    pub terms: usize,
}

/// Pointwise limit of a Loewner-increasing family `K_1 <= K_2 <= …` on
/// `pts`, guarded by the diagonal sup-condition.
///
/// Divergence is flagged when some diagonal grows by more than
/// [`DIVERGENCE_GROWTH`], or when its trailing increments are positive with
/// nondecreasing ratios of at least one, which extrapolates to an unbounded
/// diagonal.
pub fn monotone_limit<F>(family: F, pts: &PointSet, n_terms: usize, tol: f64) -> Result<MonotoneLimit>
where
    F: Fn(usize) -> KernelExpr,
{
    if n_terms == 0 {
        return Err(KernelError::InvalidArgument("n_terms must be >= 1".into()));
    }
    let r = pts.max_modulus();
    let mut grams = Vec::with_capacity(n_terms);
    let mut diag: Vec<Vec<f64>> = vec![Vec::with_capacity(n_terms); pts.len()];
    for n in 1..=n_terms {
        let k = family(n);
        let g = gram(&k, pts, k.default_truncation(r)?)?.into_entries();
        for (i, d) in diag.iter_mut().enumerate() {
            d.push(g[(i, i)].re);
        }
        grams.push(g);
        for (i, d) in diag.iter().enumerate() {
            if let Some(growth) = diverging(d) {
                return Err(KernelError::SupConditionViolated {
                    growth,
                    terms: n,
                    point: i,
                });
            }
        }
    }
    let mut cauchy = Vec::new();
    let mut step_min = Vec::new();
    let mut violations = Vec::new();
    for (idx, w) in grams.windows(2).enumerate() {
        let d = &w[1] - &w[0];
        cauchy.push(d.iter().map(|z| z.norm()).fold(0.0, f64::max));
        let cert = psd_check_matrix(&d, tol)?;
        step_min.push(cert.min_eigenvalue);
        if !cert.is_psd() {
            violations.push(idx + 1);
        }
    }
    Ok(MonotoneLimit {
        limit: grams.pop().expect("n_terms >= 1"),
        sup_diag: diag
            .iter()
            .map(|d| d.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect(),
        cauchy_increments: cauchy,
        step_min_eigenvalues: step_min,
        monotone_violations: violations,
        terms: n_terms,
    })
}

/// Growth factor when the diagonal sequence `d` looks unbounded.
fn diverging(d: &[f64]) -> Option<f64> {
    let first = *d.first()?;
    let last = *d.last()?;
    if !last.is_finite() {
        return Some(f64::INFINITY);
    }
    let growth = if first > 0.0 { last / first } else { f64::INFINITY };
    if first > 0.0 && growth > DIVERGENCE_GROWTH {
        return Some(growth);
    }
    if d.len() < TREND_WINDOW + 2 {
        return None;
    }
    let inc: Vec<f64> = d.windows(2).map(|w| w[1] - w[0]).collect();
    let tail = &inc[inc.len() - TREND_WINDOW - 1..];
    if tail.iter().any(|&x| x <= f64::EPSILON * last.abs()) {
        return None;
    }
    let ratios: Vec<f64> = tail.windows(2).map(|w| w[1] / w[0]).collect();
    let accelerating = ratios.iter().all(|&q| q >= 1.0)
        && ratios.windows(2).all(|w| w[1] >= w[0] * (1.0 - 1e-9));
    accelerating.then_some(growth)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dominance {
    /// `K <= ⟨ψ(x), ψ(y)⟩`
    Super,
    /// `⟨ψ(x), ψ(y)⟩ <= K`
    Sub,
    Exact,
    Incomparable,
}

/// Classifies the Gram of the feature pairing against the Gram of `K`.
pub fn feature_dominance(
    fm: &FeatureMap,
    k: &KernelExpr,
    pts: &PointSet,
    tol: f64,
    truncation: usize,
) -> Result<Dominance> {
    let gf = fm.gram(pts, truncation)?;
    let gk = gram(k, pts, truncation)?.into_entries();
    let above = psd_check_matrix(&(&gf - &gk), tol)?.is_psd();
    let below = psd_check_matrix(&(&gk - &gf), tol)?.is_psd();
    Ok(match (above, below) {
        (true, true) => Dominance::Exact,
        (true, false) => Dominance::Super,
        (false, true) => Dominance::Sub,
        (false, false) => Dominance::Incomparable,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Domain, Scalar};
    use crate::sampling::disk_spiral;
    use crate::series::{Coefficients, VariableKind};

    #[test]
    fn szego_below_bergman() {
        let pts = disk_spiral(40, 0.9, 0.0, Domain::UNIT_DISK).unwrap();
        let v = loewner_leq(&KernelExpr::szego(), &KernelExpr::bergman(), &pts, 1e-9).unwrap();
        assert!(v.holds);
        assert_eq!(v.strength, Strength::Evidence);
    }

    #[test]
    fn bergman_not_below_szego() {
        let pts = PointSet::from_reals([0.0, 0.3, 0.7], Domain::UNIT_DISK).unwrap();
        let v = loewner_leq(&KernelExpr::bergman(), &KernelExpr::szego(), &pts, 1e-9).unwrap();
        assert!(!v.holds);
        assert_eq!(v.strength, Strength::Refutation);
        assert!(v.witness_form < -1e-9);
        // diagonal at 0.7 alone is already negative
        let d = 1.0 / (1.0 - 0.49) - 1.0 / (1.0 - 0.49f64).powi(2);
        assert!(d < 0.0);
        assert!(v.witness.min_eigenvalue <= d + 1e-12);
    }

    #[test]
    fn self_order_is_zero() {
        let pts = disk_spiral(10, 0.8, 0.3, Domain::UNIT_DISK).unwrap();
        let v = loewner_leq(&KernelExpr::bergman(), &KernelExpr::bergman(), &pts, 1e-9).unwrap();
        assert!(v.holds);
        assert_eq!(v.witness.min_eigenvalue, 0.0);
    }

    #[test]
    fn constant_chains() {
        let pts = disk_spiral(6, 0.5, 0.0, Domain::UNIT_DISK).unwrap();
        let chain = verify_chain(&KernelExpr::constant(1.0), &pts, 5, 1e-9).unwrap();
        assert_eq!(chain.len(), 5);
        assert!(chain.iter().all(|v| v.holds && v.witness.spectral_radius == 0.0));
        let err = verify_chain(&KernelExpr::constant(0.5), &pts, 3, 1e-9).unwrap_err();
        assert!(matches!(err, KernelError::ChainPremise { min_eigenvalue } if min_eigenvalue < 0.0));
        let csv = chain_csv(&chain);
        assert!(csv.starts_with("n,min_eig,verdict\n0,"));
    }

    fn partial_sums(n: usize) -> KernelExpr {
        SeriesKernel::new(
            Coefficients::Finite { values: vec![1.0; n + 1] },
            VariableKind::ComplexSesquilinear,
        )
        .unwrap()
        .into()
    }

    #[test]
    fn partial_sums_converge() {
        let pts = PointSet::from_reals([-0.6, 0.0, 0.3, 0.6], Domain::OPEN_UNIT_INTERVAL).unwrap();
        let lim = monotone_limit(partial_sums, &pts, 60, 1e-9).unwrap();
        assert!(lim.monotone_violations.is_empty());
        for (i, x) in pts.values().enumerate() {
            assert!((lim.sup_diag[i] - 1.0 / (1.0 - x.norm_sqr())).abs() < 1e-10);
        }
    }

    #[test]
    fn constant_family_is_its_own_limit() {
        let pts = PointSet::from_reals([0.2, 0.5], Domain::UNIT_DISK).unwrap();
        let lim = monotone_limit(|_| KernelExpr::szego(), &pts, 1, 1e-9).unwrap();
        let g = gram(&KernelExpr::szego(), &pts, 1).unwrap();
        assert_eq!(&lim.limit, g.entries());
        let lim = monotone_limit(|_| KernelExpr::szego(), &pts, 12, 1e-9).unwrap();
        assert!(lim.cauchy_increments.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn powers_of_szego_violate_sup_condition() {
        let pts = PointSet::from_reals([0.6], Domain::UNIT_DISK).unwrap();
        let err = monotone_limit(
            |n| crate::algebra::power(&KernelExpr::szego(), n as u32).unwrap(),
            &pts,
            30,
            1e-9,
        )
        .unwrap_err();
        assert!(matches!(err, KernelError::SupConditionViolated { terms, .. } if terms <= 30));
    }

    #[test]
    fn slowly_converging_family_not_flagged() {
        // diagonals 1 + Σ_{k<n} 1/(k+1)², increments decreasing
        let pts = PointSet::from_reals([0.5], Domain::WholePlane).unwrap();
        let lim = monotone_limit(
            |n| {
                let s: f64 = (0..n).map(|k| 1.0 / ((k + 1) as f64).powi(2)).sum();
                KernelExpr::constant(1.0 + s)
            },
            &pts,
            40,
            1e-9,
        );
        assert!(lim.is_ok());
    }

    #[test]
    fn coefficient_fast_path() {
        assert!(coefficient_dominance(&SeriesKernel::szego(), &SeriesKernel::bergman(), 64));
        assert!(!coefficient_dominance(&SeriesKernel::bergman(), &SeriesKernel::szego(), 64));
    }

    #[test]
    fn norm_reversal_under_order() {
        for k in 0..=50 {
            let b = crate::series::rkhs_norm(&crate::series::monomial(k), &SeriesKernel::bergman()).unwrap();
            let s = crate::series::rkhs_norm(&crate::series::monomial(k), &SeriesKernel::szego()).unwrap();
            assert!(b <= s);
            assert!((b - 1.0 / ((1 + k) as f64).sqrt()).abs() < 1e-15);
        }
        let _ = Scalar::new(0.0, 0.0);
    }
}
