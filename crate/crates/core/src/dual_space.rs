//! Distributions at the origin: the derivative functionals
//! `D_n(f) = f⁽ⁿ⁾(0) / (n! √a_n)` and their expansions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{PointSet, Scalar};
use crate::error::{KernelError, Result};
use crate::gram::gram;
use crate::kernel::KernelExpr;
use crate::linalg::{quadratic_form, CVector};
use crate::series::{to_f64, SeriesKernel};

/// `Σ_n c_n D_n`, coordinates against the derivative basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionElement {
    pub coeffs: Vec<Scalar>,
}

impl DistributionElement {
    pub fn new(coeffs: Vec<Scalar>) -> Self {
        DistributionElement { coeffs }
    }

    /// `δ_x = Σ_n √a_n x^n D_n`, truncated to `n` terms.
    pub fn dirac(x: Scalar, k: &SeriesKernel, n: usize) -> Self {
        let mut p = Scalar::new(1.0, 0.0);
        let coeffs = k
            .coefficients()
            .coeffs(n)
            .into_iter()
            .map(|a| {
                let v = p * a.sqrt();
                p *= x;
                v
            })
            .collect();
        DistributionElement { coeffs }
    }

    /// Dual norm; the derivative functionals are orthonormal.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        serde_json::from_value(v.clone()).map_err(|e| KernelError::Parse(e.to_string()))
    }
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `⟨D_n, D_m⟩` in exact arithmetic.
///
/// Differentiates `Σ_k a_k x^k y^k` `n` times in `x` and `m` times in `y` at
/// the origin, then normalizes by `n! m! √(a_n a_m)`. Off the diagonal the
/// mixed derivative vanishes, so the result is rational.
pub fn dual_pairing_exact(k: &SeriesKernel, n: usize, m: usize) -> Result<BigRational> {
    let a = k.coefficients().coeffs_exact(n.max(m) + 1);
    for idx in [n, m] {
        if a[idx].is_zero() {
            return Err(KernelError::UnsupportedIndex(idx));
        }
    }
    // ∂ⁿ_x ∂ᵐ_y (a_k x^k y^k) at 0 is a_k (k!)² when n = m = k, else zero
    let mixed = if n == m {
        a[n].clone() * BigRational::from_integer(factorial(n) * factorial(n))
    } else {
        BigRational::zero()
    };
    if n != m {
        return Ok(mixed);
    }
    let norm = BigRational::from_integer(factorial(n) * factorial(m)) * a[n].clone();
    Ok(mixed / norm)
}

pub fn dual_pairing(k: &SeriesKernel, n: usize, m: usize) -> Result<f64> {
    dual_pairing_exact(k, n, m).map(|r| to_f64(&r))
}

/// `p⁽ᵏ⁾(0)` for `k < n` by repeated differentiation of the coefficient list.
fn derivatives_at_zero(p: &[Scalar], n: usize) -> Vec<Scalar> {
    let mut q = p.to_vec();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(q.first().copied().unwrap_or_default());
        q = q
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| c * j as f64)
            .collect();
    }
    out
}

/// Applies `Σ c_n D_n` to the polynomial `p = Σ p_k x^k`.
pub fn apply_distribution(d: &DistributionElement, p: &[Scalar], k: &SeriesKernel) -> Result<Scalar> {
    let a = k.coefficients().coeffs(d.coeffs.len());
    let derivs = derivatives_at_zero(p, d.coeffs.len());
    let mut fact = 1.0;
    let mut acc = Scalar::new(0.0, 0.0);
    for (n, (c, dp)) in d.coeffs.iter().zip(&derivs).enumerate() {
        if n > 0 {
            fact *= n as f64;
        }
        if *c == Scalar::new(0.0, 0.0) {
            continue;
        }
        if a[n] == 0.0 {
            return Err(KernelError::UnsupportedIndex(n));
        }
        acc += c * dp / (fact * a[n].sqrt());
    }
    Ok(acc)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaExpansion {
    /// `Σ_{k < N} x^k p⁽ᵏ⁾(0) / k!`
    pub value: Scalar,
    /// `p(x)` by Horner.
    pub direct: Scalar,
    /// Set when `deg p >= N`: the expansion misses terms.
    pub residual: Option<f64>,
}

/// Evaluates the Taylor form of `δ_x` on `p` through the derivative route.
pub fn delta_expand(x: Scalar, n: usize, p: &[Scalar]) -> DeltaExpansion {
    let derivs = derivatives_at_zero(p, n);
    let mut fact = 1.0;
    let mut pow = Scalar::new(1.0, 0.0);
    let mut value = Scalar::new(0.0, 0.0);
    for (k, dk) in derivs.iter().enumerate() {
        if k > 0 {
            fact *= k as f64;
        }
        value += pow * dk / fact;
        pow *= x;
    }
    let direct = crate::series::horner_complex(p, x);
    let degree = p.iter().rposition(|c| *c != Scalar::new(0.0, 0.0));
    let residual = degree
        .filter(|&d| d >= n)
        .map(|_| (direct - value).norm());
    DeltaExpansion { value, direct, residual }
}

/// `‖Σ w_i δ_{x_i}‖ = sqrt(w* G w)`.
pub fn dirac_norm(weights: &[Scalar], pts: &PointSet, k: &KernelExpr, truncation: usize) -> Result<f64> {
    if weights.len() != pts.len() {
        return Err(KernelError::DimensionMismatch {
            expected: pts.len(),
            got: weights.len(),
        });
    }
    let g = gram(k, pts, truncation)?;
    let w = CVector::from_column_slice(weights);
    Ok(quadratic_form(g.entries(), &w).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::series::{Coefficients, VariableKind};

    #[test]
    fn derivative_basis_is_orthonormal() {
        for k in [SeriesKernel::szego(), SeriesKernel::bergman(), SeriesKernel::bargmann()] {
            for n in 0..=10 {
                for m in 0..=10 {
                    let v = dual_pairing_exact(&k, n, m).unwrap();
                    let want = if n == m { BigRational::one() } else { BigRational::zero() };
                    assert_eq!(v, want);
                }
            }
        }
    }

    #[test]
    fn unsupported_index() {
        let k = SeriesKernel::new(
            Coefficients::Finite { values: vec![1.0, 0.0, 2.0] },
            VariableKind::ComplexSesquilinear,
        )
        .unwrap();
        assert!(matches!(dual_pairing(&k, 1, 1), Err(KernelError::UnsupportedIndex(1))));
        assert_eq!(dual_pairing(&k, 2, 2).unwrap(), 1.0);
    }

    #[test]
    fn derivative_functional_on_basis_element() {
        let k = SeriesKernel::bergman();
        let mut d = vec![Scalar::new(0.0, 0.0); 6];
        d[4] = Scalar::new(1.0, 0.0);
        let mut p = vec![Scalar::new(0.0, 0.0); 5];
        p[4] = Scalar::new(5f64.sqrt(), 0.0);
        let v = apply_distribution(&DistributionElement::new(d), &p, &k).unwrap();
        assert!((v.re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn dirac_reproduces_evaluation() {
        let k = SeriesKernel::bergman();
        let x = Scalar::new(0.3, -0.2);
        let m = 3;
        let d = DistributionElement::dirac(x, &k, 10);
        let mut p = vec![Scalar::new(0.0, 0.0); m + 1];
        p[m] = Scalar::new(((m + 1) as f64).sqrt(), 0.0);
        let v = apply_distribution(&d, &p, &k).unwrap();
        assert!((v - p[m] * x.powu(m as u32)).norm() < 1e-14);
    }

    #[test]
    fn dirac_norm_is_diagonal() {
        let k = SeriesKernel::szego();
        let x = Scalar::new(0.5, 0.5);
        let d = DistributionElement::dirac(x, &k, 400);
        assert!((d.norm().powi(2) - 2.0).abs() < 1e-12);
        let pts = PointSet::from_values([x], Domain::UNIT_DISK).unwrap();
        let n = dirac_norm(&[Scalar::new(1.0, 0.0)], &pts, &KernelExpr::szego(), 400).unwrap();
        assert!((n - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn delta_expansion() {
        let p: Vec<Scalar> = [1.0, -2.0, 0.0, 3.0].iter().map(|&c| Scalar::new(c, 0.0)).collect();
        let x = Scalar::new(0.7, 0.1);
        let e = delta_expand(x, 4, &p);
        assert!(e.residual.is_none());
        assert!((e.value - e.direct).norm() < 1e-14);
        let short = delta_expand(x, 3, &p);
        let r = short.residual.unwrap();
        assert!((r - 3.0 * x.powu(3).norm()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let d = DistributionElement::new(vec![Scalar::new(1.0, -2.0), Scalar::new(0.5, 0.0)]);
        assert_eq!(DistributionElement::from_json(&d.to_json()).unwrap(), d);
    }
}
