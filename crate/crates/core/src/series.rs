//! Power-series kernels `K(x, y) = Σ a_k (x ȳ)^k` with nonnegative coefficients.
//!
//! Coefficients are carried as rules so that small-index checks can be done
//! in exact rational arithmetic, while evaluation uses the truncated series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::domain::{Domain, Scalar};
use crate::error::{KernelError, Result};

/// Hard cap on series length chosen by [`SeriesKernel::auto_truncation`].
pub const MAX_TRUNCATION: usize = 1 << 16;

/// Default tail tolerance used when a truncation is selected automatically.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Coefficients {
    /// `a_k = 1`: `(1 - t)^{-1}`.
    Geometric,
    /// `a_k = n(n+1)⋯(n+k-1)/k!`: `(1 - t)^{-n}`.
    RisingFactorial { n: u32 },
    /// `a_k = 1/k!`: `exp(t)`.
    InverseFactorial,
    /// Explicit list, zero beyond its end.
    Finite { values: Vec<f64> },
    /// `c · b_k`.
    Scaled { factor: f64, inner: Box<Coefficients> },
    /// Cauchy product `Σ_{i+j=k} a_i b_j`: the coefficients of a Hadamard product.
    Convolution { left: Box<Coefficients>, right: Box<Coefficients> },
}

impl Coefficients {
    pub fn rising(n: u32) -> Self {
        match n {
            1 => Coefficients::Geometric,
            _ => Coefficients::RisingFactorial { n },
        }
    }

    pub fn convolve(left: Coefficients, right: Coefficients) -> Self {
        match (left, right) {
            (Coefficients::Geometric, r) if r == Coefficients::Geometric => Coefficients::rising(2),
            (l, r) => match (l.rising_order(), r.rising_order()) {
                (Some(a), Some(b)) => Coefficients::rising(a + b),
                _ => Coefficients::Convolution {
                    left: Box::new(l),
                    right: Box::new(r),
                },
            },
        }
    }

    /// `Some(n)` when these are the coefficients of `(1 - t)^{-n}`.
    pub fn rising_order(&self) -> Option<u32> {
        match self {
            Coefficients::Geometric => Some(1),
            Coefficients::RisingFactorial { n } => Some(*n),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Coefficients::RisingFactorial { n } if *n == 0 => Err(KernelError::InvalidArgument(
                "rising factorial order must be >= 1".into(),
            )),
            Coefficients::Finite { values } => {
                for (k, &a) in values.iter().enumerate() {
                    if !a.is_finite() || a < 0.0 {
                        return Err(KernelError::InvalidArgument(format!(
                            "coefficient a_{k} = {a} must be finite and nonnegative"
                        )));
                    }
                }
                Ok(())
            }
            Coefficients::Scaled { factor, inner } => {
                if !factor.is_finite() || *factor < 0.0 {
                    return Err(KernelError::InvalidArgument(format!(
                        "scale factor {factor} must be finite and nonnegative"
                    )));
                }
                inner.validate()
            }
            Coefficients::Convolution { left, right } => {
                left.validate()?;
                right.validate()
            }
            _ => Ok(()),
        }
    }

    /// Radius of convergence of `Σ a_k t^k` in the variable `t`.
    pub fn t_radius(&self) -> f64 {
        match self {
            Coefficients::Geometric | Coefficients::RisingFactorial { .. } => 1.0,
            Coefficients::InverseFactorial | Coefficients::Finite { .. } => f64::INFINITY,
            Coefficients::Scaled { inner, .. } => inner.t_radius(),
            Coefficients::Convolution { left, right } => left.t_radius().min(right.t_radius()),
        }
    }

    pub fn coeff(&self, k: usize) -> f64 {
        match self {
            Coefficients::Geometric => 1.0,
            Coefficients::RisingFactorial { n } => {
                let n = *n as f64;
                (1..=k).fold(1.0, |acc, j| acc * (n - 1.0 + j as f64) / j as f64)
            }
            Coefficients::InverseFactorial => (1..=k).fold(1.0, |acc, j| acc / j as f64),
            Coefficients::Finite { values } => values.get(k).copied().unwrap_or(0.0),
            Coefficients::Scaled { factor, inner } => factor * inner.coeff(k),
            Coefficients::Convolution { left, right } => {
                (0..=k).map(|i| left.coeff(i) * right.coeff(k - i)).sum()
            }
        }
    }

    /// First `n` coefficients.
    pub fn coeffs(&self, n: usize) -> Vec<f64> {
        match self {
            Coefficients::Geometric => vec![1.0; n],
            Coefficients::RisingFactorial { n: order } => {
                let order = *order as f64;
                let mut out = Vec::with_capacity(n);
                let mut a = 1.0;
                for k in 0..n {
                    if k > 0 {
                        a *= (order - 1.0 + k as f64) / k as f64;
                    }
                    out.push(a);
                }
                out
            }
            Coefficients::InverseFactorial => {
                let mut out = Vec::with_capacity(n);
                let mut a = 1.0;
                for k in 0..n {
                    if k > 0 {
                        a /= k as f64;
                    }
                    out.push(a);
                }
                out
            }
            Coefficients::Finite { values } => (0..n)
                .map(|k| values.get(k).copied().unwrap_or(0.0))
                .collect(),
            Coefficients::Scaled { factor, inner } => {
                inner.coeffs(n).into_iter().map(|a| factor * a).collect()
            }
            Coefficients::Convolution { left, right } => {
                let a = left.coeffs(n);
                let b = right.coeffs(n);
                (0..n)
                    .map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum())
                    .collect()
            }
        }
    }

    /// First `n` coefficients as exact rationals. Floating inputs
    /// (`Finite`, `Scaled`) convert exactly from their binary value.
    pub fn coeffs_exact(&self, n: usize) -> Vec<BigRational> {
        match self {
            Coefficients::Geometric => vec![BigRational::one(); n],
            Coefficients::RisingFactorial { n: order } => {
                let mut out = Vec::with_capacity(n);
                let mut a = BigRational::one();
                for k in 0..n {
                    if k > 0 {
                        a = a * BigRational::new(
                            BigInt::from(*order as u64 + k as u64 - 1),
                            BigInt::from(k as u64),
                        );
                    }
                    out.push(a.clone());
                }
                out
            }
            Coefficients::InverseFactorial => {
                let mut out = Vec::with_capacity(n);
                let mut a = BigRational::one();
                for k in 0..n {
                    if k > 0 {
                        a = a / BigRational::from_integer(BigInt::from(k as u64));
                    }
                    out.push(a.clone());
                }
                out
            }
            Coefficients::Finite { values } => (0..n)
                .map(|k| exact_f64(values.get(k).copied().unwrap_or(0.0)))
                .collect(),
            Coefficients::Scaled { factor, inner } => {
                let c = exact_f64(*factor);
                inner.coeffs_exact(n).into_iter().map(|a| a * &c).collect()
            }
            Coefficients::Convolution { left, right } => {
                let a = left.coeffs_exact(n);
                let b = right.coeffs_exact(n);
                (0..n)
                    .map(|k| {
                        (0..=k).fold(BigRational::zero(), |acc, i| acc + &a[i] * &b[k - i])
                    })
                    .collect()
            }
        }
    }

    /// Closed form of `Σ a_k t^k` where one exists.
    pub fn closed_form(&self, t: Scalar) -> Option<Scalar> {
        let one = Scalar::new(1.0, 0.0);
        match self {
            Coefficients::Geometric => Some(one / (one - t)),
            Coefficients::RisingFactorial { n } => Some((one - t).powi(-(*n as i32))),
            Coefficients::InverseFactorial => Some(t.exp()),
            Coefficients::Finite { values } => Some(horner(values, t)),
            Coefficients::Scaled { factor, inner } => inner.closed_form(t).map(|v| v * *factor),
            Coefficients::Convolution { left, right } => {
                Some(left.closed_form(t)? * right.closed_form(t)?)
            }
        }
    }

    /// `sup_{j >= k} a_{j+1} / a_j` for rules where the ratio is monotone.
    fn ratio_bound(&self, k: usize) -> Option<f64> {
        match self {
            Coefficients::Geometric => Some(1.0),
            Coefficients::RisingFactorial { n } => {
                // (n + k)/(k + 1) is nonincreasing in k for n >= 1
                Some((*n as f64 + k as f64) / (k as f64 + 1.0))
            }
            Coefficients::InverseFactorial => Some(1.0 / (k as f64 + 1.0)),
            _ => None,
        }
    }

    /// Upper bound on `Σ_{k >= n} a_k q^k` for `q >= 0`.
    pub fn tail_bound(&self, q: f64, n: usize) -> Result<f64> {
        if !(q.is_finite() && q >= 0.0) {
            return Err(KernelError::BoundUnavailable(format!("invalid modulus {q}")));
        }
        if q >= self.t_radius() {
            return Err(KernelError::BoundUnavailable(format!(
                "|t| = {q} is outside the radius of convergence {}",
                self.t_radius()
            )));
        }
        if q == 0.0 {
            return Ok(if n == 0 { self.coeff(0) } else { 0.0 });
        }
        match self {
            Coefficients::Geometric => Ok(q.powi(n as i32) / (1.0 - q)),
            Coefficients::Finite { values } => Ok(values
                .iter()
                .enumerate()
                .skip(n)
                .map(|(k, a)| a * q.powi(k as i32))
                .sum()),
            Coefficients::Scaled { factor, inner } => Ok(factor * inner.tail_bound(q, n)?),
            Coefficients::Convolution { left, right } => {
                // every index pair with i + j >= n has i >= h or j >= h
                let h = n.div_ceil(2);
                let total_l = left.tail_bound(q, 0)?;
                let total_r = right.tail_bound(q, 0)?;
                Ok(left.tail_bound(q, h)? * total_r + total_l * right.tail_bound(q, h)?)
            }
            Coefficients::RisingFactorial { .. } | Coefficients::InverseFactorial => {
                self.ratio_majorant(q, n)
            }
        }
    }

    fn ratio_majorant(&self, q: f64, n: usize) -> Result<f64> {
        let mut partial = 0.0;
        let mut m = n;
        let mut term = self.coeff(n) * q.powi(n as i32);
        while m < n + MAX_TRUNCATION {
            let rho = self.ratio_bound(m).expect("ratio rule") * q;
            if rho < 1.0 {
                return Ok(partial + term / (1.0 - rho));
            }
            partial += term;
            m += 1;
            term = self.coeff(m) * q.powi(m as i32);
        }
        Err(KernelError::BoundUnavailable(format!(
            "no convergent geometric majorant at |t| = {q}"
        )))
    }
}

fn exact_f64(x: f64) -> BigRational {
    BigRational::from_float(x).unwrap_or_else(BigRational::zero)
}

/// `Σ c_k t^k` by Horner's rule.
pub fn horner(coeffs: &[f64], t: Scalar) -> Scalar {
    coeffs
        .iter()
        .rev()
        .fold(Scalar::new(0.0, 0.0), |acc, &a| acc * t + a)
}

/// `Σ c_k t^k` for complex coefficients.
pub fn horner_complex(coeffs: &[Scalar], t: Scalar) -> Scalar {
    coeffs
        .iter()
        .rev()
        .fold(Scalar::new(0.0, 0.0), |acc, &a| acc * t + a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VariableKind {
    /// Real points only: `K(x, y) = Σ a_k x^k y^k`.
    Real,
    /// `K(z, w) = Σ a_k z^k w̄^k` on complex points.
    ComplexSesquilinear,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesKernel {
    coeffs: Coefficients,
    variable: VariableKind,
}

impl SeriesKernel {
    pub fn new(coeffs: Coefficients, variable: VariableKind) -> Result<Self> {
        coeffs.validate()?;
        Ok(SeriesKernel { coeffs, variable })
    }

    /// `(1 - z w̄)^{-1}` on the disk.
    pub fn szego() -> Self {
        SeriesKernel::new(Coefficients::Geometric, VariableKind::ComplexSesquilinear).unwrap()
    }

    /// `(1 - z w̄)^{-2}` on the disk.
    pub fn bergman() -> Self {
        SeriesKernel::new(Coefficients::rising(2), VariableKind::ComplexSesquilinear).unwrap()
    }

    /// `exp(z w̄)` on the plane.
    pub fn bargmann() -> Self {
        SeriesKernel::new(Coefficients::InverseFactorial, VariableKind::ComplexSesquilinear)
            .unwrap()
    }

    /// `(1 - xy)^{-n}` on `(-1, 1)`.
    pub fn inverse_power(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(KernelError::InvalidArgument("order must be >= 1".into()));
        }
        SeriesKernel::new(Coefficients::rising(n), VariableKind::Real)
    }

    pub fn coefficients(&self) -> &Coefficients {
        &self.coeffs
    }

    pub fn variable(&self) -> VariableKind {
        self.variable
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.coeff(k)
    }

    /// Radius of convergence in `|x|`.
    pub fn radius(&self) -> f64 {
        self.coeffs.t_radius().sqrt()
    }

    pub fn domain(&self) -> Domain {
        let radius = self.radius();
        match self.variable {
            VariableKind::Real => Domain::RealInterval { radius },
            VariableKind::ComplexSesquilinear if radius.is_infinite() => Domain::WholePlane,
            VariableKind::ComplexSesquilinear => Domain::ComplexDisk { radius },
        }
    }

    pub(crate) fn admits(&self, z: Scalar) -> Result<()> {
        if self.variable == VariableKind::Real && z.im != 0.0 {
            return Err(KernelError::DomainMismatch(format!(
                "real-variable series kernel evaluated at complex point {z}"
            )));
        }
        let r = self.radius();
        if z.norm() >= r {
            return Err(KernelError::SeriesDivergence {
                modulus: z.norm(),
                radius: r,
            });
        }
        Ok(())
    }

    /// Truncated sum `Σ_{k < n} a_k (x ȳ)^k`, validating both arguments.
    pub fn eval(&self, x: Scalar, y: Scalar, truncation: usize) -> Result<Scalar> {
        self.admits(x)?;
        self.admits(y)?;
        Ok(self.eval_unchecked(x, y, truncation))
    }

    pub(crate) fn eval_unchecked(&self, x: Scalar, y: Scalar, truncation: usize) -> Scalar {
        horner(&self.coeffs.coeffs(truncation), x * y.conj())
    }

    /// Closed form where the coefficient rule has one.
    pub fn closed_form(&self, x: Scalar, y: Scalar) -> Option<Scalar> {
        self.coeffs.closed_form(x * y.conj())
    }

    /// Upper bound on `Σ_{k >= n} a_k r^{2k}`, which dominates the truncation
    /// error at every pair with `|x|, |y| <= r_eff`.
    pub fn truncation_bound(&self, r_eff: f64, n: usize) -> Result<f64> {
        if !(r_eff >= 0.0 && r_eff < self.radius()) {
            return Err(KernelError::BoundUnavailable(format!(
                "r_eff = {r_eff} must lie in [0, {})",
                self.radius()
            )));
        }
        self.coeffs.tail_bound(r_eff * r_eff, n)
    }

    /// Smallest truncation whose tail bound at `r_eff` is below `tol`.
    pub fn auto_truncation(&self, r_eff: f64, tol: f64) -> Result<usize> {
        let below = |n: usize| -> Result<bool> { Ok(self.truncation_bound(r_eff, n)? < tol) };
        let mut hi = 1;
        while !below(hi)? {
            hi *= 2;
            if hi > MAX_TRUNCATION {
                return Err(KernelError::BoundUnavailable(format!(
                    "tail stays above {tol:e} up to {MAX_TRUNCATION} terms at r = {r_eff}"
                )));
            }
        }
        let mut lo = hi / 2;
        if lo == 0 {
            return Ok(hi);
        }
        // invariant: bound(lo) >= tol, bound(hi) < tol
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if below(mid)? {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Coefficients of the Hadamard product `self · other`.
    pub fn product(&self, other: &SeriesKernel) -> Result<SeriesKernel> {
        let variable = match (self.variable, other.variable) {
            (VariableKind::ComplexSesquilinear, VariableKind::ComplexSesquilinear) => {
                VariableKind::ComplexSesquilinear
            }
            _ => VariableKind::Real,
        };
        SeriesKernel::new(
            Coefficients::convolve(self.coeffs.clone(), other.coeffs.clone()),
            variable,
        )
    }
}

/// `‖f‖ = sqrt(Σ_{a_k > 0} |c_k|² / a_k)` for `f = Σ c_k x^k`.
pub fn rkhs_norm(f_coeffs: &[Scalar], k: &SeriesKernel) -> Result<f64> {
    let a = k.coefficients().coeffs(f_coeffs.len());
    let mut sum = 0.0;
    for (i, (c, a)) in f_coeffs.iter().zip(&a).enumerate() {
        if *a > 0.0 {
            sum += c.norm_sqr() / a;
        } else if c.norm_sqr() > 0.0 {
            return Err(KernelError::NotInRkhs { index: i });
        }
    }
    Ok(sum.sqrt())
}

/// Exact `‖f‖²` for rational coefficient sequences.
pub fn rkhs_norm_squared_exact(f_coeffs: &[BigRational], k: &SeriesKernel) -> Result<BigRational> {
    let a = k.coefficients().coeffs_exact(f_coeffs.len());
    let mut sum = BigRational::zero();
    for (i, (c, a)) in f_coeffs.iter().zip(&a).enumerate() {
        if a.is_zero() {
            if !c.is_zero() {
                return Err(KernelError::NotInRkhs { index: i });
            }
        } else {
            sum += c * c / a;
        }
    }
    Ok(sum)
}

/// Monomial `x^k` as a coefficient vector.
pub fn monomial(k: usize) -> Vec<Scalar> {
    let mut c = vec![Scalar::new(0.0, 0.0); k + 1];
    c[k] = Scalar::new(1.0, 0.0);
    c
}

pub(crate) fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
