//! Kernel combinators: sums, Hadamard products, powers, frame-generated
//! kernels, and the norm of the sum space.

use serde::{Deserialize, Serialize};

use crate::domain::{Domain, PointSet, Scalar};
use crate::error::{KernelError, Result};
use crate::gram::gram;
use crate::kernel::KernelExpr;
use crate::linalg::{pseudo_inverse, CVector};
use crate::series::{rkhs_norm, Coefficients, SeriesKernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CombineOp {
    Sum,
    Product,
}

/// `K + L` or the Hadamard product `K · L`.
pub fn combine(op: CombineOp, k: &KernelExpr, l: &KernelExpr) -> Result<KernelExpr> {
    let (fk, fl) = (k.family()?, l.family()?);
    if !fk.meets(fl) {
        return Err(KernelError::DomainMismatch(format!(
            "cannot combine kernels on {fk:?} and {fl:?} domains"
        )));
    }
    Ok(match op {
        CombineOp::Sum => KernelExpr::Sum(vec![k.clone(), l.clone()]),
        CombineOp::Product => KernelExpr::Product(Box::new(k.clone()), Box::new(l.clone())),
    })
}

/// n-fold Hadamard power. Series kernels of the `(1 - t)^{-m}` family map to
/// the closed-form series `(1 - t)^{-mn}`.
pub fn power(k: &KernelExpr, n: u32) -> Result<KernelExpr> {
    if n == 0 {
        return Err(KernelError::InvalidArgument("power exponent must be >= 1".into()));
    }
    if n == 1 {
        return Ok(k.clone());
    }
    if let KernelExpr::Series(s) = k {
        if let Some(m) = s.coefficients().rising_order() {
            return Ok(SeriesKernel::new(Coefficients::rising(m * n), s.variable())?.into());
        }
    }
    Ok(KernelExpr::Power(Box::new(k.clone()), n))
}

/// Frame functions `f_n` generating `K(x, y) = Σ_n f_n(x) conj(f_n(y))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FrameFamily {
    /// Each function given by its power-series coefficients.
    Explicit(Vec<Vec<Scalar>>),
    /// `f_n(x) = √a_n x^n`, the monomial ONB of a series kernel.
    Monomials(Coefficients),
}

impl FrameFamily {
    /// Power-series coefficients of `f_n`.
    pub fn function_coeffs(&self, n: usize) -> Vec<Scalar> {
        match self {
            FrameFamily::Explicit(fs) => fs.get(n).cloned().unwrap_or_default(),
            FrameFamily::Monomials(c) => {
                let mut v = vec![Scalar::new(0.0, 0.0); n + 1];
                v[n] = Scalar::new(c.coeff(n).sqrt(), 0.0);
                v
            }
        }
    }

    /// Number of functions, `None` for infinite families.
    pub fn len(&self) -> Option<usize> {
        match self {
            FrameFamily::Explicit(fs) => Some(fs.len()),
            FrameFamily::Monomials(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    family: FrameFamily,
    truncation: usize,
    domain: Domain,
}

impl Frame {
    pub fn new(family: FrameFamily, truncation: usize, domain: Domain) -> Result<Self> {
        if truncation == 0 {
            return Err(KernelError::InvalidArgument("frame truncation must be >= 1".into()));
        }
        if let FrameFamily::Monomials(c) = &family {
            SeriesKernel::new(c.clone(), crate::series::VariableKind::ComplexSesquilinear)?;
        }
        Ok(Frame {
            family,
            truncation,
            domain,
        })
    }

    pub fn family(&self) -> &FrameFamily {
        &self.family
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    fn count(&self) -> usize {
        self.family.len().map_or(self.truncation, |l| l.min(self.truncation))
    }

    /// `(f_0(x), …, f_{N-1}(x))` with `N` the effective truncation.
    pub fn values(&self, x: Scalar) -> Vec<Scalar> {
        match &self.family {
            FrameFamily::Explicit(fs) => fs
                .iter()
                .take(self.truncation)
                .map(|c| crate::series::horner_complex(c, x))
                .collect(),
            FrameFamily::Monomials(c) => {
                let a = c.coeffs(self.truncation);
                let mut pow = Scalar::new(1.0, 0.0);
                a.iter()
                    .map(|ak| {
                        let v = pow * ak.sqrt();
                        pow *= x;
                        v
                    })
                    .collect()
            }
        }
    }

    pub fn eval(&self, x: Scalar, y: Scalar) -> Scalar {
        let fx = self.values(x);
        let fy = self.values(y);
        fx.iter().zip(&fy).map(|(a, b)| a * b.conj()).sum()
    }

    pub(crate) fn magnitude_bound(&self, r: f64) -> Option<f64> {
        match &self.family {
            FrameFamily::Monomials(c) => c.tail_bound(r * r, 0).ok(),
            FrameFamily::Explicit(fs) => Some(fs.iter().map(|f| poly_majorant(f, r).powi(2)).sum()),
        }
    }

    /// Bound on the frame terms dropped by the truncation.
    pub(crate) fn tail_bound(&self, r: f64) -> Option<f64> {
        match &self.family {
            FrameFamily::Monomials(c) => c.tail_bound(r * r, self.truncation).ok(),
            FrameFamily::Explicit(fs) => Some(
                fs.iter()
                    .skip(self.truncation)
                    .map(|f| poly_majorant(f, r).powi(2))
                    .sum(),
            ),
        }
    }

    /// Unit-norm test against a series kernel: a Parseval frame of
    /// unit-norm vectors is an orthonormal basis.
    pub fn unit_norms(&self, k: &SeriesKernel) -> Result<Vec<f64>> {
        (0..self.count())
            .map(|n| rkhs_norm(&self.family.function_coeffs(n), k))
            .collect()
    }
}

fn poly_majorant(c: &[Scalar], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, z| acc * r + z.norm())
}

/// Kernel `Σ_n f_n(x) conj(f_n(y))` over the first `truncation` frame functions.
/// `Σ |f_n(x)|²` is probed near the edge of `domain` and must converge.
pub fn kernel_from_frame(
    frames: FrameFamily,
    truncation: usize,
    domain: Domain,
) -> Result<KernelExpr> {
    let frame = Frame::new(frames, truncation, domain)?;
    for probe in probe_points(domain) {
        let diverges = match frame.family() {
            FrameFamily::Monomials(c) => c.tail_bound(probe.norm_sqr(), 0).is_err(),
            FrameFamily::Explicit(_) => {
                let s: f64 = frame.values(probe).iter().map(|v| v.norm_sqr()).sum();
                !s.is_finite()
            }
        };
        if diverges {
            return Err(KernelError::DivergentFrame(format!("{probe}")));
        }
    }
    Ok(KernelExpr::Frame(frame))
}

fn probe_points(domain: Domain) -> Vec<Scalar> {
    let c = |re, im| Scalar::new(re, im);
    match domain {
        Domain::RealInterval { radius } | Domain::ComplexDisk { radius } if radius.is_finite() => {
            vec![c(0.0, 0.0), c(0.5 * radius, 0.0), c(-0.999 * radius, 0.0)]
        }
        Domain::RealInterval { .. } | Domain::ComplexDisk { .. } | Domain::WholePlane => {
            vec![c(0.0, 0.0), c(1.0, 0.0), c(-10.0, 0.0)]
        }
        Domain::UpperHalfPlane => vec![c(0.0, 1.0), c(3.0, 0.1)],
        Domain::UnitInterval => vec![c(0.0, 0.0), c(0.5, 0.0), c(1.0, 0.0)],
    }
}

/// Norm of `F` in the RKHS of `K1 + K2`, computed as the infimum of
/// `‖F1‖² + ‖F2‖²` over decompositions `F = F1 + F2` inside the spans of the
/// sections at `pts`. `F_samples` are the values `F(x_i)`.
pub fn sum_rkhs_norm(
    f_samples: &[Scalar],
    pts: &PointSet,
    k1: &KernelExpr,
    k2: &KernelExpr,
    truncation: usize,
) -> Result<f64> {
    if f_samples.len() != pts.len() {
        return Err(KernelError::DimensionMismatch {
            expected: pts.len(),
            got: f_samples.len(),
        });
    }
    let g1 = gram(k1, pts, truncation)?;
    let g2 = gram(k2, pts, truncation)?;
    let joint = g1.entries() + g2.entries();
    let f = CVector::from_column_slice(f_samples);
    // minimizer F1 = Σ α_i K1_{x_i}, F2 = Σ α_i K2_{x_i} with (G1 + G2) α = F
    let (pinv, _) = pseudo_inverse(&joint);
    let alpha = &pinv * &f;
    let sq = (f.adjoint() * alpha)[(0, 0)].re;
    Ok(sq.max(0.0).sqrt())
}

/// Norm of the minimum-norm interpolant of `F` in span `{K_{x_i}}`.
pub fn span_norm(f_samples: &[Scalar], pts: &PointSet, k: &KernelExpr, truncation: usize) -> Result<f64> {
    sum_rkhs_norm(f_samples, pts, k, &KernelExpr::constant(0.0), truncation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Point;
    use crate::gram::psd_check;

    fn re(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    #[test]
    fn sum_of_copies_doubles() {
        let k = KernelExpr::szego();
        let s = combine(CombineOp::Sum, &k, &k).unwrap();
        let x = Point::new(Scalar::new(0.3, 0.2), Domain::UNIT_DISK).unwrap();
        let y = Point::new(Scalar::new(-0.1, 0.6), Domain::UNIT_DISK).unwrap();
        assert_eq!(s.eval(&x, &y, 1).unwrap(), k.eval(&x, &y, 1).unwrap() * 2.0);
    }

    #[test]
    fn combine_rejects_incompatible_domains() {
        let hp = KernelExpr::Builtin(crate::kernel::Builtin::HalfPlaneCauchy);
        assert!(matches!(
            combine(CombineOp::Product, &KernelExpr::szego(), &hp),
            Err(KernelError::DomainMismatch(_))
        ));
        assert!(combine(CombineOp::Sum, &KernelExpr::constant(1.0), &hp).is_ok());
    }

    #[test]
    fn power_one_and_closed_forms() {
        let k: KernelExpr = SeriesKernel::inverse_power(1).unwrap().into();
        assert_eq!(power(&k, 1).unwrap(), k);
        let cubed = power(&k, 3).unwrap();
        assert_eq!(cubed, SeriesKernel::inverse_power(3).unwrap().into());
        assert!(power(&k, 0).is_err());
    }

    #[test]
    fn cubed_series_matches_double_convolution() {
        // oracle: convolve (1, 1, 1, ...) with itself twice by hand
        let n = 30;
        let ones = vec![1u64; n];
        let conv = |a: &[u64], b: &[u64]| -> Vec<u64> {
            (0..n).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
        };
        let twice = conv(&conv(&ones, &ones), &ones);
        let k: KernelExpr = SeriesKernel::inverse_power(1).unwrap().into();
        let KernelExpr::Series(s) = power(&k, 3).unwrap() else {
            panic!("expected a series node")
        };
        let exact = s.coefficients().coeffs_exact(n);
        for kk in 0..n {
            assert_eq!(twice[kk], ((kk + 1) * (kk + 2) / 2) as u64);
            assert_eq!(exact[kk], num_rational::BigRational::from_integer(twice[kk].into()));
        }
    }

    #[test]
    fn frames_reproduce_series_kernels() {
        let pts = [0.0, 0.3, -0.7, 0.9];
        let geo = kernel_from_frame(
            FrameFamily::Monomials(Coefficients::Geometric),
            400,
            Domain::OPEN_UNIT_INTERVAL,
        )
        .unwrap();
        let berg = kernel_from_frame(
            FrameFamily::Monomials(Coefficients::rising(2)),
            600,
            Domain::OPEN_UNIT_INTERVAL,
        )
        .unwrap();
        for &x in &pts {
            for &y in &pts {
                let px = Point::real(x, Domain::OPEN_UNIT_INTERVAL).unwrap();
                let py = Point::real(y, Domain::OPEN_UNIT_INTERVAL).unwrap();
                let t = x * y;
                let g = geo.eval(&px, &py, 1).unwrap().re;
                let b = berg.eval(&px, &py, 1).unwrap().re;
                let slack_g = geo.tail_bound(0.9, 1).unwrap() + 1e-13;
                let slack_b = berg.tail_bound(0.9, 1).unwrap() + 1e-12;
                assert!((g - 1.0 / (1.0 - t)).abs() <= slack_g);
                assert!((b - 1.0 / (1.0 - t).powi(2)).abs() <= slack_b);
            }
        }
    }

    #[test]
    fn constant_frame() {
        let k = kernel_from_frame(FrameFamily::Explicit(vec![vec![re(1.0)]]), 10, Domain::WholePlane)
            .unwrap();
        let p = Point::new(Scalar::new(3.0, -2.0), Domain::WholePlane).unwrap();
        let q = Point::real(-7.0, Domain::WholePlane).unwrap();
        assert_eq!(k.eval(&p, &q, 1).unwrap(), re(1.0));
    }

    #[test]
    fn divergent_frame_detected() {
        let err = kernel_from_frame(
            FrameFamily::Monomials(Coefficients::Geometric),
            50,
            Domain::RealInterval { radius: 2.0 },
        )
        .unwrap_err();
        assert!(matches!(err, KernelError::DivergentFrame(_)));
    }

    #[test]
    fn onb_unit_norm_criterion() {
        let frame = Frame::new(
            FrameFamily::Monomials(Coefficients::rising(2)),
            20,
            Domain::UNIT_DISK,
        )
        .unwrap();
        let norms = frame.unit_norms(&SeriesKernel::bergman()).unwrap();
        assert!(norms.iter().all(|n| (n - 1.0).abs() < 1e-14));
        let against_szego = frame.unit_norms(&SeriesKernel::szego()).unwrap();
        assert!((against_szego[3] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn sum_norm_with_zero_summand() {
        let k: KernelExpr = SeriesKernel::inverse_power(1).unwrap().into();
        let pts = PointSet::from_reals([-0.4, 0.1, 0.6], Domain::OPEN_UNIT_INTERVAL).unwrap();
        let g = gram(&k, &pts, 200).unwrap();
        // F = K_{x_1} - 2 K_{x_2}
        let coeffs = CVector::from_column_slice(&[re(0.0), re(1.0), re(-2.0)]);
        let f = g.entries() * &coeffs;
        let direct = crate::linalg::quadratic_form(g.entries(), &coeffs).sqrt();
        let n = sum_rkhs_norm(f.as_slice(), &pts, &k, &KernelExpr::constant(0.0), 200).unwrap();
        assert!((n - direct).abs() < 1e-9 * direct);
        assert!(psd_check(&g, 1e-9).unwrap().is_psd());
    }
}
