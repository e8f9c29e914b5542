//! The map `μ ↦ Σ c_i K(·, x_i)` from discrete measures into the RKHS and
//! its pseudo-inverse on sampled data.

use serde::{Deserialize, Serialize};

use crate::domain::{Point, PointSet, Scalar};
use crate::error::{KernelError, Result};
use crate::gram::gram;
use crate::kernel::KernelExpr;
use crate::linalg::{pseudo_inverse, quadratic_form, CMatrix, CVector};

/// Relative residual above which `k_inverse` reports the data as outside
/// the sampled range.
pub const RANGE_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub points: PointSet,
    pub weights: Vec<Scalar>,
}

impl DiscreteMeasure {
    pub fn new(points: PointSet, weights: Vec<Scalar>) -> Result<Self> {
        if weights.len() != points.len() {
            return Err(KernelError::DimensionMismatch {
                expected: points.len(),
                got: weights.len(),
            });
        }
        for w in &weights {
            crate::domain::check_finite(*w)?;
        }
        Ok(DiscreteMeasure { points, weights })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("plain data")
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let m: DiscreteMeasure =
            serde_json::from_value(v.clone()).map_err(|e| KernelError::Parse(e.to_string()))?;
        DiscreteMeasure::new(m.points, m.weights)
    }

    fn vector(&self) -> CVector {
        CVector::from_column_slice(&self.weights)
    }
}

/// `Σ_ij c_i conj(c_j) K(x_j, x_i) = ‖T_K μ‖²`.
pub fn energy(mu: &DiscreteMeasure, k: &KernelExpr, truncation: usize) -> Result<f64> {
    let g = gram(k, &mu.points, truncation)?;
    Ok(quadratic_form(g.entries(), &mu.vector()))
}

/// `⟨μ, ν⟩ = ⟨T_K μ, T_K ν⟩` for measures on the same points.
pub fn measure_inner(mu: &DiscreteMeasure, nu: &DiscreteMeasure, k: &KernelExpr, truncation: usize) -> Result<Scalar> {
    if mu.points != nu.points {
        return Err(KernelError::InvalidArgument("measures live on different points".into()));
    }
    let g = gram(k, &mu.points, truncation)?;
    Ok((nu.vector().adjoint() * g.entries() * mu.vector())[(0, 0)])
}

/// `T_K μ` as an evaluable function.
#[derive(Debug, Clone)]
pub struct KTransform {
    measure: DiscreteMeasure,
    kernel: KernelExpr,
    truncation: usize,
}

impl KTransform {
    /// `Σ c_i K(y, x_i)`.
    pub fn eval(&self, y: &Point) -> Result<Scalar> {
        let mut acc = Scalar::new(0.0, 0.0);
        for (x, c) in self.measure.points.points().iter().zip(&self.measure.weights) {
            acc += c * self.kernel.eval(y, x, self.truncation)?;
        }
        Ok(acc)
    }

    /// Values on the support points of the measure.
    pub fn sample(&self) -> Result<Vec<Scalar>> {
        self.measure.points.points().iter().map(|p| self.eval(p)).collect()
    }

    pub fn norm(&self) -> Result<f64> {
        Ok(energy(&self.measure, &self.kernel, self.truncation)?.max(0.0).sqrt())
    }

    /// `⟨T_K μ, f⟩` for `f` in the span of the sections at the support,
    /// given by its values there: `Σ c_i conj(f(x_i))`.
    pub fn inner_with_values(&self, f_values: &[Scalar]) -> Result<Scalar> {
        if f_values.len() != self.measure.weights.len() {
            return Err(KernelError::DimensionMismatch {
                expected: self.measure.weights.len(),
                got: f_values.len(),
            });
        }
        Ok(self.measure.weights.iter().zip(f_values).map(|(c, f)| c * f.conj()).sum())
    }

    pub fn measure(&self) -> &DiscreteMeasure {
        &self.measure
    }
}

pub fn tk_apply(mu: &DiscreteMeasure, k: &KernelExpr, truncation: usize) -> Result<KTransform> {
    for p in mu.points.points() {
        k.admits(p)?;
    }
    Ok(KTransform {
        measure: mu.clone(),
        kernel: k.clone(),
        truncation,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct KInverse {
    pub measure: DiscreteMeasure,
    /// `‖G c - f‖ / ‖f‖`
    pub residual: f64,
    pub rank: usize,
    /// Set when the residual exceeds [`RANGE_RESIDUAL`].
    pub warning: Option<String>,
}

/// Weights `c = G⁺ f` so that `T_K μ` interpolates `f` on `pts`.
pub fn k_inverse(f_values: &[Scalar], pts: &PointSet, k: &KernelExpr, truncation: usize) -> Result<KInverse> {
    if f_values.len() != pts.len() {
        return Err(KernelError::DimensionMismatch {
            expected: pts.len(),
            got: f_values.len(),
        });
    }
    let g: CMatrix = gram(k, pts, truncation)?.into_entries();
    let (pinv, rank) = pseudo_inverse(&g);
    let f = CVector::from_column_slice(f_values);
    let c = &pinv * &f;
    let fnorm = f.norm();
    let residual = if fnorm > 0.0 { (&g * &c - &f).norm() / fnorm } else { 0.0 };
    let warning = (residual > RANGE_RESIDUAL)
        .then(|| format!("data not in the sampled range: relative residual {residual:e}"));
    Ok(KInverse {
        measure: DiscreteMeasure::new(pts.clone(), c.iter().copied().collect())?,
        residual,
        rank,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::sampling::disk_spiral;

    fn measure() -> DiscreteMeasure {
        let pts = disk_spiral(6, 0.7, 0.2, Domain::UNIT_DISK).unwrap();
        let w = (0..6).map(|i| Scalar::new(i as f64 - 2.5, 0.3 * i as f64)).collect();
        DiscreteMeasure::new(pts, w).unwrap()
    }

    #[test]
    fn energy_matches_norm() {
        let mu = measure();
        let t = tk_apply(&mu, &KernelExpr::szego(), 200).unwrap();
        let e = energy(&mu, &KernelExpr::szego(), 200).unwrap();
        assert!(e > 0.0);
        assert!((t.norm().unwrap().powi(2) - e).abs() < 1e-12 * e.max(1.0));
        let ip = measure_inner(&mu, &mu, &KernelExpr::szego(), 200).unwrap();
        assert!((ip.re - e).abs() < 1e-10 && ip.im.abs() < 1e-10);
    }

    #[test]
    fn round_trip() {
        let mu = measure();
        let k = KernelExpr::szego();
        let f = tk_apply(&mu, &k, 200).unwrap().sample().unwrap();
        let inv = k_inverse(&f, &mu.points, &k, 200).unwrap();
        assert!(inv.warning.is_none());
        let f2 = tk_apply(&inv.measure, &k, 200).unwrap().sample().unwrap();
        for (a, b) in f.iter().zip(&f2) {
            assert!((a - b).norm() < 1e-8 * (1.0 + a.norm()));
        }
    }

    #[test]
    fn adjoint_identity() {
        let mu = measure();
        let k = KernelExpr::bergman();
        let t = tk_apply(&mu, &k, 300).unwrap();
        let nu = DiscreteMeasure::new(
            mu.points.clone(),
            (0..6).map(|i| Scalar::new(1.0, -(i as f64))).collect(),
        )
        .unwrap();
        let f = tk_apply(&nu, &k, 300).unwrap().sample().unwrap();
        let lhs = t.inner_with_values(&f).unwrap();
        let inv = k_inverse(&f, &mu.points, &k, 300).unwrap();
        let rhs = measure_inner(&mu, &inv.measure, &k, 300).unwrap();
        assert!((lhs - rhs).norm() < 1e-6 * lhs.norm().max(1.0));
    }

    #[test]
    fn json_round_trip() {
        let mu = measure();
        assert_eq!(DiscreteMeasure::from_json(&mu.to_json()).unwrap(), mu);
    }

    #[test]
    fn mismatched_weights() {
        let pts = disk_spiral(3, 0.5, 0.0, Domain::UNIT_DISK).unwrap();
        assert!(DiscreteMeasure::new(pts, vec![Scalar::new(1.0, 0.0)]).is_err());
    }
}
