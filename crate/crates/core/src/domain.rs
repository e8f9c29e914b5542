//! Scalars, points and point sets.
//!
//! Every point carries the tag of the domain it was drawn from, and its
//! value is validated strictly inside that domain on construction. The
//! closed unit interval is the one exception: Cantor endpoints 0 and 1
//! are legitimate sample points for the fractal kernels.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{KernelError, Result};

/// Complex scalar used throughout; real contexts keep `im == 0`.
pub type Scalar = Complex64;

pub(crate) fn check_finite(z: Scalar) -> Result<Scalar> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(z)
    } else {
        Err(KernelError::NonFinite(format!("{z}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Domain {
    /// Open real interval `(-radius, radius)`.
    RealInterval { radius: f64 },
    /// Open complex disk `|z| < radius`.
    ComplexDisk { radius: f64 },
    /// `Im z > 0`.
    UpperHalfPlane,
    WholePlane,
    /// Closed interval `[0, 1]`.
    UnitInterval,
}

impl Domain {
    pub const UNIT_DISK: Domain = Domain::ComplexDisk { radius: 1.0 };
    pub const OPEN_UNIT_INTERVAL: Domain = Domain::RealInterval { radius: 1.0 };

    pub fn contains(&self, z: Scalar) -> bool {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return false;
        }
        match *self {
            Domain::RealInterval { radius } => z.im == 0.0 && z.re.abs() < radius,
            Domain::ComplexDisk { radius } => z.norm() < radius,
            Domain::UpperHalfPlane => z.im > 0.0,
            Domain::WholePlane => true,
            Domain::UnitInterval => z.im == 0.0 && (0.0..=1.0).contains(&z.re),
        }
    }

    pub fn is_real(&self) -> bool {
        matches!(self, Domain::RealInterval { .. } | Domain::UnitInterval)
    }

    /// Half-plane domains live in a different chart from the disk/line family.
    pub(crate) fn family(&self) -> DomainFamily {
        match self {
            Domain::UpperHalfPlane => DomainFamily::HalfPlane,
            Domain::WholePlane => DomainFamily::Any,
            _ => DomainFamily::Centered,
        }
    }

    pub fn compatible_with(&self, other: &Domain) -> bool {
        self.family().meets(other.family())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum DomainFamily {
    Centered,
    HalfPlane,
    Any,
}

impl DomainFamily {
    pub(crate) fn meets(self, other: DomainFamily) -> bool {
        self == DomainFamily::Any || other == DomainFamily::Any || self == other
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::RealInterval { radius } => write!(f, "real-interval(-{radius}, {radius})"),
            Domain::ComplexDisk { radius } => write!(f, "complex-disk(|z| < {radius})"),
            Domain::UpperHalfPlane => write!(f, "upper-half-plane"),
            Domain::WholePlane => write!(f, "whole-plane"),
            Domain::UnitInterval => write!(f, "unit-interval[0, 1]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPoint")]
pub struct Point {
    value: Scalar,
    domain: Domain,
}

impl Point {
    pub fn new(value: Scalar, domain: Domain) -> Result<Self> {
        check_finite(value)?;
        if !domain.contains(value) {
            return Err(KernelError::OutsideDomain {
                value: format!("{value}"),
                domain: domain.to_string(),
            });
        }
        Ok(Point { value, domain })
    }

    pub fn real(x: f64, domain: Domain) -> Result<Self> {
        Point::new(Scalar::new(x, 0.0), domain)
    }

    pub fn value(&self) -> Scalar {
        self.value
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }
}

/// Ordered, nonempty collection of pairwise distinct points sharing one domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct PointSet {
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points.first().ok_or(KernelError::EmptyPointSet)?;
        let domain = first.domain;
        for p in &points {
            if p.domain != domain {
                return Err(KernelError::DomainMismatch(format!(
                    "point set mixes {} and {}",
                    domain, p.domain
                )));
            }
        }
        for i in 0..points.len() {
            for j in (i + 1)..points.len() {
                if points[i].value == points[j].value {
                    return Err(KernelError::DuplicatePoints(i, j));
                }
            }
        }
        Ok(PointSet { points })
    }

    pub fn from_values<I>(values: I, domain: Domain) -> Result<Self>
    where
        I: IntoIterator<Item = Scalar>,
    {
        let points = values
            .into_iter()
            .map(|v| Point::new(v, domain))
            .collect::<Result<Vec<_>>>()?;
        PointSet::new(points)
    }

    pub fn from_reals<I>(values: I, domain: Domain) -> Result<Self>
    where
        I: IntoIterator<Item = f64>,
    {
        PointSet::from_values(values.into_iter().map(|x| Scalar::new(x, 0.0)), domain)
    }

    pub fn domain(&self) -> Domain {
        self.points[0].domain
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn values(&self) -> impl Iterator<Item = Scalar> + '_ {
        self.points.iter().map(|p| p.value)
    }

    pub fn get(&self, i: usize) -> Option<&Point> {
        self.points.get(i)
    }

    pub fn max_modulus(&self) -> f64 {
        self.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Appends a point; fails on duplicates or a domain mismatch.
    pub fn with_point(&self, p: Point) -> Result<Self> {
        let mut pts = self.points.clone();
        pts.push(p);
        PointSet::new(pts)
    }
}

impl TryFrom<Vec<Point>> for PointSet {
    type Error = KernelError;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        PointSet::new(points)
    }
}

impl From<PointSet> for Vec<Point> {
    fn from(p: PointSet) -> Self {
        p.points
    }
}

#[derive(Deserialize)]
struct RawPoint {
    value: Scalar,
    domain: Domain,
}

impl TryFrom<RawPoint> for Point {
    type Error = KernelError;

    fn try_from(p: RawPoint) -> Result<Self> {
        Point::new(p.value, p.domain)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_points_are_rejected() {
        assert!(Point::new(Scalar::new(1.0, 0.0), Domain::UNIT_DISK).is_err());
        assert!(Point::new(Scalar::new(0.0, 0.999), Domain::UNIT_DISK).is_ok());
        assert!(Point::real(-1.0, Domain::OPEN_UNIT_INTERVAL).is_err());
        assert!(Point::new(Scalar::new(3.0, 0.0), Domain::UpperHalfPlane).is_err());
        assert!(Point::real(1.0, Domain::UnitInterval).is_ok());
        assert!(Point::real(0.0, Domain::UnitInterval).is_ok());
    }

    #[test]
    fn non_finite_rejected() {
        let err = Point::new(Scalar::new(f64::NAN, 0.0), Domain::WholePlane).unwrap_err();
        assert!(matches!(err, KernelError::NonFinite(_)));
    }

    #[test]
    fn real_domain_rejects_complex_values() {
        assert!(Point::new(Scalar::new(0.1, 0.1), Domain::OPEN_UNIT_INTERVAL).is_err());
    }

    #[test]
    fn point_set_invariants() {
        assert_eq!(PointSet::new(vec![]).unwrap_err(), KernelError::EmptyPointSet);
        let dup = PointSet::from_reals([0.1, 0.2, 0.1], Domain::OPEN_UNIT_INTERVAL).unwrap_err();
        assert_eq!(dup, KernelError::DuplicatePoints(0, 2));
        let a = Point::real(0.1, Domain::OPEN_UNIT_INTERVAL).unwrap();
        let b = Point::real(0.1, Domain::UNIT_DISK).unwrap();
        assert!(matches!(
            PointSet::new(vec![a, b]),
            Err(KernelError::DomainMismatch(_))
        ));
    }

    #[test]
    fn family_compatibility() {
        assert!(Domain::UNIT_DISK.compatible_with(&Domain::OPEN_UNIT_INTERVAL));
        assert!(!Domain::UNIT_DISK.compatible_with(&Domain::UpperHalfPlane));
        assert!(Domain::WholePlane.compatible_with(&Domain::UpperHalfPlane));
    }
}
