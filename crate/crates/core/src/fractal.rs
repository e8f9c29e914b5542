//! The middle-third IFS transform `(Tf)(x) = f(3x) + f(3x - 2)` acting on
//! functions zero-extended outside `[0, 1]`, the Cantor construction stages
//! `C_n`, and kernels built from transformed frame functions.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{Float, One};
use serde::Serialize;

use crate::domain::Scalar;
use crate::error::{KernelError, Result};
use crate::kernel::KernelExpr;
use crate::linalg::CMatrix;
use crate::series::SeriesKernel;

/// Largest depth for which support intervals are enumerated.
pub const MAX_SUPPORT_DEPTH: usize = 20;

/// Recursion depth guard for function and kernel iterates.
pub const MAX_TRANSFORM_DEPTH: usize = 60;

/// An argument the transform can be evaluated at.
trait Coordinate: Copy {
    fn in_unit(self) -> bool;
    /// `3x`
    fn expand_left(self) -> Self;
    /// `3x - 2`
    fn expand_right(self) -> Self;
    fn value(self) -> f64;
}

impl Coordinate for f64 {
    fn in_unit(self) -> bool {
        (0.0..=1.0).contains(&self)
    }
    fn expand_left(self) -> Self {
        3.0 * self
    }
    fn expand_right(self) -> Self {
        3.0 * self - 2.0
    }
    fn value(self) -> f64 {
        self
    }
}

/// Exact point `k / 3^level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Triadic {
    pub k: i64,
    pub level: u32,
}

impl Triadic {
    /// `r` as `k / 3^level`, if its reduced denominator is a power of three.
    pub fn from_ratio(r: Ratio<u64>) -> Option<Triadic> {
        let mut d = *r.denom();
        let mut level = 0;
        while d % 3 == 0 {
            d /= 3;
            level += 1;
        }
        (d == 1).then(|| Triadic {
            k: *r.numer() as i64,
            level,
        })
    }
}

impl Coordinate for Triadic {
    fn in_unit(self) -> bool {
        self.k >= 0 && self.k <= 3i64.pow(self.level)
    }
    fn expand_left(self) -> Self {
        if self.level == 0 {
            Triadic { k: 3 * self.k, level: 0 }
        } else {
            Triadic { k: self.k, level: self.level - 1 }
        }
    }
    fn expand_right(self) -> Self {
        if self.level == 0 {
            Triadic { k: 3 * self.k - 2, level: 0 }
        } else {
            Triadic {
                k: self.k - 2 * 3i64.pow(self.level - 1),
                level: self.level - 1,
            }
        }
    }
    fn value(self) -> f64 {
        self.k as f64 / 3f64.powi(self.level as i32)
    }
}

/// Arguments at which `T^depth f(x)` samples `f`, one per surviving branch
/// of the recursion. Branches leaving `[0, 1]` contribute literal zeros:
/// both `3x` and `3x - 2` stay outside once `x` is outside.
fn leaves<C: Coordinate>(depth: usize, x: C, out: &mut Vec<f64>) {
    if !x.in_unit() {
        return;
    }
    if depth == 0 {
        out.push(x.value());
        return;
    }
    leaves(depth - 1, x.expand_left(), out);
    leaves(depth - 1, x.expand_right(), out);
}

/// A function on `[0, 1]`, zero-extended to the line, and a transform depth.
#[derive(Clone)]
pub struct IfsFunction {
    base: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    depth: usize,
}

impl fmt::Debug for IfsFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IfsFunction").field("depth", &self.depth).finish_non_exhaustive()
    }
}

impl IfsFunction {
    pub fn new<F>(base: F, depth: usize) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if depth > MAX_TRANSFORM_DEPTH {
            return Err(KernelError::DepthOverflow(depth, MAX_TRANSFORM_DEPTH));
        }
        Ok(IfsFunction {
            base: Arc::new(base),
            depth,
        })
    }

    /// Indicator of `[0, 1]`.
    pub fn unit(depth: usize) -> Result<Self> {
        IfsFunction::new(|_| 1.0, depth)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn with_depth(&self, depth: usize) -> Result<Self> {
        if depth > MAX_TRANSFORM_DEPTH {
            return Err(KernelError::DepthOverflow(depth, MAX_TRANSFORM_DEPTH));
        }
        Ok(IfsFunction {
            base: Arc::clone(&self.base),
            depth,
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let mut pts = Vec::new();
        leaves(self.depth, x, &mut pts);
        pts.into_iter().map(|p| (self.base)(p)).sum()
    }

    /// Evaluation at the exact triadic point `k / 3^level`.
    pub fn eval_triadic(&self, x: Triadic) -> f64 {
        let mut pts = Vec::new();
        leaves(self.depth, x, &mut pts);
        pts.into_iter().map(|p| (self.base)(p)).sum()
    }
}

/// `T^depth f(x)`.
pub fn ifs_eval(f: &IfsFunction, x: f64) -> f64 {
    f.eval(x)
}

/// Closed interval with exact endpoints in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct CantorInterval {
    pub lo: Ratio<u64>,
    pub hi: Ratio<u64>,
}

impl CantorInterval {
    pub fn length(&self) -> Ratio<u64> {
        self.hi - self.lo
    }

    pub fn lo_f64(&self) -> f64 {
        *self.lo.numer() as f64 / *self.lo.denom() as f64
    }

    pub fn hi_f64(&self) -> f64 {
        *self.hi.numer() as f64 / *self.hi.denom() as f64
    }
}

impl Serialize for CantorInterval {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CantorInterval", 4)?;
        st.serialize_field("lo", &self.lo_f64())?;
        st.serialize_field("hi", &self.hi_f64())?;
        st.serialize_field("lo_exact", &format!("{}/{}", self.lo.numer(), self.lo.denom()))?;
        st.serialize_field("hi_exact", &format!("{}/{}", self.hi.numer(), self.hi.denom()))?;
        st.end()
    }
}

/// The `2^depth` intervals of `C_depth`, sorted, built from
/// `C_n = τ₁(C_{n-1}) ∪ τ₂(C_{n-1})` with `τ₁(x) = x/3`, `τ₂(x) = (x+2)/3`.
pub fn support_intervals(depth: usize) -> Result<Vec<CantorInterval>> {
    if depth > MAX_SUPPORT_DEPTH {
        return Err(KernelError::DepthOverflow(depth, MAX_SUPPORT_DEPTH));
    }
    // left endpoints as numerators over 3^level
    let mut lefts: Vec<u64> = vec![0];
    for level in 1..=depth {
        let shift = 2 * 3u64.pow(level as u32 - 1);
        let mut next = Vec::with_capacity(lefts.len() * 2);
        next.extend(lefts.iter().copied());
        next.extend(lefts.iter().map(|k| k + shift));
        lefts = next;
    }
    lefts.sort_unstable();
    let den = 3u64.pow(depth as u32);
    Ok(lefts
        .into_iter()
        .map(|k| CantorInterval {
            lo: Ratio::new(k, den),
            hi: Ratio::new(k + 1, den),
        })
        .collect())
}

/// Exact total length `(2/3)^depth` of `C_depth`.
pub fn support_measure(depth: usize) -> Result<Ratio<u64>> {
    if depth > MAX_SUPPORT_DEPTH {
        return Err(KernelError::DepthOverflow(depth, MAX_SUPPORT_DEPTH));
    }
    Ok(Ratio::new(2u64.pow(depth as u32), 3u64.pow(depth as u32)))
}

/// Exact membership of the binary value `x` in `C_depth`: the first `depth`
/// ternary digits can be chosen in `{0, 2}`, endpoints included.
///
/// Note that `2.0 / 3.0` rounds below 2/3 and is therefore not in `C_1`;
/// use [`cantor_member_exact`] for rational endpoints.
pub fn cantor_member(x: f64, depth: usize) -> bool {
    if !(0.0..=1.0).contains(&x) {
        return false;
    }
    if x == 0.0 {
        return true;
    }
    let (mantissa, exponent, _) = Float::integer_decode(x);
    let (num, den) = if exponent >= 0 {
        (BigUint::from(mantissa) << exponent as usize, BigUint::one())
    } else {
        (BigUint::from(mantissa), BigUint::one() << (-exponent) as usize)
    };
    member_fraction(num, den, depth)
}

/// Membership of the rational `x` in `C_depth`.
pub fn cantor_member_exact(x: Ratio<u64>, depth: usize) -> bool {
    if x > Ratio::one() {
        return false;
    }
    member_fraction(BigUint::from(*x.numer()), BigUint::from(*x.denom()), depth)
}

fn member_fraction(mut num: BigUint, den: BigUint, depth: usize) -> bool {
    let two_den = &den << 1;
    for _ in 0..depth {
        let y = &num * 3u32;
        if y <= den {
            num = y;
        } else if y >= two_den {
            num = y - &two_den;
        } else {
            return false;
        }
    }
    true
}

/// Kernel `K_n(x, y) = Σ_{i < N} T^n f_i(x) T^n f_i(y)` for the frame
/// `f_i(t) = √a_i t^i` of a series kernel, restricted to `[0, 1]` and
/// zero-extended.
#[derive(Debug, Clone, PartialEq)]
pub struct IfsKernel {
    base: SeriesKernel,
    depth: usize,
    truncation: usize,
}

impl IfsKernel {
    pub fn new(base: SeriesKernel, depth: usize, truncation: usize) -> Result<Self> {
        if truncation == 0 {
            return Err(KernelError::InvalidArgument("truncation must be >= 1".into()));
        }
        if depth > MAX_TRANSFORM_DEPTH {
            return Err(KernelError::DepthOverflow(depth, MAX_TRANSFORM_DEPTH));
        }
        Ok(IfsKernel {
            base,
            depth,
            truncation,
        })
    }

    pub fn base(&self) -> &SeriesKernel {
        &self.base
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    fn sqrt_coeffs(&self) -> Vec<f64> {
        self.base
            .coefficients()
            .coeffs(self.truncation)
            .into_iter()
            .map(f64::sqrt)
            .collect()
    }

    /// Frame values `(T^depth f_i(x))_{i < N}`.
    pub fn frame_values(&self, x: f64) -> Vec<f64> {
        frame_values_at(&self.sqrt_coeffs(), self.depth, x)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let w = self.sqrt_coeffs();
        let fx = frame_values_at(&w, self.depth, x);
        let fy = frame_values_at(&w, self.depth, y);
        fx.iter().zip(&fy).map(|(a, b)| a * b).sum()
    }

    /// Frame values at the exact point `x`. Stage endpoints such as `7/9`
    /// are not representable in binary, and rounding in `3x - 2` can move
    /// them out of `[0, 1]`.
    pub fn frame_values_triadic(&self, x: Triadic) -> Vec<f64> {
        frame_values_at(&self.sqrt_coeffs(), self.depth, x)
    }

    pub fn eval_triadic(&self, x: Triadic, y: Triadic) -> f64 {
        let w = self.sqrt_coeffs();
        let fx = frame_values_at(&w, self.depth, x);
        let fy = frame_values_at(&w, self.depth, y);
        fx.iter().zip(&fy).map(|(a, b)| a * b).sum()
    }

    /// Gram matrix at exact points.
    pub fn gram_triadic(&self, pts: &[Triadic]) -> CMatrix {
        let w = self.sqrt_coeffs();
        let frames: Vec<Vec<f64>> = pts.iter().map(|&x| frame_values_at(&w, self.depth, x)).collect();
        CMatrix::from_fn(pts.len(), pts.len(), |i, j| {
            Scalar::new(frames[i].iter().zip(&frames[j]).map(|(a, b)| a * b).sum(), 0.0)
        })
    }
}

fn frame_values_at<C: Coordinate>(sqrt_a: &[f64], depth: usize, x: C) -> Vec<f64> {
    let mut pts = Vec::new();
    leaves(depth, x, &mut pts);
    let mut out = vec![0.0; sqrt_a.len()];
    for p in pts {
        let mut pow = 1.0;
        for (o, w) in out.iter_mut().zip(sqrt_a) {
            *o += w * pow;
            pow *= p;
        }
    }
    out
}

/// `K_depth` as an evaluable kernel expression.
pub fn ifs_kernel(k: &SeriesKernel, depth: usize, truncation: usize) -> Result<KernelExpr> {
    Ok(KernelExpr::Ifs(IfsKernel::new(k.clone(), depth, truncation)?))
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub depth: usize,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares `(T K_depth)(x, y)`, with `T` applied frame-wise
/// (`Σ_i T g_i(x) T g_i(y)` for `g_i = T^depth f_i`), against `K_{depth+1}`
/// at exact points.
pub fn ifs_invariance_check(
    k: &SeriesKernel,
    depth: usize,
    pts: &[Triadic],
    tol: f64,
    truncation: usize,
) -> Result<InvarianceReport> {
    let kd = IfsKernel::new(k.clone(), depth, truncation)?;
    let next = IfsKernel::new(k.clone(), depth + 1, truncation)?;
    let w = kd.sqrt_coeffs();
    let transformed: Vec<Vec<f64>> = pts
        .iter()
        .map(|&x| {
            let left = frame_values_at(&w, depth, x.expand_left());
            let right = frame_values_at(&w, depth, x.expand_right());
            left.iter().zip(&right).map(|(a, b)| a + b).collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for (i, &x) in pts.iter().enumerate() {
        for (j, &y) in pts.iter().enumerate() {
            let lhs: f64 = transformed[i]
                .iter()
                .zip(&transformed[j])
                .map(|(a, b)| a * b)
                .sum();
            worst = worst.max((lhs - next.eval_triadic(x, y)).abs());
        }
    }
    Ok(InvarianceReport {
        depth,
        max_deviation: worst,
        tolerance: tol,
        passed: worst <= tol,
    })
}

/// Points `k / 3^level`, `k = 0..=3^level`, on the closed unit interval.
pub fn triadic_grid(level: u32) -> Vec<Triadic> {
    (0..=3i64.pow(level)).map(|k| Triadic { k, level }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_iterates() {
        let g1 = IfsFunction::unit(1).unwrap();
        assert_eq!(ifs_eval(&g1, 0.2), 1.0);
        assert_eq!(ifs_eval(&g1, 0.5), 0.0);
        for n in 0..12 {
            assert_eq!(ifs_eval(&IfsFunction::unit(n).unwrap(), 0.0), 1.0);
        }
        assert_eq!(ifs_eval(&g1, -0.1), 0.0);
        assert_eq!(ifs_eval(&g1, 1.5), 0.0);
    }

    #[test]
    fn identity_base_at_depth_one() {
        let f = IfsFunction::new(|t| t, 1).unwrap();
        // base(2.4) is zero-extended away, base(0.4) survives
        let by_hand = 0.0 + (3.0 * 0.8 - 2.0);
        assert_eq!(ifs_eval(&f, 0.8), by_hand);
    }

    #[test]
    fn support_interval_examples() {
        let d0 = support_intervals(0).unwrap();
        assert_eq!(d0, vec![CantorInterval { lo: Ratio::new(0, 1), hi: Ratio::new(1, 1) }]);
        let d1 = support_intervals(1).unwrap();
        assert_eq!(d1[0].hi, Ratio::new(1, 3));
        assert_eq!(d1[1].lo, Ratio::new(2, 3));
        assert!(support_intervals(MAX_SUPPORT_DEPTH + 1).is_err());
    }

    #[test]
    fn depth_three_matches_digit_oracle() {
        // oracle: left endpoints are Σ d_j 3^{-j} with digits d_j in {0, 2}
        let mut oracle = Vec::new();
        for mask in 0..8u64 {
            let mut num = 0;
            for j in 0..3 {
                let digit = if mask & (1 << j) != 0 { 2 } else { 0 };
                num += digit * 3u64.pow(2 - j);
            }
            oracle.push(num);
        }
        oracle.sort_unstable();
        let ints = support_intervals(3).unwrap();
        assert_eq!(ints.len(), 8);
        for (iv, num) in ints.iter().zip(oracle) {
            assert_eq!(iv.lo, Ratio::new(num, 27));
            assert_eq!(iv.length(), Ratio::new(1, 27));
        }
    }

    #[test]
    fn membership_examples() {
        for d in 1..15 {
            assert!(!cantor_member(0.5, d));
            assert!(cantor_member_exact(Ratio::new(2, 3), d));
            assert!(cantor_member(0.25, d));
            assert!(cantor_member(1.0, d));
            assert!(cantor_member(0.0, d));
        }
        assert!(!cantor_member(1.2, 0));
    }

    #[test]
    fn rounded_two_thirds_falls_in_the_gap() {
        assert!(cantor_member(2.0 / 3.0, 0));
        assert!(!cantor_member(2.0 / 3.0, 1));
        assert!(cantor_member(1.0 / 3.0, 30));
        assert!(cantor_member_exact(Ratio::new(20, 27), 3));
        assert!(!cantor_member_exact(Ratio::new(4, 9), 2));
    }

    #[test]
    fn kernel_zero_off_support() {
        let k = ifs_kernel(&SeriesKernel::inverse_power(1).unwrap(), 2, 32).unwrap();
        let KernelExpr::Ifs(k) = k else { unreachable!() };
        for y in [0.0, 0.1, 0.7, 1.0] {
            assert_eq!(k.eval(0.5, y), 0.0);
        }
    }

    #[test]
    fn depth_zero_agrees_with_base() {
        let base = SeriesKernel::inverse_power(1).unwrap();
        let k = IfsKernel::new(base.clone(), 0, 200).unwrap();
        let exact = 1.0 / (1.0 - 0.21);
        let bound = base.truncation_bound(0.7, 200).unwrap();
        assert!((k.eval(0.3, 0.7) - exact).abs() <= bound + 1e-15);
    }

    #[test]
    fn invariance_at_endpoints() {
        let base = SeriesKernel::inverse_power(1).unwrap();
        let rep = ifs_invariance_check(&base, 0, &triadic_grid(1), 1e-9, 64).unwrap();
        assert!(rep.passed, "{rep:?}");
    }

    #[test]
    fn endpoint_rounding_is_avoided() {
        let k = IfsKernel::new(SeriesKernel::szego(), 2, 64).unwrap();
        let seven_ninths = Triadic { k: 7, level: 2 };
        assert_eq!(Triadic::from_ratio(Ratio::new(7, 9)), Some(seven_ninths));
        assert_eq!(Triadic::from_ratio(Ratio::new(1, 2)), None);
        // 7/9 leaves at 1 only, where every frame function is √a_i
        assert_eq!(k.eval_triadic(seven_ninths, Triadic { k: 0, level: 0 }), 1.0);
    }

    #[test]
    fn transformed_frame_is_square_summable() {
        let base = SeriesKernel::inverse_power(1).unwrap();
        let k0 = IfsKernel::new(base.clone(), 0, 64).unwrap();
        let k1 = IfsKernel::new(base, 1, 64).unwrap();
        for x in [0.05, 0.3, 0.7, 0.95] {
            let lhs: f64 = k1.frame_values(x).iter().map(|v| v * v).sum();
            let rhs: f64 = k0.frame_values(3.0 * x).iter().map(|v| v * v).sum::<f64>()
                + k0.frame_values(3.0 * x - 2.0).iter().map(|v| v * v).sum::<f64>();
            assert!(lhs <= rhs + 1e-12 && lhs.is_finite());
        }
    }

    #[test]
    fn triadic_evaluation_is_exact_at_interval_ends() {
        let g = IfsFunction::unit(1).unwrap();
        assert_eq!(g.eval_triadic(Triadic { k: 1, level: 1 }), 1.0);
        assert_eq!(g.eval_triadic(Triadic { k: 2, level: 1 }), 1.0);
        assert_eq!(g.eval_triadic(Triadic { k: 4, level: 2 }), 0.0);
    }
}
