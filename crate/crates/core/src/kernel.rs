//! Kernel expressions: builtins, series kernels and their combinations.
//!
//! Conventions: kernels are linear in the first argument and conjugate-linear
//! in the second, `K(z, w) = Σ a_k z^k w̄^k`, and Hilbert-space inner
//! products are linear in the first slot. Sections are `K_w = K(·, w)`, so
//! `⟨f, K_x⟩ = f(x)` and `‖Σ c_i K_{x_i}‖² = c* G c` with `G_ij = K(x_i, x_j)`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::algebra::{Frame, FrameFamily};
use crate::domain::{check_finite, Domain, DomainFamily, Point, Scalar};
use crate::error::{KernelError, Result};
use crate::fractal::IfsKernel;
use crate::series::{Coefficients, SeriesKernel, VariableKind, DEFAULT_TAIL_TOLERANCE};

/// Truncation used when no series leaf constrains the choice.
pub const DEFAULT_TRUNCATION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Builtin {
    /// `(1 - z w̄)^{-1}` on the unit disk.
    Szego,
    /// `(1 - z w̄)^{-2}` on the unit disk.
    Bergman,
    /// `exp(z w̄)` on the plane.
    Bargmann,
    /// `i / (2 (z - w̄))` on the upper half-plane; `1/(4 Im z)` on the diagonal.
    HalfPlaneCauchy,
    Constant { value: f64 },
}

impl Builtin {
    pub fn name(&self) -> &'static str {
        match self {
            Builtin::Szego => "szego",
            Builtin::Bergman => "bergman",
            Builtin::Bargmann => "bargmann",
            Builtin::HalfPlaneCauchy => "halfplane-cauchy",
            Builtin::Constant { .. } => "constant",
        }
    }

    pub fn domain(&self) -> Domain {
        match self {
            Builtin::Szego | Builtin::Bergman => Domain::UNIT_DISK,
            Builtin::Bargmann | Builtin::Constant { .. } => Domain::WholePlane,
            Builtin::HalfPlaneCauchy => Domain::UpperHalfPlane,
        }
    }

    pub fn eval(&self, z: Scalar, w: Scalar) -> Scalar {
        let one = Scalar::new(1.0, 0.0);
        let t = z * w.conj();
        match self {
            Builtin::Szego => one / (one - t),
            Builtin::Bergman => {
                let s = one / (one - t);
                s * s
            }
            Builtin::Bargmann => t.exp(),
            Builtin::HalfPlaneCauchy => Scalar::new(0.0, 1.0) / ((z - w.conj()) * 2.0),
            Builtin::Constant { value } => Scalar::new(*value, 0.0),
        }
    }

    /// Power-series form around 0, when the kernel has one.
    pub fn as_series(&self) -> Option<SeriesKernel> {
        match self {
            Builtin::Szego => Some(SeriesKernel::szego()),
            Builtin::Bergman => Some(SeriesKernel::bergman()),
            Builtin::Bargmann => Some(SeriesKernel::bargmann()),
            Builtin::Constant { value } if *value >= 0.0 => SeriesKernel::new(
                Coefficients::Finite { values: vec![*value] },
                VariableKind::ComplexSesquilinear,
            )
            .ok(),
            _ => None,
        }
    }

    fn magnitude_bound(&self, r: f64) -> Option<f64> {
        let q = r * r;
        match self {
            Builtin::Szego if q < 1.0 => Some(1.0 / (1.0 - q)),
            Builtin::Bergman if q < 1.0 => Some(1.0 / ((1.0 - q) * (1.0 - q))),
            Builtin::Bargmann => Some(q.exp()),
            Builtin::Constant { value } => Some(value.abs()),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelExpr {
    Builtin(Builtin),
    Series(SeriesKernel),
    Sum(Vec<KernelExpr>),
    Product(Box<KernelExpr>, Box<KernelExpr>),
    Power(Box<KernelExpr>, u32),
    Restriction(Box<KernelExpr>, Domain),
    Frame(Frame),
    Ifs(IfsKernel),
}

impl From<Builtin> for KernelExpr {
    fn from(b: Builtin) -> Self {
        KernelExpr::Builtin(b)
    }
}

impl From<SeriesKernel> for KernelExpr {
    fn from(s: SeriesKernel) -> Self {
        KernelExpr::Series(s)
    }
}

impl KernelExpr {
    pub fn szego() -> Self {
        Builtin::Szego.into()
    }

    pub fn bergman() -> Self {
        Builtin::Bergman.into()
    }

    pub fn bargmann() -> Self {
        Builtin::Bargmann.into()
    }

    pub fn constant(value: f64) -> Self {
        Builtin::Constant { value }.into()
    }

    pub(crate) fn family(&self) -> Result<DomainFamily> {
        let leaf = |d: Domain| Ok(d.family());
        match self {
            KernelExpr::Builtin(b) => leaf(b.domain()),
            KernelExpr::Series(s) => leaf(s.domain()),
            KernelExpr::Frame(f) => leaf(f.domain()),
            KernelExpr::Ifs(_) => leaf(Domain::UnitInterval),
            KernelExpr::Power(base, _) => base.family(),
            KernelExpr::Restriction(base, d) => meet(base.family()?, d.family()),
            KernelExpr::Product(a, b) => meet(a.family()?, b.family()?),
            KernelExpr::Sum(children) => children
                .iter()
                .try_fold(DomainFamily::Any, |acc, c| meet(acc, c.family()?)),
        }
    }

    /// Domain to tag sample points with: the first leaf domain that is not
    /// the whole plane.
    pub fn natural_domain(&self) -> Domain {
        let pick = |ds: Vec<Domain>| {
            ds.into_iter()
                .find(|d| *d != Domain::WholePlane)
                .unwrap_or(Domain::WholePlane)
        };
        match self {
            KernelExpr::Builtin(b) => b.domain(),
            KernelExpr::Series(s) => s.domain(),
            KernelExpr::Frame(f) => f.domain(),
            KernelExpr::Ifs(_) => Domain::UnitInterval,
            KernelExpr::Power(base, _) => base.natural_domain(),
            KernelExpr::Restriction(_, d) => *d,
            KernelExpr::Product(a, b) => pick(vec![a.natural_domain(), b.natural_domain()]),
            KernelExpr::Sum(children) => pick(children.iter().map(|c| c.natural_domain()).collect()),
        }
    }

    /// Checks that `p` is an admissible argument for every leaf.
    pub fn admits(&self, p: &Point) -> Result<()> {
        let z = p.value();
        let tagged = |d: Domain| -> Result<()> {
            if !p.domain().compatible_with(&d) {
                return Err(KernelError::DomainMismatch(format!(
                    "point tagged {} used with a kernel on {}",
                    p.domain(),
                    d
                )));
            }
            Ok(())
        };
        let inside = |d: Domain| -> Result<()> {
            tagged(d)?;
            if d.contains(z) {
                Ok(())
            } else {
                Err(KernelError::OutsideDomain {
                    value: format!("{z}"),
                    domain: d.to_string(),
                })
            }
        };
        match self {
            KernelExpr::Builtin(b) => inside(b.domain()),
            KernelExpr::Series(s) => {
                tagged(s.domain())?;
                s.admits(z)
            }
            KernelExpr::Frame(f) => inside(f.domain()),
            KernelExpr::Ifs(_) => {
                tagged(Domain::UnitInterval)?;
                if z.im == 0.0 {
                    Ok(())
                } else {
                    Err(KernelError::DomainMismatch(format!(
                        "fractal kernels take real points, got {z}"
                    )))
                }
            }
            KernelExpr::Power(base, _) => base.admits(p),
            KernelExpr::Restriction(base, d) => {
                inside(*d)?;
                base.admits(p)
            }
            KernelExpr::Product(a, b) => {
                a.admits(p)?;
                b.admits(p)
            }
            KernelExpr::Sum(children) => children.iter().try_for_each(|c| c.admits(p)),
        }
    }

    /// `K(x, y)` after validating both points.
    pub fn eval(&self, x: &Point, y: &Point, truncation: usize) -> Result<Scalar> {
        if truncation == 0 {
            return Err(KernelError::InvalidArgument("truncation must be >= 1".into()));
        }
        self.admits(x)?;
        self.admits(y)?;
        check_finite(self.eval_unchecked(x.value(), y.value(), truncation))
    }

    pub(crate) fn eval_unchecked(&self, x: Scalar, y: Scalar, n: usize) -> Scalar {
        match self {
            KernelExpr::Builtin(b) => b.eval(x, y),
            KernelExpr::Series(s) => s.eval_unchecked(x, y, n),
            KernelExpr::Frame(f) => f.eval(x, y),
            KernelExpr::Ifs(k) => Scalar::new(k.eval(x.re, y.re), 0.0),
            KernelExpr::Power(base, p) => base.eval_unchecked(x, y, n).powu(*p),
            KernelExpr::Restriction(base, _) => base.eval_unchecked(x, y, n),
            KernelExpr::Product(a, b) => a.eval_unchecked(x, y, n) * b.eval_unchecked(x, y, n),
            KernelExpr::Sum(children) => children
                .iter()
                .map(|c| c.eval_unchecked(x, y, n))
                .sum(),
        }
    }

    /// Exact power-series form `Σ a_k z^k w̄^k`, when the expression has one.
    pub fn series_view(&self) -> Option<SeriesKernel> {
        match self {
            KernelExpr::Builtin(b) => b.as_series(),
            KernelExpr::Series(s) => Some(s.clone()),
            KernelExpr::Restriction(base, _) => base.series_view(),
            KernelExpr::Product(a, b) => a.series_view()?.product(&b.series_view()?).ok(),
            KernelExpr::Power(base, p) => {
                let s = base.series_view()?;
                let mut acc = s.clone();
                for _ in 1..*p {
                    acc = acc.product(&s).ok()?;
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// Upper bound on `|K(x, y)|` over `|x|, |y| <= r`.
    pub fn magnitude_bound(&self, r: f64) -> Option<f64> {
        match self {
            KernelExpr::Builtin(b) => b.magnitude_bound(r),
            KernelExpr::Series(s) => s.coefficients().tail_bound(r * r, 0).ok(),
            KernelExpr::Frame(f) => f.magnitude_bound(r),
            KernelExpr::Ifs(_) => None,
            KernelExpr::Power(base, p) => base.magnitude_bound(r).map(|m| m.powi(*p as i32)),
            KernelExpr::Restriction(base, _) => base.magnitude_bound(r),
            KernelExpr::Product(a, b) => Some(a.magnitude_bound(r)? * b.magnitude_bound(r)?),
            KernelExpr::Sum(children) => children.iter().map(|c| c.magnitude_bound(r)).sum(),
        }
    }

    /// Upper bound on `|eval(x, y, n) - K(x, y)|` over `|x|, |y| <= r`.
    /// Closed-form nodes contribute zero; `None` when no bound is known.
    pub fn tail_bound(&self, r: f64, n: usize) -> Option<f64> {
        match self {
            KernelExpr::Builtin(_) => Some(0.0),
            KernelExpr::Series(s) => s.truncation_bound(r, n).ok(),
            KernelExpr::Frame(f) => f.tail_bound(r),
            KernelExpr::Ifs(_) => None,
            KernelExpr::Restriction(base, _) => base.tail_bound(r, n),
            KernelExpr::Sum(children) => children.iter().map(|c| c.tail_bound(r, n)).sum(),
            KernelExpr::Product(a, b) => {
                let (ea, eb) = (a.tail_bound(r, n)?, b.tail_bound(r, n)?);
                if ea == 0.0 && eb == 0.0 {
                    return Some(0.0);
                }
                let (ma, mb) = (a.magnitude_bound(r)?, b.magnitude_bound(r)?);
                Some(ea * mb + ma * eb + ea * eb)
            }
            KernelExpr::Power(base, p) => {
                let e = base.tail_bound(r, n)?;
                if e == 0.0 {
                    return Some(0.0);
                }
                let m = base.magnitude_bound(r)?;
                Some((m + e).powi(*p as i32) - m.powi(*p as i32))
            }
        }
    }

    /// Smallest truncation that brings [`Self::tail_bound`] below `tol` at
    /// modulus `r`. Closed-form expressions use their series form when they
    /// have one inside its radius, else [`DEFAULT_TRUNCATION`].
    pub fn auto_truncation(&self, r: f64, tol: f64) -> Result<usize> {
        let leaves = self.series_leaves();
        if leaves.is_empty() {
            // closed forms ignore the truncation; size it for their series
            // anyway so feature and process expansions are accurate
            return Ok(self
                .series_view()
                .and_then(|s| s.auto_truncation(r, tol).ok())
                .unwrap_or(DEFAULT_TRUNCATION));
        }
        let mut n = 1;
        for s in leaves {
            n = n.max(s.auto_truncation(r, tol)?);
        }
        // products need a little extra room over the per-leaf choice
        let mut tries = 0;
        while self.tail_bound(r, n).is_some_and(|b| b >= tol) && tries < 64 {
            n = n * 5 / 4 + 1;
            tries += 1;
        }
        Ok(n)
    }

    /// Default truncation for a sample with maximum modulus `r`.
    pub fn default_truncation(&self, r: f64) -> Result<usize> {
        self.auto_truncation(r, DEFAULT_TAIL_TOLERANCE)
    }

    fn series_leaves(&self) -> Vec<&SeriesKernel> {
        match self {
            KernelExpr::Series(s) => vec![s],
            KernelExpr::Builtin(_) | KernelExpr::Frame(_) | KernelExpr::Ifs(_) => vec![],
            KernelExpr::Power(b, _) | KernelExpr::Restriction(b, _) => b.series_leaves(),
            KernelExpr::Product(a, b) => {
                let mut v = a.series_leaves();
                v.extend(b.series_leaves());
                v
            }
            KernelExpr::Sum(children) => children.iter().flat_map(|c| c.series_leaves()).collect(),
        }
    }

    /// JSON expression tree `{node, name, params, children}`.
    pub fn to_json(&self) -> Value {
        match self {
            KernelExpr::Builtin(b) => {
                let params = match b {
                    Builtin::Constant { value } => json!({ "value": value }),
                    _ => json!({}),
                };
                json!({ "node": "builtin", "name": b.name(), "params": params, "children": [] })
            }
            KernelExpr::Series(s) => json!({
                "node": "series",
                "name": series_name(s.coefficients()),
                "params": {
                    "coefficients": s.coefficients(),
                    "variable": s.variable(),
                    "radius": radius_json(s.radius()),
                },
                "children": [],
            }),
            KernelExpr::Sum(children) => json!({
                "node": "sum",
                "params": {},
                "children": children.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            }),
            KernelExpr::Product(a, b) => json!({
                "node": "product", "params": {}, "children": [a.to_json(), b.to_json()],
            }),
            KernelExpr::Power(base, n) => json!({
                "node": "power", "params": { "n": n }, "children": [base.to_json()],
            }),
            KernelExpr::Restriction(base, d) => json!({
                "node": "restriction", "params": { "domain": d }, "children": [base.to_json()],
            }),
            KernelExpr::Frame(f) => {
                let family = match f.family() {
                    FrameFamily::Monomials(c) => json!({ "kind": "monomials", "coefficients": c }),
                    FrameFamily::Explicit(fs) => json!({ "kind": "explicit", "functions": fs }),
                };
                json!({
                    "node": "frame",
                    "params": { "truncation": f.truncation(), "domain": f.domain(), "family": family },
                    "children": [],
                })
            }
            KernelExpr::Ifs(k) => json!({
                "node": "ifs",
                "params": { "depth": k.depth(), "truncation": k.truncation() },
                "children": [KernelExpr::Series(k.base().clone()).to_json()],
            }),
        }
    }

    pub fn from_json(v: &Value) -> Result<Self> {
        let node = v
            .get("node")
            .and_then(Value::as_str)
            .ok_or_else(|| parse_err("missing \"node\""))?;
        let params = v.get("params").cloned().unwrap_or_else(|| json!({}));
        let children = v
            .get("children")
            .and_then(Value::as_array)
            .map(|cs| cs.iter().map(KernelExpr::from_json).collect::<Result<Vec<_>>>())
            .transpose()?
            .unwrap_or_default();
        let only_child = |children: Vec<KernelExpr>| -> Result<KernelExpr> {
            let mut it = children.into_iter();
            match (it.next(), it.next()) {
                (Some(c), None) => Ok(c),
                _ => Err(parse_err(&format!("{node} takes exactly one child"))),
            }
        };
        match node {
            "builtin" => {
                let name = v
                    .get("name")
                    .and_then(Value::as_str)
                    .ok_or_else(|| parse_err("builtin without name"))?;
                let b = match name {
                    "szego" => Builtin::Szego,
                    "bergman" => Builtin::Bergman,
                    "bargmann" => Builtin::Bargmann,
                    "halfplane-cauchy" => Builtin::HalfPlaneCauchy,
                    "constant" => Builtin::Constant {
                        value: params
                            .get("value")
                            .and_then(Value::as_f64)
                            .filter(|c| c.is_finite())
                            .ok_or_else(|| parse_err("constant needs a finite value"))?,
                    },
                    other => return Err(parse_err(&format!("unknown builtin {other:?}"))),
                };
                Ok(b.into())
            }
            "series" => {
                let coeffs: Coefficients = from_value(params.get("coefficients"))?;
                let variable: VariableKind = from_value(params.get("variable"))?;
                Ok(SeriesKernel::new(coeffs, variable)?.into())
            }
            "sum" => {
                if children.is_empty() {
                    return Err(parse_err("sum needs at least one child"));
                }
                Ok(KernelExpr::Sum(children))
            }
            "product" => {
                let mut it = children.into_iter();
                match (it.next(), it.next(), it.next()) {
                    (Some(a), Some(b), None) => Ok(KernelExpr::Product(Box::new(a), Box::new(b))),
                    _ => Err(parse_err("product takes exactly two children")),
                }
            }
            "power" => {
                let n = params
                    .get("n")
                    .and_then(Value::as_u64)
                    .filter(|&n| n >= 1 && n <= u32::MAX as u64)
                    .ok_or_else(|| parse_err("power needs n >= 1"))?;
                Ok(KernelExpr::Power(Box::new(only_child(children)?), n as u32))
            }
            "restriction" => {
                let d: Domain = from_value(params.get("domain"))?;
                Ok(KernelExpr::Restriction(Box::new(only_child(children)?), d))
            }
            "frame" => {
                let truncation = params
                    .get("truncation")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| parse_err("frame needs truncation"))?
                    as usize;
                let domain: Domain = from_value(params.get("domain"))?;
                let fam = params.get("family").ok_or_else(|| parse_err("frame needs family"))?;
                let family = match fam.get("kind").and_then(Value::as_str) {
                    Some("monomials") => FrameFamily::Monomials(from_value(fam.get("coefficients"))?),
                    Some("explicit") => FrameFamily::Explicit(from_value(fam.get("functions"))?),
                    _ => return Err(parse_err("unknown frame family")),
                };
                Ok(KernelExpr::Frame(Frame::new(family, truncation, domain)?))
            }
            "ifs" => {
                let depth = params
                    .get("depth")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| parse_err("ifs needs depth"))? as usize;
                let truncation = params
                    .get("truncation")
                    .and_then(Value::as_u64)
                    .ok_or_else(|| parse_err("ifs needs truncation"))?
                    as usize;
                match only_child(children)? {
                    KernelExpr::Series(s) => Ok(KernelExpr::Ifs(IfsKernel::new(s, depth, truncation)?)),
                    _ => Err(parse_err("ifs base must be a series node")),
                }
            }
            other => Err(parse_err(&format!("unknown node {other:?}"))),
        }
    }
}

fn meet(a: DomainFamily, b: DomainFamily) -> Result<DomainFamily> {
    if !a.meets(b) {
        return Err(KernelError::DomainMismatch(format!(
            "cannot combine kernels on {a:?} and {b:?} domains"
        )));
    }
    Ok(if a == DomainFamily::Any { b } else { a })
}

fn series_name(c: &Coefficients) -> String {
    match c {
        Coefficients::Geometric => "geometric".into(),
        Coefficients::RisingFactorial { n } => format!("inverse-power-{n}"),
        Coefficients::InverseFactorial => "exponential".into(),
        Coefficients::Finite { .. } => "finite".into(),
        Coefficients::Scaled { .. } => "scaled".into(),
        Coefficients::Convolution { .. } => "convolution".into(),
    }
}

fn radius_json(r: f64) -> Value {
    if r.is_finite() {
        json!(r)
    } else {
        json!("inf")
    }
}

fn parse_err(msg: &str) -> KernelError {
    KernelError::Parse(msg.to_string())
}

fn from_value<T: serde::de::DeserializeOwned>(v: Option<&Value>) -> Result<T> {
    let v = v.ok_or_else(|| parse_err("missing parameter"))?;
    serde_json::from_value(v.clone()).map_err(|e| parse_err(&e.to_string()))
}

/// `K(x, y)`; see [`KernelExpr::eval`].
pub fn eval(kernel: &KernelExpr, x: &Point, y: &Point, truncation: usize) -> Result<Scalar> {
    kernel.eval(x, y, truncation)
}
