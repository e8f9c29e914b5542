//! Flat key-value experiment parameters, the point-set grammar and kernel
//! names.

use std::path::Path;

use featurespace::sampling::{disk_spiral, interval_midpoints, triadic};
use featurespace::{Domain, KernelExpr, PointSet, Scalar, SeriesKernel};
use serde_json::{Map, Value};

use crate::HarnessError;

/// Every key an experiment may read. Anything else is a config error.
pub const KNOWN_KEYS: &[&str] = &[
    "kernel", "against", "points", "tol", "truncation", "nmax", "nterms", "family", "feature", "M",
    "seed", "phi", "depths", "grid", "level", "degree", "count", "terms", "expect", "trials",
];

type Res<T> = std::result::Result<T, HarnessError>;

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Config(msg.into())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params {
    map: Map<String, Value>,
}

impl Params {
    pub fn new() -> Self {
        Params::default()
    }

    /// Reads a JSON object from `path`.
    pub fn from_file(path: &Path) -> Res<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| bad(format!("{}: {e}", path.display())))?;
        match v {
            Value::Object(map) => Params::from_map(map),
            _ => Err(bad("config file must hold a JSON object")),
        }
    }

    pub fn from_map(map: Map<String, Value>) -> Res<Self> {
        let mut p = Params::new();
        for (k, v) in map {
            p.set(&k, v)?;
        }
        Ok(p)
    }

    pub fn set(&mut self, key: &str, value: Value) -> Res<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(bad(format!("unknown parameter `{key}`")));
        }
        self.map.insert(key.to_string(), value);
        Ok(())
    }

    /// Values in `other` win.
    pub fn merged(mut self, other: Params) -> Self {
        self.map.extend(other.map);
        self
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.map.get(key)
    }

    pub fn as_json(&self) -> Value {
        Value::Object(self.map.clone())
    }

    pub fn string(&self, key: &str, default: &str) -> Res<String> {
        match self.map.get(key) {
            None => Ok(default.to_string()),
            Some(Value::String(s)) => Ok(s.clone()),
            Some(v) => Err(bad(format!("`{key}` must be a string, got {v}"))),
        }
    }

    pub fn f64(&self, key: &str, default: f64) -> Res<f64> {
        let x = match self.map.get(key) {
            None => return Ok(default),
            Some(Value::Number(n)) => n.as_f64(),
            Some(Value::String(s)) => s.trim().parse().ok(),
            Some(_) => None,
        };
        match x {
            Some(x) if x.is_finite() => Ok(x),
            _ => Err(bad(format!("`{key}` must be a finite number"))),
        }
    }

    pub fn u64(&self, key: &str, default: u64) -> Res<u64> {
        let x = match self.map.get(key) {
            None => return Ok(default),
            Some(Value::Number(n)) => n.as_u64(),
            Some(Value::String(s)) => s.trim().parse().ok(),
            Some(_) => None,
        };
        x.ok_or_else(|| bad(format!("`{key}` must be a nonnegative integer")))
    }

    pub fn usize(&self, key: &str, default: usize) -> Res<usize> {
        self.u64(key, default as u64).map(|x| x as usize)
    }

    /// `"a..b"` (inclusive) or a single integer.
    pub fn range(&self, key: &str, default: (usize, usize)) -> Res<(usize, usize)> {
        let s = match self.map.get(key) {
            None => return Ok(default),
            Some(Value::String(s)) => s.clone(),
            Some(Value::Number(n)) => n.to_string(),
            Some(v) => return Err(bad(format!("`{key}` must look like 0..5, got {v}"))),
        };
        let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| bad(format!("bad range `{s}`")));
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
            None => {
                let x = parse(&s)?;
                (x, x)
            }
        };
        if lo > hi {
            return Err(bad(format!("empty range `{s}`")));
        }
        Ok((lo, hi))
    }

    /// Kernel given by name or as a JSON expression tree.
    pub fn kernel(&self, key: &str, default: &str) -> Res<KernelExpr> {
        match self.map.get(key) {
            None => parse_kernel(default),
            Some(Value::String(s)) => parse_kernel(s),
            Some(v @ Value::Object(_)) => KernelExpr::from_json(v).map_err(|e| bad(e.to_string())),
            Some(v) => Err(bad(format!("`{key}` must be a kernel name or object, got {v}"))),
        }
    }

    pub fn series(&self, key: &str, default: &str) -> Res<SeriesKernel> {
        self.kernel(key, default)?
            .series_view()
            .ok_or_else(|| bad(format!("`{key}` must have a power-series form")))
    }

    pub fn points(&self, key: &str, default: &str, domain: Domain) -> Res<PointSet> {
        match self.map.get(key) {
            None => parse_points(default, domain),
            Some(Value::String(s)) => parse_points(s, domain),
            Some(v @ Value::Array(_)) => parse_points(&format!("explicit:{v}"), domain),
            Some(v) => Err(bad(format!("`{key}` must be a point-set spec, got {v}"))),
        }
    }
}

/// Kernel names: `szego`, `bergman`, `bargmann`, `halfplane-cauchy`,
/// `constant:c`, `inverse-power:n`, `inverse-factorial`; combined with `+`,
/// `*` and `^n` (no parentheses).
pub fn parse_kernel(spec: &str) -> Res<KernelExpr> {
    let spec = spec.trim();
    if spec.contains('+') {
        let parts = spec.split('+').map(parse_kernel).collect::<Res<Vec<_>>>()?;
        return Ok(KernelExpr::Sum(parts));
    }
    if let Some((a, b)) = spec.split_once('*') {
        return Ok(KernelExpr::Product(
            Box::new(parse_kernel(a)?),
            Box::new(parse_kernel(b)?),
        ));
    }
    if let Some((a, n)) = spec.rsplit_once('^') {
        let n: u32 = n.trim().parse().map_err(|_| bad(format!("bad exponent in `{spec}`")))?;
        return featurespace::power(&parse_kernel(a)?, n).map_err(|e| bad(e.to_string()));
    }
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let num = |what: &str| -> Res<f64> {
        arg.and_then(|a| a.parse().ok())
            .ok_or_else(|| bad(format!("`{name}` needs a numeric {what}")))
    };
    Ok(match name {
        "szego" => KernelExpr::szego(),
        "bergman" => KernelExpr::bergman(),
        "bargmann" => KernelExpr::bargmann(),
        "halfplane-cauchy" => featurespace::Builtin::HalfPlaneCauchy.into(),
        "constant" => KernelExpr::constant(num("value")?),
        "inverse-power" => {
            let n = num("order")?;
            if n < 1.0 || n.fract() != 0.0 {
                return Err(bad("inverse-power order must be a positive integer"));
            }
            SeriesKernel::new(featurespace::Coefficients::rising(n as u32), featurespace::VariableKind::ComplexSesquilinear)
                .map_err(|e| bad(e.to_string()))?
                .into()
        }
        "inverse-factorial" => SeriesKernel::bargmann().into(),
        other => return Err(bad(format!("unknown kernel `{other}`"))),
    })
}

/// `disk:N:rR`, `interval:N:a:b`, `triadic:depth`, `explicit:[…]`.
/// Explicit entries are numbers or `[re, im]` pairs.
pub fn parse_points(spec: &str, domain: Domain) -> Res<PointSet> {
    let spec = spec.trim();
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| bad(format!("point spec `{spec}` lacks a kind")))?;
    let err = |e: featurespace::KernelError| bad(format!("points `{spec}`: {e}"));
    let int = |t: &str| -> Res<usize> { t.parse().map_err(|_| bad(format!("bad count in `{spec}`"))) };
    let real = |t: &str| -> Res<f64> {
        t.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| bad(format!("bad number in `{spec}`")))
    };
    match kind {
        "disk" => {
            let (n, r) = rest
                .split_once(':')
                .ok_or_else(|| bad(format!("expected disk:N:rR, got `{spec}`")))?;
            let r = real(r.strip_prefix('r').unwrap_or(r))?;
            disk_spiral(int(n)?, r, 0.0, domain).map_err(err)
        }
        "interval" => {
            let parts: Vec<&str> = rest.split(':').collect();
            if parts.len() != 3 {
                return Err(bad(format!("expected interval:N:a:b, got `{spec}`")));
            }
            interval_midpoints(int(parts[0])?, real(parts[1])?, real(parts[2])?, domain).map_err(err)
        }
        "triadic" => triadic(int(rest)? as u32).map_err(err),
        "explicit" => {
            let v: Value = serde_json::from_str(rest).map_err(|e| bad(format!("`{spec}`: {e}")))?;
            let items = v.as_array().ok_or_else(|| bad("explicit points must be a list"))?;
            let values = items
                .iter()
                .map(|it| match it {
                    Value::Number(n) => n.as_f64().map(|x| Scalar::new(x, 0.0)),
                    Value::Array(p) if p.len() == 2 => {
                        Some(Scalar::new(p[0].as_f64()?, p[1].as_f64()?))
                    }
                    _ => None,
                })
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| bad(format!("bad explicit point in `{spec}`")))?;
            PointSet::from_values(values, domain).map_err(err)
        }
        other => Err(bad(format!("unknown point kind `{other}`"))),
    }
}
