//! Gram matrices, PSD certificates and their CSV/JSON forms.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::domain::{PointSet, Scalar};
use crate::error::{KernelError, Result};
use crate::kernel::KernelExpr;
use crate::linalg::{hermitian_defect, hermitian_eigen, max_abs, to_nested, CMatrix};

/// Default PSD tolerance; scaled by `1 + spectral radius`.
pub const DEFAULT_PSD_TOLERANCE: f64 = 1e-9;

/// Relative asymmetry accepted by [`psd_check`] before it refuses the input.
const HERMITIAN_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    entries: CMatrix,
    points: PointSet,
    kernel: KernelExpr,
    truncation: usize,
}

impl GramMatrix {
    pub fn entries(&self) -> &CMatrix {
        &self.entries
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn kernel(&self) -> &KernelExpr {
        &self.kernel
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn into_entries(self) -> CMatrix {
        self.entries
    }

    /// Row-major CSV with `re+imi` cells.
    pub fn to_csv(&self) -> String {
        matrix_to_csv(&self.entries)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "points": self.points.values().collect::<Vec<_>>(),
            "domain": self.points.domain(),
            "entries": to_nested(&self.entries),
            "kernel_descriptor": self.kernel.to_json(),
            "truncation": self.truncation,
        })
    }
}

/// Formats a scalar as `re+imi` (or `re-imi`).
pub fn format_cell(z: Scalar) -> String {
    let sign = if z.im.is_sign_negative() { '-' } else { '+' };
    format!("{:?}{}{:?}i", z.re, sign, z.im.abs())
}

pub fn parse_cell(s: &str) -> Result<Scalar> {
    let s = s.trim();
    let body = s
        .strip_suffix('i')
        .ok_or_else(|| KernelError::Parse(format!("cell {s:?} lacks imaginary suffix")))?;
    // the re/im separator is the last sign not belonging to an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| {
            (bytes[i] == b'+' || bytes[i] == b'-') && !matches!(bytes[i - 1], b'e' | b'E')
        })
        .ok_or_else(|| KernelError::Parse(format!("cell {s:?} is not re+imi")))?;
    let re: f64 = body[..split]
        .parse()
        .map_err(|_| KernelError::Parse(format!("bad real part in {s:?}")))?;
    let im: f64 = body[split..]
        .parse()
        .map_err(|_| KernelError::Parse(format!("bad imaginary part in {s:?}")))?;
    Ok(Scalar::new(re, im))
}

pub fn matrix_to_csv(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format_cell(m[(i, j)])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn matrix_from_csv(text: &str) -> Result<CMatrix> {
    let rows = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(parse_cell).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(KernelError::Parse("ragged CSV matrix".into()));
    }
    Ok(CMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

/// Assembles `G_ij = K(x_i, x_j)`: upper triangle computed, lower mirrored
/// by conjugation, diagonal forced real.
pub fn gram(kernel: &KernelExpr, pts: &PointSet, truncation: usize) -> Result<GramMatrix> {
    if truncation == 0 {
        return Err(KernelError::InvalidArgument("truncation must be >= 1".into()));
    }
    for p in pts.points() {
        kernel.admits(p)?;
    }
    let n = pts.len();
    let values: Vec<Scalar> = pts.values().collect();
    let rows: Vec<Vec<Scalar>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i..n)
                .map(|j| kernel.eval_unchecked(values[i], values[j], truncation))
                .collect()
        })
        .collect();
    let mut entries = CMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            let j = i + off;
            crate::domain::check_finite(v)?;
            if i == j {
                entries[(i, i)] = Scalar::new(v.re, 0.0);
            } else {
                entries[(i, j)] = v;
                entries[(j, i)] = v.conj();
            }
        }
    }
    Ok(GramMatrix {
        entries,
        points: pts.clone(),
        kernel: kernel.clone(),
        truncation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsdVerdict {
    Psd,
    NotPsd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdCertificate {
    pub verdict: PsdVerdict,
    pub min_eigenvalue: f64,
    pub spectral_radius: f64,
    pub tolerance: f64,
    /// Unit eigenvector of the smallest eigenvalue; `c* G c = min_eigenvalue`.
    pub witness: Vec<Scalar>,
}

impl PsdCertificate {
    pub fn is_psd(&self) -> bool {
        self.verdict == PsdVerdict::Psd
    }

    /// Threshold `-tol · (1 + ρ)` the minimum eigenvalue is compared with.
    pub fn threshold(&self) -> f64 {
        -self.tolerance * (1.0 + self.spectral_radius)
    }
}

/// Certifies a Gram matrix by full Hermitian eigendecomposition.
pub fn psd_check(g: &GramMatrix, tol: f64) -> Result<PsdCertificate> {
    psd_check_matrix(g.entries(), tol)
}

pub fn psd_check_matrix(m: &CMatrix, tol: f64) -> Result<PsdCertificate> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(KernelError::InvalidArgument(format!("tolerance {tol} must be > 0")));
    }
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(KernelError::InvalidArgument("expected a nonempty square matrix".into()));
    }
    let defect = hermitian_defect(m);
    if defect > HERMITIAN_SLACK * (1.0 + max_abs(m)) {
        return Err(KernelError::NotHermitian(defect));
    }
    let eig = hermitian_eigen(m);
    let min_eigenvalue = eig.values[0];
    let spectral_radius = eig.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let verdict = if min_eigenvalue >= -tol * (1.0 + spectral_radius) {
        PsdVerdict::Psd
    } else {
        PsdVerdict::NotPsd
    };
    Ok(PsdCertificate {
        verdict,
        min_eigenvalue,
        spectral_radius,
        tolerance: tol,
        witness: eig.vectors.column(0).iter().copied().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::series::SeriesKernel;

    fn r(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    #[test]
    fn identity_and_indefinite() {
        let id = CMatrix::identity(3, 3);
        let c = psd_check_matrix(&id, 1e-9).unwrap();
        assert!(c.is_psd());
        assert!((c.min_eigenvalue - 1.0).abs() < 1e-15);

        let m = CMatrix::from_row_slice(2, 2, &[r(1.0), r(2.0), r(2.0), r(1.0)]);
        let c = psd_check_matrix(&m, 1e-9).unwrap();
        assert_eq!(c.verdict, PsdVerdict::NotPsd);
        assert!((c.min_eigenvalue + 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_is_a_hard_error() {
        let m = CMatrix::from_row_slice(2, 2, &[r(1.0), r(2.0), r(0.0), r(1.0)]);
        assert!(matches!(psd_check_matrix(&m, 1e-9), Err(KernelError::NotHermitian(_))));
        assert!(psd_check_matrix(&CMatrix::identity(2, 2), 0.0).is_err());
    }

    #[test]
    fn two_point_cauchy_gram() {
        let k: KernelExpr = SeriesKernel::inverse_power(1).unwrap().into();
        let pts = PointSet::from_reals([0.0, 0.5], Domain::OPEN_UNIT_INTERVAL).unwrap();
        let g = gram(&k, &pts, 200).unwrap();
        let e = g.entries();
        assert_eq!(e[(0, 0)], r(1.0));
        assert_eq!(e[(0, 1)], r(1.0));
        assert!((e[(1, 1)].re - 4.0 / 3.0).abs() < 1e-15);
        assert!(psd_check(&g, 1e-9).unwrap().is_psd());
    }

    #[test]
    fn single_point_gram_is_real_nonnegative() {
        let pts = PointSet::from_values([Scalar::new(0.2, -0.4)], Domain::UNIT_DISK).unwrap();
        let g = gram(&KernelExpr::bergman(), &pts, 1).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.entries()[(0, 0)].im, 0.0);
        assert!(g.entries()[(0, 0)].re > 0.0);
    }

    #[test]
    fn cells_round_trip() {
        for z in [r(1.0), Scalar::new(-0.5, -1e-30), Scalar::new(1.5e300, 2.0), Scalar::new(0.1, -0.0)] {
            let back = parse_cell(&format_cell(z)).unwrap();
            assert_eq!(back, z);
            assert_eq!(back.im.is_sign_negative(), z.im.is_sign_negative());
        }
        assert!(parse_cell("1.0").is_err());
        assert!(parse_cell("abc+1i").is_err());
    }

    #[test]
    fn csv_round_trip() {
        let pts = PointSet::from_values(
            [Scalar::new(0.1, 0.2), Scalar::new(-0.3, 0.4), Scalar::new(0.5, -0.1)],
            Domain::UNIT_DISK,
        )
        .unwrap();
        let g = gram(&KernelExpr::szego(), &pts, 1).unwrap();
        let back = matrix_from_csv(&g.to_csv()).unwrap();
        assert_eq!(&back, g.entries());
        let j = g.to_json();
        assert_eq!(j["kernel_descriptor"]["name"], "szego");
        assert_eq!(j["entries"].as_array().unwrap().len(), 3);
    }
}
