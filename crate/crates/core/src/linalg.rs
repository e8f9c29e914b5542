//! Dense Hermitian helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::domain::Scalar;

pub type CMatrix = DMatrix<Scalar>;
pub type CVector = DVector<Scalar>;

/// Relative singular/eigen value floor used by every pseudoinverse here.
pub const RANK_FLOOR: f64 = 1e-12;

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest `|m_ij - conj(m_ji)|`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` belongs to `values[k]`.
    pub vectors: CMatrix,
}

/// Full eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> HermitianEigen {
    let n = m.nrows();
    // symmetrize exactly so the solver sees a Hermitian input
    let sym = CMatrix::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, c| eig.eigenvectors[(i, order[c])]);
    HermitianEigen { values, vectors }
}

/// `c* G c`, real part.
pub fn quadratic_form(g: &CMatrix, c: &CVector) -> f64 {
    (c.adjoint() * g * c)[(0, 0)].re
}

/// Moore–Penrose pseudoinverse, dropping singular values below
/// `RANK_FLOOR · σ_max`. Returns the inverse and the retained rank.
pub fn pseudo_inverse(m: &CMatrix) -> (CMatrix, usize) {
    let svd = m.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = RANK_FLOOR * sigma_max;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let mut inv = CMatrix::zeros(m.ncols(), m.nrows());
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            rank += 1;
            let vk = v_t.row(k).adjoint();
            let uk = u.column(k).adjoint();
            inv += (vk * uk) * Scalar::new(1.0 / s, 0.0);
        }
    }
    (inv, rank)
}

pub fn to_nested(m: &CMatrix) -> Vec<Vec<Scalar>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Scalar {
        Scalar::new(x, 0.0)
    }

    #[test]
    fn eigen_sorted_ascending() {
        let m = CMatrix::from_row_slice(2, 2, &[r(1.0), r(2.0), r(2.0), r(1.0)]);
        let e = hermitian_eigen(&m);
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
        let v = e.vectors.column(0).into_owned();
        assert!((quadratic_form(&m, &v) + 1.0).abs() < 1e-14);
    }

    #[test]
    fn complex_hermitian_eigen() {
        let i = Scalar::new(0.0, 1.0);
        let m = CMatrix::from_row_slice(2, 2, &[r(2.0), i, -i, r(2.0)]);
        let e = hermitian_eigen(&m);
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn pinv_of_rank_one() {
        let m = CMatrix::from_row_slice(2, 2, &[r(1.0), r(1.0), r(1.0), r(1.0)]);
        let (p, rank) = pseudo_inverse(&m);
        assert_eq!(rank, 1);
        for z in p.iter() {
            assert!((z.re - 0.25).abs() < 1e-15);
        }
    }
}
