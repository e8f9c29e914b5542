//! Library results against independently computed references.

use featurespace::fractal::support_intervals;
use featurespace::sampling::{disk_random, disk_spiral};
use featurespace::*;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type M = DMatrix<Scalar>;

fn c(re: f64, im: f64) -> Scalar {
    Scalar::new(re, im)
}

#[test]
fn gram_matches_naive_partial_sums() {
    let pts = disk_random(7, 0.85, 5, Domain::UNIT_DISK).unwrap();
    let s = SeriesKernel::new(Coefficients::rising(3), VariableKind::ComplexSesquilinear).unwrap();
    let g = gram(&s.clone().into(), &pts, 300).unwrap();
    let xs: Vec<Scalar> = pts.values().collect();
    for (i, x) in xs.iter().enumerate() {
        for (j, y) in xs.iter().enumerate() {
            // binom(k+2, 2) (x ȳ)^k, summed forward
            let mut acc = c(0.0, 0.0);
            for k in 0..300 {
                let a = ((k + 1) * (k + 2) / 2) as f64;
                acc += (x * y.conj()).powu(k as u32) * a;
            }
            let closed = (c(1.0, 0.0) - x * y.conj()).powi(-3);
            assert!((g.entries()[(i, j)] - acc).norm() < 1e-10 * acc.norm().max(1.0));
            assert!((acc - closed).norm() < 1e-9 * closed.norm());
        }
    }
}

#[test]
fn sum_norm_is_the_minimum_over_decompositions() {
    let pts = disk_spiral(5, 0.7, 0.4, Domain::UNIT_DISK).unwrap();
    let (k1, k2) = (KernelExpr::szego(), KernelExpr::bargmann());
    let g1 = gram(&k1, &pts, 100).unwrap().into_entries();
    let g2 = gram(&k2, &pts, 100).unwrap().into_entries();
    let f: Vec<Scalar> = (0..5).map(|i| c(1.0 - i as f64 * 0.3, 0.2 * i as f64)).collect();
    let fv = M::from_column_slice(5, 1, &f);
    let got = sum_rkhs_norm(&f, &pts, &k1, &k2, 100).unwrap().powi(2);

    // stationarity: c1 = c2 = λ with (G1 + G2) λ = F, solved by LU
    let lambda = (&g1 + &g2).lu().solve(&fv).unwrap();
    let kkt = ((lambda.adjoint() * &g1 * &lambda)[(0, 0)] + (lambda.adjoint() * &g2 * &lambda)[(0, 0)]).re;
    assert!((got - kkt).abs() < 1e-9 * kkt, "{got} vs {kkt}");

    // every other feasible split costs at least as much
    let g2_lu = g2.clone().lu();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let c1 = M::from_fn(5, 1, |_, _| c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
        let c2 = g2_lu.solve(&(&fv - &g1 * &c1)).unwrap();
        let cost = ((c1.adjoint() * &g1 * &c1)[(0, 0)] + (c2.adjoint() * &g2 * &c2)[(0, 0)]).re;
        assert!(cost >= got * (1.0 - 1e-9));
    }
}

#[test]
fn sampled_spectrum_matches_cholesky_pencil() {
    let pts = disk_spiral(10, 0.8, 0.0, Domain::UNIT_DISK).unwrap();
    let (k, l) = (KernelExpr::szego(), KernelExpr::bergman());
    let op = order_operator_sampled(&k, &l, &pts, 400).unwrap();
    let gk = gram(&k, &pts, 400).unwrap().into_entries();
    let gl = gram(&l, &pts, 400).unwrap().into_entries();
    let chol = gl.cholesky().unwrap();
    let linv = chol.l().try_inverse().unwrap();
    let pencil = &linv * gk * linv.adjoint();
    let mut want: Vec<f64> = pencil.symmetric_eigenvalues().iter().copied().collect();
    want.sort_by(f64::total_cmp);
    for (a, b) in op.eigenvalues.iter().zip(&want) {
        assert!((a - b).abs() < 1e-7, "{a} vs {b}");
    }
}

/// `[[A, -B], [B, A]]` for `H = A + iB`; positive definite iff `H` is.
fn real_embedding(h: &M) -> DMatrix<f64> {
    let n = h.nrows();
    DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

#[test]
fn psd_verdict_agrees_with_cholesky() {
    let pts = disk_random(8, 0.9, 1, Domain::UNIT_DISK).unwrap();
    let a = gram(&KernelExpr::bergman(), &pts, 400).unwrap().into_entries();
    let b = gram(&KernelExpr::szego(), &pts, 400).unwrap().into_entries();
    for (m, expect) in [(&a - &b, true), (&b - &a, false)] {
        let cert = featurespace::gram::psd_check_matrix(&m, 1e-9).unwrap();
        let shift = 1e-9 * (1.0 + cert.spectral_radius);
        let shifted = &m + M::identity(8, 8) * c(shift, 0.0);
        assert_eq!(cert.is_psd(), expect);
        assert_eq!(real_embedding(&shifted).cholesky().is_some(), expect);
    }
}

#[test]
fn support_endpoints_follow_the_digit_rule() {
    // C_n intervals start at Σ d_j 3^{-j}, d_j ∈ {0, 2}
    for depth in 0..=6usize {
        let mut starts: Vec<u64> = (0..1u64 << depth)
            .map(|bits| {
                (0..depth).fold(0, |acc, j| acc * 3 + if bits >> (depth - 1 - j) & 1 == 1 { 2 } else { 0 })
            })
            .collect();
        starts.sort();
        let got = support_intervals(depth).unwrap();
        let den = 3u64.pow(depth as u32);
        assert_eq!(got.len(), starts.len());
        for (iv, s) in got.iter().zip(&starts) {
            assert_eq!(iv.lo, num_rational::Ratio::new(*s, den));
            assert_eq!(iv.hi, num_rational::Ratio::new(s + 1, den));
        }
    }
}

#[test]
fn tensor_feature_matches_bergman() {
    let s = onb_feature(&SeriesKernel::szego());
    let t = tensor_feature(&s, &s);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..50 {
        let x = Scalar::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..6.3));
        let y = Scalar::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..6.3));
        let bergman = (c(1.0, 0.0) - x * y.conj()).powi(-2);
        let bound = s.tail_bound(0.8, 150).unwrap() * 2.0 / (1.0 - 0.64) + s.tail_bound(0.8, 150).unwrap().powi(2);
        assert!((t.pairing(x, y, 150) - bergman).norm() <= 1e-10 + bound);
    }
}

#[test]
fn dirac_norm_matches_coefficient_sum() {
    let pts = disk_spiral(8, 0.75, 0.3, Domain::UNIT_DISK).unwrap();
    let w: Vec<Scalar> = (0..8).map(|i| c((i as f64).sin(), (i as f64).cos())).collect();
    let got = dirac_norm(&w, &pts, &KernelExpr::szego(), 200).unwrap();
    // ‖Σ w_i K_{x_i}‖² = Σ_k |Σ_i w_i x̄_i^k|² for the Szegő kernel
    let want: f64 = (0..400)
        .map(|k| {
            pts.values()
                .zip(&w)
                .map(|(x, wi)| wi * x.conj().powu(k))
                .sum::<Scalar>()
                .norm_sqr()
        })
        .sum::<f64>()
        .sqrt();
    assert!((got - want).abs() < 1e-10 * want);
}
