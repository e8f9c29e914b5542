//! The registered experiments. Each reads its parameters, writes artifacts
//! into the bundle and records assertions.

use featurespace::dual_space::{delta_expand, dual_pairing_exact};
use featurespace::fractal::{cantor_member_exact, support_measure, triadic_grid, Triadic};
use featurespace::gram::matrix_to_csv;
use featurespace::ktransform::measure_inner;
use featurespace::linalg::{hermitian_defect, max_abs};
use featurespace::order_operator::spectrum_csv;
use featurespace::ordering::{chain_csv, sample_truncation};
use featurespace::sampling::{disk_random, interval_random};
use featurespace::series::Coefficients;
use featurespace::*;
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::json;

use crate::bundle::Bundle;
use crate::config::Params;
use crate::HarnessError;

type Res<T> = std::result::Result<T, HarnessError>;

fn auto_truncation(p: &Params, kernels: &[&KernelExpr], pts: &PointSet) -> Res<usize> {
    match p.get("truncation") {
        Some(_) => {
            let n = p.usize("truncation", 0)?;
            if n == 0 {
                return Err(HarnessError::Config("truncation must be >= 1".into()));
            }
            Ok(n)
        }
        None => Ok(sample_truncation(kernels, pts)?),
    }
}

fn record_truncation(b: &mut Bundle, name: &str, k: &KernelExpr, pts: &PointSet, n: usize) {
    b.truncation(name, n);
    if let Some(e) = k.tail_bound(pts.max_modulus(), n) {
        b.truncation_bound(name, e);
    }
}

fn positive(key: &str, x: f64) -> Res<f64> {
    if x > 0.0 {
        Ok(x)
    } else {
        Err(HarnessError::Config(format!("`{key}` must be > 0")))
    }
}

pub fn gram_matrix(p: &Params, b: &mut Bundle) -> Res<()> {
    let k = p.kernel("kernel", "szego")?;
    let pts = p.points("points", "disk:10:r0.9", k.natural_domain())?;
    let n = auto_truncation(p, &[&k], &pts)?;
    record_truncation(b, "kernel", &k, &pts, n);
    let g = gram(&k, &pts, n)?;
    b.write("gram.csv", &g.to_csv())?;
    b.write_json("gram.json", &g.to_json())?;
    let defect = hermitian_defect(g.entries());
    b.check("hermitian", defect == 0.0, Some(defect), Some(0.0), "max |G_ij - conj(G_ji)|");
    Ok(())
}

pub fn psd(p: &Params, b: &mut Bundle) -> Res<()> {
    let k = p.kernel("kernel", "szego")?;
    let pts = p.points("points", "disk:20:r0.9", k.natural_domain())?;
    let tol = positive("tol", p.f64("tol", DEFAULT_PSD_TOLERANCE)?)?;
    let n = auto_truncation(p, &[&k], &pts)?;
    record_truncation(b, "kernel", &k, &pts, n);
    b.tolerance("psd", tol);
    let g = gram(&k, &pts, n)?;
    let cert = psd_check(&g, tol)?;
    b.write_json("certificate.json", &cert)?;
    b.check(
        "psd",
        cert.is_psd(),
        Some(cert.min_eigenvalue),
        Some(cert.threshold()),
        "min eigenvalue >= -tol (1 + spectral radius)",
    );
    Ok(())
}

pub fn order_chain(p: &Params, b: &mut Bundle) -> Res<()> {
    let k = p.kernel("kernel", "szego")?;
    let pts = p.points("points", "disk:40:r0.9", k.natural_domain())?;
    let nmax = p.u64("nmax", 4)? as u32;
    let tol = positive("tol", p.f64("tol", DEFAULT_PSD_TOLERANCE)?)?;
    if nmax == 0 {
        return Err(HarnessError::Config("nmax must be >= 1".into()));
    }
    if p.get("seed").is_some() {
        b.seed("points", p.u64("seed", 0)?);
    }
    b.tolerance("psd", tol);
    let top = power(&k, nmax)?;
    b.truncation("chain", sample_truncation(&[&top], &pts)?);
    match verify_chain(&k, &pts, nmax, tol) {
        Ok(chain) => {
            b.write("chain.csv", &chain_csv(&chain))?;
            for (n, v) in chain.iter().enumerate() {
                let name = if n == 0 { "1 <= K".to_string() } else { format!("K^{n} <= K^{}", n + 1) };
                b.check(&name, v.holds, Some(v.witness.min_eigenvalue), Some(v.witness.threshold()), "difference Gram psd");
            }
        }
        Err(KernelError::ChainPremise { min_eigenvalue }) => {
            b.check("1 <= K", false, Some(min_eigenvalue), None, "chain premise fails");
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}

fn partial_sum(s: &SeriesKernel, n: usize) -> KernelExpr {
    SeriesKernel::new(
        Coefficients::Finite { values: s.coefficients().coeffs(n + 1) },
        s.variable(),
    )
    .expect("prefix of a valid coefficient rule")
    .into()
}

pub fn monotone_limit_exp(p: &Params, b: &mut Bundle) -> Res<()> {
    let family = p.string("family", "partial-sums")?;
    let k = p.kernel("kernel", "szego")?;
    let nterms = p.usize("nterms", if family == "powers" { 30 } else { 80 })?;
    let tol = positive("tol", p.f64("tol", 1e-10)?)?;
    let default_points = if family == "powers" { "explicit:[0.6]" } else { "disk:20:r0.7" };
    let pts = p.points("points", default_points, k.natural_domain())?;
    let expect = p.string("expect", if family == "powers" { "diverge" } else { "converge" })?;
    b.tolerance("limit", tol);
    b.tolerance("monotone_psd", DEFAULT_PSD_TOLERANCE);
    b.tolerance("divergence_growth", ordering::DIVERGENCE_GROWTH);
    let result = match family.as_str() {
        "partial-sums" => {
            let s = k.series_view().ok_or_else(|| {
                HarnessError::Config("partial sums need a kernel with a power-series form".into())
            })?;
            monotone_limit(|n| partial_sum(&s, n), &pts, nterms, DEFAULT_PSD_TOLERANCE)
        }
        "powers" => monotone_limit(|n| power(&k, n as u32).expect("n >= 1"), &pts, nterms, DEFAULT_PSD_TOLERANCE),
        other => return Err(HarnessError::Config(format!("unknown family `{other}`"))),
    };
    match (result, expect.as_str()) {
        (Ok(lim), "converge") => {
            let n = auto_truncation(p, &[&k], &pts)?;
            record_truncation(b, "target", &k, &pts, n);
            let target = gram(&k, &pts, n)?;
            let dev = max_abs(&(&lim.limit - target.entries()));
            b.write("limit.csv", &matrix_to_csv(&lim.limit))?;
            let mut inc = String::from("n,cauchy_increment,step_min_eig\n");
            for (i, (c, m)) in lim.cauchy_increments.iter().zip(&lim.step_min_eigenvalues).enumerate() {
                inc.push_str(&format!("{},{c:e},{m:e}\n", i + 2));
            }
            b.write("increments.csv", &inc)?;
            b.check(
                "monotone",
                lim.monotone_violations.is_empty(),
                Some(lim.monotone_violations.len() as f64),
                None,
                "K_n <= K_{n+1} on the sample",
            );
            b.check("limit matches kernel", dev <= tol, Some(dev), Some(tol), "max |K_lim - K|");
        }
        (Ok(lim), _) => {
            b.check(
                "sup-condition violated",
                false,
                Some(lim.sup_diag.iter().copied().fold(0.0, f64::max)),
                None,
                format!("diagonal stayed bounded over {nterms} terms"),
            );
        }
        (Err(KernelError::SupConditionViolated { growth, terms, point }), _) => {
            b.write_json("divergence.json", &json!({"growth": growth, "terms": terms, "point": point}))?;
            b.check(
                "sup-condition violated",
                expect == "diverge",
                Some(terms as f64),
                Some(nterms as f64),
                format!("flagged at point {point} after {terms} terms"),
            );
        }
        (Err(e), _) => return Err(e.into()),
    }
    Ok(())
}

pub fn feature_verify(p: &Params, b: &mut Bundle) -> Res<()> {
    let feature = p.string("feature", "onb")?;
    let k = p.kernel("kernel", "szego")?;
    let s = p.series("kernel", "szego")?;
    let pts = p.points("points", "disk:20:r0.8", k.natural_domain())?;
    let tol = positive("tol", p.f64("tol", 1e-10)?)?;
    let (fm, target) = match feature.as_str() {
        "onb" => (onb_feature(&s), k.clone()),
        "tensor" => {
            let f = onb_feature(&s);
            (tensor_feature(&f, &f), combine(CombineOp::Product, &k, &k)?)
        }
        "direct-sum" => {
            let f = onb_feature(&s);
            (direct_sum_feature(&[f.clone(), f])?, combine(CombineOp::Sum, &k, &k)?)
        }
        "dual" => {
            let l = p.series("against", "bergman")?;
            (dual_pair(&s, &l)?.0, k.clone())
        }
        other => return Err(HarnessError::Config(format!("unknown feature `{other}`"))),
    };
    let n = auto_truncation(p, &[&target], &pts)?;
    record_truncation(b, "target", &target, &pts, n);
    b.tolerance("feature", tol);
    let check = verify_feature(&fm, &target, &pts, tol, n)?;
    let dominance = feature_dominance(&fm, &target, &pts, DEFAULT_PSD_TOLERANCE, n)?;
    b.write_json("check.json", &json!({"feature": feature, "check": check, "dominance": dominance}))?;
    b.check("pairing reproduces kernel", check.passed, Some(check.max_deviation), Some(check.allowance), "tol + truncation bounds");
    b.check("dominance exact", dominance == Dominance::Exact, None, None, format!("{dominance:?}"));
    Ok(())
}

pub fn gaussian_mc(p: &Params, b: &mut Bundle) -> Res<()> {
    let k = p.kernel("kernel", "szego")?;
    let s = p.series("kernel", "szego")?;
    let samples = p.u64("M", 100_000)?;
    if samples == 0 {
        return Err(HarnessError::Config("M must be >= 1".into()));
    }
    let seed = p.u64("seed", 0)?;
    let pts = p.points("points", "disk:10:r0.9", k.natural_domain())?;
    let n = auto_truncation(p, &[&k], &pts)?;
    b.truncation("process", n);
    b.truncation_bound("process", s.truncation_bound(pts.max_modulus(), n)?);
    b.seed("gaussian", seed);
    let emp = gaussian_feature(&s, &pts, samples, seed, n)?;
    let exact = gram(&k, &pts, n)?.into_entries();
    let m = pts.len();
    let scale = 5.0 / (samples as f64).sqrt();
    let mut within = 0;
    for i in 0..m {
        for j in 0..m {
            let band = scale * (exact[(i, i)].re * exact[(j, j)].re).sqrt();
            if (emp.entries[(i, j)] - exact[(i, j)]).norm() <= band {
                within += 1;
            }
        }
    }
    let frac = within as f64 / (m * m) as f64;
    b.tolerance("band_sigmas", 5.0);
    b.tolerance("coverage", 0.95);
    b.write_json("empirical.json", &emp.to_json(&pts))?;
    b.write("exact.csv", &matrix_to_csv(&exact))?;
    b.check("coverage", frac >= 0.95, Some(frac), Some(0.95), "entries within 5 sqrt(K(x,x)K(y,y))/sqrt(M)");
    Ok(())
}

pub fn dual_pairing_exp(p: &Params, b: &mut Bundle) -> Res<()> {
    let s = p.series("kernel", "szego")?;
    let nmax = p.usize("nmax", 15)?;
    let mut csv = String::from("n,m,value\n");
    let mut exact = true;
    for n in 0..=nmax {
        for m in 0..=nmax {
            let v = dual_pairing_exact(&s, n, m)?;
            let want = if n == m { 1 } else { 0 };
            exact &= v == num_rational::BigRational::from_integer(want.into());
            csv.push_str(&format!("{n},{m},{v}\n"));
        }
    }
    b.write("pairings.csv", &csv)?;
    b.check("orthonormal", exact, None, Some(0.0), "pairing equals delta_nm exactly");
    Ok(())
}

pub fn delta_expand_exp(p: &Params, b: &mut Bundle) -> Res<()> {
    let polys = p.usize("trials", 100)?;
    let xs = p.usize("count", 20)?;
    let degree = p.usize("degree", 10)?;
    let terms = p.usize("terms", degree + 1)?;
    let seed = p.u64("seed", 0)?;
    let tol = positive("tol", p.f64("tol", 1e-12)?)?;
    b.seed("polynomials", seed);
    b.seed("points", seed.wrapping_add(1));
    b.truncation("expansion", terms);
    b.tolerance("abs_error", tol);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = interval_random(xs, -1.0, 1.0, seed.wrapping_add(1), Domain::OPEN_UNIT_INTERVAL)?;
    let mut csv = String::from("poly,x,expansion,direct,abs_error\n");
    let mut worst: f64 = 0.0;
    let mut truncated = 0;
    for i in 0..polys {
        let coeffs: Vec<Scalar> = (0..=degree)
            .map(|_| Scalar::new(rng.random_range(-1.0..1.0), 0.0))
            .collect();
        for x in pts.values() {
            let e = delta_expand(x, terms, &coeffs);
            if e.residual.is_some() {
                truncated += 1;
            }
            let err = (e.value - e.direct).norm();
            worst = worst.max(err);
            csv.push_str(&format!("{i},{:?},{:?},{:?},{err:e}\n", x.re, e.value.re, e.direct.re));
        }
    }
    b.write("residuals.csv", &csv)?;
    b.check(
        "expansion reproduces p(x)",
        worst <= tol,
        Some(worst),
        Some(tol),
        format!("{truncated} evaluations had degree >= terms"),
    );
    Ok(())
}

pub fn order_operator(p: &Params, b: &mut Bundle) -> Res<()> {
    let k = p.kernel("kernel", "szego")?;
    let l = p.kernel("against", "bergman")?;
    let count = p.usize("count", 51)?;
    let tol = positive("tol", p.f64("tol", 1e-8)?)?;
    b.tolerance("spectrum", tol);
    if let (Some(ks), Some(ls)) = (k.series_view(), l.series_view()) {
        let d = order_operator_diagonal(&ks, &ls, count)?;
        b.write("spectrum.csv", &spectrum_csv(&d.lambda))?;
        let mut exact = String::from("n,lambda_n\n");
        for (n, x) in d.exact.iter().enumerate() {
            exact.push_str(&format!("{n},{x}\n"));
        }
        b.write("spectrum_exact.csv", &exact)?;
        b.check("diagonal contraction", d.contraction, d.lambda.iter().copied().reduce(f64::max), Some(1.0), "sup lambda_n <= 1, exact");
    }
    let pts = p.points("points", "disk:15:r0.9", k.natural_domain())?;
    let n = auto_truncation(p, &[&k, &l], &pts)?;
    record_truncation(b, "kernel", &k, &pts, n);
    let op = order_operator_sampled(&k, &l, &pts, n)?;
    b.write("sampled_spectrum.csv", &spectrum_csv(&op.eigenvalues))?;
    let lo = op.eigenvalues.first().copied().unwrap_or(0.0);
    let hi = op.eigenvalues.last().copied().unwrap_or(0.0);
    b.check("sampled eigenvalues in [0, 1]", lo >= -tol && hi <= 1.0 + tol, Some(hi), Some(tol), format!("range [{lo:e}, {hi:e}], rank {}", op.effective_rank));
    let iso = isometry_check(&k, &l, &pts, n)?;
    let scale = max_abs(gram(&k, &pts, n)?.entries());
    let iso_tol = 1e-6 * scale.max(1.0);
    b.check("G_L C = G_K", iso <= iso_tol, Some(iso), Some(iso_tol), "max entrywise residual");
    Ok(())
}

fn parse_phi(spec: &str) -> Res<Box<dyn Fn(Scalar) -> Scalar>> {
    let (name, arg) = match spec.split_once(':') {
        Some((n, a)) => (n, Some(a)),
        None => (spec, None),
    };
    let num = || -> Res<f64> {
        arg.and_then(|a| a.parse::<f64>().ok())
            .filter(|x| x.is_finite())
            .ok_or_else(|| HarnessError::Config(format!("`{name}` needs a numeric argument")))
    };
    Ok(match name {
        "z" => Box::new(|z| z),
        "const" => {
            let c = num()?;
            Box::new(move |_| Scalar::new(c, 0.0))
        }
        "scale" => {
            let c = num()?;
            Box::new(move |z| z * c)
        }
        "blaschke" => {
            let a = num()?;
            Box::new(move |z| (z - a) / (Scalar::new(1.0, 0.0) - z * a))
        }
        other => return Err(HarnessError::Config(format!("unknown multiplier `{other}`"))),
    })
}

pub fn multiplier(p: &Params, b: &mut Bundle) -> Res<()> {
    let k = p.kernel("kernel", "szego")?;
    let spec = p.string("phi", "z")?;
    let phi = parse_phi(&spec)?;
    let pts = p.points("points", "disk:20:r0.9", k.natural_domain())?;
    let tol = positive("tol", p.f64("tol", DEFAULT_PSD_TOLERANCE)?)?;
    let n = auto_truncation(p, &[&k], &pts)?;
    record_truncation(b, "kernel", &k, &pts, n);
    b.tolerance("psd", tol);
    let v = multiplier_test(phi, &k, &pts, tol, n)?;
    b.write_json("certificate.json", &v)?;
    let consistent = if v.contractive {
        v.max_modulus <= 1.0 + tol
    } else {
        v.witness.min_eigenvalue < v.witness.threshold()
    };
    b.check("certificate consistent", consistent, Some(v.max_modulus), Some(1.0), "max |phi| on the sample");
    match p.string("expect", "")?.as_str() {
        "" => {}
        "contractive" => b.check("expected contractive", v.contractive, Some(v.witness.min_eigenvalue), Some(v.witness.threshold()), spec.clone()),
        "refuted" => b.check("expected refuted", !v.contractive, Some(v.witness.min_eigenvalue), Some(v.witness.threshold()), spec.clone()),
        other => return Err(HarnessError::Config(format!("unknown expectation `{other}`"))),
    }
    Ok(())
}

fn level_of(grid: usize) -> Option<u32> {
    (0..=30u32).find(|&l| 3usize.checked_pow(l) == Some(grid))
}

pub fn ifs_figure(p: &Params, b: &mut Bundle) -> Res<()> {
    let (lo, hi) = p.range("depths", (0, 5))?;
    let grid = p.usize("grid", 2187)?;
    if grid == 0 {
        return Err(HarnessError::Config("grid must be >= 1".into()));
    }
    if hi > fractal::MAX_SUPPORT_DEPTH {
        return Err(HarnessError::Config(format!("depth {hi} exceeds {}", fractal::MAX_SUPPORT_DEPTH)));
    }
    let level = level_of(grid);
    for depth in lo..=hi {
        let f = IfsFunction::unit(depth)?;
        let mut csv = String::from("x,value\n");
        let mut stray = 0usize;
        let mut nonzero = 0usize;
        for k in 0..=grid {
            let (x, value, member) = match level {
                Some(l) => {
                    let t = Triadic { k: k as i64, level: l };
                    let x = k as f64 / grid as f64;
                    (x, f.eval_triadic(t), cantor_member_exact(Ratio::new(k as u64, grid as u64), depth))
                }
                None => {
                    let x = k as f64 / grid as f64;
                    (x, ifs_eval(&f, x), cantor_member(x, depth))
                }
            };
            if value != 0.0 {
                nonzero += 1;
                if !member {
                    stray += 1;
                }
            }
            csv.push_str(&format!("{x:?},{value:?}\n"));
        }
        b.write(&format!("f1_depth{depth}.csv"), &csv)?;
        let intervals = support_intervals(depth)?;
        b.write_json(&format!("support_depth{depth}.json"), &intervals)?;
        b.check(
            &format!("depth {depth}: zero outside C_{depth}"),
            stray == 0,
            Some(stray as f64),
            Some(0.0),
            format!("{nonzero} nonzero grid values"),
        );
        let measure = support_measure(depth)?;
        let want = Ratio::new(2u64.pow(depth as u32), 3u64.pow(depth as u32));
        b.check(
            &format!("depth {depth}: 2^{depth} intervals of total length (2/3)^{depth}"),
            intervals.len() == 1 << depth && measure == want,
            Some(intervals.len() as f64),
            None,
            format!("measure {measure}"),
        );
    }
    Ok(())
}

pub fn ifs_kernel_exp(p: &Params, b: &mut Bundle) -> Res<()> {
    let s = p.series("kernel", "szego")?;
    let (lo, hi) = p.range("depths", (0, 3))?;
    let grid = p.usize("grid", 200)?;
    let level = p.u64("level", 4)? as u32;
    let n = p.usize("truncation", 64)?;
    let tol = positive("tol", p.f64("tol", 1e-9)?)?;
    if grid < 2 || n == 0 || level > 12 {
        return Err(HarnessError::Config("need grid >= 2, truncation >= 1, level <= 12".into()));
    }
    b.truncation("frame", n);
    b.tolerance("invariance", tol);
    b.tolerance("psd", DEFAULT_PSD_TOLERANCE);
    let tri: Vec<Triadic> = triadic_grid(level);
    let top = 1.0 - 1e-6;
    let xs: Vec<f64> = (0..grid).map(|i| top * i as f64 / (grid - 1) as f64).collect();
    for depth in lo..=hi {
        let kd = IfsKernel::new(s.clone(), depth, n)?;
        let frames: Vec<Vec<f64>> = xs.iter().map(|&x| kd.frame_values(x)).collect();
        let mut csv = String::from("x,y,value\n");
        let mut diag_sup: f64 = 0.0;
        for (i, fx) in frames.iter().enumerate() {
            for (j, fy) in frames.iter().enumerate() {
                let v: f64 = fx.iter().zip(fy).map(|(a, b)| a * b).sum();
                if i == j {
                    diag_sup = diag_sup.max(v);
                }
                csv.push_str(&format!("{:?},{:?},{v:?}\n", xs[i], xs[j]));
            }
        }
        b.write(&format!("f2_depth{depth}.csv"), &csv)?;
        let rep = ifs_invariance_check(&s, depth, &tri, tol, n)?;
        b.check(
            &format!("T K_{depth} = K_{}", depth + 1),
            rep.passed,
            Some(rep.max_deviation),
            Some(tol),
            format!("triadic grid level {level}"),
        );
        let mut ends: Vec<Triadic> = support_intervals(depth.min(fractal::MAX_SUPPORT_DEPTH))?
            .iter()
            .flat_map(|iv| [iv.lo, iv.hi])
            .filter_map(Triadic::from_ratio)
            .collect();
        ends.dedup();
        let g = kd.gram_triadic(&ends);
        let cert = psd_check_matrix(&g, DEFAULT_PSD_TOLERANCE)?;
        b.check(
            &format!("K_{depth} psd on Cantor endpoints"),
            cert.is_psd(),
            Some(cert.min_eigenvalue),
            Some(cert.threshold()),
            format!("{} endpoints, sup diagonal on grid {diag_sup:e}", ends.len()),
        );
    }
    Ok(())
}

pub fn ktransform_roundtrip(p: &Params, b: &mut Bundle) -> Res<()> {
    let k = p.kernel("kernel", "szego")?;
    let trials = p.usize("trials", 20)?;
    let count = p.usize("count", 6)?;
    let seed = p.u64("seed", 0)?;
    let tol = positive("tol", p.f64("tol", 1e-9)?)?;
    let radius = match k.natural_domain() {
        Domain::ComplexDisk { radius } | Domain::RealInterval { radius } => 0.9 * radius.min(1.0),
        _ => 0.9,
    };
    b.seed("measures", seed);
    b.tolerance("weight_error", tol);
    b.tolerance("adjoint_residual", tol);
    let mut csv = String::from("trial,weight_error,adjoint_residual,rank,residual\n");
    let mut worst_w: f64 = 0.0;
    let mut worst_a: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = |rng: &mut ChaCha8Rng| Scalar::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    for t in 0..trials {
        let pts = disk_random(count, radius, seed.wrapping_add(1 + t as u64), k.natural_domain())?;
        let n = auto_truncation(p, &[&k], &pts)?;
        b.truncation("kernel", n);
        let mu = DiscreteMeasure::new(pts.clone(), (0..count).map(|_| normal(&mut rng)).collect())?;
        let nu = DiscreteMeasure::new(pts.clone(), (0..count).map(|_| normal(&mut rng)).collect())?;
        let tmu = tk_apply(&mu, &k, n)?;
        let inv = k_inverse(&tmu.sample()?, &pts, &k, n)?;
        let wmax = mu.weights.iter().map(|c| c.norm()).fold(1.0, f64::max);
        let werr = mu
            .weights
            .iter()
            .zip(&inv.measure.weights)
            .map(|(a, c)| (a - c).norm())
            .fold(0.0, f64::max)
            / wmax;
        let tnu = tk_apply(&nu, &k, n)?;
        let f = tnu.sample()?;
        let lhs = tmu.inner_with_values(&f)?;
        let rhs = measure_inner(&mu, &k_inverse(&f, &pts, &k, n)?.measure, &k, n)?;
        let scale = (tmu.norm()? * tnu.norm()?).max(f64::MIN_POSITIVE);
        let adj = (lhs - rhs).norm() / scale;
        worst_w = worst_w.max(werr);
        worst_a = worst_a.max(adj);
        csv.push_str(&format!("{t},{werr:e},{adj:e},{},{:e}\n", inv.rank, inv.residual));
    }
    b.write("roundtrip.csv", &csv)?;
    b.check("weights recovered", worst_w <= tol, Some(worst_w), Some(tol), "max relative weight error");
    b.check("adjoint identity", worst_a <= tol, Some(worst_a), Some(tol), "|<T mu, f> - <mu, K^-1 f>| / (|T mu| |T nu|)");
    Ok(())
}
