//! Acceptance suite: ten end-to-end criteria, one PASS/FAIL line each.
//! Runs as a plain binary so the lines are always shown.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};

use fctk::asymptotics::{cosine_approximant, fig1_dataset, fig1_defaults, normalized_poly};
use fctk::contour::{contour_eval, verify_h_max, QuadratureGrid};
use fctk::empirical::EmpiricalMeasure;
use fctk::fuss_catalan::FussCatalanDist;
use fctk::poly::{build_f, eval_exact, rescale_arg, ModelParams};
use fctk::rmt::{moment_with_error, sample_trials};
use fctk::rng::Stream;
use fctk::saddle::{x_star_f64, PhiCoordinate};
use fctk::zeros::{default_tol, isolate_zeros, rescaled_zero_measure};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn params(r: u32, nu: &[u32], n: u32) -> ModelParams {
    ModelParams::new(r, nu.to_vec(), n).expect("valid parameters")
}

/// All offset vectors of length `r` with entries in `0..=max`.
fn offsets(r: u32, max: u32) -> Vec<Vec<u32>> {
    let mut all = vec![vec![]];
    for _ in 0..r {
        all = all
            .into_iter()
            .flat_map(|v: Vec<u32>| {
                (0..=max).map(move |k| {
                    let mut w = v.clone();
                    w.push(k);
                    w
                })
            })
            .collect();
    }
    all
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn contour_vs_exact() -> Outcome {
    let start = Instant::now();
    let mut worst_rel = 0.0f64;
    let mut worst_zero = 0.0f64;
    let mut cases = 0;
    let mut bad = Vec::new();
    for r in 1..=3u32 {
        let grid =
            QuadratureGrid::new(r, if r <= 2 { 256 } else { 96 }).map_err(|e| e.to_string())?;
        for nu in offsets(r, 2) {
            for n in 1..=6 {
                for x in [1.0, 2.0, x_star_f64(r) / 2.0] {
                    let p = params(r, &nu, n);
                    let v = contour_eval(&p, x, &grid).map_err(|e| e.to_string())?;
                    let poly = rescale_arg(&build_f(&p), &p);
                    let exact = eval_exact(&poly, &BigRational::from_float(x).expect("finite"))
                        .to_f64()
                        .expect("in range");
                    cases += 1;
                    // an exactly vanishing value is judged against the size of the summands
                    let ok = if exact != 0.0 {
                        let rel = (v.value - exact).abs() / exact.abs();
                        worst_rel = worst_rel.max(rel);
                        rel <= 1e-8
                    } else {
                        let rel = v.value.abs() / v.scale;
                        worst_zero = worst_zero.max(rel);
                        rel <= 1e-8
                    };
                    if !ok {
                        bad.push(format!("r={r} nu={nu:?} n={n} x={x}"));
                    }
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        bad.is_empty() && secs < 300.0,
        format!(
            "{cases} cases, worst relative error {worst_rel:.1e}, worst zero-case residual {worst_zero:.1e}, {secs:.1}s{}",
            if bad.is_empty() { String::new() } else { format!(", failing: {bad:?}") }
        ),
    )
}

fn pr_convergence() -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    for (r, nu) in [(1u32, vec![0u32]), (2, vec![1, 2]), (3, vec![2, 4, 5])] {
        let c = PhiCoordinate::new(r, 0.6 * PI / (r as f64 + 1.0)).map_err(|e| e.to_string())?;
        let devs: Vec<f64> = [50u32, 100, 200]
            .iter()
            .map(|&n| {
                let p = params(r, &nu, n);
                let f = normalized_poly(&p, &c).expect("evaluates");
                let cn = cosine_approximant(&p, &c).expect("evaluates");
                (f - cn).abs()
            })
            .collect();
        let this = devs[0] > devs[1] && devs[1] > devs[2] && devs[2] < 0.1;
        ok &= this;
        lines.push(format!(
            "r={r}: {:.2e} > {:.2e} > {:.2e}",
            devs[0], devs[1], devs[2]
        ));
    }
    check(ok, lines.join("; "))
}

fn sign_changes(v: &[f64]) -> Vec<usize> {
    v.windows(2)
        .enumerate()
        .filter(|(_, w)| (w[0] < 0.0) != (w[1] < 0.0))
        .map(|(i, _)| i)
        .collect()
}

fn fig1_reproduction() -> Outcome {
    let start = Instant::now();
    let (p, lo, hi) = fig1_defaults();
    let rows = fig1_dataset(&p, lo, hi, 200).map_err(|e| e.to_string())?;
    let f: Vec<f64> = rows.iter().map(|r| r.f_tilde).collect();
    let c: Vec<f64> = rows.iter().map(|r| r.c_n).collect();
    let range = f.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dev = rows
        .iter()
        .map(|r| (r.f_tilde - r.c_n).abs())
        .fold(0.0, f64::max);
    let sf = sign_changes(&f);
    let sc = sign_changes(&c);
    let paired = sf.len() == sc.len() && sf.iter().zip(&sc).all(|(a, b)| a.abs_diff(*b) <= 1);
    let secs = start.elapsed().as_secs_f64();
    check(
        range <= 1.5 && dev < 0.25 && paired && !sf.is_empty() && secs < 600.0,
        format!(
            "max |F| {range:.3}, max |F - c| {dev:.3}, {} / {} sign changes paired: {paired}, {secs:.1}s",
            sf.len(),
            sc.len()
        ),
    )
}

fn zeros_real_positive() -> Outcome {
    let mut cases = 0;
    let mut bad = Vec::new();
    for r in 1..=3u32 {
        for nu in offsets(r, 3) {
            for n in 1..=25 {
                let p = params(r, &nu, n);
                cases += 1;
                match isolate_zeros(&build_f(&p), &default_tol()) {
                    Ok(z) if z.len() == n as usize && z.iter().all(|e| e.lo.is_positive()) => {}
                    Ok(z) => bad.push(format!("r={r} nu={nu:?} n={n}: {} roots", z.len())),
                    Err(e) => bad.push(format!("r={r} nu={nu:?} n={n}: {e}")),
                }
            }
        }
    }
    check(
        bad.is_empty(),
        format!(
            "{cases} polynomials, {} with a wrong count{}",
            bad.len(),
            if bad.is_empty() {
                String::new()
            } else {
                format!(": {bad:?}")
            }
        ),
    )
}

fn zero_distribution() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for r in 1..=3u32 {
        let d = FussCatalanDist::new(r).map_err(|e| e.to_string())?;
        let ks = |n| -> Result<f64, String> {
            let m =
                rescaled_zero_measure(&ModelParams::square(r, n).expect("valid"), &default_tol())
                    .map_err(|e| e.to_string())?;
            Ok(m.ks_distance(|x| d.cdf(x)))
        };
        let (k50, k200) = (ks(50)?, ks(200)?);
        ok &= k200 < 0.05 && k200 < k50;
        lines.push(format!("r={r}: KS(50) {k50:.4}, KS(200) {k200:.4}"));
    }
    check(ok, lines.join("; "))
}

fn density_identities() -> Outcome {
    let mut eq = 0.0f64;
    let mut norm = 0.0f64;
    for r in 1..=4u32 {
        let d = FussCatalanDist::new(r).map_err(|e| e.to_string())?;
        for k in 1..=1000 {
            let c = PhiCoordinate::new(r, PhiCoordinate::upper(r) * k as f64 / 1001.0)
                .expect("interior");
            let a = d.density_phi(&c).expect("same r");
            let b = d.density_from_derivatives(&c).expect("same r");
            eq = eq.max((a - b).abs() / a.max(1.0));
        }
        norm = norm.max((d.normalization().map_err(|e| e.to_string())? - 1.0).abs());
    }
    let d1 = FussCatalanDist::new(1).map_err(|e| e.to_string())?;
    let mut mp = 0.0f64;
    for k in 1..1000 {
        let x = 4.0 * k as f64 / 1000.0;
        let closed = (4.0 - x).sqrt() / (2.0 * PI * x.sqrt());
        mp = mp.max((d1.density_x(x) - closed).abs() / closed.max(1.0));
    }
    check(
        eq <= 1e-10 && mp <= 1e-12 && norm <= 1e-10,
        format!("derivative ratio {eq:.1e}, Marchenko-Pastur {mp:.1e}, mass defect {norm:.1e}"),
    )
}

fn moment_identities() -> Outcome {
    let mut worst_m = 0.0f64;
    for r in 1..=4u32 {
        let d = FussCatalanDist::new(r).map_err(|e| e.to_string())?;
        for n in 0..=10 {
            let exact = d.moment_exact(n).to_f64().expect("in range");
            let q = d.moment_quadrature(n).map_err(|e| e.to_string())?;
            worst_m = worst_m.max((q - exact).abs() / exact);
        }
    }
    let mut worst_i = 0.0f64;
    for r in 1..=3u32 {
        let d = FussCatalanDist::new(r).map_err(|e| e.to_string())?;
        for n in 0..=5 {
            let (lhs, rhs) = d.identity_check(n).map_err(|e| e.to_string())?;
            let rhs = rhs.to_f64().expect("in range");
            worst_i = worst_i.max((lhs - rhs).abs() / rhs);
        }
    }
    check(
        worst_m <= 1e-10 && worst_i <= 1e-9,
        format!("moments {worst_m:.1e}, binomial identity {worst_i:.1e}"),
    )
}

fn h_maximum() -> Outcome {
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for r in 1..=3u32 {
        let m = if r <= 2 { 256 } else { 96 };
        let mut s = Stream::new(0x5eed, r as u64);
        for _ in 0..10 {
            let phi = s.uniform_open() * PhiCoordinate::upper(r);
            let c = PhiCoordinate::new(r, phi).map_err(|e| e.to_string())?;
            let h = verify_h_max(&c, m).map_err(|e| e.to_string())?;
            worst = worst.max(h.distance / h.cell);
            if h.distance > h.cell {
                bad.push(format!("r={r} phi={phi}"));
            }
        }
    }
    check(
        bad.is_empty(),
        format!(
            "30 angles, worst distance {worst:.2} cells{}",
            if bad.is_empty() {
                String::new()
            } else {
                format!(", failing: {bad:?}")
            }
        ),
    )
}

fn rmt_limit() -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for r in 1..=2u32 {
        let p = ModelParams::square(r, 200).expect("valid");
        let d = FussCatalanDist::new(r).map_err(|e| e.to_string())?;
        let spectra = sample_trials(&p, 50, 20_240_601).map_err(|e| e.to_string())?;
        let pooled = EmpiricalMeasure::new(
            spectra
                .iter()
                .flat_map(|s| s.values.iter().copied())
                .collect(),
        );
        let ks = pooled.ks_distance(|x| d.cdf(x));
        let mut zs = Vec::new();
        for k in 1..=3 {
            let (m, se) = moment_with_error(&spectra, k);
            let z = (m - d.moment_exact(k).to_f64().expect("in range")) / se;
            ok &= z.abs() <= 3.0;
            zs.push(format!("{z:+.2}"));
        }
        ok &= ks < 0.05;
        lines.push(format!(
            "r={r}: KS {ks:.4}, moment z-scores {}",
            zs.join(" ")
        ));
    }
    check(ok, lines.join("; "))
}

fn stieltjes_branch() -> Outcome {
    let mut far = 0.0f64;
    let mut residual = 0.0f64;
    let mut moments = 0.0f64;
    for r in 1..=4u32 {
        let d = FussCatalanDist::new(r).map_err(|e| e.to_string())?;
        for k in 0..8 {
            let z = Complex64::from_polar(1e6, 0.1 + 2.0 * PI * k as f64 / 8.0);
            let f = d.stieltjes(z).map_err(|e| e.to_string())?;
            far = far.max((z * f - 1.0).norm());
        }
        for z in [
            Complex64::new(1.0, 1.0),
            Complex64::new(-2.0, 0.0),
            Complex64::new(d.x_star() + 1.0, 0.0),
            Complex64::new(0.5 * d.x_star(), -0.01),
            Complex64::new(0.0, 1e4),
        ] {
            residual = residual.max(d.stieltjes_residual(z).map_err(|e| e.to_string())?);
        }
        let m = d.stieltjes_moments(4, 128).map_err(|e| e.to_string())?;
        for (k, mk) in m.iter().enumerate() {
            let exact = d.moment_exact(k as u32).to_f64().expect("in range");
            moments = moments.max((mk - exact).abs() / exact);
        }
    }
    check(
        far <= 1e-5 && residual <= 1e-10 && moments <= 1e-6,
        format!(
            "|zF - 1| {far:.1e}, equation residual {residual:.1e}, moments m_0..m_4 {moments:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("contour integral matches exact values", contour_vs_exact),
        ("asymptotic deviation shrinks with n", pr_convergence),
        ("flagship window reproduction", fig1_reproduction),
        ("all zeros real, simple and positive", zeros_real_positive),
        ("zero distribution approaches the law", zero_distribution),
        ("density identities", density_identities),
        ("moment and binomial identities", moment_identities),
        ("maximum of |exp(-p)| at the saddles", h_maximum),
        ("random-matrix spectra approach the law", rmt_limit),
        ("Stieltjes branch and expansion", stieltjes_branch),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS [{:>2}] {name}: {detail}", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL [{:>2}] {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
