//! Cross-checks against independent computations: finite differences,
//! closed forms for r = 1, direct sampling and classical asymptotics.

use std::f64::consts::PI;

use num_rational::BigRational;
use num_traits::ToPrimitive;

use fctk::asymptotics::{fig1_dataset, fig1_defaults, laguerre_deviation};
use fctk::contour::{msp_consistency, msp_value};
use fctk::fuss_catalan::{fuss_catalan_number, FussCatalanDist};
use fctk::poly::{build_p, eval_exact, ModelParams};
use fctk::rmt::aggregate_measure;
use fctk::saddle::{f_phase, rho, x_star_f64, PhiCoordinate};
use fctk::zeros::{default_tol, isolate_zeros, local_zero_count, rescaled_zero_measure};

fn params(r: u32, nu: &[u32], n: u32) -> ModelParams {
    ModelParams::new(r, nu.to_vec(), n).unwrap()
}

#[test]
fn cdf_derivative_is_density() {
    for r in 1..=3 {
        let d = FussCatalanDist::new(r).unwrap();
        let xs = d.x_star();
        for k in 1..20 {
            let x = xs * k as f64 / 20.0;
            let h = 1e-5 * xs;
            let fd = (d.cdf(x + h) - d.cdf(x - h)) / (2.0 * h);
            let rho = d.density_x(x);
            assert!(
                (fd - rho).abs() <= 1e-6 * rho.max(1.0),
                "r={r} x={x}: {fd} vs {rho}"
            );
        }
    }
}

#[test]
fn density_against_finite_difference_in_phi() {
    // density = |df / drho| / pi along the saddle curve
    for r in 1..=4 {
        let d = FussCatalanDist::new(r).unwrap();
        for k in 1..10 {
            let phi = PhiCoordinate::upper(r) * k as f64 / 10.0;
            let h = 1e-6;
            let at = |p: f64| PhiCoordinate::new(r, p).unwrap();
            let df = f_phase(&at(phi + h)) - f_phase(&at(phi - h));
            let drho = rho(&at(phi + h)) - rho(&at(phi - h));
            let fd = (df / drho).abs() / PI;
            let exact = d.density_phi(&at(phi)).unwrap();
            assert!(
                (fd - exact).abs() <= 1e-6 * exact.max(1.0),
                "r={r} phi={phi}"
            );
        }
    }
}

#[test]
fn cdf_closed_forms_agree() {
    for r in 1..=4 {
        let d = FussCatalanDist::new(r).unwrap();
        assert_eq!(d.cdf(0.0), 0.0);
        assert_eq!(d.cdf(d.x_star()), 1.0);
        for k in 1..8 {
            let c = PhiCoordinate::new(r, PhiCoordinate::upper(r) * k as f64 / 8.0).unwrap();
            let a = d.cdf_phi(&c).unwrap();
            let b = d.cdf_phi_expanded(&c).unwrap();
            assert!((a - b).abs() < 1e-12, "r={r} k={k}");
            assert!((d.cdf(rho(&c)) - a).abs() < 1e-10);
        }
    }
}

#[test]
fn small_fuss_catalan_numbers() {
    let catalan = [1u64, 1, 2, 5, 14, 42, 132, 429, 1430, 4862];
    for (n, c) in catalan.iter().enumerate() {
        assert_eq!(
            fuss_catalan_number(1, n as u32),
            BigRational::from_integer((*c).into())
        );
    }
    let fc2 = [1u64, 1, 3, 12, 55, 273];
    for (n, c) in fc2.iter().enumerate() {
        assert_eq!(
            fuss_catalan_number(2, n as u32),
            BigRational::from_integer((*c).into())
        );
    }
}

#[test]
fn sample_mean_matches_first_moment() {
    let d = FussCatalanDist::new(2).unwrap();
    let s = d.sample(1_000_000, 17);
    let mean = s.iter().sum::<f64>() / s.len() as f64;
    assert!((mean - 1.0).abs() < 0.01, "mean {mean}");
    assert!(s.iter().all(|&x| x >= 0.0 && x <= d.x_star()));
}

#[test]
fn laguerre_form_agrees() {
    for phi in [0.3, 0.6, 1.0, 1.3] {
        let coarse = laguerre_deviation(100, phi).unwrap().abs();
        let fine = laguerre_deviation(400, phi).unwrap().abs();
        assert!(fine < 0.01, "phi={phi}: {fine}");
        assert!(
            fine < coarse || coarse < 1e-4,
            "phi={phi}: {coarse} -> {fine}"
        );
    }
}

#[test]
fn saddle_assembly_matches_cosine_form() {
    for (r, nu) in [(1u32, vec![0u32]), (2, vec![0, 1]), (3, vec![1, 1, 2])] {
        for k in 1..6 {
            let c = PhiCoordinate::new(r, PhiCoordinate::upper(r) * k as f64 / 6.0).unwrap();
            let p = params(r, &nu, 40);
            assert!(msp_consistency(&p, &c).unwrap() < 1e-10, "r={r} k={k}");
            assert!(msp_value(&p, &c).unwrap().value().is_finite());
        }
    }
}

#[test]
fn local_zero_count_follows_phase() {
    let (obs, pred) = local_zero_count(&params(1, &[0], 100), 1.0, 3.0, &default_tol()).unwrap();
    assert!((obs as f64 - pred).abs() <= 3.0, "{obs} vs {pred}");
    let (obs, pred) = local_zero_count(&params(2, &[0, 2], 80), 0.5, 5.0, &default_tol()).unwrap();
    assert!((obs as f64 - pred).abs() <= 3.0, "{obs} vs {pred}");
}

#[test]
fn rescaled_zeros_stay_near_support() {
    for r in 1..=3 {
        for n in [20, 40] {
            let m =
                rescaled_zero_measure(&params(r, &vec![1; r as usize], n), &default_tol()).unwrap();
            let xs = x_star_f64(r);
            assert!(
                m.points().iter().all(|&x| x > 0.0 && x < xs + 0.5),
                "r={r} n={n}"
            );
            let beyond = m.points().iter().filter(|&&x| x >= xs).count();
            if beyond > 0 {
                println!("r={r} n={n}: {beyond} zeros use the overshoot allowance");
            }
            assert_eq!(beyond, 0, "r={r} n={n}");
        }
    }
}

#[test]
fn monic_polynomial_vanishes_at_isolated_zeros() {
    let p = params(2, &[1, 2], 12);
    let poly = build_p(&p);
    for z in isolate_zeros(&poly, &default_tol()).unwrap() {
        let lo = eval_exact(&poly, &z.lo).to_f64().unwrap();
        let hi = eval_exact(&poly, &z.hi).to_f64().unwrap();
        assert!(lo * hi <= 0.0);
    }
}

#[test]
fn larger_window_is_closer() {
    let (p, lo, hi) = fig1_defaults();
    let dev = |n| {
        fig1_dataset(&p.with_n(n), lo, hi, 200)
            .unwrap()
            .iter()
            .map(|r| (r.f_tilde - r.c_n).abs())
            .fold(0.0, f64::max)
    };
    assert!(dev(300) < dev(150));
}

#[test]
fn spectra_improve_with_size() {
    let d = FussCatalanDist::new(1).unwrap();
    let ks = |n| {
        aggregate_measure(&ModelParams::square(1, n).unwrap(), 20, 3)
            .unwrap()
            .ks_distance(|x| d.cdf(x))
    };
    let (small, large) = (ks(10), ks(100));
    assert!(large < small, "{small} -> {large}");
    assert!(large < 0.03);
}
