//! The angle coordinate `phi` on `(0, pi/(r+1))` and everything expressed in it.
//!
//! With `s_k = sin(k phi)`:
//!
//! ```text
//! rho(phi) = s_{r+1}^{r+1} / (s_1 s_r^r)          decreasing onto (0, x*)
//! f(phi)   = (r+1) phi - r (s_{r+1}/s_r) s_1      increasing onto (0, pi)
//! x*       = (r+1)^{r+1} / r^r
//! ```
//!
//! For `x = rho(phi)` the trinomial `w^{r+1} - x w + x` has the conjugate
//! roots `a(phi) e^{±i phi}` with `a = s_{r+1}/s_r`. These are the dominant
//! saddle points of the contour integral for `F_n(n^r x)`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::pow;

use crate::bigfloat::BigFloatValue;
use crate::error::{Error, Result};

/// Offset used when the CLI clamps a request at an endpoint of the domain.
pub const ENDPOINT_EPS: f64 = 1e-9;

/// Angle strictly inside `(0, pi/(r+1))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhiCoordinate {
    r: u32,
    phi: f64,
}

impl PhiCoordinate {
    pub fn new(r: u32, phi: f64) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParams("r must be at least 1".into()));
        }
        let upper = Self::upper(r);
        if !(phi > 0.0 && phi < upper) {
            return Err(Error::Domain(format!(
                "phi = {phi} is outside the open interval (0, {upper})"
            )));
        }
        Ok(Self { r, phi })
    }

    /// Clamp into `[eps, pi/(r+1) - eps]`. The flag reports whether clamping
    /// happened.
    pub fn clamped(r: u32, phi: f64) -> Result<(Self, bool)> {
        if r == 0 {
            return Err(Error::InvalidParams("r must be at least 1".into()));
        }
        if phi.is_nan() {
            return Err(Error::Domain("phi is NaN".into()));
        }
        let lo = ENDPOINT_EPS;
        let hi = Self::upper(r) - ENDPOINT_EPS;
        let c = phi.clamp(lo, hi);
        Ok((Self { r, phi: c }, c != phi))
    }

    /// `pi/(r+1)`.
    pub fn upper(r: u32) -> f64 {
        PI / (r as f64 + 1.0)
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    fn sines(&self) -> (f64, f64, f64) {
        let r = self.r as f64;
        (
            self.phi.sin(),
            (r * self.phi).sin(),
            ((r + 1.0) * self.phi).sin(),
        )
    }

    /// Saddle modulus `a(phi) = sin((r+1)phi) / sin(r phi)`.
    pub fn modulus(&self) -> f64 {
        let (_, sr, sr1) = self.sines();
        sr1 / sr
    }
}

/// `rho(phi) = sin((r+1)phi)^{r+1} / (sin(phi) sin(r phi)^r)`.
pub fn rho(c: &PhiCoordinate) -> f64 {
    let (s1, sr, sr1) = c.sines();
    let r = c.r as i32;
    // grouped as (s_{r+1}/s_r)^r * (s_{r+1}/s_1) to stay in range
    (sr1 / sr).powi(r) * (sr1 / s1)
}

/// `x* = (r+1)^{r+1} / r^r`, exactly.
pub fn x_star(r: u32) -> BigRational {
    let r = r as usize;
    BigRational::new(pow(BigInt::from(r + 1), r + 1), pow(BigInt::from(r), r))
}

pub fn x_star_f64(r: u32) -> f64 {
    let rf = r as f64;
    (rf + 1.0) * ((rf + 1.0) / rf).powi(r as i32)
}

/// Invert `rho` by bisection. The bracket is halved until it stops shrinking,
/// which leaves `|rho(phi) - x|` at the rounding level of `rho`.
pub fn rho_inv(r: u32, x: f64) -> Result<PhiCoordinate> {
    let xs = x_star_f64(r);
    if !(x > 0.0 && x < xs) {
        return Err(Error::Domain(format!(
            "x = {x} is outside the open support (0, {xs})"
        )));
    }
    let mut lo = 0.0f64;
    let mut hi = PhiCoordinate::upper(r);
    let eval = |phi: f64| rho(&PhiCoordinate { r, phi });
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        // rho is decreasing
        if eval(mid) > x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let pick = |phi: f64| phi > 0.0 && phi < PhiCoordinate::upper(r);
    let candidates = [lo, hi].into_iter().filter(|&p| pick(p));
    let phi = candidates
        .min_by(|&a, &b| {
            (eval(a) - x)
                .abs()
                .partial_cmp(&(eval(b) - x).abs())
                .expect("finite")
        })
        .ok_or_else(|| Error::Domain(format!("x = {x} is too close to the support edge")))?;
    PhiCoordinate::new(r, phi)
}

/// `f(phi) = (r+1) phi - r (sin((r+1)phi)/sin(r phi)) sin(phi)`.
pub fn f_phase(c: &PhiCoordinate) -> f64 {
    let (s1, sr, sr1) = c.sines();
    let r = c.r as f64;
    (r + 1.0) * c.phi - r * (sr1 / sr) * s1
}

/// Phase shift `g = -(r/2 + sum nu) phi - Arg(1 - (r s_1/s_r) e^{i(r+1)phi}) / 2`,
/// using the principal argument.
pub fn g_shift(c: &PhiCoordinate, nu: &[u32]) -> f64 {
    let r = c.r as f64;
    let nu_sum: u32 = nu.iter().sum();
    -(r / 2.0 + nu_sum as f64) * c.phi - 0.5 * hessian_factor(c).arg()
}

/// `1 - (r sin(phi)/sin(r phi)) e^{i(r+1)phi}`: the non-trivial eigenvalue
/// factor of the saddle Hessian.
pub fn hessian_factor(c: &PhiCoordinate) -> Complex64 {
    let (s1, sr, _) = c.sines();
    let r = c.r as f64;
    Complex64::new(1.0, 0.0) - Complex64::from_polar(r * s1 / sr, (r + 1.0) * c.phi)
}

/// `|1 - (r s_1/s_r) e^{i(r+1)phi}|^2`, the bracket under the quartic root of
/// the Plancherel-Rotach prefactor.
pub fn quartic_bracket(c: &PhiCoordinate) -> f64 {
    let (s1, sr, sr1) = c.sines();
    let r = c.r as f64;
    let cr1 = ((r + 1.0) * c.phi).cos();
    (1.0 - r * s1 * cr1 / sr).powi(2) + (r * s1 * sr1 / sr).powi(2)
}

/// Derivative of `f`, closed form.
pub fn f_prime(c: &PhiCoordinate) -> f64 {
    let (s1, sr, _) = c.sines();
    let r = c.r as f64;
    let sr2 = ((r + 2.0) * c.phi).sin();
    (r * r * s1 * s1 + (r + 1.0) * sr * sr - r * sr * sr2) / (sr * sr)
}

/// Derivative of `rho`, closed form.
pub fn rho_prime(c: &PhiCoordinate) -> f64 {
    let (s1, sr, sr1) = c.sines();
    let r = c.r as f64;
    let cr1 = ((r + 1.0) * c.phi).cos();
    let num = r * r * s1 * s1 - 2.0 * r * s1 * sr * cr1 + sr * sr;
    // denominator s_1^2 s_r^{r+1} s_{r+1}^{-r}, grouped to stay in range
    let den = s1 * s1 * sr * (sr / sr1).powi(c.r as i32);
    -num / den
}

/// Conjugate saddle pair and Hessian data at a given angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SaddleData {
    pub w_plus: Complex64,
    pub w_minus: Complex64,
    pub hess_det: Complex64,
    pub re_hess_det: f64,
    pub modulus: f64,
}

pub fn saddle_points(c: &PhiCoordinate) -> SaddleData {
    let a = c.modulus();
    let r = c.r as f64;
    let w_plus = Complex64::from_polar(a, c.phi);
    let hess_det = Complex64::from_polar(a.powi(c.r as i32), r * c.phi) * hessian_factor(c);
    let (s1, sr, _) = c.sines();
    let cos = c.phi.cos();
    let re_hess_det = a.powi(c.r as i32)
        * cos.powi(c.r as i32 - 1)
        * (cos - r * s1 * ((r + 2.0) * c.phi).cos() / sr);
    SaddleData {
        w_plus,
        w_minus: w_plus.conj(),
        hess_det,
        re_hess_det,
        modulus: a,
    }
}

/// Residual scale used to judge a root `w` of `w^{r+1} - x w + x`.
pub fn trinomial_scale(x: Complex64, w: Complex64, r: u32) -> f64 {
    1.0 + x.norm() * (1.0 + w.norm()) + w.norm().powi(r as i32 + 1)
}

pub fn trinomial(x: Complex64, w: Complex64, r: u32) -> Complex64 {
    w.powi(r as i32 + 1) - x * w + x
}

const ABERTH_MAX_ITER: usize = 500;

/// All `r+1` roots of `w^{r+1} - x w + x`, by Aberth-Ehrlich iteration followed
/// by two guarded Newton steps per root.
pub fn solve_trinomial(r: u32, x: Complex64) -> Result<Vec<Complex64>> {
    if r == 0 {
        return Err(Error::InvalidParams("r must be at least 1".into()));
    }
    if x.norm() == 0.0 || !x.is_finite() {
        return Err(Error::Domain(format!(
            "trinomial parameter x = {x} must be finite and nonzero"
        )));
    }
    let d = r as usize + 1;
    let p = |w: Complex64| trinomial(x, w, r);
    let dp = |w: Complex64| (d as f64) * w.powi(r as i32) - x;
    let radius = x.norm().powf(1.0 / r as f64).max(1.0) * 1.1;
    let mut roots: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(radius, 0.4 + 2.0 * PI * k as f64 / d as f64))
        .collect();
    let mut converged = false;
    let mut iterations = 0;
    for it in 0..ABERTH_MAX_ITER {
        iterations = it + 1;
        let mut max_step = 0.0f64;
        for i in 0..d {
            let wi = roots[i];
            let pv = p(wi);
            if pv.norm() == 0.0 {
                continue;
            }
            let ratio = pv / dp(wi);
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| Complex64::new(1.0, 0.0) / (wi - roots[j]))
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if step.is_finite() {
                roots[i] = wi - step;
                max_step = max_step.max(step.norm() / (1.0 + wi.norm()));
            }
        }
        if max_step < 1e-15 {
            converged = true;
            break;
        }
    }
    for w in roots.iter_mut() {
        for _ in 0..2 {
            let pv = p(*w);
            let step = pv / dp(*w);
            let cand = *w - step;
            if step.is_finite() && p(cand).norm() < pv.norm() {
                *w = cand;
            }
        }
    }
    let ok = roots
        .iter()
        .all(|&w| w.is_finite() && p(w).norm() <= 1e-10 * trinomial_scale(x, w, r));
    if !ok
        || (!converged
            && roots
                .iter()
                .any(|&w| p(w).norm() > 1e-12 * trinomial_scale(x, w, r)))
    {
        return Err(Error::ConvergenceFailure { iterations });
    }
    Ok(roots)
}

/// `rho(phi)` as an exact dyadic rational, accurate to about `2^-bits`
/// relative, from big-float sines at the (exact) binary value of `phi`.
pub fn rho_rational(c: &PhiCoordinate, bits: u32) -> BigRational {
    let prec = bits + 32;
    let phi = BigFloatValue::from_f64(c.phi, prec);
    let times = |k: u32| phi.mul(&BigFloatValue::from_f64(k as f64, prec));
    let s1 = phi.sin();
    let sr = times(c.r).sin();
    let sr1 = times(c.r + 1).sin();
    let num = sr1.powi(c.r + 1);
    let den = s1.mul(&sr.powi(c.r));
    num.div(&den).with_precision(bits).to_rational()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn phi(r: u32, p: f64) -> PhiCoordinate {
        PhiCoordinate::new(r, p).unwrap()
    }

    #[test]
    fn domain_is_open() {
        assert!(PhiCoordinate::new(1, 0.0).is_err());
        assert!(PhiCoordinate::new(1, PI / 2.0).is_err());
        assert!(PhiCoordinate::new(2, -0.1).is_err());
        assert!(PhiCoordinate::new(2, 0.3).is_ok());
        let (c, clamped) = PhiCoordinate::clamped(1, 0.0).unwrap();
        assert!(clamped);
        assert_eq!(c.phi(), ENDPOINT_EPS);
        let (c, clamped) = PhiCoordinate::clamped(3, 0.2).unwrap();
        assert!(!clamped);
        assert_eq!(c.phi(), 0.2);
    }

    #[test]
    fn rho_examples() {
        assert!((rho(&phi(1, PI / 4.0)) - 2.0).abs() < 1e-14);
        assert!((rho(&phi(2, PI / 6.0)) - 8.0 / 3.0).abs() < 1e-14);
        assert!((rho(&phi(1, 1e-8)) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn x_star_values() {
        let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(x_star(1), q(4, 1));
        assert_eq!(x_star(2), q(27, 4));
        assert_eq!(x_star(3), q(256, 27));
        for r in 1..6 {
            assert!((x_star(r).to_f64().unwrap() - x_star_f64(r)).abs() < 1e-14);
        }
    }

    #[test]
    fn rho_inverse_examples() {
        assert!((rho_inv(1, 2.0).unwrap().phi() - PI / 4.0).abs() < 1e-14);
        assert!((rho_inv(2, 8.0 / 3.0).unwrap().phi() - PI / 6.0).abs() < 1e-14);
        assert!(rho_inv(1, 3.999999).unwrap().phi() < 1e-2);
        assert!(rho_inv(1, 4.0).is_err());
        assert!(rho_inv(1, 0.0).is_err());
    }

    #[test]
    fn f_examples() {
        assert!((f_phase(&phi(1, PI / 4.0)) - (PI / 2.0 - 1.0)).abs() < 1e-15);
        for r in 1..5 {
            assert!(f_phase(&phi(r, 1e-7)).abs() < 1e-6);
            let top = PhiCoordinate::upper(r) - 1e-9;
            assert!((f_phase(&phi(r, top)) - PI).abs() < 1e-6);
        }
    }

    #[test]
    fn g_shift_examples() {
        assert!(g_shift(&phi(1, PI / 4.0), &[0]).abs() < 1e-14);
        // r = 1, nu = 0 reduces to pi/4 - phi
        for &p in &[0.1, 0.5, 1.0, 1.4] {
            assert!((g_shift(&phi(1, p), &[0]) - (PI / 4.0 - p)).abs() < 1e-14);
        }
    }

    #[test]
    fn g_shift_is_continuous() {
        for r in 1..=4 {
            let up = PhiCoordinate::upper(r);
            let m = 20_000;
            let mut prev = g_shift(&phi(r, up / m as f64), &[1; 4][..r as usize]);
            for k in 2..m {
                let g = g_shift(&phi(r, up * k as f64 / m as f64), &[1; 4][..r as usize]);
                assert!(g.is_finite());
                assert!((g - prev).abs() < 1e-2, "jump at r={r} k={k}");
                prev = g;
            }
        }
    }

    #[test]
    fn saddle_examples() {
        let s = saddle_points(&phi(1, PI / 4.0));
        assert!((s.w_plus - Complex64::new(1.0, 1.0)).norm() < 1e-15);
        assert!(trinomial(Complex64::new(2.0, 0.0), s.w_plus, 1).norm() < 1e-14);

        let c = phi(2, PI / 6.0);
        let s = saddle_points(&c);
        let a = 2.0 / 3f64.sqrt();
        assert!((s.w_plus - Complex64::from_polar(a, PI / 6.0)).norm() < 1e-15);
        let x = Complex64::new(8.0 / 3.0, 0.0);
        assert!(trinomial(x, s.w_plus, 2).norm() < 1e-12);
        assert_eq!(s.w_minus, s.w_plus.conj());

        assert!(saddle_points(&phi(3, PI / 8.0)).re_hess_det > 0.0);
    }

    #[test]
    fn trinomial_examples() {
        let roots = solve_trinomial(1, Complex64::new(2.0, 0.0)).unwrap();
        assert!(roots
            .iter()
            .any(|w| (w - Complex64::new(1.0, 1.0)).norm() < 1e-12));
        assert!(roots
            .iter()
            .any(|w| (w - Complex64::new(1.0, -1.0)).norm() < 1e-12));

        let roots = solve_trinomial(1, Complex64::new(4.0, 0.0)).unwrap();
        for w in &roots {
            assert!((w - Complex64::new(2.0, 0.0)).norm() < 1e-6);
        }
        let roots = solve_trinomial(2, Complex64::new(6.75, 0.0)).unwrap();
        let near: Vec<_> = roots
            .iter()
            .filter(|w| (*w - Complex64::new(1.5, 0.0)).norm() < 1e-6)
            .collect();
        assert_eq!(near.len(), 2);
        for w in &roots {
            assert!(trinomial(Complex64::new(6.75, 0.0), *w, 2).norm() < 1e-10);
        }
        assert!(solve_trinomial(2, Complex64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn trinomial_contains_saddles() {
        for r in 1..=4 {
            for k in 1..10 {
                let c = phi(r, PhiCoordinate::upper(r) * k as f64 / 10.0);
                let s = saddle_points(&c);
                let roots = solve_trinomial(r, Complex64::new(rho(&c), 0.0)).unwrap();
                for w in [s.w_plus, s.w_minus] {
                    assert!(roots.iter().any(|z| (z - w).norm() < 1e-10), "r={r} k={k}");
                }
            }
        }
    }

    #[test]
    fn derivative_formulas_match_differences() {
        for r in 1..=4 {
            for k in 1..20 {
                let p = PhiCoordinate::upper(r) * k as f64 / 20.0;
                let h = 1e-6;
                let fd_f = (f_phase(&phi(r, p + h)) - f_phase(&phi(r, p - h))) / (2.0 * h);
                let fd_rho = (rho(&phi(r, p + h)) - rho(&phi(r, p - h))) / (2.0 * h);
                let c = phi(r, p);
                assert!((f_prime(&c) - fd_f).abs() < 1e-6 * (1.0 + fd_f.abs()));
                assert!((rho_prime(&c) - fd_rho).abs() < 1e-6 * (1.0 + fd_rho.abs()));
            }
        }
    }

    #[test]
    fn high_precision_rho() {
        let c = phi(2, PI / 6.0);
        let v = rho_rational(&c, 160);
        // phi is the f64 nearest pi/6, so rho differs from 8/3 by ~1e-16
        assert!((v.to_f64().unwrap() - rho(&c)).abs() < 1e-14);
        let c = phi(3, 0.4);
        assert!((rho_rational(&c, 128).to_f64().unwrap() - rho(&c)).abs() < 1e-13);
    }
}
