//! The Fuss-Catalan distribution of order `r` on `(0, x*)`, `x* = (r+1)^{r+1}/r^r`.
//!
//! Everything is computed through the angle `phi`: with `x = rho(phi)`,
//!
//! ```text
//! density  v(rho(phi)) = sin^2(phi) sin^{r-1}(r phi) / (pi sin^r((r+1) phi))
//! cdf      V(rho(phi)) = 1 - f(phi)/pi
//! ```
//!
//! and [`crate::saddle::rho_inv`] is the only way back from `x` to `phi`.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::rng::Stream;
use crate::saddle::{
    f_phase, f_prime, rho, rho_inv, rho_prime, solve_trinomial, trinomial, trinomial_scale,
    x_star_f64, PhiCoordinate,
};

/// Relative target for all quadratures in this module.
pub const QUAD_REL_TOL: f64 = 1e-12;

/// Radius of the anchor point from which the Stieltjes branch is tracked.
pub const STIELTJES_ANCHOR: f64 = 1e6;

/// Minimum distance of the continuation path from the branch points `0`, `x*`.
pub const BRANCH_GUARD: f64 = 1e-6;

const SAMPLE_CHUNK: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FussCatalanDist {
    r: u32,
}

impl FussCatalanDist {
    pub fn new(r: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParams("r must be at least 1".into()));
        }
        Ok(Self { r })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Right end of the support.
    pub fn x_star(&self) -> f64 {
        x_star_f64(self.r)
    }

    fn coord(&self, phi: f64) -> Result<PhiCoordinate> {
        PhiCoordinate::new(self.r, phi)
    }

    fn check(&self, c: &PhiCoordinate) -> Result<()> {
        if c.r() != self.r {
            return Err(Error::InvalidParams(format!(
                "coordinate has r = {} but the distribution has r = {}",
                c.r(),
                self.r
            )));
        }
        Ok(())
    }

    /// `v(rho(phi))`.
    pub fn density_phi(&self, c: &PhiCoordinate) -> Result<f64> {
        self.check(c)?;
        let r = self.r as f64;
        let phi = c.phi();
        let s1 = phi.sin();
        let sr = (r * phi).sin();
        let sr1 = ((r + 1.0) * phi).sin();
        Ok(s1 * s1 * (sr / sr1).powi(self.r as i32 - 1) / (PI * sr1))
    }

    /// `-f'(phi) / (pi rho'(phi))`, the density as a ratio of derivatives.
    pub fn density_from_derivatives(&self, c: &PhiCoordinate) -> Result<f64> {
        self.check(c)?;
        Ok(-f_prime(c) / (PI * rho_prime(c)))
    }

    /// Density at `x`; zero outside the open support. Where `rho_inv` cannot
    /// resolve a point next to an edge, the edge limit is returned (infinite
    /// at 0, zero at `x*`).
    pub fn density_x(&self, x: f64) -> f64 {
        let xs = self.x_star();
        if !(x > 0.0 && x < xs) {
            return 0.0;
        }
        match rho_inv(self.r, x) {
            Ok(c) => self.density_phi(&c).unwrap_or(0.0),
            Err(_) if x < 0.5 * xs => f64::INFINITY,
            Err(_) => 0.0,
        }
    }

    /// `V(rho(phi)) = 1 - f(phi)/pi`.
    pub fn cdf_phi(&self, c: &PhiCoordinate) -> Result<f64> {
        self.check(c)?;
        Ok(1.0 - f_phase(c) / PI)
    }

    /// `1 - (r+1)phi/pi + r sin((r+1)phi) sin(phi) / (pi sin(r phi))`, the
    /// same value written out term by term.
    pub fn cdf_phi_expanded(&self, c: &PhiCoordinate) -> Result<f64> {
        self.check(c)?;
        let r = self.r as f64;
        let phi = c.phi();
        Ok(1.0 - (r + 1.0) * phi / PI
            + r * ((r + 1.0) * phi).sin() * phi.sin() / (PI * (r * phi).sin()))
    }

    /// Distribution function, continuous on the whole line.
    pub fn cdf(&self, x: f64) -> f64 {
        let xs = self.x_star();
        if x.is_nan() {
            return f64::NAN;
        }
        if x <= 0.0 {
            return 0.0;
        }
        if x >= xs {
            return 1.0;
        }
        match rho_inv(self.r, x) {
            Ok(c) => (1.0 - f_phase(&c) / PI).clamp(0.0, 1.0),
            Err(_) if x < 0.5 * xs => 0.0,
            Err(_) => 1.0,
        }
    }

    /// Inverse of [`Self::cdf`], by bisection on `f(phi) = pi (1 - p)`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("p = {p} is outside (0, 1)")));
        }
        let target = PI * (1.0 - p);
        let mut lo = 0.0f64;
        let mut hi = PhiCoordinate::upper(self.r);
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            // f increases from 0 to pi
            if f_phase(&self.coord(mid)?) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let phi = if lo > 0.0 { lo } else { hi };
        Ok(rho(&self.coord(phi)?))
    }

    /// `C(rn+n, n) / (rn+1)`.
    pub fn moment_exact(&self, n: u32) -> BigRational {
        fuss_catalan_number(self.r, n)
    }

    /// `(1/pi) int_0^{pi/(r+1)} rho(phi)^n f'(phi) dphi`.
    pub fn moment_quadrature(&self, n: u32) -> Result<f64> {
        let r = self.r;
        let q = integrate(
            |phi| {
                let c = PhiCoordinate::new(r, phi).expect("interior node");
                rho(&c).powi(n as i32) * f_prime(&c)
            },
            0.0,
            PhiCoordinate::upper(r),
            QUAD_REL_TOL,
            0.0,
        )?;
        Ok(q.value / PI)
    }

    /// Total mass `int v(rho(phi)) (-rho'(phi)) dphi`.
    pub fn normalization(&self) -> Result<f64> {
        let q = integrate(
            |phi| {
                let c = self.coord(phi).expect("interior node");
                self.density_phi(&c).expect("same r") * -rho_prime(&c)
            },
            0.0,
            PhiCoordinate::upper(self.r),
            QUAD_REL_TOL,
            0.0,
        )?;
        Ok(q.value)
    }

    /// `count` draws by inverse-cdf sampling. Draws are split into chunks of
    /// 4096, chunk `k` using stream `k`, so the output depends only on `seed`.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<f64> {
        let chunks = count.div_ceil(SAMPLE_CHUNK);
        (0..chunks)
            .into_par_iter()
            .flat_map_iter(|k| {
                let mut s = Stream::new(seed, k as u64);
                let len = SAMPLE_CHUNK.min(count - k * SAMPLE_CHUNK);
                (0..len)
                    .map(move |_| {
                        let u = s.uniform_open();
                        self.quantile(u).expect("u in (0,1)")
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    /// Root `w_1(z)` of `w^{r+1} - z w + z = 0` with `w_1 -> 1` at infinity.
    pub fn stieltjes_branch(&self, z: Complex64) -> Result<Complex64> {
        let xs = self.x_star();
        if !z.is_finite() {
            return Err(Error::Domain(format!("z = {z} is not finite")));
        }
        if z.im == 0.0 && z.re >= 0.0 && z.re <= xs {
            return Err(Error::Domain(format!(
                "z = {} lies on the support [0, {xs}]",
                z.re
            )));
        }
        let radius = z.norm();
        let u = z / radius;
        if radius < BRANCH_GUARD {
            return Err(Error::BranchAmbiguity(format!(
                "z = {z} is within {BRANCH_GUARD} of the branch point 0"
            )));
        }
        let top = radius.max(STIELTJES_ANCHOR);
        // closest approach of the radial path {t u : radius <= t <= top} to x*
        let t0 = (xs * u.re).clamp(radius, top);
        if (u * t0 - xs).norm() < BRANCH_GUARD {
            return Err(Error::BranchAmbiguity(format!(
                "continuation to z = {z} passes within {BRANCH_GUARD} of x* = {xs}"
            )));
        }
        let one = Complex64::new(1.0, 0.0);
        let anchor = u * top;
        let mut w = nearest(&solve_trinomial(self.r, anchor)?, one).0;
        let mut t = top;
        let mut ratio = 0.9f64;
        while t > radius {
            let next = (t * ratio).max(radius);
            let roots = solve_trinomial(self.r, u * next)?;
            let (cand, d1, d2) = nearest(&roots, w);
            if d1 < 0.25 * d2 {
                w = cand;
                t = next;
                ratio = (ratio * 0.8).max(0.5);
            } else {
                ratio = 1.0 - 0.5 * (1.0 - ratio);
                if 1.0 - ratio < 1e-13 {
                    return Err(Error::BranchAmbiguity(format!(
                        "roots coalesce while continuing to z = {z}"
                    )));
                }
            }
        }
        Ok(w)
    }

    /// `F(z) = int v(x)/(z - x) dx = w_1(z)/z`.
    pub fn stieltjes(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.stieltjes_branch(z)? / z)
    }

    /// `|w^{r+1} - z w + z|` at the returned branch, relative to the size of
    /// the terms.
    pub fn stieltjes_residual(&self, z: Complex64) -> Result<f64> {
        let w = self.stieltjes_branch(z)?;
        Ok(trinomial(z, w, self.r).norm() / trinomial_scale(z, w, self.r))
    }

    /// `F(z)` by direct quadrature, `(1/pi) int f'(phi) / (z - rho(phi)) dphi`.
    pub fn stieltjes_quadrature(&self, z: Complex64) -> Result<Complex64> {
        let r = self.r;
        let part = |take_re: bool| {
            integrate(
                |phi| {
                    let c = PhiCoordinate::new(r, phi).expect("interior node");
                    let v = f_prime(&c) / (z - rho(&c));
                    if take_re {
                        v.re
                    } else {
                        v.im
                    }
                },
                0.0,
                PhiCoordinate::upper(r),
                QUAD_REL_TOL,
                1e-300,
            )
        };
        Ok(Complex64::new(part(true)?.value, part(false)?.value) / PI)
    }

    /// Moments `m_0..=m_kmax` read off the expansion `z F(z) = sum m_k z^{-k}`
    /// by a discrete Cauchy integral on `|z| = 2 x*`. The trapezoidal rule
    /// on `nodes` points is exact up to a relative `2^{-nodes}` alias.
    pub fn stieltjes_moments(&self, kmax: u32, nodes: usize) -> Result<Vec<f64>> {
        if nodes <= kmax as usize {
            return Err(Error::InvalidParams(format!(
                "need more than {kmax} nodes, got {nodes}"
            )));
        }
        let radius = 2.0 * self.x_star();
        // nodes are offset by half a step to keep z off the real axis
        let values: Vec<(f64, Complex64)> = (0..nodes)
            .into_par_iter()
            .map(|j| {
                let theta = 2.0 * PI * (j as f64 + 0.5) / nodes as f64;
                let z = Complex64::from_polar(radius, theta);
                Ok((theta, self.stieltjes_branch(z)?))
            })
            .collect::<Result<_>>()?;
        Ok((0..=kmax)
            .map(|k| {
                let s: Complex64 = values
                    .iter()
                    .map(|&(theta, w)| w * Complex64::from_polar(1.0, k as f64 * theta))
                    .sum();
                (s / nodes as f64).re * radius.powi(k as i32)
            })
            .collect())
    }

    /// Both sides of `int_0^1 sin^{(r+1)n}(pi t) / (sin^n(pi t/(r+1)) sin^{rn}(r pi t/(r+1))) dt
    /// = C((r+1)n, n)`. The integrand is `rho(pi t/(r+1))^n`; its endpoint
    /// limits are `x*^n` at 0 and `0` at 1 (for `n >= 1`).
    pub fn identity_check(&self, n: u32) -> Result<(f64, BigInt)> {
        let r = self.r as f64;
        let xs = self.x_star();
        let rhs = num_integer::binomial(BigInt::from((self.r + 1) * n), BigInt::from(n));
        let integrand = |t: f64| {
            if n == 0 {
                return 1.0;
            }
            if t <= 0.0 {
                return xs.powi(n as i32);
            }
            if t >= 1.0 {
                return 0.0;
            }
            let nf = n as f64;
            let num = (PI * t).sin().powf((r + 1.0) * nf);
            let den =
                (PI * t / (r + 1.0)).sin().powf(nf) * (r * PI * t / (r + 1.0)).sin().powf(r * nf);
            if den == 0.0 {
                xs.powi(n as i32)
            } else {
                num / den
            }
        };
        let q = integrate(integrand, 0.0, 1.0, QUAD_REL_TOL, 0.0)?;
        Ok((q.value, rhs))
    }
}

fn nearest(roots: &[Complex64], target: Complex64) -> (Complex64, f64, f64) {
    let mut best = (roots[0], f64::INFINITY, f64::INFINITY);
    for &w in roots {
        let d = (w - target).norm();
        if d < best.1 {
            best = (w, d, best.1);
        } else if d < best.2 {
            best.2 = d;
        }
    }
    best
}

/// `C(rn+n, n) / (rn+1)` as an exact rational (always an integer).
pub fn fuss_catalan_number(r: u32, n: u32) -> BigRational {
    let top = BigInt::from(r as u64 * n as u64 + n as u64);
    let b = num_integer::binomial(top, BigInt::from(n));
    BigRational::new(b, BigInt::from(r as u64 * n as u64 + 1))
}
