//! Numerical oracles built on the torus integral
//!
//! ```text
//! F_n(n^r x) = (2 pi)^{-r} (sin(r phi) / (n sin((r+1) phi)))^{sum nu}
//!              * int_{[-pi,pi]^r} e^{-n p(t)} q(t) dt,
//! e^{-n p(t)} = exp(n a sum_j e^{i t_j}) (1 - (s_{r+1}/s_1) e^{-i sum_j t_j})^n,
//! q(t)        = exp(-i sum_j nu_j t_j),
//! ```
//!
//! with `x = rho(phi)` and `a = s_{r+1}/s_r`: a trapezoid-rule evaluation,
//! the two-saddle approximation, and a grid search for the maximum of
//! `|e^{-p}|`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::asymptotics::pr_prefactor_log;
use crate::error::{Error, Result};
use crate::poly::ModelParams;
use crate::saddle::{f_phase, g_shift, hessian_factor, rho_inv, PhiCoordinate};

/// Largest admissible number of grid nodes.
pub const NODE_BUDGET: u128 = 100_000_000;

/// Relative bound on the imaginary part of the trapezoid sum.
pub const IMAG_TOL: f64 = 1e-10;

/// Equispaced nodes `-pi + 2 pi k / m` on each of `r` axes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QuadratureGrid {
    r: u32,
    m: usize,
}

impl QuadratureGrid {
    pub fn new(r: u32, m: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParams("r must be at least 1".into()));
        }
        if m < 8 {
            return Err(Error::InvalidParams(format!(
                "need at least 8 nodes per axis, got {m}"
            )));
        }
        let nodes = (m as u128).checked_pow(r).unwrap_or(u128::MAX);
        if nodes > NODE_BUDGET {
            return Err(Error::GuardExceeded {
                nodes,
                budget: NODE_BUDGET,
            });
        }
        Ok(Self { r, m })
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn node(&self, k: usize) -> f64 {
        -PI + 2.0 * PI * k as f64 / self.m as f64
    }

    pub fn total_nodes(&self) -> u128 {
        (self.m as u128).pow(self.r)
    }
}

/// Result of a trapezoid evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContourValue {
    /// Real part: the estimate of `F_n(n^r x)`.
    pub value: f64,
    /// Imaginary part, zero in exact arithmetic.
    pub imag: f64,
    /// The same sum with every term replaced by its modulus; the natural
    /// scale of the rounding error.
    pub scale: f64,
}

/// Sum `f(k_1..k_r)` over the grid, where the summand is
/// `prod_j axis[j][k_j] * coupling[(k_1 + .. + k_r) mod m]`. The first axis
/// is split across threads; each slice is summed in index order and the
/// slices are added in index order.
fn torus_sum(axis: &[Vec<Complex64>], coupling: &[Complex64], m: usize) -> (Complex64, f64) {
    let r = axis.len();
    let slices: Vec<(Complex64, f64)> = (0..m)
        .into_par_iter()
        .map(|k0| {
            let mut sum = Complex64::new(0.0, 0.0);
            let mut abs = 0.0;
            let mut idx = vec![0usize; r];
            idx[0] = k0;
            let inner = m.pow(r as u32 - 1);
            for _ in 0..inner {
                let mut term = axis[0][k0];
                let mut s = k0;
                for j in 1..r {
                    term *= axis[j][idx[j]];
                    s += idx[j];
                }
                term *= coupling[s % m];
                sum += term;
                abs += term.norm();
                // odometer over axes 1..r
                for k in idx.iter_mut().skip(1) {
                    *k += 1;
                    if *k < m {
                        break;
                    }
                    *k = 0;
                }
            }
            (sum, abs)
        })
        .collect();
    slices
        .into_iter()
        .fold((Complex64::new(0.0, 0.0), 0.0), |(s, a), (t, b)| {
            (s + t, a + b)
        })
}

/// `F_n(n^r x)` from the torus integral by the product trapezoid rule.
///
/// The coupling factor is raised to the integer power `n` directly, which
/// equals `exp(n log(..))` on every branch and stays defined where the
/// factor vanishes.
pub fn contour_eval(params: &ModelParams, x: f64, grid: &QuadratureGrid) -> Result<ContourValue> {
    let r = params.r();
    if grid.r() != r {
        return Err(Error::InvalidParams(format!(
            "grid has r = {} but parameters have r = {r}",
            grid.r()
        )));
    }
    let c = rho_inv(r, x)?;
    let phi = c.phi();
    let rf = r as f64;
    let s1 = phi.sin();
    let sr = (rf * phi).sin();
    let sr1 = ((rf + 1.0) * phi).sin();
    let a = sr1 / sr;
    let b = sr1 / s1;
    let n = params.n() as f64;
    let m = grid.m();
    // exp(n a e^{it}) is rescaled by exp(-n a) per axis to keep the sum in range
    let axis: Vec<Vec<Complex64>> = params
        .nu()
        .iter()
        .map(|&nu| {
            (0..m)
                .map(|k| {
                    let t = grid.node(k);
                    let e = Complex64::from_polar(1.0, t);
                    (n * a * (e - 1.0)).exp() * Complex64::from_polar(1.0, -(nu as f64) * t)
                })
                .collect()
        })
        .collect();
    let coupling: Vec<Complex64> = (0..m)
        .map(|s| {
            let total = -rf * PI + 2.0 * PI * s as f64 / m as f64;
            (Complex64::new(1.0, 0.0) - Complex64::from_polar(b, -total)).powu(params.n())
        })
        .collect();
    let (sum, abs) = torus_sum(&axis, &coupling, m);
    let weight = (2.0 * PI / m as f64).powi(r as i32) / (2.0 * PI).powi(r as i32);
    let external = (sr / (n * sr1)).powi(params.nu_sum() as i32) * (n * a * rf).exp() * weight;
    let value = sum * external;
    let scale = abs * external.abs();
    if !value.re.is_finite() {
        return Err(Error::Domain(format!(
            "trapezoid sum overflowed at n = {}, x = {x}",
            params.n()
        )));
    }
    if value.im.abs() > IMAG_TOL * value.re.abs().max(scale) {
        return Err(Error::Asymmetry {
            imag: value.im,
            value: value.re,
        });
    }
    Ok(ContourValue {
        value: value.re,
        imag: value.im,
        scale,
    })
}

/// The saddle contribution `I^(1)` at `(phi..phi)`, in log form, together
/// with the external factor.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MspValue {
    /// `ln |2 (2 pi)^{-r} ext I^(1)|`, the amplitude of the two-saddle sum.
    pub log_amplitude: f64,
    /// `arg I^(1)`, reduced to `(-pi, pi]`.
    pub phase: f64,
}

impl MspValue {
    /// `(2 pi)^{-r} ext (I^(1) + I^(2))`, with `I^(2)` the conjugate of `I^(1)`.
    pub fn value(&self) -> f64 {
        self.log_amplitude.exp() * self.phase.cos()
    }
}

fn reduce_angle(t: f64) -> f64 {
    let mut u = t.rem_euclid(2.0 * PI);
    if u > PI {
        u -= 2.0 * PI;
    }
    u
}

/// Two-saddle approximation of `F_n(n^r rho(phi))` built from `p`, `q` and
/// `det Hess p` at `(phi..phi)`. The square root of the determinant is the
/// product of principal roots of the Hessian eigenvalues `a e^{i phi}`
/// (`r - 1` times) and `a e^{i phi} H`, whose real parts are positive.
pub fn msp_value(params: &ModelParams, c: &PhiCoordinate) -> Result<MspValue> {
    let r = params.r();
    if c.r() != r {
        return Err(Error::InvalidParams(
            "coordinate and parameters disagree on r".into(),
        ));
    }
    if params.n() == 0 {
        return Err(Error::Domain(
            "the saddle approximation needs n >= 1".into(),
        ));
    }
    let rf = r as f64;
    let n = params.n() as f64;
    let phi = c.phi();
    let s1 = phi.sin();
    let sr = (rf * phi).sin();
    let sr1 = ((rf + 1.0) * phi).sin();
    let a = sr1 / sr;
    let i = Complex64::new(0.0, 1.0);
    // -p(phi..phi) = r a e^{i phi} + log(1 - (s_{r+1}/s_1) e^{-i r phi})
    let coupling = Complex64::new(1.0, 0.0) - Complex64::from_polar(sr1 / s1, -rf * phi);
    let minus_np = n * rf * a * (i * phi).exp() + n * coupling.ln();
    let log_q = -i * (params.nu_sum() as f64 * phi);
    let lam = Complex64::from_polar(a, phi);
    let sqrt_det = lam.sqrt().powu(r - 1) * (lam * hessian_factor(c)).sqrt();
    let log_i1 = 0.5 * rf * (2.0 * PI / n).ln() + minus_np + log_q - sqrt_det.ln();
    let external = params.nu_sum() as f64 * (sr / (n * sr1)).ln() - rf * (2.0 * PI).ln();
    Ok(MspValue {
        log_amplitude: std::f64::consts::LN_2 + external + log_i1.re,
        phase: reduce_angle(log_i1.im),
    })
}

/// Largest relative difference between the two-saddle sum and the
/// Plancherel-Rotach right-hand side, compared as complex amplitudes
/// `A e^{i theta}` so that a vanishing cosine does not inflate the ratio.
pub fn msp_consistency(params: &ModelParams, c: &PhiCoordinate) -> Result<f64> {
    let msp = msp_value(params, c)?;
    let pr = pr_prefactor_log(params, c)?;
    let sign_phase = if pr.sign() < 0 { PI } else { 0.0 };
    let pr_phase = g_shift(c, params.nu()) - params.n() as f64 * f_phase(c) + sign_phase;
    let d_log = msp.log_amplitude - pr.log_magnitude;
    let d_phase = reduce_angle(msp.phase - pr_phase);
    Ok((Complex64::new(d_log, d_phase).exp() - 1.0).norm())
}

/// Grid maximizer of `h` and its distance to the nearer of `(phi..phi)`,
/// `(-phi..-phi)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HMax {
    pub argmax: Vec<f64>,
    pub distance: f64,
    /// One grid cell, `2 pi sqrt(r) / m`.
    pub cell: f64,
}

/// `ln h(x) = 2 a sum cos x_j + ln(s_1^2 + s_{r+1}^2 - 2 s_1 s_{r+1} cos(sum x_j))`.
pub fn log_h(c: &PhiCoordinate, x: &[f64]) -> f64 {
    let r = c.r() as f64;
    let phi = c.phi();
    let s1 = phi.sin();
    let sr1 = ((r + 1.0) * phi).sin();
    let a = c.modulus();
    let sum: f64 = x.iter().sum();
    2.0 * a * x.iter().map(|t| t.cos()).sum::<f64>()
        + (s1 * s1 + sr1 * sr1 - 2.0 * s1 * sr1 * sum.cos()).ln()
}

/// Exhaustive search for the maximum of `h` over the `m^r` grid.
pub fn verify_h_max(c: &PhiCoordinate, grid_m: usize) -> Result<HMax> {
    if grid_m < 64 {
        return Err(Error::InvalidParams(format!(
            "need at least 64 nodes per axis, got {grid_m}"
        )));
    }
    let grid = QuadratureGrid::new(c.r(), grid_m)?;
    let r = c.r() as usize;
    let m = grid_m;
    let rf = r as f64;
    let phi = c.phi();
    let s1 = phi.sin();
    let sr1 = ((rf + 1.0) * phi).sin();
    let a = c.modulus();
    let cos_axis: Vec<f64> = (0..m).map(|k| 2.0 * a * grid.node(k).cos()).collect();
    let coupling: Vec<f64> = (0..m)
        .map(|s| {
            let total = -rf * PI + 2.0 * PI * s as f64 / m as f64;
            (s1 * s1 + sr1 * sr1 - 2.0 * s1 * sr1 * total.cos()).ln()
        })
        .collect();
    let best = (0..m)
        .into_par_iter()
        .map(|k0| {
            let mut idx = vec![0usize; r];
            idx[0] = k0;
            let mut best = (f64::NEG_INFINITY, idx.clone());
            for _ in 0..m.pow(r as u32 - 1) {
                let mut v = 0.0;
                let mut s = 0;
                for &k in &idx {
                    v += cos_axis[k];
                    s += k;
                }
                v += coupling[s % m];
                if v > best.0 {
                    best = (v, idx.clone());
                }
                for k in idx.iter_mut().skip(1) {
                    *k += 1;
                    if *k < m {
                        break;
                    }
                    *k = 0;
                }
            }
            best
        })
        .reduce_with(|x, y| if y.0 > x.0 { y } else { x })
        .expect("grid is nonempty");
    let argmax: Vec<f64> = best.1.iter().map(|&k| grid.node(k)).collect();
    let dist = |sign: f64| {
        argmax
            .iter()
            .map(|t| (t - sign * phi).powi(2))
            .sum::<f64>()
            .sqrt()
    };
    Ok(HMax {
        distance: dist(1.0).min(dist(-1.0)),
        cell: 2.0 * PI * rf.sqrt() / m as f64,
        argmax,
    })
}
