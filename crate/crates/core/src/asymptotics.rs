//! Plancherel-Rotach asymptotics of `F_n(n^r x)` in the oscillatory region.
//!
//! For `x = rho(phi)`, as `n -> infinity`,
//!
//! ```text
//! F_n(n^r x) = A_n(phi) * (-s_r/s_1)^n * { cos(n (r a s_1 - (r+1) phi) + g) + o(1) }
//! A_n(phi)   = 2 (2 pi)^{-r/2} (s_r / (n s_{r+1}))^{r/2 + sum nu}
//!              * exp(n r a cos phi) * |1 - (r s_1/s_r) e^{i(r+1)phi}|^{-1/2}
//! ```
//!
//! with `a = s_{r+1}/s_r` and `g` from [`crate::saddle::g_shift`]. The
//! prefactor grows like `e^{Θ(n)}`, so it is carried as a logarithm plus a sign.

use std::f64::consts::{LN_2, PI};

use num_rational::BigRational;
use rayon::prelude::*;

use crate::bigfloat::{BigFloatValue, MIN_PRECISION};
use crate::error::{Error, Result};
use crate::poly::{build_f, eval_log_abs, rescale_arg, ExactPolynomial, ModelParams};
use crate::saddle::{f_phase, g_shift, quartic_bracket, rho_rational, PhiCoordinate};
use crate::table::sig17;

/// Bits used for the rational stand-in of `rho(phi)`; the dyadic result has a
/// denominator below `2^(RHO_BITS + 8) < 10^40` and relative error near `2^-RHO_BITS`.
pub const RHO_BITS: u32 = 120;

/// Prefactor in log form, optionally with the oscillating factor attached.
#[derive(Clone, Debug, PartialEq)]
pub struct PRValue {
    /// Natural log of the absolute prefactor.
    pub log_magnitude: f64,
    /// `n mod 2`; the prefactor carries the sign `(-1)^n`.
    pub sign_parity: u32,
    /// The cosine factor, when assembled.
    pub oscillation: Option<f64>,
    /// `(-1)^n exp(log_magnitude) * oscillation`.
    pub assembled: Option<BigFloatValue>,
}

impl PRValue {
    pub fn sign(&self) -> i32 {
        if self.sign_parity == 0 {
            1
        } else {
            -1
        }
    }
}

fn check_n(params: &ModelParams, c: &PhiCoordinate) -> Result<()> {
    if params.n() == 0 {
        return Err(Error::Domain("the asymptotic formula needs n >= 1".into()));
    }
    if params.r() != c.r() {
        return Err(Error::InvalidParams(format!(
            "coordinate has r = {} but parameters have r = {}",
            c.r(),
            params.r()
        )));
    }
    Ok(())
}

/// `cos(n (r a sin(phi) - (r+1) phi) + g(r, nu, phi))`.
pub fn cosine_approximant(params: &ModelParams, c: &PhiCoordinate) -> Result<f64> {
    check_n(params, c)?;
    let n = params.n() as f64;
    Ok((g_shift(c, params.nu()) - n * f_phase(c)).cos())
}

/// The amplitude in log-domain with the sign `(-1)^n`.
pub fn pr_prefactor_log(params: &ModelParams, c: &PhiCoordinate) -> Result<PRValue> {
    check_n(params, c)?;
    let r = params.r() as f64;
    let n = params.n() as f64;
    let phi = c.phi();
    let s1 = phi.sin();
    let sr = (r * phi).sin();
    let sr1 = ((r + 1.0) * phi).sin();
    let power = r / 2.0 + params.nu_sum() as f64;
    let log_magnitude = LN_2 - 0.5 * r * (2.0 * PI).ln()
        + power * (sr.ln() - n.ln() - sr1.ln())
        + n * r * (sr1 / sr) * phi.cos()
        + n * (sr.ln() - s1.ln())
        - 0.25 * quartic_bracket(c).ln();
    Ok(PRValue {
        log_magnitude,
        sign_parity: params.n() % 2,
        oscillation: None,
        assembled: None,
    })
}

/// Right-hand side of the asymptotic formula with the `o(1)` dropped.
pub fn pr_approx(params: &ModelParams, c: &PhiCoordinate) -> Result<PRValue> {
    let mut v = pr_prefactor_log(params, c)?;
    let osc = cosine_approximant(params, c)?;
    let bits = (20.0 + (v.log_magnitude / LN_2).ceil()).max(MIN_PRECISION as f64) as u32;
    let head = BigFloatValue::from_log(v.log_magnitude, v.sign(), bits);
    v.assembled = Some(head.mul(&BigFloatValue::from_f64(osc, bits)));
    v.oscillation = Some(osc);
    Ok(v)
}

/// `F_n(n^r x)` prepared once for repeated evaluation on a `phi` grid.
#[derive(Clone, Debug)]
pub struct ScaledPolynomial {
    params: ModelParams,
    poly: ExactPolynomial,
}

impl ScaledPolynomial {
    pub fn new(params: &ModelParams) -> Self {
        Self {
            params: params.clone(),
            poly: rescale_arg(&build_f(params), params),
        }
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn poly(&self) -> &ExactPolynomial {
        &self.poly
    }

    /// Sign and log-magnitude of `F_n(n^r rho(phi))`, evaluated exactly at a
    /// dyadic rational within `2^-RHO_BITS` (relative) of `rho(phi)`.
    pub fn log_value(&self, c: &PhiCoordinate) -> (i32, f64) {
        let x: BigRational = rho_rational(c, RHO_BITS);
        eval_log_abs(&self.poly, &x)
    }

    /// `F_n(n^r rho(phi))` divided by the signed prefactor.
    pub fn normalized(&self, c: &PhiCoordinate) -> Result<f64> {
        let pre = pr_prefactor_log(&self.params, c)?;
        let (sign, log_abs) = self.log_value(c);
        if sign == 0 {
            return Ok(0.0);
        }
        let ratio = (log_abs - pre.log_magnitude).exp();
        if !ratio.is_finite() {
            return Err(Error::NonConvergence { cap: RHO_BITS });
        }
        Ok((sign * pre.sign()) as f64 * ratio)
    }
}

/// The normalized polynomial: exact `F_n(n^r rho(phi))` over the prefactor.
pub fn normalized_poly(params: &ModelParams, c: &PhiCoordinate) -> Result<f64> {
    check_n(params, c)?;
    ScaledPolynomial::new(params).normalized(c)
}

/// One row of the normalized-polynomial / cosine-approximant table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fig1Row {
    pub phi: f64,
    pub f_tilde: f64,
    pub c_n: f64,
}

impl Fig1Row {
    pub fn csv_fields(&self) -> Vec<String> {
        vec![sig17(self.phi), sig17(self.f_tilde), sig17(self.c_n)]
    }
}

pub const FIG1_HEADER: [&str; 3] = ["phi", "F_tilde", "c_n"];

/// Configuration of the flagship plot: `r = 3`, `nu = (2,4,5)`, `n = 150`
/// on `[0.5 pi/4, 0.55 pi/4]`.
pub fn fig1_defaults() -> (ModelParams, f64, f64) {
    (
        ModelParams::new(3, vec![2, 4, 5], 150).expect("valid"),
        0.5 * PI / 4.0,
        0.55 * PI / 4.0,
    )
}

/// `count` equally spaced rows from `phi_lo` to `phi_hi` inclusive.
pub fn fig1_dataset(
    params: &ModelParams,
    phi_lo: f64,
    phi_hi: f64,
    count: usize,
) -> Result<Vec<Fig1Row>> {
    if phi_lo.is_nan() || phi_hi.is_nan() || phi_lo >= phi_hi {
        return Err(Error::Domain(format!("empty window [{phi_lo}, {phi_hi}]")));
    }
    if count == 0 {
        return Err(Error::Domain("count must be positive".into()));
    }
    let r = params.r();
    PhiCoordinate::new(r, phi_lo)?;
    PhiCoordinate::new(r, phi_hi)?;
    let scaled = ScaledPolynomial::new(params);
    let step = if count > 1 {
        (phi_hi - phi_lo) / (count - 1) as f64
    } else {
        0.0
    };
    (0..count)
        .into_par_iter()
        .map(|k| {
            let phi = if k + 1 == count && count > 1 {
                phi_hi
            } else {
                phi_lo + step * k as f64
            };
            let c = PhiCoordinate::new(r, phi)?;
            Ok(Fig1Row {
                phi,
                f_tilde: scaled.normalized(&c)?,
                c_n: cosine_approximant(params, &c)?,
            })
        })
        .collect()
}

/// For `r = 1`, `nu = 0`: the Laguerre form of the asymptotics,
/// `(-1)^n L_n(4n cos^2 phi) e^{-2n cos^2 phi} sqrt(pi n sin 2phi)` minus
/// `cos(n (sin 2phi - 2phi) - phi + pi/4)`.
pub fn laguerre_deviation(n: u32, phi: f64) -> Result<f64> {
    let params = ModelParams::new(1, vec![0], n)?;
    let c = PhiCoordinate::new(1, phi)?;
    check_n(&params, &c)?;
    // L_n(n x) with x = rho(phi) = 4 cos^2 phi
    let (sign, log_l) = ScaledPolynomial::new(&params).log_value(&c);
    let nf = n as f64;
    let log_scale = -2.0 * nf * phi.cos().powi(2) + 0.5 * (PI * nf * (2.0 * phi).sin()).ln();
    let parity = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let lhs = parity * sign as f64 * (log_l + log_scale).exp();
    let rhs = (nf * ((2.0 * phi).sin() - 2.0 * phi) - phi + PI / 4.0).cos();
    Ok(lhs - rhs)
}
