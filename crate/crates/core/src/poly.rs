//! Exact construction and evaluation of the hypergeometric polynomials
//!
//! ```text
//! F_n(x) = sum_{k=0}^{n} C(n,k) (-x)^k / ((k+nu_1)! ... (k+nu_r)!)
//! P_n(x) = (-1)^n prod_j (n+nu_j)! F_n(x)
//! ```
//!
//! `P_n` is the (monic) average characteristic polynomial of `Y* Y` for the
//! product `Y = X_r ... X_1` of rectangular complex Ginibre matrices. All
//! coefficients are exact rationals; the alternating sum loses every digit in
//! fixed precision once `x` is of order `n^r`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::bigfloat::{BigFloatValue, MIN_PRECISION};
use crate::error::{Error, Result};

/// First precision tried by [`eval_bigfloat`].
pub const START_PRECISION: u32 = 128;
/// Default ceiling for precision escalation.
pub const DEFAULT_PRECISION_CAP: u32 = 16384;

/// Number of factors `r`, offsets `nu_j = N_j - N_0` and degree `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelParams {
    r: u32,
    nu: Vec<u32>,
    n: u32,
}

impl ModelParams {
    pub fn new(r: u32, nu: Vec<u32>, n: u32) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidParams("r must be at least 1".into()));
        }
        if nu.len() != r as usize {
            return Err(Error::InvalidParams(format!(
                "expected {r} offsets nu_j, got {}",
                nu.len()
            )));
        }
        Ok(Self { r, nu, n })
    }

    /// All offsets zero: square factors.
    pub fn square(r: u32, n: u32) -> Result<Self> {
        Self::new(r, vec![0; r as usize], n)
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn nu(&self) -> &[u32] {
        &self.nu
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn nu_sum(&self) -> u32 {
        self.nu.iter().sum()
    }

    /// Same `r` and offsets at another degree.
    pub fn with_n(&self, n: u32) -> Self {
        Self {
            r: self.r,
            nu: self.nu.clone(),
            n,
        }
    }
}

/// Polynomial with exact rational coefficients, `coeffs[k]` multiplying `x^k`.
///
/// An integer multiple `int_coeffs / denom` is kept alongside so that
/// evaluation and root isolation run on integers.
#[derive(Clone, Debug)]
pub struct ExactPolynomial {
    coeffs: Vec<BigRational>,
    int_coeffs: Vec<BigInt>,
    denom: BigInt,
}

impl PartialEq for ExactPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for ExactPolynomial {}

impl ExactPolynomial {
    /// Trailing zero coefficients are dropped; the zero polynomial keeps a
    /// single zero constant term.
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        let denom = coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let int_coeffs = coeffs
            .iter()
            .map(|c| c.numer() * (&denom / c.denom()))
            .collect();
        Self {
            coeffs,
            int_coeffs,
            denom,
        }
    }

    pub fn from_integers(coeffs: &[i64]) -> Self {
        Self::new(
            coeffs
                .iter()
                .map(|&c| BigRational::from_integer(BigInt::from(c)))
                .collect(),
        )
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> &BigRational {
        self.coeffs.last().expect("never empty")
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].is_zero()
    }

    /// Integer coefficients `c` and positive `d` with `self = c / d`.
    pub fn integer_form(&self) -> (&[BigInt], &BigInt) {
        (&self.int_coeffs, &self.denom)
    }

    pub fn derivative(&self) -> Self {
        if self.degree() == 0 {
            return Self::new(vec![BigRational::zero()]);
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * BigRational::from_integer(BigInt::from(k)))
                .collect(),
        )
    }

    /// Serializable form with `p/q` coefficient strings.
    pub fn to_document(&self, params: &ModelParams) -> PolynomialDocument {
        PolynomialDocument {
            r: params.r,
            nu: params.nu.clone(),
            n: params.n,
            coeffs: self
                .coeffs
                .iter()
                .map(|c| format!("{}/{}", c.numer(), c.denom()))
                .collect(),
        }
    }

    pub fn from_document(doc: &PolynomialDocument) -> Result<(ModelParams, Self)> {
        let params = ModelParams::new(doc.r, doc.nu.clone(), doc.n)?;
        let coeffs = doc
            .coeffs
            .iter()
            .map(|s| parse_rational(s))
            .collect::<Result<Vec<_>>>()?;
        Ok((params, Self::new(coeffs)))
    }
}

impl fmt::Display for ExactPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

/// JSON layout `{r, nu, n, coeffs: ["p/q", ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolynomialDocument {
    pub r: u32,
    pub nu: Vec<u32>,
    pub n: u32,
    pub coeffs: Vec<String>,
}

/// Parse `p/q`, an integer, or a finite decimal like `-1.25e3`, exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all: BigInt = format!("0{int_part}{frac_part}")
        .parse()
        .map_err(|_| bad())?;
    let scale = exp - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(bad());
    }
    let ten = BigInt::from(10);
    let mut q = if scale >= 0 {
        BigRational::from_integer(all * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(all, num_traits::pow(ten, (-scale) as usize))
    };
    if neg {
        q = -q;
    }
    Ok(q)
}

fn factorials(up_to: u32) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(up_to as usize + 1);
    let mut acc = BigInt::one();
    out.push(acc.clone());
    for k in 1..=up_to {
        acc *= k;
        out.push(acc.clone());
    }
    out
}

/// `F_n` with coefficients `(-1)^k C(n,k) / prod_j (k+nu_j)!`.
pub fn build_f(params: &ModelParams) -> ExactPolynomial {
    let n = params.n;
    let max_nu = params.nu.iter().copied().max().unwrap_or(0);
    let fact = factorials(n + max_nu);
    let mut binom = BigInt::one();
    let mut coeffs = Vec::with_capacity(n as usize + 1);
    for k in 0..=n {
        if k > 0 {
            binom = binom * (n - k + 1) / k;
        }
        let den: BigInt = params.nu.iter().map(|&v| &fact[(k + v) as usize]).product();
        let num = if k % 2 == 0 {
            binom.clone()
        } else {
            -binom.clone()
        };
        coeffs.push(BigRational::new(num, den));
    }
    ExactPolynomial::new(coeffs)
}

/// Monic `P_n = (-1)^n prod_j (n+nu_j)! F_n`.
pub fn build_p(params: &ModelParams) -> ExactPolynomial {
    let f = build_f(params);
    let n = params.n;
    let mut scale: BigInt = params
        .nu
        .iter()
        .map(|&v| factorials(n + v).pop().expect("nonempty"))
        .product();
    if n % 2 == 1 {
        scale = -scale;
    }
    let scale = BigRational::from_integer(scale);
    ExactPolynomial::new(f.coeffs.iter().map(|c| c * &scale).collect())
}

/// `poly(n^r x)` as a polynomial in `x`.
pub fn rescale_arg(poly: &ExactPolynomial, params: &ModelParams) -> ExactPolynomial {
    let step = num_traits::pow(BigInt::from(params.n), params.r as usize);
    let mut factor = BigInt::one();
    let coeffs = poly
        .coeffs
        .iter()
        .map(|c| {
            let out = c * BigRational::from_integer(factor.clone());
            factor *= &step;
            out
        })
        .collect();
    ExactPolynomial::new(coeffs)
}

/// Homogenised Horner: returns `h = q^deg * P(p/q)` for the integer form `P`.
pub(crate) fn horner_homogeneous(coeffs: &[BigInt], p: &BigInt, q: &BigInt) -> BigInt {
    let mut iter = coeffs.iter().rev();
    let mut h = iter.next().cloned().unwrap_or_default();
    let mut qpow = q.clone();
    for c in iter {
        h = h * p + c * &qpow;
        qpow *= q;
    }
    h
}

/// Exact value at a rational point.
pub fn eval_exact(poly: &ExactPolynomial, x: &BigRational) -> BigRational {
    let h = horner_homogeneous(&poly.int_coeffs, x.numer(), x.denom());
    let qn = num_traits::pow(x.denom().clone(), poly.degree());
    BigRational::new(h, qn * &poly.denom)
}

/// Sign of the value at a rational point, without forming the reduced rational.
pub fn sign_exact(poly: &ExactPolynomial, x: &BigRational) -> i32 {
    let h = horner_homogeneous(&poly.int_coeffs, x.numer(), x.denom());
    match h.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => 0,
        num_bigint::Sign::Plus => 1,
    }
}

/// Sign and natural log of `|poly(x)|` at a rational point, exact up to the
/// final `f64` logarithm. Usable far outside the `f64` range.
pub fn eval_log_abs(poly: &ExactPolynomial, x: &BigRational) -> (i32, f64) {
    let h = horner_homogeneous(&poly.int_coeffs, x.numer(), x.denom());
    let sign = match h.sign() {
        num_bigint::Sign::Minus => -1,
        num_bigint::Sign::NoSign => return (0, f64::NEG_INFINITY),
        num_bigint::Sign::Plus => 1,
    };
    let ln = |v: &BigInt| BigFloatValue::from_integer(v, 64).ln_abs();
    let value = ln(&h) - poly.degree() as f64 * ln(x.denom()) - ln(&poly.denom);
    (sign, value)
}

fn horner_bigfloat(poly: &ExactPolynomial, x: &BigFloatValue, precision: u32) -> BigFloatValue {
    let x = x.with_precision(precision);
    let mut iter = poly.coeffs.iter().rev();
    let mut acc = BigFloatValue::from_rational(iter.next().expect("never empty"), precision);
    for c in iter {
        acc = acc.mul(&x).add(&BigFloatValue::from_rational(c, precision));
    }
    acc
}

/// Evaluate in big-float arithmetic, doubling the working precision from
/// [`START_PRECISION`] until two successive results agree to a relative
/// `2^(-precision_bits/2)`. The result is rounded to `precision_bits`.
pub fn eval_bigfloat(
    poly: &ExactPolynomial,
    x: &BigFloatValue,
    precision_bits: u32,
) -> Result<BigFloatValue> {
    eval_bigfloat_with_cap(poly, x, precision_bits, DEFAULT_PRECISION_CAP)
}

pub fn eval_bigfloat_with_cap(
    poly: &ExactPolynomial,
    x: &BigFloatValue,
    precision_bits: u32,
    cap: u32,
) -> Result<BigFloatValue> {
    if precision_bits < MIN_PRECISION {
        return Err(Error::Domain(format!(
            "precision {precision_bits} is below the {MIN_PRECISION}-bit minimum"
        )));
    }
    let target = precision_bits / 2;
    let mut prec = START_PRECISION.max(precision_bits);
    let mut prev = horner_bigfloat(poly, x, prec);
    while prec < cap {
        prec = (prec * 2).min(cap);
        let cur = horner_bigfloat(poly, x, prec);
        if cur.agrees_with(&prev, target) {
            return Ok(cur.with_precision(precision_bits));
        }
        prev = cur;
    }
    Err(Error::NonConvergence { cap })
}
