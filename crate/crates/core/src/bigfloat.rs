//! Binary floating point with an arbitrary-size mantissa.
//!
//! A [`BigFloatValue`] is `mantissa * 2^exponent` where the mantissa carries at
//! most `precision` significant bits. Every arithmetic result is rounded to
//! nearest (ties to even), so a single operation is accurate to half an ulp.
//! The type is deliberately small: it supports exactly what polynomial
//! evaluation and log-domain assembly need.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Smallest precision accepted anywhere in the crate.
pub const MIN_PRECISION: u32 = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloatValue {
    mantissa: BigInt,
    exponent: i64,
    precision: u32,
}

fn bits(m: &BigUint) -> i64 {
    m.bits() as i64
}

/// Round `mag * 2^exp` to `prec` bits. `sticky` records nonzero bits already
/// discarded below `mag`.
fn round_mag(mag: BigUint, exp: i64, sticky: bool, prec: u32) -> (BigUint, i64) {
    let nb = bits(&mag);
    let prec = prec as i64;
    if nb <= prec {
        return (mag, exp);
    }
    let shift = (nb - prec) as u64;
    let one = BigUint::one();
    let rem = &mag & ((&one << shift) - &one);
    let half = &one << (shift - 1);
    let mut q = mag >> shift;
    let round_up = match rem.cmp(&half) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => sticky || q.is_odd(),
    };
    let mut e = exp + shift as i64;
    if round_up {
        q += 1u32;
        if bits(&q) > prec {
            q >>= 1u32;
            e += 1;
        }
    }
    (q, e)
}

impl BigFloatValue {
    pub fn zero(precision: u32) -> Self {
        Self {
            mantissa: BigInt::zero(),
            exponent: 0,
            precision: precision.max(MIN_PRECISION),
        }
    }

    fn from_parts(sign: Sign, mag: BigUint, exp: i64, sticky: bool, precision: u32) -> Self {
        let precision = precision.max(MIN_PRECISION);
        if mag.is_zero() {
            return Self::zero(precision);
        }
        let (m, e) = round_mag(mag, exp, sticky, precision);
        let mut out = Self {
            mantissa: BigInt::from_biguint(sign, m),
            exponent: e,
            precision,
        };
        out.strip();
        out
    }

    // Canonical form: odd mantissa (or zero). Keeps equality structural.
    fn strip(&mut self) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let tz = self.mantissa.magnitude().trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mantissa >>= tz;
            self.exponent += tz as i64;
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    /// -1, 0 or 1.
    pub fn signum(&self) -> i32 {
        match self.mantissa.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn from_f64(x: f64, precision: u32) -> Self {
        assert!(x.is_finite(), "non-finite value {x} has no big-float form");
        if x == 0.0 {
            return Self::zero(precision);
        }
        let raw = x.to_bits();
        let exp_field = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (mant, exp) = if exp_field == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp_field - 1075)
        };
        let sign = if x < 0.0 { Sign::Minus } else { Sign::Plus };
        Self::from_parts(sign, BigUint::from(mant), exp, false, precision)
    }

    pub fn from_integer(v: &BigInt, precision: u32) -> Self {
        Self::from_parts(v.sign(), v.magnitude().clone(), 0, false, precision)
    }

    /// Correctly rounded conversion of an exact rational.
    pub fn from_rational(q: &BigRational, precision: u32) -> Self {
        let precision = precision.max(MIN_PRECISION);
        if q.is_zero() {
            return Self::zero(precision);
        }
        let num = q.numer().magnitude().clone();
        let den = q.denom().magnitude().clone();
        let sign = if q.is_negative() {
            Sign::Minus
        } else {
            Sign::Plus
        };
        // Quotient gets at least precision + 2 bits before rounding.
        let s = precision as i64 + 2 + bits(&den) - bits(&num);
        let (quot, rem) = if s >= 0 {
            (num << (s as u64)).div_rem(&den)
        } else {
            num.div_rem(&(den << ((-s) as u64)))
        };
        Self::from_parts(sign, quot, -s, !rem.is_zero(), precision)
    }

    /// Exact dyadic value as a rational.
    pub fn to_rational(&self) -> BigRational {
        if self.exponent >= 0 {
            BigRational::from_integer(&self.mantissa << (self.exponent as u64))
        } else {
            BigRational::new(
                self.mantissa.clone(),
                BigInt::one() << ((-self.exponent) as u64),
            )
        }
    }

    /// Round to a different working precision.
    pub fn with_precision(&self, precision: u32) -> Self {
        Self::from_parts(
            self.mantissa.sign(),
            self.mantissa.magnitude().clone(),
            self.exponent,
            false,
            precision,
        )
    }

    /// `sign * exp(log_magnitude)` assembled without ever forming the
    /// exponential in `f64`. Accuracy is that of the `f64` input.
    pub fn from_log(log_magnitude: f64, sign: i32, precision: u32) -> Self {
        if sign == 0 || log_magnitude == f64::NEG_INFINITY {
            return Self::zero(precision);
        }
        let e2 = log_magnitude / std::f64::consts::LN_2;
        let k = e2.floor();
        let head = (e2 - k).exp2() * if sign < 0 { -1.0 } else { 1.0 };
        let mut v = Self::from_f64(head, precision);
        v.exponent += k as i64;
        v
    }

    pub fn neg(&self) -> Self {
        Self {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
            precision: self.precision,
        }
    }

    pub fn abs(&self) -> Self {
        Self {
            mantissa: self.mantissa.abs(),
            exponent: self.exponent,
            precision: self.precision,
        }
    }

    /// Multiply by `2^k` exactly.
    pub fn mul_pow2(&self, k: i64) -> Self {
        let mut out = self.clone();
        if !out.is_zero() {
            out.exponent += k;
        }
        out
    }

    fn top(&self) -> i64 {
        self.exponent + bits(self.mantissa.magnitude())
    }

    pub fn add(&self, other: &Self) -> Self {
        let precision = self.precision.max(other.precision);
        if self.is_zero() {
            return other.with_precision(precision);
        }
        if other.is_zero() {
            return self.with_precision(precision);
        }
        let (big, small) = if self.top() >= other.top() {
            (self, other)
        } else {
            (other, self)
        };
        // A term far below the rounding point only matters through its sign;
        // replace it by a tiny stand-in with that sign.
        let floor = big.top() - precision as i64 - 4;
        let small_owned;
        let small = if small.top() < floor {
            small_owned = Self {
                mantissa: BigInt::from(small.signum()),
                exponent: floor - 1,
                precision,
            };
            &small_owned
        } else {
            small
        };
        let e = big.exponent.min(small.exponent);
        let a = &big.mantissa << ((big.exponent - e) as u64);
        let b = &small.mantissa << ((small.exponent - e) as u64);
        let s = a + b;
        Self::from_parts(s.sign(), s.magnitude().clone(), e, false, precision)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let precision = self.precision.max(other.precision);
        let m = &self.mantissa * &other.mantissa;
        Self::from_parts(
            m.sign(),
            m.magnitude().clone(),
            self.exponent + other.exponent,
            false,
            precision,
        )
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "big-float division by zero");
        let precision = self.precision.max(other.precision);
        if self.is_zero() {
            return Self::zero(precision);
        }
        let a = self.mantissa.magnitude();
        let b = other.mantissa.magnitude();
        let s = (precision as i64 + 2 + bits(b) - bits(a)).max(0);
        let (q, r) = (a << (s as u64)).div_rem(b);
        let sign = if self.signum() * other.signum() < 0 {
            Sign::Minus
        } else {
            Sign::Plus
        };
        Self::from_parts(
            sign,
            q,
            self.exponent - other.exponent - s,
            !r.is_zero(),
            precision,
        )
    }

    /// Nearest `f64`; overflows to infinity and underflows to zero.
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let (m, e) = round_mag(self.mantissa.magnitude().clone(), self.exponent, false, 53);
        let mf = m.to_u64().expect("53-bit mantissa fits in u64") as f64;
        let v = ldexp(mf, e);
        if self.signum() < 0 {
            -v
        } else {
            v
        }
    }

    /// Natural log of `|self|` as an `f64`; finite for any nonzero value.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (m, e) = round_mag(self.mantissa.magnitude().clone(), self.exponent, false, 53);
        let mf = m.to_u64().expect("53-bit mantissa fits in u64") as f64;
        mf.ln() + e as f64 * std::f64::consts::LN_2
    }

    /// Sine by Taylor series, intended for moderate arguments (|x| ≲ 8).
    pub fn sin(&self) -> Self {
        let precision = self.precision;
        let work = precision + 32;
        let x = self.with_precision(work);
        let x2 = x.mul(&x).neg();
        let mut term = x.clone();
        let mut sum = x.clone();
        let cutoff = -(work as i64) - 8 + sum.top().max(-(work as i64));
        let mut k: u64 = 1;
        loop {
            let denom = Self::from_integer(&BigInt::from((2 * k) * (2 * k + 1)), work);
            term = term.mul(&x2).div(&denom);
            if term.is_zero() || term.top() < cutoff {
                break;
            }
            sum = sum.add(&term);
            k += 1;
            assert!(k < 10_000, "sine series failed to converge");
        }
        sum.with_precision(precision)
    }

    /// Integer power by repeated squaring.
    pub fn powi(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::from_f64(1.0, self.precision);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        acc
    }

    /// `|self - other| <= tol * max(|self|, |other|)` with `tol = 2^-tol_bits`.
    /// Two zeros are never considered in agreement.
    pub fn agrees_with(&self, other: &Self, tol_bits: u32) -> bool {
        if self.is_zero() || other.is_zero() {
            return false;
        }
        if self.signum() != other.signum() {
            return false;
        }
        let diff = self.sub(other);
        if diff.is_zero() {
            return true;
        }
        let scale = self.top().max(other.top());
        diff.top() <= scale - tol_bits as i64
    }
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * 2f64.powi(e as i32)
}

impl PartialOrd for BigFloatValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.sub(other).signum().cmp(&0))
    }
}

impl fmt::Display for BigFloatValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() && (v == 0.0 || v.abs() > 1e-300) {
            write!(f, "{v:e}")
        } else {
            // log10 form for values outside the f64 range
            let l10 = self.ln_abs() / std::f64::consts::LN_10;
            let ip = l10.floor();
            let head = 10f64.powf(l10 - ip) * self.signum() as f64;
            write!(f, "{head}e{ip}")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn exact_f64_round_trip() {
        for &x in &[1.0, -0.5, 3.25, 1e-300, 7.0e200, std::f64::consts::PI] {
            assert_eq!(BigFloatValue::from_f64(x, 64).to_f64(), x);
        }
    }

    #[test]
    fn rational_conversion_is_correctly_rounded() {
        let third = BigFloatValue::from_rational(&q(1, 3), 128);
        let err = (third.to_rational() - q(1, 3)).abs();
        // half an ulp: 1/3 lies in [1/4, 1/2), ulp = 2^-(128+1)
        let half_ulp = BigRational::new(BigInt::one(), BigInt::one() << 130u32);
        assert!(err <= half_ulp);
        assert!((third.to_f64() - 1.0 / 3.0).abs() < 1e-17);
    }

    #[test]
    fn large_numerator_conversion() {
        let big = BigRational::from_integer(BigInt::one() << 500u32)
            / BigRational::from_integer(BigInt::from(3));
        let v = BigFloatValue::from_rational(&big, 64);
        let rel = ((v.to_rational() - &big) / &big).abs();
        assert!(rel < BigRational::new(BigInt::one(), BigInt::one() << 63u32));
    }

    #[test]
    fn arithmetic_matches_f64_on_simple_values() {
        let a = BigFloatValue::from_f64(1.5, 64);
        let b = BigFloatValue::from_f64(-0.25, 64);
        assert_eq!(a.add(&b).to_f64(), 1.25);
        assert_eq!(a.mul(&b).to_f64(), -0.375);
        assert_eq!(a.div(&b).to_f64(), -6.0);
        assert_eq!(a.sub(&a).signum(), 0);
    }

    #[test]
    fn tiny_addend_keeps_rounding_direction() {
        let one = BigFloatValue::from_f64(1.0, 64);
        let tiny = BigFloatValue::from_f64(1e-200, 64);
        let s = one.add(&tiny);
        assert!(s >= one);
        assert_eq!(s.to_f64(), 1.0);
    }

    #[test]
    fn sine_matches_f64() {
        for &x in &[0.1, 0.5, 1.0, 2.0, 3.0, 3.1] {
            let s = BigFloatValue::from_f64(x, 128).sin().to_f64();
            assert!((s - f64::sin(x)).abs() < 1e-15, "sin({x})");
        }
    }

    #[test]
    fn log_assembly_beyond_f64_range() {
        let v = BigFloatValue::from_log(2000.0, -1, 128);
        assert_eq!(v.signum(), -1);
        assert!((v.ln_abs() - 2000.0).abs() < 1e-12);
        assert!(v.to_f64().is_infinite());
    }

    #[test]
    fn agreement_test_respects_sign() {
        let a = BigFloatValue::from_f64(1.0, 64);
        let b = BigFloatValue::from_f64(1.0 + 1e-12, 64);
        assert!(a.agrees_with(&b, 32));
        assert!(!a.agrees_with(&b, 48));
        assert!(!a.agrees_with(&a.neg(), 8));
    }
}
