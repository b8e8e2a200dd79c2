//! Exact real-root isolation and the zero-counting measure of `F_n(n^r x)`.
//!
//! Isolation is Descartes' rule of signs with bisection on integer
//! polynomials: the interval `(0, 2^b)` containing every positive root is
//! mapped to `(0, 1)` and halved until each piece has zero or one sign
//! variation. Every decision is an exact integer sign. Isolated roots are
//! then narrowed by bisection at dyadic points until the requested width.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::empirical::EmpiricalMeasure;
use crate::error::{Error, Result};
use crate::poly::{build_f, horner_homogeneous, rescale_arg, ExactPolynomial, ModelParams};
use crate::saddle::{f_phase, rho_inv};

/// Default enclosure width.
pub fn default_tol() -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u64).pow(12))
}

/// Rational bracket around exactly one real root. `lo == hi` marks a root
/// found exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZeroEnclosure {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl ZeroEnclosure {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn midpoint(&self) -> BigRational {
        (&self.lo + &self.hi) / BigInt::from(2)
    }

    pub fn midpoint_f64(&self) -> f64 {
        self.midpoint().to_f64().unwrap_or(f64::NAN)
    }

    pub fn is_exact(&self) -> bool {
        self.lo == self.hi
    }
}

// ---------------------------------------------------------------------------
// square-freeness

const PRIMES: [u64; 4] = [
    (1 << 61) - 1,
    0xffff_ffff_0000_0001,
    1_000_000_007,
    998_244_353,
];

fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, q);
        }
        a = mul_mod(a, a, q);
        e >>= 1;
    }
    acc
}

fn reduce(c: &BigInt, q: u64) -> u64 {
    let m = c.mod_floor(&BigInt::from(q));
    m.to_u64().expect("residue fits")
}

fn trim_mod(p: &mut Vec<u64>) {
    while p.last() == Some(&0) {
        p.pop();
    }
}

/// Degree of `gcd(a, b)` over `Z/q`; both inputs trimmed and nonzero.
fn gcd_degree_mod(mut a: Vec<u64>, mut b: Vec<u64>, q: u64) -> usize {
    while !b.is_empty() {
        // a <- a mod b
        let inv = pow_mod(*b.last().expect("nonempty"), q - 2, q);
        while a.len() >= b.len() {
            let factor = mul_mod(*a.last().expect("nonempty"), inv, q);
            let shift = a.len() - b.len();
            for (i, &bi) in b.iter().enumerate() {
                let t = mul_mod(factor, bi, q);
                a[shift + i] = if a[shift + i] >= t {
                    a[shift + i] - t
                } else {
                    a[shift + i] + (q - t)
                };
            }
            trim_mod(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

/// Degree of `gcd(p, p')` over the rationals, by exact Euclid.
fn gcd_degree_exact(p: &[BigInt]) -> usize {
    let to_q = |v: &[BigInt]| -> Vec<BigRational> {
        v.iter()
            .map(|c| BigRational::from_integer(c.clone()))
            .collect()
    };
    let mut a = to_q(p);
    let mut b: Vec<BigRational> = to_q(&derivative_int(p));
    let trim = |v: &mut Vec<BigRational>| {
        while v.last().is_some_and(|c| c.is_zero()) {
            v.pop();
        }
    };
    trim(&mut b);
    while !b.is_empty() {
        while a.len() >= b.len() {
            let factor = a.last().expect("nonempty") / b.last().expect("nonempty");
            let shift = a.len() - b.len();
            for (i, bi) in b.iter().enumerate() {
                a[shift + i] = &a[shift + i] - &factor * bi;
            }
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a.len().saturating_sub(1)
}

fn derivative_int(p: &[BigInt]) -> Vec<BigInt> {
    p.iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c * BigInt::from(k))
        .collect()
}

/// `Ok` when `gcd(p, p')` is constant. A prime not dividing the leading
/// coefficient can only raise the gcd degree, so one prime with a trivial
/// modular gcd settles the question; otherwise exact Euclid decides.
pub fn check_square_free(p: &[BigInt]) -> Result<()> {
    if p.len() <= 2 {
        return Ok(());
    }
    let dp = derivative_int(p);
    for &q in &PRIMES {
        let mut a: Vec<u64> = p.iter().map(|c| reduce(c, q)).collect();
        let mut b: Vec<u64> = dp.iter().map(|c| reduce(c, q)).collect();
        trim_mod(&mut a);
        trim_mod(&mut b);
        if a.len() != p.len() || b.len() != dp.len() {
            continue;
        }
        if gcd_degree_mod(a, b, q) == 0 {
            return Ok(());
        }
    }
    match gcd_degree_exact(p) {
        0 => Ok(()),
        gcd_degree => Err(Error::NotSquareFree { gcd_degree }),
    }
}

// ---------------------------------------------------------------------------
// Descartes bisection

fn sign_variations(coeffs: &[BigInt]) -> usize {
    let mut last = Sign::NoSign;
    let mut count = 0;
    for c in coeffs {
        let s = c.sign();
        if s == Sign::NoSign {
            continue;
        }
        if last != Sign::NoSign && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

/// In place `P(y) -> P(y + 1)`.
fn taylor_shift_one(a: &mut [BigInt]) {
    let n = a.len();
    for i in 0..n {
        for j in (i..n - 1).rev() {
            let (lo, hi) = a.split_at_mut(j + 1);
            lo[j] += &hi[0];
        }
    }
}

/// Sign variations of `(1+y)^n P(1/(1+y))`: an upper bound on the number of
/// roots of `P` in `(0, 1)`, exact when all roots are real.
fn descartes_unit(p: &[BigInt]) -> usize {
    let mut t: Vec<BigInt> = p.iter().rev().cloned().collect();
    taylor_shift_one(&mut t);
    sign_variations(&t)
}

/// Strip a common power of two.
fn drop_twos(p: &mut [BigInt]) {
    let shift = p
        .iter()
        .filter(|c| !c.is_zero())
        .filter_map(|c| c.trailing_zeros())
        .min();
    if let Some(s) = shift {
        if s > 0 {
            for c in p.iter_mut() {
                *c >>= s;
            }
        }
    }
}

/// Dyadic interval `(c / 2^k, (c+1) / 2^k)` in the unit variable.
#[derive(Clone, Debug)]
struct Piece {
    c: BigInt,
    k: u64,
}

#[derive(Default)]
struct Found {
    isolated: Vec<Piece>,
    // exact roots `c / 2^k`
    exact: Vec<Piece>,
}

impl Found {
    fn merge(mut self, other: Found) -> Found {
        self.isolated.extend(other.isolated);
        self.exact.extend(other.exact);
        self
    }
}

/// Depth after which subtrees are explored sequentially.
const PAR_DEPTH: u64 = 6;

fn bisect(p: Vec<BigInt>, piece: Piece, depth: u64) -> Found {
    let v = descartes_unit(&p);
    if v == 0 {
        return Found::default();
    }
    if v == 1 {
        return Found {
            isolated: vec![piece],
            exact: vec![],
        };
    }
    let n = p.len() - 1;
    // left half: 2^n P(y/2)
    let mut left: Vec<BigInt> = p.iter().enumerate().map(|(i, c)| c << (n - i)).collect();
    drop_twos(&mut left);
    let mut right = left.clone();
    taylor_shift_one(&mut right);
    let mut found = Found::default();
    let c2: BigInt = &piece.c << 1usize;
    let k2 = piece.k + 1;
    if right[0].is_zero() {
        // the midpoint is a root
        found.exact.push(Piece { c: &c2 + 1, k: k2 });
        right.remove(0);
    }
    let lp = Piece {
        c: c2.clone(),
        k: k2,
    };
    let rp = Piece { c: c2 + 1, k: k2 };
    let (a, b) = if depth < PAR_DEPTH && n > 16 {
        rayon::join(
            || bisect(left, lp, depth + 1),
            || bisect(right, rp, depth + 1),
        )
    } else {
        (bisect(left, lp, depth + 1), bisect(right, rp, depth + 1))
    };
    found.merge(a).merge(b)
}

/// `b` with every root modulus strictly below `2^b`: the bound
/// `2 max_k |a_{n-k}/a_n|^{1/k}` rounded up to a power of two.
fn root_bound_log2(p: &[BigInt]) -> u64 {
    let n = p.len() - 1;
    let lead_bits = p[n].bits() as i64 - 1;
    let mut e = 0i64;
    for k in 1..=n {
        let c = &p[n - k];
        if c.is_zero() {
            continue;
        }
        let num = c.bits() as i64 - lead_bits;
        let ek = num.div_euclid(k as i64) + i64::from(num.rem_euclid(k as i64) != 0);
        e = e.max(ek);
    }
    (e + 2).max(0) as u64
}

fn dyadic(c: &BigInt, k: u64) -> BigRational {
    BigRational::new(c.clone(), BigInt::one() << k)
}

/// Isolate the positive roots of a square-free integer polynomial with
/// nonzero constant term. Returns open isolating intervals and exact roots.
fn positive_roots(p: &[BigInt]) -> (Vec<(BigRational, BigRational)>, Vec<BigRational>) {
    let n = p.len() - 1;
    let b = root_bound_log2(p);
    // q(y) = p(2^b y)
    let mut q: Vec<BigInt> = p
        .iter()
        .enumerate()
        .map(|(i, c)| c << (b * i as u64))
        .collect();
    drop_twos(&mut q);
    if n == 0 {
        return (vec![], vec![]);
    }
    let found = bisect(
        q,
        Piece {
            c: BigInt::zero(),
            k: 0,
        },
        0,
    );
    let scale = |piece: &Piece, off: i64| {
        dyadic(&(&piece.c + off), piece.k) * BigRational::from_integer(BigInt::one() << b)
    };
    let isolated = found
        .isolated
        .iter()
        .map(|pc| (scale(pc, 0), scale(pc, 1)))
        .collect();
    let exact = found.exact.iter().map(|pc| scale(pc, 0)).collect();
    (isolated, exact)
}

fn sign_at(p: &[BigInt], x: &BigRational) -> i32 {
    match horner_homogeneous(p, x.numer(), x.denom()).sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

/// Halve `(lo, hi)`, which holds exactly one simple root of `p` and no root
/// at either end, until its width is at most `tol`.
fn refine(
    p: &[BigInt],
    mut lo: BigRational,
    mut hi: BigRational,
    tol: &BigRational,
) -> ZeroEnclosure {
    let slo = sign_at(p, &lo);
    let two = BigInt::from(2);
    while &(&hi - &lo) > tol {
        let mid = (&lo + &hi) / &two;
        let s = sign_at(p, &mid);
        if s == 0 {
            return ZeroEnclosure {
                lo: mid.clone(),
                hi: mid,
            };
        }
        if s == slo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    ZeroEnclosure { lo, hi }
}

/// Divide out the linear factors of the given exact roots.
fn deflate(p: &[BigInt], roots: &[BigRational]) -> Vec<BigInt> {
    let mut coeffs: Vec<BigRational> = p
        .iter()
        .map(|c| BigRational::from_integer(c.clone()))
        .collect();
    for root in roots {
        // synthetic division by (x - root)
        let n = coeffs.len() - 1;
        let mut out = vec![BigRational::zero(); n];
        let mut carry = BigRational::zero();
        for i in (0..=n).rev() {
            let v = &coeffs[i] + &carry * root;
            if i > 0 {
                out[i - 1] = v.clone();
            }
            carry = v;
        }
        coeffs = out;
    }
    ExactPolynomial::new(coeffs).integer_form().0.to_vec()
}

fn primitive(p: &[BigInt]) -> Vec<BigInt> {
    let g = p.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() || g.is_one() {
        return p.to_vec();
    }
    p.iter().map(|c| c / &g).collect()
}

/// Enclosures of all real roots of `poly`, sorted ascending, each at most
/// `tol` wide.
///
/// Fails with [`Error::NotSquareFree`] on a repeated factor and with
/// [`Error::IsolationFailure`] when fewer than `degree` real roots exist.
pub fn isolate_zeros(poly: &ExactPolynomial, tol: &BigRational) -> Result<Vec<ZeroEnclosure>> {
    if !tol.is_positive() {
        return Err(Error::Domain("tolerance must be positive".into()));
    }
    if poly.is_zero() {
        return Err(Error::Domain(
            "the zero polynomial has no isolated roots".into(),
        ));
    }
    let degree = poly.degree();
    let p = primitive(poly.integer_form().0);
    check_square_free(&p)?;

    // a root at zero
    let mut exact: Vec<BigRational> = Vec::new();
    let mut work = p.clone();
    if work[0].is_zero() {
        exact.push(BigRational::zero());
        work.remove(0);
    }
    let (pos_iso, pos_exact) = positive_roots(&work);
    let mirrored: Vec<BigInt> = work
        .iter()
        .enumerate()
        .map(|(i, c)| if i % 2 == 1 { -c } else { c.clone() })
        .collect();
    let (neg_iso, neg_exact) = positive_roots(&mirrored);

    exact.extend(pos_exact);
    exact.extend(neg_exact.into_iter().map(|x| -x));
    let mut brackets: Vec<(BigRational, BigRational)> = pos_iso;
    brackets.extend(neg_iso.into_iter().map(|(lo, hi)| (-hi, -lo)));

    let found = exact.len() + brackets.len();
    if found != degree {
        return Err(Error::IsolationFailure { found, degree });
    }
    let reduced = if exact.is_empty() {
        p
    } else {
        deflate(&p, &exact)
    };
    let mut out: Vec<ZeroEnclosure> = brackets
        .into_par_iter()
        .map(|(lo, hi)| refine(&reduced, lo, hi, tol))
        .collect();
    out.extend(exact.into_iter().map(|x| ZeroEnclosure {
        lo: x.clone(),
        hi: x,
    }));
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(out)
}

/// Zeros of `F_n(n^r x)` as a measure with mass `1/n` at each midpoint.
pub fn rescaled_zero_measure(params: &ModelParams, tol: &BigRational) -> Result<EmpiricalMeasure> {
    let poly = rescale_arg(&build_f(params), params);
    let zeros = isolate_zeros(&poly, tol)?;
    Ok(EmpiricalMeasure::new(
        zeros.iter().map(ZeroEnclosure::midpoint_f64).collect(),
    ))
}

/// Zeros of `F_n(n^r x)` in `(eps1, eps2)`: the observed count and the
/// count `n (f(rho^{-1}(eps1)) - f(rho^{-1}(eps2))) / pi` predicted by the
/// cosine approximant.
pub fn local_zero_count(
    params: &ModelParams,
    eps1: f64,
    eps2: f64,
    tol: &BigRational,
) -> Result<(usize, f64)> {
    if eps1.is_nan() || eps2.is_nan() || eps1 >= eps2 {
        return Err(Error::Domain(format!(
            "need eps1 < eps2, got {eps1}, {eps2}"
        )));
    }
    let r = params.r();
    let c1 = rho_inv(r, eps1)?;
    let c2 = rho_inv(r, eps2)?;
    let m = rescaled_zero_measure(params, tol)?;
    let observed = m.points().iter().filter(|&&x| x > eps1 && x < eps2).count();
    let predicted = params.n() as f64 * (f_phase(&c1) - f_phase(&c2)) / std::f64::consts::PI;
    Ok((observed, predicted))
}
