//! Number-theoretic primitives.
//!
//! Everything here is exact except [`inv_zeta`] and the [`ZetaBracket`]
//! helpers, which return floating enclosures of `ζ(t)` built from a
//! truncated Dirichlet series and an integral bound on the tail.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Prime-exponent decomposition of `|value|`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    value: BigInt,
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    pub fn value(&self) -> &BigInt {
        &self.value
    }

    /// `(prime, exponent)` pairs, primes strictly increasing.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Primes `p` with `p^k` dividing the value.
    pub fn primes_with_power(&self, k: u32) -> Vec<u64> {
        self.factors
            .iter()
            .filter(|&&(_, e)| e >= k)
            .map(|&(p, _)| p)
            .collect()
    }

    /// All positive divisors of `|value|`, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut divs = vec![1u64];
        for &(p, e) in &self.factors {
            let len = divs.len();
            let mut pk = 1u64;
            for _ in 0..e {
                pk *= p;
                for i in 0..len {
                    divs.push(divs[i] * pk);
                }
            }
        }
        divs.sort_unstable();
        divs
    }
}

/// Factors `|b|` by trial division with a mod-30 wheel.
pub fn factorize(b: &BigInt) -> Result<Factorization> {
    if b.is_zero() {
        return Err(Error::domain("zero has no factorization"));
    }
    let n = b
        .abs()
        .to_u64()
        .ok_or_else(|| Error::domain(format!("{b} exceeds the 64-bit factoring range")))?;
    Ok(Factorization {
        value: b.clone(),
        factors: factorize_u64(n),
    })
}

pub(crate) fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let take = |n: &mut u64, p: u64, out: &mut Vec<(u64, u32)>| {
        let mut e = 0;
        while (*n).is_multiple_of(p) {
            *n /= p;
            e += 1;
        }
        if e > 0 {
            out.push((p, e));
        }
    };
    for p in [2, 3, 5] {
        take(&mut n, p, &mut out);
    }
    const STEPS: [u64; 8] = [4, 2, 4, 2, 4, 6, 2, 6];
    let mut p = 7u64;
    let mut i = 0;
    while p.checked_mul(p).is_some_and(|pp| pp <= n) {
        take(&mut n, p, &mut out);
        p += STEPS[i];
        i = (i + 1) % STEPS.len();
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in BASES {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Sieve of Eratosthenes.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// Floor of the k-th root of `n`.
pub fn integer_root(n: u64, k: u32) -> u64 {
    assert!(k >= 1);
    if k == 1 || n < 2 {
        return n;
    }
    let fits = |r: u64| r.checked_pow(k).is_some_and(|v| v <= n);
    let mut r = (n as f64).powf(1.0 / k as f64).round() as u64;
    while r > 0 && !fits(r) {
        r -= 1;
    }
    while fits(r + 1) {
        r += 1;
    }
    r
}

/// Classical Möbius function.
pub fn mobius(d: u64) -> Result<i8> {
    if d == 0 {
        return Err(Error::domain("mobius is defined for d >= 1"));
    }
    let factors = factorize_u64(d);
    if factors.iter().any(|&(_, e)| e > 1) {
        return Ok(0);
    }
    Ok(if factors.len().is_multiple_of(2) { 1 } else { -1 })
}

/// Order-k Möbius function: `μ(m)` when `d = m^k`, otherwise 0.
pub fn mobius_k(k: u32, d: u64) -> Result<i8> {
    if k == 0 {
        return Err(Error::domain("mobius_k needs k >= 1"));
    }
    if d == 0 {
        return Err(Error::domain("mobius_k is defined for d >= 1"));
    }
    let m = integer_root(d, k);
    if m.checked_pow(k) == Some(d) {
        mobius(m)
    } else {
        Ok(0)
    }
}

/// Jordan totient `J_n(b) = bⁿ ∏_{p|b} (1 − p⁻ⁿ)`.
pub fn jordan_totient(n: u32, b: u64) -> Result<BigInt> {
    if n == 0 || b == 0 {
        return Err(Error::domain("jordan_totient needs n >= 1 and b >= 1"));
    }
    let mut acc = BigInt::one();
    for (p, e) in factorize_u64(b) {
        let p = BigInt::from(p);
        let pn = num_traits::pow(p, n as usize);
        acc *= num_traits::pow(pn.clone(), (e - 1) as usize) * (pn - 1u32);
    }
    Ok(acc)
}

/// An exact asymptotic density.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DensityValue {
    /// `∏_{p ∈ primes} (1 − p^(−exponent))`, stored in lowest terms.
    FiniteProduct {
        primes: Vec<u64>,
        exponent: u32,
        #[serde(with = "crate::serde_big::ratio")]
        value: BigRational,
    },
    /// `1/ζ(argument)`, with `1/ζ(1)` taken to be 0.
    InverseZeta { argument: u32 },
    /// Density of a one-point set: 1 if the point qualifies, else 0.
    SinglePoint { visible: bool },
}

impl DensityValue {
    pub fn finite_product(primes: Vec<u64>, exponent: u32) -> Self {
        let mut value = BigRational::one();
        for &p in &primes {
            let pt = num_traits::pow(BigInt::from(p), exponent as usize);
            value *= BigRational::new(&pt - 1u32, pt);
        }
        DensityValue::FiniteProduct {
            primes,
            exponent,
            value,
        }
    }

    /// Exact rational value, when there is one.
    pub fn exact(&self) -> Option<BigRational> {
        match self {
            DensityValue::FiniteProduct { value, .. } => Some(value.clone()),
            DensityValue::InverseZeta { argument: 1 } => Some(BigRational::zero()),
            DensityValue::InverseZeta { .. } => None,
            DensityValue::SinglePoint { visible } => {
                Some(BigRational::from_integer(BigInt::from(*visible as u8)))
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            DensityValue::InverseZeta { argument } => {
                inv_zeta(*argument, DEFAULT_ZETA_TOL).expect("argument >= 1")
            }
            other => ratio_to_f64(&other.exact().expect("rational density")),
        }
    }

    /// Rigorous enclosure `[lo, hi]` of the value.
    pub fn bracket(&self) -> (f64, f64) {
        match self {
            DensityValue::InverseZeta { argument } => {
                inv_zeta_bracket(*argument, DEFAULT_ZETA_TOL).expect("argument >= 1")
            }
            other => {
                let v = other.to_f64();
                (v, v)
            }
        }
    }
}

impl fmt::Display for DensityValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DensityValue::FiniteProduct { value, .. } => {
                write!(f, "{}/{}", value.numer(), value.denom())
            }
            DensityValue::InverseZeta { argument } => write!(f, "1/zeta({argument})"),
            DensityValue::SinglePoint { visible } => write!(f, "{}", *visible as u8),
        }
    }
}

pub fn ratio_to_f64(r: &BigRational) -> f64 {
    // scale so that the division is exact enough even for huge terms
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let shift = r.denom().bits() as i64 - 60;
            let num = if shift > 0 { r.numer() >> shift as usize } else { r.numer() << (-shift) as usize };
            let den = if shift > 0 { r.denom() >> shift as usize } else { r.denom() << (-shift) as usize };
            num.to_f64().unwrap_or(f64::NAN) / den.to_f64().unwrap_or(f64::NAN)
        }
    }
}

/// `∏_{p^k | b} (1 − p^(−k·t))` for `b ≠ 0`, or `1/ζ(k·t)` for `b = 0`.
pub fn euler_product(k: u32, t: u32, b: &BigInt) -> Result<DensityValue> {
    if k == 0 || t == 0 {
        return Err(Error::domain("euler_product needs k >= 1 and t >= 1"));
    }
    let exponent = k
        .checked_mul(t)
        .ok_or_else(|| Error::Overflow("k·t exceeds u32".into()))?;
    if b.is_zero() {
        return Ok(DensityValue::InverseZeta { argument: exponent });
    }
    let primes = factorize(b)?.primes_with_power(k);
    Ok(DensityValue::finite_product(primes, exponent))
}

/// Tolerance used when a density value is viewed as a float.
pub const DEFAULT_ZETA_TOL: f64 = 1e-13;

/// A rigorous enclosure of `ζ(t)` for `t ≥ 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZetaBracket {
    pub lo: f64,
    pub hi: f64,
}

/// Sums `∑_{k ≤ terms} k^(−t)` and encloses the tail between
/// `∫_{terms+1}^∞ x^(−t) dx` and `∫_{terms+1/2}^∞ x^(−t) dx`.
pub fn zeta_bracket(t: u32, terms: u64) -> Result<ZetaBracket> {
    if t < 2 {
        return Err(Error::domain("zeta diverges for t <= 1"));
    }
    let terms = terms.max(1);
    let tf = t as f64;
    // Neumaier summation, smallest terms first
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for k in (1..=terms).rev() {
        let x = (k as f64).powi(-(t as i32));
        let s = sum + x;
        comp += if sum.abs() >= x { (sum - s) + x } else { (x - s) + sum };
        sum = s;
    }
    let partial = sum + comp;
    let tail = |a: f64| a.powf(1.0 - tf) / (tf - 1.0);
    let n = terms as f64;
    let slack = partial * 8.0 * f64::EPSILON;
    Ok(ZetaBracket {
        lo: partial + tail(n + 1.0) - slack,
        hi: partial + tail(n + 0.5) + slack,
    })
}

fn zeta_terms_for(t: u32, tol: f64) -> Result<u64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::domain("tolerance must be positive"));
    }
    // enclosure width is about k^(−t)/2
    let k = (0.25 / tol).powf(1.0 / t as f64).ceil().max(16.0);
    if k > 5e8 {
        return Err(Error::domain(format!("tolerance {tol} too small for t = {t}")));
    }
    Ok(k as u64)
}

/// Rigorous enclosure of `1/ζ(t)` of width at most about `2·tol`.
pub fn inv_zeta_bracket(t: u32, tol: f64) -> Result<(f64, f64)> {
    match t {
        0 => Err(Error::domain("inv_zeta needs t >= 1")),
        1 => Ok((0.0, 0.0)),
        _ => {
            let z = zeta_bracket(t, zeta_terms_for(t, tol)?)?;
            Ok((1.0 / z.hi, 1.0 / z.lo))
        }
    }
}

/// `1/ζ(t)` within `tol`; `1/ζ(1)` is defined as 0.
pub fn inv_zeta(t: u32, tol: f64) -> Result<f64> {
    let (lo, hi) = inv_zeta_bracket(t, tol)?;
    Ok(0.5 * (lo + hi))
}
