//! Scalar fields: prime fields with a runtime modulus and the exact rationals.
//!
//! A [`Field`] value is a small context object (the modulus, or nothing for
//! the rationals) that performs arithmetic on its associated element type.
//! Matrices carry a copy of their field so that operations never need it
//! passed separately.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use super::ExactAlgError;

/// The Mersenne prime 2^61 - 1, the default working modulus.
pub const MERSENNE_61: u64 = (1u64 << 61) - 1;

/// Exact scalar arithmetic.
pub trait Field: Clone + PartialEq + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + PartialEq + Eq + fmt::Debug + Send + Sync;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    /// Multiplicative inverse, `None` for zero.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;

    fn from_i64(&self, v: i64) -> Self::Elem;
    fn from_bigint(&self, v: &BigInt) -> Self::Elem;
    /// Image of a rational number; `None` when the denominator vanishes in the field.
    fn from_rational(&self, v: &BigRational) -> Option<Self::Elem>;

    /// Draws a uniformly random element (for infinite fields: from a fixed finite box).
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    /// Number of distinct values [`Field::sample`] can return; used in Schwartz–Zippel bounds.
    fn sample_space(&self) -> f64;
    /// Field order for finite fields.
    fn order(&self) -> Option<u64>;

    fn parse_elem(&self, s: &str) -> Result<Self::Elem, ExactAlgError>;
    fn format_elem(&self, a: &Self::Elem) -> String;
    /// The `field ...` header line body used by the text formats, e.g. `prime 101`.
    fn header(&self) -> String;

    fn is_one(&self, a: &Self::Elem) -> bool {
        *a == self.one()
    }
}

/// The prime field Z/pZ.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    /// Creates the field of residues modulo `p`. `p` must be a prime below 2^63.
    pub fn new(p: u64) -> Result<Self, ExactAlgError> {
        if p >= 1u64 << 63 || !is_prime_u64(p) {
            return Err(ExactAlgError::NotPrime(p));
        }
        Ok(Self { p })
    }

    pub fn mersenne61() -> Self {
        Self { p: MERSENNE_61 }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    fn reduce_wide(&self, x: u128) -> u64 {
        if self.p == MERSENNE_61 {
            let lo = (x as u64) & MERSENNE_61;
            let hi = (x >> 61) as u64;
            // x is a product of reduced residues, so x < 2^122 and one fold suffices.
            let mut r = lo + hi;
            if r >= MERSENNE_61 {
                r -= MERSENNE_61;
            }
            r
        } else {
            (x % self.p as u128) as u64
        }
    }
}

impl Default for PrimeField {
    fn default() -> Self {
        Self::mersenne61()
    }
}

impl Field for PrimeField {
    type Elem = u64;

    #[inline]
    fn zero(&self) -> u64 {
        0
    }
    #[inline]
    fn one(&self) -> u64 {
        1
    }
    #[inline]
    fn add(&self, a: &u64, b: &u64) -> u64 {
        let s = a + b;
        if s >= self.p {
            s - self.p
        } else {
            s
        }
    }
    #[inline]
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.p - b
        }
    }
    #[inline]
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        self.reduce_wide(*a as u128 * *b as u128)
    }
    #[inline]
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            return None;
        }
        // Extended Euclid on signed 128-bit values.
        let (mut t, mut new_t) = (0i128, 1i128);
        let (mut r, mut new_r) = (self.p as i128, *a as i128);
        while new_r != 0 {
            let q = r / new_r;
            (t, new_t) = (new_t, t - q * new_t);
            (r, new_r) = (new_r, r - q * new_r);
        }
        debug_assert_eq!(r, 1);
        if t < 0 {
            t += self.p as i128;
        }
        Some(t as u64)
    }
    #[inline]
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn from_i64(&self, v: i64) -> u64 {
        let r = (v as i128).rem_euclid(self.p as i128);
        r as u64
    }
    fn from_bigint(&self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.p);
        let mut r = v % &m;
        if r.sign() == Sign::Minus {
            r += &m;
        }
        r.to_u64().expect("residue fits in u64")
    }
    fn from_rational(&self, v: &BigRational) -> Option<u64> {
        let n = self.from_bigint(v.numer());
        let d = self.from_bigint(v.denom());
        self.inv(&d).map(|di| self.mul(&n, &di))
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn sample_space(&self) -> f64 {
        self.p as f64
    }
    fn order(&self) -> Option<u64> {
        Some(self.p)
    }
    fn parse_elem(&self, s: &str) -> Result<u64, ExactAlgError> {
        let q = parse_rational(s)?;
        self.from_rational(&q)
            .ok_or_else(|| ExactAlgError::Parse(format!("denominator of `{s}` vanishes mod {}", self.p)))
    }
    fn format_elem(&self, a: &u64) -> String {
        a.to_string()
    }
    fn header(&self) -> String {
        format!("prime {}", self.p)
    }
}

/// Half-width of the integer box that [`Rationals::sample`] draws from.
const RATIONAL_SAMPLE_BOUND: i64 = 1 << 30;

/// The field of exact rationals, arbitrary precision.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Hash)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn add(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a + b
    }
    fn sub(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a - b
    }
    fn mul(&self, a: &BigRational, b: &BigRational) -> BigRational {
        a * b
    }
    fn neg(&self, a: &BigRational) -> BigRational {
        -a
    }
    fn inv(&self, a: &BigRational) -> Option<BigRational> {
        if a.is_zero() {
            None
        } else {
            Some(a.recip())
        }
    }
    fn is_zero(&self, a: &BigRational) -> bool {
        a.is_zero()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_bigint(&self, v: &BigInt) -> BigRational {
        BigRational::from_integer(v.clone())
    }
    fn from_rational(&self, v: &BigRational) -> Option<BigRational> {
        Some(v.clone())
    }
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        self.from_i64(rng.gen_range(-RATIONAL_SAMPLE_BOUND..RATIONAL_SAMPLE_BOUND))
    }
    fn sample_space(&self) -> f64 {
        2.0 * RATIONAL_SAMPLE_BOUND as f64
    }
    fn order(&self) -> Option<u64> {
        None
    }
    fn parse_elem(&self, s: &str) -> Result<BigRational, ExactAlgError> {
        parse_rational(s)
    }
    fn format_elem(&self, a: &BigRational) -> String {
        if a.is_integer() {
            a.numer().to_string()
        } else {
            format!("{}/{}", a.numer(), a.denom())
        }
    }
    fn header(&self) -> String {
        "rational".to_string()
    }
}

/// Parses `n` or `n/d` with optional sign into a reduced rational.
pub fn parse_rational(s: &str) -> Result<BigRational, ExactAlgError> {
    let s = s.trim();
    let bad = || ExactAlgError::Parse(format!("invalid field element `{s}`"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
    let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
    if den.is_zero() {
        return Err(ExactAlgError::Parse(format!("zero denominator in `{s}`")));
    }
    let mut q = BigRational::new(num, den);
    if q.denom().is_negative() {
        q = BigRational::new(-q.numer().clone(), -q.denom().clone());
    }
    Ok(q)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    (a as u128 * b as u128 % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller–Rabin for 64-bit integers.
pub fn is_prime_u64(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &w in &WITNESSES {
        if n.is_multiple_of(w) {
            return n == w;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'outer: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn primality() {
        assert!(is_prime_u64(MERSENNE_61));
        assert!(is_prime_u64(101));
        assert!(!is_prime_u64(1));
        assert!(!is_prime_u64(91));
        assert!(PrimeField::new(100).is_err());
    }

    #[test]
    fn small_inverses() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.inv(&2), Some(4));
        assert_eq!(f.inv(&3), Some(5));
        assert_eq!(f.inv(&0), None);
        assert_eq!(f.from_i64(-1), 6);
    }

    #[test]
    fn parse_and_format() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.parse_elem("1/2").unwrap(), 4);
        assert_eq!(f.parse_elem("-3").unwrap(), 4);
        assert!(f.parse_elem("1/7").is_err());
        let q = Rationals;
        let v = q.parse_elem("6/-4").unwrap();
        assert_eq!(q.format_elem(&v), "-3/2");
        assert!(q.parse_elem("x").is_err());
    }

    proptest! {
        #[test]
        fn mersenne_mul_matches_generic(a in 0..MERSENNE_61, b in 0..MERSENNE_61) {
            let f = PrimeField::mersenne61();
            prop_assert_eq!(f.mul(&a, &b), mul_mod(a, b, MERSENNE_61));
        }

        #[test]
        fn inverse_roundtrip(a in 1..MERSENNE_61) {
            let f = PrimeField::mersenne61();
            let i = f.inv(&a).unwrap();
            prop_assert_eq!(f.mul(&a, &i), 1);
        }
    }
}
