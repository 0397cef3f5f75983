//! Exact scalar arithmetic over prime fields `F_p` (2 < p < 2^31) and the
//! rationals.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Upper bound (exclusive) on supported prime moduli; products of two
/// residues fit in a `u64`.
pub const MAX_PRIME: u64 = 1 << 31;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Kind {
    Prime(u64),
    Rational,
}

/// The coefficient field: a prime field with verified modulus, or `QQ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FieldSpec(Kind);

/// A field element. Residues are kept in `0..p`; rationals are always
/// reduced with positive denominator (guaranteed by `BigRational`).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Mod(u64),
    Rat(BigRational),
}

/// Deterministic primality test, exact for all `n < 3.3 * 10^24` and
/// in particular for every `n < 2^31`.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for sp in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(sp) {
            return n == sp;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

#[inline]
pub(crate) fn inv_mod(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    pow_mod(a, p - 2, p)
}

/// Tonelli-Shanks. Returns the smaller of the two roots, or `None` when `a`
/// is a non-residue.
pub(crate) fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let root = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        let mut q = p - 1;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let mut z = 2;
        while pow_mod(z, (p - 1) / 2, p) != p - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = pow_mod(z, q, p);
        let mut t = pow_mod(a, q, p);
        let mut r = pow_mod(a, q.div_ceil(2), p);
        while t != 1 {
            let mut i = 0;
            let mut t2 = t;
            while t2 != 1 {
                t2 = mul_mod(t2, t2, p);
                i += 1;
            }
            let b = pow_mod(c, 1 << (m - i - 1), p);
            m = i;
            c = mul_mod(b, b, p);
            t = mul_mod(t, c, p);
            r = mul_mod(r, b, p);
        }
        r
    };
    Some(root.min(p - root))
}

impl FieldSpec {
    pub fn prime(p: u64) -> Result<Self> {
        if p <= 2 || p >= MAX_PRIME || !is_prime(p) {
            return Err(Error::InvalidField(format!(
                "modulus {p} must be an odd prime below 2^31"
            )));
        }
        Ok(FieldSpec(Kind::Prime(p)))
    }

    pub fn rational() -> Self {
        FieldSpec(Kind::Rational)
    }

    /// `Some(p)` for prime fields.
    pub fn modulus(&self) -> Option<u64> {
        match self.0 {
            Kind::Prime(p) => Some(p),
            Kind::Rational => None,
        }
    }

    pub fn is_prime_field(&self) -> bool {
        self.modulus().is_some()
    }

    /// 0 for the rationals.
    pub fn characteristic(&self) -> u64 {
        self.modulus().unwrap_or(0)
    }

    pub fn zero(&self) -> Scalar {
        match self.0 {
            Kind::Prime(_) => Scalar::Mod(0),
            Kind::Rational => Scalar::Rat(BigRational::zero()),
        }
    }

    pub fn one(&self) -> Scalar {
        self.from_i64(1)
    }

    pub fn from_i64(&self, v: i64) -> Scalar {
        match self.0 {
            Kind::Prime(p) => Scalar::Mod(v.rem_euclid(p as i64) as u64),
            Kind::Rational => Scalar::Rat(BigRational::from_integer(v.into())),
        }
    }

    pub fn from_u64(&self, v: u64) -> Scalar {
        match self.0 {
            Kind::Prime(p) => Scalar::Mod(v % p),
            Kind::Rational => Scalar::Rat(BigRational::from_integer(v.into())),
        }
    }

    /// Maps `num/den` into the field; `None` if `den` vanishes there.
    pub fn from_ratio(&self, num: &BigInt, den: &BigInt) -> Option<Scalar> {
        match self.0 {
            Kind::Prime(p) => {
                let pb = BigInt::from(p);
                let n = num.mod_floor(&pb).to_u64()?;
                let d = den.mod_floor(&pb).to_u64()?;
                if d == 0 {
                    None
                } else {
                    Some(Scalar::Mod(mul_mod(n, inv_mod(d, p), p)))
                }
            }
            Kind::Rational => {
                if den.is_zero() {
                    None
                } else {
                    Some(Scalar::Rat(BigRational::new(num.clone(), den.clone())))
                }
            }
        }
    }

    /// Checks that `s` is a canonical element of this field.
    pub fn check(&self, s: &Scalar) -> Result<()> {
        match (self.0, s) {
            (Kind::Prime(p), Scalar::Mod(v)) if *v < p => Ok(()),
            (Kind::Rational, Scalar::Rat(_)) => Ok(()),
            _ => Err(Error::FieldMismatch),
        }
    }

    pub fn is_zero(&self, s: &Scalar) -> bool {
        match s {
            Scalar::Mod(v) => *v == 0,
            Scalar::Rat(r) => r.is_zero(),
        }
    }

    pub fn is_one(&self, s: &Scalar) -> bool {
        match s {
            Scalar::Mod(v) => *v == 1,
            Scalar::Rat(r) => r.is_one(),
        }
    }

    pub fn add(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self.0, a, b) {
            (Kind::Prime(p), Scalar::Mod(x), Scalar::Mod(y)) => Scalar::Mod((x + y) % p),
            (Kind::Rational, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x + y),
            _ => panic!("scalar from a different field"),
        }
    }

    pub fn neg(&self, a: &Scalar) -> Scalar {
        match (self.0, a) {
            (Kind::Prime(p), Scalar::Mod(x)) => Scalar::Mod((p - x) % p),
            (Kind::Rational, Scalar::Rat(x)) => Scalar::Rat(-x),
            _ => panic!("scalar from a different field"),
        }
    }

    pub fn sub(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Scalar, b: &Scalar) -> Scalar {
        match (self.0, a, b) {
            (Kind::Prime(p), Scalar::Mod(x), Scalar::Mod(y)) => Scalar::Mod(mul_mod(*x, *y, p)),
            (Kind::Rational, Scalar::Rat(x), Scalar::Rat(y)) => Scalar::Rat(x * y),
            _ => panic!("scalar from a different field"),
        }
    }

    pub fn inv(&self, a: &Scalar) -> Option<Scalar> {
        if self.is_zero(a) {
            return None;
        }
        match (self.0, a) {
            (Kind::Prime(p), Scalar::Mod(x)) => Some(Scalar::Mod(inv_mod(*x, p))),
            (Kind::Rational, Scalar::Rat(x)) => Some(Scalar::Rat(x.recip())),
            _ => panic!("scalar from a different field"),
        }
    }

    /// Panics on division by zero.
    pub fn div(&self, a: &Scalar, b: &Scalar) -> Scalar {
        self.mul(a, &self.inv(b).expect("division by zero"))
    }

    pub fn pow(&self, a: &Scalar, e: u32) -> Scalar {
        match (self.0, a) {
            (Kind::Prime(p), Scalar::Mod(x)) => Scalar::Mod(pow_mod(*x, e as u64, p)),
            (Kind::Rational, Scalar::Rat(x)) => Scalar::Rat(num_traits::pow(x.clone(), e as usize)),
            _ => panic!("scalar from a different field"),
        }
    }

    /// Principal square root: the least residue for `F_p`, the non-negative
    /// root for `QQ`. `None` when `a` is not a square in the field.
    pub fn sqrt(&self, a: &Scalar) -> Option<Scalar> {
        match (self.0, a) {
            (Kind::Prime(p), Scalar::Mod(x)) => sqrt_mod(*x, p).map(Scalar::Mod),
            (Kind::Rational, Scalar::Rat(x)) => {
                if x.is_negative() {
                    return None;
                }
                let n = x.numer().sqrt();
                let d = x.denom().sqrt();
                if &(&n * &n) == x.numer() && &(&d * &d) == x.denom() {
                    Some(Scalar::Rat(BigRational::new(n, d)))
                } else {
                    None
                }
            }
            _ => panic!("scalar from a different field"),
        }
    }

    /// Parses a decimal integer or `a/b` literal into the field.
    pub fn parse_scalar(&self, text: &str) -> Result<Scalar> {
        let t = text.trim();
        let bad = || Error::Syntax(format!("bad scalar literal {t:?}"));
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (
                BigInt::from_str(n.trim()).map_err(|_| bad())?,
                BigInt::from_str(d.trim()).map_err(|_| bad())?,
            ),
            None => (BigInt::from_str(t).map_err(|_| bad())?, BigInt::one()),
        };
        self.from_ratio(&num, &den)
            .ok_or_else(|| Error::Syntax(format!("denominator of {t:?} vanishes in {self}")))
    }

    /// Lifts a residue to `u64` (panics on rationals); used by the fast paths.
    pub(crate) fn residue(s: &Scalar) -> u64 {
        match s {
            Scalar::Mod(v) => *v,
            Scalar::Rat(_) => panic!("rational scalar on a prime-field fast path"),
        }
    }
}

impl Scalar {
    /// True when the value is negative (rationals only); used by printers.
    pub fn is_negative(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_negative())
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(r.abs()),
            m => m.clone(),
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Mod(v) => write!(f, "{v}"),
            Scalar::Rat(r) if r.is_integer() => write!(f, "{}", r.numer()),
            Scalar::Rat(r) => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl fmt::Display for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Kind::Prime(p) => write!(f, "Fp:{p}"),
            Kind::Rational => write!(f, "QQ"),
        }
    }
}

impl FromStr for FieldSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "QQ" {
            return Ok(FieldSpec::rational());
        }
        let p = s
            .strip_prefix("Fp:")
            .and_then(|p| p.parse::<u64>().ok())
            .ok_or_else(|| Error::InvalidField(format!("unrecognised field spec {s:?}")))?;
        FieldSpec::prime(p)
    }
}

impl Serialize for FieldSpec {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for FieldSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
