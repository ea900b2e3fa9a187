use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

use super::matrix::{self, Matrix};
use super::primes;
use crate::error::{Error, Result};

/// 2^31 - 1.
pub const MERSENNE_31: u64 = 2_147_483_647;

/// Runtime description of a scalar ring.
///
/// Written as `prime:<p>`, `rational` or `complex:<tolerance>`; the bare word
/// `prime` means the Mersenne prime 2^31 - 1 and `complex` uses tolerance 1e-9.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScalarRing {
    PrimeField { p: u64 },
    Rational,
    ComplexFloat { tolerance: f64 },
}

impl ScalarRing {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScalarRing::PrimeField { p } => {
                if p <= 2 || !primes::is_prime(p) {
                    return Err(Error::InvalidRing(format!("{p} is not an odd prime")));
                }
                if p >= 1 << 32 {
                    return Err(Error::InvalidRing(format!(
                        "modulus {p} does not fit in 32 bits"
                    )));
                }
                Ok(())
            }
            ScalarRing::Rational => Ok(()),
            ScalarRing::ComplexFloat { tolerance } => {
                if tolerance.is_finite() && tolerance > 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidRing(format!(
                        "complex tolerance must be positive and finite, got {tolerance}"
                    )))
                }
            }
        }
    }

    pub fn is_exact(&self) -> bool {
        !matches!(self, ScalarRing::ComplexFloat { .. })
    }
}

impl fmt::Display for ScalarRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarRing::PrimeField { p } => write!(f, "prime:{p}"),
            ScalarRing::Rational => write!(f, "rational"),
            ScalarRing::ComplexFloat { tolerance } => write!(f, "complex:{tolerance:e}"),
        }
    }
}

impl FromStr for ScalarRing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k, Some(a)),
            None => (s, None),
        };
        let ring = match (kind, arg) {
            ("prime", None) => ScalarRing::PrimeField { p: MERSENNE_31 },
            ("prime", Some(a)) => ScalarRing::PrimeField {
                p: a.parse().map_err(|_| Error::Parse(format!("bad modulus '{a}'")))?,
            },
            ("rational", None) => ScalarRing::Rational,
            ("complex", None) => ScalarRing::ComplexFloat { tolerance: 1e-9 },
            ("complex", Some(a)) => ScalarRing::ComplexFloat {
                tolerance: a.parse().map_err(|_| Error::Parse(format!("bad tolerance '{a}'")))?,
            },
            _ => return Err(Error::Parse(format!("unknown ring '{s}'"))),
        };
        ring.validate()?;
        Ok(ring)
    }
}

impl Serialize for ScalarRing {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ScalarRing {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Field arithmetic with a runtime context (the modulus, the tolerance, ...).
pub trait Field: Clone + fmt::Debug + Send + Sync + 'static {
    type Elem: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn ring(&self) -> ScalarRing;
    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    #[allow(clippy::wrong_self_convention)]
    fn from_i64(&self, v: i64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn neg(&self, a: &Self::Elem) -> Self::Elem;
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Elem;
    /// A primitive root of unity of the given order, if the field has one.
    fn root_of_unity(&self, order: usize) -> Option<Self::Elem>;
    fn elem_to_json(&self, a: &Self::Elem) -> Value;
    fn elem_from_json(&self, v: &Value) -> Result<Self::Elem>;

    fn is_exact(&self) -> bool {
        self.ring().is_exact()
    }

    fn eq(&self, a: &Self::Elem, b: &Self::Elem) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    fn pow(&self, a: &Self::Elem, mut exp: u64) -> Self::Elem {
        let mut base = a.clone();
        let mut acc = self.one();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            base = self.mul(&base, &base);
            exp >>= 1;
        }
        acc
    }

    /// Exact rank of a matrix over this field.
    fn rank_of(&self, m: &Matrix<Self>) -> Result<usize> {
        if !self.is_exact() {
            return Err(Error::InexactRing(self.ring().to_string()));
        }
        Ok(matrix::rank_by_elimination(m))
    }
}

/// The prime field F_p for an odd prime `p < 2^32`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        ScalarRing::PrimeField { p }.validate()?;
        Ok(Self { p })
    }

    pub fn mersenne31() -> Self {
        Self { p: MERSENNE_31 }
    }

    /// Smallest prime above 10^6 congruent to 1 modulo `order`, so that
    /// primitive roots of unity of that order exist in the field.
    pub fn with_roots_of_unity(order: usize) -> Self {
        Self {
            p: primes::smallest_prime_congruent_one(order.max(2) as u64, 1_000_000),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn reduce(&self, v: u64) -> u64 {
        v % self.p
    }

    fn generator(&self) -> u64 {
        let factors = primes::prime_factors(self.p - 1);
        (2..self.p)
            .find(|&g| factors.iter().all(|&q| self.pow(&g, (self.p - 1) / q) != 1))
            .expect("every prime field has a generator")
    }
}

impl Field for PrimeField {
    type Elem = u64;

    fn ring(&self) -> ScalarRing {
        ScalarRing::PrimeField { p: self.p }
    }
    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1
    }
    fn from_i64(&self, v: i64) -> u64 {
        v.rem_euclid(self.p as i64) as u64
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
        (a * b) % self.p
    }
    fn neg(&self, a: &u64) -> u64 {
        if *a == 0 {
            0
        } else {
            self.p - a
        }
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        if *a == 0 {
            None
        } else {
            Some(self.pow(a, self.p - 2))
        }
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn eq(&self, a: &u64, b: &u64) -> bool {
        a == b
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        rng.gen_range(0..self.p)
    }
    fn root_of_unity(&self, order: usize) -> Option<u64> {
        let order = order as u64;
        if order == 0 || !(self.p - 1).is_multiple_of(order) {
            return None;
        }
        if order == 1 {
            return Some(1);
        }
        Some(self.pow(&self.generator(), (self.p - 1) / order))
    }
    fn elem_to_json(&self, a: &u64) -> Value {
        Value::from(*a)
    }
    fn elem_from_json(&self, v: &Value) -> Result<u64> {
        if let Some(u) = v.as_u64() {
            return Ok(u % self.p);
        }
        v.as_i64()
            .map(|i| self.from_i64(i))
            .ok_or_else(|| Error::Parse(format!("expected an integer, got {v}")))
    }
    fn rank_of(&self, m: &Matrix<Self>) -> Result<usize> {
        Ok(matrix::rank_mod_p(self, m))
    }
}

/// The rationals, with arbitrary-precision numerators and denominators.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Rationals;

impl Field for Rationals {
    type Elem = BigRational;

    fn ring(&self) -> ScalarRing {
        ScalarRing::Rational
    }
    fn zero(&self) -> BigRational {
        BigRational::zero()
    }
    fn one(&self) -> BigRational {
        BigRational::one()
    }
    fn from_i64(&self, v: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(v))
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
    fn eq(&self, a: &BigRational, b: &BigRational) -> bool {
        a == b
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> BigRational {
        self.from_i64(rng.gen_range(-1000..=1000))
    }
    fn root_of_unity(&self, order: usize) -> Option<BigRational> {
        match order {
            1 => Some(self.one()),
            2 => Some(self.from_i64(-1)),
            _ => None,
        }
    }
    fn elem_to_json(&self, a: &BigRational) -> Value {
        if a.is_integer() {
            if let Some(i) = a.numer().to_i64() {
                return Value::from(i);
            }
        }
        Value::from(a.to_string())
    }
    fn elem_from_json(&self, v: &Value) -> Result<BigRational> {
        if let Some(i) = v.as_i64() {
            return Ok(self.from_i64(i));
        }
        let s = v
            .as_str()
            .ok_or_else(|| Error::Parse(format!("expected a rational, got {v}")))?;
        s.parse::<BigRational>()
            .map_err(|_| Error::Parse(format!("bad rational '{s}'")))
    }
    fn rank_of(&self, m: &Matrix<Self>) -> Result<usize> {
        Ok(matrix::rank_bareiss(m))
    }
}

impl Rationals {
    /// Exact rational value of a finite float.
    pub fn from_f64(&self, x: f64) -> Option<BigRational> {
        BigRational::from_float(x)
    }

    pub fn abs(&self, a: &BigRational) -> BigRational {
        a.abs()
    }
}

/// Complex double precision; `tolerance` decides when an element counts as zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexField {
    tolerance: f64,
}

impl ComplexField {
    pub fn new(tolerance: f64) -> Result<Self> {
        ScalarRing::ComplexFloat { tolerance }.validate()?;
        Ok(Self { tolerance })
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }
}

impl Default for ComplexField {
    fn default() -> Self {
        Self { tolerance: 1e-9 }
    }
}

impl Field for ComplexField {
    type Elem = Complex64;

    fn ring(&self) -> ScalarRing {
        ScalarRing::ComplexFloat {
            tolerance: self.tolerance,
        }
    }
    fn zero(&self) -> Complex64 {
        Complex64::new(0.0, 0.0)
    }
    fn one(&self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
    fn from_i64(&self, v: i64) -> Complex64 {
        Complex64::new(v as f64, 0.0)
    }
    fn add(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a + b
    }
    fn sub(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a - b
    }
    fn mul(&self, a: &Complex64, b: &Complex64) -> Complex64 {
        a * b
    }
    fn neg(&self, a: &Complex64) -> Complex64 {
        -a
    }
    fn inv(&self, a: &Complex64) -> Option<Complex64> {
        if self.is_zero(a) {
            None
        } else {
            Some(a.inv())
        }
    }
    fn is_zero(&self, a: &Complex64) -> bool {
        a.norm() <= self.tolerance
    }
    fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        Complex64::new(rng.gen::<f64>(), rng.gen::<f64>())
    }
    fn root_of_unity(&self, order: usize) -> Option<Complex64> {
        if order == 0 {
            return None;
        }
        Some(Complex64::from_polar(
            1.0,
            2.0 * std::f64::consts::PI / order as f64,
        ))
    }
    fn elem_to_json(&self, a: &Complex64) -> Value {
        serde_json::json!([a.re, a.im])
    }
    fn elem_from_json(&self, v: &Value) -> Result<Complex64> {
        if let Some(x) = v.as_f64() {
            return Ok(Complex64::new(x, 0.0));
        }
        match v.as_array().map(|a| a.as_slice()) {
            Some([re, im]) => match (re.as_f64(), im.as_f64()) {
                (Some(re), Some(im)) => Ok(Complex64::new(re, im)),
                _ => Err(Error::Parse(format!("bad complex {v}"))),
            },
            _ => Err(Error::Parse(format!("bad complex {v}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ring_strings_round_trip() {
        for s in ["prime:2147483647", "rational", "prime:1000033"] {
            let r: ScalarRing = s.parse().unwrap();
            assert_eq!(r.to_string(), s);
        }
        assert_eq!(
            "prime".parse::<ScalarRing>().unwrap(),
            ScalarRing::PrimeField { p: MERSENNE_31 }
        );
        let c: ScalarRing = "complex:1e-6".parse().unwrap();
        assert_eq!(c, ScalarRing::ComplexFloat { tolerance: 1e-6 });
    }

    #[test]
    fn ring_validation() {
        assert!("prime:2".parse::<ScalarRing>().is_err());
        assert!("prime:15".parse::<ScalarRing>().is_err());
        assert!("prime:4294967311".parse::<ScalarRing>().is_err());
        assert!("complex:0".parse::<ScalarRing>().is_err());
        assert!("complex:inf".parse::<ScalarRing>().is_err());
        assert!("bogus".parse::<ScalarRing>().is_err());
        assert!(PrimeField::new(9).is_err());
    }

    #[test]
    fn prime_field_arithmetic() {
        let f = PrimeField::new(101).unwrap();
        assert_eq!(f.add(&100, &5), 4);
        assert_eq!(f.sub(&3, &5), 99);
        assert_eq!(f.neg(&0), 0);
        for a in 1..101u64 {
            assert_eq!(f.mul(&a, &f.inv(&a).unwrap()), 1);
        }
        assert_eq!(f.inv(&0), None);
        assert_eq!(f.from_i64(-1), 100);
    }

    #[test]
    fn roots_of_unity_are_primitive() {
        for order in [2usize, 4, 6, 8, 12, 20] {
            let f = PrimeField::with_roots_of_unity(order);
            let w = f.root_of_unity(order).unwrap();
            assert_eq!(f.pow(&w, order as u64), 1);
            for k in 1..order as u64 {
                assert_ne!(f.pow(&w, k), 1, "order {order}, k {k}");
            }
        }
        let f = PrimeField::new(7).unwrap();
        assert!(f.root_of_unity(4).is_none());
        assert_eq!(f.root_of_unity(2), Some(6));
        assert!(Rationals.root_of_unity(3).is_none());
        let c = ComplexField::default();
        let w = c.root_of_unity(6).unwrap();
        assert!(Field::eq(&c, &c.pow(&w, 6), &c.one()));
    }

    #[test]
    fn json_elements() {
        let q = Rationals;
        let x = q.elem_from_json(&Value::from("-3/4")).unwrap();
        assert_eq!(q.elem_from_json(&q.elem_to_json(&x)).unwrap(), x);
        assert_eq!(q.elem_to_json(&q.from_i64(7)), Value::from(7));
        let f = PrimeField::mersenne31();
        assert_eq!(f.elem_from_json(&Value::from(-1)).unwrap(), MERSENNE_31 - 1);
    }
}
