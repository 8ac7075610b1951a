//! Rational p-adic integers, i.e. elements of `Z_p ∩ Q`.
//!
//! Digit words are least-significant-first everywhere in this module (index 0
//! holds the digit of `p^0`), matching the order in which a transducer reads
//! them. The single exception is [`PAdicRational::mod1_expansion`], which
//! returns the purely periodic real base-`p` expansion of `z mod 1` and is
//! therefore most-significant-first.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PadicError {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("{value} is not a {prime}-adic integer: its denominator is divisible by {prime}")]
    NotPAdicInteger { value: String, prime: u32 },
    #[error("{b} is not a positive integer coprime to {prime}")]
    NotCoprime { b: u64, prime: u32 },
    #[error("cannot parse {0:?} as a rational (expected [sign]digits[/digits])")]
    Parse(String),
    #[error("denominator {0} does not fit in 64 bits")]
    DenominatorTooLarge(String),
}

/// Trial-division primality test; primes here are tiny.
pub fn is_prime(p: u32) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u32;
    while d.saturating_mul(d) <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

pub(crate) fn check_prime(p: u32) -> Result<(), PadicError> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(PadicError::NotPrime(p))
    }
}

/// Multiplicative order of `p` modulo `b`, with the convention that it is 1
/// for `b = 1`.
///
/// Computed by repeated modular multiplication, so the cost is `O(b)`.
pub fn mult_ord(b: u64, p: u32) -> Result<u64, PadicError> {
    if b == 0 || b.gcd(&(p as u64)) != 1 {
        return Err(PadicError::NotCoprime { b, prime: p });
    }
    if b == 1 {
        return Ok(1);
    }
    let modulus = b as u128;
    let base = p as u128 % modulus;
    let mut x = base;
    let mut order = 1u64;
    while x != 1 {
        x = x * (p as u128) % modulus;
        order += 1;
    }
    Ok(order)
}

/// `p^k` as a big integer.
pub fn pow_big(p: u32, k: usize) -> BigUint {
    num_traits::pow(BigUint::from(p), k)
}

/// `p^k` if it fits in a `u64`.
pub fn pow_u64(p: u32, k: usize) -> Option<u64> {
    let mut acc = 1u64;
    for _ in 0..k {
        acc = acc.checked_mul(p as u64)?;
    }
    Some(acc)
}

/// Value of a least-significant-first digit word.
pub fn word_value(digits: &[u8], p: u32) -> BigUint {
    let mut acc = BigUint::zero();
    for &d in digits.iter().rev() {
        acc = acc * p + d as u32;
    }
    acc
}

/// Value of a least-significant-first digit word, when it fits in a `u64`.
pub fn word_value_u64(digits: &[u8], p: u32) -> u64 {
    digits
        .iter()
        .rev()
        .fold(0u64, |acc, &d| acc * p as u64 + d as u64)
}

/// The `k` least significant base-`p` digits of `x`.
pub fn word_of(x: &BigUint, k: usize, p: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(k);
    let mut rest = x.clone();
    let pb = BigUint::from(p);
    for _ in 0..k {
        let (q, r) = rest.div_rem(&pb);
        out.push(r.to_u8().unwrap_or(0));
        rest = q;
    }
    out
}

/// The `k` least significant base-`p` digits of a machine integer.
pub fn word_of_u64(mut x: u64, k: usize, p: u32) -> Vec<u8> {
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        out.push((x % p as u64) as u8);
        x /= p as u64;
    }
    out
}

/// Renders a least-significant-first word most-significant-first, with no
/// separators (`[1,0,1,1]` becomes `"1101"`). Digits above 9 use letters.
pub fn word_to_string(digits: &[u8]) -> String {
    digits
        .iter()
        .rev()
        .map(|&d| std::char::from_digit(d as u32, 36).unwrap_or('?'))
        .collect()
}

/// Parses a most-significant-first digit string into a least-significant-first word.
pub fn word_from_str(s: &str, p: u32) -> Option<Vec<u8>> {
    s.chars()
        .rev()
        .map(|c| c.to_digit(36).filter(|&d| d < p).map(|d| d as u8))
        .collect()
}

/// Modular inverse of `a` modulo `m` (both positive, coprime).
pub(crate) fn inverse_mod(a: &BigInt, m: &BigInt) -> BigInt {
    let e = a.mod_floor(m).extended_gcd(m);
    debug_assert!(e.gcd.is_one());
    e.x.mod_floor(m)
}

/// An element of `Z_p ∩ Q`, stored as an irreducible fraction whose
/// denominator is positive and coprime to `p`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PAdicRational {
    num: BigInt,
    den: BigInt,
    prime: u32,
}

/// Shortest pre-period and period of the digit stream of a p-adic rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodForm {
    /// Digits `α_0, α_1, …` before the periodic tail, least significant first.
    pub preperiod: Vec<u8>,
    /// Repeating block `β_0, β_1, …`, least significant first. Never empty.
    pub period: Vec<u8>,
}

/// The unique representation `z = c + d/(p^t − 1)` with `0 ≤ d ≤ p^t − 2`
/// and `t` the period length of `z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalCD {
    pub c: BigInt,
    pub d: BigInt,
    pub t: usize,
}

/// The set `C(q) = {(−p^ℓ q) mod 1 : 0 ≤ ℓ < mlt_b p}` of limit heights of a
/// constant `q`. Elements are kept in `ℓ` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CSet {
    pub elements: Vec<BigRational>,
    pub source: PAdicRational,
}

impl CSet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, e: &BigRational) -> bool {
        self.elements.iter().any(|x| x == e)
    }

    /// Elements in ascending order.
    pub fn sorted(&self) -> Vec<BigRational> {
        let mut v = self.elements.clone();
        v.sort();
        v
    }
}

impl PAdicRational {
    pub fn new(
        num: impl Into<BigInt>,
        den: impl Into<BigInt>,
        prime: u32,
    ) -> Result<Self, PadicError> {
        check_prime(prime)?;
        let mut num = num.into();
        let mut den = den.into();
        if den.is_zero() {
            return Err(PadicError::ZeroDenominator);
        }
        if den.is_negative() {
            num = -num;
            den = -den;
        }
        let g = num.gcd(&den);
        if !g.is_one() && !g.is_zero() {
            num /= &g;
            den /= &g;
        }
        if num.is_zero() {
            den = BigInt::one();
        }
        if (&den % prime).is_zero() {
            return Err(PadicError::NotPAdicInteger {
                value: format!("{num}/{den}"),
                prime,
            });
        }
        Ok(PAdicRational { num, den, prime })
    }

    pub fn from_integer(n: impl Into<BigInt>, prime: u32) -> Result<Self, PadicError> {
        Self::new(n, 1, prime)
    }

    pub fn zero(prime: u32) -> Result<Self, PadicError> {
        Self::new(0, 1, prime)
    }

    /// Parses `"[-]num[/den]"` strictly and checks membership in `Z_p`.
    pub fn parse(s: &str, prime: u32) -> Result<Self, PadicError> {
        let bad = || PadicError::Parse(s.to_string());
        let t = s.trim();
        let (sign, body) = match t.strip_prefix('-') {
            Some(rest) => (-1, rest),
            None => (1, t.strip_prefix('+').unwrap_or(t)),
        };
        let (n, d) = match body.split_once('/') {
            Some((n, d)) => (n, d),
            None => (body, "1"),
        };
        let digits_only = |x: &str| !x.is_empty() && x.bytes().all(|c| c.is_ascii_digit());
        if !digits_only(n) || !digits_only(d) {
            return Err(bad());
        }
        let n = BigInt::from_str(n).map_err(|_| bad())?;
        let d = BigInt::from_str(d).map_err(|_| bad())?;
        Self::new(n * sign, d, prime)
    }

    pub fn num(&self) -> &BigInt {
        &self.num
    }

    pub fn den(&self) -> &BigInt {
        &self.den
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.den.is_one()
    }

    /// Denominator as a machine integer.
    pub fn den_u64(&self) -> Result<u64, PadicError> {
        self.den
            .to_u64()
            .ok_or_else(|| PadicError::DenominatorTooLarge(self.den.to_string()))
    }

    pub fn to_rational(&self) -> BigRational {
        BigRational::new(self.num.clone(), self.den.clone())
    }

    /// Real value reduced modulo 1, in `[0, 1)`.
    pub fn frac(&self) -> BigRational {
        BigRational::new(self.num.mod_floor(&self.den), self.den.clone())
    }

    /// Real floor.
    pub fn floor(&self) -> BigInt {
        self.num.div_floor(&self.den)
    }

    /// `z mod p^k` as an integer in `[0, p^k)`.
    pub fn residue(&self, k: usize) -> BigUint {
        let modulus = BigInt::from(pow_big(self.prime, k));
        let inv = inverse_mod(&self.den, &modulus);
        (&self.num * inv)
            .mod_floor(&modulus)
            .to_biguint()
            .expect("non-negative residue")
    }

    fn with(&self, num: BigInt, den: BigInt) -> Self {
        Self::new(num, den, self.prime).expect("Z_p ∩ Q is a ring")
    }

    pub fn scale(&self, factor: impl Into<BigInt>) -> Self {
        self.with(&self.num * factor.into(), self.den.clone())
    }

    /// First `n` canonical digits, least significant first.
    ///
    /// Exact long division: with `z = a/b`, `δ ≡ a·b⁻¹ (mod p)` and the next
    /// numerator is `(a − δ·b)/p`.
    pub fn digits(&self, n: usize) -> Vec<u8> {
        let mut walker = DigitWalker::new(self);
        (0..n).map(|_| walker.next_digit()).collect()
    }

    /// Shortest pre-period and period of the digit stream.
    ///
    /// The remainder `a_i` after `i` steps determines the tail `a_i/b`, and
    /// distinct tails have distinct digit streams, so the first repeated
    /// remainder marks both the shortest pre-period and the shortest period.
    pub fn period_form(&self) -> PeriodForm {
        let mut walker = DigitWalker::new(self);
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        let mut digits = Vec::new();
        loop {
            if let Some(&start) = seen.get(&walker.numer) {
                let period = digits.split_off(start);
                debug_assert!(is_primitive(&period));
                return PeriodForm {
                    preperiod: digits,
                    period,
                };
            }
            seen.insert(walker.numer.clone(), digits.len());
            digits.push(walker.next_digit());
        }
    }

    /// Period length `t`; equals `mlt_b p` for `z = a/b`.
    pub fn period_len(&self) -> usize {
        self.period_form().period.len()
    }

    /// `z = c + d/(p^t − 1)` with `t` the period length.
    pub fn crep(&self) -> CanonicalCD {
        let t = self.period_len();
        let c = self.floor();
        let scale: BigInt = BigInt::from(pow_big(self.prime, t)) - 1;
        let frac = self.frac();
        let (quot, rem): (BigInt, BigInt) = scale.div_rem(frac.denom());
        debug_assert!(rem.is_zero());
        let d: BigInt = frac.numer() * quot;
        CanonicalCD { c, d, t }
    }

    /// `C(q)`: the orbit `(−p^ℓ q) mod 1` for `0 ≤ ℓ < mlt_b p`.
    pub fn cset(&self) -> Result<CSet, PadicError> {
        let b = self.den_u64()?;
        let t = mult_ord(b, self.prime)?;
        let den = BigInt::from(b);
        let mut r = (-&self.num).mod_floor(&den);
        let mut elements = Vec::with_capacity(t as usize);
        for _ in 0..t {
            elements.push(BigRational::new(r.clone(), den.clone()));
            r = (r * self.prime).mod_floor(&den);
        }
        Ok(CSet {
            elements,
            source: self.clone(),
        })
    }

    /// Purely periodic base-`p` expansion of `z mod 1`, most significant
    /// first: `z mod 1 = 0.(w)^∞`. The word has the period length of `z`.
    pub fn mod1_expansion(&self) -> Result<Vec<u8>, PadicError> {
        let b = self.den_u64()?;
        let t = mult_ord(b, self.prime)? as usize;
        let scale: BigInt = BigInt::from(pow_big(self.prime, t)) - 1;
        let frac = self.frac();
        let quot: BigInt = &scale / frac.denom();
        let u = (frac.numer() * quot).to_biguint().expect("non-negative");
        let mut w = word_of(&u, t, self.prime);
        w.reverse();
        Ok(w)
    }
}

fn is_primitive(word: &[u8]) -> bool {
    let n = word.len();
    (1..n)
        .filter(|d| n.is_multiple_of(*d))
        .all(|d| word.chunks(d).any(|c| c != &word[..d]))
}

/// Streams canonical digits of `a/b` by exact long division.
struct DigitWalker {
    numer: BigInt,
    den: BigInt,
    inv_den: u64,
    prime: u32,
}

impl DigitWalker {
    fn new(z: &PAdicRational) -> Self {
        let p = z.prime as u64;
        let b_mod = z.den.mod_floor(&BigInt::from(p)).to_u64().unwrap_or(1);
        let inv_den = (1..p).find(|x| x * b_mod % p == 1).unwrap_or(1);
        DigitWalker {
            numer: z.num.clone(),
            den: z.den.clone(),
            inv_den,
            prime: z.prime,
        }
    }

    fn next_digit(&mut self) -> u8 {
        let p = self.prime as u64;
        let a_mod = self.numer.mod_floor(&BigInt::from(p)).to_u64().unwrap_or(0);
        let digit = a_mod * self.inv_den % p;
        let next = (&self.numer - &self.den * digit) / BigInt::from(p);
        self.numer = next;
        digit as u8
    }
}

impl fmt::Display for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl fmt::Debug for PAdicRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} (p={})", self.prime)
    }
}

/// Formats a real rational as `num/den`, omitting `/1`.
pub fn fmt_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses a real rational `"[-]num[/den]"`.
pub fn parse_rational(s: &str) -> Result<BigRational, PadicError> {
    let bad = || PadicError::Parse(s.to_string());
    let t = s.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(rest) => (-1, rest),
        None => (1, t),
    };
    let (n, d) = body.split_once('/').unwrap_or((body, "1"));
    let n = BigInt::from_str(n).map_err(|_| bad())?;
    let d = BigInt::from_str(d).map_err(|_| bad())?;
    if d.is_zero() || n.sign() == Sign::Minus || d.sign() == Sign::Minus {
        return Err(bad());
    }
    Ok(BigRational::new(n * sign, d))
}

macro_rules! binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&PAdicRational> for &PAdicRational {
            type Output = PAdicRational;
            fn $m(self, rhs: &PAdicRational) -> PAdicRational {
                assert_eq!(self.prime, rhs.prime, "mixing different primes");
                let f: fn(&PAdicRational, &PAdicRational) -> (BigInt, BigInt) = $body;
                let (n, d) = f(self, rhs);
                self.with(n, d)
            }
        }
        impl $tr<PAdicRational> for PAdicRational {
            type Output = PAdicRational;
            fn $m(self, rhs: PAdicRational) -> PAdicRational {
                (&self).$m(&rhs)
            }
        }
    };
}

binop!(Add, add, |a, b| (
    &a.num * &b.den + &b.num * &a.den,
    &a.den * &b.den
));
binop!(Sub, sub, |a, b| (
    &a.num * &b.den - &b.num * &a.den,
    &a.den * &b.den
));
binop!(Mul, mul, |a, b| (&a.num * &b.num, &a.den * &b.den));

impl Neg for &PAdicRational {
    type Output = PAdicRational;
    fn neg(self) -> PAdicRational {
        self.with(-&self.num, self.den.clone())
    }
}

impl Neg for PAdicRational {
    type Output = PAdicRational;
    fn neg(self) -> PAdicRational {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64, p: u32) -> PAdicRational {
        PAdicRational::new(n, d, p).unwrap()
    }

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn digits_examples() {
        assert_eq!(q(1, 3, 2).digits(5), vec![1, 1, 0, 1, 0]);
        assert_eq!(q(0, 1, 2).digits(4), vec![0, 0, 0, 0]);
        assert_eq!(q(-1, 1, 3).digits(4), vec![2, 2, 2, 2]);
    }

    #[test]
    fn period_form_examples() {
        let pf = q(1, 3, 2).period_form();
        assert_eq!((pf.preperiod, pf.period), (vec![1], vec![1, 0]));
        let pf = q(2, 7, 2).period_form();
        assert_eq!((pf.preperiod, pf.period), (vec![0, 1], vec![1, 1, 0]));
        let pf = q(5, 1, 2).period_form();
        assert_eq!((pf.preperiod, pf.period), (vec![1, 0, 1], vec![0]));
        let pf = q(-1, 1, 3).period_form();
        assert_eq!((pf.preperiod, pf.period), (vec![], vec![2]));
    }

    #[test]
    fn crep_examples() {
        let c = q(1, 3, 2).crep();
        assert_eq!((c.c, c.d, c.t), (0.into(), 1.into(), 2));
        let c = q(1, 1, 2).crep();
        assert_eq!((c.c, c.d, c.t), (1.into(), 0.into(), 1));
        // 2/7 = c + d/7 with 0 <= d <= 6 forces c = 0, d = 2.
        let c = q(2, 7, 2).crep();
        assert_eq!((c.c, c.d, c.t), (0.into(), 2.into(), 3));
        let c = q(-2, 7, 2).crep();
        assert_eq!((c.c, c.d, c.t), ((-1).into(), 5.into(), 3));
    }

    #[test]
    fn mult_ord_examples() {
        assert_eq!(mult_ord(7, 2), Ok(3));
        assert_eq!(mult_ord(1, 2), Ok(1));
        assert_eq!(mult_ord(3, 2), Ok(2));
        assert_eq!(mult_ord(9, 2), Ok(6));
        assert!(mult_ord(6, 2).is_err());
        assert!(mult_ord(0, 3).is_err());
    }

    #[test]
    fn cset_examples() {
        let c = q(2, 7, 2).cset().unwrap();
        assert_eq!(c.elements, vec![r(5, 7), r(3, 7), r(6, 7)]);
        assert_eq!(q(5, 1, 2).cset().unwrap().elements, vec![r(0, 1)]);
        assert_eq!(q(1, 3, 2).cset().unwrap().elements, vec![r(2, 3), r(1, 3)]);
    }

    #[test]
    fn mod1_expansion_examples() {
        assert_eq!(q(1, 3, 2).mod1_expansion().unwrap(), vec![0, 1]);
        assert_eq!(q(0, 1, 2).mod1_expansion().unwrap(), vec![0]);
        assert_eq!(q(-2, 7, 2).mod1_expansion().unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_non_members() {
        assert!(matches!(
            PAdicRational::new(1, 2, 2),
            Err(PadicError::NotPAdicInteger { .. })
        ));
        assert!(matches!(
            PAdicRational::new(1, 0, 2),
            Err(PadicError::ZeroDenominator)
        ));
        assert!(matches!(
            PAdicRational::new(1, 3, 4),
            Err(PadicError::NotPrime(4))
        ));
        // 6/4 reduces to 3/2, still not in Z_2
        assert!(PAdicRational::new(6, 4, 2).is_err());
        assert_eq!(PAdicRational::new(6, -9, 2).unwrap(), q(-2, 3, 2));
    }

    #[test]
    fn parse_and_display() {
        assert_eq!(PAdicRational::parse("-3/5", 2).unwrap(), q(-3, 5, 2));
        assert_eq!(PAdicRational::parse("7", 3).unwrap().to_string(), "7");
        assert_eq!(q(2, 7, 2).to_string(), "2/7");
        for bad in ["", "1/", "/3", "1.5", "a/3", "1/-3", "--1", "1 /3"] {
            assert!(PAdicRational::parse(bad, 2).is_err(), "{bad}");
        }
        assert!(PAdicRational::parse("1/4", 2).is_err());
        assert_eq!(parse_rational("1/256").unwrap(), r(1, 256));
    }

    #[test]
    fn residue_matches_digits() {
        let z = q(-17, 9, 5);
        let k = 7;
        assert_eq!(z.residue(k), word_value(&z.digits(k), 5));
    }

    #[test]
    fn arithmetic() {
        let a = q(1, 3, 2);
        let b = q(2, 7, 2);
        assert_eq!(&a + &b, q(13, 21, 2));
        assert_eq!(&a - &a, q(0, 1, 2));
        assert_eq!(&a * &b, q(2, 21, 2));
        assert_eq!(-a, q(-1, 3, 2));
    }

    #[test]
    fn words() {
        assert_eq!(word_to_string(&[1, 0, 1, 1]), "1101");
        assert_eq!(word_from_str("1101", 2), Some(vec![1, 0, 1, 1]));
        assert_eq!(word_from_str("12", 2), None);
        assert_eq!(word_of_u64(6, 4, 2), vec![0, 1, 1, 0]);
        assert_eq!(word_value_u64(&[0, 1, 1], 2), 6);
    }
}
