//! Van der Put coefficients of 1-Lipschitz functions on `Z_p`.
//!
//! For `m` with `n = ⌊log_p m⌋ + 1` digits and leading digit `m_{n-1}`,
//! `B_m = f(m)` when `m < p` and `B_m = f(m) − f(m − m_{n-1}·p^{n-1})`
//! otherwise. The normalized coefficient is `b_m = B_m / p^{n-1}`. The
//! series `Σ B_m χ(m, z)` with `χ(m, z) = [z ≡ m mod p^n]` recovers `f`.
//! Here `log_p 0` is taken as `0`, so `χ(0, z) = [z ≡ 0 mod p]`.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::padic::{pow_big, pow_u64, word_of_u64, word_value, PAdicRational, PadicError};
use crate::transducer::Transducer;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VdpError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("m = {m}: precision {precision} too low, need more than {needed} digits")]
    PrecisionTooLow {
        m: u64,
        needed: usize,
        precision: usize,
    },
    #[error("m = {m}: B_m is not divisible by p^(n-1), the function is not 1-Lipschitz")]
    NotLipschitz { m: u64 },
    #[error("coefficients cover m < {have}, need m < {needed}")]
    InsufficientRange { needed: u64, have: u64 },
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
}

/// `⌊log_p m⌋`, with `0` for `m = 0`.
pub fn level(m: u64, p: u32) -> u32 {
    let mut n = 0;
    let mut x = m / p as u64;
    while x > 0 {
        n += 1;
        x /= p as u64;
    }
    n
}

/// Splits `m ≥ p` into `(leading digit, p^(n-1))`.
fn lead_split(m: u64, p: u32) -> (u64, u64) {
    let pow = (p as u64).pow(level(m, p));
    (m / pow, pow)
}

/// `χ(m, z)`: whether `z` lies in the ball around `m` of radius `p^-n`.
pub fn chi(m: u64, z: &BigUint, p: u32) -> bool {
    let modulus = pow_big(p, level(m, p) as usize + 1);
    z % &modulus == BigUint::from(m) % &modulus
}

/// A function `Z_p → Z_p` given by evaluation at non-negative integers.
pub trait Oracle: Sync {
    fn prime(&self) -> u32;

    /// `f(m) mod p^k`.
    fn eval_mod(&self, m: u64, k: usize) -> BigUint;

    /// `f(m)` exactly, when the oracle knows it.
    fn exact(&self, _m: u64) -> Option<PAdicRational> {
        None
    }

    /// The whole normalized coefficient sequence for `m < m_max`, when a
    /// faster route than term-by-term evaluation exists.
    fn b_sequence(&self, _m_max: u64) -> Option<BSequence> {
        None
    }
}

pub struct IdentityOracle(pub u32);

impl Oracle for IdentityOracle {
    fn prime(&self) -> u32 {
        self.0
    }
    fn eval_mod(&self, m: u64, k: usize) -> BigUint {
        BigUint::from(m) % pow_big(self.0, k)
    }
    fn exact(&self, m: u64) -> Option<PAdicRational> {
        PAdicRational::from_integer(m, self.0).ok()
    }
}

pub struct ConstantOracle(pub PAdicRational);

impl Oracle for ConstantOracle {
    fn prime(&self) -> u32 {
        self.0.prime()
    }
    fn eval_mod(&self, _m: u64, k: usize) -> BigUint {
        self.0.residue(k)
    }
    fn exact(&self, _m: u64) -> Option<PAdicRational> {
        Some(self.0.clone())
    }
}

/// `z ↦ z²`.
pub struct SquaringOracle(pub u32);

impl Oracle for SquaringOracle {
    fn prime(&self) -> u32 {
        self.0
    }
    fn eval_mod(&self, m: u64, k: usize) -> BigUint {
        BigUint::from(m).pow(2) % pow_big(self.0, k)
    }
    fn exact(&self, m: u64) -> Option<PAdicRational> {
        PAdicRational::from_integer(BigInt::from(m).pow(2), self.0).ok()
    }
}

/// `z ↦ a·z + b`.
pub struct AffineOracle {
    pub a: PAdicRational,
    pub b: PAdicRational,
}

impl Oracle for AffineOracle {
    fn prime(&self) -> u32 {
        self.a.prime()
    }
    fn eval_mod(&self, m: u64, k: usize) -> BigUint {
        self.exact(m).expect("affine values are exact").residue(k)
    }
    fn exact(&self, m: u64) -> Option<PAdicRational> {
        let x = PAdicRational::from_integer(m, self.a.prime()).ok()?;
        Some(&self.a * &x + self.b.clone())
    }
}

/// An arbitrary closure `(m, k) ↦ f(m) mod p^k`. Coefficients come out
/// truncated.
pub struct FnOracle<F> {
    pub prime: u32,
    pub f: F,
}

impl<F: Fn(u64, usize) -> BigUint + Sync> Oracle for FnOracle<F> {
    fn prime(&self) -> u32 {
        self.prime
    }
    fn eval_mod(&self, m: u64, k: usize) -> BigUint {
        (self.f)(m, k) % pow_big(self.prime, k)
    }
}

/// A single-input single-output machine viewed as a function. Values are
/// exact: after the digits of `m` the input is all zeros, and the output
/// from any state on zeros is eventually periodic.
pub struct TransducerOracle<'a> {
    machine: &'a Transducer,
    zero_tail: Vec<PAdicRational>,
}

impl<'a> TransducerOracle<'a> {
    pub fn new(machine: &'a Transducer) -> Self {
        assert!(
            machine.in_arity() == 1 && machine.out_arity() == 1,
            "van der Put analysis needs a 1-input 1-output machine"
        );
        let zero_tail = (0..machine.num_states())
            .map(|s| zero_tail_value(machine, s))
            .collect();
        TransducerOracle { machine, zero_tail }
    }

    /// Value of the output stream from `state` on an all-zero input.
    pub fn zero_tail(&self, state: usize) -> &PAdicRational {
        &self.zero_tail[state]
    }
}

fn zero_tail_value(t: &Transducer, start: usize) -> PAdicRational {
    let p = t.prime();
    let mut seen = HashMap::new();
    let mut outs = Vec::new();
    let mut s = start;
    while !seen.contains_key(&s) {
        seen.insert(s, outs.len());
        let (n, o) = t.step(s, 0);
        outs.push(o as u8);
        s = n;
    }
    let mu = seen[&s];
    let head = BigInt::from(word_value(&outs[..mu], p));
    let cycle = BigInt::from(word_value(&outs[mu..], p));
    let lambda = outs.len() - mu;
    // head + p^mu · cycle / (1 − p^lambda)
    let pmu = BigInt::from(pow_big(p, mu));
    let denom = BigInt::one() - BigInt::from(pow_big(p, lambda));
    PAdicRational::new(head * &denom + pmu * cycle, denom, p).expect("denominator prime to p")
}

impl Oracle for TransducerOracle<'_> {
    fn prime(&self) -> u32 {
        self.machine.prime()
    }

    fn eval_mod(&self, m: u64, k: usize) -> BigUint {
        let p = self.prime();
        word_value(&self.machine.run_word(&word_of_u64(m, k, p)), p)
    }

    fn exact(&self, m: u64) -> Option<PAdicRational> {
        let p = self.prime();
        let n = level(m, p) as usize + 1;
        let (out, end) = self
            .machine
            .run_word_from(self.machine.initial(), &word_of_u64(m, n, p));
        let head = PAdicRational::from_integer(BigInt::from(word_value(&out, p)), p).ok()?;
        Some(head + self.zero_tail[end].scale(BigInt::from(pow_big(p, n))))
    }

    fn b_sequence(&self, m_max: u64) -> Option<BSequence> {
        Some(transducer_b_sequence(self, m_max))
    }
}

/// A coefficient either known exactly or known modulo `p^precision`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum CoeffValue {
    Exact(PAdicRational),
    Truncated {
        residue: BigUint,
        precision: usize,
        prime: u32,
    },
}

impl CoeffValue {
    /// Residue modulo `p^k`, if the value is known that precisely.
    pub fn residue(&self, k: usize) -> Option<BigUint> {
        match self {
            CoeffValue::Exact(v) => Some(v.residue(k)),
            CoeffValue::Truncated {
                residue,
                precision,
                prime,
            } => (k <= *precision).then(|| residue % pow_big(*prime, k)),
        }
    }

    /// Reduces a truncated value to `precision` digits; exact values are kept.
    pub fn truncate(&self, precision: usize) -> CoeffValue {
        match self {
            CoeffValue::Exact(_) => self.clone(),
            CoeffValue::Truncated { prime, .. } => CoeffValue::Truncated {
                residue: self.residue(precision).expect("precision can only shrink"),
                precision,
                prime: *prime,
            },
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, CoeffValue::Exact(_))
    }
}

impl fmt::Display for CoeffValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoeffValue::Exact(v) => write!(f, "{v}"),
            CoeffValue::Truncated {
                residue,
                precision,
                prime,
            } => write!(f, "{residue} mod {prime}^{precision}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VdpCoefficient {
    pub m: u64,
    /// `B_m`.
    pub big_b: CoeffValue,
    /// `b_m = B_m / p^⌊log_p m⌋`.
    pub b: CoeffValue,
}

fn coefficient(f: &dyn Oracle, m: u64, precision: usize) -> Result<VdpCoefficient, VdpError> {
    let p = f.prime();
    let lvl = level(m, p) as usize;
    let base = (m >= p as u64).then(|| m - lead_split(m, p).0 * lead_split(m, p).1);

    if let Some(fm) = f.exact(m) {
        let big_b = match base {
            None => fm,
            Some(m0) => fm - f.exact(m0).expect("exact oracle is exact everywhere"),
        };
        let scale = BigInt::from(pow_big(p, lvl));
        let b = PAdicRational::new(big_b.num().clone(), big_b.den() * scale, p)
            .map_err(|_| VdpError::NotLipschitz { m })?;
        return Ok(VdpCoefficient {
            m,
            big_b: CoeffValue::Exact(big_b),
            b: CoeffValue::Exact(b),
        });
    }

    if precision <= lvl {
        return Err(VdpError::PrecisionTooLow {
            m,
            needed: lvl,
            precision,
        });
    }
    let modulus = pow_big(p, precision);
    let residue = match base {
        None => f.eval_mod(m, precision),
        Some(m0) => (f.eval_mod(m, precision) + &modulus - f.eval_mod(m0, precision)) % &modulus,
    };
    let scale = pow_big(p, lvl);
    if !(&residue % &scale).is_zero() {
        return Err(VdpError::NotLipschitz { m });
    }
    Ok(VdpCoefficient {
        m,
        b: CoeffValue::Truncated {
            residue: &residue / &scale,
            precision: precision - lvl,
            prime: p,
        },
        big_b: CoeffValue::Truncated {
            residue,
            precision,
            prime: p,
        },
    })
}

/// Coefficients for `0 ≤ m < m_max`. Truncated values carry `precision`
/// digits for `B_m` and `precision − ⌊log_p m⌋` for `b_m`.
pub fn vdp_coeffs(
    f: &dyn Oracle,
    m_max: u64,
    precision: usize,
) -> Result<Vec<VdpCoefficient>, VdpError> {
    (0..m_max)
        .into_par_iter()
        .map(|m| coefficient(f, m, precision))
        .collect()
}

/// `Σ B_m χ(m, z) mod p^k` for the `k`-digit word `z`.
pub fn reconstruct(coeffs: &[VdpCoefficient], z: &[u8], p: u32) -> Result<BigUint, VdpError> {
    let k = z.len();
    let needed = pow_u64(p, k).ok_or_else(|| VdpError::InvalidBounds("p^k overflows".into()))?;
    if (coeffs.len() as u64) < needed {
        return Err(VdpError::InsufficientRange {
            needed,
            have: coeffs.len() as u64,
        });
    }
    let modulus = pow_big(p, k);
    let mut sum = BigUint::zero();
    let mut last = None;
    // the balls containing z are those of m = z mod p^j, j = 1..k
    for j in 1..=k {
        let m = word_value(&z[..j], p);
        let m = u64::try_from(&m).expect("below p^k");
        if last == Some(m) {
            continue;
        }
        last = Some(m);
        let c = &coeffs[m as usize];
        debug_assert_eq!(c.m, m);
        let r = c.big_b.residue(k).ok_or(VdpError::PrecisionTooLow {
            m,
            needed: k,
            precision: 0,
        })?;
        sum = (sum + r) % &modulus;
    }
    Ok(sum)
}

/// Normalized coefficients of a machine as symbols into a table of distinct
/// exact values.
#[derive(Debug, Clone)]
pub struct BSequence {
    pub values: Vec<PAdicRational>,
    pub symbols: Vec<u32>,
}

impl BSequence {
    pub fn value(&self, m: u64) -> &PAdicRational {
        &self.values[self.symbols[m as usize] as usize]
    }
}

struct Interner<T: Hash + Eq> {
    ids: HashMap<T, u32>,
    values: Vec<T>,
}

impl<T: Hash + Eq + Clone> Interner<T> {
    fn new() -> Self {
        Interner {
            ids: HashMap::new(),
            values: Vec::new(),
        }
    }

    fn id(&mut self, v: T) -> u32 {
        if let Some(&id) = self.ids.get(&v) {
            return id;
        }
        let id = self.values.len() as u32;
        self.ids.insert(v.clone(), id);
        self.values.push(v);
        id
    }
}

/// For `m ≥ p`, `f(m)` and `f(m − m_{n-1}p^{n-1})` share the outputs on the
/// low `n−1` digits, so `b_m` depends only on the state `s` reached there
/// and the leading digit `d`:
/// `b_m = λ(s, d) + p·tail(δ(s, d)) − tail(s)`.
fn transducer_b_sequence(o: &TransducerOracle<'_>, m_max: u64) -> BSequence {
    let t = o.machine;
    let p = t.prime() as u64;
    let mut intern = Interner::new();
    let mut symbols = Vec::with_capacity(m_max as usize);
    for m in 0..m_max.min(p) {
        symbols.push(intern.id(o.exact(m).expect("machine values are exact")));
    }
    if m_max <= p {
        return BSequence {
            values: intern.values,
            symbols,
        };
    }

    let pp = t.prime();
    let mut pair_symbol = vec![u32::MAX; t.num_states() * p as usize];
    let mut pair = |s: usize, d: usize, intern: &mut Interner<PAdicRational>| {
        let slot = &mut pair_symbol[s * p as usize + d];
        if *slot == u32::MAX {
            let (n, out) = t.step(s, d);
            let v = PAdicRational::from_integer(out as u64, pp).expect("prime checked")
                + o.zero_tail[n].scale(p as i64)
                - o.zero_tail[s].clone();
            *slot = intern.id(v);
        }
        *slot
    };

    // states[x] = state after reading the `len` digits of x, x < p^len
    let mut states: Vec<u32> = vec![t.initial() as u32];
    let mut width = 1u64;
    'levels: loop {
        for lead in 1..p {
            for low in 0..width {
                let m = lead * width + low;
                if m >= m_max {
                    break 'levels;
                }
                if m < p {
                    continue;
                }
                let s = states[low as usize] as usize;
                symbols.push(pair(s, lead as usize, &mut intern));
            }
        }
        let mut grown = Vec::with_capacity((width * p) as usize);
        for d in 0..p {
            for low in 0..width {
                let s = states[low as usize] as usize;
                grown.push(t.step(s, d as usize).0 as u32);
            }
        }
        // grown is indexed by d·width + low, which is the value of the word
        states = grown;
        width *= p;
    }
    BSequence {
        values: intern.values,
        symbols,
    }
}

/// Whether the distinct-value count had settled by the last level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GrowthStatus {
    Stabilized,
    Growing,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoeffSetReport {
    /// Distinct `b_m` for `m < M`, in order of first appearance.
    pub values: Vec<CoeffValue>,
    /// `(j, |{b_m : m < min(p^j, M)}|)` for `j = 0..=⌈log_p M⌉`.
    pub growth: Vec<(u32, usize)>,
    pub status: GrowthStatus,
    /// True when every value is exact; otherwise values were compared at
    /// a common truncated precision and may collide.
    pub exact: bool,
}

/// Distinct normalized coefficients below `m_max`. Truncated values are
/// compared at the common precision `precision − ⌊log_p(m_max − 1)⌋`.
pub fn coeffset_probe(
    f: &dyn Oracle,
    m_max: u64,
    precision: usize,
) -> Result<CoeffSetReport, VdpError> {
    if m_max == 0 {
        return Err(VdpError::InvalidBounds("m_max must be positive".into()));
    }
    let p = f.prime();
    let (values, symbols): (Vec<CoeffValue>, Vec<u32>) = match f.b_sequence(m_max) {
        Some(seq) => (
            seq.values.into_iter().map(CoeffValue::Exact).collect(),
            seq.symbols,
        ),
        None => {
            let common = precision.saturating_sub(level(m_max - 1, p) as usize);
            let coeffs = vdp_coeffs(f, m_max, precision)?;
            let mut intern = Interner::new();
            let symbols = coeffs
                .into_iter()
                .map(|c| intern.id(c.b.truncate(common)))
                .collect();
            (intern.values, symbols)
        }
    };

    let mut growth = Vec::new();
    let mut seen = vec![false; values.len()];
    let mut count = 0usize;
    let mut j = 0u32;
    let mut bound = 1u64;
    let mut m = 0u64;
    loop {
        let end = bound.min(m_max);
        while m < end {
            let s = symbols[m as usize] as usize;
            if !seen[s] {
                seen[s] = true;
                count += 1;
            }
            m += 1;
        }
        growth.push((j, count));
        if end == m_max {
            break;
        }
        j += 1;
        bound = bound.saturating_mul(p as u64);
    }
    let last = growth.last().expect("nonempty").1;
    let half = growth[(growth.len() - 1).div_ceil(2)].1;
    let exact = values.iter().all(CoeffValue::is_exact);
    Ok(CoeffSetReport {
        values,
        growth,
        status: if last == half {
            GrowthStatus::Stabilized
        } else {
            GrowthStatus::Growing
        },
        exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelStatus {
    Finite(usize),
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelReport {
    pub status: KernelStatus,
    pub depth_j: u32,
    pub prefix_len: usize,
    /// Representatives `(j, t)` of the subsequences `(a_{p^j·i + t})_i`.
    pub classes: Vec<(u32, u64)>,
    /// The sequence used more symbols than the alphabet cap allows.
    pub alphabet_overflow: bool,
}

impl fmt::Display for KernelReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.status {
            KernelStatus::Finite(n) => writeln!(f, "status: finite ({n} classes)")?,
            KernelStatus::Undecided => writeln!(f, "status: undecided")?,
        }
        writeln!(f, "depth: {}", self.depth_j)?;
        writeln!(f, "prefix: {}", self.prefix_len)?;
        writeln!(f, "alphabet_overflow: {}", self.alphabet_overflow)?;
        for (j, t) in &self.classes {
            writeln!(f, "class: j={j} t={t}")?;
        }
        Ok(())
    }
}

pub const DEFAULT_ALPHABET_CAP: usize = 256;

/// Bounded search for the p-kernel `{(a_{p^j·i + t})_i}` of a sequence.
///
/// Subsequences are identified by their first `prefix` terms. New classes
/// may appear up to depth `depth`; the probe reports `Finite` when every
/// child of every class matches a known class, and `Undecided` when a class
/// at depth `depth` has an unmatched child or the alphabet exceeds
/// `alphabet_cap` symbols.
pub fn kernel_probe<S, F>(
    seq: F,
    p: u32,
    depth: u32,
    prefix: usize,
    alphabet_cap: usize,
) -> Result<KernelReport, VdpError>
where
    S: Hash + Eq + Clone,
    F: Fn(u64) -> S,
{
    crate::padic::check_prime(p)?;
    if depth == 0 {
        return Err(VdpError::InvalidBounds("depth must be at least 1".into()));
    }
    pow_u64(p, depth as usize + 1)
        .and_then(|x| x.checked_mul(prefix as u64))
        .ok_or_else(|| VdpError::InvalidBounds("index range overflows".into()))?;
    if (prefix as u64) < (p as u64).pow(depth) {
        return Err(VdpError::InvalidBounds(format!(
            "prefix {prefix} must be at least p^{depth}"
        )));
    }

    let mut intern: Interner<S> = Interner::new();
    let mut overflow = false;
    let mut signature = |j: u32, t: u64| -> Option<Vec<u32>> {
        let step = (p as u64).pow(j);
        let mut sig = Vec::with_capacity(prefix);
        for i in 0..prefix as u64 {
            let id = intern.id(seq(t + step * i));
            if intern.values.len() > alphabet_cap {
                overflow = true;
                return None;
            }
            sig.push(id);
        }
        Some(sig)
    };

    let mut classes: Vec<(u32, u64)> = vec![(0, 0)];
    let mut known: HashMap<Vec<u32>, usize> = HashMap::new();
    let mut status = KernelStatus::Undecided;
    if let Some(root) = signature(0, 0) {
        known.insert(root, 0);
        let mut cursor = 0;
        status = loop {
            let Some(&(j, t)) = classes.get(cursor) else {
                break KernelStatus::Finite(classes.len());
            };
            cursor += 1;
            let step = (p as u64).pow(j);
            let mut open = false;
            for c in 0..p as u64 {
                let child = (j + 1, t + c * step);
                let Some(sig) = signature(child.0, child.1) else {
                    open = true;
                    break;
                };
                if known.contains_key(&sig) {
                    continue;
                }
                if child.0 > depth {
                    open = true;
                    break;
                }
                known.insert(sig, classes.len());
                classes.push(child);
            }
            if open {
                break KernelStatus::Undecided;
            }
        };
    }
    Ok(KernelReport {
        status,
        depth_j: depth,
        prefix_len: prefix,
        classes,
        alphabet_overflow: overflow,
    })
}

/// Parity of the base-2 digit sum.
pub fn thue_morse(m: u64) -> u8 {
    (m.count_ones() % 2) as u8
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::affine::synth_affine;
    use crate::padic::word_value_u64;

    fn q(s: &str) -> PAdicRational {
        PAdicRational::parse(s, 2).unwrap()
    }

    fn exact(c: &CoeffValue) -> &PAdicRational {
        match c {
            CoeffValue::Exact(v) => v,
            _ => panic!("expected an exact value"),
        }
    }

    #[test]
    fn level_and_chi() {
        assert_eq!(level(0, 2), 0);
        assert_eq!(level(1, 2), 0);
        assert_eq!(level(8, 2), 3);
        assert_eq!(level(26, 3), 2);
        assert!(chi(0, &BigUint::from(4u32), 2));
        assert!(!chi(0, &BigUint::from(3u32), 2));
        assert!(chi(5, &BigUint::from(13u32), 2));
        assert!(!chi(5, &BigUint::from(9u32), 2));
    }

    #[test]
    fn identity_coefficients_are_leading_digits() {
        let c = vdp_coeffs(&IdentityOracle(2), 8, 16).unwrap();
        assert_eq!(exact(&c[0].b), &q("0"));
        for coeff in &c[1..] {
            assert_eq!(exact(&coeff.b), &q("1"));
        }
        let c = vdp_coeffs(&IdentityOracle(3), 27, 16).unwrap();
        assert_eq!(exact(&c[20].b), &PAdicRational::parse("2", 3).unwrap());
    }

    #[test]
    fn constant_coefficients() {
        let c = vdp_coeffs(&ConstantOracle(q("1/3")), 8, 16).unwrap();
        assert_eq!(exact(&c[0].big_b), &q("1/3"));
        assert_eq!(exact(&c[1].big_b), &q("1/3"));
        for coeff in &c[2..] {
            assert!(exact(&coeff.big_b).is_zero());
        }
    }

    #[test]
    fn squaring_coefficients() {
        let c = vdp_coeffs(&SquaringOracle(2), 6, 16).unwrap();
        assert_eq!(exact(&c[2].b), &q("2"));
        assert_eq!(exact(&c[3].b), &q("4"));
        assert_eq!(exact(&c[5].b), &q("6"));
        // the truncated path agrees
        let f = FnOracle {
            prime: 2,
            f: |m: u64, k: usize| BigUint::from(m).pow(2) % pow_big(2, k),
        };
        let t = vdp_coeffs(&f, 6, 16).unwrap();
        assert_eq!(t[5].b.residue(8), Some(BigUint::from(6u32)));
    }

    #[test]
    fn truncated_errors() {
        let f = FnOracle {
            prime: 2,
            f: |m: u64, _k: usize| BigUint::from(m * m),
        };
        assert_eq!(
            vdp_coeffs(&f, 16, 3).unwrap_err(),
            VdpError::PrecisionTooLow {
                m: 8,
                needed: 3,
                precision: 3
            }
        );
        // f(m) = [m == 2] breaks divisibility at m = 2
        let g = FnOracle {
            prime: 2,
            f: |m: u64, _k: usize| BigUint::from((m == 2) as u32),
        };
        assert_eq!(
            vdp_coeffs(&g, 4, 8).unwrap_err(),
            VdpError::NotLipschitz { m: 2 }
        );
    }

    #[test]
    fn reconstruct_examples() {
        let id = vdp_coeffs(&IdentityOracle(2), 8, 16).unwrap();
        assert_eq!(
            reconstruct(&id, &[1, 0, 1], 2).unwrap(),
            BigUint::from(5u32)
        );
        let c = vdp_coeffs(&ConstantOracle(q("1/3")), 8, 16).unwrap();
        for x in 0..8 {
            let z = word_of_u64(x, 3, 2);
            assert_eq!(reconstruct(&c, &z, 2).unwrap(), BigUint::from(3u32));
        }
        assert!(matches!(
            reconstruct(&c, &[0, 0, 0, 0], 2),
            Err(VdpError::InsufficientRange {
                needed: 16,
                have: 8
            })
        ));
    }

    #[test]
    fn machine_reconstruction_matches_run() {
        let t = synth_affine(&q("3/5"), &q("1/3")).unwrap();
        let o = TransducerOracle::new(&t);
        let coeffs = vdp_coeffs(&o, 64, 64).unwrap();
        for x in 0..64 {
            let z = word_of_u64(x, 6, 2);
            let got = reconstruct(&coeffs, &z, 2).unwrap();
            assert_eq!(got, BigUint::from(word_value_u64(&t.run_word(&z), 2)));
        }
    }

    #[test]
    fn machine_values_are_exact() {
        let t = synth_affine(&q("3/5"), &q("1/3")).unwrap();
        let o = TransducerOracle::new(&t);
        for m in 0..50 {
            let expect = &q("3/5") * &q(&m.to_string()) + q("1/3");
            assert_eq!(o.exact(m).unwrap(), expect);
        }
    }

    #[test]
    fn fast_sequence_matches_termwise() {
        let mut rng = crate::rng::seeded(3);
        for _ in 0..10 {
            let t = Transducer::random(2, 1, 1, 5, &mut rng).unwrap();
            let o = TransducerOracle::new(&t);
            let seq = o.b_sequence(300).unwrap();
            let coeffs = vdp_coeffs(&o, 300, 64).unwrap();
            assert_eq!(seq.symbols.len(), 300);
            for c in &coeffs {
                assert_eq!(seq.value(c.m), exact(&c.b), "m = {}", c.m);
            }
        }
        let t = Transducer::random(3, 1, 1, 4, &mut rng).unwrap();
        let o = TransducerOracle::new(&t);
        let seq = o.b_sequence(200).unwrap();
        for c in vdp_coeffs(&o, 200, 64).unwrap() {
            assert_eq!(seq.value(c.m), exact(&c.b));
        }
    }

    #[test]
    fn coeffset_examples() {
        let r = coeffset_probe(&IdentityOracle(2), 1 << 10, 64).unwrap();
        assert_eq!(r.values.len(), 2);
        assert_eq!(r.status, GrowthStatus::Stabilized);

        let t = synth_affine(&q("5/3"), &q("0")).unwrap();
        let r = coeffset_probe(&TransducerOracle::new(&t), 1 << 10, 64).unwrap();
        // b_0 = 0, b_1 = 5/3, b_m = 5/3 for m ≥ 2
        assert_eq!(r.values.len(), 2);
        assert!(r.exact);

        let r = coeffset_probe(&SquaringOracle(2), 1 << 16, 64).unwrap();
        assert!(r.values.len() >= 100);
        assert_eq!(r.status, GrowthStatus::Growing);
        assert!(r.growth.windows(2).skip(1).all(|w| w[1].1 > w[0].1));
    }

    #[test]
    fn kernel_constant_and_thue_morse() {
        let r = kernel_probe(|_| 7u8, 3, 4, 81, DEFAULT_ALPHABET_CAP).unwrap();
        assert_eq!(r.status, KernelStatus::Finite(1));

        let r = kernel_probe(thue_morse, 2, 4, 256, DEFAULT_ALPHABET_CAP).unwrap();
        assert_eq!(r.status, KernelStatus::Finite(2));
        // brute force: every subsequence up to depth 4 equals t or 1 − t on 4096 terms
        for j in 0..=4u32 {
            for t in 0..(1u64 << j) {
                let sub: Vec<u8> = (0..4096).map(|i| thue_morse((i << j) + t)).collect();
                let plain: Vec<u8> = (0..4096).map(thue_morse).collect();
                let flipped: Vec<u8> = plain.iter().map(|b| 1 - b).collect();
                assert!(sub == plain || sub == flipped);
            }
        }
    }

    #[test]
    fn kernel_squaring_overflows() {
        let r = kernel_probe(
            |m| {
                let c = coefficient(&SquaringOracle(2), m, 64).unwrap();
                exact(&c.b).clone()
            },
            2,
            6,
            256,
            DEFAULT_ALPHABET_CAP,
        )
        .unwrap();
        assert_eq!(r.status, KernelStatus::Undecided);
        assert!(r.alphabet_overflow);
    }

    #[test]
    fn kernel_prefix_must_cover_depth() {
        assert!(kernel_probe(thue_morse, 2, 6, 32, 256).is_err());
    }

    #[test]
    fn affine_kernel_is_finite() {
        let t = synth_affine(&q("3/5"), &q("1/3")).unwrap();
        let o = TransducerOracle::new(&t);
        let seq = o.b_sequence(1 << 17).unwrap();
        let r = kernel_probe(|m| seq.symbols[m as usize], 2, 6, 1024, 256).unwrap();
        assert!(matches!(r.status, KernelStatus::Finite(n) if n <= 4));
    }
}
