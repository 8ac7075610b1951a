//! Finite machines for `z ↦ a·z + b` with `a, b` rational p-adic integers.
//!
//! With `a = α/β`, `b = γ/β` over a common denominator prime to `p`, the
//! machine's state is a carry `r` starting at `γ`. Reading digit `x` it emits
//! the unique `y` with `β·y ≡ α·x + r (mod p)` and moves to
//! `r' = (α·x + r − β·y) / p`. After `k` digits
//! `β·out + r_k·p^k = α·in + γ`, so the output is `a·in + b` modulo `p^k`.

use std::collections::{HashMap, VecDeque};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::ToPrimitive;
use thiserror::Error;

use crate::padic::{word_value, PAdicRational, PadicError};
use crate::rng;
use crate::transducer::{Transducer, TransducerError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AffineError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("coefficients {0} do not fit in 62-bit carries")]
    TooLarge(String),
    #[error("primes differ: {0} vs {1}")]
    PrimeMismatch(u32, u32),
}

/// `a = alpha/beta`, `b = gamma/beta` with `beta` the least common denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AffineParams {
    pub alpha: i64,
    pub gamma: i64,
    pub beta: i64,
    pub prime: u32,
}

const LIMIT: i64 = 1 << 40;

impl AffineParams {
    pub fn new(a: &PAdicRational, b: &PAdicRational) -> Result<Self, AffineError> {
        if a.prime() != b.prime() {
            return Err(AffineError::PrimeMismatch(a.prime(), b.prime()));
        }
        let beta = a.den().lcm(b.den());
        let alpha = a.num() * (&beta / a.den());
        let gamma = b.num() * (&beta / b.den());
        let small = |v: &BigInt| v.to_i64().filter(|x| x.abs() < LIMIT);
        match (small(&alpha), small(&gamma), small(&beta)) {
            (Some(alpha), Some(gamma), Some(beta)) => Ok(AffineParams {
                alpha,
                gamma,
                beta,
                prime: a.prime(),
            }),
            _ => Err(AffineError::TooLarge(format!("a = {a}, b = {b}"))),
        }
    }

    pub fn slope(&self) -> PAdicRational {
        PAdicRational::new(self.alpha, self.beta, self.prime).expect("valid by construction")
    }

    pub fn intercept(&self) -> PAdicRational {
        PAdicRational::new(self.gamma, self.beta, self.prime).expect("valid by construction")
    }

    /// Upper bound on the number of carry states.
    pub fn state_bound(&self) -> usize {
        4 * (self.alpha.unsigned_abs() + self.gamma.unsigned_abs() + self.beta as u64) as usize
    }
}

/// Builds the carry machine for `z ↦ a·z + b`. States are numbered in BFS
/// order from the initial carry `γ`.
///
/// Panics if the carry set exceeds [`AffineParams::state_bound`], which the
/// carry recurrence rules out.
pub fn synth_affine(a: &PAdicRational, b: &PAdicRational) -> Result<Transducer, AffineError> {
    let params = AffineParams::new(a, b)?;
    Ok(synth_params(&params))
}

pub fn synth_params(params: &AffineParams) -> Transducer {
    let AffineParams {
        alpha,
        gamma,
        beta,
        prime,
    } = *params;
    let p = prime as i64;
    let beta_inv = (1..p)
        .find(|&i| (beta * i).rem_euclid(p) == 1)
        .expect("beta is prime to p");
    let bound = params.state_bound();

    let mut ids: HashMap<i64, u32> = HashMap::from([(gamma, 0)]);
    let mut queue = VecDeque::from([gamma]);
    let mut next = Vec::new();
    let mut out = Vec::new();
    while let Some(r) = queue.pop_front() {
        for x in 0..p {
            let t = alpha * x + r;
            let y = (t.rem_euclid(p) * beta_inv) % p;
            let carry = (t - beta * y) / p;
            let fresh = ids.len() as u32;
            let id = *ids.entry(carry).or_insert_with(|| {
                queue.push_back(carry);
                fresh
            });
            assert!(
                ids.len() <= bound,
                "carry set of {params:?} exceeded {bound} states"
            );
            next.push(id);
            out.push(y as u32);
        }
    }
    Transducer::new(prime, 1, 1, 0, next, out).expect("carry tables are complete")
}

/// `(a·X + b) mod p^k` where `X` is the value of the `k`-digit word `z`,
/// computed by exact rational arithmetic.
pub fn affine_eval_mod(a: &PAdicRational, b: &PAdicRational, z: &[u8]) -> BigUint {
    let x = PAdicRational::from_integer(BigInt::from(word_value(z, a.prime())), a.prime())
        .expect("prime already checked");
    (a * &x + b.clone()).residue(z.len())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipschitzCounterexample {
    pub left: Vec<u8>,
    pub right: Vec<u8>,
    /// Number of leading digits the inputs share.
    pub shared: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipschitzReport {
    pub trials: usize,
    pub counterexample: Option<LipschitzCounterexample>,
}

impl LipschitzReport {
    pub fn passed(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Feeds random word pairs that share a random-length prefix and checks the
/// outputs share at least that prefix.
pub fn lipschitz_check(
    t: &Transducer,
    trials: usize,
    seed: u64,
) -> Result<LipschitzReport, TransducerError> {
    if t.in_arity() != 1 || t.out_arity() != 1 {
        return Err(TransducerError::ArityMismatch {
            expected: 1,
            got: t.in_arity().max(t.out_arity()),
        });
    }
    let p = t.prime() as u64;
    let mut rng = rng::seeded(seed);
    for _ in 0..trials {
        let len = 1 + rng::below(&mut rng, 32) as usize;
        let shared = rng::below(&mut rng, len as u64 + 1) as usize;
        let left: Vec<u8> = (0..len).map(|_| rng::below(&mut rng, p) as u8).collect();
        let mut right = left.clone();
        for d in &mut right[shared..] {
            *d = rng::below(&mut rng, p) as u8;
        }
        if t.run_word(&left)[..shared] != t.run_word(&right)[..shared] {
            return Ok(LipschitzReport {
                trials,
                counterexample: Some(LipschitzCounterexample {
                    left,
                    right,
                    shared,
                }),
            });
        }
    }
    Ok(LipschitzReport {
        trials,
        counterexample: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{word_of_u64, word_value_u64};

    fn q(s: &str) -> PAdicRational {
        PAdicRational::parse(s, 2).unwrap()
    }

    #[test]
    fn params_use_least_common_denominator() {
        let p = AffineParams::new(&q("3/5"), &q("1/3")).unwrap();
        assert_eq!((p.alpha, p.gamma, p.beta), (9, 5, 15));
        let p = AffineParams::new(&q("-2"), &q("0")).unwrap();
        assert_eq!((p.alpha, p.gamma, p.beta), (-2, 0, 1));
    }

    #[test]
    fn odometer_and_identity() {
        let odo = synth_affine(&q("1"), &q("1")).unwrap();
        assert_eq!(odo.num_states(), 2);
        assert_eq!(odo.run_word(&[1, 1, 0]), vec![0, 0, 1]);
        let id = synth_affine(&q("1"), &q("0")).unwrap();
        assert_eq!(id.num_states(), 1);
        assert_eq!(id, Transducer::identity(2).unwrap());
    }

    #[test]
    fn zero_word_gives_intercept_digits() {
        let t = synth_affine(&q("3/5"), &q("1/3")).unwrap();
        assert_eq!(t.run_word(&[0; 8]), vec![1, 1, 0, 1, 0, 1, 0, 1]);
        assert_eq!(t.run_word(&[0; 8]), q("1/3").digits(8));
    }

    #[test]
    fn eval_mod_examples() {
        assert_eq!(
            affine_eval_mod(&q("5/3"), &q("0"), &[1, 1, 0, 0]),
            BigUint::from(5u32)
        );
        assert_eq!(
            affine_eval_mod(&q("0"), &q("1/3"), &[1, 0, 1]),
            BigUint::from(3u32)
        );
        assert_eq!(
            affine_eval_mod(&q("1"), &q("0"), &[0, 1, 1]),
            BigUint::from(6u32)
        );
    }

    #[test]
    fn machine_matches_oracle_small() {
        for (a, b) in [
            ("3/5", "1/3"),
            ("-2", "1/3"),
            ("5/3", "0"),
            ("-7/9", "-20/7"),
        ] {
            let (a, b) = (q(a), q(b));
            let t = synth_affine(&a, &b).unwrap();
            for x in 0..256u64 {
                let w = word_of_u64(x, 8, 2);
                let got = word_value_u64(&t.run_word(&w), 2);
                assert_eq!(BigUint::from(got), affine_eval_mod(&a, &b, &w));
            }
        }
    }

    #[test]
    fn synthesized_machine_is_ergodic() {
        let t = synth_affine(&q("3/5"), &q("1/3")).unwrap();
        let r = t.components();
        assert!(r.transient_states.is_empty());
        assert!(r.is_minimal);
        let sub = synth_affine(&q("5/3"), &q("0")).unwrap();
        let rep = sub.components();
        for &c in &rep.ergodic {
            for &s in &rep.components[c] {
                assert_eq!(
                    sub.subautomaton(s).unwrap().num_states(),
                    rep.components[c].len()
                );
            }
        }
    }

    #[test]
    fn lipschitz_passes() {
        let id = Transducer::identity(2).unwrap();
        assert!(lipschitz_check(&id, 1000, 0).unwrap().passed());
        let t = synth_affine(&q("3/5"), &q("1/3")).unwrap();
        assert!(lipschitz_check(&t, 1000, 1).unwrap().passed());
        let add = Transducer::adder(2).unwrap();
        assert!(lipschitz_check(&add, 10, 0).is_err());

        // swapping output entries still leaves a complete Mealy machine
        let (next, out) = t.tables();
        let mut out = out.to_vec();
        out.swap(0, 3);
        let doctored = Transducer::new(2, 1, 1, 0, next.to_vec(), out).unwrap();
        assert!(lipschitz_check(&doctored, 1000, 2).unwrap().passed());
    }
}
