//! Complete deterministic letter-to-letter transducers (Mealy machines) over
//! the alphabets `{0..p-1}^m → {0..p-1}^n`.
//!
//! A letter of arity `m` is a tuple `(d_1, …, d_m)` and is stored as the index
//! `d_1·p^(m-1) + … + d_m`, so ascending indices are lexicographic order on
//! tuples. Tables are indexed by `state · p^m + letter`.

pub mod codec;
mod scc;

use std::collections::VecDeque;

use rand_core::RngCore;
use thiserror::Error;

use crate::padic::{check_prime, PadicError};
use crate::rng;

pub use scc::ComponentReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TransducerError {
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: duplicate transition for state {state}, input {input}")]
    DuplicateTransition {
        line: usize,
        state: usize,
        input: String,
    },
    #[error("line {line}: missing transition for state {state}, input {input}")]
    MissingTransition {
        line: usize,
        state: usize,
        input: String,
    },
    #[error("line {line}: letter {letter} out of range for p = {prime}")]
    LetterOutOfRange {
        line: usize,
        letter: u64,
        prime: u32,
    },
    #[error("line {line}: unknown state {state}")]
    UnknownState { line: usize, state: usize },
    #[error("line {line}: unknown initial state {state}")]
    UnknownInitial { line: usize, state: usize },
    #[error("state {0} does not exist")]
    NoSuchState(usize),
    #[error("expected {expected} input words, got {got}")]
    WrongInputCount { expected: usize, got: usize },
    #[error("input words have different lengths")]
    LengthMismatch,
    #[error("digit {digit} out of range for p = {prime}")]
    DigitOutOfRange { digit: u8, prime: u32 },
    #[error("arity mismatch: expected {expected}, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u32, u32),
    #[error("invalid transition table: {0}")]
    InvalidTable(String),
}

/// A complete deterministic Mealy machine with an initial state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transducer {
    prime: u32,
    in_arity: usize,
    out_arity: usize,
    initial: usize,
    in_letters: usize,
    next: Vec<u32>,
    out: Vec<u32>,
}

/// Number of letters in `{0..p-1}^arity`.
pub fn alphabet_size(prime: u32, arity: usize) -> usize {
    (prime as usize).pow(arity as u32)
}

/// Tuple `(d_1, …, d_m)` to letter index.
pub fn encode_letter(digits: &[u8], prime: u32) -> usize {
    digits
        .iter()
        .fold(0usize, |acc, &d| acc * prime as usize + d as usize)
}

/// Letter index to tuple `(d_1, …, d_m)`.
pub fn decode_letter(mut letter: usize, arity: usize, prime: u32) -> Vec<u8> {
    let mut out = vec![0u8; arity];
    for slot in out.iter_mut().rev() {
        *slot = (letter % prime as usize) as u8;
        letter /= prime as usize;
    }
    out
}

impl Transducer {
    /// Builds a machine from flat tables indexed by `state · p^m + letter`.
    pub fn new(
        prime: u32,
        in_arity: usize,
        out_arity: usize,
        initial: usize,
        next: Vec<u32>,
        out: Vec<u32>,
    ) -> Result<Self, TransducerError> {
        check_prime(prime)?;
        if in_arity == 0 || out_arity == 0 {
            return Err(TransducerError::InvalidTable(
                "arities must be positive".into(),
            ));
        }
        let in_letters = alphabet_size(prime, in_arity);
        let out_letters = alphabet_size(prime, out_arity);
        if next.is_empty() || !next.len().is_multiple_of(in_letters) || next.len() != out.len() {
            return Err(TransducerError::InvalidTable(format!(
                "table sizes {} / {} are not a positive multiple of {in_letters}",
                next.len(),
                out.len()
            )));
        }
        let states = next.len() / in_letters;
        if initial >= states {
            return Err(TransducerError::NoSuchState(initial));
        }
        if let Some(&s) = next.iter().find(|&&s| s as usize >= states) {
            return Err(TransducerError::NoSuchState(s as usize));
        }
        if let Some(&o) = out.iter().find(|&&o| o as usize >= out_letters) {
            return Err(TransducerError::InvalidTable(format!(
                "output letter {o} out of range"
            )));
        }
        Ok(Transducer {
            prime,
            in_arity,
            out_arity,
            initial,
            in_letters,
            next,
            out,
        })
    }

    /// Builds a machine by evaluating `f(state, input tuple) -> (next, output tuple)`
    /// on every pair.
    pub fn from_fn(
        prime: u32,
        in_arity: usize,
        out_arity: usize,
        states: usize,
        initial: usize,
        mut f: impl FnMut(usize, &[u8]) -> (usize, Vec<u8>),
    ) -> Result<Self, TransducerError> {
        check_prime(prime)?;
        let in_letters = alphabet_size(prime, in_arity);
        let mut next = Vec::with_capacity(states * in_letters);
        let mut out = Vec::with_capacity(states * in_letters);
        for s in 0..states {
            for letter in 0..in_letters {
                let (n, o) = f(s, &decode_letter(letter, in_arity, prime));
                if o.len() != out_arity {
                    return Err(TransducerError::ArityMismatch {
                        expected: out_arity,
                        got: o.len(),
                    });
                }
                if let Some(&d) = o.iter().find(|&&d| d as u32 >= prime) {
                    return Err(TransducerError::DigitOutOfRange { digit: d, prime });
                }
                next.push(n as u32);
                out.push(encode_letter(&o, prime) as u32);
            }
        }
        Self::new(prime, in_arity, out_arity, initial, next, out)
    }

    /// The one-state machine computing `z ↦ z`.
    pub fn identity(prime: u32) -> Result<Self, TransducerError> {
        Self::from_fn(prime, 1, 1, 1, 0, |_, x| (0, x.to_vec()))
    }

    /// The one-state digit-complement machine computing `z ↦ −1 − z`.
    pub fn complement(prime: u32) -> Result<Self, TransducerError> {
        Self::from_fn(prime, 1, 1, 1, 0, |_, x| {
            (0, vec![(prime - 1) as u8 - x[0]])
        })
    }

    /// Two-input addition with carry: state = carry.
    pub fn adder(prime: u32) -> Result<Self, TransducerError> {
        Self::from_fn(prime, 2, 1, 2, 0, |carry, x| {
            let s = x[0] as usize + x[1] as usize + carry;
            (s / prime as usize, vec![(s % prime as usize) as u8])
        })
    }

    /// A machine whose first input digit `d` selects `branches[d mod len]`
    /// for the rest of the word; the first output digit is 0. Each branch
    /// becomes a sub-automaton, so the plot is the union of the branch plots
    /// up to vanishing offsets.
    pub fn fork(branches: &[Transducer]) -> Result<Self, TransducerError> {
        let first = branches
            .first()
            .ok_or_else(|| TransducerError::InvalidTable("fork needs a branch".into()))?;
        let prime = first.prime;
        for b in branches {
            if b.prime != prime {
                return Err(TransducerError::PrimeMismatch(prime, b.prime));
            }
            if b.in_arity != 1 || b.out_arity != 1 {
                return Err(TransducerError::ArityMismatch {
                    expected: 1,
                    got: b.in_arity.max(b.out_arity),
                });
            }
        }
        let p = prime as usize;
        let mut offsets = Vec::with_capacity(branches.len());
        let mut total = 1usize;
        for b in branches {
            offsets.push(total);
            total += b.num_states();
        }
        let mut next = Vec::with_capacity(total * p);
        let mut out = Vec::with_capacity(total * p);
        for d in 0..p {
            let i = d % branches.len();
            next.push((offsets[i] + branches[i].initial) as u32);
            out.push(0);
        }
        for (b, &off) in branches.iter().zip(&offsets) {
            next.extend(b.next.iter().map(|&s| s + off as u32));
            out.extend_from_slice(&b.out);
        }
        Ok(Self::new(prime, 1, 1, 0, next, out)?.trim())
    }

    /// A uniformly random complete machine with `states` states, initial state 0.
    pub fn random(
        prime: u32,
        in_arity: usize,
        out_arity: usize,
        states: usize,
        rng: &mut impl RngCore,
    ) -> Result<Self, TransducerError> {
        let out_letters = alphabet_size(prime, out_arity) as u64;
        let cells = states * alphabet_size(prime, in_arity);
        let next = (0..cells)
            .map(|_| rng::below(rng, states as u64) as u32)
            .collect();
        let out = (0..cells)
            .map(|_| rng::below(rng, out_letters) as u32)
            .collect();
        Self::new(prime, in_arity, out_arity, 0, next, out)
    }

    pub fn prime(&self) -> u32 {
        self.prime
    }

    pub fn in_arity(&self) -> usize {
        self.in_arity
    }

    pub fn out_arity(&self) -> usize {
        self.out_arity
    }

    pub fn num_states(&self) -> usize {
        self.next.len() / self.in_letters
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn input_letters(&self) -> usize {
        self.in_letters
    }

    /// Raw `(next, out)` tables indexed by `state · p^m + letter`.
    pub fn tables(&self) -> (&[u32], &[u32]) {
        (&self.next, &self.out)
    }

    /// One transition: `(next state, output letter index)`.
    #[inline]
    pub fn step(&self, state: usize, letter: usize) -> (usize, usize) {
        let i = state * self.in_letters + letter;
        (self.next[i] as usize, self.out[i] as usize)
    }

    /// Successor states of `state` over all input letters.
    pub fn successors(&self, state: usize) -> impl Iterator<Item = usize> + '_ {
        let base = state * self.in_letters;
        self.next[base..base + self.in_letters]
            .iter()
            .map(|&s| s as usize)
    }

    /// Feeds `m` equal-length digit words (least significant digit first) and
    /// returns the `n` output words.
    pub fn run(&self, inputs: &[Vec<u8>]) -> Result<Vec<Vec<u8>>, TransducerError> {
        if inputs.len() != self.in_arity {
            return Err(TransducerError::WrongInputCount {
                expected: self.in_arity,
                got: inputs.len(),
            });
        }
        let k = inputs[0].len();
        if inputs.iter().any(|w| w.len() != k) {
            return Err(TransducerError::LengthMismatch);
        }
        if let Some(&d) = inputs.iter().flatten().find(|&&d| d as u32 >= self.prime) {
            return Err(TransducerError::DigitOutOfRange {
                digit: d,
                prime: self.prime,
            });
        }
        let mut outputs = vec![Vec::with_capacity(k); self.out_arity];
        let mut state = self.initial;
        let mut tuple = vec![0u8; self.in_arity];
        for i in 0..k {
            for (slot, w) in tuple.iter_mut().zip(inputs) {
                *slot = w[i];
            }
            let (s, o) = self.step(state, encode_letter(&tuple, self.prime));
            state = s;
            for (w, d) in outputs
                .iter_mut()
                .zip(decode_letter(o, self.out_arity, self.prime))
            {
                w.push(d);
            }
        }
        Ok(outputs)
    }

    /// Single-input, single-output run from the initial state.
    ///
    /// Panics if the machine is not 1-in/1-out or a digit is out of range.
    pub fn run_word(&self, word: &[u8]) -> Vec<u8> {
        self.run_word_from(self.initial, word).0
    }

    /// Single-input, single-output run from `state`; also returns the final state.
    pub fn run_word_from(&self, mut state: usize, word: &[u8]) -> (Vec<u8>, usize) {
        assert!(
            self.in_arity == 1 && self.out_arity == 1,
            "run_word needs a 1-input 1-output machine"
        );
        let out = word
            .iter()
            .map(|&d| {
                assert!((d as u32) < self.prime, "digit {d} out of range");
                let (s, o) = self.step(state, d as usize);
                state = s;
                o as u8
            })
            .collect();
        (out, state)
    }

    /// States reachable from `start`, in BFS order (letters ascending).
    fn bfs_order(&self, start: usize) -> Vec<usize> {
        let mut seen = vec![false; self.num_states()];
        let mut order = vec![start];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(s) = queue.pop_front() {
            for t in self.successors(s) {
                if !seen[t] {
                    seen[t] = true;
                    order.push(t);
                    queue.push_back(t);
                }
            }
        }
        order
    }

    /// Restricts to the states reachable from `start`, renumbered in BFS order
    /// with `start` as the new initial state 0.
    fn restrict_from(&self, start: usize) -> Transducer {
        let order = self.bfs_order(start);
        let mut renumber = vec![u32::MAX; self.num_states()];
        for (new, &old) in order.iter().enumerate() {
            renumber[old] = new as u32;
        }
        let mut next = Vec::with_capacity(order.len() * self.in_letters);
        let mut out = Vec::with_capacity(order.len() * self.in_letters);
        for &old in &order {
            let base = old * self.in_letters;
            for i in base..base + self.in_letters {
                next.push(renumber[self.next[i] as usize]);
                out.push(self.out[i]);
            }
        }
        Transducer {
            next,
            out,
            initial: 0,
            ..*self
        }
    }

    /// Drops unreachable states and renumbers the rest in BFS order from the
    /// initial state. The result is canonical for a given behaviour table.
    pub fn trim(&self) -> Transducer {
        self.restrict_from(self.initial)
    }

    pub fn is_trim(&self) -> bool {
        *self == self.trim()
    }

    /// The machine started at `state`, trimmed to what it can reach.
    pub fn subautomaton(&self, state: usize) -> Result<Transducer, TransducerError> {
        if state >= self.num_states() {
            return Err(TransducerError::NoSuchState(state));
        }
        Ok(self.restrict_from(state))
    }

    /// Strongly connected components and the ergodic/transient split.
    pub fn components(&self) -> ComponentReport {
        scc::analyze(self)
    }

    /// Sequential composition `second ∘ first`: the outputs of `self` feed
    /// `second`. Only product states reachable from the initial pair are built.
    pub fn compose(&self, second: &Transducer) -> Result<Transducer, TransducerError> {
        if self.prime != second.prime {
            return Err(TransducerError::PrimeMismatch(self.prime, second.prime));
        }
        if self.out_arity != second.in_arity {
            return Err(TransducerError::ArityMismatch {
                expected: self.out_arity,
                got: second.in_arity,
            });
        }
        self.product(
            second,
            |a, b, letter| {
                let (na, y) = a.0.step(a.1, letter);
                let (nb, z) = b.0.step(b.1, y);
                (na, nb, z)
            },
            second.out_arity,
        )
    }

    /// Runs two machines side by side on the same input; the output tuple is
    /// `self`'s outputs followed by `other`'s.
    pub fn pair(&self, other: &Transducer) -> Result<Transducer, TransducerError> {
        if self.prime != other.prime {
            return Err(TransducerError::PrimeMismatch(self.prime, other.prime));
        }
        if self.in_arity != other.in_arity {
            return Err(TransducerError::ArityMismatch {
                expected: self.in_arity,
                got: other.in_arity,
            });
        }
        let shift = alphabet_size(self.prime, other.out_arity);
        self.product(
            other,
            |a, b, letter| {
                let (na, y) = a.0.step(a.1, letter);
                let (nb, z) = b.0.step(b.1, letter);
                (na, nb, y * shift + z)
            },
            self.out_arity + other.out_arity,
        )
    }

    fn product(
        &self,
        other: &Transducer,
        step: impl Fn((&Transducer, usize), (&Transducer, usize), usize) -> (usize, usize, usize),
        out_arity: usize,
    ) -> Result<Transducer, TransducerError> {
        let width = other.num_states();
        let mut ids = std::collections::HashMap::new();
        let mut queue = VecDeque::new();
        let start = (self.initial, other.initial);
        ids.insert(start.0 * width + start.1, 0u32);
        queue.push_back(start);
        let mut next = Vec::new();
        let mut out = Vec::new();
        while let Some((a, b)) = queue.pop_front() {
            for letter in 0..self.in_letters {
                let (na, nb, o) = step((self, a), (other, b), letter);
                let key = na * width + nb;
                let fresh = ids.len() as u32;
                let id = *ids.entry(key).or_insert_with(|| {
                    queue.push_back((na, nb));
                    fresh
                });
                next.push(id);
                out.push(o as u32);
            }
        }
        Transducer::new(self.prime, self.in_arity, out_arity, 0, next, out)
    }
}
