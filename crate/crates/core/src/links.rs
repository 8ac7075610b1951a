//! Closed-form limit plots of affine maps `z ↦ a·z + q` on the torus.
//!
//! With `a = α/b` and `q mod 1 = a'/b'` in lowest terms and
//! `m = b'/gcd(b, b')`, the limit plot is a link of `mlt_m p` cables of
//! slope `a`. Cable `r` passes through height `(−p^r q) mod 1` at `x = 0`,
//! and two heights lie on the same cable exactly when they differ by a
//! multiple of `1/b`.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::padic::{fmt_rational, mult_ord, CSet, PAdicRational, PadicError};
use crate::plot::CableOverlay;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    /// Horizontal circles at the heights of `C(q)`.
    Parallels,
    /// Cables of a common slope.
    Cables,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkPrediction {
    pub shape: Shape,
    pub slope: BigRational,
    /// One height in `[0, 1)` per distinct cable, smallest `r` first.
    pub intercepts: Vec<BigRational>,
    pub knot_count: usize,
    /// `C(q)` for the additive constant.
    pub full_offsets: CSet,
    /// `b'/gcd(b, b')`; 1 for parallels and pure linear maps.
    pub m: u64,
    /// Numerator and denominator of the slope: the cable winds `den` times
    /// around one circle of the torus and `|num|` times around the other.
    pub winding: (BigInt, BigInt),
}

impl LinkPrediction {
    /// Whether heights `e1` and `e2` at `x = 0` lie on the same cable.
    pub fn same_cable(&self, e1: &BigRational, e2: &BigRational) -> bool {
        same_cable(&self.slope, e1, e2)
    }

    pub fn overlays(&self) -> Vec<CableOverlay> {
        self.intercepts
            .iter()
            .map(|e| CableOverlay::new(self.slope.clone(), e.clone()))
            .collect()
    }
}

/// `(e1 − e2)·den(slope) ∈ Z`.
pub fn same_cable(slope: &BigRational, e1: &BigRational, e2: &BigRational) -> bool {
    ((e1 - e2) * BigRational::from_integer(slope.denom().clone())).is_integer()
}

fn frac(r: &BigRational) -> BigRational {
    r - r.floor()
}

impl fmt::Display for LinkPrediction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[BigRational]| v.iter().map(fmt_rational).collect::<Vec<_>>().join(" ");
        let shape = match self.shape {
            Shape::Parallels => "parallels",
            Shape::Cables => "cables",
        };
        writeln!(f, "shape: {shape}")?;
        writeln!(f, "slope: {}", fmt_rational(&self.slope))?;
        writeln!(f, "m: {}", self.m)?;
        writeln!(f, "knots: {}", self.knot_count)?;
        writeln!(f, "intercepts: {}", list(&self.intercepts))?;
        writeln!(f, "offsets: {}", list(&self.full_offsets.elements))?;
        writeln!(f, "winding: {} {}", self.winding.0, self.winding.1)
    }
}

/// The constant `q`: one parallel per element of `C(q)`.
pub fn predict_const(q: &PAdicRational) -> Result<LinkPrediction, PadicError> {
    let full_offsets = q.cset()?;
    Ok(LinkPrediction {
        shape: Shape::Parallels,
        slope: BigRational::zero(),
        intercepts: full_offsets.elements.clone(),
        knot_count: full_offsets.len(),
        full_offsets,
        m: 1,
        winding: (BigInt::zero(), BigInt::one()),
    })
}

/// `z ↦ c·z`: the single cable through the origin.
pub fn predict_linear(c: &PAdicRational) -> Result<LinkPrediction, PadicError> {
    predict_affine(c, &PAdicRational::zero(c.prime())?)
}

/// `z ↦ a·z + q`.
pub fn predict_affine(a: &PAdicRational, q: &PAdicRational) -> Result<LinkPrediction, PadicError> {
    let slope = a.to_rational();
    let b = slope.denom().clone();
    let offset = q.frac();
    let b2 = offset.denom().clone();
    let m = (&b2 / b2.gcd(&b))
        .to_u64()
        .ok_or_else(|| PadicError::DenominatorTooLarge(b2.to_string()))?;
    let knot_count = if m == 1 {
        1
    } else {
        mult_ord(m, q.prime())? as usize
    };
    let full_offsets = q.cset()?;
    let intercepts = full_offsets.elements[..knot_count].to_vec();
    Ok(LinkPrediction {
        shape: Shape::Cables,
        winding: (slope.numer().clone(), b),
        slope,
        intercepts,
        knot_count,
        full_offsets,
        m,
    })
}

/// Phases `p^k·(a'/b') mod 1`, `k < knot_count`, of the exponentials
/// `ψ_k(y) = exp(i(A·y − 2π p^k a'/b'))` describing the link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PsiFamily {
    pub slope: BigRational,
    pub phases: Vec<BigRational>,
}

pub fn psi_family(a: &PAdicRational, q: &PAdicRational) -> Result<PsiFamily, PadicError> {
    let pred = predict_affine(a, q)?;
    let base = q.frac();
    let p = BigRational::from_integer(q.prime().into());
    let mut phase = base;
    let mut phases = Vec::with_capacity(pred.knot_count);
    for _ in 0..pred.knot_count {
        phases.push(phase.clone());
        phase = frac(&(&phase * &p));
    }
    Ok(PsiFamily {
        slope: pred.slope,
        phases,
    })
}
