//! Checks that tie generated plots to predicted links, and searches plots
//! for straight cables.
//!
//! Points of a plot are compared against a line `y = (a/d)·x + e` through the
//! residue `(y − (a/d)·x) mod 1/d`. On layer `k` this is
//! `((d·Y − a·X) mod p^k) / (d·p^k)`, so residues of layers up to `K` are
//! exact integers on a circle of `p^K` units, each unit `1/(d·p^K)` long.
//! The modulus is `1/d` rather than `1` because a cable of slope `a/d`
//! meets the meridian `x = 0` at `d` points spaced `1/d` apart.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::affine::AffineParams;
use crate::links::{predict_affine, LinkPrediction};
use crate::padic::{fmt_rational, pow_u64, PAdicRational, PadicError};
use crate::plot::{self, ExactPoint, PlotError, PlotSet, Raster};
use crate::transducer::Transducer;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error(transparent)]
    Padic(#[from] PadicError),
    #[error("invalid argument: {0}")]
    Invalid(String),
}

/// Layers stacked above the base layer in link analysis. A layer shows one
/// phase of the intercept orbit, so the window must span the orbit's period;
/// 6 covers every denominator up to 9 at `p = 2`.
pub const DEFAULT_WINDOW: u32 = 6;

/// Cluster tolerance used throughout the tests, `2^-8`.
pub fn default_tol() -> BigRational {
    BigRational::new(1.into(), 256.into())
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn small(r: &BigInt, what: &str) -> Result<i64, AnalysisError> {
    r.to_i64()
        .filter(|v| v.abs() < 1 << 40)
        .ok_or_else(|| AnalysisError::Invalid(format!("{what} {r} is too large")))
}

/// Exact residues of a point set against slopes with a fixed top layer.
struct Frame {
    prime: u32,
    /// `p^K`, the circle length in units.
    circle: u64,
    /// `(p^k, p^(K-k))` per layer `k`.
    pows: Vec<(u64, u64)>,
}

impl Frame {
    fn new(points: &PlotSet) -> Result<Option<Self>, AnalysisError> {
        let Some(kmax) = points.k_max() else {
            return Ok(None);
        };
        let p = points.prime;
        let circle = pow_u64(p, kmax as usize)
            .filter(|&c| c <= 1 << 62)
            .ok_or(PlotError::Overflow { k: kmax })?;
        let pows = (0..=kmax)
            .map(|k| {
                (
                    pow_u64(p, k as usize).expect("below circle"),
                    pow_u64(p, (kmax - k) as usize).expect("below circle"),
                )
            })
            .collect();
        Ok(Some(Frame {
            prime: p,
            circle,
            pows,
        }))
    }

    fn residue(&self, pt: &ExactPoint, a: i64, d: i64) -> u64 {
        let (m, up) = self.pows[pt.k as usize];
        let r = if self.prime == 2 {
            (d as u64)
                .wrapping_mul(pt.y)
                .wrapping_sub((a as u64).wrapping_mul(pt.x))
                & (m - 1)
        } else {
            (d as i128 * pt.y as i128 - a as i128 * pt.x as i128).rem_euclid(m as i128) as u64
        };
        r * up
    }

    fn residues(&self, points: &[ExactPoint], a: i64, d: i64) -> Vec<u64> {
        points.iter().map(|pt| self.residue(pt, a, d)).collect()
    }

    /// Largest unit count `g` with `g < scale · tol · d · p^K`.
    fn below(&self, tol: &BigRational, d: i64, scale: i64) -> u64 {
        let top = tol.numer() * BigInt::from(d) * BigInt::from(self.circle) * scale;
        let g = (top - BigInt::from(1)).div_floor(tol.denom());
        g.to_u64().unwrap_or(u64::MAX)
    }
}

fn check_tol(tol: &BigRational) -> Result<(), AnalysisError> {
    if tol.is_positive() && *tol < rat(1, 2) {
        Ok(())
    } else {
        Err(AnalysisError::Invalid(format!(
            "tolerance {} must lie in (0, 1/2)",
            fmt_rational(tol)
        )))
    }
}

fn split_slope(slope: &BigRational) -> Result<(i64, i64), AnalysisError> {
    Ok((
        small(slope.numer(), "slope numerator")?,
        small(slope.denom(), "slope denominator")?,
    ))
}

/// Circular distance on a circle of `len` units.
fn circ(a: u64, b: u64, len: u64) -> u64 {
    let d = a.abs_diff(b);
    d.min(len - d)
}

// ---------------------------------------------------------------------------
// verification

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerDistance {
    pub k: u32,
    /// Largest vertical circle distance from a point to the nearest cable.
    pub max_vertical: BigRational,
    /// Largest Chebyshev torus distance from a point to the link.
    pub max_distance: BigRational,
    /// Distinct residues on this layer.
    pub residues: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyReport {
    pub exact_congruence_pass: bool,
    /// First `(k, X)` violating `β·Y ≡ α·X + γ (mod p^k)`.
    pub failure: Option<(u32, u64)>,
    pub layers: Vec<LayerDistance>,
    /// Distinct predicted cables nearest to points on layers with
    /// `p^k > 2|γ|`, where the drift `γ/(β·p^k)` is below half the cable
    /// spacing.
    pub empirical_knot_count: usize,
    pub prediction: LinkPrediction,
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "congruence: {}",
            if self.exact_congruence_pass {
                "pass"
            } else {
                "FAIL"
            }
        )?;
        if let Some((k, x)) = self.failure {
            writeln!(f, "failure: k={k} X={x}")?;
        }
        writeln!(f, "knots_predicted: {}", self.prediction.knot_count)?;
        writeln!(f, "knots_observed: {}", self.empirical_knot_count)?;
        for l in &self.layers {
            writeln!(
                f,
                "layer: k={} distance={} vertical={} residues={}",
                l.k,
                fmt_rational(&l.max_distance),
                fmt_rational(&l.max_vertical),
                l.residues
            )?;
        }
        Ok(())
    }
}

/// Collects distinct small values, switching to a hash set once large.
struct Distinct {
    few: Vec<u64>,
    many: HashSet<u64>,
}

impl Distinct {
    fn new() -> Self {
        Distinct {
            few: Vec::new(),
            many: HashSet::new(),
        }
    }

    fn insert(&mut self, v: u64) {
        if self.many.is_empty() {
            if self.few.contains(&v) {
                return;
            }
            if self.few.len() < 32 {
                self.few.push(v);
                return;
            }
            self.many.extend(self.few.drain(..));
        }
        self.many.insert(v);
    }

    fn into_vec(self) -> Vec<u64> {
        let mut v = self.few;
        v.extend(self.many);
        v.sort_unstable();
        v
    }
}

/// Exhaustively checks layers `k_lo..=k_hi` of `t` against `z ↦ a·z + b`.
pub fn verify_affine(
    t: &Transducer,
    params: &AffineParams,
    k_lo: u32,
    k_hi: u32,
    budget: u64,
) -> Result<VerifyReport, AnalysisError> {
    if k_lo == 0 || k_lo > k_hi {
        return Err(AnalysisError::Invalid(format!(
            "bad layer range {k_lo}..={k_hi}"
        )));
    }
    if params.prime != t.prime() {
        return Err(AnalysisError::Invalid(
            "machine and parameters use different primes".into(),
        ));
    }
    let p = t.prime();
    let top = pow_u64(p, k_hi as usize)
        .filter(|&m| m <= 1 << 62)
        .ok_or(PlotError::Overflow { k: k_hi })?;
    if top > budget {
        return Err(PlotError::Budget {
            k: k_hi,
            points: top,
            budget,
        }
        .into());
    }
    let prediction = predict_affine(&params.slope(), &params.intercept())?;
    let (a, d) = split_slope(&prediction.slope)?;
    let AffineParams {
        alpha, gamma, beta, ..
    } = *params;

    let mut failure: Option<(u32, u64)> = None;
    let mut distinct: Vec<Distinct> = (k_lo..=k_hi).map(|_| Distinct::new()).collect();
    let (alpha, gamma, beta) = (alpha as i128, gamma as i128, beta as i128);
    plot::visit_layers(t, k_lo, k_hi, |k, x, y| {
        let m = (p as u64).pow(k) as i128;
        if (beta * y as i128 - alpha * x as i128 - gamma).rem_euclid(m) != 0
            && failure.is_none_or(|f| (k, x) < f)
        {
            failure = Some((k, x));
        }
        let u = (d as i128 * y as i128 - a as i128 * x as i128).rem_euclid(m) as u64;
        distinct[(k - k_lo) as usize].insert(u);
    })?;

    // cables as residues mod 1/d
    let d_rat = rat(1, d);
    let cables: Vec<BigRational> = prediction
        .intercepts
        .iter()
        .map(|e| e - (e / &d_rat).floor() * &d_rat)
        .collect();
    let slope_abs = prediction.slope.abs();
    let mut layers = Vec::new();
    let mut seen_cables = HashSet::new();
    for (i, set) in distinct.into_iter().enumerate() {
        let k = k_lo + i as u32;
        let scale = BigRational::from_integer(BigInt::from(d) * BigInt::from((p as u64).pow(k)));
        let set = set.into_vec();
        let mut worst = BigRational::zero();
        for &u in &set {
            let rho = BigRational::from_integer(u.into()) / &scale;
            let (nearest, dist) = cables
                .iter()
                .enumerate()
                .map(|(c, e)| {
                    let diff = (&rho - e).abs();
                    let other = &d_rat - &diff;
                    (c, if diff < other { diff } else { other })
                })
                .min_by(|x, y| x.1.cmp(&y.1))
                .expect("at least one cable");
            if BigInt::from(2 * gamma.unsigned_abs()) < BigInt::from((p as u64).pow(k)) {
                seen_cables.insert(nearest);
            }
            if dist > worst {
                worst = dist;
            }
        }
        layers.push(LayerDistance {
            k,
            max_distance: &worst / (BigRational::from_integer(1.into()) + &slope_abs),
            max_vertical: worst,
            residues: set.len(),
        });
    }
    Ok(VerifyReport {
        exact_congruence_pass: failure.is_none(),
        failure,
        layers,
        empirical_knot_count: seen_cables.len(),
        prediction,
    })
}

// ---------------------------------------------------------------------------
// clustering

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cluster {
    /// Midpoint of the cluster's arc, in `[0, 1/d)`.
    pub center: BigRational,
    pub size: usize,
    /// Arc length covered by the cluster's residues.
    pub width: BigRational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterReport {
    pub slope: BigRational,
    pub clusters: Vec<Cluster>,
}

impl ClusterReport {
    pub fn count(&self) -> usize {
        self.clusters.len()
    }

    pub fn centers(&self) -> Vec<BigRational> {
        self.clusters.iter().map(|c| c.center.clone()).collect()
    }
}

impl fmt::Display for ClusterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "slope: {}", fmt_rational(&self.slope))?;
        writeln!(f, "clusters: {}", self.count())?;
        for c in &self.clusters {
            writeln!(
                f,
                "cluster: center={} size={} width={}",
                fmt_rational(&c.center),
                c.size,
                fmt_rational(&c.width)
            )?;
        }
        Ok(())
    }
}

/// Groups the residues `(y − slope·x) mod 1/d` into arcs separated by gaps
/// of at least `tol`. If no such gap exists the whole circle is one cluster.
pub fn intercept_clusters(
    points: &PlotSet,
    slope: &BigRational,
    tol: &BigRational,
) -> Result<ClusterReport, AnalysisError> {
    check_tol(tol)?;
    let (a, d) = split_slope(slope)?;
    let Some(frame) = Frame::new(points)? else {
        return Ok(ClusterReport {
            slope: slope.clone(),
            clusters: vec![],
        });
    };
    let mut us = frame.residues(&points.points, a, d);
    us.sort_unstable();
    let n = us.len();
    let len = frame.circle;
    let thr = frame.below(tol, d, 1);
    let unit = BigRational::from_integer(BigInt::from(d) * BigInt::from(len));

    // gap after element i
    let gap = |i: usize| {
        if i + 1 < n {
            us[i + 1] - us[i]
        } else {
            us[0] + len - us[n - 1]
        }
    };
    let cuts: Vec<usize> = (0..n).filter(|&i| gap(i) > thr).collect();
    let mut clusters = Vec::new();
    if cuts.is_empty() {
        clusters.push(Cluster {
            center: BigRational::from_integer(us[0].into()) / &unit,
            size: n,
            width: BigRational::from_integer(len.into()) / &unit,
        });
    } else {
        for (c, &end) in cuts.iter().enumerate() {
            let start = (cuts[(c + cuts.len() - 1) % cuts.len()] + 1) % n;
            let size = (end + n - start) % n + 1;
            let arc = (us[end] + len - us[start]) % len;
            let center2 = (2 * us[start] + arc) % (2 * len);
            clusters.push(Cluster {
                center: BigRational::from_integer(center2.into()) / (&unit * BigInt::from(2)),
                size,
                width: BigRational::from_integer(arc.into()) / &unit,
            });
        }
    }
    clusters.sort_by(|x, y| x.center.cmp(&y.center));
    Ok(ClusterReport {
        slope: slope.clone(),
        clusters,
    })
}

// ---------------------------------------------------------------------------
// line detection

#[derive(Debug, Clone, PartialEq)]
pub struct LineCandidate {
    pub slope: BigRational,
    /// Cluster centers in `[0, 1/d)`.
    pub intercepts: Vec<BigRational>,
    /// Share of all points this slope covers beyond earlier candidates.
    pub support: f64,
    /// Largest distance from a covered point's residue to its center.
    pub residual: BigRational,
}

impl fmt::Display for LineCandidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ints: Vec<String> = self.intercepts.iter().map(fmt_rational).collect();
        write!(
            f,
            "slope={} support={:.4} residual={} intercepts={}",
            fmt_rational(&self.slope),
            self.support,
            fmt_rational(&self.residual),
            ints.join(" ")
        )
    }
}

/// Share of points that accepted slopes must cover together.
pub const COVERAGE: f64 = 0.9;

/// Slopes `a/d` with `|a| ≤ max_num`, `1 ≤ d ≤ max_den`, `p ∤ d`, in lowest terms.
pub fn candidate_slopes(p: u32, max_num: i64, max_den: i64) -> Vec<(i64, i64)> {
    let mut v = Vec::new();
    for d in 1..=max_den {
        if d % p as i64 == 0 {
            continue;
        }
        for a in -max_num..=max_num {
            if a.gcd(&d) == 1 {
                v.push((a, d));
            }
        }
    }
    v
}

struct SlopeFit {
    a: i64,
    d: i64,
    /// Doubled-unit centers and sizes.
    centers2: Vec<u64>,
    /// Point indices assigned to some cluster.
    members: Vec<u32>,
    /// Largest member distance to its center, doubled units.
    residual2: u64,
}

/// Density-mode extraction for one slope: repeatedly take the `tol`-wide arc
/// holding the most unclaimed residues, while it holds at least `min_mass`.
fn fit_slope(
    frame: &Frame,
    points: &[ExactPoint],
    a: i64,
    d: i64,
    tol: &BigRational,
    min_mass: usize,
) -> Option<SlopeFit> {
    let n = points.len();
    let len = frame.circle;
    let us = frame.residues(points, a, d);

    // screen: any arc of width tol meets at most 4 bins of width ≥ tol/2
    let bin = frame.below(tol, d, 1) / 2 + 1;
    let bins = len.div_ceil(bin) as usize;
    if bins > 4 {
        let mut hist = vec![0usize; bins];
        for &u in &us {
            hist[(u / bin) as usize] += 1;
        }
        let best = (0..bins)
            .map(|i| (0..4).map(|j| hist[(i + j) % bins]).sum::<usize>())
            .max()
            .unwrap_or(0);
        if best < min_mass {
            return None;
        }
    }

    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_unstable_by_key(|&i| us[i as usize]);
    let sorted: Vec<u64> = order.iter().map(|&i| us[i as usize]).collect();
    let thr = frame.below(tol, d, 1);
    let thr2 = frame.below(tol, d, 2);
    let mut taken = vec![false; n];
    let mut centers2 = Vec::new();
    let mut members = Vec::new();
    let mut residual2 = 0u64;
    let at = |j: usize| sorted[j % n] + if j >= n { len } else { 0 };

    loop {
        // prefix counts of free points over two turns of the circle
        let mut free = vec![0usize; 2 * n + 1];
        for j in 0..2 * n {
            free[j + 1] = free[j] + usize::from(!taken[j % n]);
        }
        let mut best = (0usize, 0usize, 0usize);
        let mut j = 0usize;
        for i in 0..n {
            j = j.max(i);
            while j < i + n && at(j) - at(i) <= thr {
                j += 1;
            }
            let count = free[j] - free[i];
            if count > best.0 {
                best = (count, i, j);
            }
        }
        let (count, i, j) = best;
        if count < min_mass || count == 0 {
            break;
        }
        let lo = (i..j).find(|&x| !taken[x % n]).expect("count > 0");
        let hi = (i..j).rev().find(|&x| !taken[x % n]).expect("count > 0");
        let center2 = (at(lo) + at(hi)) % (2 * len);
        let mut size = 0;
        for x in 0..n {
            if taken[x] {
                continue;
            }
            let dist = circ(2 * sorted[x], center2, 2 * len);
            if dist <= thr2 {
                taken[x] = true;
                members.push(order[x]);
                residual2 = residual2.max(dist);
                size += 1;
            }
        }
        debug_assert!(size >= count);
        centers2.push(center2);
    }
    if centers2.is_empty() {
        return None;
    }
    centers2.sort_unstable();
    Some(SlopeFit {
        a,
        d,
        centers2,
        members,
        residual2,
    })
}

/// Searches small rational slopes for cables that together cover at least
/// 90% of the points. Slopes are accepted greedily by how many uncovered
/// points they add; ties prefer the smaller residual, then the simpler slope.
/// An empty result means no such set of cables exists within the bounds.
pub fn detect_lines(
    points: &PlotSet,
    max_num: i64,
    max_den: i64,
    tol: &BigRational,
) -> Result<Vec<LineCandidate>, AnalysisError> {
    check_tol(tol)?;
    if max_den < 1 || max_num < 0 {
        return Err(AnalysisError::Invalid(
            "need max_den ≥ 1 and max_num ≥ 0".into(),
        ));
    }
    let Some(frame) = Frame::new(points)? else {
        return Ok(vec![]);
    };
    let n = points.len();
    let min_mass = (n / 16).max(8).min(n);
    let slopes = candidate_slopes(points.prime, max_num, max_den);
    let fits: Vec<SlopeFit> = slopes
        .par_iter()
        .filter_map(|&(a, d)| fit_slope(&frame, &points.points, a, d, tol, min_mass))
        .collect();

    let len = frame.circle;
    let residual = |f: &SlopeFit| {
        BigRational::new(
            f.residual2.into(),
            BigInt::from(2 * f.d) * BigInt::from(len),
        )
    };
    let mut covered = vec![false; n];
    let mut total = 0usize;
    let mut used = vec![false; fits.len()];
    let mut accepted = Vec::new();
    while (total as f64) < COVERAGE * n as f64 {
        let pick = fits
            .iter()
            .enumerate()
            .filter(|(i, _)| !used[*i])
            .map(|(i, f)| {
                let gain = f.members.iter().filter(|&&m| !covered[m as usize]).count();
                (i, gain)
            })
            .max_by(|x, y| {
                let (fx, fy) = (&fits[x.0], &fits[y.0]);
                x.1.cmp(&y.1)
                    .then(
                        (fy.residual2 as u128 * fx.d as u128)
                            .cmp(&(fx.residual2 as u128 * fy.d as u128)),
                    )
                    .then((fy.a.abs() + fy.d).cmp(&(fx.a.abs() + fx.d)))
                    .then(fy.d.cmp(&fx.d))
                    .then(fy.a.cmp(&fx.a))
            });
        let Some((i, gain)) = pick else { break };
        if gain < min_mass {
            break;
        }
        used[i] = true;
        let f = &fits[i];
        for &m in &f.members {
            if !covered[m as usize] {
                covered[m as usize] = true;
                total += 1;
            }
        }
        let unit2 = BigInt::from(2 * f.d) * BigInt::from(len);
        accepted.push(LineCandidate {
            slope: rat(f.a, f.d),
            intercepts: f
                .centers2
                .iter()
                .map(|&c| BigRational::new(c.into(), unit2.clone()))
                .collect(),
            support: gain as f64 / n as f64,
            residual: residual(f),
        });
    }
    if (total as f64) < COVERAGE * n as f64 {
        return Ok(vec![]);
    }
    accepted.sort_by(|x, y| {
        y.support
            .total_cmp(&x.support)
            .then(x.residual.cmp(&y.residual))
    });
    Ok(accepted)
}

// ---------------------------------------------------------------------------
// structural checks

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftReport {
    pub k_max: u32,
    /// First layer-`k` input whose projection misses layer `k − 1`.
    pub failure: Option<(u32, u64)>,
}

impl ShiftReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// For `2 ≤ k ≤ k_max`, checks that `(X mod p^(k-1), Y mod p^(k-1))` lies on
/// layer `k − 1` for every point `(X, Y)` of layer `k`.
pub fn shift_test(t: &Transducer, k_max: u32, budget: u64) -> Result<ShiftReport, AnalysisError> {
    let p = t.prime() as u64;
    let top = pow_u64(t.prime(), k_max as usize).ok_or(PlotError::Overflow { k: k_max })?;
    if top > budget {
        return Err(PlotError::Budget {
            k: k_max,
            points: top,
            budget,
        }
        .into());
    }
    let mut ys: Vec<Vec<u64>> = (0..=k_max)
        .map(|k| vec![u64::MAX; p.pow(k) as usize])
        .collect();
    plot::visit_layers(t, 1, k_max, |k, x, y| ys[k as usize][x as usize] = y)?;
    for k in 2..=k_max {
        let m = p.pow(k - 1);
        for (x, &y) in ys[k as usize].iter().enumerate() {
            if ys[k as usize - 1][(x as u64 % m) as usize] != y % m {
                return Ok(ShiftReport {
                    k_max,
                    failure: Some((k, x as u64)),
                });
            }
        }
    }
    Ok(ShiftReport {
        k_max,
        failure: None,
    })
}

/// `(j, |{b_m : m < p^j}|)` for the normalized van der Put coefficients of
/// `z ↦ z²`, with `b_m = d·(2m − d·p^(n-1))` for leading digit `d`. The
/// last row covers `m < m_max`.
pub fn squaring_growth(m_max: u64, p: u32) -> Result<Vec<(u32, usize)>, AnalysisError> {
    crate::padic::check_prime(p)?;
    if m_max == 0 {
        return Err(AnalysisError::Invalid("m_max must be positive".into()));
    }
    let p64 = p as u64;
    let mut seen: HashSet<i128> = HashSet::new();
    let mut table = Vec::new();
    let mut bound = 1u64;
    let mut j = 0;
    let mut m = 0u64;
    loop {
        let end = bound.min(m_max);
        while m < end {
            let b = if m < p64 {
                (m as i128) * (m as i128)
            } else {
                let pow = p64.pow(crate::vanderput::level(m, p));
                let lead = (m / pow) as i128;
                lead * (2 * m as i128 - lead * pow as i128)
            };
            seen.insert(b);
            m += 1;
        }
        table.push((j, seen.len()));
        if end == m_max {
            break;
        }
        j += 1;
        bound = bound.saturating_mul(p64);
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FillTrend {
    pub k: u32,
    pub ratios: Vec<(usize, f64)>,
    /// `ratio(last) / ratio(first)`.
    pub trend: f64,
    /// Resolutions with more cells than points on the layer.
    pub undersampled: Vec<usize>,
}

/// Fill ratios of the exhaustive layer `k` at each resolution.
pub fn fill_trend(
    t: &Transducer,
    resolutions: &[usize],
    k: u32,
    budget: u64,
) -> Result<FillTrend, AnalysisError> {
    if resolutions.is_empty() || resolutions.windows(2).any(|w| w[0] >= w[1]) {
        return Err(AnalysisError::Invalid(
            "resolutions must be ascending".into(),
        ));
    }
    let points = pow_u64(t.prime(), k as usize).ok_or(PlotError::Overflow { k })?;
    if points > budget {
        return Err(PlotError::Budget { k, points, budget }.into());
    }
    let mut rasters = resolutions
        .iter()
        .map(|&r| Raster::new(r))
        .collect::<Result<Vec<_>, _>>()?;
    let p = t.prime();
    plot::visit_layers(t, k, k, |k, x, y| {
        for r in &mut rasters {
            r.mark(p, &ExactPoint { k, x, y });
        }
    })?;
    let ratios: Vec<(usize, f64)> = rasters.iter().map(|r| (r.res, r.fill_ratio())).collect();
    let trend = ratios.last().expect("nonempty").1 / ratios[0].1;
    let undersampled = resolutions
        .iter()
        .copied()
        .filter(|&r| (r as u128 * r as u128) > points as u128)
        .collect();
    Ok(FillTrend {
        k,
        ratios,
        trend,
        undersampled,
    })
}

// ---------------------------------------------------------------------------
// fixtures

/// All `(a, b) = (α/β, γ/β)` with `|α|, |γ| ≤ max_abs` and `β ∈ betas`,
/// deduplicated by the reduced pair, in a fixed order.
pub fn affine_grid(
    max_abs: i64,
    betas: &[i64],
    p: u32,
) -> Result<Vec<AffineParams>, AnalysisError> {
    let mut seen = HashMap::new();
    let mut out = Vec::new();
    for &beta in betas {
        for alpha in -max_abs..=max_abs {
            for gamma in -max_abs..=max_abs {
                let a = PAdicRational::new(alpha, beta, p)?;
                let b = PAdicRational::new(gamma, beta, p)?;
                let params =
                    AffineParams::new(&a, &b).map_err(|e| AnalysisError::Invalid(e.to_string()))?;
                if seen.insert(params, ()).is_none() {
                    out.push(params);
                }
            }
        }
    }
    Ok(out)
}
