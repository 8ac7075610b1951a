//! Plot layers of a machine: the points `(X/p^k, Y/p^k)` with `Y` the output
//! on the `k`-digit input `X`, kept as integer pairs.

use std::fmt::Write as _;
use std::path::Path;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::padic::pow_u64;
use crate::rng;
use crate::transducer::Transducer;

/// Default cap on `p^k` for exhaustive generation.
pub const EXHAUSTIVE_BUDGET: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("layer k = {k} has {points} points, above the exhaustive budget {budget}")]
    Budget { k: u32, points: u64, budget: u64 },
    #[error("p^{k} does not fit in 62 bits")]
    Overflow { k: u32 },
    #[error("plots need a 1-input 1-output machine")]
    Arity,
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// `(X/p^k, Y/p^k)` on layer `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactPoint {
    pub k: u32,
    pub x: u64,
    pub y: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exhaustive,
    Sampled { n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Surface {
    #[default]
    Square,
    Torus,
    CylinderX,
    CylinderY,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlotSet {
    pub prime: u32,
    pub mode: Mode,
    pub surface: Surface,
    /// Sorted by `(k, x)`, one point per `(k, x)`.
    pub points: Vec<ExactPoint>,
}

impl PlotSet {
    pub fn from_points(prime: u32, mut points: Vec<ExactPoint>) -> Self {
        points.sort_unstable();
        points.dedup_by_key(|p| (p.k, p.x));
        PlotSet {
            prime,
            mode: Mode::Exhaustive,
            surface: Surface::Square,
            points,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Highest layer present.
    pub fn k_max(&self) -> Option<u32> {
        self.points.iter().map(|p| p.k).max()
    }

    /// Points of a single layer.
    pub fn layer(&self, k: u32) -> &[ExactPoint] {
        let lo = self.points.partition_point(|p| p.k < k);
        let hi = self.points.partition_point(|p| p.k <= k);
        &self.points[lo..hi]
    }
}

fn modulus(p: u32, k: u32) -> Result<u64, PlotError> {
    pow_u64(p, k as usize)
        .filter(|&m| m <= 1 << 62)
        .ok_or(PlotError::Overflow { k })
}

fn check_machine(t: &Transducer) -> Result<(), PlotError> {
    if t.in_arity() == 1 && t.out_arity() == 1 {
        Ok(())
    } else {
        Err(PlotError::Arity)
    }
}

/// Depth-first walk over all input words of length `k_lo..=k_hi`, calling
/// `f(k, X, Y)` once per word. Memory is `O(p · k_hi)`.
pub fn visit_layers(
    t: &Transducer,
    k_lo: u32,
    k_hi: u32,
    mut f: impl FnMut(u32, u64, u64),
) -> Result<(), PlotError> {
    check_machine(t)?;
    modulus(t.prime(), k_hi)?;
    visit_from(t, t.initial(), 0, 0, 0, k_lo, k_hi, &mut f);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn visit_from(
    t: &Transducer,
    state: usize,
    depth: u32,
    x: u64,
    y: u64,
    k_lo: u32,
    k_hi: u32,
    f: &mut impl FnMut(u32, u64, u64),
) {
    let p = t.prime() as u64;
    // (state, depth, x, y, weight = p^depth)
    let mut stack = vec![(state, depth, x, y, p.pow(depth))];
    while let Some((s, d, x, y, w)) = stack.pop() {
        if d >= k_lo {
            f(d, x, y);
        }
        if d == k_hi {
            continue;
        }
        for digit in (0..p).rev() {
            let (n, o) = t.step(s, digit as usize);
            stack.push((n, d + 1, x + digit * w, y + o as u64 * w, w * p));
        }
    }
}

/// All points of layers `k_lo..=k_hi`.
pub fn window(
    t: &Transducer,
    k_lo: u32,
    k_hi: u32,
    mode: Mode,
    budget: u64,
) -> Result<PlotSet, PlotError> {
    check_machine(t)?;
    if k_lo > k_hi {
        return Err(PlotError::Invalid(format!(
            "empty layer range {k_lo}..={k_hi}"
        )));
    }
    let p = t.prime();
    let top = modulus(p, k_hi)?;
    let points = match mode {
        Mode::Exhaustive => {
            if top > budget {
                return Err(PlotError::Budget {
                    k: k_hi,
                    points: top,
                    budget,
                });
            }
            exhaustive(t, k_lo, k_hi)
        }
        Mode::Sampled { n, seed } => {
            let mut rng = rng::seeded(seed);
            let mut pts = Vec::with_capacity(n * (k_hi - k_lo + 1) as usize);
            for k in k_lo..=k_hi {
                let m = modulus(p, k)?;
                for _ in 0..n {
                    let x = rng::below(&mut rng, m);
                    pts.push(ExactPoint {
                        k,
                        x,
                        y: eval(t, x, k),
                    });
                }
            }
            pts
        }
    };
    let mut set = PlotSet::from_points(p, points);
    set.mode = mode;
    Ok(set)
}

/// A single layer.
pub fn layer(t: &Transducer, k: u32, mode: Mode) -> Result<PlotSet, PlotError> {
    window(t, k, k, mode, EXHAUSTIVE_BUDGET)
}

/// `Y` for the `k`-digit input `X`.
pub fn eval(t: &Transducer, x: u64, k: u32) -> u64 {
    let p = t.prime() as u64;
    let (mut s, mut x, mut y, mut w) = (t.initial(), x, 0u64, 1u64);
    for _ in 0..k {
        let (n, o) = t.step(s, (x % p) as usize);
        x /= p;
        y += o as u64 * w;
        w *= p;
        s = n;
    }
    y
}

fn exhaustive(t: &Transducer, k_lo: u32, k_hi: u32) -> Vec<ExactPoint> {
    let p = t.prime() as u64;
    // split on the low digits so subtrees can run on separate workers
    let mut split = 0u32;
    while split < k_lo && p.pow(split + 1) <= 256 {
        split += 1;
    }
    let roots: Vec<(usize, u64, u64)> = (0..p.pow(split))
        .map(|x| {
            let (mut s, mut y, mut w, mut r) = (t.initial(), 0u64, 1u64, x);
            for _ in 0..split {
                let (n, o) = t.step(s, (r % p) as usize);
                r /= p;
                y += o as u64 * w;
                w *= p;
                s = n;
            }
            (s, x, y)
        })
        .collect();
    roots
        .into_par_iter()
        .flat_map_iter(|(s, x, y)| {
            let mut pts = Vec::new();
            visit_from(t, s, split, x, y, k_lo, k_hi, &mut |k, x, y| {
                pts.push(ExactPoint { k, x, y })
            });
            pts
        })
        .collect()
}

fn reverse_digits(mut x: u64, k: u32, p: u64) -> u64 {
    let mut r = 0;
    for _ in 0..k {
        r = r * p + x % p;
        x /= p;
    }
    r
}

/// Monna-map view of layer `k`: each returned point holds the numerators of
/// `(mon(X), mon(Y))` over `p^k`, where `mon` reverses digit significance.
pub fn monna_points(t: &Transducer, k: u32) -> Result<Vec<ExactPoint>, PlotError> {
    let set = layer(t, k, Mode::Exhaustive)?;
    let p = t.prime() as u64;
    let mut pts: Vec<ExactPoint> = set
        .points
        .iter()
        .map(|pt| ExactPoint {
            k,
            x: reverse_digits(pt.x, k, p),
            y: reverse_digits(pt.y, k, p),
        })
        .collect();
    pts.sort_unstable();
    Ok(pts)
}

/// A `res × res` occupancy grid. Cell `(cx, cy)` covers
/// `[cx/res, (cx+1)/res) × [cy/res, (cy+1)/res)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub res: usize,
    cells: Vec<bool>,
}

impl Raster {
    pub fn new(res: usize) -> Result<Self, PlotError> {
        if res < 2 {
            return Err(PlotError::Invalid("resolution must be at least 2".into()));
        }
        Ok(Raster {
            res,
            cells: vec![false; res * res],
        })
    }

    pub fn mark(&mut self, prime: u32, pt: &ExactPoint) {
        let m = pow_u64(prime, pt.k as usize).expect("layer modulus fits") as u128;
        let r = self.res as u128;
        let cx = (pt.x as u128 * r / m) as usize;
        let cy = (pt.y as u128 * r / m) as usize;
        self.cells[cy * self.res + cx] = true;
    }

    pub fn get(&self, cx: usize, cy: usize) -> bool {
        self.cells[cy * self.res + cx]
    }

    pub fn set_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c).count()
    }

    pub fn fill_ratio(&self) -> f64 {
        self.set_count() as f64 / (self.res * self.res) as f64
    }

    /// Binary PGM, set cells white, first row is the top of the square.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5 {} {} 255\n", self.res, self.res).into_bytes();
        for cy in (0..self.res).rev() {
            for cx in 0..self.res {
                out.push(if self.get(cx, cy) { 255 } else { 0 });
            }
        }
        out
    }
}

pub fn raster(points: &PlotSet, res: usize) -> Result<Raster, PlotError> {
    let mut r = Raster::new(res)?;
    for pt in &points.points {
        r.mark(points.prime, pt);
    }
    Ok(r)
}

/// Standard torus embedding with radii `big_r > small_r > 0`.
pub fn torus3d(
    points: &[(f64, f64)],
    big_r: f64,
    small_r: f64,
) -> Result<Vec<[f64; 3]>, PlotError> {
    if !(big_r > small_r && small_r > 0.0) {
        return Err(PlotError::Invalid(format!(
            "radii need R > r > 0, got R = {big_r}, r = {small_r}"
        )));
    }
    let tau = std::f64::consts::TAU;
    Ok(points
        .iter()
        .map(|&(x, y)| {
            let ring = big_r + small_r * (tau * y).cos();
            [
                ring * (tau * x).cos(),
                ring * (tau * x).sin(),
                small_r * (tau * y).sin(),
            ]
        })
        .collect())
}

/// Unit-square coordinates of each point, for visualization only.
pub fn to_unit(points: &PlotSet) -> Vec<(f64, f64)> {
    points
        .points
        .iter()
        .map(|pt| {
            let m = pow_u64(points.prime, pt.k as usize).expect("fits") as f64;
            (pt.x as f64 / m, pt.y as f64 / m)
        })
        .collect()
}

pub fn to_csv(points: &[ExactPoint]) -> String {
    let mut s = String::from("k,X,Y\n");
    for pt in points {
        writeln!(s, "{},{},{}", pt.k, pt.x, pt.y).unwrap();
    }
    s
}

/// Parses `k,X,Y` rows, checking `X, Y < p^k`.
pub fn from_csv(text: &str, prime: u32) -> Result<PlotSet, PlotError> {
    let mut pts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.eq_ignore_ascii_case("k,x,y")) {
            continue;
        }
        let bad = || PlotError::Invalid(format!("line {}: expected 'k,X,Y'", i + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(bad());
        }
        let k: u32 = f[0].parse().map_err(|_| bad())?;
        let x: u64 = f[1].parse().map_err(|_| bad())?;
        let y: u64 = f[2].parse().map_err(|_| bad())?;
        let m = modulus(prime, k)?;
        if x >= m || y >= m {
            return Err(PlotError::Invalid(format!(
                "line {}: coordinates must be below {prime}^{k}",
                i + 1
            )));
        }
        pts.push(ExactPoint { k, x, y });
    }
    Ok(PlotSet::from_points(prime, pts))
}

/// The line `y = slope·x + intercept` drawn on the torus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CableOverlay {
    pub slope: BigRational,
    pub intercept: BigRational,
}

/// Pieces of `y = s·x + e (mod 1)` over `x ∈ [0, 1]`, split where `y` wraps.
/// Every translate `e + j/b` for the slope's denominator `b` is included,
/// since the cable passes through all of them.
pub fn cable_segments(c: &CableOverlay) -> Vec<((f64, f64), (f64, f64))> {
    let s = c.slope.to_f64().expect("finite");
    let b = c.slope.denom().to_i64().expect("small denominator").max(1);
    let mut segs = Vec::new();
    for j in 0..b {
        let e = (&c.intercept + BigRational::new(j.into(), b.into()))
            .to_f64()
            .expect("finite");
        let e = e - e.floor();
        let (y0, y1) = (e, e + s);
        let mut cuts: Vec<f64> = Vec::new();
        let (lo, hi) = (y0.min(y1), y0.max(y1));
        let mut n = lo.floor() + 1.0;
        while n < hi {
            if s != 0.0 {
                cuts.push((n - e) / s);
            }
            n += 1.0;
        }
        cuts.sort_by(|a, b| a.total_cmp(b));
        let mut xs = vec![0.0];
        xs.extend(cuts);
        xs.push(1.0);
        for w in xs.windows(2) {
            let (xa, xb) = (w[0], w[1]);
            let mid = s * (xa + xb) / 2.0 + e;
            let shift = mid.floor();
            segs.push(((xa, s * xa + e - shift), (xb, s * xb + e - shift)));
        }
    }
    segs
}

/// SVG with one `res`-snapped square per occupied raster cell and the given
/// cables as line segments. Image y grows downward.
pub fn to_svg(r: &Raster, cables: &[CableOverlay]) -> String {
    let res = r.res;
    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{res}" height="{res}" viewBox="0 0 {res} {res}">"#
    )
    .unwrap();
    writeln!(s, r#"<rect width="{res}" height="{res}" fill="white"/>"#).unwrap();
    for cy in 0..res {
        for cx in 0..res {
            if r.get(cx, cy) {
                writeln!(
                    s,
                    r#"<rect x="{cx}" y="{}" width="1" height="1" fill="black"/>"#,
                    res - 1 - cy
                )
                .unwrap();
            }
        }
    }
    let f = res as f64;
    for c in cables {
        for ((xa, ya), (xb, yb)) in cable_segments(c) {
            writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="red" stroke-width="0.5"/>"#,
                xa * f,
                f - ya * f,
                xb * f,
                f - yb * f
            )
            .unwrap();
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PlotError> {
    std::fs::write(path, bytes).map_err(|source| PlotError::Io {
        path: path.display().to_string(),
        source,
    })
}

impl CableOverlay {
    pub fn new(slope: BigRational, intercept: BigRational) -> Self {
        CableOverlay { slope, intercept }
    }

    pub fn horizontal(height: BigRational) -> Self {
        CableOverlay {
            slope: BigRational::zero(),
            intercept: height,
        }
    }
}
