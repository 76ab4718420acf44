//! Escape dynamics of a Hénon chain: filtration radius, Green function
//! estimates with error bounds, escape classification, the domination
//! check between `G⁺` and `G⁻` near the axes, and grid rasterization.
//!
//! All estimates come from explicit coefficient-norm bounds. Fix a level
//! `r ≥ R`. On `V⁺_r = {|y| > max(|x|, r)}` every factor satisfies
//! `lo ≤ |π₂ H_j(x, y)| / |y|^{d_j} ≤ hi`, with `lo`, `hi` computed from the
//! coefficient moduli at `|y| = r`. Chaining these gives an interval
//! `[L(r), U(r)]` containing `log(|π₂ H| / |y|^d)`, shrinking as `r` grows.
//! Summing the telescoping series for `G⁺` along the orbit then gives
//!
//! ```text
//! G⁺(z) ∈ d^{-n} (log|y_n| + [L, U](|y_n|) / (d − 1))
//! ```
//!
//! once the orbit point `z_n = (x_n, y_n)` lies in `V⁺_R`. Estimates report
//! the midpoint of this interval and its half-width. The backward side uses
//! `V⁻` and the first coordinate.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::henon::{Direction, ElementaryFactor, HenonChain, Point2};
use crate::poly::Complex;
use crate::random::{annulus, disk};

/// Largest power of two tried by the filtration search.
const MAX_DOUBLINGS: u32 = 60;

/// Iteration stops once the error bound drops below this fraction of the value.
const CONVERGED_RELATIVE: f64 = 1e-15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    fn direction(self) -> Direction {
        match self {
            Sign::Plus => Direction::Forward,
            Sign::Minus => Direction::Inverse,
        }
    }
}

impl FromStr for Sign {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plus" | "+" => Ok(Sign::Plus),
            "minus" | "-" => Ok(Sign::Minus),
            other => Err(Error::Parse(format!("unknown sign '{other}'"))),
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "plus",
            Sign::Minus => "minus",
        })
    }
}

#[derive(Clone, Debug)]
struct CoefficientNorms {
    lower: Vec<f64>,
    leading: f64,
    b: f64,
    c: f64,
    delta: f64,
    degree: i32,
}

impl CoefficientNorms {
    fn of(f: &ElementaryFactor) -> Self {
        let coeffs = f.p().coeffs();
        let d = coeffs.len() - 1;
        Self {
            lower: coeffs[..d].iter().map(|a| a.norm()).collect(),
            leading: coeffs[d].norm(),
            b: f.b().norm(),
            c: f.c().norm(),
            delta: f.delta().norm(),
            degree: d as i32,
        }
    }

    fn lower_sum(&self, t: f64) -> f64 {
        self.lower
            .iter()
            .enumerate()
            .map(|(k, a)| a * t.powi(k as i32))
            .sum()
    }

    /// `|y| = t ≥ |x|` implies `|y'| > max(|x'|, |y|)` for the forward map.
    fn forward_holds(&self, t: f64) -> bool {
        let growth = self.leading * t.powi(self.degree) - self.lower_sum(t) - self.delta * t;
        growth > (self.b * t + self.c).max(t)
    }

    /// `|x| = t ≥ |y|` implies `|x'| > max(|y'|, |x|)` for the inverse map.
    fn backward_holds(&self, t: f64) -> bool {
        if t <= self.c {
            return false;
        }
        let s = (t - self.c) / self.b;
        let growth = self.leading * s.powi(self.degree) - self.lower_sum(s) - self.b * s - self.c;
        growth > self.delta * s.max(self.b * s + self.c)
    }

    /// Bounds on `|π₂ H_j(x, y)| / |y|^d` over `|y| ≥ r`, `|x| < |y|`.
    fn forward_distortion(&self, r: f64) -> (f64, f64) {
        let d = self.degree;
        let tail: f64 = self
            .lower
            .iter()
            .enumerate()
            .map(|(k, a)| a * r.powi(k as i32 - d))
            .sum::<f64>()
            + self.delta * r.powi(1 - d);
        (self.leading - tail, self.leading + tail)
    }

    /// Bounds on `|π₁ H_j⁻¹(x, y)| / |x|^d` over `|x| ≥ r`, `|y| < |x|`.
    fn inverse_distortion(&self, r: f64) -> (f64, f64) {
        if r <= self.c {
            return (0.0, f64::INFINITY);
        }
        let d = self.degree;
        let u_lo = (1.0 - self.c / r) / self.b;
        let u_hi = (1.0 + self.c / r) / self.b;
        let tail: f64 = self
            .lower
            .iter()
            .enumerate()
            .map(|(k, a)| a * u_hi.powi(k as i32) * r.powi(k as i32 - d))
            .sum::<f64>()
            + r.powi(1 - d);
        (
            (self.leading * u_lo.powi(d) - tail) / self.delta,
            (self.leading * u_hi.powi(d) + tail) / self.delta,
        )
    }
}

fn log_interval((lo, hi): (f64, f64)) -> Option<(f64, f64)> {
    (lo > 0.0 && hi.is_finite()).then(|| (lo.ln(), hi.ln()))
}

/// Radius `R` for which `V⁺_R` is forward invariant and `V⁻_R` backward
/// invariant under every factor.
#[derive(Clone, Debug, PartialEq)]
pub struct FiltrationRadius {
    pub radius: f64,
    pub per_factor: Vec<f64>,
}

impl FiltrationRadius {
    pub fn in_plus(&self, z: &Point2) -> bool {
        let ay = z.y.norm();
        ay > z.x.norm() && ay > self.radius
    }

    pub fn in_minus(&self, z: &Point2) -> bool {
        let ax = z.x.norm();
        ax > z.y.norm() && ax > self.radius
    }

    pub fn in_box(&self, z: &Point2) -> bool {
        z.x.norm() <= self.radius && z.y.norm() <= self.radius
    }

    fn in_region(&self, z: &Point2, sign: Sign) -> bool {
        match sign {
            Sign::Plus => self.in_plus(z),
            Sign::Minus => self.in_minus(z),
        }
    }
}

fn factor_radius(norms: &CoefficientNorms) -> Option<f64> {
    (0..=MAX_DOUBLINGS)
        .map(|k| 2f64.powi(k as i32))
        .find(|&r| norms.forward_holds(r) && norms.backward_holds(r))
}

/// Boundary samples just inside `V⁺_R` (or `V⁻_R` with coordinates swapped).
fn boundary_samples(radius: f64) -> Vec<Point2> {
    let eps = 1e-9;
    let mut out = Vec::with_capacity(64);
    for i in 0..16 {
        let theta = TAU * i as f64 / 16.0;
        let big = Complex::from_polar(radius * (1.0 + eps), theta);
        for (j, frac) in [0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0 - eps]
            .into_iter()
            .enumerate()
        {
            let phi = TAU * (i * 4 + j) as f64 / 64.0 + 0.5;
            let small = Complex::from_polar(big.norm() * frac, phi);
            out.push(Point2::new(small, big));
        }
    }
    out
}

/// Filtration radius from coefficient norms, verified on boundary samples.
pub fn filtration_radius(h: &HenonChain) -> Result<FiltrationRadius> {
    let per_factor = h
        .factors()
        .iter()
        .enumerate()
        .map(|(i, f)| {
            factor_radius(&CoefficientNorms::of(f)).ok_or_else(|| {
                Error::SelfCheckFailed(format!(
                    "no filtration radius up to 2^{MAX_DOUBLINGS} for factor {i}"
                ))
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    let radius = per_factor.iter().copied().fold(0.0, f64::max);
    let filtration = FiltrationRadius { radius, per_factor };

    for z in boundary_samples(radius) {
        let swapped = Point2::new(z.y, z.x);
        for (i, f) in h.factors().iter().enumerate() {
            if !filtration.in_plus(&f.forward(z)) {
                return Err(Error::SelfCheckFailed(format!(
                    "factor {i} maps {z} out of V+ (R = {radius})"
                )));
            }
            if !filtration.in_minus(&f.inverse(swapped)) {
                return Err(Error::SelfCheckFailed(format!(
                    "inverse of factor {i} maps {swapped} out of V- (R = {radius})"
                )));
            }
        }
        if !filtration.in_plus(&h.forward(z)) || !filtration.in_minus(&h.inverse(swapped)) {
            return Err(Error::SelfCheckFailed(format!("chain leaves V± from {z}")));
        }
    }
    Ok(filtration)
}

/// `G±` (or `G`) at a point.
///
/// `value` is 0 exactly when the orbit did not reach the escape region within
/// the budget; `error_bound` is then 0 as well, since the estimate is
/// conditional on the point being a candidate of `K±`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GreenEstimate {
    pub value: f64,
    pub error_bound: f64,
    pub iterations_used: usize,
    pub escaped: bool,
}

impl GreenEstimate {
    fn bounded(iterations: usize) -> Self {
        Self {
            value: 0.0,
            error_bound: 0.0,
            iterations_used: iterations,
            escaped: false,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EscapeClass {
    InKPlusCandidate,
    InKMinusCandidate,
    InKCandidate,
    EscapedForward(usize),
    EscapedBackward(usize),
    EscapedBoth { forward: usize, backward: usize },
}

impl EscapeClass {
    pub fn is_candidate(&self) -> bool {
        matches!(
            self,
            EscapeClass::InKCandidate
                | EscapeClass::InKPlusCandidate
                | EscapeClass::InKMinusCandidate
        )
    }
}

impl fmt::Display for EscapeClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EscapeClass::InKPlusCandidate => write!(f, "in K+ (candidate)"),
            EscapeClass::InKMinusCandidate => write!(f, "in K- (candidate)"),
            EscapeClass::InKCandidate => write!(f, "in K (candidate)"),
            EscapeClass::EscapedForward(n) => write!(f, "escaped forward at step {n}"),
            EscapeClass::EscapedBackward(n) => write!(f, "escaped backward at step {n}"),
            EscapeClass::EscapedBoth { forward, backward } => {
                write!(
                    f,
                    "escaped forward at step {forward} and backward at step {backward}"
                )
            }
        }
    }
}

/// A chain together with its filtration data.
#[derive(Clone, Debug)]
pub struct Dynamics {
    chain: HenonChain,
    filtration: FiltrationRadius,
    norms: Vec<CoefficientNorms>,
    degree: f64,
}

impl Dynamics {
    pub fn new(chain: &HenonChain) -> Result<Self> {
        let filtration = filtration_radius(chain)?;
        Ok(Self {
            chain: chain.clone(),
            filtration,
            norms: chain.factors().iter().map(CoefficientNorms::of).collect(),
            degree: chain.degree() as f64,
        })
    }

    pub fn chain(&self) -> &HenonChain {
        &self.chain
    }

    pub fn filtration(&self) -> &FiltrationRadius {
        &self.filtration
    }

    pub fn radius(&self) -> f64 {
        self.filtration.radius
    }

    /// Interval `[L, U]` containing `log(|π₂ H| / |y|^d)` on `V⁺_r` (plus) or
    /// `log(|π₁ H⁻¹| / |x|^d)` on `V⁻_r` (minus), for `r ≥ R`. `None` when the
    /// coefficient bounds do not separate from zero at this level.
    pub fn log_ratio_bounds(&self, sign: Sign, r: f64) -> Option<(f64, f64)> {
        let degrees: Vec<f64> = self.norms.iter().map(|n| n.degree as f64).collect();
        let mut total = (0.0, 0.0);
        for (j, n) in self.norms.iter().enumerate() {
            let (weight, (lo, hi)) = match sign {
                Sign::Plus => (
                    degrees[j + 1..].iter().product::<f64>(),
                    log_interval(n.forward_distortion(r))?,
                ),
                Sign::Minus => (
                    degrees[..j].iter().product::<f64>(),
                    log_interval(n.inverse_distortion(r))?,
                ),
            };
            total.0 += weight * lo;
            total.1 += weight * hi;
        }
        Some(total)
    }

    /// Bound on `|G⁺ − log|y||` over `V⁺_R` (plus), or `|G⁻ − log|x||` over `V⁻_R` (minus).
    pub fn growth_constant(&self, sign: Sign) -> f64 {
        match self.log_ratio_bounds(sign, self.filtration.radius) {
            Some((lo, hi)) => lo.abs().max(hi.abs()) / (self.degree - 1.0),
            None => f64::INFINITY,
        }
    }

    pub fn green(&self, z: Point2, sign: Sign, budget: usize) -> GreenEstimate {
        let d = self.degree;
        let direction = sign.direction();
        let mut z = z;
        let mut scale = 1.0;
        let mut estimate: Option<GreenEstimate> = None;
        for n in 0..=budget {
            if self.filtration.in_region(&z, sign) {
                let r = match sign {
                    Sign::Plus => z.y.norm(),
                    Sign::Minus => z.x.norm(),
                };
                if let Some((lo, hi)) = self.log_ratio_bounds(sign, r) {
                    let value = scale * (r.ln() + (lo + hi) / (2.0 * (d - 1.0)));
                    let error_bound = scale * (hi - lo) / (2.0 * (d - 1.0));
                    estimate = Some(GreenEstimate {
                        value,
                        error_bound,
                        iterations_used: n,
                        escaped: true,
                    });
                    if error_bound <= CONVERGED_RELATIVE * value {
                        break;
                    }
                }
            }
            if n == budget {
                break;
            }
            match self.chain.step_checked(z, direction) {
                Some(next) => {
                    z = next;
                    scale /= d;
                }
                None => {
                    if estimate.is_none() {
                        // Overflow before reaching V±: no distortion bound applies,
                        // report the crude size estimate with a 100% bound.
                        let value = scale * z.max_abs().max(1.0).ln();
                        estimate = Some(GreenEstimate {
                            value,
                            error_bound: value,
                            iterations_used: n,
                            escaped: true,
                        });
                    }
                    break;
                }
            }
        }
        estimate.unwrap_or(GreenEstimate::bounded(budget))
    }

    /// `G = max(G⁺, G⁻)`.
    pub fn green_max(&self, z: Point2, budget: usize) -> GreenEstimate {
        let plus = self.green(z, Sign::Plus, budget);
        let minus = self.green(z, Sign::Minus, budget);
        GreenEstimate {
            value: plus.value.max(minus.value),
            error_bound: plus.error_bound.max(minus.error_bound),
            iterations_used: plus.iterations_used.max(minus.iterations_used),
            escaped: plus.escaped || minus.escaped,
        }
    }

    /// First iteration at which the orbit is in `V±_R`, if any within the budget.
    pub fn escape_step(&self, z: Point2, sign: Sign, budget: usize) -> Option<usize> {
        let mut z = z;
        for n in 0..=budget {
            if self.filtration.in_region(&z, sign) {
                return Some(n);
            }
            if n == budget {
                break;
            }
            match self.chain.step_checked(z, sign.direction()) {
                Some(next) => z = next,
                None => return Some(n + 1),
            }
        }
        None
    }

    pub fn classify_one_sided(&self, z: Point2, sign: Sign, budget: usize) -> EscapeClass {
        match (sign, self.escape_step(z, sign, budget)) {
            (Sign::Plus, Some(n)) => EscapeClass::EscapedForward(n),
            (Sign::Plus, None) => EscapeClass::InKPlusCandidate,
            (Sign::Minus, Some(n)) => EscapeClass::EscapedBackward(n),
            (Sign::Minus, None) => EscapeClass::InKMinusCandidate,
        }
    }

    /// Escape in either direction is certified; membership in `K` is only a
    /// candidate verdict limited by the budget.
    pub fn classify(&self, z: Point2, budget: usize) -> EscapeClass {
        match (
            self.escape_step(z, Sign::Plus, budget),
            self.escape_step(z, Sign::Minus, budget),
        ) {
            (None, None) => EscapeClass::InKCandidate,
            (Some(f), None) => EscapeClass::EscapedForward(f),
            (None, Some(b)) => EscapeClass::EscapedBackward(b),
            (Some(forward), Some(backward)) => EscapeClass::EscapedBoth { forward, backward },
        }
    }

    /// Checks `G⁻ < G⁺` on `D²(R₀) = {|x| < R, |y| > R₀}` and `G⁺ < G⁻` on
    /// `D¹(R₀) = {|y| < R, |x| > R₀}` at random samples.
    pub fn verify_green_domination(
        &self,
        r0: f64,
        samples: usize,
        budget: usize,
        seed: u64,
    ) -> Result<DominationReport> {
        let radius = self.filtration.radius;
        if r0 <= radius {
            return Err(Error::PreconditionViolated(format!(
                "R0 = {r0} must exceed the filtration radius {radius}"
            )));
        }
        if samples == 0 {
            return Err(Error::PreconditionViolated(
                "need at least one sample".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut plus_points = Vec::with_capacity(samples);
        let mut minus_points = Vec::with_capacity(samples);
        for _ in 0..samples {
            let small = disk(&mut rng, radius * (1.0 - 1e-12));
            let big = annulus(&mut rng, r0 * (1.0 + 1e-12), 2.0 * r0);
            plus_points.push(Point2::new(small, big));
            let small = disk(&mut rng, radius * (1.0 - 1e-12));
            let big = annulus(&mut rng, r0 * (1.0 + 1e-12), 2.0 * r0);
            minus_points.push(Point2::new(big, small));
        }
        Ok(DominationReport {
            r0,
            radius,
            plus_region: self.domination_region(&plus_points, Sign::Plus, budget),
            minus_region: self.domination_region(&minus_points, Sign::Minus, budget),
        })
    }

    fn domination_region(&self, points: &[Point2], dominant: Sign, budget: usize) -> RegionResult {
        let mut result = RegionResult {
            dominant,
            samples: points.len(),
            certified: 0,
            inconclusive: Vec::new(),
            worst_margin: f64::INFINITY,
        };
        for &z in points {
            let plus = self.green(z, Sign::Plus, budget);
            let minus = self.green(z, Sign::Minus, budget);
            let (hi, lo) = match dominant {
                Sign::Plus => (plus, minus),
                Sign::Minus => (minus, plus),
            };
            let margin = if hi.escaped && lo.escaped {
                (hi.value - lo.value) - (hi.error_bound + lo.error_bound)
            } else {
                f64::NEG_INFINITY
            };
            result.worst_margin = result.worst_margin.min(margin);
            if margin > 0.0 {
                result.certified += 1;
            } else {
                result
                    .inconclusive
                    .push(InconclusiveSample { point: z, margin });
            }
        }
        result
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InconclusiveSample {
    pub point: Point2,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegionResult {
    /// `Plus` for `D²(R₀)` where `G⁺` should dominate, `Minus` for `D¹(R₀)`.
    pub dominant: Sign,
    pub samples: usize,
    pub certified: usize,
    pub inconclusive: Vec<InconclusiveSample>,
    /// Smallest `gap − (bound₁ + bound₂)` seen; positive means every sample is certified.
    pub worst_margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DominationReport {
    pub r0: f64,
    pub radius: f64,
    pub plus_region: RegionResult,
    pub minus_region: RegionResult,
}

impl DominationReport {
    pub fn all_certified(&self) -> bool {
        self.plus_region.certified == self.plus_region.samples
            && self.minus_region.certified == self.minus_region.samples
    }
}

pub fn green(h: &HenonChain, z: Point2, sign: Sign, budget: usize) -> Result<GreenEstimate> {
    Ok(Dynamics::new(h)?.green(z, sign, budget))
}

pub fn green_max(h: &HenonChain, z: Point2, budget: usize) -> Result<GreenEstimate> {
    Ok(Dynamics::new(h)?.green_max(z, budget))
}

pub fn classify_point(h: &HenonChain, z: Point2, budget: usize) -> Result<EscapeClass> {
    Ok(Dynamics::new(h)?.classify(z, budget))
}

pub fn verify_green_domination(
    h: &HenonChain,
    r0: f64,
    samples: usize,
) -> Result<DominationReport> {
    Dynamics::new(h)?.verify_green_domination(r0, samples, DEFAULT_BUDGET, 0)
}

pub const DEFAULT_BUDGET: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GridMode {
    GPlus,
    GMinus,
    GMax,
    KMembership,
}

impl FromStr for GridMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gplus" => Ok(GridMode::GPlus),
            "gminus" => Ok(GridMode::GMinus),
            "gmax" => Ok(GridMode::GMax),
            "k" | "kmembership" => Ok(GridMode::KMembership),
            other => Err(Error::Parse(format!("unknown grid mode '{other}'"))),
        }
    }
}

impl fmt::Display for GridMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GridMode::GPlus => "gplus",
            GridMode::GMinus => "gminus",
            GridMode::GMax => "gmax",
            GridMode::KMembership => "k",
        })
    }
}

/// Real 2-plane `base + s·u + t·v` inside ℂ².
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Slice {
    pub base: Point2,
    pub u: Point2,
    pub v: Point2,
}

impl Default for Slice {
    /// The real `(x, y)` plane.
    fn default() -> Self {
        Self {
            base: Point2::origin(),
            u: Point2::real(1.0, 0.0),
            v: Point2::real(0.0, 1.0),
        }
    }
}

impl Slice {
    pub fn point(&self, s: f64, t: f64) -> Point2 {
        Point2::new(
            self.base.x + self.u.x * s + self.v.x * t,
            self.base.y + self.u.y * s + self.v.y * t,
        )
    }
}

impl fmt::Display for Slice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = |z: &Point2| format!("[{}:{}:{}:{}]", z.x.re, z.x.im, z.y.re, z.y.im);
        write!(f, "base{}u{}v{}", p(&self.base), p(&self.u), p(&self.v))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridJob {
    /// Window center in slice coordinates `(s, t)`.
    pub center: (f64, f64),
    pub width: f64,
    pub height: f64,
    /// `(columns, rows)`.
    pub resolution: (usize, usize),
    pub slice: Slice,
    pub mode: GridMode,
    pub budget: usize,
}

impl GridJob {
    pub fn validate(&self) -> Result<()> {
        if self.resolution.0 == 0 || self.resolution.1 == 0 {
            return Err(Error::PreconditionViolated(
                "resolution must be at least 1x1".into(),
            ));
        }
        if self.budget == 0 {
            return Err(Error::PreconditionViolated(
                "budget must be at least 1".into(),
            ));
        }
        if !(self.width.is_finite()
            && self.height.is_finite()
            && self.width > 0.0
            && self.height > 0.0)
        {
            return Err(Error::PreconditionViolated(
                "window size must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Slice coordinates of the center of pixel `(col, row)`; row 0 is the top.
    pub fn pixel_coords(&self, col: usize, row: usize) -> (f64, f64) {
        let (nx, ny) = self.resolution;
        let s = self.center.0 - self.width / 2.0 + ((col as f64 + 0.5) * self.width) / nx as f64;
        let t = self.center.1 + self.height / 2.0 - ((row as f64 + 0.5) * self.height) / ny as f64;
        (s, t)
    }

    pub fn pixel_point(&self, col: usize, row: usize) -> Point2 {
        let (s, t) = self.pixel_coords(col, row);
        self.slice.point(s, t)
    }

    pub fn window_label(&self) -> String {
        format!(
            "{}:{}:{}:{}@{}x{}",
            self.center.0,
            self.center.1,
            self.width,
            self.height,
            self.resolution.0,
            self.resolution.1
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Pixels whose orbit did not escape within the budget.
    pub bounded: usize,
    pub escaped: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    pub columns: usize,
    pub rows: usize,
    /// Row-major, row 0 at the top.
    pub values: Vec<f64>,
    pub stats: GridStats,
}

impl Grid {
    pub fn get(&self, col: usize, row: usize) -> f64 {
        self.values[row * self.columns + col]
    }
}

impl Dynamics {
    fn pixel(&self, z: Point2, mode: GridMode, budget: usize) -> (f64, bool) {
        match mode {
            GridMode::GPlus => {
                let g = self.green(z, Sign::Plus, budget);
                (g.value, g.escaped)
            }
            GridMode::GMinus => {
                let g = self.green(z, Sign::Minus, budget);
                (g.value, g.escaped)
            }
            GridMode::GMax => {
                let g = self.green_max(z, budget);
                (g.value, g.escaped)
            }
            GridMode::KMembership => {
                let candidate = self.classify(z, budget) == EscapeClass::InKCandidate;
                (if candidate { 1.0 } else { 0.0 }, !candidate)
            }
        }
    }

    /// Evaluates every pixel of the job. Rows are distributed over `workers`
    /// threads (0 means the rayon default); pixels are independent, so the
    /// result does not depend on the worker count.
    pub fn rasterize(&self, job: &GridJob, workers: usize) -> Result<Grid> {
        job.validate()?;
        let (nx, ny) = job.resolution;
        let mut cells = vec![(0.0f64, false); nx * ny];
        let fill = |cells: &mut [(f64, bool)]| {
            cells
                .par_chunks_mut(nx)
                .enumerate()
                .for_each(|(row, line)| {
                    for (col, cell) in line.iter_mut().enumerate() {
                        *cell = self.pixel(job.pixel_point(col, row), job.mode, job.budget);
                    }
                });
        };
        if workers == 0 {
            fill(&mut cells);
        } else {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(workers)
                .build()
                .map_err(|e| Error::PreconditionViolated(format!("thread pool: {e}")))?;
            pool.install(|| fill(&mut cells));
        }

        let values: Vec<f64> = cells.iter().map(|c| c.0).collect();
        let escaped = cells.iter().filter(|c| c.1).count();
        let stats = GridStats {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: values.iter().sum::<f64>() / values.len() as f64,
            bounded: values.len() - escaped,
            escaped,
        };
        Ok(Grid {
            columns: nx,
            rows: ny,
            values,
            stats,
        })
    }
}

pub fn rasterize_grid(h: &HenonChain, job: &GridJob, workers: usize) -> Result<Grid> {
    Dynamics::new(h)?.rasterize(job, workers)
}
