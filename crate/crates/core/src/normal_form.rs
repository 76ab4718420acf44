//! Normal-form rewriting of Hénon chains and the twist-symmetry condition.
//!
//! A chain is in normal form when every factor is `(x, y) ↦ (y, p(y) − δx)`.
//! The rewrites here change the individual factors but never the composed
//! map.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::henon::{ElementaryFactor, HenonChain, Point2};
use crate::poly::{Complex, Polynomial};

/// Tolerance for treating `c` and `p(0)` as zero in preconditions.
pub const ZERO_TOLERANCE: f64 = 1e-12;

/// Tolerance on `|η^{k+1} − 1|` in [`twist_symmetry_check`].
pub const TWIST_TOLERANCE: f64 = 1e-9;

/// `(x, y) ↦ (y, p(y) − δx)`.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalFactor {
    pub p: Polynomial,
    pub delta: Complex,
}

impl NormalFactor {
    pub fn new(p: Polynomial, delta: Complex) -> Result<Self> {
        // Reuse the elementary-factor validation.
        ElementaryFactor::normal(p.clone(), delta)?;
        Ok(Self { p, delta })
    }

    pub fn to_factor(&self) -> ElementaryFactor {
        ElementaryFactor::new_unchecked(
            Complex::new(1.0, 0.0),
            Complex::new(0.0, 0.0),
            self.delta,
            self.p.clone(),
        )
    }

    pub fn from_factor(f: &ElementaryFactor) -> Option<Self> {
        f.is_normal().then(|| Self {
            p: f.p().clone(),
            delta: f.delta(),
        })
    }
}

/// Chain of normal factors, first-applied first.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalChain {
    factors: Vec<NormalFactor>,
}

impl NormalChain {
    pub fn new(factors: Vec<NormalFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyChain);
        }
        Ok(Self { factors })
    }

    /// Succeeds when every factor already has `b = 1`, `c = 0`.
    pub fn from_chain(h: &HenonChain) -> Option<Self> {
        h.factors()
            .iter()
            .map(NormalFactor::from_factor)
            .collect::<Option<Vec<_>>>()
            .map(|factors| Self { factors })
    }

    pub fn factors(&self) -> &[NormalFactor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn to_chain(&self) -> HenonChain {
        HenonChain::new(self.factors.iter().map(NormalFactor::to_factor).collect())
            .expect("normal chains are nonempty")
    }
}

/// Rewrites `H_{i+1} ∘ H_i` as `H̃_{i+1} ∘ H̃_i` with both factors normal.
///
/// `p̃_i = b_{i+1}·p_i + c_{i+1}`, `δ̃_i = b_{i+1}·δ_i`,
/// `p̃_{i+1}(y) = p_{i+1}((y − c_{i+1}) / b_{i+1}) − δ_{i+1}·c_i`, `δ̃_{i+1} = δ_{i+1}·b_i`.
pub fn pair_normalize(
    first: &ElementaryFactor,
    next: &ElementaryFactor,
) -> (NormalFactor, NormalFactor) {
    let lower = NormalFactor {
        p: first.p().scale(next.b()).add_constant(next.c()),
        delta: next.b() * first.delta(),
    };
    let b_inv = next.b().inv();
    let undo = Polynomial::linear(b_inv, -next.c() * b_inv);
    let upper = NormalFactor {
        p: next
            .p()
            .compose(&undo)
            .add_constant(-next.delta() * first.c()),
        delta: next.delta() * first.b(),
    };
    (lower, upper)
}

/// `H²` as a normal chain of `2m` factors, rewriting the disjoint consecutive
/// pairs `(1, 2), (3, 4), …` of the doubled chain.
pub fn square_normal_form(h: &HenonChain) -> NormalChain {
    let doubled = h.power(2).expect("power 2");
    let factors = doubled
        .factors()
        .chunks_exact(2)
        .flat_map(|pair| {
            let (lower, upper) = pair_normalize(&pair[0], &pair[1]);
            [lower, upper]
        })
        .collect();
    NormalChain { factors }
}

/// Normal form of a chain whose factors all have `c = 0`, keeping the length `m ≥ 2`.
///
/// The top factor is split as `H_m = N_m ∘ D` with `D(x, y) = (x, b_m·y)` and
/// `N_m` normal; `D` is folded into the factor below, and the process repeats
/// until two factors remain, which are handled by [`pair_normalize`].
pub fn chain_normalize_b_only(h: &HenonChain) -> Result<NormalChain> {
    let m = h.len();
    if m < 2 {
        return Err(Error::PreconditionViolated(format!(
            "b-only normalization needs at least 2 factors, got {m}"
        )));
    }
    if let Some((i, f)) = h
        .factors()
        .iter()
        .enumerate()
        .find(|(_, f)| f.c().norm() > ZERO_TOLERANCE)
    {
        return Err(Error::PreconditionViolated(format!(
            "factor {i} has c = {} (expected 0)",
            f.c()
        )));
    }

    let mut work: Vec<ElementaryFactor> = h.factors().to_vec();
    let mut upper: Vec<NormalFactor> = Vec::with_capacity(m);
    while work.len() > 2 {
        let top = work.pop().expect("len > 2");
        let b = top.b();
        // N(x, y) = (y, p(y / b) − δx)
        upper.push(NormalFactor {
            p: top
                .p()
                .compose(&Polynomial::linear(b.inv(), Complex::new(0.0, 0.0))),
            delta: top.delta(),
        });
        // D ∘ H_{k}: (b_k·y, b·p_k(y) − b·δ_k·x)
        let below = work.pop().expect("len > 1");
        work.push(ElementaryFactor::new_unchecked(
            below.b(),
            Complex::new(0.0, 0.0),
            below.delta() * b,
            below.p().scale(b),
        ));
    }
    let (lower, second) = pair_normalize(&work[0], &work[1]);
    let mut factors = vec![lower, second];
    factors.extend(upper.into_iter().rev());
    Ok(NormalChain { factors })
}

/// For `H(0) = 0`: an equivalent chain whose factors all have `c = 0` and `p(0) = 0`.
///
/// Each factor, with the pending translation folded in, is split into
/// `A ∘ H'` where `H'` fixes the origin and `A(x, y) = (x + c', y + p'(0))`;
/// `A` is then pushed into the next factor.
pub fn origin_fixed_form(h: &HenonChain) -> Result<HenonChain> {
    let image = h.forward(Point2::origin());
    if image.norm() > 1e-9 {
        return Err(Error::PreconditionViolated(format!(
            "H(0) = {image} is not the origin"
        )));
    }
    let mut pending = Point2::origin();
    let mut out = Vec::with_capacity(h.len());
    for f in h.factors() {
        // f ∘ A_pending
        let c = f.c() + f.b() * pending.y;
        let p = f
            .p()
            .compose(&Polynomial::linear(Complex::new(1.0, 0.0), pending.y))
            .add_constant(-f.delta() * pending.x);
        let k = p.coeff(0);
        out.push(ElementaryFactor::new_unchecked(
            f.b(),
            Complex::new(0.0, 0.0),
            f.delta(),
            p.add_constant(-k),
        ));
        pending = Point2::new(c, k);
    }
    // The leftover translation is H(0) computed another way.
    if pending.norm() > 1e-9 {
        return Err(Error::PreconditionViolated(format!(
            "residual translation {pending} after folding"
        )));
    }
    HenonChain::new(out)
}

/// `η·p(ηy) = p(y)`, checked coefficientwise as `η^{k+1} = 1` for every nonzero `a_k`.
pub fn twist_symmetry_check(p: &Polynomial, eta: Complex) -> bool {
    p.support()
        .all(|k| (eta.powu(k as u32 + 1) - Complex::new(1.0, 0.0)).norm() <= TWIST_TOLERANCE)
}

/// The cyclic group `{η : η^order = 1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TwistGroup {
    pub generator: Complex,
    pub order: usize,
    /// `(factor, k)` for every coefficient index below the degree that was treated as zero.
    pub zero_coefficients: Vec<(usize, usize)>,
}

impl TwistGroup {
    pub fn cyclic(order: usize) -> Self {
        Self {
            generator: Complex::from_polar(1.0, TAU / order as f64),
            order,
            zero_coefficients: Vec::new(),
        }
    }

    pub fn elements(&self) -> Vec<Complex> {
        (0..self.order)
            .map(|j| Complex::from_polar(1.0, TAU * j as f64 / self.order as f64))
            .collect()
    }

    pub fn contains(&self, eta: Complex) -> bool {
        (eta.powu(self.order as u32) - Complex::new(1.0, 0.0)).norm() <= TWIST_TOLERANCE
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Twists compatible with every factor: `η^g = 1` where `g` is the gcd of
/// `k + 1` over all nonzero coefficients `a_k` of all factors.
pub fn admissible_twist_group(h: &NormalChain) -> Result<TwistGroup> {
    let mut g = 0;
    let mut zero_coefficients = Vec::new();
    for (i, f) in h.factors().iter().enumerate() {
        if f.p.coeff(0).norm() > ZERO_TOLERANCE {
            return Err(Error::PreconditionViolated(format!(
                "factor {i} has p(0) = {} (expected 0)",
                f.p.coeff(0)
            )));
        }
        for k in f.p.support() {
            g = gcd(g, k + 1);
        }
        zero_coefficients.extend(
            (0..f.p.degree())
                .filter(|&k| f.p.coeff(k) == Complex::new(0.0, 0.0))
                .map(|k| (i, k)),
        );
    }
    let mut group = TwistGroup::cyclic(g.max(1));
    group.zero_coefficients = zero_coefficients;
    Ok(group)
}
