//! Generalized Hénon maps as ordered compositions of elementary factors
//! `(x, y) ↦ (b·y + c, p(y) − δ·x)`.

use std::fmt;

use crate::error::{Error, Result};
use crate::poly::{check_finite, fmt_complex, BivariatePolynomial, Complex, PolyMap2, Polynomial};

/// Coordinates beyond this magnitude count as escaped to numerical infinity.
/// Far below `f64::MAX`, so one more squaring stays finite.
pub const OVERFLOW_SENTINEL: f64 = 1e150;

/// Default cap on the total degree produced by [`HenonChain::expand`].
pub const DEFAULT_EXPANSION_CAP: usize = 64;

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2 {
    pub x: Complex,
    pub y: Complex,
}

impl Point2 {
    pub fn new(x: Complex, y: Complex) -> Self {
        Self { x, y }
    }

    pub fn real(x: f64, y: f64) -> Self {
        Self::new(Complex::new(x, 0.0), Complex::new(y, 0.0))
    }

    pub fn origin() -> Self {
        Self::default()
    }

    /// Euclidean norm on ℂ².
    pub fn norm(&self) -> f64 {
        (self.x.norm_sqr() + self.y.norm_sqr()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.x.norm().max(self.y.norm())
    }

    pub fn is_finite(&self) -> bool {
        [self.x.re, self.x.im, self.y.re, self.y.im]
            .iter()
            .all(|v| v.is_finite())
    }

    pub fn dist(&self, other: &Point2) -> f64 {
        (*self - *other).norm()
    }
}

impl std::ops::Sub for Point2 {
    type Output = Point2;
    fn sub(self, rhs: Point2) -> Point2 {
        Point2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Add for Point2 {
    type Output = Point2;
    fn add(self, rhs: Point2) -> Point2 {
        Point2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", fmt_complex(self.x), fmt_complex(self.y))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// One factor `(x, y) ↦ (b·y + c, p(y) − δ·x)` with `bδ ≠ 0` and `deg p ≥ 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryFactor {
    b: Complex,
    c: Complex,
    delta: Complex,
    p: Polynomial,
}

impl ElementaryFactor {
    pub fn new(b: Complex, c: Complex, delta: Complex, p: Polynomial) -> Result<Self> {
        check_finite(b, "b")?;
        check_finite(c, "c")?;
        check_finite(delta, "delta")?;
        if b == Complex::new(0.0, 0.0) {
            return Err(Error::InvalidFactor("b must be nonzero".into()));
        }
        if delta == Complex::new(0.0, 0.0) {
            return Err(Error::InvalidFactor("delta must be nonzero".into()));
        }
        if p.degree() < 2 {
            return Err(Error::InvalidFactor(format!(
                "p must have degree at least 2, got {}",
                p.degree()
            )));
        }
        Ok(Self { b, c, delta, p })
    }

    /// `(x, y) ↦ (y, p(y) − δ·x)`.
    pub fn normal(p: Polynomial, delta: Complex) -> Result<Self> {
        Self::new(Complex::new(1.0, 0.0), Complex::new(0.0, 0.0), delta, p)
    }

    /// The classical `(x, y) ↦ (y, p(y) − x)`.
    pub fn simple(p: Polynomial) -> Result<Self> {
        Self::normal(p, Complex::new(1.0, 0.0))
    }

    pub(crate) fn new_unchecked(b: Complex, c: Complex, delta: Complex, p: Polynomial) -> Self {
        debug_assert!(p.degree() >= 2);
        Self { b, c, delta, p }
    }

    pub fn b(&self) -> Complex {
        self.b
    }

    pub fn c(&self) -> Complex {
        self.c
    }

    pub fn delta(&self) -> Complex {
        self.delta
    }

    pub fn p(&self) -> &Polynomial {
        &self.p
    }

    pub fn degree(&self) -> usize {
        self.p.degree()
    }

    /// The differential is `[[0, b], [−δ, p'(y)]]`, so the determinant is `bδ`.
    pub fn jacobian_det(&self) -> Complex {
        self.b * self.delta
    }

    pub fn is_normal(&self) -> bool {
        self.b == Complex::new(1.0, 0.0) && self.c == Complex::new(0.0, 0.0)
    }

    pub fn forward(&self, z: Point2) -> Point2 {
        Point2::new(self.b * z.y + self.c, self.p.eval(z.y) - self.delta * z.x)
    }

    pub fn inverse(&self, z: Point2) -> Point2 {
        let y = (z.x - self.c) / self.b;
        Point2::new((self.p.eval(y) - z.y) / self.delta, y)
    }

    pub fn eval(&self, z: Point2, direction: Direction) -> Point2 {
        match direction {
            Direction::Forward => self.forward(z),
            Direction::Inverse => self.inverse(z),
        }
    }

    pub fn to_map(&self) -> PolyMap2 {
        PolyMap2::new(
            BivariatePolynomial::y().scale(self.b).add_constant(self.c),
            &BivariatePolynomial::from_univariate_y(&self.p)
                - &BivariatePolynomial::x().scale(self.delta),
        )
    }

    /// Applies this factor symbolically to an already expanded map.
    fn apply_to(&self, inner: &PolyMap2) -> PolyMap2 {
        PolyMap2::new(
            inner.second.scale(self.b).add_constant(self.c),
            &inner.second.apply_univariate(&self.p) - &inner.first.scale(self.delta),
        )
    }
}

impl fmt::Display for ElementaryFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let first = if self.c == Complex::new(0.0, 0.0) {
            format!("{}*y", fmt_complex(self.b))
        } else {
            format!("{}*y + {}", fmt_complex(self.b), fmt_complex(self.c))
        };
        write!(f, "({first}, {} - {}*x)", self.p, fmt_complex(self.delta))
    }
}

/// Orbit left the representable range during iteration `step` (1-based).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Escaped {
    pub step: usize,
    /// The last point reached before the offending iteration.
    pub last: Point2,
}

fn overflowed(z: &Point2) -> bool {
    !z.is_finite() || z.max_abs() > OVERFLOW_SENTINEL
}

/// `H = H_m ∘ ⋯ ∘ H_1`, stored first-applied first: `factors[0]` is `H_1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HenonChain {
    factors: Vec<ElementaryFactor>,
}

impl HenonChain {
    pub fn new(factors: Vec<ElementaryFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::EmptyChain);
        }
        Ok(Self { factors })
    }

    pub fn single(factor: ElementaryFactor) -> Self {
        Self {
            factors: vec![factor],
        }
    }

    /// `(x, y) ↦ (y, p(y) − x)` from real ascending coefficients.
    pub fn simple_real(coeffs: &[f64]) -> Result<Self> {
        Ok(Self::single(ElementaryFactor::simple(
            Polynomial::from_real(coeffs),
        )?))
    }

    pub fn factors(&self) -> &[ElementaryFactor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Product of the factor degrees.
    pub fn degree(&self) -> usize {
        self.factors.iter().map(ElementaryFactor::degree).product()
    }

    /// Constant Jacobian determinant `∏ b_j δ_j`.
    pub fn jacobian_det(&self) -> Complex {
        self.factors
            .iter()
            .map(ElementaryFactor::jacobian_det)
            .fold(Complex::new(1.0, 0.0), |acc, d| acc * d)
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: &HenonChain) -> HenonChain {
        let mut factors = self.factors.clone();
        factors.extend(outer.factors.iter().cloned());
        HenonChain { factors }
    }

    /// `outer ∘ inner`.
    pub fn compose(outer: &HenonChain, inner: &HenonChain) -> HenonChain {
        inner.then(outer)
    }

    /// `self^n` for `n ≥ 1`.
    pub fn power(&self, n: usize) -> Result<HenonChain> {
        if n == 0 {
            return Err(Error::PreconditionViolated(
                "power must be at least 1".into(),
            ));
        }
        let mut factors = Vec::with_capacity(self.factors.len() * n);
        for _ in 0..n {
            factors.extend(self.factors.iter().cloned());
        }
        Ok(HenonChain { factors })
    }

    /// One application of `H`, no overflow check.
    pub fn forward(&self, z: Point2) -> Point2 {
        self.factors.iter().fold(z, |z, f| f.forward(z))
    }

    /// One application of `H⁻¹`, no overflow check.
    pub fn inverse(&self, z: Point2) -> Point2 {
        self.factors.iter().rev().fold(z, |z, f| f.inverse(z))
    }

    /// Single step in the given direction with the overflow sentinel checked
    /// after every factor.
    pub(crate) fn step_checked(&self, z: Point2, direction: Direction) -> Option<Point2> {
        let mut z = z;
        let apply = |z: Point2, f: &ElementaryFactor| f.eval(z, direction);
        match direction {
            Direction::Forward => {
                for f in &self.factors {
                    z = apply(z, f);
                    if overflowed(&z) {
                        return None;
                    }
                }
            }
            Direction::Inverse => {
                for f in self.factors.iter().rev() {
                    z = apply(z, f);
                    if overflowed(&z) {
                        return None;
                    }
                }
            }
        }
        Some(z)
    }

    /// `H^n(z)`; negative `n` iterates the inverse.
    pub fn iterate(&self, z: Point2, n: i64) -> std::result::Result<Point2, Escaped> {
        let direction = if n >= 0 {
            Direction::Forward
        } else {
            Direction::Inverse
        };
        let mut z = z;
        for step in 1..=n.unsigned_abs() as usize {
            match self.step_checked(z, direction) {
                Some(next) => z = next,
                None => return Err(Escaped { step, last: z }),
            }
        }
        Ok(z)
    }

    /// Symbolic expansion into a [`PolyMap2`], refusing degrees above `cap`.
    pub fn expand_with_cap(&self, cap: usize) -> Result<PolyMap2> {
        let degree = self.degree();
        if degree > cap {
            return Err(Error::ExpansionTooLarge { degree, cap });
        }
        let map = self
            .factors
            .iter()
            .fold(PolyMap2::identity(), |acc, f| f.apply_to(&acc));
        map.check_range()?;
        Ok(map)
    }

    pub fn expand(&self) -> Result<PolyMap2> {
        self.expand_with_cap(DEFAULT_EXPANSION_CAP)
    }

    /// `A_p⁻¹ ∘ H ∘ A_p` with `A_p(x, y) = (x + p.x, y + p.y)`.
    ///
    /// `A_p` is absorbed into the first factor and `A_p⁻¹` into the last one,
    /// so the result is again a chain of the same shape.
    pub fn conjugate_by_translation(&self, p: Point2) -> HenonChain {
        let mut factors = self.factors.clone();
        {
            // H_1 ∘ A_p = (b·y + (c + b·p2), p(y + p2) − δ·p1 − δ·x)
            let f = &mut factors[0];
            let shifted =
                f.p.compose(&Polynomial::linear(Complex::new(1.0, 0.0), p.y));
            f.c += f.b * p.y;
            f.p = shifted.add_constant(-f.delta * p.x);
        }
        {
            let f = factors.last_mut().expect("nonempty chain");
            f.c -= p.x;
            f.p = f.p.add_constant(-p.y);
        }
        HenonChain { factors }
    }
}

impl fmt::Display for HenonChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().rev().map(|h| h.to_string()).collect();
        write!(f, "{}", parts.join(" ∘ "))
    }
}

pub fn factor_eval(f: &ElementaryFactor, z: Point2, direction: Direction) -> Point2 {
    f.eval(z, direction)
}

pub fn chain_eval(h: &HenonChain, z: Point2, n: i64) -> std::result::Result<Point2, Escaped> {
    h.iterate(z, n)
}

pub fn chain_degree(h: &HenonChain) -> usize {
    h.degree()
}

pub fn chain_jacobian_det(h: &HenonChain) -> Complex {
    h.jacobian_det()
}

pub fn chain_expand(h: &HenonChain) -> Result<PolyMap2> {
    h.expand()
}

pub fn conjugate_by_translation(h: &HenonChain, p: Point2) -> HenonChain {
    h.conjugate_by_translation(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_chain, random_point};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn basic() -> HenonChain {
        HenonChain::simple_real(&[0.0, 0.0, 1.0]).unwrap()
    }

    #[test]
    fn factor_eval_examples() {
        let f = ElementaryFactor::simple(Polynomial::from_real(&[0.0, 0.0, 1.0])).unwrap();
        assert_eq!(f.forward(Point2::real(1.0, 2.0)), Point2::real(2.0, 3.0));
        assert_eq!(f.inverse(Point2::real(2.0, 3.0)), Point2::real(1.0, 2.0));

        let g = ElementaryFactor::new(
            c(2.0, 0.0),
            c(1.0, 0.0),
            c(0.0, 1.0),
            Polynomial::from_real(&[0.0, 0.0, 1.0]),
        )
        .unwrap();
        assert_eq!(g.forward(Point2::real(0.0, 1.0)), Point2::real(3.0, 1.0));
        assert_eq!(g.inverse(Point2::real(3.0, 1.0)), Point2::real(0.0, 1.0));
    }

    #[test]
    fn factor_validation() {
        let p = Polynomial::from_real(&[0.0, 0.0, 1.0]);
        let zero = c(0.0, 0.0);
        let one = c(1.0, 0.0);
        assert!(ElementaryFactor::new(zero, zero, one, p.clone()).is_err());
        assert!(ElementaryFactor::new(one, zero, zero, p).is_err());
        assert!(ElementaryFactor::new(one, zero, one, Polynomial::from_real(&[0.0, 1.0])).is_err());
        assert_eq!(HenonChain::new(vec![]), Err(Error::EmptyChain));
    }

    #[test]
    fn chain_eval_examples() {
        let h = basic();
        let z = Point2::real(0.0, 10.0);
        assert_eq!(h.iterate(z, 1).unwrap(), Point2::real(10.0, 100.0));
        assert_eq!(h.iterate(z, 0).unwrap(), z);
        assert_eq!(h.iterate(z, 2).unwrap(), Point2::real(100.0, 9990.0));
        assert_eq!(h.iterate(Point2::real(100.0, 9990.0), -2).unwrap(), z);
    }

    #[test]
    fn chain_eval_reports_escape() {
        let h = basic();
        let err = h.iterate(Point2::real(0.0, 10.0), 50).unwrap_err();
        // 10^(2^n) passes 1e150 during the 8th iteration.
        assert_eq!(err.step, 8);
        assert!(err.last.is_finite());
    }

    #[test]
    fn degree_and_jacobian() {
        let h = basic();
        assert_eq!(h.degree(), 2);
        assert_eq!(h.power(2).unwrap().degree(), 4);
        let f1 = ElementaryFactor::new(
            c(2.0, 0.0),
            c(0.0, 0.0),
            c(3.0, 0.0),
            Polynomial::from_real(&[0.0, 0.0, 1.0]),
        )
        .unwrap();
        let f2 = ElementaryFactor::new(
            c(1.0, 0.0),
            c(0.0, 0.0),
            c(0.0, 1.0),
            Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0]),
        )
        .unwrap();
        let chain = HenonChain::new(vec![f1, f2]).unwrap();
        assert_eq!(chain.degree(), 6);
        assert_eq!(chain.jacobian_det(), c(0.0, 6.0));
        assert_eq!(h.jacobian_det(), c(1.0, 0.0));
    }

    #[test]
    fn expansion_examples() {
        let h = basic();
        let x = BivariatePolynomial::x();
        let y = BivariatePolynomial::y();
        let first = &y.pow(2) - &x;
        assert_eq!(h.expand().unwrap(), PolyMap2::new(y.clone(), first.clone()));
        let second = &first.pow(2) - &y;
        assert_eq!(
            h.power(2)
                .unwrap()
                .expand()
                .unwrap()
                .residual(&PolyMap2::new(first, second)),
            0.0
        );
        assert!(matches!(
            h.power(7).unwrap().expand(),
            Err(Error::ExpansionTooLarge {
                degree: 128,
                cap: 64
            })
        ));
    }

    #[test]
    fn expansion_agrees_with_evaluation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let h = random_chain(&mut rng, 2);
            if h.degree() > DEFAULT_EXPANSION_CAP {
                continue;
            }
            let map = h.expand().unwrap();
            for _ in 0..10 {
                let z = random_point(&mut rng, 10.0);
                let (ex, ey) = map.eval(z.x, z.y);
                let direct = h.forward(z);
                let err = Point2::new(ex, ey).dist(&direct);
                assert!(err <= 1e-8 * direct.norm().max(1.0), "err {err} at {z}");
            }
        }
    }

    #[test]
    fn conjugation_by_translation() {
        let h = basic();
        assert_eq!(h.conjugate_by_translation(Point2::origin()), h);
        let g = h.conjugate_by_translation(Point2::real(2.0, 2.0));
        assert!(g.forward(Point2::origin()).norm() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let h = random_chain(&mut rng, 3);
            let p = random_point(&mut rng, 2.0);
            let g = h.conjugate_by_translation(p);
            for _ in 0..20 {
                let z = random_point(&mut rng, 1.0);
                let oracle = h.forward(z + p) - p;
                let got = g.forward(z);
                assert!(got.dist(&oracle) <= 1e-9 * oracle.norm().max(1.0));
            }
        }
    }

    #[test]
    fn display_reads_right_to_left() {
        let f1 = ElementaryFactor::simple(Polynomial::from_real(&[0.0, 0.0, 1.0])).unwrap();
        let f2 = ElementaryFactor::simple(Polynomial::from_real(&[0.0, 0.0, 0.0, 1.0])).unwrap();
        let chain = HenonChain::new(vec![f1, f2]).unwrap();
        assert_eq!(chain.to_string(), "(1*y, y^3 - 1*x) ∘ (1*y, y^2 - 1*x)");
    }
}
