//! Coefficient-level arithmetic for univariate and bivariate complex
//! polynomials, and for polynomial self-maps of the plane.
//!
//! Everything is double precision. After each arithmetic operation the result
//! is put in canonical form: coefficients whose magnitude is at most
//! [`TRIM_RELATIVE`] times the largest coefficient are dropped. Composition
//! produces cancellation dust, and without trimming the term supports of two
//! equal maps would not match.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type Complex = Complex64;

/// Relative threshold below which a coefficient counts as zero.
pub const TRIM_RELATIVE: f64 = 1e-13;

/// Coefficients larger than this are reported as [`Error::CoefficientOverflow`].
pub const COEFFICIENT_LIMIT: f64 = 1e300;

/// Default absolute tolerance for coefficient comparisons.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

pub(crate) fn check_finite(c: Complex, what: &str) -> Result<()> {
    if c.re.is_finite() && c.im.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(format!("{what} = {c}")))
    }
}

/// Dense univariate polynomial, `coeffs[k]` is the coefficient of `y^k`.
///
/// The zero polynomial has no stored coefficients; otherwise the last stored
/// coefficient is nonzero.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<Complex>,
}

impl Polynomial {
    /// Builds a polynomial from ascending coefficients, rejecting NaN and infinity.
    pub fn new(coeffs: Vec<Complex>) -> Result<Self> {
        for (k, c) in coeffs.iter().enumerate() {
            check_finite(*c, &format!("coefficient of y^{k}"))?;
        }
        Ok(Self::from_raw(coeffs))
    }

    /// Convenience constructor from real coefficients.
    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::from_raw(coeffs.iter().map(|&r| Complex::new(r, 0.0)).collect())
    }

    pub(crate) fn from_raw(mut coeffs: Vec<Complex>) -> Self {
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Self { coeffs };
        }
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Self::zero();
        }
        let cut = TRIM_RELATIVE * scale;
        for c in coeffs.iter_mut() {
            if c.norm() <= cut {
                *c = Complex::new(0.0, 0.0);
            }
        }
        while coeffs.last().is_some_and(|c| *c == Complex::new(0.0, 0.0)) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: Complex) -> Self {
        Self::from_raw(vec![c])
    }

    /// `c * y^k`
    pub fn monomial(c: Complex, k: usize) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0); k + 1];
        coeffs[k] = c;
        Self::from_raw(coeffs)
    }

    /// The polynomial `y`.
    pub fn identity() -> Self {
        Self::monomial(Complex::new(1.0, 0.0), 1)
    }

    /// `a*y + b`
    pub fn linear(a: Complex, b: Complex) -> Self {
        Self::from_raw(vec![b, a])
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Index of the last stored coefficient; 0 for constants and for the zero polynomial.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn leading(&self) -> Complex {
        self.coeffs.last().copied().unwrap_or_default()
    }

    /// Indices of the nonzero coefficients, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex::new(0.0, 0.0))
            .map(|(k, _)| k)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Horner evaluation.
    pub fn eval(&self, y: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, &c| acc * y + c)
    }

    /// Evaluation that reports a non-finite result as overflow.
    pub fn checked_eval(&self, y: Complex) -> Result<Complex> {
        let v = self.eval(y);
        if v.re.is_finite() && v.im.is_finite() {
            Ok(v)
        } else {
            Err(Error::CoefficientOverflow {
                magnitude: f64::INFINITY,
            })
        }
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::from_raw(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn add_constant(&self, c: Complex) -> Self {
        let mut coeffs = self.coeffs.clone();
        if coeffs.is_empty() {
            coeffs.push(c);
        } else {
            coeffs[0] += c;
        }
        Self::from_raw(coeffs)
    }

    pub fn derivative(&self) -> Self {
        Self::from_raw(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| c * k as f64)
                .collect(),
        )
    }

    /// `self(inner(y))`, by Horner's scheme over polynomials.
    pub fn compose(&self, inner: &Polynomial) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Polynomial::zero(), |acc, &c| (&acc * inner).add_constant(c))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(Complex, Complex) -> Complex) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_raw((0..n).map(|k| f(self.coeff(k), other.coeff(k))).collect())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(Complex::new(-1.0, 0.0))
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![Complex::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::from_raw(out)
    }
}

fn fmt_real(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) || !a.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn fmt_complex(c: Complex) -> String {
    if c.im == 0.0 {
        fmt_real(c.re)
    } else if c.re == 0.0 {
        format!("{}i", fmt_real(c.im))
    } else {
        let sign = if c.im.is_sign_negative() { "-" } else { "+" };
        format!("({}{sign}{}i)", fmt_real(c.re), fmt_real(c.im.abs()))
    }
}

fn fmt_monomial(c: Complex, powers: &[(&str, usize)]) -> String {
    let vars: Vec<String> = powers
        .iter()
        .filter(|(_, e)| *e > 0)
        .map(|(v, e)| {
            if *e == 1 {
                v.to_string()
            } else {
                format!("{v}^{e}")
            }
        })
        .collect();
    if vars.is_empty() {
        fmt_complex(c)
    } else if c == Complex::new(1.0, 0.0) {
        vars.join("*")
    } else {
        format!("{}*{}", fmt_complex(c), vars.join("*"))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .support()
            .collect::<Vec<_>>()
            .into_iter()
            .rev()
            .map(|k| fmt_monomial(self.coeffs[k], &[("y", k)]))
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// Exponent pair `(i, j)` of the monomial `x^i y^j`.
pub type Exponent = (u32, u32);

/// Sparse bivariate polynomial keyed by exponent pairs.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct BivariatePolynomial {
    terms: BTreeMap<Exponent, Complex>,
}

impl BivariatePolynomial {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Complex) -> Self {
        Self::from_raw(BTreeMap::from([((0, 0), c)]))
    }

    pub fn x() -> Self {
        Self::from_raw(BTreeMap::from([((1, 0), Complex::new(1.0, 0.0))]))
    }

    pub fn y() -> Self {
        Self::from_raw(BTreeMap::from([((0, 1), Complex::new(1.0, 0.0))]))
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Exponent, Complex)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (e, c) in terms {
            check_finite(c, &format!("coefficient of x^{} y^{}", e.0, e.1))?;
            *map.entry(e).or_insert(Complex::new(0.0, 0.0)) += c;
        }
        Ok(Self::from_raw(map))
    }

    /// Embeds `p(y)`.
    pub fn from_univariate_y(p: &Polynomial) -> Self {
        Self::from_raw(
            p.coeffs()
                .iter()
                .enumerate()
                .map(|(k, &c)| ((0, k as u32), c))
                .collect(),
        )
    }

    fn from_raw(mut terms: BTreeMap<Exponent, Complex>) -> Self {
        if terms.values().any(|c| !c.is_finite()) {
            return Self { terms };
        }
        let scale = terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let cut = TRIM_RELATIVE * scale;
        terms.retain(|_, c| c.norm() > cut && *c != Complex::new(0.0, 0.0));
        Self { terms }
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponent, Complex)> + '_ {
        self.terms.iter().map(|(e, c)| (*e, *c))
    }

    pub fn term(&self, e: Exponent) -> Complex {
        self.terms.get(&e).copied().unwrap_or_default()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> usize {
        self.terms
            .keys()
            .map(|(i, j)| (i + j) as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn eval(&self, x: Complex, y: Complex) -> Complex {
        // Horner in y for each power of x, then Horner in x.
        let max_i = self.terms.keys().map(|e| e.0).max().unwrap_or(0) as usize;
        let mut rows: Vec<BTreeMap<u32, Complex>> = vec![BTreeMap::new(); max_i + 1];
        for (&(i, j), &c) in &self.terms {
            rows[i as usize].insert(j, c);
        }
        let row_value = |row: &BTreeMap<u32, Complex>| -> Complex {
            let max_j = row.keys().last().copied().unwrap_or(0);
            (0..=max_j).rev().fold(Complex::new(0.0, 0.0), |acc, j| {
                acc * y + row.get(&j).copied().unwrap_or_default()
            })
        };
        rows.iter()
            .rev()
            .fold(Complex::new(0.0, 0.0), |acc, row| acc * x + row_value(row))
    }

    pub fn scale(&self, s: Complex) -> Self {
        Self::from_raw(self.terms.iter().map(|(e, c)| (*e, c * s)).collect())
    }

    pub fn add_constant(&self, c: Complex) -> Self {
        let mut terms = self.terms.clone();
        *terms.entry((0, 0)).or_insert(Complex::new(0.0, 0.0)) += c;
        Self::from_raw(terms)
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut result = Self::constant(Complex::new(1.0, 0.0));
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// `self(p, q)`: substitutes `x := p`, `y := q`.
    pub fn substitute(&self, p: &Self, q: &Self) -> Self {
        let max_i = self.terms.keys().map(|e| e.0).max().unwrap_or(0);
        let max_j = self.terms.keys().map(|e| e.1).max().unwrap_or(0);
        let powers = |base: &Self, n: u32| {
            let mut out = vec![Self::constant(Complex::new(1.0, 0.0))];
            for k in 1..=n as usize {
                let next = &out[k - 1] * base;
                out.push(next);
            }
            out
        };
        let p_pow = powers(p, max_i);
        let q_pow = powers(q, max_j);
        let mut acc: BTreeMap<Exponent, Complex> = BTreeMap::new();
        for (&(i, j), &c) in &self.terms {
            let prod = &p_pow[i as usize] * &q_pow[j as usize];
            for (e, v) in prod.terms {
                *acc.entry(e).or_insert(Complex::new(0.0, 0.0)) += c * v;
            }
        }
        Self::from_raw(acc)
    }

    /// Horner substitution of this polynomial into a univariate one: `p(self)`.
    pub fn apply_univariate(&self, p: &Polynomial) -> Self {
        p.coeffs()
            .iter()
            .rev()
            .fold(Self::zero(), |acc, &c| (&acc * self).add_constant(c))
    }

    fn check_range(&self) -> Result<()> {
        for c in self.terms.values() {
            let m = c.norm();
            if !m.is_finite() || m > COEFFICIENT_LIMIT {
                return Err(Error::CoefficientOverflow { magnitude: m });
            }
        }
        Ok(())
    }

    fn merge(&self, other: &Self, sign: f64) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            *terms.entry(*e).or_insert(Complex::new(0.0, 0.0)) += c * sign;
        }
        Self::from_raw(terms)
    }

    /// Largest absolute coefficient difference over the union of both supports.
    pub fn max_coeff_diff(&self, other: &Self) -> f64 {
        let mut residual: f64 = 0.0;
        for (e, c) in &self.terms {
            residual = residual.max((c - other.term(*e)).norm());
        }
        for (e, c) in &other.terms {
            if !self.terms.contains_key(e) {
                residual = residual.max(c.norm());
            }
        }
        residual
    }
}

impl Add for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn add(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        self.merge(rhs, 1.0)
    }
}

impl Sub for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn sub(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        self.merge(rhs, -1.0)
    }
}

impl Mul for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn mul(self, rhs: &BivariatePolynomial) -> BivariatePolynomial {
        let mut terms: BTreeMap<Exponent, Complex> = BTreeMap::new();
        for (&(i1, j1), a) in &self.terms {
            for (&(i2, j2), b) in &rhs.terms {
                *terms
                    .entry((i1 + i2, j1 + j2))
                    .or_insert(Complex::new(0.0, 0.0)) += a * b;
            }
        }
        BivariatePolynomial::from_raw(terms)
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0");
        }
        // Highest total degree first.
        let mut keys: Vec<_> = self.terms.keys().copied().collect();
        keys.sort_by_key(|e| std::cmp::Reverse((e.0 + e.1, e.1)));
        let parts: Vec<String> = keys
            .iter()
            .map(|&(i, j)| {
                fmt_monomial(self.terms[&(i, j)], &[("x", i as usize), ("y", j as usize)])
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// A polynomial self-map `(x, y) ↦ (first(x, y), second(x, y))`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyMap2 {
    pub first: BivariatePolynomial,
    pub second: BivariatePolynomial,
}

impl PolyMap2 {
    pub fn new(first: BivariatePolynomial, second: BivariatePolynomial) -> Self {
        Self { first, second }
    }

    pub fn identity() -> Self {
        Self::new(BivariatePolynomial::x(), BivariatePolynomial::y())
    }

    /// The twist `(x, y) ↦ (ηx, η⁻¹y)`.
    pub fn twist(eta: Complex) -> Self {
        Self::new(
            BivariatePolynomial::x().scale(eta),
            BivariatePolynomial::y().scale(eta.inv()),
        )
    }

    /// `(x, y) ↦ (x + p1, y + p2)`.
    pub fn translation(p1: Complex, p2: Complex) -> Self {
        Self::new(
            BivariatePolynomial::x().add_constant(p1),
            BivariatePolynomial::y().add_constant(p2),
        )
    }

    pub fn eval(&self, x: Complex, y: Complex) -> (Complex, Complex) {
        (self.first.eval(x, y), self.second.eval(x, y))
    }

    pub fn total_degree(&self) -> usize {
        self.first.total_degree().max(self.second.total_degree())
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &PolyMap2) -> Result<PolyMap2> {
        let out = PolyMap2::new(
            self.first.substitute(&inner.first, &inner.second),
            self.second.substitute(&inner.first, &inner.second),
        );
        out.first.check_range()?;
        out.second.check_range()?;
        Ok(out)
    }

    pub(crate) fn check_range(&self) -> Result<()> {
        self.first.check_range()?;
        self.second.check_range()
    }

    /// Largest coefficient difference over both coordinates.
    pub fn residual(&self, other: &PolyMap2) -> f64 {
        self.first
            .max_coeff_diff(&other.first)
            .max(self.second.max_coeff_diff(&other.second))
    }

    /// `(residual <= tol, residual)`.
    pub fn equal_within(&self, other: &PolyMap2, tol: f64) -> (bool, f64) {
        let r = self.residual(other);
        (r <= tol, r)
    }
}

/// `outer ∘ inner`.
pub fn poly_eval(p: &Polynomial, y: Complex) -> Complex {
    p.eval(y)
}

pub fn poly_mul(a: &Polynomial, b: &Polynomial) -> Polynomial {
    a * b
}

pub fn poly_compose(outer: &Polynomial, inner: &Polynomial) -> Polynomial {
    outer.compose(inner)
}

pub fn map_compose(outer: &PolyMap2, inner: &PolyMap2) -> Result<PolyMap2> {
    outer.compose(inner)
}

pub fn map_equal_within(a: &PolyMap2, b: &PolyMap2, tol: f64) -> (bool, f64) {
    a.equal_within(b, tol)
}

impl fmt::Display for PolyMap2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}
