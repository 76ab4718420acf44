//! Seeded generators for random chains and sample points.
//!
//! Chains draw `|b|, |δ| ∈ [0.5, 2]` with a uniform phase, lower coefficients
//! and `c` in the unit disk, leading coefficient modulus in `[0.5, 1]`, and
//! factor degrees in `{2, 3}`. This keeps filtration radii and expansion
//! sizes small.

use std::f64::consts::TAU;

use rand::Rng;

use crate::henon::{ElementaryFactor, HenonChain, Point2};
use crate::poly::{Complex, Polynomial};

pub fn unit_disk<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    disk(rng, 1.0)
}

/// Uniform in the closed disk of the given radius.
pub fn disk<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Complex {
    let r = radius * rng.gen::<f64>().sqrt();
    Complex::from_polar(r, TAU * rng.gen::<f64>())
}

pub fn annulus<R: Rng + ?Sized>(rng: &mut R, inner: f64, outer: f64) -> Complex {
    let r = rng.gen_range(inner..=outer);
    Complex::from_polar(r, TAU * rng.gen::<f64>())
}

fn modulus_range<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> Complex {
    Complex::from_polar(rng.gen_range(lo..=hi), TAU * rng.gen::<f64>())
}

pub fn random_polynomial<R: Rng + ?Sized>(rng: &mut R, degree: usize) -> Polynomial {
    let mut coeffs: Vec<Complex> = (0..degree).map(|_| unit_disk(rng)).collect();
    coeffs.push(modulus_range(rng, 0.5, 1.0));
    Polynomial::new(coeffs).expect("finite coefficients")
}

pub fn random_factor<R: Rng + ?Sized>(rng: &mut R) -> ElementaryFactor {
    let degree = rng.gen_range(2..=3);
    let p = random_polynomial(rng, degree);
    ElementaryFactor::new(
        modulus_range(rng, 0.5, 2.0),
        unit_disk(rng),
        modulus_range(rng, 0.5, 2.0),
        p,
    )
    .expect("valid random factor")
}

/// Chain with `1..=max_factors` factors.
pub fn random_chain<R: Rng + ?Sized>(rng: &mut R, max_factors: usize) -> HenonChain {
    let m = rng.gen_range(1..=max_factors.max(1));
    HenonChain::new((0..m).map(|_| random_factor(rng)).collect()).expect("nonempty")
}

/// Chain with exactly `m` factors, all with `c = 0`.
pub fn random_b_only_chain<R: Rng + ?Sized>(rng: &mut R, m: usize) -> HenonChain {
    let factors = (0..m)
        .map(|_| {
            let f = random_factor(rng);
            ElementaryFactor::new(f.b(), Complex::new(0.0, 0.0), f.delta(), f.p().clone())
                .expect("valid")
        })
        .collect();
    HenonChain::new(factors).expect("nonempty")
}

/// Random chain adjusted in its last factor so that `H(0) = 0`.
pub fn random_origin_fixing_chain<R: Rng + ?Sized>(rng: &mut R, max_factors: usize) -> HenonChain {
    let h = random_chain(rng, max_factors);
    let image = h.forward(Point2::origin());
    let mut factors = h.factors().to_vec();
    let last = factors.pop().expect("nonempty");
    factors.push(
        ElementaryFactor::new(
            last.b(),
            last.c() - image.x,
            last.delta(),
            last.p().add_constant(-image.y),
        )
        .expect("valid"),
    );
    HenonChain::new(factors).expect("nonempty")
}

/// Uniform in each coordinate disk of radius `radius / √2`, so `‖z‖ ≤ radius`.
pub fn random_point<R: Rng + ?Sized>(rng: &mut R, radius: f64) -> Point2 {
    let r = radius / std::f64::consts::SQRT_2;
    Point2::new(disk(rng, r), disk(rng, r))
}

pub fn random_real_point<R: Rng + ?Sized>(rng: &mut R, half_width: f64) -> Point2 {
    Point2::real(
        rng.gen_range(-half_width..=half_width),
        rng.gen_range(-half_width..=half_width),
    )
}
