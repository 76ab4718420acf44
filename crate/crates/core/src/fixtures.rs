//! Reference maps used by tests, the CLI `verify` command and the bindings.

use std::f64::consts::TAU;

use crate::henon::{ElementaryFactor, HenonChain};
use crate::poly::{Complex, Polynomial};

/// `(x, y) ↦ (y, y² − x)`.
pub fn basic_map() -> HenonChain {
    HenonChain::simple_real(&[0.0, 0.0, 1.0]).expect("valid")
}

/// Primitive cube root of unity `e^{2πi/3}`.
pub fn omega() -> Complex {
    Complex::from_polar(1.0, TAU / 3.0)
}

/// `C_ω ∘ basic_map() = (ωy, ω²y² − ω²x)`.
pub fn twisted_basic_map() -> HenonChain {
    let w = omega();
    let w2 = w * w;
    let zero = Complex::new(0.0, 0.0);
    let p = Polynomial::new(vec![zero, zero, w2]).expect("finite");
    HenonChain::single(ElementaryFactor::new(w, zero, w2, p).expect("valid"))
}

/// Degree 2, 3 and 4 maps with assorted coefficients.
pub fn domination_suite() -> Vec<HenonChain> {
    let c = Complex::new;
    vec![
        basic_map(),
        HenonChain::single(
            ElementaryFactor::new(
                c(0.8, 0.3),
                c(0.2, -0.1),
                c(1.5, 0.0),
                Polynomial::new(vec![c(0.3, 0.2), c(-0.5, 0.0), c(0.0, 0.4), c(0.9, -0.2)])
                    .expect("finite"),
            )
            .expect("valid"),
        ),
        HenonChain::simple_real(&[0.5, 0.0, -1.0])
            .expect("valid")
            .then(&HenonChain::simple_real(&[0.0, 1.0, 2.0]).expect("valid")),
    ]
}
