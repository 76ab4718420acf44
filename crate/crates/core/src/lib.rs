//! Polynomial automorphisms of ℂ² built from Hénon factors: algebra,
//! normal forms, escape dynamics and the rigidity checks for commuting pairs.

pub mod dynamics;
pub mod error;
pub mod fixtures;
pub mod henon;
pub mod io;
pub mod normal_form;
pub mod poly;
pub mod random;
pub mod rigidity;

pub use dynamics::{
    filtration_radius, rasterize_grid, Dynamics, EscapeClass, FiltrationRadius, GreenEstimate,
    Grid, GridJob, GridMode, Sign, Slice,
};
pub use error::{Error, Result};
pub use henon::{Direction, ElementaryFactor, HenonChain, Point2};
pub use normal_form::{NormalChain, NormalFactor, TwistGroup};
pub use poly::{BivariatePolynomial, Complex, PolyMap2, Polynomial};
