//! Exact laboratory for signed hyperbolic Haar sums on [0,1)^d.
//!
//! The library synthesizes sums H = Σ_r f_r of ±1-signed Haar r-functions
//! over all shapes of a fixed scale budget, builds the Riesz-product test
//! function Ψ = Π_t (1 + ρ̃ F_t) over first-coordinate blocks, verifies its
//! algebraic identities in exact rational arithmetic, turns ⟨H,Ψ⟩/‖Ψ‖₁ into
//! certified L∞ lower bounds, and searches sign assignments for small ‖H‖∞.

pub mod dyadic;
pub mod error;
pub mod exact;
pub mod grid;
pub mod report;
pub mod riesz;
pub mod rng;
pub mod search;
pub mod signs;

pub use error::{Error, Result};
