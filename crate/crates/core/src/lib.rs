//! Desk-scale laboratory for the elliptic-regular part of the stable trace
//! formula.
//!
//! The crate is organized bottom-up:
//!
//! - [`exactalg`]: exact Laurent polynomials and logarithmic derivations;
//! - [`rootdata`] and [`steinberg`]: root data of `A1`/`A2`, the
//!   Steinberg–Hitchin base and the Jacobian/discriminant identity;
//! - [`localfield`]: finite-precision `p`-adic numbers, torus classes and
//!   local `L`-factors for `SL(2)`;
//! - [`orbital`]: exact fiber counting over `ℤ/pᴺ` and the local densities
//!   `θ_p(b; s)`, their integrals and the dominant-term products;
//! - [`adelic`]: rational adeles, the standard character, truncation lemmas
//!   and a truncated Poisson summation;
//! - [`ffl`]: Dirichlet characters over `𝔽_p[t]`, divisor sums, Euler products
//!   and `L`-polynomials;
//! - [`suite`]: the verification suite behind `tracelab verify-all`.

pub mod adelic;
pub mod exactalg;
pub mod ffl;
pub mod localfield;
pub mod oracle;
pub mod orbital;
pub mod primes;
pub mod records;
pub mod rootdata;
pub mod steinberg;
pub mod suite;

pub use exactalg::{jacobian_log_det, AlgebraError, EvalRing, LaurentPoly, ZMod};
pub use localfield::{LocalLFactor, PAdicApprox, TorusClass};
pub use rootdata::{CartanType, RootSystem};
