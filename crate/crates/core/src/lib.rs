//! Finite-stage laboratory for p-metric mean dimension.
//!
//! The crate builds finite pseudometric dynamical systems, sofic approximations
//! and the approximate-orbit map spaces `Map(ρ, F, δ, σ)`, counts separated and
//! spanning sets in them exactly (or bounds them), and checks the counting
//! inequalities relating `ρ_p` and `ρ_∞`, product systems and Følner-derived
//! sofic approximations on exhaustive and seeded random instances.
//!
//! Module map:
//!
//! - [`metricspace`]: pseudometric spaces and the separated / spanning / mesh-cover solvers.
//! - [`groups`]: group models, Følner sets and sofic approximations.
//! - [`dynsys`]: finite systems, generators, orbit pseudometrics and orbit maps.
//! - [`mapspace`]: `ρ_p` on tuples, membership, enumeration, sampling and stage series.
//! - [`theorems`]: verification reports for the counting inequalities.
//! - [`runner`]: config-driven experiment runner behind the `mdimlab` binary.

pub mod dynsys;
pub mod error;
pub mod groups;
pub mod mapspace;
pub mod metricspace;
pub mod norm;
pub mod runner;
pub mod theorems;

pub use error::{Error, Result};
pub use norm::PExponent;
