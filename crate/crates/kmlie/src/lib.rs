//! Exact-arithmetic Kac-Moody algebras at finite truncation: Serre-presented
//! graded algebras, standard graded modules and their positive completions,
//! pro-summable exponential operators, the complete pro-unipotent group in
//! BCH log coordinates, and imaginary root algebras and groups with their
//! Magnus realization.
//!
//! Everything is computed over exact rationals; every identity the crate
//! asserts is an exact equality on an explicit truncation window.
//!
//! Entry points by topic:
//!
//! - [`cartan`]: generalized Cartan matrices, symmetrizers, type
//!   classification, realizations, the bilinear form.
//! - [`weyl`]: reflections, reduced words, real-root enumeration, coroots.
//! - [`freelie`]: Lyndon bases, Witt dimensions, the truncated Magnus
//!   algebra and group.
//! - [`liealg`]: the graded algebra `g(A)` up to a height cutoff, brackets,
//!   multiplicities, the Peterson oracle, and imaginary root-subalgebra
//!   layers.
//! - [`modules`]: grading functions, the adjoint and highest-weight
//!   modules over a degree window, truncated vectors.
//! - [`prosum`]: shift and smear operators, exponentials, ordered
//!   products, smear decomposition.
//! - [`groups`]: BCH products, ordered factorization, commutator root
//!   spans, Chevalley generator words, complete root groups and the Magnus
//!   embedding.
//! - [`cli`]: the `km` command-line front end.
//!
//! The `examples/` directory has one runnable walkthrough per capability;
//! `cargo run --example root_multiplicities` is a good place to start.

pub mod cartan;
pub mod cli;
pub mod error;
pub mod freelie;
pub mod groups;
pub mod liealg;
pub mod modules;
pub mod prosum;
pub mod qlinalg;
pub mod ratio;
pub mod verify;
pub mod weyl;

pub use error::{KmError, Result};
pub use ratio::Rat;
