//! Convolution algebras over finite lower sets of semigroupoids.
//!
//! A semigroupoid here is a set with a partial, associative multiplication in
//! which every element has unique left/right idempotent units, no inverses,
//! and finite factorization data. Working over a finite, factorization-closed
//! ("lower") subset `F`, functions `F -> C` form a unital algebra under the
//! convolution products
//!
//! ```text
//! (f ⋆ g)(a)  = Σ_{rs=a} f(r)·g(s)
//! (f ⋆̂ g)(a) = Σ_{rs=a} f(s)·g(r)
//! ```
//!
//! and matrices indexed by `F` carry the analogous products. On top of that
//! layer this crate builds:
//!
//! * Toeplitz representations `𝔗(φ)` with `𝔗(φ)f = φ ⋆ f` ([`algebra`]),
//! * ⋆-inverses of functions and matrices by stratified recursion ([`algebra`]),
//! * admissible families of test functions and the positive-kernel classes
//!   they induce ([`kernels`]),
//! * a semidefinite feasibility solver deciding membership of `[1] − f f*` in
//!   the cone spanned by `Γ ⋆̂ ([1] − K_ψ)` terms, with primal and dual
//!   certificates ([`solver`]),
//! * unitary-colligation transfer-function realizations of feasible
//!   interpolants ([`realization`]).
//!
//! The crate is `no_std`-compatible (requires `alloc`); all floating-point
//! intrinsics are routed through `libm` so results are identical with and
//! without `std`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod algebra;
pub mod families;
pub mod kernels;
pub mod linalg;
pub mod realization;
pub mod semigroupoid;
pub mod solver;

pub use algebra::{Func, Mat, StarVariant};
pub use kernels::{Kernel, TestFamily, TestFunction};
pub use linalg::{CMat, C64};
pub use realization::{Colligation, FactoredGamma};
pub use semigroupoid::{FiniteLowerSet, OrderKind, Product, Stratification};
pub use solver::{DualCertificate, GammaCertificate, SolveOptions, Verdict};
