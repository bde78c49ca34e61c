//! Non-commutative leapfrog map laboratory.
//!
//! The crate implements the map and its verification surface over concrete
//! matrix-algebra models of a skew field: quasi-determinant linear algebra,
//! quasi-Pluecker coordinates and non-commutative cross-ratios, the leapfrog
//! map in three equivalent charts with Lax and y-system checks, Laurent
//! bi-orthogonal polynomials with discrete and semi-discrete relativistic
//! Toda flows, and the double-bracket calculus of a weighted network on a
//! cylinder with its conserved quantities.

pub mod algebra;
pub mod biortho;
pub mod cli;
pub mod leapfrog;
pub mod ncnet;
pub mod projective;
pub mod quasidet;
