//! Finite-level objects: representations of products of Galois groups of
//! finite fields on finite Z/p^m-modules, étale φ-modules over tensor
//! products of Witt vectors, and the equivalence between them.

pub mod algebra;
pub mod base;
pub mod corpus;
pub mod descent;

pub use algebra::{representing_algebra, RepresentingAlgebra};
pub use corpus::{FiniteDoc, FiniteFixture, FiniteKind, FiniteObject};
pub use base::{Extension, FiniteBase};
pub use descent::{
    functor_d, functor_v, koszul_oracle, phi_cohomology, phi_complex, phi_isomorphism, rep_isomorphism,
    roundtrip_check, roundtrip_check_d, GaloisRepFin, PhiModFin,
};
