//! Period matrices of plane algebraic curves and numerical recovery of
//! homomorphisms, endomorphism rings and automorphism groups of their Jacobians.

pub mod curve;
pub mod numerics;
pub mod skeleton;
pub mod continuation;
pub mod homology;
pub mod differentials;
pub mod periods;
pub mod pipeline;
pub mod cli;
pub mod lattice;
pub mod abelian;
