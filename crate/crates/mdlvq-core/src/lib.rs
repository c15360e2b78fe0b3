//! Core algorithms for n-channel asymmetric multiple-description lattice
//! vector quantization by index assignment.
//!
//! The crate is `no_std` + `alloc`: everything here is pure computation over
//! immutable inputs. IO, file formats and the CLI live in the companion
//! `mdlvq` crate. Monte-Carlo entry points are chunked so a std driver can
//! fan chunks out across threads and merge them in index order; results are
//! bit-identical for any worker count.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod analysis;
pub mod assign;
pub mod codec;
pub mod labeling;
pub mod lattice;
pub mod mc;
pub mod nested;
pub mod rng;
pub mod sim;
pub mod verify;
pub mod weights;

mod intmath;
mod vecmath;

pub use lattice::{LatticeName, LatticePoint, LatticeSpec};
pub use nested::{NestedSystem, ProductRule, SimilarityKind, SublatticeSpec};
pub use weights::WeightProfile;
