//! Infinitary words over involutive alphabets, cancellation, and two
//! realizations of the resulting big free groups: one inside the symmetric
//! group of the integers, one inside the automorphism group of a free group
//! of countable rank. A refined Nielsen reduction for finite free groups
//! drives the automorphism-side decompositions, and finite presentations of
//! the classical automorphism groups (and stabilizer subgroups) are emitted
//! and verified semantically.

pub mod aut;
pub mod cancel;
pub mod dsl;
pub mod error;
pub mod freegroup;
pub mod letters;
pub mod presentations;
pub mod sym;
pub mod word;

pub use error::{Error, Result};
