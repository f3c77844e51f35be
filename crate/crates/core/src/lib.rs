//! Left-right Cayley complexes, the square Tanner codes they carry, and the
//! local tester and decoder for those codes.

extern crate openblas_src;

pub mod gf2;
pub mod codes;
pub mod complex;
pub mod decoder;
pub mod generators;
pub mod groups;
pub mod ltc;
pub mod planner;
pub mod spectral;
