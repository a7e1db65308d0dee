//! Structural VARMA models parametrised through the Wiener-Hopf factorisation
//! of the moving-average polynomial matrix.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
// Float methods are inherent once the test harness links std.
#![cfg_attr(test, allow(unused_imports))]

extern crate alloc;

pub mod error;
pub mod estimate;
pub mod filtering;
pub mod likelihood;
pub mod mat;
pub mod model;
pub mod optim;
pub mod poly;
pub mod polymat;
pub mod roots;
pub mod densities;
pub mod scalar;
pub mod select;
pub mod special;
pub mod whf;

pub use error::{Error, Result};
pub use mat::Mat;
pub use poly::Poly;
pub use polymat::{DetPoly, LaurentMat, PolyMat};
pub use scalar::{Rational, Scalar};
