//! Shintani double zeta functions over Q.

pub mod arith;
pub mod asym;
pub mod characters;
pub mod congruence;
pub mod double_zeta;
pub mod error;
pub mod lfun;
pub mod local_zeta;
pub mod poly;
pub mod scalar;
pub mod selftest;
pub mod special;

pub use error::{Error, Result};

pub type Real = f64;
pub type Complex = num_complex::Complex<f64>;
