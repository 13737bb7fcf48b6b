#![no_std]

extern crate alloc;

pub mod algebra;
pub mod error;
pub mod numopt;
pub mod reduce_box;
pub mod reduce_tensor;
pub mod symtensor;

pub use algebra::{Monomial, Polynomial, QuadraticForm, Rational};
pub use error::{Error, Result};
