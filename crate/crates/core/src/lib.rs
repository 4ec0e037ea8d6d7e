//! Three-flavor Morse–Floer homology over F2 for finite models, with
//! duality, exact triangles, spectral flow, module structures and
//! cobordism grading arithmetic.

pub mod bott;
pub mod cobordism;
pub mod complex;
pub mod error;
pub mod exec;
pub mod flow;
pub mod gf2;
pub mod grading;
pub mod models;
pub mod schema;
pub mod modules;
pub mod spectral;

pub use error::{Error, Result};
pub use exec::Exec;
