//! Regularity classification, spectra and root-function completeness diagnostics for
//! first-order `n x n` systems `-i B y' + Q(x) y = λ y` on `[0,1]` with two-point
//! boundary conditions `C y(0) + D y(1) = 0`.

pub mod error;
pub mod evolve;
pub mod grid;
pub mod model;
pub mod numcore;
pub mod presets;
pub mod regularity;
pub mod rootspace;
pub mod spectrum;

pub use error::{Error, ErrorKind, Result};
