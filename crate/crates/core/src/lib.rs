//! Imaginary characters of the rank-two free group under the extended
//! mapping class group action: the Markoff-type level surfaces, the directed
//! tree of superbases, Bowditch's descent classifier and a raster explorer.

pub mod character;
pub mod classify;
pub mod error;
pub mod farey;
pub mod raster;
pub mod scalar;
pub mod surface;
pub mod tree;

pub use character::{
    apply, apply_word, kappa, BoundaryKind, Color, ExceptionalKind, Generator, ImaginaryCharacter,
    MoveWord,
};
pub use error::{Error, Result};
pub use farey::{Fraction, Parity};
pub use scalar::{Scalar, TOLERANCE};
pub use surface::{SheetSelector, Window};
pub use classify::{bq_check, classify, Budget, Classification, EndEstimate};
pub use raster::{psi, render, Coloring, Image, RasterJob};
