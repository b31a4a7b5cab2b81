pub mod checks;
pub mod error;
pub mod field;
pub mod fields;
pub mod geometry;
pub mod gridlab;
pub mod harnack;
pub mod jet;
pub mod residual;
pub mod rng;
pub mod solitons;
pub mod tensor;
pub mod trig;

pub use error::{Error, Result};
pub use field::Field;
pub use geometry::CurvaturePack;
pub use jet::{Jet, JetSpace, Precision, VarRole};
pub use residual::Residual;
pub use solitons::{catalog_get, Frame, SolitonClass, SolitonSpec};
pub use tensor::{Tensor, Variance};
