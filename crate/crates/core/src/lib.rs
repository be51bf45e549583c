pub mod causality;
pub mod cli;
pub mod error;
pub mod expr;
pub mod geodesics;
pub mod harmonic;
pub mod normalize;
pub mod quad;
pub mod tensor;

pub use error::{Error, ExprError, Result};
pub use expr::{parse, Expression};
