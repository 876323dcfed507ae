pub mod applications;
pub mod diagnostics;
pub mod elcore;
pub mod error;
pub mod estimating;
pub mod io;
pub mod mcele;
pub mod modelselect;
pub mod priors;
pub mod sampler;

pub use error::{Error, Result};
