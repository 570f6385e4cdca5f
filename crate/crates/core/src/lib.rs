//! Numerical laboratory for singular integrals on intrinsic Lipschitz graphs,
//! tame maps and Lipschitz flags in the first Heisenberg group.

pub mod beta;
pub mod bump;
pub mod corona;
pub mod error;
pub mod fixtures;
pub mod flag;
pub mod fourier;
pub mod heis;
pub mod ilg;
pub mod kernel1d;
pub mod kernels;
pub mod quad;
pub mod sampled;
pub mod sio;
pub mod special;
pub mod tame;

pub use error::{Error, Result};
pub use heis::{HPoint, HorizontalSubgroup, NormKind, Target};
pub use kernels::{KernelSpec, SkReport};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
