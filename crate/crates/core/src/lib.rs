//! Frame (quasi-probability) representations of finite-dimensional quantum theory.
//!
//! The numerical core is generic over [`Real`] (`f32` or `f64`); the `*64`
//! aliases at the crate root fix the scalar to `f64`.

// `!(x > 0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod catalog;
pub mod error;
pub mod finitefield;
pub mod frames;
pub mod io;
pub mod linalg;
pub mod opspace;
pub mod repr;
pub mod sampling;
pub mod scalar;

pub use error::{Error, Result};
pub use frames::{DualPair, Frame, Label, OnticSpace};
pub use opspace::{Operator, Povm, Tolerance};
pub use scalar::{Real, C};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Operator64 = opspace::Operator<f64>;
pub type Operator32 = opspace::Operator<f32>;
pub type Frame64 = frames::Frame<f64>;
pub type Frame32 = frames::Frame<f32>;
pub type DualPair64 = frames::DualPair<f64>;
pub type DualPair32 = frames::DualPair<f32>;
pub type QuasiDistribution64 = repr::QuasiDistribution<f64>;
pub type ChannelMatrix64 = repr::ChannelMatrix<f64>;
pub type Channel64 = repr::Channel<f64>;
pub type StarAlgebra64 = repr::StarAlgebra<f64>;
pub type Fiducial64 = catalog::Fiducial<f64>;
pub type CMatrix64 = linalg::CMatrix<f64>;
