//! Two-dimensional nonseparable discrete linear canonical transforms.
//!
//! The crate is organized bottom-up:
//!
//! * [`symplectic`]: ABCD-matrix algebra and the factorizations into chirp stages.
//! * [`grid`]: sampled complex fields on centered square grids, test signals, file formats.
//! * [`kernels`]: the primitive discrete operators (chirp multiplication, DFTs,
//!   chirp convolution, bilinear affine maps, fractional Fourier transform).
//! * [`transforms`]: complete transforms assembled from plans, and a direct-summation oracle.
//! * [`metrics`]: NMSE and PSNR.
//! * [`optics`]: GRIN-medium systems and dense operator analysis.

pub mod error;
pub mod grid;
pub mod kernels;
pub mod metrics;
pub mod optics;
pub mod symplectic;
pub mod transforms;

pub use error::{Error, Result};
pub use grid::{Field, GridSpec};
pub use symplectic::{AbcdMatrix, Mat2};
pub use transforms::{Method, PlanForm, TransformOptions, TransformReport};
