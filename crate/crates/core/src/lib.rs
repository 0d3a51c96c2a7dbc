//! Quantized compressive sensing laboratory.
//!
//! Signals from a low-complexity set (sparse vectors, compressible vectors,
//! low-rank matrices) are observed through a random linear map followed by a
//! dithered uniform quantizer, `y = Q(Φx + ξ)`, and reconstructed with
//! projected back projection, `x̂ = P_K(Φᵀy / m)`.
//!
//! The crate is organised bottom-up:
//!
//! - [`signals`]: signal sets, generators and the vector/matrix correspondence.
//! - [`sensing`]: Gaussian, Bernoulli, partial-DCT and SORS operators.
//! - [`quantizer`]: the uniform quantizer, dither and the quantized map.
//! - [`projectors`]: minimal-distance projectors onto each signal set.
//! - [`pbp`]: projected back projection and the QIHT iteration.
//! - [`diagnostics`]: empirical RIP / LPD distortions and mean width.
//! - [`harness`]: config-driven Monte-Carlo experiments, CSV, slopes and plots.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod pbp;
pub mod projectors;
pub mod quantizer;
pub mod rng;
pub mod sensing;
pub mod signals;

pub use error::{Error, Result};
