//! Scalar quantizer design on the unit interval.
//!
//! Two fixed-rate quantizer families are designed against a known
//! continuous density on `[0, 1]`:
//!
//! * the approximate Lloyd-Max scheme (ALM), which minimizes mean square
//!   error, and
//! * the approximate envelope quantizer (AEQ), which minimizes mean square
//!   error subject to `decode(encode(x)) >= x`.
//!
//! Both replace the density by its chord over each level's neighbor
//! interval, turning every level update into the root of a small
//! polynomial; updates run as alternating even/odd (ABEO) half-sweeps with
//! pinned reference levels at 0 and 1. Because each update is a convex
//! combination of its neighbors, an iteration is multiplication by a
//! row-stochastic matrix, and the [`spectral`] module verifies the
//! resulting contraction structure (unit eigenvalue of multiplicity two,
//! rank-two product limit, geometric convergence at the second eigenvalue).
//!
//! The [`oracle`] module carries the exact quadrature-based counterparts
//! (classical Lloyd-Max, exact envelope quantizer, exact distortion) used
//! to measure how near-optimal the chord-based designs are, and [`codec`]
//! applies finished codebooks to data.
//!
//! ```
//! use quantdesign::{codec, quantizer, Density, RunConfig, Scheme};
//!
//! let density = Density::beta(2.0, 4.0).unwrap();
//! let cfg = RunConfig::new(Scheme::Aeq, 8).with_max_iter(2000);
//! let (codebook, trace) = quantizer::run(&cfg, &density).unwrap();
//! assert!(trace.converged);
//!
//! // Envelope quantizers never reconstruct below the input.
//! let index = codec::encode(0.3, &codebook).unwrap();
//! assert!(codec::decode(index, &codebook).unwrap() >= 0.3);
//! ```

pub mod codec;
pub mod cubic;
pub mod density;
pub mod error;
pub mod oracle;
pub mod quad;
pub mod quantizer;
mod roots;
pub mod spectral;

pub use cubic::{CubicPoly, KCase, Scheme};
pub use density::{Density, DensitySpec, LinearApprox};
pub use error::{Error, Result};
pub use quad::QuadratureGrid;
pub use quantizer::{Codebook, InitScheme, Parity, RunConfig, RunTrace, StopRule};
