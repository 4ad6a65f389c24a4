//! Exact p-adic wavelet analysis.
//!
//! The crate implements, over the field `Q_p` of p-adic numbers:
//!
//! * exact digit-window arithmetic with explicit precision tracking
//!   ([`padic`]);
//! * locally constant compactly supported test functions as equal-scale
//!   ball partitions, with exact Haar measure and the unitary affine
//!   action ([`schwartz`]);
//! * the wavelet basis `psi_{gamma,n,j}`, the classification of every
//!   translation/dilation of the mother wavelet onto a basis vector times
//!   an explicit root of unity, the continuous transform, and the
//!   admissibility constant `1/p` ([`wavelets`]);
//! * the fractional differentiation operator, diagonal on the wavelets
//!   with eigenvalues `p^(alpha(1-gamma))` ([`vladimirov`]);
//! * the measure-preserving digit-reversal map onto the half-line and the
//!   p = 2 correspondence with Haar wavelets ([`monna`]);
//! * the multiresolution filtration of `L^2(Q_p)` by local-constancy
//!   scale, with projections and axiom verification ([`mra`]).
//!
//! Phases and measures are exact rationals end to end; floating point
//! enters only through the irrational amplitudes `p^(gamma/2)` and the
//! complex cell values, which is what the `1e-12`/`1e-10` tolerances in
//! [`suites`] cover.

pub mod error;
pub mod monna;
pub mod mra;
pub mod padic;
pub mod sampling;
pub mod schwartz;
pub mod suites;
pub mod vladimirov;
pub mod wavelets;

pub use error::{Error, Result};
pub use monna::{ball_image, haar_eval, monna_map, monna_map_inverse, RealInterval};
pub use padic::{CosetRep, PAdic, UnitPhase, Valuation};
pub use schwartz::{Ball, SchwartzFunction};
pub use wavelets::{AffineParams, Classification, WaveletIndex};
