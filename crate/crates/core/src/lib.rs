//! Analysis of cylinder measures on the circle under the times-`p` map.
//!
//! The library is organized around one object — a probability measure given
//! by its masses on the `p^N` base-`p` cylinder intervals — and the
//! quantities that control how it interacts with a second, multiplicatively
//! independent base `q`:
//!
//! * [`symbolic`] — digit words, cylinder intervals, shifts and branch
//!   compositions;
//! * [`measure`] — the measure type itself over an exact rational or a
//!   float backend: invariance defects, sibling balance profiles (the
//!   constant `C₀`), translation smoothing `ν_n`, and the density ratios
//!   `φ_n` with their integral bounds;
//! * [`orders`] — orbit sizes `T_n` of geometric progressions modulo
//!   `p^n`, their stabilization threshold, and the scaling constant `C₁`
//!   with a checkable certificate;
//! * [`harmonic`] — Fourier coefficients with exactly reduced phases,
//!   Weyl averages along `{m q^k}`, the smoothed second-moment identity
//!   `∫|β_{T_n}|² dν_n = 1/T_n`, and the chained decay estimate that ties
//!   all of the constants together;
//! * [`dynamics`] — example branch systems that *generate* interesting
//!   measures: a perturbed-affine family with a provable positive balance
//!   floor, a parabolic family whose balance degenerates, and branch
//!   systems conjugated to Lebesgue through a transfer-operator density;
//! * [`io`] — measure files and JSON report views.
//!
//! Numeric policy, everywhere: the rational backend is exact and compares
//! with zero tolerance; the float backend uses compensated sums with fixed
//! chunking, so results are byte-identical regardless of thread count. Any
//! value that a report promises to bound is computed together with the
//! bound and the slack between them, never asserted silently.

pub mod dynamics;
pub mod error;
pub mod harmonic;
pub mod io;
pub mod measure;
pub mod orders;
pub mod scalar;
pub mod symbolic;

pub use error::{Error, Result};
pub use measure::CylinderMeasure;
pub use scalar::{Backend, Rational, Scalar};
pub use symbolic::Word;
