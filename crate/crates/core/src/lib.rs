//! Numerical laboratory for Littlewood-Paley theory.
//!
//! Functions live on a uniform periodic grid in one or two dimensions and all
//! convolution operators are applied as Fourier multipliers. The crate is
//! organised by subsystem:
//!
//! * [`field`]: grids, sampled fields, the continuous-convention Fourier
//!   transform, norms and log-scale quadrature.
//! * [`kernel`]: closed-form kernel symbols and the cancellation,
//!   non-degeneracy and decay-class checks.
//! * [`calderon`]: the discrete Calderon partition `eta`, the low-pass
//!   remainder `zeta_J` and the `alpha`/`beta` decomposition of a kernel.
//! * [`constants`]: the weighted kernel constants `C_0`, `C`, `D` and the
//!   condition audit built on them.
//! * [`maximal`]: Peetre, Hardy-Littlewood and grand maximal functions.
//! * [`transforms`]: scale transforms, square functions, synthesis and atoms.
//! * [`weights`]: Muckenhoupt characteristics of power weights.

pub mod calderon;
pub mod constants;
pub mod error;
pub mod field;
pub mod kernel;
pub mod maximal;
pub mod transforms;
pub mod weights;

mod numeric;
mod smooth;

pub use error::{LabError, Result};
