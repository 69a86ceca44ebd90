//! Exact finite-matrix models of operators on reproducing kernel Hilbert
//! spaces of the polydisc and the unit ball.
//!
//! Every operator lives on a graded truncation `V_D` (monomials of total
//! degree at most `D`, tensored with a finite coefficient space) and carries
//! the degree range on which it agrees with the untruncated operator.
//! The modules build on each other:
//!
//! * [`kernels`]: diagonal power-series kernels, series inversion, complete
//!   Nevanlinna-Pick certificates.
//! * [`spaces`]: multi-indices, truncated orthonormal bases, kernel vectors.
//! * [`operators`]: shifts, polynomial multipliers, Cauchy duals, projections,
//!   wandering subspaces and the invariant-subspace witness search.
//! * [`purity`]: spectral purity verdicts, decay curves, Nagy-Foias splits.
//! * [`ball`]: defect identities on the ball.
//! * [`dilation`]: transfer functions, BCL pairs and colligations.

pub mod ball;
pub mod dilation;
pub mod error;
pub mod kernels;
pub mod linalg;
pub mod operators;
pub mod purity;
pub mod random;
pub mod spaces;
pub mod wire;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;

/// Largest supported series order and truncation degree.
pub const MAX_ORDER: usize = 64;

/// Crate version, echoed in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
