//! Hammerstein integral equations on unbounded intervals, posed in spaces of
//! functions weighted by a growth function `φ` and stored on a compactified
//! grid where `t = ±∞` are ordinary nodes.
//!
//! The crate covers the full chain from the function space to a solution:
//!
//! - [`compactline`]: maps `ℝ`, `[a, ∞)` onto `[-1, 1]`, Chebyshev–Lobatto grids
//! - [`weights`]: growth functions and their equivalence
//! - [`weighted_space`]: functions stored as `u/φ`, norms, asymptotic comparison
//! - [`hammerstein`]: kernels, nonlinearities and the operator `T`
//! - [`cone`]: the functionals `α`, `β`, `γ`, hypothesis certificates and index windows
//! - [`solver`]: Picard iteration, a Runge–Kutta oracle, escape asymptotics
//! - [`cli`]: scenario files and the pipelines behind the binary

pub mod cli;
pub mod compactline;
pub mod cone;
pub mod error;
pub mod extremum;
pub mod float_repr;
pub mod hammerstein;
pub mod limits;
pub mod problems;
pub mod quadrature;
pub mod solver;
pub mod weighted_space;
pub mod weights;

pub use compactline::{CompactMap, ExtReal, Grid, Interval, Side};
pub use error::{Error, Result};
pub use hammerstein::{apply_t, HammersteinProblem, Kernel, Nonlinearity};
pub use quadrature::QuadConfig;
pub use weighted_space::{NormKind, WeightedFunction};
pub use weights::Weight;
