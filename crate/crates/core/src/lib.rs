//! Numerical toolkit for operator systems in matrix algebras.
//!
//! Elements of M_m(ℂ) are dense [`linalg::CMatrix`] values. On top of that:
//!
//! - [`opsys`]: operator systems S ⊆ M_m and finite function systems.
//! - [`cpmaps`]: completely positive maps, Choi matrices and the
//!   correspondence between UCP maps S → M_n and positive functionals on M_n(S).
//! - [`haar`]: averaging over homogeneous neighbourhoods of the identity in U_n.
//! - [`extend`]: state and UCP extensions posed as semidefinite programs.
//! - [`iso`]: complete order isomorphisms, norm invariants, implementing
//!   unitaries and Paulsen systems.
//! - [`cli`]: the JSON command-line front end used by the `opsys` binary.

pub mod cli;
pub mod cpmaps;
pub mod error;
pub mod extend;
pub mod haar;
pub mod iso;
pub mod linalg;
pub mod opsys;

pub use error::{Error, Result};
pub use linalg::{CMatrix, C64};

/// Version string embedded in every JSON report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
