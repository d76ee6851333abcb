//! Holomorphic almost modular forms of weight ½.
//!
//! The crate is organised bottom-up:
//!
//! - [`symbol`]: the generalized quadratic residue symbol `(a/b)` for odd `b`.
//! - [`group`]: upper half plane geometry, `Γ₁(N)`, the universal cover of
//!   `SL(2,ℝ)` and the theta multiplier `j_γ`.
//! - [`theta`]: `θ(z)`, `θ(kz)`, Jacobi's `Δ`, weight-½ combinations and
//!   transformation-law residuals.
//! - [`hamf`]: coefficient sequences `ĥ_k`, the series `ξ(z) = Σ h(n²z)`, its
//!   Fourier coefficients and the approximation error by theta combinations.
//! - [`dist`]: sampling of `y^{1/4} ξ(x+iy)` along horocycles, rotation
//!   statistics and the variance constant.

pub mod cli;
pub mod dist;
pub mod error;
pub mod group;
pub mod hamf;
pub mod stats;
pub mod symbol;
pub mod theta;

mod phase;

pub use error::{HamfError, Result};
pub use group::{CoverElement, CoverPoint, UnimodularInt, UpperHalfPoint};
pub use hamf::CoeffSequence;
pub use theta::SeriesTolerance;

/// Version string embedded in machine-readable output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
