//! Spectral toolkit for the periodic Benjamin–Ono equation
//! `∂t u = -H∂x²u + ∂x(u²)`.
//!
//! The crate provides the gauge transform and interaction variable `ω`, the
//! trilinear right-hand side of the `ω`-equation with its two-stage
//! normal-form reduction, exact tuple arithmetic for the multipliers and
//! phases, empirical estimate scans, and a pseudospectral solver.
//!
//! ```
//! use bo_core::fourier::{GridSpec, SpectralField};
//! use bo_core::gauge::{gauge_forward, gauge_inverse};
//! use num_complex::Complex64;
//!
//! let grid = GridSpec::dealiased(16)?;
//! let u = SpectralField::from_modes(grid, &[(1, Complex64::new(1.0, 0.0)), (-1, Complex64::new(1.0, 0.0))])?;
//! let pair = gauge_forward(&u)?;
//! let back = gauge_inverse(&pair);
//! assert!(back.max_abs_diff(&u) < 1e-10);
//! # Ok::<(), bo_core::Error>(())
//! ```

pub mod algebra;
pub mod error;
pub mod estimates;
pub mod fourier;
pub mod gauge;
pub mod nfr;
pub mod omega;
pub mod solver;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/overview.md")]
    mod overview {}
    #[doc = include_str!("../../../book/src/fields.md")]
    mod fields {}
    #[doc = include_str!("../../../book/src/algebra.md")]
    mod algebra {}
    #[doc = include_str!("../../../book/src/reduction.md")]
    mod reduction {}
    #[doc = include_str!("../../../book/src/estimates.md")]
    mod estimates {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
