//! Numerical spherical-transform calculus on real hyperbolic spaces `H^d`.
//!
//! Everything here is radial (`K`-bi-invariant): functions of the geodesic
//! radius `r` on the spatial side, Weyl-even functions of the frequency
//! `lambda >= 0` on the spectral side. The crate provides
//!
//! * the spherical function / Plancherel-density machinery for `H^d`
//!   ([`space`], [`table`]),
//! * the forward/inverse spherical transform with calibrated normalization,
//!   Abel transform and Euclidean Fourier transform ([`transform`]),
//! * Gangolli exponents (Levy-Khinchine characteristic exponents of radial
//!   Levy processes) and the negative-definite toolkit ([`exponent`]),
//! * two-variable Gangolli symbols `q(sigma, lambda)` and the certification
//!   of the coercivity constant chain ([`symbol`], [`audit`]),
//! * spectral pseudodifferential operators, fractional Laplacians,
//!   anisotropic Sobolev norms and mollifiers ([`psdo`], [`sobolev`],
//!   [`mollifier`]),
//! * semigroup evolution, Hunt convolution, sub-Feller and positive-maximum
//!   audits ([`semigroup`]),
//! * coercive Galerkin resolvent solves ([`galerkin`]),
//! * and the invariant-suite runner with its manifest ([`suite`]).
//!
//! Heavy inner loops (table sweeps, transforms, envelope scans, assembly)
//! run data-parallel through rayon when the `parallel` feature (default) is
//! enabled, and fall back to sequential iteration otherwise; see [`par`].

pub mod audit;
pub mod error;
pub mod exponent;
pub mod galerkin;
pub mod grid;
pub mod mollifier;
pub mod par;
pub mod psdo;
pub mod quad;
pub mod semigroup;
pub mod sobolev;
pub mod space;
pub mod suite;
pub mod symbol;
pub mod table;
pub mod transform;

pub use error::{Result, SphqError};
pub use grid::{RadialFunction, RadialGrid, SpectralFunction, SpectralGrid};
pub use space::SpaceModel;
pub use transform::{SphericalTransform, TruncationPolicy};
