//! Numerical verification of sharp principal-eigenvalue estimates in one dimension.
//!
//! The crate covers
//!
//! * generalized trigonometric functions (`π_p`, `sin_p`, `arcsin_p`),
//! * Γ-calculus for one-dimensional diffusion operators `Lu = σu'' + Xu'`
//!   (carré du champ, Hessian, Γ₂, dimensional Ricci curvature, Bakry-Émery constants),
//! * the one-dimensional model equation for the p-operator and its first-maximum data,
//! * principal Neumann eigenpairs of p-operators on intervals and circles,
//! * spectra of non-symmetric drift operators and the associated model eigenvalue,
//! * drift heat flow and the modulus-of-continuity comparison.

pub mod eigensolve;
pub mod error;
pub mod fd;
pub mod gamma_calculus;
pub mod heat_drift;
pub mod hqr;
pub mod mesh;
pub mod model_ode;
pub mod nonsym;
pub mod ode;
pub mod ptrig;
pub mod quad;
pub mod tridiag;

pub use error::{Error, Result};
pub use gamma_calculus::{Diffusion1D, Domain, SampledFunction};
pub use mesh::{Mesh1D, MeshKind};
pub use ptrig::PExponent;

/// Signed power `|x|^{r-1} x`, with the continuous extension `0` at `x = 0`.
#[inline]
pub fn signed_pow(x: f64, r: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x.signum() * x.abs().powf(r - 1.0)
    }
}
