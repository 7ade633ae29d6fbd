//! Numerics for uniform Bernoulli ensembles on the symmetric window
//! `{-ell, ..., ell}` conditioned on two conserved quantities: the particle
//! number `K = sum eta_k` and the weighted sum `M = sum k eta_k`.
//!
//! The crate covers the full pipeline from microscopic ensembles to limit
//! shapes:
//!
//! * [`profile`]: the exponential occupation family
//!   `beta(x) = e^{bx} a / (e^{bx} a + 1 - a)` on `[-1, 1]`, its density and
//!   first-moment functionals, and the real dilogarithm that appears in their
//!   closed forms.
//! * [`inversion`]: the map from a target density/moment pair `(rho, m)` back
//!   to profile parameters `(a, b)`.
//! * [`ensemble`]: exact canonical counting (arbitrary precision), exactly
//!   uniform sampling, a pair-exchange Markov chain, local marginals, and the
//!   conditional-uniformity check behind the product-measure identity.
//! * [`llt`]: the joint law of `(sum X_k, sum k X_k)` for independent
//!   Bernoulli variables with site-dependent means, its Gaussian local limit,
//!   and a characteristic-function oracle.
//! * [`young`]: Young-diagram height functions of configurations, their
//!   `1/ell` scaling, and the limit curve `psi(x) = int_x^1 beta`.
//! * [`vershik`]: the logarithmic Bose curve `L`, its rotation to Fermi
//!   coordinates, scaling covariance, and the curvature ODE residual that
//!   identifies both analytic descriptions of the limit shape.

#![forbid(unsafe_code)]

pub mod curve;
pub mod ensemble;
mod error;
pub mod inversion;
pub mod llt;
pub mod profile;
pub mod quad;
pub mod vershik;
pub mod young;

pub use curve::{Curve, Interpolation};
pub use error::{Error, Result};
pub use profile::{MacroState, ProfileParams};
