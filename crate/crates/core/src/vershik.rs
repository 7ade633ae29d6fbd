//! The classical two-parameter limit-shape family in its "Bose" chart, and
//! the change of chart identifying it with the occupation-profile heights of
//! [`crate::young`].
//!
//! The Bose chart is the function `L` on `[0, 1]` with
//!
//! ```text
//! L(t) = (1/c) ln[ (sinh(c t) + w sinh(c (1 - t))) / (w sinh c) ],
//! w = e^{-c sigma},  sigma = 1 - 2 rho,
//! ```
//!
//! whose graph, rotated by 45 degrees and rescaled, is the height profile of
//! the constrained Bernoulli ensembles. The bracket is a positive combination
//! of `e^{ct}` and `e^{-ct}` for every admissible parameter pair, so `L` is
//! defined on all of `[0, 1]` with `L(0) = 0` and `L(1) = sigma`.

use std::f64::consts::{FRAC_1_SQRT_2, LN_2, SQRT_2};

use crate::curve::{sup_distance, Curve, Interpolation};
use crate::error::{Error, Result};
use crate::inversion::invert;
use crate::profile::{MacroState, ProfileParams};
use crate::young::limit_curve;

/// Parameters of the Bose-chart curve: the mean filling `rho_bar` and the
/// steepness `c_bar`.
#[derive(Debug, Clone, Copy)]
pub struct BoseCurveParams {
    rho_bar: f64,
    c_bar: f64,
}

/// Steepness values beyond this would overflow nothing (the evaluation is in
/// log space), but they correspond to profiles outside the solvable range of
/// the inversion, so they are rejected for symmetry with that cap.
pub const MAX_C_BAR: f64 = 700.0;

/// Below this the first-order expansion in `c_bar` is already exact to
/// `f64` precision and dodges the `O(c^2)` underflow of the direct form.
const SERIES_C_BAR: f64 = 1e-7;

/// Steepness bound for the cancellation-free delta form of `L`. Its `ln1p`
/// argument is `e^{c L} - 1`, which dives toward `-1` once `|c L|` passes a
/// few tens and loses the log to cancellation; within this bound
/// `|c L| <= |c|` keeps it harmless, and past it the log-sum-exp evaluation
/// (uniformly accurate for steep curves, exact at both endpoints) takes over.
const DELTA_FORM_MAX_C_BAR: f64 = 2.0;

/// `ln sinh u` for `u >= 0` without overflow; `-inf` at zero.
fn ln_sinh(u: f64) -> f64 {
    if u < 1.0 {
        u.sinh().ln()
    } else {
        u - LN_2 + (-(-2.0 * u).exp()).ln_1p()
    }
}

fn log_add(x: f64, y: f64) -> f64 {
    if x == f64::NEG_INFINITY {
        return y;
    }
    if y == f64::NEG_INFINITY {
        return x;
    }
    let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
    hi + (lo - hi).exp().ln_1p()
}

/// `cosh u - 1` without cancellation.
fn coshm1(u: f64) -> f64 {
    let s = (0.5 * u).sinh();
    2.0 * s * s
}

/// `ln |expm1(z)|` for nonzero `z`, stable across the whole real line.
fn ln_abs_expm1(z: f64) -> f64 {
    if z > 33.0 {
        z + (-(-z).exp()).ln_1p()
    } else if z < -33.0 {
        (-z.exp()).ln_1p()
    } else {
        z.exp_m1().abs().ln()
    }
}

impl BoseCurveParams {
    pub fn new(rho_bar: f64, c_bar: f64) -> Result<Self> {
        if !(rho_bar.is_finite() && rho_bar > 0.0 && rho_bar < 1.0) {
            return Err(Error::OutOfDomain(format!(
                "rho_bar = {rho_bar} not in (0, 1)"
            )));
        }
        if !c_bar.is_finite() || c_bar.abs() > MAX_C_BAR {
            return Err(Error::OutOfDomain(format!(
                "c_bar = {c_bar} not in [-{MAX_C_BAR}, {MAX_C_BAR}]"
            )));
        }
        Ok(Self { rho_bar, c_bar })
    }

    pub fn rho_bar(&self) -> f64 {
        self.rho_bar
    }

    pub fn c_bar(&self) -> f64 {
        self.c_bar
    }

    /// `sigma = 1 - 2 rho_bar = L(1)`.
    pub fn sigma(&self) -> f64 {
        1.0 - 2.0 * self.rho_bar
    }

    /// The Bose-chart curve `L` at `t` in `[0, 1]`.
    ///
    /// For gentle curves, evaluated as `ln(1 + delta) / c` where `delta`
    /// collects the departure from the straight chord without cancellation.
    /// Steeper curves (where that `ln1p` argument can approach `-1`) move to
    /// a log-sum-exp form, and tiny `c` to the first-order expansion
    /// `L = sigma t + 2 c rho (1 - rho) t (t - 1)` before the direct forms
    /// underflow. Every branch pins `L(0) = 0` and `L(1) = sigma` to
    /// rounding.
    pub fn l(&self, t: f64) -> f64 {
        let c = self.c_bar;
        let sigma = self.sigma();
        if c == 0.0 {
            return sigma * t;
        }
        if c.abs() < SERIES_C_BAR {
            return sigma * t + 2.0 * c * self.rho_bar * (1.0 - self.rho_bar) * t * (t - 1.0);
        }
        if c.abs() <= DELTA_FORM_MAX_C_BAR {
            let num = (c * t).sinh() * ((c * sigma).exp_m1() - coshm1(c * (1.0 - t)))
                - (c * (1.0 - t)).sinh() * coshm1(c * t);
            return (num / c.sinh()).ln_1p() / c;
        }
        let d = c.abs();
        let ew = -c * sigma;
        let top = log_add(ln_sinh(d * t), ew + ln_sinh(d * (1.0 - t)));
        (top - (ew + ln_sinh(d))) / c
    }

    /// Slope of the Bose-chart curve; strictly inside `(-1, 1)` in exact
    /// arithmetic, saturating to `+-1.0` in `f64` only where the true value
    /// is within an ulp of the band edge.
    ///
    /// Splitting the sinh/cosh of `L'` into exponentials gives
    /// `L' = (U e^{ct} + W e^{-ct}) / (U e^{ct} - W e^{-ct})` with
    /// `U = -expm1(-2c(1 - rho))` and `W = -expm1(2c rho)`. `U` and `W`
    /// carry opposite signs for every admissible parameter pair, so
    /// factoring their magnitudes collapses the ratio to a single
    /// hyperbolic tangent,
    ///
    /// ```text
    /// L'(t) = tanh(c t + (ln|U| - ln|W|) / 2),
    /// ```
    ///
    /// which cannot overflow, cancel, or leave the band.
    pub fn l_prime(&self, t: f64) -> f64 {
        let c = self.c_bar;
        if c == 0.0 {
            return self.sigma();
        }
        let phi = 0.5
            * (ln_abs_expm1(-2.0 * c * (1.0 - self.rho_bar))
                - ln_abs_expm1(2.0 * c * self.rho_bar));
        (c * t + phi).tanh()
    }

    /// Occupation profile in the Fermi chart on `[0, sqrt 2]`:
    /// `beta(x) = (1 - L'(x / sqrt 2)) / 2`.
    pub fn fermi_beta(&self, x: f64) -> f64 {
        0.5 * (1.0 - self.l_prime(x / SQRT_2))
    }

    /// Derivative of [`BoseCurveParams::fermi_beta`]; the profile solves the
    /// logistic equation `beta' = -sqrt(2) c beta (1 - beta)`.
    pub fn fermi_beta_prime(&self, x: f64) -> f64 {
        let b = self.fermi_beta(x);
        -SQRT_2 * self.c_bar * b * (1.0 - b)
    }

    /// Height profile in the Fermi chart, the exact integral of
    /// [`BoseCurveParams::fermi_beta`] from `x` to `sqrt 2`:
    /// `psi(x) = (2 rho - t + L(t)) / sqrt 2` with `t = x / sqrt 2`.
    pub fn fermi_psi(&self, x: f64) -> f64 {
        // Dividing (not multiplying by the reciprocal) keeps t <= 1 for
        // every x <= sqrt 2, with equality at the right edge; an ulp of
        // overshoot would leave the domain of the steep branch of `l`.
        let t = x / SQRT_2;
        (2.0 * self.rho_bar - t + self.l(t)) * FRAC_1_SQRT_2
    }
}

/// The Bose-chart curve `(t, L(t))` tabulated on `[0, 1]`.
pub fn bose_curve(params: &BoseCurveParams, grid_points: usize) -> Result<Curve> {
    let xs = Curve::uniform_grid(0.0, 1.0, grid_points);
    let ys = xs.iter().map(|&t| params.l(t)).collect();
    Curve::new(xs, ys, Interpolation::Linear)
}

/// The Fermi-chart height profile tabulated on `[0, sqrt 2]`.
pub fn fermi_curve(params: &BoseCurveParams, grid_points: usize) -> Result<Curve> {
    let xs = Curve::uniform_grid(0.0, SQRT_2, grid_points);
    let ys = xs.iter().map(|&x| params.fermi_psi(x)).collect();
    Curve::new(xs, ys, Interpolation::Linear)
}

/// The scaling action on height profiles: `psi_gamma(x) = psi(gamma x) /
/// gamma`, which divides both the grid and the values by `gamma`.
pub fn gamma_scale(curve: &Curve, gamma: f64) -> Result<Curve> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::OutOfDomain(format!(
            "scaling factor {gamma} must be positive and finite"
        )));
    }
    let xs = curve.grid().iter().map(|&x| x / gamma).collect();
    let ys = curve.values().iter().map(|&y| y / gamma).collect();
    Curve::new(xs, ys, curve.interpolation())
}

/// Nonuniform three-point finite-difference first and second derivatives at
/// the interior nodes of a curve.
fn fd_derivatives(curve: &Curve) -> Result<(Vec<f64>, Vec<f64>)> {
    let xs = curve.grid();
    let ys = curve.values();
    if xs.len() < 5 {
        return Err(Error::GridTooCoarse {
            got: xs.len(),
            need: 5,
        });
    }
    let mut d1 = Vec::with_capacity(xs.len() - 2);
    let mut d2 = Vec::with_capacity(xs.len() - 2);
    for i in 1..xs.len() - 1 {
        let h1 = xs[i] - xs[i - 1];
        let h2 = xs[i + 1] - xs[i];
        let denom = h1 * h2 * (h1 + h2);
        d1.push((h1 * h1 * ys[i + 1] - h2 * h2 * ys[i - 1] + (h2 * h2 - h1 * h1) * ys[i]) / denom);
        d2.push(2.0 * (h1 * ys[i + 1] + h2 * ys[i - 1] - (h1 + h2) * ys[i]) / denom);
    }
    Ok((d1, d2))
}

/// Largest violation of the height equation `psi'' + k psi' (1 + psi') = 0`
/// given first and second derivative samples.
pub fn height_ode_residual_analytic(d1: &[f64], d2: &[f64], k: f64) -> Result<f64> {
    if d1.len() != d2.len() || d1.is_empty() {
        return Err(Error::OutOfDomain(
            "derivative slices must be nonempty and equal length".into(),
        ));
    }
    Ok(d1
        .iter()
        .zip(d2)
        .map(|(&p, &q)| (q + k * p * (1.0 + p)).abs())
        .fold(0.0, f64::max))
}

/// [`height_ode_residual_analytic`] with the derivatives estimated from the
/// curve by finite differences. This measures both the curve's fidelity and
/// the stencil error `O(h^2)`.
pub fn height_ode_residual(curve: &Curve, k: f64) -> Result<f64> {
    let (d1, d2) = fd_derivatives(curve)?;
    height_ode_residual_analytic(&d1, &d2, k)
}

/// Largest violation of the Bose-chart equation `L'' = c (1 - L'^2)`, with
/// finite-difference derivatives.
pub fn bose_ode_residual(curve: &Curve, c_bar: f64) -> Result<f64> {
    let (d1, d2) = fd_derivatives(curve)?;
    Ok(d1
        .iter()
        .zip(&d2)
        .map(|(&p, &q)| (q - c_bar * (1.0 - p * p)).abs())
        .fold(0.0, f64::max))
}

/// Outcome of matching an inverted occupation profile with a member of the
/// Bose-chart family.
#[derive(Debug, Clone, Copy)]
pub struct CurveIdentification {
    pub params: ProfileParams,
    pub bose: BoseCurveParams,
    /// Sup distance between the profile's limiting height curve and the
    /// rotated, rescaled Bose-chart curve on a shared grid.
    pub sup_discrepancy: f64,
}

/// Invert a macroscopic state to profile parameters, build both limit
/// curves, and measure how far apart they are. The identification sends
/// `(rho, b)` to `(rho_bar, c_bar) = (rho, -b)` and conjugates by the scaling
/// that maps `[0, sqrt 2]` onto `[-1, 1]`.
pub fn identify_curves(state: &MacroState, grid_points: usize) -> Result<CurveIdentification> {
    let inv = invert(state, 1e-13)?;
    let params = inv.params;
    let psi = limit_curve(&params, grid_points)?;
    let bose = BoseCurveParams::new(state.rho(), -params.b())?;
    let fermi = fermi_curve(&bose, grid_points)?;
    let aligned = gamma_scale(&fermi, FRAC_1_SQRT_2)?.shift_x(-1.0);
    let sup_discrepancy = sup_distance(&psi, &aligned)?;
    Ok(CurveIdentification {
        params,
        bose,
        sup_discrepancy,
    })
}
