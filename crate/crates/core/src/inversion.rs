//! Inverting the map `Phi(a, b) = (F, G)` from profile parameters to the
//! density/moment pair.
//!
//! The density equation alone has the closed-form solution
//!
//! ```text
//! a(b; rho) = (e^{2 b rho} - 1) / (e^b + e^{2 b rho} - e^{b(2 rho - 1)} - 1),
//! ```
//!
//! which reduces the full inversion to one monotone scalar equation
//! `g(b) = G(a(b; rho), b) = m` in `b`. `g` is odd, increasing, and saturates
//! at `+- rho(1 - rho)/2`, so a doubling bracket plus a bisection-safeguarded
//! Newton iteration converges for every admissible target.

use crate::error::{Error, Result};
use crate::profile::{sigmoid, MacroState, ProfileParams};

/// Outcome of a successful inversion.
#[derive(Debug, Clone, Copy)]
pub struct InversionResult {
    pub params: ProfileParams,
    /// `(|F - rho|, |G - m|)` at the returned parameters.
    pub residual: (f64, f64),
    pub iterations: u32,
}

/// Tuning knobs for [`invert_with`].
#[derive(Debug, Clone, Copy)]
pub struct InvertOptions {
    /// Accept once both residual components are at or below this.
    pub tol: f64,
    pub max_iter: u32,
    /// Largest |b| the solver will produce; admissible targets whose moment
    /// sits so close to the boundary that they need a steeper profile are
    /// reported as out of domain rather than returned inaccurately.
    pub b_cap: f64,
    /// Relative margin from the boundary |m| = rho(1-rho)/2 that is rejected
    /// up front.
    pub boundary_margin: f64,
}

impl Default for InvertOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
            b_cap: 700.0,
            boundary_margin: 1e-6,
        }
    }
}

/// `ln(e^u - 1)` for `u > 0` without overflow or cancellation.
fn log_expm1(u: f64) -> f64 {
    if u > 33.0 {
        u + (-(-u).exp()).ln_1p()
    } else {
        u.exp_m1().ln()
    }
}

/// `logit` of the solution of `F(a, b) = rho` at fixed `b`:
/// `ln expm1(2|b| rho) - |b|(2 rho - 1) - ln expm1(2|b|(1 - rho))`, a form
/// with no overflow and no cancellation, even in `b` because the density
/// functional is.
fn arc_logit(b: f64, rho: f64) -> Result<f64> {
    if !(rho.is_finite() && rho > 0.0 && rho < 1.0) {
        return Err(Error::OutOfDomain(format!("rho = {rho} not in (0, 1)")));
    }
    if !b.is_finite() {
        return Err(Error::OutOfDomain(format!("b = {b} not finite")));
    }
    let s = b.abs();
    if s == 0.0 {
        return Ok(rho.ln() - (-rho).ln_1p());
    }
    Ok(log_expm1(2.0 * s * rho) - s * (2.0 * rho - 1.0) - log_expm1(2.0 * s * (1.0 - rho)))
}

/// Solve `F(a, b) = rho` for `a` at fixed `b`. At `b = 0` the unique
/// solution is `a = rho`.
///
/// The returned level rounds to exactly `0.0` or `1.0` once
/// `|b| |2 rho - 1|` passes ~37; [`invert`] and the arc evaluations keep
/// working there because they carry the logit, not `a`.
pub fn a_of_b_rho(b: f64, rho: f64) -> Result<f64> {
    if b == 0.0 && rho > 0.0 && rho < 1.0 {
        return Ok(rho);
    }
    Ok(sigmoid(arc_logit(b, rho)?))
}

/// Profile parameters at fixed density `rho`, as a function of `b`.
fn params_on_density_arc(b: f64, rho: f64) -> Result<ProfileParams> {
    ProfileParams::from_logit(arc_logit(b, rho)?, b)
}

/// Invert `Phi` at `target` with tolerance `tol` on both residuals.
pub fn invert(target: &MacroState, tol: f64) -> Result<InversionResult> {
    invert_with(
        target,
        InvertOptions {
            tol,
            ..InvertOptions::default()
        },
    )
}

/// [`invert`] with explicit solver options.
pub fn invert_with(target: &MacroState, opts: InvertOptions) -> Result<InversionResult> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::OutOfDomain(format!("tol = {} not positive", opts.tol)));
    }
    let rho = target.rho();
    let m = target.m();
    let bound = (1.0 - opts.boundary_margin) * target.half_width();
    if m.abs() > bound {
        return Err(Error::OutOfDomain(format!(
            "moment {m} within margin {} of the boundary +-{}",
            opts.boundary_margin,
            target.half_width()
        )));
    }

    let finish = |b: f64, iterations: u32| -> Result<InversionResult> {
        let params = params_on_density_arc(b, rho)?;
        let st = params.macro_state();
        Ok(InversionResult {
            params,
            residual: ((st.rho() - rho).abs(), (st.m() - m).abs()),
            iterations,
        })
    };

    if m == 0.0 {
        // g(0) = 0 by oddness; the arc solution already matches the density.
        return finish(0.0, 0);
    }

    // Solve g(b) = |m| on b >= 0, then restore the sign (g is odd).
    let mt = m.abs();
    let g = |b: f64| -> Result<f64> { Ok(params_on_density_arc(b, rho)?.macro_state().m()) };

    let mut iterations = 0u32;
    let mut lo = 0.0_f64;
    let mut g_lo = 0.0_f64;
    let mut hi = 1.0_f64;
    let mut g_hi = g(hi)?;
    while g_hi < mt {
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        if hi >= opts.b_cap {
            hi = opts.b_cap;
            g_hi = g(hi)?;
            if g_hi < mt {
                return Err(Error::OutOfDomain(format!(
                    "moment {m} needs |b| beyond the cap {}",
                    opts.b_cap
                )));
            }
            break;
        }
        g_hi = g(hi)?;
        iterations += 1;
        if iterations > opts.max_iter {
            return Err(Error::NoConvergence {
                iterations,
                residual: (g_hi - mt).abs(),
            });
        }
    }

    // Newton from the bracket midpoint, falling back to bisection whenever a
    // step leaves the bracket or the finite-difference slope degenerates.
    let mut b = 0.5 * (lo + hi);
    let mut residual = f64::INFINITY;
    while iterations < opts.max_iter {
        iterations += 1;
        let gb = g(b)?;
        residual = (gb - mt).abs();
        if residual <= opts.tol {
            return finish(m.signum() * b, iterations);
        }
        if gb < mt {
            lo = b;
            g_lo = gb;
        } else {
            hi = b;
            g_hi = gb;
        }
        let h = 1e-7 * b.abs().max(1.0);
        let slope = (g((b + h).min(opts.b_cap))? - g((b - h).max(0.0))?)
            / ((b + h).min(opts.b_cap) - (b - h).max(0.0));
        let newton = b - (gb - mt) / slope;
        b = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        // A collapsed bracket cannot improve further; accept the better end
        // if it meets the tolerance after the final evaluation above.
        if hi - lo <= f64::EPSILON * hi.max(1.0) {
            let best = if (g_hi - mt).abs() < (g_lo - mt).abs() {
                hi
            } else {
                lo
            };
            let gb = g(best)?;
            if (gb - mt).abs() <= opts.tol {
                return finish(m.signum() * best, iterations);
            }
            return Err(Error::NoConvergence {
                iterations,
                residual: (gb - mt).abs(),
            });
        }
    }
    Err(Error::NoConvergence {
        iterations,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn arc_solution_at_b_zero_is_rho() {
        assert_eq!(a_of_b_rho(0.0, 0.4).unwrap(), 0.4);
    }

    #[test]
    fn arc_solution_solves_the_density_equation() {
        for rho in [0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.99] {
            for b in [-200.0, -50.0, -2.0, -0.3, 1e-6, 0.8, 7.0, 90.0, 700.0] {
                let p = params_on_density_arc(b, rho).unwrap();
                assert!(
                    (p.density() - rho).abs() <= 1e-12,
                    "rho={rho} b={b}: density {}",
                    p.density()
                );
            }
        }
    }

    #[test]
    fn arc_solution_is_even_in_b() {
        for rho in [0.2, 0.5, 0.85] {
            for b in [0.4, 3.0, 77.0] {
                assert_eq!(a_of_b_rho(b, rho).unwrap(), a_of_b_rho(-b, rho).unwrap());
            }
        }
    }

    #[test]
    fn arc_profile_approaches_a_step_at_one_minus_two_rho() {
        // The step sharpens as b grows: thresholds sigmoid(+-3) at b = 30,
        // sigmoid(+-6) at b = 60, around the midpoint x = 0.4 for rho = 0.3.
        let a30 = a_of_b_rho(30.0, 0.3).unwrap();
        let p30 = ProfileParams::new(a30, 30.0).unwrap();
        assert!(p30.beta(0.5) > 0.9);
        assert!(p30.beta(0.3) < 0.1);
        let a60 = a_of_b_rho(60.0, 0.3).unwrap();
        let p60 = ProfileParams::new(a60, 60.0).unwrap();
        assert!(p60.beta(0.5) > 0.99);
        assert!(p60.beta(0.3) < 0.01);
        // Midpoint of the step: beta = 1/2 at x = 1 - 2 rho.
        assert_relative_eq!(p60.beta(0.4), 0.5, epsilon = 1e-9);
    }

    #[test]
    fn invert_fixes_the_symmetric_state() {
        let st = MacroState::new(0.5, 0.0).unwrap();
        let r = invert(&st, 1e-12).unwrap();
        assert_eq!(r.params.a(), 0.5);
        assert_eq!(r.params.b(), 0.0);
        assert_eq!(r.iterations, 0);
    }

    #[test]
    fn invert_round_trips_interior_targets() {
        for rho in [0.15, 0.5, 0.82] {
            for frac in [-0.6, -0.1, 0.3, 0.75] {
                let st = MacroState::new(rho, frac * 0.5 * rho * (1.0 - rho)).unwrap();
                let r = invert(&st, 1e-12).unwrap();
                let back = r.params.macro_state();
                assert!((back.rho() - st.rho()).abs() < 1e-11);
                assert!((back.m() - st.m()).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn sign_of_b_follows_sign_of_m() {
        for rho in [0.3, 0.6] {
            for frac in [0.2, 0.7] {
                let m = frac * 0.5 * rho * (1.0 - rho);
                let pos = invert(&MacroState::new(rho, m).unwrap(), 1e-12).unwrap();
                let neg = invert(&MacroState::new(rho, -m).unwrap(), 1e-12).unwrap();
                assert!(pos.params.b() > 0.0);
                assert!(neg.params.b() < 0.0);
                // Oddness: the solutions mirror each other.
                assert_relative_eq!(pos.params.b(), -neg.params.b(), max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn near_boundary_target_needs_steep_profile_and_converges() {
        let rho = 0.5_f64;
        let m = 0.999 * 0.5 * rho * (1.0 - rho);
        let r = invert(&MacroState::new(rho, m).unwrap(), 1e-12).unwrap();
        assert!(r.params.b() > 20.0, "b = {}", r.params.b());
        assert!(r.residual.1 <= 1e-12);
    }

    #[test]
    fn margin_violations_are_out_of_domain() {
        let rho = 0.5_f64;
        let hw = 0.5 * rho * (1.0 - rho);
        // Inside the state space but inside the default safety margin too.
        let st = MacroState::new(rho, hw * (1.0 - 1e-9)).unwrap();
        assert!(matches!(invert(&st, 1e-12), Err(Error::OutOfDomain(_))));
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let st = MacroState::new(0.4, 0.02).unwrap();
        let r = invert_with(
            &st,
            InvertOptions {
                max_iter: 2,
                ..InvertOptions::default()
            },
        );
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn moment_along_arc_is_monotone_in_b() {
        for rho in [0.25, 0.5, 0.75] {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..=160 {
                let b = -40.0 + 0.5 * i as f64;
                let p = params_on_density_arc(b, rho).unwrap();
                let g = p.macro_state().m();
                assert!(g >= prev - 1e-13, "rho={rho} b={b}: {g} < {prev}");
                prev = g;
            }
        }
    }

    #[test]
    fn saturation_limits_bracket_the_moment() {
        for rho in [0.2_f64, 0.5, 0.9] {
            let half = 0.5 * rho * (1.0 - rho);
            let g = params_on_density_arc(500.0, rho).unwrap().macro_state().m();
            assert!(g < half);
            assert!(g > 0.97 * half, "rho={rho}: g={g} half={half}");
        }
    }
}
