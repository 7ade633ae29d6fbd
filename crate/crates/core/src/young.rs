//! Height functions of occupation configurations and their limit shape.
//!
//! The height above `u` counts the particles strictly to the right:
//! `psi(u) = #{k > u : eta_k = 1}`. Plotted over `u = -ell - 1, ..., ell - 1`
//! this is the boundary of a Young diagram whose area is the shifted weight
//! `M + (ell + 1) K`, so pinning `(K, M)` pins the diagram's corner and area.

use crate::curve::{Curve, Interpolation};
use crate::ensemble::ParticleConfig;
use crate::error::{Error, Result};
use crate::profile::ProfileParams;
use crate::quad::integrate_adaptive;

/// Integer height profile of one configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightFunction {
    ell: u32,
    cells: Vec<u32>,
}

impl HeightFunction {
    pub fn from_config(cfg: &ParticleConfig) -> Self {
        let occ = cfg.occupancy();
        let mut cells = vec![0u32; occ.len()];
        let mut suffix = 0u32;
        for i in (0..occ.len()).rev() {
            suffix += occ[i] as u32;
            cells[i] = suffix;
        }
        Self {
            ell: cfg.ell(),
            cells,
        }
    }

    pub fn ell(&self) -> u32 {
        self.ell
    }

    /// `cells[i]` is the height above `u = i - ell - 1`; the first entry is
    /// the particle number and the height above `ell` is zero by convention.
    pub fn cells(&self) -> &[u32] {
        &self.cells
    }

    /// Height above `u`, extended constantly below the lattice and by zero
    /// above it.
    pub fn value_at(&self, u: i64) -> u32 {
        let i = u + self.ell as i64 + 1;
        if i <= 0 {
            self.cells[0]
        } else if i as usize >= self.cells.len() {
            0
        } else {
            self.cells[i as usize]
        }
    }

    /// Diagram area, which equals the shifted weight `M + (ell + 1) K`.
    pub fn area(&self) -> u64 {
        self.cells.iter().map(|&c| c as u64).sum()
    }
}

/// Height profile rescaled by `ell` in both directions, as a right-continuous
/// step curve on `[-1, 1]`: the value on `[u/ell, (u+1)/ell)` is
/// `psi(u) / ell`.
pub fn scaled_height(h: &HeightFunction) -> Curve {
    let ell = h.ell as f64;
    let two_ell = 2 * h.ell as usize;
    let mut xs = Vec::with_capacity(two_ell + 1);
    let mut ys = Vec::with_capacity(two_ell + 1);
    for i in 0..two_ell {
        xs.push((i as f64 - ell) / ell);
        ys.push(h.cells[i + 1] as f64 / ell);
    }
    xs.push(1.0);
    ys.push(0.0);
    Curve::new(xs, ys, Interpolation::RightStep).expect("grid is strictly increasing")
}

/// Limiting height profile `psi(x) = int_x^1 beta(t) dt` in closed form.
///
/// For `b != 0` the antiderivative of the profile is `log_g / b`, so
/// `psi(x) = (log_g(1) - log_g(x)) / b`; at `b = 0` the profile is constant
/// and `psi(x) = a (1 - x)`.
pub fn limit_psi(p: &ProfileParams, x: f64) -> f64 {
    if p.b() == 0.0 {
        p.a() * (1.0 - x)
    } else {
        (p.log_g(1.0) - p.log_g(x)) / p.b()
    }
}

/// [`limit_psi`] tabulated on a uniform grid over `[-1, 1]` with linear
/// interpolation.
pub fn limit_curve(p: &ProfileParams, grid_points: usize) -> Result<Curve> {
    let xs = Curve::uniform_grid(-1.0, 1.0, grid_points);
    let ys = xs.iter().map(|&x| limit_psi(p, x)).collect();
    Curve::new(xs, ys, Interpolation::Linear)
}

/// Empirical linear statistic `(1/ell) sum_k eta_k f(k/ell)` over a batch of
/// samples, compared against its macroscopic limit `int_{-1}^{1} beta f`.
#[derive(Debug, Clone, Copy)]
pub struct MomentTest {
    pub mean: f64,
    /// Unbiased sample variance of the statistic (zero whenever `f` is a
    /// linear combination of `1` and `x`, which the constraints freeze).
    pub variance: f64,
    /// The macroscopic value `int beta f`, by adaptive quadrature.
    pub reference: f64,
}

/// Evaluate the linear statistic with weight `f` on each sample and compare
/// with the profile prediction.
pub fn moment_test(
    samples: &[ParticleConfig],
    f: impl Fn(f64) -> f64,
    p: &ProfileParams,
) -> Result<MomentTest> {
    let first = samples
        .first()
        .ok_or_else(|| Error::OutOfDomain("no samples".into()))?;
    let ell = first.ell();
    let le = ell as f64;
    let mut stats = Vec::with_capacity(samples.len());
    for s in samples {
        if s.ell() != ell {
            return Err(Error::OutOfDomain("samples mix lattice sizes".into()));
        }
        let mut acc = 0.0;
        for (i, &e) in s.occupancy().iter().enumerate() {
            if e == 1 {
                acc += f((i as f64 - le) / le);
            }
        }
        stats.push(acc / le);
    }
    let n = stats.len() as f64;
    let mean = stats.iter().sum::<f64>() / n;
    let variance = if stats.len() < 2 {
        0.0
    } else {
        stats.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (n - 1.0)
    };
    let reference = integrate_adaptive(|x| p.beta(x) * f(x), -1.0, 1.0, 1e-12);
    Ok(MomentTest {
        mean,
        variance,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::{sample_exact, staircase, CanonicalSpec};
    use crate::inversion::invert;
    use crate::profile::MacroState;
    use approx::assert_relative_eq;

    #[test]
    fn heights_are_suffix_counts() {
        // ell = 2, occupancy on sites -2..2: [1, 0, 1, 1, 0].
        let cfg = ParticleConfig::new(2, vec![1, 0, 1, 1, 0]).unwrap();
        let h = HeightFunction::from_config(&cfg);
        assert_eq!(h.cells(), &[3, 2, 2, 1, 0]);
        assert_eq!(h.value_at(-3), 3);
        assert_eq!(h.value_at(-2), 2);
        assert_eq!(h.value_at(1), 0);
        assert_eq!(h.value_at(2), 0);
        assert_eq!(h.value_at(-7), 3);
    }

    #[test]
    fn area_equals_shifted_weight_on_random_configs() {
        let spec = CanonicalSpec::new(7, 6, -9).unwrap();
        for cfg in sample_exact(&spec, 200, 3).unwrap() {
            let h = HeightFunction::from_config(&cfg);
            let want = cfg.weighted_sum() + (cfg.ell() as i64 + 1) * cfg.particle_number() as i64;
            assert_eq!(h.area() as i64, want);
        }
    }

    #[test]
    fn heights_never_increase() {
        let spec = CanonicalSpec::new(6, 5, 4).unwrap();
        for cfg in sample_exact(&spec, 50, 11).unwrap() {
            let h = HeightFunction::from_config(&cfg);
            for w in h.cells().windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn scaled_height_is_the_rescaled_step_profile() {
        let cfg = ParticleConfig::new(2, vec![1, 0, 1, 1, 0]).unwrap();
        let h = HeightFunction::from_config(&cfg);
        let c = scaled_height(&h);
        assert_eq!(c.grid().len(), 5);
        assert_eq!(c.x_min(), -1.0);
        assert_eq!(c.x_max(), 1.0);
        // Value on [-1, -0.5) is psi(-2)/2 = 1.0.
        assert_eq!(c.eval(-1.0), 1.0);
        assert_eq!(c.eval(-0.8), 1.0);
        // Value on [0, 0.5) is psi(0)/2 = 0.5.
        assert_eq!(c.eval(0.2), 0.5);
        assert_eq!(c.eval(1.0), 0.0);
    }

    #[test]
    fn limit_psi_endpoints_and_mass() {
        let st = MacroState::new(0.4, 0.03).unwrap();
        let p = invert(&st, 1e-13).unwrap().params;
        assert_relative_eq!(limit_psi(&p, -1.0), 0.8, epsilon = 1e-11);
        assert_eq!(limit_psi(&p, 1.0), 0.0);
        let mass = integrate_adaptive(|x| limit_psi(&p, x), -1.0, 1.0, 1e-12);
        assert_relative_eq!(mass, 2.0 * 0.4 + 4.0 * 0.03, epsilon = 1e-10);
    }

    #[test]
    fn limit_psi_slope_is_minus_beta() {
        let p = ProfileParams::new(0.35, 1.7).unwrap();
        for x in [-0.9, -0.2, 0.0, 0.4, 0.8] {
            let h = 1e-6;
            let fd = (limit_psi(&p, x + h) - limit_psi(&p, x - h)) / (2.0 * h);
            assert_relative_eq!(fd, -p.beta(x), max_relative = 1e-8);
        }
    }

    #[test]
    fn limit_psi_is_continuous_at_b_zero() {
        let tiny = ProfileParams::new(0.6, 1e-12).unwrap();
        let flat = ProfileParams::new(0.6, 0.0).unwrap();
        for x in [-1.0, -0.3, 0.5, 1.0] {
            assert_relative_eq!(
                limit_psi(&tiny, x),
                limit_psi(&flat, x),
                epsilon = 1e-12,
                max_relative = 1e-10
            );
        }
    }

    #[test]
    fn limit_curve_interpolates_limit_psi() {
        let p = ProfileParams::new(0.5, -2.0).unwrap();
        let c = limit_curve(&p, 2001).unwrap();
        for x in [-0.77, 0.0, 0.123, 0.9] {
            assert_relative_eq!(c.eval(x), limit_psi(&p, x), epsilon = 1e-6);
        }
    }

    #[test]
    fn constrained_statistics_have_zero_variance() {
        let spec = CanonicalSpec::new(10, 8, 12).unwrap();
        let samples = sample_exact(&spec, 60, 17).unwrap();
        let rho = 8.0 / 21.0;
        let m = 12.0 / (21.0f64 * 21.0);
        let p = invert(&MacroState::new(rho, m).unwrap(), 1e-12).unwrap().params;

        // Identical per-sample values still leave the variance a rounding
        // residue of the mean (one ulp of 0.8, squared).
        let t1 = moment_test(&samples, |_| 1.0, &p).unwrap();
        assert!(t1.variance < 1e-28, "variance {}", t1.variance);
        assert_relative_eq!(t1.mean, 8.0 / 10.0, epsilon = 1e-14);
        assert!((t1.mean - t1.reference).abs() < 0.1);

        let tx = moment_test(&samples, |x| x, &p).unwrap();
        assert!(tx.variance < 1e-28);
        assert_relative_eq!(tx.mean, 12.0 / 100.0, epsilon = 1e-13);
        assert!((tx.mean - tx.reference).abs() < 0.05);
    }

    #[test]
    fn quadratic_statistic_fluctuates_around_the_profile_value() {
        let spec = CanonicalSpec::new(20, 16, 84).unwrap();
        let samples = sample_exact(&spec, 500, 23).unwrap();
        let rho = 16.0 / 41.0;
        let m = 84.0 / (41.0f64 * 41.0);
        let p = invert(&MacroState::new(rho, m).unwrap(), 1e-12).unwrap().params;
        let t = moment_test(&samples, |x| x * x, &p).unwrap();
        assert!(t.variance > 0.0);
        assert!(
            (t.mean - t.reference).abs() < 0.05,
            "mean {} vs reference {}",
            t.mean,
            t.reference
        );
    }

    #[test]
    fn staircase_height_is_extremal() {
        // Staircase at maximal M packs particles at the top: heights step
        // down once per site from K over the occupied block.
        let spec = CanonicalSpec::new(3, 2, 5).unwrap();
        let h = HeightFunction::from_config(&staircase(&spec).unwrap());
        assert_eq!(h.cells(), &[2, 2, 2, 2, 2, 2, 1]);
    }
}
