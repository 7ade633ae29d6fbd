//! Joint law of the pair `(S, T) = (sum eta_k, sum k eta_k)` for independent
//! Bernoulli occupations on sites `1..=n`, with an optional small set of
//! defect sites forced empty, and its bivariate Gaussian local approximation.
//!
//! The exact law comes from a dense dynamic program; the Gaussian comparison
//! is the scaled sup distance `sup_{s,t} |sqrt(UV) P(s,t) - q0(y1, y2)|`,
//! which the local limit theorem drives to zero like `n^{-1/2}`.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::integrate_adaptive;

/// Caps: the dense PMF table costs `O(n^2 * sum k) = O(n^4)` time.
pub const PMF_MAX_SITES: usize = 250;
/// The Fourier cross-check is a dense double transform, far costlier.
pub const CHAR_FN_INVERSION_MAX_SITES: usize = 24;
const MAX_DEFECTS: usize = 8;

/// Independent-site occupation model with forced-empty defect sites.
#[derive(Debug, Clone)]
pub struct WeightedSumModel {
    alpha: Vec<f64>,
    defects: BTreeSet<usize>,
}

/// First and second moments of `(S, T)`; `lambda` is the correlation.
#[derive(Debug, Clone, Copy)]
pub struct MomentSummary {
    /// `E[S]`.
    pub e: f64,
    /// `E[T]`.
    pub f: f64,
    /// `Var S`.
    pub u: f64,
    /// `Var T`.
    pub v: f64,
    /// `Corr(S, T)`, `NaN` when fewer than two sites are active.
    pub lambda: f64,
    pub active_sites: usize,
}

impl MomentSummary {
    pub fn degenerate(&self) -> bool {
        !(self.lambda.is_finite() && self.lambda.abs() < 1.0)
    }
}

impl WeightedSumModel {
    /// Site `k` (1-based) gets occupation probability `alpha[k - 1]`; sites
    /// listed in `defects` are conditioned to stay empty.
    pub fn from_alpha(alpha: Vec<f64>, defects: BTreeSet<usize>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::OutOfDomain("model needs at least one site".into()));
        }
        for (i, &a) in alpha.iter().enumerate() {
            if !(a.is_finite() && a > 0.0 && a < 1.0) {
                return Err(Error::OutOfDomain(format!(
                    "alpha[{}] = {a} is not in (0, 1)",
                    i + 1
                )));
            }
        }
        if defects.len() > MAX_DEFECTS {
            return Err(Error::OutOfDomain(format!(
                "{} defect sites exceed the cap {MAX_DEFECTS}",
                defects.len()
            )));
        }
        if let Some(&bad) = defects.iter().find(|&&d| d < 1 || d > alpha.len()) {
            return Err(Error::OutOfDomain(format!(
                "defect site {bad} outside 1..={}",
                alpha.len()
            )));
        }
        Ok(Self { alpha, defects })
    }

    pub fn from_const(n: usize, alpha: f64, defects: BTreeSet<usize>) -> Result<Self> {
        Self::from_alpha(vec![alpha; n], defects)
    }

    /// Sample a probability profile on `(0, 1]`: `alpha_k = f(k / n)`.
    pub fn from_profile(
        n: usize,
        f: impl Fn(f64) -> f64,
        defects: BTreeSet<usize>,
    ) -> Result<Self> {
        let alpha = (1..=n).map(|k| f(k as f64 / n as f64)).collect();
        Self::from_alpha(alpha, defects)
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn defects(&self) -> &BTreeSet<usize> {
        &self.defects
    }

    pub fn active_sites(&self) -> usize {
        self.alpha.len() - self.defects.len()
    }

    fn active(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.alpha
            .iter()
            .enumerate()
            .map(|(i, &a)| (i + 1, a))
            .filter(|(k, _)| !self.defects.contains(k))
    }

    pub fn moments(&self) -> MomentSummary {
        let mut e = KahanSum::new();
        let mut f = KahanSum::new();
        let mut u = KahanSum::new();
        let mut v = KahanSum::new();
        let mut cross = KahanSum::new();
        for (k, a) in self.active() {
            let kf = k as f64;
            let var = a * (1.0 - a);
            e.add(a);
            f.add(kf * a);
            u.add(var);
            v.add(kf * kf * var);
            cross.add(kf * var);
        }
        let (u, v) = (u.value(), v.value());
        let active = self.active_sites();
        let lambda = if active >= 2 {
            cross.value() / (u * v).sqrt()
        } else {
            f64::NAN
        };
        MomentSummary {
            e: e.value(),
            f: f.value(),
            u,
            v,
            lambda,
            active_sites: active,
        }
    }

    /// Exact joint law of `(S, T)` on the full rectangle
    /// `[0, active] x [0, sum of active k]`, by one dense in-place sweep per
    /// site.
    pub fn exact_pmf(&self) -> Result<JointPmf> {
        if self.n() > PMF_MAX_SITES {
            return Err(Error::CapExceeded(format!(
                "exact law is capped at {PMF_MAX_SITES} sites, got {}",
                self.n()
            )));
        }
        let smax = self.active_sites();
        let tmax: usize = self.active().map(|(k, _)| k).sum();
        let w = tmax + 1;
        let mut data = vec![0.0f64; (smax + 1) * w];
        data[0] = 1.0;
        for (k, a) in self.active() {
            let keep = 1.0 - a;
            for s in (0..=smax).rev() {
                let row = s * w;
                for t in (0..=tmax).rev() {
                    let from = if s >= 1 && t >= k {
                        data[row - w + t - k]
                    } else {
                        0.0
                    };
                    data[row + t] = keep * data[row + t] + a * from;
                }
            }
        }
        Ok(JointPmf {
            n: self.n(),
            defect_count: self.defects.len(),
            smax,
            tmax,
            data,
            moments: self.moments(),
        })
    }

    /// Characteristic function `E[e^{i(theta S + phi T)}]`.
    pub fn char_fn(&self, theta: f64, phi: f64) -> Complex64 {
        let mut out = Complex64::new(1.0, 0.0);
        for (k, a) in self.active() {
            out *= Complex64::new(1.0 - a, 0.0)
                + a * Complex64::new(0.0, theta + k as f64 * phi).exp();
        }
        out
    }

    /// Independent reconstruction of the joint law by inverting the
    /// characteristic function on the exact frequency grid. Quadratically
    /// more expensive than [`WeightedSumModel::exact_pmf`], so tightly
    /// capped; intended as a cross-check, not a workhorse.
    pub fn pmf_via_char_fn(&self) -> Result<JointPmf> {
        if self.n() > CHAR_FN_INVERSION_MAX_SITES {
            return Err(Error::CapExceeded(format!(
                "characteristic-function inversion is capped at \
                 {CHAR_FN_INVERSION_MAX_SITES} sites, got {}",
                self.n()
            )));
        }
        let smax = self.active_sites();
        let tmax: usize = self.active().map(|(k, _)| k).sum();
        let ns = smax + 1;
        let nt = tmax + 1;
        // chi on the product grid theta_j = 2 pi j / ns, phi_l = 2 pi l / nt.
        let mut chi = vec![Complex64::new(0.0, 0.0); ns * nt];
        for j in 0..ns {
            let theta = TAU * j as f64 / ns as f64;
            for l in 0..nt {
                let phi = TAU * l as f64 / nt as f64;
                chi[j * nt + l] = self.char_fn(theta, phi);
            }
        }
        // Two separable discrete transforms: first over phi, then over theta.
        let mut half = vec![Complex64::new(0.0, 0.0); ns * nt];
        for j in 0..ns {
            for t in 0..nt {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in 0..nt {
                    let ang = -TAU * (l as f64) * (t as f64) / nt as f64;
                    acc += chi[j * nt + l] * Complex64::new(0.0, ang).exp();
                }
                half[j * nt + t] = acc;
            }
        }
        let mut data = vec![0.0f64; ns * nt];
        let norm = 1.0 / (ns as f64 * nt as f64);
        for s in 0..ns {
            for t in 0..nt {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..ns {
                    let ang = -TAU * (j as f64) * (s as f64) / ns as f64;
                    acc += half[j * nt + t] * Complex64::new(0.0, ang).exp();
                }
                data[s * nt + t] = acc.re * norm;
            }
        }
        Ok(JointPmf {
            n: self.n(),
            defect_count: self.defects.len(),
            smax,
            tmax,
            data,
            moments: self.moments(),
        })
    }
}

/// Standardized bivariate Gaussian density with correlation `lambda`.
pub fn gaussian_q0(y1: f64, y2: f64, lambda: f64) -> Result<f64> {
    let det = 1.0 - lambda * lambda;
    if !(det > 0.0) {
        return Err(Error::DegenerateCorrelation(lambda));
    }
    let quad = (y1 * y1 - 2.0 * lambda * y1 * y2 + y2 * y2) / (2.0 * det);
    Ok((-quad).exp() / (TAU * det.sqrt()))
}

/// Dense joint law of `(S, T)` with its moment summary.
#[derive(Debug, Clone)]
pub struct JointPmf {
    n: usize,
    defect_count: usize,
    smax: usize,
    tmax: usize,
    /// Row-major over `s`, then `t`.
    data: Vec<f64>,
    moments: MomentSummary,
}

impl JointPmf {
    pub fn smax(&self) -> usize {
        self.smax
    }

    pub fn tmax(&self) -> usize {
        self.tmax
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn moments(&self) -> MomentSummary {
        self.moments
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `P(S = s, T = t)`; zero off the table.
    pub fn prob(&self, s: usize, t: usize) -> f64 {
        if s > self.smax || t > self.tmax {
            0.0
        } else {
            self.data[s * (self.tmax + 1) + t]
        }
    }

    /// Total mass; exactly one up to rounding in the sweep.
    pub fn mass(&self) -> f64 {
        let mut acc = KahanSum::new();
        for &p in &self.data {
            acc.add(p);
        }
        acc.value()
    }

    pub fn marginal_s(&self) -> Vec<f64> {
        let w = self.tmax + 1;
        (0..=self.smax)
            .map(|s| {
                let mut acc = KahanSum::new();
                for &p in &self.data[s * w..(s + 1) * w] {
                    acc.add(p);
                }
                acc.value()
            })
            .collect()
    }

    pub fn marginal_t(&self) -> Vec<f64> {
        let w = self.tmax + 1;
        let mut acc = vec![KahanSum::new(); w];
        for s in 0..=self.smax {
            for t in 0..w {
                acc[t].add(self.data[s * w + t]);
            }
        }
        acc.into_iter().map(|a| a.value()).collect()
    }

    /// Scaled sup distance to the Gaussian local approximation:
    /// `max_{s,t} |sqrt(UV) P(s,t) - q0((s-E)/sqrt(U), (t-F)/sqrt(V))|`
    /// over the whole table.
    pub fn sup_error(&self) -> Result<f64> {
        let mm = self.moments;
        if mm.degenerate() {
            return Err(Error::DegenerateCorrelation(mm.lambda));
        }
        let su = mm.u.sqrt();
        let sv = mm.v.sqrt();
        let scale = su * sv;
        let w = self.tmax + 1;
        let mut worst = 0.0f64;
        for s in 0..=self.smax {
            let y1 = (s as f64 - mm.e) / su;
            for t in 0..w {
                let y2 = (t as f64 - mm.f) / sv;
                let q0 = gaussian_q0(y1, y2, mm.lambda)?;
                let diff = (scale * self.data[s * w + t] - q0).abs();
                if diff > worst {
                    worst = diff;
                }
            }
        }
        Ok(worst)
    }

    /// Binary dump: eight little-endian `f64` header words
    /// `[magic, version, n, smax, tmax, defects, 0, 0]` followed by the
    /// row-major table.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        let header = [
            PMF_BINARY_MAGIC,
            1.0,
            self.n as f64,
            self.smax as f64,
            self.tmax as f64,
            self.defect_count as f64,
            0.0,
            0.0,
        ];
        for x in header.iter().chain(self.data.iter()) {
            w.write_all(&x.to_le_bytes())?;
        }
        Ok(())
    }

    /// CSV dump with one row per lattice point: the exact probability, the
    /// Gaussian local approximation, and the scaled absolute gap.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        let mm = self.moments;
        if mm.degenerate() {
            return Err(Error::DegenerateCorrelation(mm.lambda));
        }
        let su = mm.u.sqrt();
        let sv = mm.v.sqrt();
        let scale = su * sv;
        writeln!(w, "K,L,P,q0,abs_error")?;
        let width = self.tmax + 1;
        for s in 0..=self.smax {
            let y1 = (s as f64 - mm.e) / su;
            for t in 0..width {
                let y2 = (t as f64 - mm.f) / sv;
                let q0 = gaussian_q0(y1, y2, mm.lambda)?;
                let p = self.data[s * width + t];
                writeln!(
                    w,
                    "{s},{t},{:.16e},{:.16e},{:.16e}",
                    p,
                    q0,
                    (scale * p - q0).abs()
                )?;
            }
        }
        Ok(())
    }
}

pub const PMF_BINARY_MAGIC: f64 = 112358.0;

/// Limiting correlation of `(S, T)` for occupation profiles `alpha_k =
/// f(k/n)`: the `n -> infinity` value of `lambda` as Riemann sums become
/// integrals of `v = f (1 - f)` against `1, x, x^2` on `[0, 1]`.
pub fn limit_lambda(f: impl Fn(f64) -> f64) -> Result<f64> {
    let v = |x: f64| {
        let a = f(x);
        a * (1.0 - a)
    };
    let m0 = integrate_adaptive(&v, 0.0, 1.0, 1e-13);
    let m1 = integrate_adaptive(|x| x * v(x), 0.0, 1.0, 1e-13);
    let m2 = integrate_adaptive(|x| x * x * v(x), 0.0, 1.0, 1e-13);
    if !(m0 > 0.0 && m2 > 0.0) {
        return Err(Error::OutOfDomain(
            "profile has no variance mass on (0, 1)".into(),
        ));
    }
    Ok(m1 / (m0 * m2).sqrt())
}

/// Compensated accumulator for long reductions.
#[derive(Debug, Clone, Copy)]
struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    fn new() -> Self {
        Self {
            sum: 0.0,
            carry: 0.0,
        }
    }

    fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn no_defects() -> BTreeSet<usize> {
        BTreeSet::new()
    }

    #[test]
    fn constructor_validates_inputs() {
        assert!(WeightedSumModel::from_alpha(vec![], no_defects()).is_err());
        assert!(WeightedSumModel::from_alpha(vec![0.5, 1.0], no_defects()).is_err());
        assert!(WeightedSumModel::from_alpha(vec![0.5, -0.1], no_defects()).is_err());
        assert!(WeightedSumModel::from_const(5, 0.5, [0].into()).is_err());
        assert!(WeightedSumModel::from_const(5, 0.5, [6].into()).is_err());
        assert!(WeightedSumModel::from_const(20, 0.5, (1..=9).collect()).is_err());
        assert!(WeightedSumModel::from_const(20, 0.5, (1..=8).collect()).is_ok());
    }

    #[test]
    fn moments_match_closed_forms_for_constant_alpha() {
        let n = 37usize;
        let model = WeightedSumModel::from_const(n, 0.5, no_defects()).unwrap();
        let mm = model.moments();
        let nf = n as f64;
        assert_relative_eq!(mm.e, nf / 2.0, epsilon = 1e-12);
        assert_relative_eq!(mm.f, nf * (nf + 1.0) / 4.0, epsilon = 1e-9);
        assert_relative_eq!(mm.u, nf / 4.0, epsilon = 1e-12);
        assert_relative_eq!(mm.v, nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0, epsilon = 1e-6);
        let want = (3.0 * (nf + 1.0) / (2.0 * (2.0 * nf + 1.0))).sqrt();
        assert_relative_eq!(mm.lambda, want, epsilon = 1e-13);
    }

    #[test]
    fn defects_drop_their_sites_from_the_moments() {
        let model = WeightedSumModel::from_const(10, 0.3, [2, 7].into()).unwrap();
        let mm = model.moments();
        assert_eq!(mm.active_sites, 8);
        let e_want: f64 = (1..=10)
            .filter(|k| *k != 2 && *k != 7)
            .map(|_| 0.3)
            .sum();
        assert_relative_eq!(mm.e, e_want, epsilon = 1e-14);
        let f_want: f64 = (1..=10)
            .filter(|k| *k != 2 && *k != 7)
            .map(|k| 0.3 * k as f64)
            .sum();
        assert_relative_eq!(mm.f, f_want, epsilon = 1e-13);
    }

    #[test]
    fn single_active_site_is_degenerate() {
        let model = WeightedSumModel::from_const(3, 0.4, [1, 3].into()).unwrap();
        assert!(model.moments().degenerate());
        assert!(model.exact_pmf().unwrap().sup_error().is_err());
    }

    #[test]
    fn pmf_matches_subset_counting_for_fair_sites() {
        // alpha = 1/2 everywhere: P(s, t) = #{A : |A| = s, sum A = t} / 2^n.
        let model = WeightedSumModel::from_const(3, 0.5, no_defects()).unwrap();
        let pmf = model.exact_pmf().unwrap();
        assert_eq!(pmf.smax(), 3);
        assert_eq!(pmf.tmax(), 6);
        let expected = [
            ((0, 0), 1.0),
            ((1, 1), 1.0),
            ((1, 2), 1.0),
            ((1, 3), 1.0),
            ((2, 3), 1.0),
            ((2, 4), 1.0),
            ((2, 5), 1.0),
            ((3, 6), 1.0),
        ];
        for ((s, t), c) in expected {
            assert_relative_eq!(pmf.prob(s, t), c / 8.0, epsilon = 1e-15);
        }
        assert_eq!(pmf.prob(2, 1), 0.0);
        assert_relative_eq!(pmf.mass(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn pmf_matches_brute_force_with_defects() {
        let alpha: Vec<f64> = (1..=10).map(|k| 0.1 + 0.07 * k as f64).collect();
        let model = WeightedSumModel::from_alpha(alpha.clone(), [2, 7].into()).unwrap();
        let pmf = model.exact_pmf().unwrap();
        let mut brute = vec![vec![0.0f64; pmf.tmax() + 1]; pmf.smax() + 1];
        for mask in 0u32..(1 << 10) {
            if mask >> 1 & 1 == 1 || mask >> 6 & 1 == 1 {
                continue; // defect sites 2 and 7 are forced empty
            }
            let mut p = 1.0;
            let mut s = 0usize;
            let mut t = 0usize;
            for k in 1..=10usize {
                let occ = mask >> (k - 1) & 1 == 1;
                if k == 2 || k == 7 {
                    continue;
                }
                if occ {
                    p *= alpha[k - 1];
                    s += 1;
                    t += k;
                } else {
                    p *= 1.0 - alpha[k - 1];
                }
            }
            brute[s][t] += p;
        }
        for s in 0..=pmf.smax() {
            for t in 0..=pmf.tmax() {
                assert_relative_eq!(pmf.prob(s, t), brute[s][t], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn pmf_moments_match_analytic_moments() {
        let model = WeightedSumModel::from_profile(30, |x| 0.2 + 0.5 * x, no_defects()).unwrap();
        let pmf = model.exact_pmf().unwrap();
        let mm = model.moments();
        let ms = pmf.marginal_s();
        let mt = pmf.marginal_t();
        let es: f64 = ms.iter().enumerate().map(|(s, p)| s as f64 * p).sum();
        let et: f64 = mt.iter().enumerate().map(|(t, p)| t as f64 * p).sum();
        assert_relative_eq!(es, mm.e, epsilon = 1e-10);
        assert_relative_eq!(et, mm.f, epsilon = 1e-8);
        let vs: f64 = ms
            .iter()
            .enumerate()
            .map(|(s, p)| (s as f64 - es).powi(2) * p)
            .sum();
        assert_relative_eq!(vs, mm.u, epsilon = 1e-9);
    }

    #[test]
    fn gaussian_peak_and_degeneracy() {
        let q = gaussian_q0(0.0, 0.0, 0.6).unwrap();
        assert_relative_eq!(q, 1.0 / (TAU * (1.0f64 - 0.36).sqrt()), epsilon = 1e-15);
        assert!(gaussian_q0(0.0, 0.0, 1.0).is_err());
        assert!(gaussian_q0(0.0, 0.0, -1.2).is_err());
        // Symmetric in joint sign flips.
        assert_relative_eq!(
            gaussian_q0(0.7, -0.3, 0.4).unwrap(),
            gaussian_q0(-0.7, 0.3, 0.4).unwrap(),
            epsilon = 1e-16
        );
    }

    #[test]
    fn sup_error_shrinks_as_n_grows() {
        let e40 = WeightedSumModel::from_const(40, 0.5, no_defects())
            .unwrap()
            .exact_pmf()
            .unwrap()
            .sup_error()
            .unwrap();
        let e80 = WeightedSumModel::from_const(80, 0.5, no_defects())
            .unwrap()
            .exact_pmf()
            .unwrap()
            .sup_error()
            .unwrap();
        assert!(e80 < e40, "sup errors {e40} -> {e80}");
        assert!(e40 < 0.1, "sup error at n = 40 is {e40}");
    }

    #[test]
    fn char_fn_basics() {
        let model = WeightedSumModel::from_const(6, 0.3, [4].into()).unwrap();
        let one = model.char_fn(0.0, 0.0);
        assert_relative_eq!(one.re, 1.0, epsilon = 1e-15);
        assert_relative_eq!(one.im, 0.0, epsilon = 1e-15);
        let z = model.char_fn(0.8, -1.3);
        assert!(z.norm() <= 1.0 + 1e-14);
    }

    #[test]
    fn fourier_inversion_reproduces_the_exact_law() {
        let alpha: Vec<f64> = (1..=9).map(|k| 0.15 + 0.08 * k as f64).collect();
        let model = WeightedSumModel::from_alpha(alpha, [3].into()).unwrap();
        let exact = model.exact_pmf().unwrap();
        let fourier = model.pmf_via_char_fn().unwrap();
        assert_eq!(exact.smax(), fourier.smax());
        assert_eq!(exact.tmax(), fourier.tmax());
        let mut worst = 0.0f64;
        for s in 0..=exact.smax() {
            for t in 0..=exact.tmax() {
                worst = worst.max((exact.prob(s, t) - fourier.prob(s, t)).abs());
            }
        }
        assert!(worst < 1e-12, "largest discrepancy {worst}");
    }

    #[test]
    fn limit_lambda_of_flat_profile_is_sqrt3_over_2() {
        let lam = limit_lambda(|_| 0.5).unwrap();
        assert_relative_eq!(lam, 3.0f64.sqrt() / 2.0, epsilon = 1e-11);
    }

    #[test]
    fn finite_n_lambda_approaches_the_limit() {
        let lam_inf = limit_lambda(|_| 0.37).unwrap();
        let lam_small = WeightedSumModel::from_const(20, 0.37, no_defects())
            .unwrap()
            .moments()
            .lambda;
        let lam_big = WeightedSumModel::from_const(200, 0.37, no_defects())
            .unwrap()
            .moments()
            .lambda;
        assert!((lam_big - lam_inf).abs() < (lam_small - lam_inf).abs());
        assert!((lam_big - lam_inf).abs() < 2e-3);
    }

    #[test]
    fn binary_export_round_trips() {
        let model = WeightedSumModel::from_const(5, 0.4, [2].into()).unwrap();
        let pmf = model.exact_pmf().unwrap();
        let mut buf = Vec::new();
        pmf.write_binary(&mut buf).unwrap();
        let words: Vec<f64> = buf
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        assert_eq!(words[0], PMF_BINARY_MAGIC);
        assert_eq!(words[1], 1.0);
        assert_eq!(words[2], 5.0);
        assert_eq!(words[3], pmf.smax() as f64);
        assert_eq!(words[4], pmf.tmax() as f64);
        assert_eq!(words[5], 1.0);
        assert_eq!(words.len(), 8 + pmf.data().len());
        assert_eq!(&words[8..], pmf.data());
    }

    #[test]
    fn csv_export_has_one_row_per_lattice_point() {
        let model = WeightedSumModel::from_const(4, 0.35, no_defects()).unwrap();
        let pmf = model.exact_pmf().unwrap();
        let mut buf = Vec::new();
        pmf.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "K,L,P,q0,abs_error");
        assert_eq!(lines.len(), 1 + (pmf.smax() + 1) * (pmf.tmax() + 1));
        assert!(lines[1].starts_with("0,0,"));
    }

    #[test]
    fn cap_violations_are_reported() {
        let model = WeightedSumModel::from_const(260, 0.5, no_defects()).unwrap();
        assert!(matches!(model.exact_pmf(), Err(Error::CapExceeded(_))));
        let model = WeightedSumModel::from_const(30, 0.5, no_defects()).unwrap();
        assert!(matches!(model.pmf_via_char_fn(), Err(Error::CapExceeded(_))));
    }

    #[test]
    fn profile_constructor_samples_at_k_over_n() {
        let model = WeightedSumModel::from_profile(4, |x| x / 2.0, no_defects()).unwrap();
        let want = [0.125, 0.25, 0.375, 0.5];
        for (a, w) in model.alpha().iter().zip(want) {
            assert_relative_eq!(*a, w, epsilon = 1e-15);
        }
    }
}
