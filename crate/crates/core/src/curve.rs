//! Sampled curves on an interval, either piecewise linear or right-continuous
//! step functions, with an exact supremum distance between the two kinds.

use crate::error::{Error, Result};
use std::io::Write;

/// How values between grid points are interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Interpolation {
    /// Straight lines between consecutive grid points.
    Linear,
    /// `values[i]` holds on `[grid[i], grid[i+1])`; the last value holds at
    /// the right endpoint.
    RightStep,
}

/// A curve sampled on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    xs: Vec<f64>,
    ys: Vec<f64>,
    interp: Interpolation,
}

impl Curve {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, interp: Interpolation) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::InvalidCurve(format!(
                "{} grid points but {} values",
                xs.len(),
                ys.len()
            )));
        }
        if xs.len() < 2 {
            return Err(Error::InvalidCurve("need at least 2 grid points".into()));
        }
        if !xs.iter().all(|x| x.is_finite()) || !ys.iter().all(|y| y.is_finite()) {
            return Err(Error::InvalidCurve("non-finite entry".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidCurve("grid not strictly increasing".into()));
        }
        Ok(Self { xs, ys, interp })
    }

    pub fn linear(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Self::new(xs, ys, Interpolation::Linear)
    }

    pub fn step(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        Self::new(xs, ys, Interpolation::RightStep)
    }

    /// Uniform grid of `n >= 2` points spanning `[a, b]`.
    pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        let h = (b - a) / (n - 1) as f64;
        (0..n)
            .map(|i| if i == n - 1 { b } else { a + h * i as f64 })
            .collect()
    }

    pub fn grid(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn x_min(&self) -> f64 {
        self.xs[0]
    }

    pub fn x_max(&self) -> f64 {
        *self.xs.last().unwrap()
    }

    /// Index of the segment containing `x`: largest `i` with `xs[i] <= x`,
    /// clamped to valid segment starts.
    fn segment(&self, x: f64) -> usize {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&g| g <= x);
        i.clamp(1, n - 1) - 1
    }

    /// Value at `x`, clamped to the endpoint values outside the domain.
    /// Step curves evaluate right-continuously.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.xs.len();
        if x <= self.xs[0] {
            return self.ys[0];
        }
        if x >= self.xs[n - 1] {
            return self.ys[n - 1];
        }
        let i = self.segment(x);
        match self.interp {
            Interpolation::RightStep => self.ys[i],
            Interpolation::Linear => {
                let t = (x - self.xs[i]) / (self.xs[i + 1] - self.xs[i]);
                self.ys[i] + t * (self.ys[i + 1] - self.ys[i])
            }
        }
    }

    /// Left limit at `x`. Differs from `eval` only for step curves at their
    /// own grid points, where the jump sits.
    pub fn eval_left(&self, x: f64) -> f64 {
        match self.interp {
            Interpolation::Linear => self.eval(x),
            Interpolation::RightStep => {
                let n = self.xs.len();
                if x <= self.xs[0] {
                    return self.ys[0];
                }
                if x > self.xs[n - 1] {
                    return self.ys[n - 1];
                }
                // Largest i with xs[i] strictly below x.
                let i = self.xs.partition_point(|&g| g < x);
                self.ys[i.clamp(1, n - 1) - 1]
            }
        }
    }

    /// Same curve with the grid translated by `dx`.
    pub fn shift_x(&self, dx: f64) -> Curve {
        Curve {
            xs: self.xs.iter().map(|x| x + dx).collect(),
            ys: self.ys.clone(),
            interp: self.interp,
        }
    }

    /// Two-column CSV with 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W, x_name: &str, y_name: &str) -> std::io::Result<()> {
        writeln!(w, "{x_name},{y_name}")?;
        for (x, y) in self.xs.iter().zip(&self.ys) {
            writeln!(w, "{x:.16e},{y:.16e}")?;
        }
        Ok(())
    }
}

/// Supremum distance between two curves on a common interval.
///
/// Candidates are the union of both grids; at every candidate both one-sided
/// limits are compared, which makes the result exact for step-vs-linear and
/// step-vs-step comparisons (between neighboring candidates a step curve is
/// constant and a linear curve is monotone, so the gap is extremal at
/// candidate points).
pub fn sup_distance(a: &Curve, b: &Curve) -> Result<f64> {
    let scale = a.x_max() - a.x_min();
    let tol = 1e-9 * scale.max(1.0);
    if (a.x_min() - b.x_min()).abs() > tol || (a.x_max() - b.x_max()).abs() > tol {
        return Err(Error::IntervalMismatch(
            a.x_min(),
            a.x_max(),
            b.x_min(),
            b.x_max(),
        ));
    }
    let mut best = 0.0_f64;
    for x in a.grid().iter().chain(b.grid().iter()) {
        let right = (a.eval(*x) - b.eval(*x)).abs();
        let left = (a.eval_left(*x) - b.eval_left(*x)).abs();
        best = best.max(right).max(left);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_eval_interpolates() {
        let c = Curve::linear(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 0.0]).unwrap();
        assert_eq!(c.eval(0.5), 1.0);
        assert_eq!(c.eval(1.5), 1.0);
        assert_eq!(c.eval(-3.0), 0.0);
        assert_eq!(c.eval(9.0), 0.0);
    }

    #[test]
    fn step_eval_is_right_continuous() {
        let c = Curve::step(vec![0.0, 1.0, 2.0], vec![5.0, 3.0, 0.0]).unwrap();
        assert_eq!(c.eval(0.0), 5.0);
        assert_eq!(c.eval(0.99), 5.0);
        assert_eq!(c.eval(1.0), 3.0);
        assert_eq!(c.eval_left(1.0), 5.0);
        assert_eq!(c.eval(2.0), 0.0);
        assert_eq!(c.eval_left(2.0), 3.0);
    }

    #[test]
    fn sup_distance_sees_jumps() {
        // Step at x = 1 jumps from 1 to 0; the zero line differs by 1 in the
        // left limit at the jump even though eval at grid points says 0 there.
        let s = Curve::step(vec![0.0, 1.0], vec![1.0, 0.0]).unwrap();
        let z = Curve::linear(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(sup_distance(&s, &z).unwrap(), 1.0);
    }

    #[test]
    fn sup_distance_rejects_different_intervals() {
        let a = Curve::linear(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        let b = Curve::linear(vec![0.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            sup_distance(&a, &b),
            Err(Error::IntervalMismatch(..))
        ));
    }

    #[test]
    fn constructor_rejects_bad_grids() {
        assert!(Curve::linear(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(Curve::linear(vec![0.0], vec![1.0]).is_err());
        assert!(Curve::linear(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(Curve::linear(vec![0.0, f64::NAN], vec![1.0, 1.0]).is_err());
    }
}
