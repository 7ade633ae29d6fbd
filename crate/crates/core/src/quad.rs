//! Gauss-Legendre quadrature.
//!
//! Fixed-order rules serve the few places where an integral is itself the
//! stable closed form (the small-`b` moment path, limit correlation
//! integrals). The adaptive driver is the independent oracle that tests hold
//! closed-form expressions against.

use std::sync::LazyLock;

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
///
/// Newton iteration on the Legendre recurrence from Chebyshev initial
/// guesses; nodes converge to machine precision in a handful of steps.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "rule order must be positive");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 1.0;
        for _ in 0..64 {
            let (mut p0, mut p1) = (1.0_f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            // P_n'(x) from P_n and P_{n-1}; x = +-1 never arises for n >= 1.
            deriv = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / deriv;
            x -= dx;
            if dx.abs() <= 1e-15 * x.abs().max(1.0) {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

static GL15: LazyLock<(Vec<f64>, Vec<f64>)> = LazyLock::new(|| gauss_legendre(15));
static GL32: LazyLock<(Vec<f64>, Vec<f64>)> = LazyLock::new(|| gauss_legendre(32));

fn apply_rule(rule: &(Vec<f64>, Vec<f64>), f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut sum = 0.0;
    for (&x, &w) in rule.0.iter().zip(&rule.1) {
        sum += w * f(c + h * x);
    }
    sum * h
}

/// Fixed 32-node rule on `[a, b]`. Exact to machine precision for integrands
/// analytic in a neighborhood much wider than the interval.
pub fn integrate_gl32(mut f: impl FnMut(f64) -> f64, a: f64, b: f64) -> f64 {
    apply_rule(&GL32, &mut f, a, b)
}

/// Adaptive Gauss-Legendre with absolute tolerance `tol`: bisect until the
/// 15-node estimate of a panel agrees with the sum over its halves.
pub fn integrate_adaptive(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &mut impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = apply_rule(&GL15, f, a, mid);
        let right = apply_rule(&GL15, f, mid, b);
        if (left + right - whole).abs() <= tol || depth >= 48 {
            return left + right;
        }
        recurse(f, a, mid, left, 0.5 * tol, depth + 1)
            + recurse(f, mid, b, right, 0.5 * tol, depth + 1)
    }
    let whole = apply_rule(&GL15, &mut f, a, b);
    recurse(&mut f, a, b, whole, tol, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn fixed_rule_integrates_polynomials_exactly() {
        // An n-node rule is exact up to degree 2n - 1.
        for n in [1, 2, 3, 5, 8, 16, 32] {
            let (xs, ws) = gauss_legendre(n);
            for deg in 0..(2 * n) {
                let got: f64 = xs
                    .iter()
                    .zip(&ws)
                    .map(|(&x, &w)| w * x.powi(deg as i32))
                    .sum();
                let want = if deg % 2 == 0 {
                    2.0 / (deg as f64 + 1.0)
                } else {
                    0.0
                };
                assert!(
                    (got - want).abs() < 2e-14,
                    "n={n} deg={deg}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1, 4, 9, 27, 64] {
            let (_, ws) = gauss_legendre(n);
            assert_relative_eq!(ws.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
        }
    }

    // softplus(u) = ln(1 + e^u), stable for large |u|; its difference over
    // an interval is the exact antiderivative of the logistic function.
    fn softplus(u: f64) -> f64 {
        if u > 0.0 {
            u + (-u).exp().ln_1p()
        } else {
            u.exp().ln_1p()
        }
    }

    #[test]
    fn adaptive_matches_known_integrals() {
        let e = std::f64::consts::E;
        let got = integrate_adaptive(|x| x.exp(), -1.0, 1.0, 1e-13);
        assert_relative_eq!(got, e - 1.0 / e, epsilon = 1e-12);

        // A sharp logistic step exercises actual panel refinement.
        let got = integrate_adaptive(|x| 1.0 / (1.0 + (-40.0 * x).exp()), -1.0, 1.0, 1e-13);
        let want = (softplus(40.0) - softplus(-40.0)) / 40.0;
        assert_relative_eq!(got, want, epsilon = 1e-12);
    }
}
