//! The exponential occupation family on `[-1, 1]`,
//!
//! ```text
//! beta(x; a, b) = e^{bx} a / (e^{bx} a + 1 - a),   0 < a < 1,  b real,
//! ```
//!
//! together with the two functionals that tie it to conserved quantities:
//! the mean density `F(a, b) = 1/2 int_{-1}^{1} beta dx` and the first moment
//! `G(a, b) = 1/4 int_{-1}^{1} x beta dx`. `(F, G)` fills the open region
//! `|m| < rho(1 - rho)/2`, and both have closed forms: a log ratio for `F`
//! and a log plus dilogarithm difference for `G`.
//!
//! Everything here is written to survive extreme parameters: `beta` is a
//! logistic evaluated stably, `log g` switches to its asymptote before
//! `exp` overflows, and the moment integral avoids the `1/b^2` cancellation
//! of the dilogarithm form near `b = 0` by integrating a symmetrized,
//! cancellation-free integrand with a fixed Gauss-Legendre rule.

use crate::error::{Error, Result};
use crate::quad;

const PI2_6: f64 = std::f64::consts::PI * std::f64::consts::PI / 6.0;

/// Threshold between the quadrature and dilogarithm evaluations of the
/// moment functional. Below it the closed form loses ~eps/b^2 absolute
/// accuracy to cancellation; above it the loss is under 1e-15.
const MOMENT_CLOSED_FORM_MIN_B: f64 = 0.5;

/// Parameters `(a, b)` of an exponential profile, `0 < a < 1`, `b` finite.
///
/// Internally the family is parametrized by `logit(a)` rather than `a`:
/// every formula below consumes the logit, and on steep density arcs the
/// logit stays exactly representable long after `a` itself has rounded to
/// `1.0`. Both `a` and `1 - a` are kept alongside it, each accurate to
/// relative rounding in its own scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileParams {
    a: f64,
    one_minus_a: f64,
    logit: f64,
    b: f64,
}

/// A density/moment pair `(rho, m)` strictly inside the admissible region
/// `0 < rho < 1`, `|m| < rho (1 - rho) / 2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MacroState {
    rho: f64,
    m: f64,
}

/// Numerically stable logistic `1 / (1 + e^{-u})`.
pub(crate) fn sigmoid(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

/// `sigmoid(u) * sigmoid(-u)`, accurate even where one factor underflows.
fn sigmoid_pair(u: f64) -> f64 {
    let e = (-u.abs()).exp();
    let d = 1.0 + e;
    e / (d * d)
}

/// `ln(1 + e^t)` without overflow; equals `-ln(1 - sigmoid(t))`.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

impl ProfileParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0 && a < 1.0) {
            return Err(Error::OutOfDomain(format!("a = {a} not in (0, 1)")));
        }
        if !b.is_finite() {
            return Err(Error::OutOfDomain(format!("b = {b} not finite")));
        }
        // 1 - a is exact for a >= 1/2 (Sterbenz), which is the only regime
        // where it is consumed on its own.
        Ok(Self {
            a,
            one_minus_a: 1.0 - a,
            logit: a.ln() - (-a).ln_1p(),
            b,
        })
    }

    /// Construct from `logit(a)` directly. This admits profiles so steep
    /// that `a` itself is not representable below `1.0` (or above `0.0`),
    /// which the density-arc parametrization produces routinely.
    pub(crate) fn from_logit(logit: f64, b: f64) -> Result<Self> {
        if !logit.is_finite() {
            return Err(Error::OutOfDomain(format!("logit = {logit} not finite")));
        }
        if !b.is_finite() {
            return Err(Error::OutOfDomain(format!("b = {b} not finite")));
        }
        Ok(Self {
            a: sigmoid(logit),
            one_minus_a: sigmoid(-logit),
            logit,
            b,
        })
    }

    /// The level parameter. May round to exactly `0.0` or `1.0` for
    /// internally built profiles with an extreme logit; the computations
    /// all run on the logit and are unaffected.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// `beta(x) = sigmoid(b x + logit a)`; strictly inside `(0, 1)`.
    pub fn beta(&self, x: f64) -> f64 {
        sigmoid(self.b * x + self.logit)
    }

    /// `d beta / dx = b beta (1 - beta)`, computed without forming `1 - beta`.
    pub fn beta_prime(&self, x: f64) -> f64 {
        self.b * sigmoid_pair(self.b * x + self.logit)
    }

    /// `ln g(x)` for `g(x) = e^{bx} a + 1 - a`.
    ///
    /// With `L = logit(a)` this is `softplus(L + bx) - softplus(L)`, but the
    /// direct difference loses the relative accuracy that density differences
    /// near `b = 0` need. Instead: for `a <= 1/2` the identity
    /// `ln g = ln1p(a expm1(u))` is cancellation-free, and for `a > 1/2` so
    /// is its mirror `ln g = u + ln1p((1-a) expm1(-u))`; each consumes the
    /// side of the sigmoid pair that is accurately known. Once `|u| = |bx|`
    /// reaches the `exp` overflow edge the softplus difference takes over
    /// (there its absolute error `~eps max(|L|, |L + u|)` is negligible
    /// against values of size `|u|`).
    pub fn log_g(&self, x: f64) -> f64 {
        let u = self.b * x;
        if u.abs() >= 700.0 {
            softplus(self.logit + u) - softplus(self.logit)
        } else if self.logit <= 0.0 {
            (self.a * u.exp_m1()).ln_1p()
        } else {
            u + (self.one_minus_a * (-u).exp_m1()).ln_1p()
        }
    }

    /// Mean density `F(a, b) = 1/2 int_{-1}^{1} beta dx`, by the closed form
    /// `(ln g(1) - ln g(-1)) / (2b)`; the `b = 0` limit is `a`.
    pub fn density(&self) -> f64 {
        if self.b == 0.0 {
            return self.a;
        }
        (self.log_g(1.0) - self.log_g(-1.0)) / (2.0 * self.b)
    }

    /// First moment `G(a, b) = 1/4 int_{-1}^{1} x beta dx`.
    ///
    /// Dispatches between [`Self::moment_by_closed_form`], which cancels
    /// catastrophically as `b -> 0`, and [`Self::moment_by_quadrature`],
    /// whose fixed rule degrades as the integrand's poles close in when `b`
    /// grows. Both are accurate to near rounding on a wide band around the
    /// switch point.
    pub fn moment(&self) -> f64 {
        let b = self.b;
        if b == 0.0 {
            return 0.0;
        }
        if b.abs() <= MOMENT_CLOSED_FORM_MIN_B {
            self.moment_by_quadrature()
        } else {
            self.moment_by_closed_form()
        }
    }

    /// The moment through the identity
    /// `beta(x) - beta(-x) = expm1(2bx) (1 - beta(x)) beta(-x)`,
    /// which turns the integral into `int_0^1 x expm1(2bx) (1-beta(x))
    /// beta(-x) dx`, an analytic integrand with no cancellation that a fixed
    /// 32-node rule integrates to machine precision for small `|b|` (its
    /// poles sit at distance `>= pi/|b|` from the interval).
    fn moment_by_quadrature(&self) -> f64 {
        let b = self.b;
        let logit = self.logit;
        let integrand = |x: f64| {
            let u = b * x;
            x * (2.0 * u).exp_m1() * sigmoid(-u - logit) * sigmoid(-u + logit)
        };
        0.25 * quad::integrate_gl32(integrand, 0.0, 1.0)
    }

    /// The closed form
    /// `(1/4b) ln(g(1) g(-1) / (1-a)^2) + (1/4b^2) [Li2(-c e^b) - Li2(-c e^{-b})]`
    /// with `c = a / (1 - a)`. With `L = logit(a)` the log part collapses to
    /// `(softplus(L+b) + softplus(L-b)) / 4b`.
    ///
    /// `G` is invariant under the particle-hole flip `a <-> 1 - a` (the
    /// profiles sum to `1` after `x -> -x`, and `x` integrates to zero), so
    /// the evaluation runs on `-|L|`: with the logit kept nonpositive, large
    /// dilogarithm arguments only occur together with large `b`, and the
    /// inversion quadratics `(L + b)^2 / 2` that would otherwise swamp a
    /// small moment in rounding noise never enter.
    fn moment_by_closed_form(&self) -> f64 {
        let b = self.b;
        let l = -self.logit.abs();
        let log_term = (softplus(l + b) + softplus(l - b)) / (4.0 * b);
        let dilog_term = (dilog_neg_exp(l + b) - dilog_neg_exp(l - b)) / (4.0 * b * b);
        log_term + dilog_term
    }

    /// The pair `(F, G)` as a macroscopic state; always strictly admissible.
    pub fn macro_state(&self) -> MacroState {
        MacroState {
            rho: self.density(),
            m: self.moment(),
        }
    }
}

impl MacroState {
    pub fn new(rho: f64, m: f64) -> Result<Self> {
        if !(rho.is_finite() && rho > 0.0 && rho < 1.0) {
            return Err(Error::OutOfDomain(format!("rho = {rho} not in (0, 1)")));
        }
        let half_width = 0.5 * rho * (1.0 - rho);
        if !(m.is_finite() && m.abs() < half_width) {
            return Err(Error::OutOfDomain(format!(
                "m = {m} not strictly inside (-{half_width}, {half_width}) for rho = {rho}"
            )));
        }
        Ok(Self { rho, m })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `v = rho (1 - rho)`, the single-site variance at density `rho`.
    pub fn variance(&self) -> f64 {
        self.rho * (1.0 - self.rho)
    }

    /// Half-width `v / 2` of the admissible moment range at this density.
    pub fn half_width(&self) -> f64 {
        0.5 * self.variance()
    }
}

/// Real dilogarithm `Li2(z) = -int_0^z ln(1 - t) / t dt` for `z <= 1`.
///
/// Power series on `|z| <= 1/2`; the reflection `Li2(z) + Li2(1-z) =
/// pi^2/6 - ln z ln(1-z)` for `z` near 1; the Landen transform
/// `Li2(z) = -Li2(z/(z-1)) - ln^2(1-z)/2` on `[-1, -1/2)`; and the inversion
/// `Li2(z) = -Li2(1/z) - pi^2/6 - ln^2(-z)/2` below `-1`. Every branch lands
/// the series argument inside `[-1/2, 1/2]`, so the relative error stays at
/// a few ulps, well under the 1e-13 contract.
pub fn dilog(z: f64) -> Result<f64> {
    if !z.is_finite() {
        if z == f64::NEG_INFINITY {
            return Err(Error::OutOfDomain("dilog(-inf) diverges".into()));
        }
        return Err(Error::OutOfDomain(format!("dilog({z}) undefined")));
    }
    if z > 1.0 {
        return Err(Error::OutOfDomain(format!(
            "dilog({z}) undefined for z > 1 (complex branch)"
        )));
    }
    Ok(dilog_inner(z))
}

fn dilog_inner(z: f64) -> f64 {
    if z == 1.0 {
        return PI2_6;
    }
    if z > 0.5 {
        // Reflection; 1 - z lands in (0, 1/2).
        let w = 1.0 - z;
        return PI2_6 - z.ln() * w.ln() - dilog_series(w);
    }
    if z >= -0.5 {
        return dilog_series(z);
    }
    if z >= -1.0 {
        // Landen; z/(z-1) lands in (1/3, 1/2].
        let w = z / (z - 1.0);
        let l = (1.0 - z).ln();
        return -dilog_series(w) - 0.5 * l * l;
    }
    // Inversion; 1/z lands in (-1, 0) and recurses at most once more.
    let l = (-z).ln();
    -dilog_inner(1.0 / z) - PI2_6 - 0.5 * l * l
}

/// `Li2(-e^E)` for any real `E`, never forming `e^E` when it would overflow.
/// Used by the moment closed form whose dilogarithm arguments are
/// `-c e^{+-b} = -e^{logit(a) +- b}`.
fn dilog_neg_exp(e: f64) -> f64 {
    if e <= 0.0 {
        dilog_inner(-e.exp())
    } else {
        -dilog_neg_exp(-e) - PI2_6 - 0.5 * e * e
    }
}

/// Power series `sum_{k>=1} z^k / k^2` for `|z| <= 1/2`.
fn dilog_series(z: f64) -> f64 {
    debug_assert!(z.abs() <= 0.5 + 1e-12);
    let mut power = z;
    let mut sum = z;
    for k in 2..200u32 {
        power *= z;
        let term = power / ((k * k) as f64);
        let next = sum + term;
        if next == sum {
            return sum;
        }
        sum = next;
    }
    sum
}
