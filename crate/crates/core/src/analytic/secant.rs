//! Bracketing secant root finder with a shape-warped interpolation step.
//!
//! The plain secant (regula falsi) step interpolates `f` linearly in `x`.
//! The generalized step interpolates linearly in `h(x)` for a monotone shape
//! function `h` and maps the root of that line back through `h^-1`. When `f`
//! is affine in `h(x)` the first step is exact.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Invertible, strictly monotone shape function used by the interpolation.
pub trait Shape {
    fn forward(&self, x: f64) -> f64;
    fn inverse(&self, u: f64) -> f64;
}

/// `h(x) = x`; reduces the method to the ordinary secant.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Shape for Identity {
    fn forward(&self, x: f64) -> f64 {
        x
    }

    fn inverse(&self, u: f64) -> f64 {
        u
    }
}

/// `h(x) = log2(x)` on `x > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Log2;

impl Shape for Log2 {
    fn forward(&self, x: f64) -> f64 {
        x.log2()
    }

    fn inverse(&self, u: f64) -> f64 {
        u.exp2()
    }
}

/// Shape selector for callers that pick the method at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    /// Plain secant.
    Linear,
    /// Generalized secant with a logarithmic shape.
    Log2,
}

impl Shape for ShapeKind {
    fn forward(&self, x: f64) -> f64 {
        match self {
            ShapeKind::Linear => Identity.forward(x),
            ShapeKind::Log2 => Log2.forward(x),
        }
    }

    fn inverse(&self, u: f64) -> f64 {
        match self {
            ShapeKind::Linear => Identity.inverse(u),
            ShapeKind::Log2 => Log2.inverse(u),
        }
    }
}

/// When to accept the current iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// `|y_{i+1} - y_i| <= eps` between successive function values.
    Step(f64),
    /// `|f(x0)| < eps`.
    Residual(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecantOutcome {
    pub root: f64,
    pub value: f64,
    pub iterations: usize,
    /// Iterations that fell back to bisection in `h`-space.
    pub bisection_steps: usize,
    /// Final bracket `(x, f(x))` with `f < 0` at `negative` and `f > 0` at `positive`.
    pub negative: (f64, f64),
    pub positive: (f64, f64),
}

/// Finds a root of a monotone `f` bracketed by `x1` and `x2`.
///
/// Each iteration draws the line through `(h(x1), f(x1))` and
/// `(h(x2), f(x2))`, takes `x0 = h^-1` of its zero, evaluates `y = f(x0)` and
/// replaces the endpoint whose value has the same sign as `y`. An exact zero
/// always stops. If an iterate lands outside the open bracket, or fails to
/// change the value of the endpoint it replaces, the next step bisects in
/// `h`-space instead.
pub fn generalized_secant<F, H>(
    mut f: F,
    h: &H,
    x1: f64,
    x2: f64,
    stop: Stop,
    max_iter: usize,
) -> Result<SecantOutcome>
where
    F: FnMut(f64) -> f64,
    H: Shape + ?Sized,
{
    let y1 = f(x1);
    let y2 = f(x2);
    let done = |x: f64, y: f64| SecantOutcome {
        root: x,
        value: y,
        iterations: 0,
        bisection_steps: 0,
        negative: (x, y),
        positive: (x, y),
    };
    if y1 == 0.0 {
        return Ok(done(x1, y1));
    }
    if y2 == 0.0 {
        return Ok(done(x2, y2));
    }
    if y1.is_nan() || y2.is_nan() || (y1 < 0.0) == (y2 < 0.0) {
        return Err(Error::BracketViolation {
            x1,
            x2,
            f1: y1,
            f2: y2,
        });
    }
    let (mut neg, mut pos) = if y1 < 0.0 {
        ((x1, y1), (x2, y2))
    } else {
        ((x2, y2), (x1, y1))
    };
    let (lo, hi) = (x1.min(x2), x1.max(x2));
    let mut prev_y = y1;
    let mut bisect_next = false;
    let mut bisection_steps = 0;

    for iteration in 1..=max_iter {
        let (un, up) = (h.forward(neg.0), h.forward(pos.0));
        let mut x0 = f64::NAN;
        if !bisect_next {
            let u0 = (up * neg.1 - un * pos.1) / (neg.1 - pos.1);
            x0 = h.inverse(u0);
        }
        let inside = x0 > neg.0.min(pos.0) && x0 < neg.0.max(pos.0);
        if !inside {
            x0 = h.inverse(0.5 * (un + up));
            bisection_steps += 1;
            if !(x0 > lo && x0 < hi) || x0 == neg.0 || x0 == pos.0 {
                // bracket collapsed to adjacent floats
                let (x, y) = if -neg.1 < pos.1 { neg } else { pos };
                return Ok(SecantOutcome {
                    root: x,
                    value: y,
                    iterations: iteration,
                    bisection_steps,
                    negative: neg,
                    positive: pos,
                });
            }
        }
        let y = f(x0);
        let converged = y == 0.0
            || match stop {
                Stop::Step(eps) => (y - prev_y).abs() <= eps,
                Stop::Residual(eps) => y.abs() < eps,
            };
        let replaced = if y < 0.0 { neg.1 } else { pos.1 };
        if y < 0.0 {
            neg = (x0, y);
        } else {
            pos = (x0, y);
        }
        if converged {
            return Ok(SecantOutcome {
                root: x0,
                value: y,
                iterations: iteration,
                bisection_steps,
                negative: neg,
                positive: pos,
            });
        }
        bisect_next = y == replaced;
        prev_y = y;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
    })
}
