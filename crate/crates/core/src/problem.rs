//! Problem data for `-eps * Lap(u) + b u_x + c u = f` on the unit square, `u = 0` on the boundary.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// A pointwise-evaluable scalar field on the unit square.
pub type ScalarFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;

/// A field with partial derivatives up to total order two.
pub trait SmoothField: Send + Sync {
    fn value(&self, x: f64, y: f64) -> f64;

    /// `d^{l+m} / dx^l dy^m` at `(x, y)`; `l + m <= 2`.
    fn derivative(&self, l: usize, m: usize, x: f64, y: f64) -> f64;
}

/// `sin(pi x) sin(pi y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SineProduct;

impl SmoothField for SineProduct {
    fn value(&self, x: f64, y: f64) -> f64 {
        (PI * x).sin() * (PI * y).sin()
    }

    fn derivative(&self, l: usize, m: usize, x: f64, y: f64) -> f64 {
        fn factor(order: usize, t: f64) -> f64 {
            match order {
                0 => (PI * t).sin(),
                1 => PI * (PI * t).cos(),
                2 => -PI * PI * (PI * t).sin(),
                _ => unreachable!("order checked by caller"),
            }
        }
        assert!(l + m <= 2, "derivative order ({l}, {m}) too high");
        factor(l, x) * factor(m, y)
    }
}

/// General quadratic `c0 + cx x + cy y + cxx x^2 + cxy x y + cyy y^2`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Quadratic {
    pub c0: f64,
    pub cx: f64,
    pub cy: f64,
    pub cxx: f64,
    pub cxy: f64,
    pub cyy: f64,
}

impl Quadratic {
    pub fn linear(c0: f64, cx: f64, cy: f64) -> Self {
        Self {
            c0,
            cx,
            cy,
            ..Default::default()
        }
    }
}

impl SmoothField for Quadratic {
    fn value(&self, x: f64, y: f64) -> f64 {
        self.c0 + self.cx * x + self.cy * y + self.cxx * x * x + self.cxy * x * y + self.cyy * y * y
    }

    fn derivative(&self, l: usize, m: usize, x: f64, y: f64) -> f64 {
        match (l, m) {
            (0, 0) => self.value(x, y),
            (1, 0) => self.cx + 2.0 * self.cxx * x + self.cxy * y,
            (0, 1) => self.cy + self.cxy * x + 2.0 * self.cyy * y,
            (2, 0) => 2.0 * self.cxx,
            (1, 1) => self.cxy,
            (0, 2) => 2.0 * self.cyy,
            _ => panic!("derivative order ({l}, {m}) too high"),
        }
    }
}

/// Applies the differential operator to `u`: `f = -eps (u_xx + u_yy) + b u_x + c u`.
pub fn manufactured_rhs(u: Arc<dyn SmoothField>, epsilon: f64, b: f64, c: f64) -> ScalarFn {
    Arc::new(move |x, y| {
        -epsilon * (u.derivative(2, 0, x, y) + u.derivative(0, 2, x, y))
            + b * u.derivative(1, 0, x, y)
            + c * u.value(x, y)
    })
}

/// Continuous problem data. Immutable once built.
#[derive(Clone)]
pub struct ProblemSpec {
    pub epsilon: f64,
    pub b: f64,
    pub c: f64,
    pub beta: f64,
    pub rhs: ScalarFn,
    pub exact: Option<Arc<dyn SmoothField>>,
}

impl fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("epsilon", &self.epsilon)
            .field("b", &self.b)
            .field("c", &self.c)
            .field("beta", &self.beta)
            .field("has_exact", &self.exact.is_some())
            .finish()
    }
}

impl ProblemSpec {
    pub fn new(epsilon: f64, b: f64, c: f64, beta: f64, rhs: ScalarFn) -> Result<Self> {
        let finite = [epsilon, b, c, beta].iter().all(|v| v.is_finite());
        if !finite || epsilon <= 0.0 || c <= 0.0 || beta <= 0.0 || b < beta {
            return Err(Error::InvalidParameter(format!(
                "need eps > 0, b >= beta > 0, c > 0; got eps={epsilon}, b={b}, c={c}, beta={beta}"
            )));
        }
        Ok(Self {
            epsilon,
            b,
            c,
            beta,
            rhs,
            exact: None,
        })
    }

    /// Problem whose exact solution is `u`; the right-hand side is generated from it.
    pub fn manufactured(
        epsilon: f64,
        b: f64,
        c: f64,
        beta: f64,
        u: Arc<dyn SmoothField>,
    ) -> Result<Self> {
        let rhs = manufactured_rhs(u.clone(), epsilon, b, c);
        let mut spec = Self::new(epsilon, b, c, beta, rhs)?;
        spec.exact = Some(u);
        Ok(spec)
    }

    /// Named preset: `constant-f` (f = 1), `zero-f` (f = 0) or `manufactured-sine`.
    pub fn preset(name: &str, epsilon: f64, b: f64, c: f64, beta: f64) -> Result<Self> {
        match name {
            "constant-f" => Self::new(epsilon, b, c, beta, Arc::new(|_, _| 1.0)),
            "zero-f" => Self::new(epsilon, b, c, beta, Arc::new(|_, _| 0.0)),
            "manufactured-sine" => Self::manufactured(epsilon, b, c, beta, Arc::new(SineProduct)),
            other => Err(Error::UnknownPreset(other.to_string())),
        }
    }

    pub fn f(&self, x: f64, y: f64) -> f64 {
        (self.rhs)(x, y)
    }

    /// Checks `eps <= 1/N`.
    pub fn check_assumption(&self, n: usize) -> Result<()> {
        if self.epsilon > 1.0 / n as f64 {
            return Err(Error::AssumptionViolated {
                epsilon: self.epsilon,
                n,
            });
        }
        Ok(())
    }
}

pub const PRESETS: &[&str] = &["constant-f", "zero-f", "manufactured-sine"];
