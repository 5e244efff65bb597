//! Numerical primitives shared by the operator modules: finite differences,
//! composite quadrature and an adaptive RK4 integrator.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const I: C64 = C64::new(0.0, 1.0);

/// Quadrature rule for integrals over one orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuadratureRule {
    Simpson,
    /// Composite Simpson on n and n/2 intervals combined by one Richardson
    /// step (sixth order, same node set).
    #[default]
    SimpsonRichardson,
}

/// Central difference derivative of `g` at 0.
///
/// With `richardson` the h and h/2 estimates are combined to cancel the
/// h^2 term.
pub fn central_difference<G>(g: G, step: f64, richardson: bool) -> C64
where
    G: Fn(f64) -> C64,
{
    let d = |h: f64| (g(h) - g(-h)) / (2.0 * h);
    if richardson {
        let coarse = d(step);
        let fine = d(0.5 * step);
        (fine * 4.0 - coarse) / 3.0
    } else {
        d(step)
    }
}

/// Composite Simpson on `intervals` (rounded up to even) subintervals.
pub fn simpson<F>(f: F, a: f64, b: f64, intervals: usize) -> C64
where
    F: Fn(f64) -> C64,
{
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for j in 1..n {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += f(a + h * j as f64) * w;
    }
    acc * (h / 3.0)
}

/// Integrate `f` over `[a, b]` with the selected rule and node budget.
pub fn integrate<F>(f: F, a: f64, b: f64, intervals: usize, rule: QuadratureRule) -> C64
where
    F: Fn(f64) -> C64,
{
    if a == b {
        return C64::new(0.0, 0.0);
    }
    match rule {
        QuadratureRule::Simpson => simpson(f, a, b, intervals),
        QuadratureRule::SimpsonRichardson => {
            // n must be a multiple of 4 so that the coarse rule reuses nodes.
            let n = intervals.max(4).div_ceil(4) * 4;
            let h = (b - a) / n as f64;
            let values: Vec<C64> = (0..=n).map(|j| f(a + h * j as f64)).collect();
            let fine = simpson_from_samples(&values, 1, h);
            let coarse = simpson_from_samples(&values, 2, 2.0 * h);
            (fine * 16.0 - coarse) / 15.0
        }
    }
}

fn simpson_from_samples(values: &[C64], stride: usize, h: f64) -> C64 {
    let pts: Vec<C64> = values.iter().step_by(stride).copied().collect();
    let n = pts.len() - 1;
    let mut acc = pts[0] + pts[n];
    for (j, v) in pts.iter().enumerate().take(n).skip(1) {
        acc += v * if j % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// Closed form of `int_0^1 exp(-2 pi i t h) dt`; equals 1 at h = 0.
pub fn unit_phase_average(h: f64) -> C64 {
    let z = -2.0 * std::f64::consts::PI * h;
    if z.abs() < 1e-6 {
        // exp(iz) - 1 over iz, series to third order
        C64::new(1.0 - z * z / 6.0, z / 2.0 - z * z * z / 24.0)
    } else {
        ((I * z).exp() - 1.0) / (I * z)
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub t: f64,
    pub y: Vec<f64>,
    pub steps: usize,
    /// Sum of the accepted local error estimates.
    pub error_estimate: f64,
}

/// Classical RK4 with step doubling error control.
#[derive(Debug, Clone, Copy)]
pub struct Rk4Adaptive {
    pub tol: f64,
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Rk4Adaptive {
    pub fn new(tol: f64) -> Self {
        Self {
            tol,
            initial_step: 1e-2,
            max_step: f64::INFINITY,
            min_step: 1e-14,
            max_steps: 2_000_000,
        }
    }

    fn step<F>(f: &F, t: f64, y: &[f64], h: f64) -> Vec<f64>
    where
        F: Fn(f64, &[f64]) -> Vec<f64>,
    {
        let add = |a: &[f64], b: &[f64], s: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, d)| x + s * d).collect()
        };
        let k1 = f(t, y);
        let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h));
        let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h));
        let k4 = f(t + h, &add(y, &k3, h));
        y.iter()
            .enumerate()
            .map(|(i, v)| v + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect()
    }

    /// Integrate from `t0` to `t1`.
    pub fn solve<F>(&self, f: F, t0: f64, y0: &[f64], t1: f64) -> Result<OdeSolution>
    where
        F: Fn(f64, &[f64]) -> Vec<f64>,
    {
        self.solve_until(f, t0, y0, t1, |_, _| false)
    }

    /// Integrate from `t0` towards `t_end`, stopping early once `stop`
    /// holds at an accepted step.
    pub fn solve_until<F, S>(
        &self,
        f: F,
        t0: f64,
        y0: &[f64],
        t_end: f64,
        stop: S,
    ) -> Result<OdeSolution>
    where
        F: Fn(f64, &[f64]) -> Vec<f64>,
        S: Fn(f64, &[f64]) -> bool,
    {
        let dir = if t_end >= t0 { 1.0 } else { -1.0 };
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut h = self.initial_step.min((t_end - t0).abs()).max(self.min_step);
        let mut steps = 0;
        let mut err_sum = 0.0;
        while (t_end - t) * dir > 0.0 {
            if stop(t, &y) {
                break;
            }
            if steps >= self.max_steps {
                return Err(Error::Integrator { residual: err_sum });
            }
            h = h.min((t_end - t).abs()).min(self.max_step);
            let full = Self::step(&f, t, &y, dir * h);
            let half = Self::step(&f, t, &y, dir * 0.5 * h);
            let two_half = Self::step(&f, t + dir * 0.5 * h, &half, dir * 0.5 * h);
            let scale = 1.0 + y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let err = full
                .iter()
                .zip(&two_half)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
                / 15.0;
            if err <= self.tol * scale || h <= self.min_step {
                if h <= self.min_step && err > self.tol * scale {
                    return Err(Error::Integrator { residual: err });
                }
                t += dir * h;
                // local extrapolation: fifth order
                y = two_half
                    .iter()
                    .zip(&full)
                    .map(|(b, a)| b + (b - a) / 15.0)
                    .collect();
                err_sum += err;
                steps += 1;
                let grow = if err == 0.0 {
                    4.0
                } else {
                    (0.9 * (self.tol * scale / err).powf(0.2)).clamp(0.2, 4.0)
                };
                h *= grow;
            } else {
                h *= (0.9 * (self.tol * scale / err).powf(0.2)).clamp(0.1, 0.9);
            }
        }
        Ok(OdeSolution {
            t,
            y,
            steps,
            error_estimate: err_sum,
        })
    }
}
