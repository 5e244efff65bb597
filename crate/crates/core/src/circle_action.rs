//! Holonomy of circle orbits, the almost-homotopy operator `J_X`, and the
//! constructions built on the homotopy identity
//!
//! ```text
//! (Q^-1 - 1) a = J_X(d^nabla a) + d^nabla J_X(a)
//! ```
//!
//! with `J_X(a) = i_X int_0^per pullback_t(a) dt` and `Q = exp(i per Theta(X))`.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{
    covariant_derivative, interior_product, Coefficient, NumericsConfig, PolarisedFormRep,
};
use crate::models::{
    make_model, GeneratorKind, HolonomyConvention, Model, ModelKind, ModelRef, ModelSpec, Point,
    VectorFieldId,
};
use crate::numerics::{central_difference, integrate, unit_phase_average, Rk4Adaptive, C64, I};

/// `|Q - 1|` below this marks a holonomy-trivial point.
pub const Q_ONE_THRESHOLD: f64 = 1e-8;

/// `|Q^-1 - 1|` at or below this is refused by the exactness construction.
pub const EXACTNESS_GAP: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Holonomy {
    pub value: C64,
    pub period: f64,
    pub hamiltonian_value: f64,
    pub fixed_point: bool,
}

impl Holonomy {
    pub fn is_trivial(&self) -> bool {
        (self.value - 1.0).norm() < Q_ONE_THRESHOLD
    }

    /// `Q^-1 - 1`.
    pub fn inverse_gap(&self) -> C64 {
        self.value.inv() - 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSample {
    pub base_point: Point,
    pub generator: VectorFieldId,
}

impl OrbitSample {
    pub fn new(base_point: impl Into<Point>, generator: VectorFieldId) -> Self {
        Self {
            base_point: base_point.into(),
            generator,
        }
    }
}

/// Coefficients of a form at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormValue {
    pub degree: usize,
    pub values: Vec<(Vec<usize>, C64)>,
}

impl FormValue {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max)
    }

    pub fn get(&self, idx: &[usize]) -> C64 {
        self.values
            .iter()
            .find(|(k, _)| k == idx)
            .map_or(C64::new(0.0, 0.0), |(_, v)| *v)
    }
}

fn require_circle(model: &Model, x: VectorFieldId) -> Result<()> {
    let id = model.generator(x.index)?;
    if !id.is_circle_generator {
        return Err(Error::NotCircleGenerator(x.index));
    }
    Ok(())
}

/// `Q = exp(i per Theta(X))` at the base point.
pub fn holonomy_formula(
    model: &Model,
    orbit: &OrbitSample,
    convention: HolonomyConvention,
) -> Result<Holonomy> {
    let x = orbit.generator;
    require_circle(model, x)?;
    let p = orbit.base_point.coords();
    let per = model.holonomy_period(x, p, convention)?;
    let h = model.hamiltonian(x, p)?;
    if per.fixed_point {
        return Ok(Holonomy {
            value: C64::new(1.0, 0.0),
            period: 0.0,
            hamiltonian_value: h,
            fixed_point: true,
        });
    }
    Ok(Holonomy {
        value: (I * per.value * h).exp(),
        period: per.value,
        hamiltonian_value: h,
        fixed_point: false,
    })
}

/// Holonomy by integrating the orbit together with the transport equation
/// `df/dt = i f Theta(gamma')` over one period.
pub fn holonomy_transport(
    model: &Model,
    orbit: &OrbitSample,
    cfg: &NumericsConfig,
) -> Result<Holonomy> {
    let x = orbit.generator;
    require_circle(model, x)?;
    let p = orbit.base_point.coords();
    let per = model.holonomy_period(x, p, cfg.convention)?;
    let h = model.hamiltonian(x, p)?;
    if per.fixed_point {
        return Ok(Holonomy {
            value: C64::new(1.0, 0.0),
            period: 0.0,
            hamiltonian_value: h,
            fixed_point: true,
        });
    }
    let dim = model.dim();
    let mut y0 = p.to_vec();
    y0.extend([1.0, 0.0]);
    let rhs = |_: f64, y: &[f64]| -> Vec<f64> {
        let q = &y[..dim];
        let v = model.field(x.index, q);
        let rate = model.theta(q, &v);
        let mut out = v;
        // d(a + ib)/dt = i rate (a + ib)
        out.push(-rate * y[dim + 1]);
        out.push(rate * y[dim]);
        out
    };
    let rk = Rk4Adaptive {
        initial_step: 1e-3,
        ..Rk4Adaptive::new(cfg.ode_tol)
    };
    let sol = rk.solve(rhs, 0.0, &y0, per.value)?;
    let value = C64::new(sol.y[dim], sol.y[dim + 1]);
    if !(value.norm() - 1.0).abs().lt(&1e-6) {
        return Err(Error::Integrator {
            residual: (value.norm() - 1.0).abs(),
        });
    }
    Ok(Holonomy {
        value,
        period: per.value,
        hamiltonian_value: h,
        fixed_point: false,
    })
}

/// `int_0^per exp(-i t Theta(X)(p)) c(phi_t(p)) dt`; zero at fixed points.
fn orbit_integral(
    model: &Model,
    x: VectorFieldId,
    c: &Coefficient,
    p: &[f64],
    cfg: &NumericsConfig,
) -> C64 {
    let per = match model.holonomy_period(x, p, cfg.convention) {
        Ok(per) if !per.fixed_point => per.value,
        _ => return C64::new(0.0, 0.0),
    };
    let h = model.hamiltonian_index(x.index, p);
    integrate(
        |t| (-I * t * h).exp() * c.eval(&model.flow_index(x.index, p, t)),
        0.0,
        per,
        cfg.quadrature_steps,
        cfg.quadrature_rule,
    )
}

/// `J_X(a)` as a lazily evaluated form of degree `deg(a) - 1`.
pub fn homotopy_form(
    x: VectorFieldId,
    a: &PolarisedFormRep,
    cfg: &NumericsConfig,
) -> Result<PolarisedFormRep> {
    let model = a.model().clone();
    require_circle(&model, x)?;
    if a.degree() == 0 {
        return Err(Error::InvalidDegree(-1));
    }
    // i_X commutes with the pullback, so contract first
    let contracted = interior_product(x, a)?;
    let entries = contracted
        .indices()
        .map(|k| {
            let c = contracted.coefficient_fn(k).unwrap().clone();
            let (m, cfg) = (model.clone(), *cfg);
            (
                k.clone(),
                Coefficient::new(move |p| orbit_integral(&m, x, &c, p, &cfg)),
            )
        })
        .collect();
    Ok(PolarisedFormRep::from_coefficients(model, a.degree() - 1, entries)?.with_mode(a.mode()))
}

/// `J_X(a)` evaluated at `p`.
pub fn homotopy_operator(
    x: VectorFieldId,
    a: &PolarisedFormRep,
    p: &[f64],
    cfg: &NumericsConfig,
) -> Result<FormValue> {
    a.model().check_point(p)?;
    let j = homotopy_form(x, a, cfg)?;
    Ok(FormValue {
        degree: j.degree(),
        values: j.values(p),
    })
}

/// Largest coefficient of `(Q^-1 - 1) a - J_X(d^nabla a) - d^nabla J_X(a)`
/// at `p`; the last term is absent in degree 0.
pub fn homotopy_identity_residual(
    x: VectorFieldId,
    a: &PolarisedFormRep,
    p: &[f64],
    cfg: &NumericsConfig,
) -> Result<f64> {
    let model = a.model().clone();
    require_circle(&model, x)?;
    let q = holonomy_formula(&model, &OrbitSample::new(p.to_vec(), x), cfg.convention)?;
    let gap = q.inverse_gap();
    let da = covariant_derivative(a, cfg)?;
    let mut rhs = if da.is_trivially_zero() {
        PolarisedFormRep::zero(model.clone(), a.degree())
    } else {
        homotopy_form(x, &da, cfg)?
    };
    if a.degree() > 0 {
        let dj = covariant_derivative(&homotopy_form(x, a, cfg)?, cfg)?;
        rhs = rhs.add_scaled(&dj, C64::new(1.0, 0.0))?;
    }
    let lhs = a.multiply(move |_| gap);
    // gap is frozen at p, so only compare at p
    lhs.residual(&rhs, p)
}

/// Potential `beta = J_X(a) / (Q^-1 - 1)` of a closed form at `p`.
pub fn exactness_potential(
    x: VectorFieldId,
    a: &PolarisedFormRep,
    p: &[f64],
    cfg: &NumericsConfig,
) -> Result<FormValue> {
    let model = a.model().clone();
    require_circle(&model, x)?;
    if a.degree() == 0 {
        return Err(Error::InvalidDegree(-1));
    }
    let residual = covariant_derivative(a, cfg)?.max_abs(p);
    if residual > cfg.eq_tol {
        return Err(Error::NotClosed {
            residual,
            tolerance: cfg.eq_tol,
        });
    }
    let q = holonomy_formula(&model, &OrbitSample::new(p.to_vec(), x), cfg.convention)?;
    let gap = q.inverse_gap();
    if gap.norm() <= EXACTNESS_GAP {
        return Err(Error::HolonomyTrivial {
            gap: gap.norm(),
            threshold: EXACTNESS_GAP,
        });
    }
    let j = homotopy_operator(x, a, p, cfg)?;
    Ok(FormValue {
        degree: j.degree,
        values: j.values.into_iter().map(|(k, v)| (k, v / gap)).collect(),
    })
}

/// Lazy potential form `J_X(a) / (Q^-1 - 1)`, for checking `d^nabla beta = a`
/// near points where the holonomy is nontrivial.
pub fn exactness_potential_form(
    x: VectorFieldId,
    a: &PolarisedFormRep,
    cfg: &NumericsConfig,
) -> Result<PolarisedFormRep> {
    let model = a.model().clone();
    let j = homotopy_form(x, a, cfg)?;
    let convention = cfg.convention;
    Ok(j.multiply(move |p| {
        let q = holonomy_formula(&model, &OrbitSample::new(p.to_vec(), x), convention)
            .map(|h| h.inverse_gap())
            .unwrap_or(C64::new(f64::NAN, 0.0));
        1.0 / q
    }))
}

/// Max over generators `G` and a few flow times of `|Q(flow_G(p, d)) - Q(p)|`.
pub fn holonomy_constancy_check(
    model: &Model,
    x: VectorFieldId,
    p: &[f64],
    cfg: &NumericsConfig,
) -> Result<f64> {
    let q0 = holonomy_formula(model, &OrbitSample::new(p.to_vec(), x), cfg.convention)?.value;
    let mut worst: f64 = 0.0;
    for g in model.generators() {
        for delta in [1e-3, 0.1, 1.0] {
            let moved = model.flow(g, p, delta)?;
            let q = holonomy_formula(model, &OrbitSample::new(moved, x), cfg.convention)?.value;
            worst = worst.max((q - q0).norm());
        }
    }
    Ok(worst)
}

/// `int_0^{2 pi} exp(-i t lambda) cos t dt` by quadrature.
pub fn cosine_orbit_integral(lambda: f64, cfg: &NumericsConfig) -> C64 {
    integrate(
        |t| (-I * t * lambda).exp() * t.cos(),
        0.0,
        TAU,
        cfg.quadrature_steps,
        cfg.quadrature_rule,
    )
}

/// Closed form `i lambda (exp(-2 pi i lambda) - 1) / (lambda^2 - 1)`, with
/// the limit `pi` at `lambda = +-1`.
pub fn cosine_orbit_integral_closed_form(lambda: f64) -> C64 {
    if (lambda.abs() - 1.0).abs() < 1e-12 {
        return C64::new(std::f64::consts::PI, 0.0);
    }
    I * lambda * ((-I * TAU * lambda).exp() - 1.0) / (lambda * lambda - 1.0)
}

/// `int_0^{2 pi} exp(-i t lambda) sin t dt` in closed form:
/// `(exp(-2 pi i lambda) - 1) / (lambda^2 - 1)`.
pub fn sine_orbit_integral_closed_form(lambda: f64) -> C64 {
    if (lambda.abs() - 1.0).abs() < 1e-12 {
        return C64::new(0.0, -lambda.signum() * std::f64::consts::PI);
    }
    ((-I * TAU * lambda).exp() - 1.0) / (lambda * lambda - 1.0)
}

struct DivisionSetup<'a> {
    model: &'a Model,
    x: VectorFieldId,
    kind: GeneratorKind,
    // h = scale * Theta(X)
    scale: f64,
}

impl DivisionSetup<'_> {
    fn h(&self, q: &[f64]) -> f64 {
        self.scale * self.model.hamiltonian_index(self.x.index, q)
    }

    fn grad_h(&self, q: &[f64]) -> Vec<f64> {
        self.model
            .hamiltonian_gradient(self.x, q)
            .expect("validated generator")
            .into_iter()
            .map(|g| g * self.scale)
            .collect()
    }

    fn inverse_gap(&self, q: &[f64]) -> C64 {
        (-I * TAU * self.h(q)).exp() - 1.0
    }

    /// Endpoint of the gradient flow of `-(h - m) grad h` started at `p`.
    fn flow_limit(&self, p: &[f64], m: f64, cfg: &NumericsConfig) -> Result<Vec<f64>> {
        let rk = Rk4Adaptive {
            initial_step: 1e-3,
            max_steps: 200_000,
            ..Rk4Adaptive::new(cfg.ode_tol.max(1e-13))
        };
        let sol = rk.solve_until(
            |_, q| {
                let hl = self.h(q) - m;
                self.grad_h(q).into_iter().map(|g| -hl * g).collect()
            },
            0.0,
            p,
            1e4,
            |_, q| (self.h(q) - m).abs() < 1e-12 || self.model.distance_to_singular(q) < 1e-8,
        )?;
        let hl = (self.h(&sol.y) - m).abs();
        if hl > 1e-9 && self.model.distance_to_singular(&sol.y) >= 1e-8 {
            return Err(Error::Integrator { residual: hl });
        }
        Ok(sol.y)
    }

    /// Regular weighted form of the division, valid wherever `grad h != 0`:
    /// `g = -int_0^inf w(s) Z(f)(q(s)) ds / (2 pi i E(h_loc))`.
    fn weighted(
        &self,
        f: &dyn Fn(&[f64]) -> C64,
        p: &[f64],
        m: f64,
        cfg: &NumericsConfig,
    ) -> Result<(C64, Vec<f64>)> {
        let dim = p.len();
        let zf = |q: &[f64]| -> C64 {
            let g = self.grad_h(q);
            central_difference(
                |s| {
                    let r: Vec<f64> = q.iter().zip(&g).map(|(a, b)| a + s * b).collect();
                    f(&r)
                },
                cfg.fd_step,
                cfg.fd_richardson,
            )
        };
        // state: q, L = int |grad h|^2, re/im of the accumulated integral
        let mut y0 = p.to_vec();
        y0.extend([0.0, 0.0, 0.0]);
        let rhs = |_: f64, y: &[f64]| -> Vec<f64> {
            let q = &y[..dim];
            let g = self.grad_h(q);
            let hl = self.h(q) - m;
            let mut out: Vec<f64> = g.iter().map(|v| -hl * v).collect();
            out.push(g.iter().map(|v| v * v).sum());
            let w = (-y[dim]).exp();
            let z = zf(q) * w;
            out.push(z.re);
            out.push(z.im);
            out
        };
        let rk = Rk4Adaptive {
            initial_step: 1e-3,
            max_steps: 200_000,
            ..Rk4Adaptive::new(cfg.ode_tol.max(1e-13))
        };
        let sol = rk.solve_until(rhs, 0.0, &y0, 1e5, |_, y| y[dim] > 45.0)?;
        if sol.y[dim] <= 45.0 {
            return Err(Error::Integrator {
                residual: (-sol.y[dim]).exp(),
            });
        }
        let integral = C64::new(sol.y[dim + 1], sol.y[dim + 2]);
        let h_loc = self.h(p) - m;
        let g = -integral / (I * TAU * unit_phase_average(h_loc));
        Ok((g, sol.y[..dim].to_vec()))
    }
}

/// Divide `f` by `Q^-1 - 1` on a model with a single circle generator,
/// given that `f` vanishes where `Q = 1`.
///
/// Far from `{Q = 1}` this is `(f(p) - f(p_inf)) / (Q^-1 - 1)` with `p_inf`
/// the limit of the gradient flow of `-(h - m) grad h`, `h = per Theta(X) / 2 pi`
/// and `m` the nearest integer. Close to `{Q = 1}` the weighted integral form
/// is used, which stays regular on the set itself. At an isolated
/// nondegenerate fixed point the closed form is interpolated across it.
pub fn holonomy_division(
    model: &Model,
    f: &dyn Fn(&[f64]) -> C64,
    p: &[f64],
    cfg: &NumericsConfig,
) -> Result<C64> {
    model.check_point(p)?;
    let circles = model.circle_generators();
    let [x] = circles.as_slice() else {
        return Err(Error::InvalidModel(format!(
            "division needs exactly one circle generator, {} has {}",
            model.name(),
            circles.len()
        )));
    };
    let setup = DivisionSetup {
        model,
        x: *x,
        kind: model.generator_kind(*x)?,
        scale: model.orbit_period(*x, cfg.convention)? / TAU,
    };
    let h = setup.h(p);
    let m = h.round();
    let gap = setup.inverse_gap(p);
    let obstruction = |q: &[f64]| -> Result<()> {
        let r = f(q).norm();
        if r > cfg.eq_tol {
            Err(Error::DivisionObstruction { residual: r })
        } else {
            Ok(())
        }
    };

    if setup.kind == GeneratorKind::Rotation && m == 0.0 {
        // the level set {h = 0} is the fixed point of the rotation block
        let block = model.generator_block(x.index)?;
        let coords = &model.block_layout()[block].1;
        let mut fixed = p.to_vec();
        coords.iter().for_each(|&i| fixed[i] = 0.0);
        obstruction(&fixed)?;
        let f_inf = f(&fixed);
        let closed = |q: &[f64]| (f(q) - f_inf) / setup.inverse_gap(q);
        if gap.norm() >= 1e-9 {
            return Ok(closed(p));
        }
        let r = coords.iter().map(|&i| p[i] * p[i]).sum::<f64>().sqrt();
        let mut dir = vec![0.0; p.len()];
        if r > 0.0 {
            coords.iter().for_each(|&i| dir[i] = p[i] / r);
        } else {
            dir[coords[0]] = 1.0;
        }
        let rho = 1e-3;
        let at = |s: f64| -> Vec<f64> { fixed.iter().zip(&dir).map(|(a, d)| a + s * d).collect() };
        let (gp, gm) = (closed(&at(rho)), closed(&at(-rho)));
        return Ok((gp + gm) * 0.5 + (gp - gm) * (0.5 * r / rho));
    }

    if gap.norm() >= 1e-3 {
        let limit = setup.flow_limit(p, m, cfg)?;
        obstruction(&limit)?;
        return Ok((f(p) - f(&limit)) / gap);
    }

    let grad_norm = setup.grad_h(p).iter().map(|v| v * v).sum::<f64>().sqrt();
    if grad_norm < 1e-12 {
        return Err(Error::DegenerateFixedPoint);
    }
    let (g, limit) = setup.weighted(f, p, m, cfg)?;
    obstruction(&limit)?;
    Ok(g)
}

/// Product `Cylinder x Cylinder`: evaluate `J_X(a)` on the slice
/// `x_left = 0` (a Bohr-Sommerfeld leaf of the left factor) and read it as a
/// form on the right factor.
pub fn kunneth_project(
    model: &Model,
    x: VectorFieldId,
    a: &PolarisedFormRep,
    p: &[f64],
    cfg: &NumericsConfig,
) -> Result<FormValue> {
    let is_cyl_pair = matches!(
        &model.spec().kind,
        ModelKind::Product { left, right }
            if left.kind == ModelKind::Cylinder && right.kind == ModelKind::Cylinder
    );
    if !is_cyl_pair {
        return Err(Error::InvalidModel(format!(
            "projection is implemented on cylinder x cylinder, got {}",
            model.name()
        )));
    }
    if x.index != 1 {
        return Err(Error::InvalidModel("projection uses the left circle generator".into()));
    }
    let residual = covariant_derivative(a, cfg)?.max_abs(p);
    if residual > cfg.eq_tol {
        return Err(Error::NotClosed {
            residual,
            tolerance: cfg.eq_tol,
        });
    }
    let form = kunneth_projection_form(a, cfg)?;
    // right chart point (x2, y2)
    let q = [p[2], p[3]];
    Ok(FormValue {
        degree: form.degree(),
        values: form.values(&q),
    })
}

/// Lazy right-factor form `q -> J_X(a)(0, 0, q)` on a fresh right cylinder.
pub fn kunneth_projection_form(a: &PolarisedFormRep, cfg: &NumericsConfig) -> Result<PolarisedFormRep> {
    let model: ModelRef = a.model().clone();
    let x = model.generator(1)?;
    let j = homotopy_form(x, a, cfg)?;
    let right = make_model(ModelSpec::cylinder())?;
    let entries = j
        .indices()
        .map(|k| {
            let c = j.coefficient_fn(k).unwrap().clone();
            let idx: Vec<usize> = k.iter().map(|i| i - 1).collect();
            (idx, Coefficient::new(move |q| c.eval(&[0.0, 0.0, q[0], q[1]])))
        })
        .collect();
    PolarisedFormRep::from_coefficients(right, j.degree(), entries)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::DerivativeMode;
    use crate::models::make_model;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn cylinder_holonomy_values() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        let x = m.generator(1).unwrap();
        let conv = HolonomyConvention::TransportOracle;
        let q = holonomy_formula(&m, &OrbitSample::new(vec![0.5, 0.0], x), conv).unwrap();
        assert!(close(q.value, C64::new(-1.0, 0.0), 1e-15));
        assert_eq!(q.period, TAU);
        assert_eq!(q.hamiltonian_value, 0.5);
        let q = holonomy_formula(&m, &OrbitSample::new(vec![0.0, 1.0], x), conv).unwrap();
        assert!(q.is_trivial());
        let cfg = NumericsConfig::default();
        let t = holonomy_transport(&m, &OrbitSample::new(vec![0.25, 0.0], x), &cfg).unwrap();
        assert!(close(t.value, I, 1e-10), "{}", t.value);
    }

    #[test]
    fn disk_holonomy_under_both_conventions() {
        let m = make_model(ModelSpec::disk()).unwrap();
        let x = m.generator(1).unwrap();
        let orbit = OrbitSample::new(vec![0.6, 0.2], x);
        let r2 = 0.4;
        let oracle = holonomy_formula(&m, &orbit, HolonomyConvention::TransportOracle).unwrap();
        assert!(close(oracle.value, (I * PI * r2).exp(), 1e-14));
        let printed = holonomy_formula(&m, &orbit, HolonomyConvention::PaperPrinted).unwrap();
        assert!(close(printed.value, (I * TAU * r2).exp(), 1e-14));
        let mut cfg = NumericsConfig::default();
        let t = holonomy_transport(&m, &orbit, &cfg).unwrap();
        assert!(close(t.value, oracle.value, 1e-9));
        cfg.convention = HolonomyConvention::PaperPrinted;
        let t = holonomy_transport(&m, &orbit, &cfg).unwrap();
        assert!(close(t.value, printed.value, 1e-9));
        let fixed = holonomy_formula(&m, &OrbitSample::new(vec![0.0, 0.0], x), HolonomyConvention::TransportOracle).unwrap();
        assert!(fixed.fixed_point && fixed.period == 0.0 && fixed.value == C64::new(1.0, 0.0));
    }

    #[test]
    fn focus_focus_holonomy() {
        let m = make_model(ModelSpec::focus_focus()).unwrap();
        let x = m.generator(2).unwrap();
        let cfg = NumericsConfig::default();
        let q = holonomy_formula(&m, &OrbitSample::new(vec![1.0, 0.0, 0.0, 1.0], x), cfg.convention).unwrap();
        assert!(close(q.value, C64::new(1.0, 0.0), 1e-14));
        let t = holonomy_transport(&m, &OrbitSample::new(vec![1.0, 0.0, 0.0, 0.5], x), &cfg).unwrap();
        assert!(close(t.value, C64::new(-1.0, 0.0), 1e-9));
        assert!(holonomy_formula(&m, &OrbitSample::new(vec![1.0; 4], m.generator(1).unwrap()), cfg.convention).is_err());
    }

    #[test]
    fn homotopy_of_basis_form_on_cylinder() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        let x = m.generator(1).unwrap();
        let cfg = NumericsConfig::default();
        let a = PolarisedFormRep::basis(m.clone(), 1).unwrap();
        let xv = 0.3;
        let j = homotopy_operator(x, &a, &[xv, 1.0], &cfg).unwrap();
        assert_eq!(j.degree, 0);
        let expect = ((-I * TAU * xv).exp() - 1.0) / (-I * xv);
        assert!(close(j.get(&[]), expect, 1e-12));
    }

    #[test]
    fn homotopy_vanishes_at_disk_origin() {
        let m = make_model(ModelSpec::disk()).unwrap();
        let x = m.generator(1).unwrap();
        let a = PolarisedFormRep::from_coefficients(
            m.clone(),
            1,
            vec![(vec![1], Coefficient::new(|p| C64::new(1.0 + p[0], p[1])))],
        )
        .unwrap();
        let j = homotopy_operator(x, &a, &[0.0, 0.0], &NumericsConfig::default()).unwrap();
        assert_eq!(j.max_abs(), 0.0);
    }

    #[test]
    fn homotopy_identity_holds_on_cylinder() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        let x = m.generator(1).unwrap();
        let cfg = NumericsConfig::default();
        let s = PolarisedFormRep::section(m.clone(), Coefficient::constant(C64::new(1.0, 0.0)));
        let r = homotopy_identity_residual(x, &s, &[2f64.sqrt() - 1.0, 0.4], &cfg).unwrap();
        assert!(r < 1e-6, "{r}");
        let a = PolarisedFormRep::from_coefficients(
            m.clone(),
            1,
            vec![(vec![1], Coefficient::new(|p| C64::new(p[1].cos(), p[0] * p[0])))],
        )
        .unwrap();
        let r = homotopy_identity_residual(x, &a, &[0.7, 2.0], &cfg).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn homotopy_identity_holds_on_focus_focus() {
        let m = make_model(ModelSpec::focus_focus()).unwrap();
        let x = m.generator(2).unwrap();
        let cfg = NumericsConfig::default();
        let a = PolarisedFormRep::from_coefficients(
            m.clone(),
            1,
            vec![
                (vec![1], Coefficient::new(|p| C64::new(p[0] * p[3], p[1]))),
                (vec![2], Coefficient::new(|p| (I * (p[2] - 0.5 * p[0])).exp())),
            ],
        )
        .unwrap()
        .with_mode(DerivativeMode::FiniteDifference);
        let r = homotopy_identity_residual(x, &a, &[0.3, -0.7, 1.1, 0.4], &cfg).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn exactness_on_cylinder() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        let x = m.generator(1).unwrap();
        let cfg = NumericsConfig::default();
        let a = PolarisedFormRep::basis(m.clone(), 1).unwrap();
        let p = [0.5, 0.2];
        let beta = exactness_potential(x, &a, &p, &cfg).unwrap();
        // J = (Q^-1 - 1)/(-ix), so beta = 1/(-ix) = 2i
        assert!(close(beta.get(&[]), C64::new(0.0, 2.0), 1e-10));
        let lazy = exactness_potential_form(x, &a, &cfg).unwrap();
        let d = covariant_derivative(&lazy, &cfg).unwrap();
        assert!(d.residual(&a, &p).unwrap() < 1e-5);
        assert!(matches!(
            exactness_potential(x, &a, &[1.0, 0.2], &cfg),
            Err(Error::HolonomyTrivial { .. })
        ));
    }

    #[test]
    fn constancy_along_polarisation() {
        let cfg = NumericsConfig::default();
        for spec in [ModelSpec::cylinder(), ModelSpec::disk(), ModelSpec::focus_focus()] {
            let m = make_model(spec).unwrap();
            let x = *m.circle_generators().last().unwrap();
            let p: Vec<f64> = (0..m.dim()).map(|i| 0.3 + 0.2 * i as f64).collect();
            assert!(holonomy_constancy_check(&m, x, &p, &cfg).unwrap() < 1e-12);
        }
    }

    #[test]
    fn cosine_integral_closed_form() {
        let cfg = NumericsConfig::default();
        for lambda in [0.1, 0.5, 1.7, 1.0] {
            let q = cosine_orbit_integral(lambda, &cfg);
            assert!(close(q, cosine_orbit_integral_closed_form(lambda), 1e-10), "{lambda}");
        }
        assert!(cosine_orbit_integral(0.0, &cfg).norm() < 1e-12);
        let s = integrate(|t| (-I * t * 0.5).exp() * t.sin(), 0.0, TAU, 2048, cfg.quadrature_rule);
        assert!(close(s, sine_orbit_integral_closed_form(0.5), 1e-10));
    }

    #[test]
    fn division_roundtrip_on_disk() {
        let m = make_model(ModelSpec::disk()).unwrap();
        let cfg = NumericsConfig::default();
        let g0 = |p: &[f64]| C64::new(p[0], p[1]);
        let f = |p: &[f64]| ((-I * PI * (p[0] * p[0] + p[1] * p[1])).exp() - 1.0) * g0(p);
        // generic, on the BS circle r^2 = 2, near it, origin and near origin
        let s2 = 2f64.sqrt();
        for p in [[0.7, -0.4], [s2, 0.0], [0.0, s2 + 1e-7], [1.0, 1.0 + 1e-4], [0.0, 0.0], [3e-6, -1e-6], [0.01, 0.0]] {
            let g = holonomy_division(&m, &f, &p, &cfg).unwrap();
            assert!(close(g, g0(&p), 1e-5), "{p:?}: {g} vs {}", g0(&p));
        }
        let one = |_: &[f64]| C64::new(1.0, 0.0);
        assert!(matches!(
            holonomy_division(&m, &one, &[0.3, 0.3], &cfg),
            Err(Error::DivisionObstruction { .. })
        ));
        assert!(matches!(
            holonomy_division(&m, &one, &[s2, 0.0], &cfg),
            Err(Error::DivisionObstruction { .. })
        ));
    }

    #[test]
    fn division_refuses_degenerate_fixed_point() {
        let m = make_model(ModelSpec::focus_focus()).unwrap();
        let cfg = NumericsConfig::default();
        let f = |p: &[f64]| (-I * TAU * (p[0] * p[3] - p[1] * p[2])).exp() - 1.0;
        assert_eq!(
            holonomy_division(&m, &f, &[0.0; 4], &cfg),
            Err(Error::DegenerateFixedPoint)
        );
        let g = holonomy_division(&m, &f, &[0.5, 0.2, 0.4, 0.9], &cfg).unwrap();
        assert!(close(g, C64::new(1.0, 0.0), 1e-6));
        // on the locus x1 y2 = x2 y1 away from the origin
        let g = holonomy_division(&m, &f, &[1.0, 0.5, 0.4, 0.2], &cfg).unwrap();
        assert!(close(g, C64::new(1.0, 0.0), 1e-6), "{g}");
    }

    #[test]
    fn kunneth_projection_of_top_form() {
        let m = make_model(ModelSpec::product(ModelSpec::cylinder(), ModelSpec::cylinder())).unwrap();
        let x = m.generator(1).unwrap();
        let cfg = NumericsConfig::default();
        let a = PolarisedFormRep::from_coefficients(
            m.clone(),
            2,
            vec![(vec![1, 2], Coefficient::new(|p| (I * p[2] * p[3]).exp()))],
        )
        .unwrap();
        let out = kunneth_project(&m, x, &a, &[0.4, 0.1, 0.8, 1.5], &cfg).unwrap();
        assert_eq!(out.degree, 1);
        assert!(close(out.get(&[1]), (I * 0.8 * 1.5).exp() * TAU, 1e-10));
    }
}
