//! Line-bundle-valued polarised forms in the distinguished unitary gauge.
//!
//! A degree-k form is stored as coefficient functions on increasing
//! multi-indices `I = (i_1 < .. < i_k)` of the co-basis dual to the
//! polarisation generators `X_1 .. X_n`. Coefficients are 1-based.
//!
//! With `s` the unitary section, `nabla s = -i Theta (x) s` and
//!
//! ```text
//! d^nabla (alpha (x) s) = (d_P alpha - i Theta_P ^ alpha) (x) s
//! (d_P alpha)_J = sum_m (-1)^m X_{j_m}(alpha_{J \ j_m})
//! ```
//!
//! where `Theta_P` has components `Theta(X_j)`. The generators commute, so
//! `d_P` has no bracket terms.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::models::{HolonomyConvention, ModelRef, VectorFieldId};
use crate::numerics::{central_difference, QuadratureRule, C64, I};

pub type CoeffFn = Arc<dyn Fn(&[f64]) -> C64 + Send + Sync>;
pub type GradFn = Arc<dyn Fn(&[f64]) -> Vec<C64> + Send + Sync>;

/// Numerical knobs shared by all operators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NumericsConfig {
    pub fd_step: f64,
    /// Combine steps h and h/2 to cancel the second-order error.
    pub fd_richardson: bool,
    pub quadrature_steps: usize,
    pub quadrature_rule: QuadratureRule,
    pub ode_tol: f64,
    pub eq_tol: f64,
    pub convention: HolonomyConvention,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            fd_step: 5e-4,
            fd_richardson: true,
            quadrature_steps: 2048,
            quadrature_rule: QuadratureRule::SimpsonRichardson,
            ode_tol: 1e-12,
            eq_tol: 1e-6,
            convention: HolonomyConvention::TransportOracle,
        }
    }
}

impl NumericsConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("fd_step", self.fd_step),
            ("ode_tol", self.ode_tol),
            ("eq_tol", self.eq_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::schema(name, format!("must be positive, got {v}")));
            }
        }
        if self.quadrature_steps < 16 {
            return Err(Error::schema(
                "quadrature_steps",
                format!("must be at least 16, got {}", self.quadrature_steps),
            ));
        }
        Ok(())
    }
}

/// A scalar coefficient, optionally with its chart gradient.
#[derive(Clone)]
pub struct Coefficient {
    value: CoeffFn,
    gradient: Option<GradFn>,
}

impl Coefficient {
    pub fn new(f: impl Fn(&[f64]) -> C64 + Send + Sync + 'static) -> Self {
        Self {
            value: Arc::new(f),
            gradient: None,
        }
    }

    pub fn with_gradient(
        f: impl Fn(&[f64]) -> C64 + Send + Sync + 'static,
        g: impl Fn(&[f64]) -> Vec<C64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(f),
            gradient: Some(Arc::new(g)),
        }
    }

    pub fn constant(c: C64) -> Self {
        Self::new(move |_| c)
    }

    pub fn eval(&self, p: &[f64]) -> C64 {
        (self.value)(p)
    }

    pub fn gradient(&self) -> Option<&GradFn> {
        self.gradient.as_ref()
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient")
            .field("analytic_gradient", &self.gradient.is_some())
            .finish()
    }
}

/// How `d_P` differentiates coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DerivativeMode {
    /// Use supplied gradients, finite differences where none is given.
    #[default]
    Analytic,
    /// Always finite differences with the configured step.
    FiniteDifference,
}

#[derive(Clone)]
pub struct PolarisedFormRep {
    model: ModelRef,
    degree: usize,
    coeffs: BTreeMap<Vec<usize>, Coefficient>,
    mode: DerivativeMode,
    trivially_zero: bool,
}

/// Sections are degree-0 forms.
pub type SectionRep = PolarisedFormRep;

impl fmt::Debug for PolarisedFormRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolarisedFormRep")
            .field("model", &self.model.name())
            .field("degree", &self.degree)
            .field("indices", &self.coeffs.keys().collect::<Vec<_>>())
            .field("trivially_zero", &self.trivially_zero)
            .finish()
    }
}

/// Sort `idx`, returning the permutation sign, or `None` on a repeat.
fn canonicalise(idx: &[usize]) -> Option<(Vec<usize>, f64)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// All increasing multi-indices of length k in 1..=n.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    crate::polytope::combinations(n, k)
        .into_iter()
        .map(|c| c.into_iter().map(|i| i + 1).collect())
        .collect()
}

fn sum_coefficient(terms: Vec<(C64, Coefficient)>) -> Coefficient {
    Coefficient::new(move |p| terms.iter().map(|(w, c)| *w * c.eval(p)).sum())
}

impl PolarisedFormRep {
    pub fn zero(model: ModelRef, degree: usize) -> Self {
        let trivially_zero = degree > model.rank();
        Self {
            model,
            degree,
            coeffs: BTreeMap::new(),
            mode: DerivativeMode::default(),
            trivially_zero,
        }
    }

    /// Build from (multi-index, coefficient) pairs. Indices may be given in
    /// any order; they are sorted with the permutation sign and repeated
    /// indices give zero. Entries on the same index are summed.
    pub fn from_coefficients(
        model: ModelRef,
        degree: usize,
        entries: Vec<(Vec<usize>, Coefficient)>,
    ) -> Result<Self> {
        let n = model.rank();
        let mut grouped: BTreeMap<Vec<usize>, Vec<(C64, Coefficient)>> = BTreeMap::new();
        for (idx, c) in entries {
            if idx.len() != degree {
                return Err(Error::InvalidDegree(idx.len() as i64));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i == 0 || i > n) {
                return Err(Error::GeneratorOutOfRange {
                    index: bad,
                    rank: n,
                });
            }
            if let Some((key, sign)) = canonicalise(&idx) {
                grouped.entry(key).or_default().push((C64::new(sign, 0.0), c));
            }
        }
        let mut form = Self::zero(model, degree);
        if form.trivially_zero {
            return Ok(form);
        }
        for (key, mut terms) in grouped {
            let c = if terms.len() == 1 && terms[0].0 == C64::new(1.0, 0.0) {
                terms.pop().unwrap().1
            } else {
                sum_coefficient(terms)
            };
            form.coeffs.insert(key, c);
        }
        Ok(form)
    }

    /// Degree-0 form `f (x) s`.
    pub fn section(model: ModelRef, f: Coefficient) -> Self {
        Self::from_coefficients(model, 0, vec![(vec![], f)]).expect("degree 0 is always valid")
    }

    /// `dy_index (x) s` with coefficient 1.
    pub fn basis(model: ModelRef, index: usize) -> Result<Self> {
        Self::from_coefficients(model, 1, vec![(vec![index], Coefficient::constant(C64::new(1.0, 0.0)))])
    }

    pub fn with_mode(mut self, mode: DerivativeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn model(&self) -> &ModelRef {
        &self.model
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn mode(&self) -> DerivativeMode {
        self.mode
    }
    /// Degree exceeds the polarisation rank, so the form is identically zero.
    pub fn is_trivially_zero(&self) -> bool {
        self.trivially_zero
    }
    pub fn indices(&self) -> impl Iterator<Item = &Vec<usize>> {
        self.coeffs.keys()
    }
    pub fn coefficient_fn(&self, idx: &[usize]) -> Option<&Coefficient> {
        self.coeffs.get(idx)
    }

    /// Coefficient on an increasing multi-index, 0 when absent.
    pub fn coefficient(&self, idx: &[usize], p: &[f64]) -> C64 {
        self.coeffs.get(idx).map_or(C64::new(0.0, 0.0), |c| c.eval(p))
    }

    /// Dense list of all coefficients at `p` in index order.
    pub fn values(&self, p: &[f64]) -> Vec<(Vec<usize>, C64)> {
        if self.trivially_zero {
            return Vec::new();
        }
        multi_indices(self.model.rank(), self.degree)
            .into_iter()
            .map(|idx| {
                let v = self.coefficient(&idx, p);
                (idx, v)
            })
            .collect()
    }

    /// Largest coefficient modulus at `p`.
    pub fn max_abs(&self, p: &[f64]) -> f64 {
        self.coeffs
            .values()
            .map(|c| c.eval(p).norm())
            .fold(0.0, f64::max)
    }

    fn same_model(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.model, &other.model) || self.model.spec() == other.model.spec() {
            Ok(())
        } else {
            Err(Error::ModelMismatch)
        }
    }

    fn derived(&self, degree: usize, coeffs: BTreeMap<Vec<usize>, Coefficient>) -> Self {
        let mut f = Self::zero(self.model.clone(), degree);
        f.mode = self.mode;
        if !f.trivially_zero {
            f.coeffs = coeffs;
        }
        f
    }

    /// `a + w b`.
    pub fn add_scaled(&self, other: &Self, w: C64) -> Result<Self> {
        self.same_model(other)?;
        if self.degree != other.degree {
            return Err(Error::InvalidDegree(other.degree as i64));
        }
        let mut keys: Vec<Vec<usize>> = self.coeffs.keys().cloned().collect();
        keys.extend(other.coeffs.keys().cloned());
        keys.sort();
        keys.dedup();
        let coeffs = keys
            .into_iter()
            .map(|k| {
                let mut terms = Vec::new();
                if let Some(c) = self.coeffs.get(&k) {
                    terms.push((C64::new(1.0, 0.0), c.clone()));
                }
                if let Some(c) = other.coeffs.get(&k) {
                    terms.push((w, c.clone()));
                }
                (k, sum_coefficient(terms))
            })
            .collect();
        Ok(self.derived(self.degree, coeffs))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    /// Pointwise product with a scalar function.
    pub fn multiply(&self, f: impl Fn(&[f64]) -> C64 + Send + Sync + 'static) -> Self {
        let f: CoeffFn = Arc::new(f);
        let coeffs = self
            .coeffs
            .iter()
            .map(|(k, c)| {
                let (c, f) = (c.clone(), f.clone());
                (k.clone(), Coefficient::new(move |p| f(p) * c.eval(p)))
            })
            .collect();
        self.derived(self.degree, coeffs)
    }

    /// Largest coefficient difference at `p`.
    pub fn residual(&self, other: &Self, p: &[f64]) -> Result<f64> {
        self.same_model(other)?;
        if self.degree != other.degree {
            return Err(Error::InvalidDegree(other.degree as i64));
        }
        let mut keys: Vec<&Vec<usize>> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.sort();
        keys.dedup();
        Ok(keys
            .into_iter()
            .map(|k| (self.coefficient(k, p) - other.coefficient(k, p)).norm())
            .fold(0.0, f64::max))
    }

    /// Derivative of coefficient `c` along generator `j` at `p`.
    fn generator_derivative(&self, c: &Coefficient, j: usize, p: &[f64], cfg: &NumericsConfig) -> C64 {
        let x = self.model.field(j, p);
        if let (DerivativeMode::Analytic, Some(g)) = (self.mode, c.gradient()) {
            return g(p).iter().zip(&x).map(|(d, v)| d * v).sum();
        }
        if x.iter().all(|v| *v == 0.0) {
            return C64::new(0.0, 0.0);
        }
        central_difference(
            |s| {
                let q: Vec<f64> = p.iter().zip(&x).map(|(a, v)| a + s * v).collect();
                c.eval(&q)
            },
            cfg.fd_step,
            cfg.fd_richardson,
        )
    }
}

/// Wedge product with the usual shuffle signs.
pub fn wedge(a: &PolarisedFormRep, b: &PolarisedFormRep) -> Result<PolarisedFormRep> {
    a.same_model(b)?;
    let degree = a.degree + b.degree;
    let mut grouped: BTreeMap<Vec<usize>, Vec<(f64, Coefficient, Coefficient)>> = BTreeMap::new();
    for (i, ca) in &a.coeffs {
        for (j, cb) in &b.coeffs {
            let joined: Vec<usize> = i.iter().chain(j).copied().collect();
            if let Some((key, sign)) = canonicalise(&joined) {
                grouped.entry(key).or_default().push((sign, ca.clone(), cb.clone()));
            }
        }
    }
    let coeffs = grouped
        .into_iter()
        .map(|(k, terms)| {
            let c = Coefficient::new(move |p| {
                terms
                    .iter()
                    .map(|(s, x, y)| *s * x.eval(p) * y.eval(p))
                    .sum()
            });
            (k, c)
        })
        .collect();
    Ok(a.derived(degree, coeffs))
}

/// Contraction with generator `x`: `(i_X a)_{I \ j} = (-1)^pos a_I`.
pub fn interior_product(x: VectorFieldId, a: &PolarisedFormRep) -> Result<PolarisedFormRep> {
    let n = a.model.rank();
    if x.index == 0 || x.index > n {
        return Err(Error::GeneratorOutOfRange {
            index: x.index,
            rank: n,
        });
    }
    if a.degree == 0 {
        return Err(Error::InvalidDegree(-1));
    }
    let mut coeffs = BTreeMap::new();
    for (idx, c) in &a.coeffs {
        if let Some(pos) = idx.iter().position(|&i| i == x.index) {
            let mut rest = idx.clone();
            rest.remove(pos);
            let c = if pos % 2 == 0 {
                c.clone()
            } else {
                let c = c.clone();
                Coefficient::new(move |p| -c.eval(p))
            };
            coeffs.insert(rest, c);
        }
    }
    Ok(a.derived(a.degree - 1, coeffs))
}

/// Exterior derivative along the polarisation, `d_P`, ignoring the bundle.
pub fn polarised_derivative(a: &PolarisedFormRep, cfg: &NumericsConfig) -> PolarisedFormRep {
    let n = a.model.rank();
    let degree = a.degree + 1;
    let mut coeffs = BTreeMap::new();
    if degree <= n {
        for target in multi_indices(n, degree) {
            // terms (sign, generator, source coefficient)
            let terms: Vec<(f64, usize, Coefficient)> = target
                .iter()
                .enumerate()
                .filter_map(|(m, &j)| {
                    let mut src = target.clone();
                    src.remove(m);
                    a.coeffs.get(&src).map(|c| {
                        let s = if m % 2 == 0 { 1.0 } else { -1.0 };
                        (s, j, c.clone())
                    })
                })
                .collect();
            if terms.is_empty() {
                continue;
            }
            let form = a.clone();
            let cfg = *cfg;
            let c = Coefficient::new(move |p| {
                terms
                    .iter()
                    .map(|(s, j, c)| *s * form.generator_derivative(c, *j, p, &cfg))
                    .sum()
            });
            coeffs.insert(target, c);
        }
    }
    a.derived(degree, coeffs)
}

/// Restricted connection potential `Theta_P` as a plain 1-form.
pub fn potential_form(model: ModelRef) -> PolarisedFormRep {
    let entries = (1..=model.rank())
        .map(|j| {
            let m = model.clone();
            (vec![j], Coefficient::new(move |p| C64::new(m.hamiltonian_index(j, p), 0.0)))
        })
        .collect();
    PolarisedFormRep::from_coefficients(model, 1, entries).expect("indices in range")
}

/// `d^nabla a = d_P a - i Theta_P ^ a`. Degree n input gives the trivially
/// zero form of degree n + 1.
pub fn covariant_derivative(a: &PolarisedFormRep, cfg: &NumericsConfig) -> Result<PolarisedFormRep> {
    if a.degree >= a.model.rank() {
        return Ok(a.derived(a.degree + 1, BTreeMap::new()));
    }
    let dp = polarised_derivative(a, cfg);
    let twist = wedge(&potential_form(a.model.clone()), a)?;
    dp.add_scaled(&twist, -I)
}

/// Cartan formula `i_X d^nabla + d^nabla i_X`.
pub fn lie_derivative(
    x: VectorFieldId,
    a: &PolarisedFormRep,
    cfg: &NumericsConfig,
) -> Result<PolarisedFormRep> {
    let first = interior_product(x, &covariant_derivative(a, cfg)?)?;
    if a.degree == 0 {
        return Ok(first);
    }
    let second = covariant_derivative(&interior_product(x, a)?, cfg)?;
    first.add_scaled(&second, C64::new(1.0, 0.0))
}

/// Parallel-transport pullback along the flow of `x` for time `t`:
/// coefficients become `exp(-i t Theta(X)(p)) a_I(phi_t(p))`. The catalogued
/// generators are invariant under each other's flows, so multi-indices are
/// unchanged.
pub fn pullback(
    x: VectorFieldId,
    t: f64,
    a: &PolarisedFormRep,
    _cfg: &NumericsConfig,
) -> Result<PolarisedFormRep> {
    let model = a.model.clone();
    model.generator(x.index)?;
    if t == 0.0 {
        return Ok(a.clone());
    }
    let coeffs = a
        .coeffs
        .iter()
        .map(|(k, c)| {
            let (c, m, j) = (c.clone(), model.clone(), x.index);
            let coef = Coefficient::new(move |p| {
                let h = m.hamiltonian_index(j, p);
                let q = m.flow_index(j, p, t);
                (-I * t * h).exp() * c.eval(&q)
            });
            (k.clone(), coef)
        })
        .collect();
    Ok(a.derived(a.degree, coeffs))
}
