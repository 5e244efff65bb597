//! Catalogue of the explicit local models.
//!
//! Every model is assembled from elementary blocks, each owning a few chart
//! coordinates and contributing polarisation generators, a piece of the
//! connection potential and closed-form flows:
//!
//! | block        | coords             | generator(s)                       | potential                 |
//! |--------------|--------------------|------------------------------------|---------------------------|
//! | `Angle`      | (x, y), y periodic | d/dy                               | x dy                      |
//! | `Translation`| (x, y)             | d/dy                               | x dy                      |
//! | `Rotation`   | (x, y)             | -2y d/dx + 2x d/dy                 | (x dy - y dx)/2           |
//! | `FocusFocus` | (x1, x2, y1, y2)   | X1 hyperbolic, X2 rotation         | (x1 dy1 - y1 dx1 + ...)/2 |
//!
//! In every block the symplectic form is `sum dx_j ^ dy_j` and the
//! Hamiltonian of each generator is the potential evaluated on it, with the
//! convention `i_X omega = -dH`.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize, Serializer};

use crate::polytope::Polytope;
use crate::error::{Error, Result};
use crate::numerics::{C64, I};

/// Generator norm below which a point counts as fixed.
pub const FIXED_POINT_NORM: f64 = 1e-12;

/// Open real interval, possibly unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(from = "(Option<f64>, Option<f64>)")]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };
    pub const ANGLE: Interval = Interval { lo: 0.0, hi: TAU };

    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo < v && v < self.hi
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }
}

impl From<(Option<f64>, Option<f64>)> for Interval {
    fn from((lo, hi): (Option<f64>, Option<f64>)) -> Self {
        Interval {
            lo: lo.unwrap_or(f64::NEG_INFINITY),
            hi: hi.unwrap_or(f64::INFINITY),
        }
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let side = |v: f64| if v.is_finite() { Some(v) } else { None };
        (side(self.lo), side(self.hi)).serialize(s)
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.lo, self.hi)
    }
}

/// Which local model, with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    Cylinder,
    Disk,
    Linear { n: usize },
    Liouville { n: usize, k: usize },
    Elliptic { n: usize, k: usize },
    FocusFocus,
    Product { left: Box<ModelSpec>, right: Box<ModelSpec> },
    ToricPolytope(Polytope),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Optional restriction of the default chart bounds.
    pub bounds: Option<Vec<Interval>>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        Self { kind, bounds: None }
    }

    pub fn cylinder() -> Self {
        Self::new(ModelKind::Cylinder)
    }
    pub fn disk() -> Self {
        Self::new(ModelKind::Disk)
    }
    pub fn linear(n: usize) -> Self {
        Self::new(ModelKind::Linear { n })
    }
    pub fn liouville(n: usize, k: usize) -> Self {
        Self::new(ModelKind::Liouville { n, k })
    }
    pub fn elliptic(n: usize, k: usize) -> Self {
        Self::new(ModelKind::Elliptic { n, k })
    }
    pub fn focus_focus() -> Self {
        Self::new(ModelKind::FocusFocus)
    }
    pub fn product(left: ModelSpec, right: ModelSpec) -> Self {
        Self::new(ModelKind::Product {
            left: Box::new(left),
            right: Box::new(right),
        })
    }

    pub fn with_bounds(mut self, bounds: Vec<Interval>) -> Self {
        self.bounds = Some(bounds);
        self
    }

    pub fn name(&self) -> String {
        match &self.kind {
            ModelKind::Cylinder => "cylinder".into(),
            ModelKind::Disk => "disk".into(),
            ModelKind::Linear { n } => format!("linear({n})"),
            ModelKind::Liouville { n, k } => format!("liouville({n},{k})"),
            ModelKind::Elliptic { n, k } => format!("elliptic({n},{k})"),
            ModelKind::FocusFocus => "focus_focus".into(),
            ModelKind::Product { left, right } => {
                format!("product({}, {})", left.name(), right.name())
            }
            ModelKind::ToricPolytope(p) => format!("toric_polytope(dim {})", p.dimension()),
        }
    }
}

/// Holonomy period convention for rotation blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HolonomyConvention {
    /// Minimal period of the flow (pi for `-2y d/dx + 2x d/dy`).
    #[default]
    TransportOracle,
    /// Parameter period 2 pi, reproducing the printed `exp(2 pi i (x^2+y^2))`.
    PaperPrinted,
}

/// Chart point. Angle coordinates are kept in `[0, 2 pi)` by the flows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Self(coords)
    }
    pub fn coords(&self) -> &[f64] {
        &self.0
    }
    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

pub fn reduce_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Signed difference of two angles, in `(-pi, pi]`.
pub fn angle_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Selected polarisation generator, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VectorFieldId {
    pub index: usize,
    pub is_circle_generator: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Period {
    pub value: f64,
    pub fixed_point: bool,
}

/// Connection potential of the distinguished unitary section.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeData {
    pub unitary_phase_label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    Angle,
    Translation,
    Rotation,
    FocusFocus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorKind {
    Angle,
    Translation,
    Rotation,
    Hyperbolic,
    FocusRotation,
}

impl GeneratorKind {
    pub fn is_circle(self) -> bool {
        matches!(
            self,
            GeneratorKind::Angle | GeneratorKind::Rotation | GeneratorKind::FocusRotation
        )
    }
}

impl Block {
    fn generators(self) -> &'static [GeneratorKind] {
        match self {
            Block::Angle => &[GeneratorKind::Angle],
            Block::Translation => &[GeneratorKind::Translation],
            Block::Rotation => &[GeneratorKind::Rotation],
            Block::FocusFocus => &[GeneratorKind::Hyperbolic, GeneratorKind::FocusRotation],
        }
    }

    fn periodic(self) -> &'static [bool] {
        match self {
            Block::Angle => &[false, true],
            Block::FocusFocus => &[false; 4],
            _ => &[false, false],
        }
    }

    fn field(kind: GeneratorKind, c: &[f64]) -> Vec<f64> {
        match kind {
            GeneratorKind::Angle | GeneratorKind::Translation => vec![0.0, 1.0],
            GeneratorKind::Rotation => vec![-2.0 * c[1], 2.0 * c[0]],
            GeneratorKind::Hyperbolic => vec![-c[0], -c[1], c[2], c[3]],
            GeneratorKind::FocusRotation => vec![c[1], -c[0], c[3], -c[2]],
        }
    }

    /// Potential one-form evaluated on a local tangent vector.
    fn theta(self, c: &[f64], v: &[f64]) -> f64 {
        match self {
            Block::Angle | Block::Translation => c[0] * v[1],
            Block::Rotation => 0.5 * (c[0] * v[1] - c[1] * v[0]),
            Block::FocusFocus => {
                0.5 * (c[0] * v[2] - c[2] * v[0] + c[1] * v[3] - c[3] * v[1])
            }
        }
    }

    fn hamiltonian_gradient(kind: GeneratorKind, c: &[f64]) -> Vec<f64> {
        match kind {
            GeneratorKind::Angle | GeneratorKind::Translation => vec![1.0, 0.0],
            GeneratorKind::Rotation => vec![2.0 * c[0], 2.0 * c[1]],
            // x1 y1 + x2 y2
            GeneratorKind::Hyperbolic => vec![c[2], c[3], c[0], c[1]],
            // x1 y2 - x2 y1
            GeneratorKind::FocusRotation => vec![c[3], -c[2], -c[1], c[0]],
        }
    }

    fn flow(kind: GeneratorKind, c: &[f64], t: f64) -> Vec<f64> {
        match kind {
            GeneratorKind::Angle => vec![c[0], reduce_angle(c[1] + t)],
            GeneratorKind::Translation => vec![c[0], c[1] + t],
            GeneratorKind::Rotation => {
                let (s, co) = (2.0 * t).sin_cos();
                vec![c[0] * co - c[1] * s, c[0] * s + c[1] * co]
            }
            GeneratorKind::Hyperbolic => {
                let (d, g) = ((-t).exp(), t.exp());
                vec![c[0] * d, c[1] * d, c[2] * g, c[3] * g]
            }
            GeneratorKind::FocusRotation => {
                let (s, co) = t.sin_cos();
                vec![
                    c[0] * co + c[1] * s,
                    c[1] * co - c[0] * s,
                    c[2] * co + c[3] * s,
                    c[3] * co - c[2] * s,
                ]
            }
        }
    }

    /// Minimal period for circle generators away from fixed points.
    fn minimal_period(kind: GeneratorKind) -> Option<f64> {
        match kind {
            GeneratorKind::Angle | GeneratorKind::FocusRotation => Some(TAU),
            GeneratorKind::Rotation => Some(PI),
            _ => None,
        }
    }

    fn is_singular_at(self, c: &[f64]) -> f64 {
        match self {
            Block::Rotation | Block::FocusFocus => c.iter().map(|v| v * v).sum::<f64>().sqrt(),
            _ => f64::INFINITY,
        }
    }

    fn phase_label(self) -> &'static str {
        match self {
            Block::Angle | Block::Translation => "exp(i x)",
            Block::Rotation => "exp(i (x^2+y^2))",
            Block::FocusFocus => "exp(i (x1 y2 - x2 y1))",
        }
    }
}

#[derive(Debug, Clone)]
struct PlacedBlock {
    block: Block,
    coords: Vec<usize>,
}

#[derive(Debug, Clone, Copy)]
struct GeneratorSlot {
    block: usize,
    kind: GeneratorKind,
}

/// Immutable model handle.
#[derive(Debug, Clone)]
pub struct Model {
    spec: ModelSpec,
    dim: usize,
    blocks: Vec<PlacedBlock>,
    generators: Vec<GeneratorSlot>,
    bounds: Vec<Interval>,
    periodic: Vec<bool>,
}

pub type ModelRef = Arc<Model>;

/// Flat sections `profile(x) * exp(i sum x_j y_j)` in the distinguished gauge.
#[derive(Debug, Clone)]
pub struct FlatSectionFamily {
    x_coords: Vec<usize>,
    y_coords: Vec<usize>,
}

impl FlatSectionFamily {
    /// Evaluate at `p` for a profile depending on the x coordinates only.
    pub fn evaluate(&self, profile: &dyn Fn(&[f64]) -> C64, p: &[f64]) -> C64 {
        let xs: Vec<f64> = self.x_coords.iter().map(|&i| p[i]).collect();
        let phase: f64 = self
            .x_coords
            .iter()
            .zip(&self.y_coords)
            .map(|(&i, &j)| p[i] * p[j])
            .sum();
        profile(&xs) * (I * phase).exp()
    }
}

fn elementary(blocks: &[Block]) -> (Vec<PlacedBlock>, usize) {
    // (x_1..x_n, y_1..y_n) layout
    let n = blocks.len();
    let placed = blocks
        .iter()
        .enumerate()
        .map(|(j, &block)| PlacedBlock {
            block,
            coords: vec![j, n + j],
        })
        .collect();
    (placed, 2 * n)
}

fn layout(kind: &ModelKind) -> Result<(Vec<PlacedBlock>, usize)> {
    Ok(match kind {
        ModelKind::Cylinder => elementary(&[Block::Angle]),
        ModelKind::Disk => elementary(&[Block::Rotation]),
        ModelKind::Linear { n } => {
            if *n == 0 {
                return Err(Error::InvalidModel("linear model needs n >= 1".into()));
            }
            elementary(&vec![Block::Translation; *n])
        }
        ModelKind::Liouville { n, k } => {
            if *n == 0 || k > n {
                return Err(Error::InvalidModel(format!(
                    "liouville requires 0 <= k <= n and n >= 1, got n={n}, k={k}"
                )));
            }
            // circle directions first
            let mut b = vec![Block::Angle; *k];
            b.extend(vec![Block::Translation; n - k]);
            elementary(&b)
        }
        ModelKind::Elliptic { n, k } => {
            if *n == 0 || k > n {
                return Err(Error::InvalidModel(format!(
                    "elliptic requires 0 <= k <= n and n >= 1, got n={n}, k={k}"
                )));
            }
            let mut b = vec![Block::Rotation; *k];
            b.extend(vec![Block::Angle; n - k]);
            elementary(&b)
        }
        ModelKind::FocusFocus => (
            vec![PlacedBlock {
                block: Block::FocusFocus,
                coords: vec![0, 1, 2, 3],
            }],
            4,
        ),
        ModelKind::ToricPolytope(poly) => {
            // action-angle chart over the interior
            elementary(&vec![Block::Angle; poly.dimension()])
        }
        ModelKind::Product { left, right } => {
            for side in [left, right] {
                if matches!(side.kind, ModelKind::ToricPolytope(_)) {
                    return Err(Error::InvalidModel(
                        "product factor toric_polytope has no global chart".into(),
                    ));
                }
            }
            let (mut lb, ld) = layout(&left.kind)?;
            let (rb, rd) = layout(&right.kind)?;
            lb.extend(rb.into_iter().map(|mut pb| {
                pb.coords.iter_mut().for_each(|c| *c += ld);
                pb
            }));
            (lb, ld + rd)
        }
    })
}

fn default_bounds(spec: &ModelSpec, blocks: &[PlacedBlock], dim: usize) -> Vec<Interval> {
    let mut bounds = vec![Interval::REAL_LINE; dim];
    for pb in blocks {
        for (local, &global) in pb.coords.iter().enumerate() {
            if pb.block.periodic()[local] {
                bounds[global] = Interval::ANGLE;
            }
        }
    }
    if let ModelKind::ToricPolytope(poly) = &spec.kind {
        if let Ok(bbox) = poly.bounding_box() {
            for (j, (lo, hi)) in bbox.into_iter().enumerate() {
                bounds[j] = Interval::new(lo as f64, hi as f64);
            }
        }
    }
    if let ModelKind::Product { left, right } = &spec.kind {
        // honour bounds restrictions given on the factors
        let mut offset = 0;
        for side in [left, right] {
            let (_, d) = layout(&side.kind).expect("validated");
            if let Some(b) = &side.bounds {
                bounds[offset..offset + d].copy_from_slice(b);
            }
            offset += d;
        }
    }
    bounds
}

/// Build a model handle, validating the spec.
pub fn make_model(spec: ModelSpec) -> Result<ModelRef> {
    let (blocks, dim) = layout(&spec.kind)?;
    let mut periodic = vec![false; dim];
    for pb in &blocks {
        for (local, &global) in pb.coords.iter().enumerate() {
            periodic[global] = pb.block.periodic()[local];
        }
    }
    let mut bounds = default_bounds(&spec, &blocks, dim);
    if let Some(user) = &spec.bounds {
        if user.len() != dim {
            return Err(Error::InvalidModel(format!(
                "bounds list has {} entries, model dimension is {dim}",
                user.len()
            )));
        }
        for (j, b) in user.iter().enumerate() {
            if !(b.lo < b.hi) {
                return Err(Error::InvalidModel(format!("empty bounds for coordinate {j}")));
            }
            if periodic[j] && *b != Interval::ANGLE {
                return Err(Error::InvalidModel(format!(
                    "coordinate {j} is an angle with period 2 pi and cannot be restricted"
                )));
            }
        }
        bounds = user.clone();
    }
    let generators = blocks
        .iter()
        .enumerate()
        .flat_map(|(bi, pb)| {
            pb.block
                .generators()
                .iter()
                .map(move |&kind| GeneratorSlot { block: bi, kind })
        })
        .collect::<Vec<_>>();
    debug_assert_eq!(2 * generators.len(), dim);
    Ok(Arc::new(Model {
        spec,
        dim,
        blocks,
        generators,
        bounds,
        periodic,
    }))
}

impl Model {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }
    pub fn name(&self) -> String {
        self.spec.name()
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    /// Number of polarisation generators (half the dimension).
    pub fn rank(&self) -> usize {
        self.generators.len()
    }
    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }
    pub fn periodic_mask(&self) -> &[bool] {
        &self.periodic
    }

    pub fn gauge(&self) -> GaugeData {
        let labels: Vec<&str> = self.blocks.iter().map(|b| b.block.phase_label()).collect();
        GaugeData {
            unitary_phase_label: labels.join(" * "),
        }
    }

    pub fn generator(&self, index: usize) -> Result<VectorFieldId> {
        let slot = self.slot(index)?;
        Ok(VectorFieldId {
            index,
            is_circle_generator: slot.kind.is_circle(),
        })
    }

    pub fn generators(&self) -> Vec<VectorFieldId> {
        (1..=self.rank()).map(|i| self.generator(i).unwrap()).collect()
    }

    pub fn circle_generators(&self) -> Vec<VectorFieldId> {
        self.generators()
            .into_iter()
            .filter(|g| g.is_circle_generator)
            .collect()
    }

    pub fn generator_kind(&self, id: VectorFieldId) -> Result<GeneratorKind> {
        Ok(self.slot(id.index)?.kind)
    }

    fn slot(&self, index: usize) -> Result<GeneratorSlot> {
        if index == 0 || index > self.rank() {
            return Err(Error::GeneratorOutOfRange {
                index,
                rank: self.rank(),
            });
        }
        Ok(self.generators[index - 1])
    }

    fn local(&self, block: usize, p: &[f64]) -> Vec<f64> {
        self.blocks[block].coords.iter().map(|&i| p[i]).collect()
    }

    pub fn check_point(&self, p: &[f64]) -> Result<()> {
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        for (index, (&value, b)) in p.iter().zip(&self.bounds).enumerate() {
            if self.periodic[index] {
                continue;
            }
            if !value.is_finite() || (b.lo.is_finite() && value < b.lo) || (b.hi.is_finite() && value > b.hi) {
                return Err(Error::OutOfBounds { index, value });
            }
        }
        Ok(())
    }

    /// Reduce angle coordinates into `[0, 2 pi)`.
    pub fn normalise(&self, p: &[f64]) -> Point {
        Point(
            p.iter()
                .zip(&self.periodic)
                .map(|(&v, &per)| if per { reduce_angle(v) } else { v })
                .collect(),
        )
    }

    /// Coordinate-wise difference, angles compared modulo 2 pi.
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .zip(&self.periodic)
            .map(|((&u, &v), &per)| {
                let d = if per { angle_difference(u, v) } else { u - v };
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Components of generator `id` at `p` in the chart basis.
    pub fn polarisation_generator(&self, id: VectorFieldId, p: &[f64]) -> Result<Vec<f64>> {
        let slot = self.slot(id.index)?;
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        Ok(self.field_unchecked(slot, p))
    }

    fn field_unchecked(&self, slot: GeneratorSlot, p: &[f64]) -> Vec<f64> {
        let pb = &self.blocks[slot.block];
        let local = Block::field(slot.kind, &self.local(slot.block, p));
        let mut v = vec![0.0; self.dim];
        for (l, &g) in pb.coords.iter().enumerate() {
            v[g] = local[l];
        }
        v
    }

    /// Generator field by 1-based index, no validation.
    pub(crate) fn field(&self, index: usize, p: &[f64]) -> Vec<f64> {
        self.field_unchecked(self.generators[index - 1], p)
    }

    /// Closed-form flow of generator `id`.
    pub fn flow(&self, id: VectorFieldId, p: &[f64], t: f64) -> Result<Point> {
        let slot = self.slot(id.index)?;
        if p.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        Ok(Point(self.flow_unchecked(slot, p, t)))
    }

    pub(crate) fn flow_index(&self, index: usize, p: &[f64], t: f64) -> Vec<f64> {
        self.flow_unchecked(self.generators[index - 1], p, t)
    }

    fn flow_unchecked(&self, slot: GeneratorSlot, p: &[f64], t: f64) -> Vec<f64> {
        let moved = Block::flow(slot.kind, &self.local(slot.block, p), t);
        let mut q = p.to_vec();
        for (l, &g) in self.blocks[slot.block].coords.iter().enumerate() {
            q[g] = moved[l];
        }
        q
    }

    pub fn is_fixed_point(&self, id: VectorFieldId, p: &[f64]) -> Result<bool> {
        let v = self.polarisation_generator(id, p)?;
        Ok(v.iter().map(|c| c * c).sum::<f64>().sqrt() < FIXED_POINT_NORM)
    }

    /// Minimal period of the orbit through `p`; 0 with a flag at fixed points.
    pub fn period(&self, id: VectorFieldId, p: &[f64]) -> Result<Period> {
        let slot = self.slot(id.index)?;
        let base = Block::minimal_period(slot.kind).ok_or(Error::NotCircleGenerator(id.index))?;
        if self.is_fixed_point(id, p)? {
            return Ok(Period {
                value: 0.0,
                fixed_point: true,
            });
        }
        Ok(Period {
            value: base,
            fixed_point: false,
        })
    }

    /// Period used for holonomy and orbit integrals under `convention`.
    pub fn holonomy_period(
        &self,
        id: VectorFieldId,
        p: &[f64],
        convention: HolonomyConvention,
    ) -> Result<Period> {
        let per = self.period(id, p)?;
        let kind = self.slot(id.index)?.kind;
        if !per.fixed_point
            && kind == GeneratorKind::Rotation
            && convention == HolonomyConvention::PaperPrinted
        {
            return Ok(Period {
                value: TAU,
                fixed_point: false,
            });
        }
        Ok(per)
    }

    /// Holonomy period away from fixed points under `convention`.
    pub fn orbit_period(&self, id: VectorFieldId, convention: HolonomyConvention) -> Result<f64> {
        let kind = self.slot(id.index)?.kind;
        let base = Block::minimal_period(kind).ok_or(Error::NotCircleGenerator(id.index))?;
        Ok(match (kind, convention) {
            (GeneratorKind::Rotation, HolonomyConvention::PaperPrinted) => TAU,
            _ => base,
        })
    }

    /// Potential one-form evaluated on a chart tangent vector.
    pub fn theta(&self, p: &[f64], v: &[f64]) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(bi, pb)| {
                let c = self.local(bi, p);
                let lv: Vec<f64> = pb.coords.iter().map(|&i| v[i]).collect();
                pb.block.theta(&c, &lv)
            })
            .sum()
    }

    /// Potential one-form as a chart covector.
    pub fn theta_covector(&self, p: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|j| {
                let mut e = vec![0.0; self.dim];
                e[j] = 1.0;
                self.theta(p, &e)
            })
            .collect()
    }

    /// Symplectic form as an antisymmetric matrix, `omega[i][j] = omega(e_i, e_j)`.
    pub fn omega(&self) -> Vec<Vec<f64>> {
        let mut w = vec![vec![0.0; self.dim]; self.dim];
        for pb in &self.blocks {
            let half = pb.coords.len() / 2;
            for j in 0..half {
                let (x, y) = (pb.coords[j], pb.coords[half + j]);
                w[x][y] = 1.0;
                w[y][x] = -1.0;
            }
        }
        w
    }

    /// Hamiltonian of a generator: the potential evaluated on it.
    pub fn hamiltonian(&self, id: VectorFieldId, p: &[f64]) -> Result<f64> {
        let v = self.polarisation_generator(id, p)?;
        Ok(self.theta(p, &v))
    }

    pub(crate) fn hamiltonian_index(&self, index: usize, p: &[f64]) -> f64 {
        self.theta(p, &self.field(index, p))
    }

    pub fn hamiltonian_gradient(&self, id: VectorFieldId, p: &[f64]) -> Result<Vec<f64>> {
        let slot = self.slot(id.index)?;
        let local = Block::hamiltonian_gradient(slot.kind, &self.local(slot.block, p));
        let mut g = vec![0.0; self.dim];
        for (l, &gi) in self.blocks[slot.block].coords.iter().enumerate() {
            g[gi] = local[l];
        }
        Ok(g)
    }

    /// Distance from `p` to the nearest singular point of the polarisation.
    pub fn distance_to_singular(&self, p: &[f64]) -> f64 {
        self.blocks
            .iter()
            .enumerate()
            .map(|(bi, pb)| pb.block.is_singular_at(&self.local(bi, p)))
            .fold(f64::INFINITY, f64::min)
    }

    /// Blocks making up the model, with their global coordinate indices.
    pub fn block_layout(&self) -> Vec<(Block, Vec<usize>)> {
        self.blocks
            .iter()
            .map(|pb| (pb.block, pb.coords.clone()))
            .collect()
    }

    /// Block index owning generator `index` (1-based).
    pub fn generator_block(&self, index: usize) -> Result<usize> {
        Ok(self.slot(index)?.block)
    }

    /// Closed-form flat sections, available when every block is a
    /// translation or angle block (cylinder, linear, Liouville).
    pub fn flat_section_closed_form(&self) -> Option<FlatSectionFamily> {
        if self
            .blocks
            .iter()
            .all(|b| matches!(b.block, Block::Angle | Block::Translation))
        {
            Some(FlatSectionFamily {
                x_coords: self.blocks.iter().map(|b| b.coords[0]).collect(),
                y_coords: self.blocks.iter().map(|b| b.coords[1]).collect(),
            })
        } else {
            None
        }
    }
}
