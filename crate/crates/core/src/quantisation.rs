//! Per-degree quantisation dimensions from the counting theorems.
//!
//! Dispatch table (anything else is refused):
//!
//! | base                     | nonzero degree | entry                                   |
//! |--------------------------|----------------|-----------------------------------------|
//! | cylinder                 | 1              | number of BS leaves                     |
//! | disk                     | 1              | number of nonsingular BS leaves         |
//! | linear(n)                | 0              | functions on R^n                        |
//! | liouville(n, k)          | k              | BS count copies of functions on R^(n-k) |
//! | elliptic(n, k)           | n              | nonsingular BS fibres                   |
//! | lagrangian bundle, k > 0 | k              | as liouville(n, k)                      |
//! | compact toric polytope   | n              | interior lattice points                 |
//! | almost toric, dim 4      | 1, 2           | regular count plus unresolved blocks    |
//! | product(cyl or disk, M)  | deg(M) + 1     | BS count copies of the entries of M     |
//! | focus-focus chart        | 1, 2           | unresolved                              |

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bohr_sommerfeld::{
    enumerate_bs_fibres_shifted, regular_count, BSFibreRecord, LabelEntry, Polytope, Regularity,
    Window,
};
use crate::circle_action::{holonomy_formula, OrbitSample};
use crate::error::{Error, Result};
use crate::models::{make_model, HolonomyConvention, Model, ModelKind, ModelSpec};

pub const DISPATCH_TABLE: &str = "\
  cylinder                  -> degree 1: number of BS leaves
  disk                      -> degree 1: nonsingular BS leaves
  linear(n)                 -> degree 0: functions on R^n
  liouville(n,k)            -> degree k: BS-count copies of functions on R^(n-k)
  elliptic(n,k)             -> degree n: nonsingular BS fibres
  lagrangian_bundle(k>0, n) -> degree k: as liouville(n,k)
  toric_polytope (compact)  -> degree n: interior lattice points
  almost_toric4             -> degree 2: regular count + unresolved focus-focus blocks
  product(cylinder|disk, M) -> shifted entries of M times BS count of the factor
  focus_focus chart         -> degrees 1, 2 unresolved";

/// Samples used for the dense-holonomy witness.
pub const WITNESS_SAMPLES: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkedPoint {
    pub point: Vec<f64>,
    pub multiplicity: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FibrationBase {
    ModelChart(ModelSpec),
    ToricPolytope(Polytope),
    LagrangianBundle { fibre_rank: usize, base_dim: usize },
    AlmostToric4 { polytope: Polytope, marked: Vec<MarkedPoint> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FibrationDescriptor {
    pub base: FibrationBase,
    pub compact: bool,
    /// The zero fibre is Bohr-Sommerfeld, so BS values sit on the lattice.
    pub zero_fibre_bs: bool,
    /// Explicit lattice shift per circle action when the zero fibre is not BS.
    pub lattice_offset: Option<Vec<f64>>,
}

impl FibrationDescriptor {
    pub fn new(base: FibrationBase) -> Self {
        Self {
            base,
            compact: false,
            zero_fibre_bs: true,
            lattice_offset: None,
        }
    }

    pub fn model(spec: ModelSpec) -> Self {
        Self::new(FibrationBase::ModelChart(spec))
    }

    pub fn compact(mut self, compact: bool) -> Self {
        self.compact = compact;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match &self.base {
            FibrationBase::AlmostToric4 { polytope, marked } => {
                if polytope.dimension() != 2 {
                    return Err(Error::InvalidModel(format!(
                        "almost toric base must be a polygon, got dimension {}",
                        polytope.dimension()
                    )));
                }
                for (i, m) in marked.iter().enumerate() {
                    if m.multiplicity < 1 {
                        return Err(Error::InvalidModel(format!("marked point {i} has multiplicity 0")));
                    }
                    if m.point.len() != 2 {
                        return Err(Error::InvalidModel(format!("marked point {i} is not planar")));
                    }
                }
            }
            FibrationBase::LagrangianBundle { fibre_rank, base_dim } => {
                if fibre_rank > base_dim || *base_dim == 0 {
                    return Err(Error::InvalidModel(format!(
                        "lagrangian bundle requires 0 <= k <= n and n >= 1, got k={fibre_rank}, n={base_dim}"
                    )));
                }
            }
            _ => {}
        }
        if !self.zero_fibre_bs && self.lattice_offset.is_none() {
            return Err(Error::LatticeNormalisation(
                "zero fibre is not Bohr-Sommerfeld and no lattice_offset was given".into(),
            ));
        }
        Ok(())
    }

    fn offsets(&self) -> Vec<f64> {
        self.lattice_offset.clone().unwrap_or_default()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedBlock {
    pub label: Vec<i64>,
    pub multiplicity: u32,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeEntry {
    Zero,
    Finite(u64),
    FunctionSpace { base_dim: usize, copies: u64 },
    Unresolved { blocks: Vec<UnresolvedBlock> },
    Partial { finite: u64, unresolved: Vec<UnresolvedBlock> },
}

impl DegreeEntry {
    fn function_space(base_dim: usize, copies: u64) -> Self {
        match (base_dim, copies) {
            (_, 0) => DegreeEntry::Zero,
            (0, c) => DegreeEntry::Finite(c),
            (b, c) => DegreeEntry::FunctionSpace { base_dim: b, copies: c },
        }
    }

    fn finite(c: u64) -> Self {
        if c == 0 {
            DegreeEntry::Zero
        } else {
            DegreeEntry::Finite(c)
        }
    }

    /// `b` copies of this entry.
    fn times(&self, b: u64) -> Self {
        if b == 0 {
            return DegreeEntry::Zero;
        }
        let rep = |blocks: &Vec<UnresolvedBlock>| -> Vec<UnresolvedBlock> {
            (0..b).flat_map(|_| blocks.iter().cloned()).collect()
        };
        match self {
            DegreeEntry::Zero => DegreeEntry::Zero,
            DegreeEntry::Finite(c) => DegreeEntry::Finite(c * b),
            DegreeEntry::FunctionSpace { base_dim, copies } => DegreeEntry::FunctionSpace {
                base_dim: *base_dim,
                copies: copies * b,
            },
            DegreeEntry::Unresolved { blocks } => DegreeEntry::Unresolved { blocks: rep(blocks) },
            DegreeEntry::Partial { finite, unresolved } => DegreeEntry::Partial {
                finite: finite * b,
                unresolved: rep(unresolved),
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        *self == DegreeEntry::Zero
    }
}

/// Sampling evidence that the holonomy is nontrivial on a dense set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseHolonomyWitness {
    pub generator: usize,
    pub samples: usize,
    pub nontrivial: usize,
    pub seed: u64,
}

/// Which rule produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dispatch {
    Cylinder,
    Disk,
    Linear,
    Liouville,
    Elliptic,
    LagrangianBundle,
    Toric,
    AlmostToric,
    Product,
    FocusFocus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantisationReport {
    pub dispatch: Dispatch,
    pub per_degree: BTreeMap<usize, DegreeEntry>,
    pub bs_fibres: Vec<BSFibreRecord>,
    pub convention_notes: Vec<String>,
    pub h0_witness: Option<DenseHolonomyWitness>,
}

impl QuantisationReport {
    fn new(dispatch: Dispatch, n: usize) -> Self {
        Self {
            dispatch,
            per_degree: (0..=n).map(|d| (d, DegreeEntry::Zero)).collect(),
            bs_fibres: Vec::new(),
            convention_notes: Vec::new(),
            h0_witness: None,
        }
    }

    pub fn degree(&self, d: usize) -> Option<&DegreeEntry> {
        self.per_degree.get(&d)
    }

    pub fn top_degree(&self) -> usize {
        self.per_degree.keys().copied().max().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QuantiseOptions {
    pub convention: HolonomyConvention,
    pub seed: u64,
    pub witness_samples: usize,
}

impl Default for QuantiseOptions {
    fn default() -> Self {
        Self {
            convention: HolonomyConvention::TransportOracle,
            seed: 0,
            witness_samples: WITNESS_SAMPLES,
        }
    }
}

fn no_theorem(reason: impl Into<String>) -> Error {
    Error::NoTheoremApplies {
        reason: reason.into(),
        table: DISPATCH_TABLE.into(),
    }
}

/// Sample the chart (clipped to [-2, 2]) and count points where the first circle generator has
/// nontrivial holonomy.
pub fn dense_holonomy_witness(
    model: &Model,
    opts: &QuantiseOptions,
) -> Option<DenseHolonomyWitness> {
    let x = *model.circle_generators().first()?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let ranges: Vec<(f64, f64)> = model
        .bounds()
        .iter()
        .map(|b| (b.lo.max(-2.0), b.hi.min(2.0)))
        .collect();
    let mut nontrivial = 0;
    for _ in 0..opts.witness_samples {
        let p: Vec<f64> = ranges.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        let q = holonomy_formula(model, &OrbitSample::new(p, x), opts.convention).ok()?;
        if !q.is_trivial() {
            nontrivial += 1;
        }
    }
    Some(DenseHolonomyWitness {
        generator: x.index,
        samples: opts.witness_samples,
        nontrivial,
        seed: opts.seed,
    })
}

fn split_window(window: &Window, at: usize) -> (Window, Window) {
    let left = (0..at).map(|j| window.actions.get(j).copied().flatten()).collect();
    let right = window.actions.iter().skip(at).copied().collect();
    (Window::new(left), Window::new(right))
}

fn has_rotation(spec: &ModelSpec) -> bool {
    match &spec.kind {
        ModelKind::Disk => true,
        ModelKind::Elliptic { k, .. } => *k > 0,
        ModelKind::Product { left, right } => has_rotation(left) || has_rotation(right),
        _ => false,
    }
}

fn labels_text(records: &[BSFibreRecord]) -> String {
    let parts: Vec<String> = records
        .iter()
        .map(|r| {
            let l: Vec<String> = r.label.iter().map(|e| e.csv_field()).collect();
            format!("({})", l.join(","))
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

/// Quantise a fibration descriptor over an action window.
pub fn quantise(
    desc: &FibrationDescriptor,
    window: &Window,
    opts: &QuantiseOptions,
) -> Result<QuantisationReport> {
    desc.validate()?;
    let offsets = desc.offsets();
    match &desc.base {
        FibrationBase::ModelChart(spec) => {
            let mut report = quantise_chart(spec, window, opts, &offsets, desc.compact)?;
            if has_rotation(spec) {
                let other = match opts.convention {
                    HolonomyConvention::TransportOracle => HolonomyConvention::PaperPrinted,
                    HolonomyConvention::PaperPrinted => HolonomyConvention::TransportOracle,
                };
                let model = make_model(spec.clone())?;
                let alt = enumerate_bs_fibres_shifted(&model, window, other, &offsets)?;
                if alt != report.bs_fibres {
                    report.convention_notes.push(format!(
                        "rotation holonomy convention {}: BS labels {} (nonsingular {}); {}: BS labels {} (nonsingular {})",
                        convention_name(opts.convention),
                        labels_text(&report.bs_fibres),
                        regular_count(&report.bs_fibres),
                        convention_name(other),
                        labels_text(&alt),
                        regular_count(&alt),
                    ));
                }
            }
            Ok(report)
        }
        FibrationBase::ToricPolytope(poly) => {
            let spec = ModelSpec::new(ModelKind::ToricPolytope(poly.clone()));
            quantise_chart(&spec, window, opts, &offsets, desc.compact)
        }
        FibrationBase::LagrangianBundle { fibre_rank, base_dim } => {
            if *fibre_rank == 0 {
                return Err(no_theorem(
                    "lagrangian bundle with k = 0 has no circle action; only the linear model is dispatched",
                ));
            }
            let spec = ModelSpec::liouville(*base_dim, *fibre_rank);
            let mut r = quantise_chart(&spec, window, opts, &offsets, desc.compact)?;
            r.dispatch = Dispatch::LagrangianBundle;
            Ok(r)
        }
        FibrationBase::AlmostToric4 { polytope, marked } => {
            if !desc.compact {
                return Err(no_theorem("almost toric dispatch needs a compact total space"));
            }
            almost_toric(polytope, marked, opts)
        }
    }
}

fn convention_name(c: HolonomyConvention) -> &'static str {
    match c {
        HolonomyConvention::TransportOracle => "transport_oracle",
        HolonomyConvention::PaperPrinted => "paper_printed",
    }
}

fn quantise_chart(
    spec: &ModelSpec,
    window: &Window,
    opts: &QuantiseOptions,
    offsets: &[f64],
    compact: bool,
) -> Result<QuantisationReport> {
    let model = make_model(spec.clone())?;
    let n = model.rank();
    let with_witness = |mut r: QuantisationReport| -> QuantisationReport {
        r.h0_witness = dense_holonomy_witness(&model, opts);
        r
    };
    match &spec.kind {
        ModelKind::Product { left, right } => {
            if !matches!(left.kind, ModelKind::Cylinder | ModelKind::Disk) {
                return Err(no_theorem(format!(
                    "product factorisation needs a cylinder or disk left factor, got {}",
                    left.name()
                )));
            }
            let (lw, rw) = split_window(window, 1);
            let loff: Vec<f64> = offsets.iter().take(1).copied().collect();
            let roff: Vec<f64> = offsets.iter().skip(1).copied().collect();
            let lrep = quantise_chart(left, &lw, opts, &loff, false)?;
            let rrep = quantise_chart(right, &rw, opts, &roff, false)?;
            let mut r = product_factorise(&lrep, &rrep)?;
            r.h0_witness = dense_holonomy_witness(&model, opts);
            Ok(r)
        }
        ModelKind::ToricPolytope(poly) => {
            if !compact {
                return Err(no_theorem("toric polytope dispatch needs a compact total space"));
            }
            let records = enumerate_bs_fibres_shifted(&model, window, opts.convention, offsets)?;
            let mut r = QuantisationReport::new(Dispatch::Toric, poly.dimension());
            r.per_degree
                .insert(poly.dimension(), DegreeEntry::finite(regular_count(&records) as u64));
            r.bs_fibres = records;
            Ok(with_witness(r))
        }
        ModelKind::FocusFocus => {
            let records = enumerate_bs_fibres_shifted(&model, window, opts.convention, offsets)?;
            let mut r = QuantisationReport::new(Dispatch::FocusFocus, 2);
            let blocks = vec![UnresolvedBlock {
                label: vec![0, 0],
                multiplicity: 1,
                reason: "focus-focus neighbourhood: higher cohomology not determined".into(),
            }];
            r.per_degree.insert(1, DegreeEntry::Unresolved { blocks: blocks.clone() });
            r.per_degree.insert(2, DegreeEntry::Unresolved { blocks });
            r.bs_fibres = records;
            Ok(with_witness(r))
        }
        _ => {
            let records = enumerate_bs_fibres_shifted(&model, window, opts.convention, offsets)?;
            let circles = model.circle_generators().len();
            let lattice_count = records
                .iter()
                .map(|r| {
                    r.label
                        .iter()
                        .filter(|l| !matches!(l, LabelEntry::Family(_)))
                        .map(|l| format!("{l:?}"))
                        .collect::<Vec<_>>()
                })
                .collect::<std::collections::BTreeSet<_>>()
                .len() as u64;
            let (dispatch, degree, entry) = match &spec.kind {
                ModelKind::Cylinder => (Dispatch::Cylinder, 1, DegreeEntry::finite(records.len() as u64)),
                ModelKind::Disk => (Dispatch::Disk, 1, DegreeEntry::finite(regular_count(&records) as u64)),
                ModelKind::Linear { n } => (Dispatch::Linear, 0, DegreeEntry::function_space(*n, 1)),
                ModelKind::Liouville { n, k } => {
                    let copies = if *k == 0 { 1 } else { lattice_count };
                    (Dispatch::Liouville, *k, DegreeEntry::function_space(n - k, copies))
                }
                ModelKind::Elliptic { n, .. } => {
                    (Dispatch::Elliptic, *n, DegreeEntry::finite(regular_count(&records) as u64))
                }
                _ => unreachable!("handled above"),
            };
            debug_assert!(degree <= n);
            let mut r = QuantisationReport::new(dispatch, n);
            r.per_degree.insert(degree, entry);
            r.bs_fibres = records;
            if circles > 0 {
                r = with_witness(r);
            }
            Ok(r)
        }
    }
}

/// Combine a cylinder or disk factor with another report: degree `d` of
/// the right factor moves to `d + 1` with multiplicity the left BS count
/// (nonsingular count for the disk).
pub fn product_factorise(
    left: &QuantisationReport,
    right: &QuantisationReport,
) -> Result<QuantisationReport> {
    if !matches!(left.dispatch, Dispatch::Cylinder | Dispatch::Disk) {
        return Err(no_theorem(format!(
            "left factor of a product must be a cylinder or disk report, got {:?}",
            left.dispatch
        )));
    }
    let b = match left.degree(1) {
        Some(DegreeEntry::Finite(b)) => *b,
        Some(DegreeEntry::Zero) | None => 0,
        Some(other) => {
            return Err(no_theorem(format!("unexpected left factor entry {other:?}")));
        }
    };
    let n = right.top_degree() + 1;
    let mut r = QuantisationReport::new(Dispatch::Product, n);
    for (&d, e) in &right.per_degree {
        r.per_degree.insert(d + 1, e.times(b));
    }
    let mut fibres = Vec::new();
    for lf in &left.bs_fibres {
        for rf in &right.bs_fibres {
            let mut label = lf.label.clone();
            label.extend(rf.label.iter().copied());
            let regularity = match (lf.regularity, rf.regularity) {
                (Regularity::FocusFocusSingular, _) | (_, Regularity::FocusFocusSingular) => {
                    Regularity::FocusFocusSingular
                }
                (Regularity::Regular, Regularity::Regular) => Regularity::Regular,
                _ => Regularity::EllipticSingular {
                    rank: lf.fibre_dim + rf.fibre_dim,
                },
            };
            fibres.push(BSFibreRecord {
                label,
                regularity,
                fibre_dim: lf.fibre_dim + rf.fibre_dim,
            });
        }
    }
    r.bs_fibres = fibres;
    r.convention_notes = left
        .convention_notes
        .iter()
        .chain(&right.convention_notes)
        .cloned()
        .collect();
    Ok(r)
}

fn almost_toric(
    polytope: &Polytope,
    marked: &[MarkedPoint],
    opts: &QuantiseOptions,
) -> Result<QuantisationReport> {
    let model = make_model(ModelSpec::new(ModelKind::ToricPolytope(polytope.clone())))?;
    let records = enumerate_bs_fibres_shifted(&model, &Window::unbounded(), opts.convention, &[])?;
    let mut r = QuantisationReport::new(Dispatch::AlmostToric, 2);
    let mut blocks = Vec::new();
    let mut ff_labels = Vec::new();
    for m in marked {
        let lattice: Option<Vec<i64>> = m
            .point
            .iter()
            .map(|&v| (v.fract() == 0.0).then_some(v as i64))
            .collect();
        match lattice.filter(|x| polytope.classify(x) == Some(true)) {
            Some(x) => {
                blocks.push(UnresolvedBlock {
                    label: x.clone(),
                    multiplicity: m.multiplicity,
                    reason: "focus-focus Bohr-Sommerfeld fibre: contribution open".into(),
                });
                ff_labels.push(x);
            }
            None => r.convention_notes.push(format!(
                "marked point {:?} is not an interior lattice point; its fibre is not Bohr-Sommerfeld and contributes nothing",
                m.point
            )),
        }
    }
    let mut fibres = Vec::new();
    for mut rec in records {
        let label: Vec<i64> = rec
            .label
            .iter()
            .map(|l| match l {
                LabelEntry::Lattice(k) => *k,
                _ => unreachable!("toric labels are lattice points"),
            })
            .collect();
        if ff_labels.contains(&label) {
            rec.regularity = Regularity::FocusFocusSingular;
            rec.fibre_dim = 2;
        }
        fibres.push(rec);
    }
    let regular = regular_count(&fibres) as u64;
    if blocks.is_empty() {
        r.per_degree.insert(2, DegreeEntry::finite(regular));
    } else {
        r.per_degree.insert(1, DegreeEntry::Unresolved { blocks: blocks.clone() });
        r.per_degree.insert(
            2,
            DegreeEntry::Partial {
                finite: regular,
                unresolved: blocks,
            },
        );
    }
    r.bs_fibres = fibres;
    r.h0_witness = dense_holonomy_witness(&model, opts);
    Ok(r)
}
