//! Bohr-Sommerfeld points and fibres.
//!
//! A point is Bohr-Sommerfeld when every circle generator has trivial
//! holonomy there. On the catalogued models the holonomy of generator `j`
//! is `exp(i per_j F_j)` with `F_j` its Hamiltonian, so the BS values of
//! `F_j` form the lattice `(2 pi / per_j) Z`, optionally shifted.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::circle_action::{holonomy_formula, OrbitSample};
use crate::error::{Error, Result};
use crate::forms::NumericsConfig;
use crate::models::{Block, GeneratorKind, HolonomyConvention, Interval, Model, ModelKind, Point};

pub use crate::polytope::{lattice_points, Halfspace, LatticePoints, Polytope};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regularity {
    Regular,
    /// Fibre of dimension `rank` where some elliptic actions vanish.
    EllipticSingular { rank: usize },
    FocusFocusSingular,
}

impl Regularity {
    pub fn tag(&self) -> String {
        match self {
            Regularity::Regular => "regular".into(),
            Regularity::EllipticSingular { rank } => format!("elliptic_singular({rank})"),
            Regularity::FocusFocusSingular => "focus_focus_singular".into(),
        }
    }
}

/// One component of a fibre label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelEntry {
    /// Quantised action value on the lattice.
    Lattice(i64),
    /// Quantised action value on a shifted lattice, or an isolated critical value.
    Real(f64),
    /// Continuum of fibres in a direction without circle action.
    Family(Interval),
}

impl LabelEntry {
    /// Representative action value.
    pub fn representative(&self) -> f64 {
        match *self {
            LabelEntry::Lattice(k) => k as f64,
            LabelEntry::Real(v) => v,
            LabelEntry::Family(iv) => match (iv.lo.is_finite(), iv.hi.is_finite()) {
                (true, true) => 0.5 * (iv.lo + iv.hi),
                (true, false) => iv.lo + 1.0,
                (false, true) => iv.hi - 1.0,
                (false, false) => 0.0,
            },
        }
    }

    pub fn csv_field(&self) -> String {
        match self {
            LabelEntry::Lattice(k) => k.to_string(),
            LabelEntry::Real(v) => format!("{v}"),
            LabelEntry::Family(iv) => {
                let side = |v: f64| if v.is_finite() { format!("{v}") } else { String::new() };
                format!("{}..{}", side(iv.lo), side(iv.hi))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSFibreRecord {
    pub label: Vec<LabelEntry>,
    pub regularity: Regularity,
    pub fibre_dim: usize,
}

/// Open action window, one interval per generator in generator order.
/// Absent entries are unbounded. For a rotation action `F >= 0`, and a
/// window whose lower end is at most 0 includes the fixed point `F = 0`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Window {
    pub actions: Vec<Option<Interval>>,
}

impl Window {
    pub fn new(actions: Vec<Option<Interval>>) -> Self {
        Self { actions }
    }

    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn get(&self, j: usize) -> Interval {
        self.actions.get(j).copied().flatten().unwrap_or(Interval::REAL_LINE)
    }
}

/// Every circle generator has `|Q - 1| < 1e-8` at `p`.
pub fn is_bs_point(model: &Model, p: &[f64], cfg: &NumericsConfig) -> Result<bool> {
    model.check_point(p)?;
    for x in model.circle_generators() {
        let q = holonomy_formula(model, &OrbitSample::new(p.to_vec(), x), cfg.convention)?;
        if !q.is_trivial() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A point on the fibre with the given action values, generator order.
pub fn fibre_point(model: &Model, actions: &[f64]) -> Result<Point> {
    if actions.len() != model.rank() {
        return Err(Error::DimensionMismatch {
            expected: model.rank(),
            got: actions.len(),
        });
    }
    let mut p = vec![0.0; model.dim()];
    let mut j = 0;
    for (block, coords) in model.block_layout() {
        match block {
            Block::Angle | Block::Translation => {
                p[coords[0]] = actions[j];
                j += 1;
            }
            Block::Rotation => {
                if actions[j] < 0.0 {
                    return Err(Error::OutOfBounds {
                        index: coords[0],
                        value: actions[j],
                    });
                }
                p[coords[0]] = actions[j].sqrt();
                j += 1;
            }
            Block::FocusFocus => {
                // (1, 0, F1, F2) has x1 y1 + x2 y2 = F1, x1 y2 - x2 y1 = F2
                p[coords[0]] = 1.0;
                p[coords[2]] = actions[j];
                p[coords[3]] = actions[j + 1];
                j += 2;
            }
        }
    }
    Ok(Point(p))
}

/// Lattice spacing of the BS values of generator `index`, if it is a circle.
pub fn lattice_spacing(model: &Model, index: usize, convention: HolonomyConvention) -> Result<Option<f64>> {
    let id = model.generator(index)?;
    if !id.is_circle_generator {
        return Ok(None);
    }
    Ok(Some(TAU / model.orbit_period(id, convention)?))
}

#[derive(Debug, Clone)]
enum Axis {
    Lattice { values: Vec<f64>, rotation: bool, offset: f64 },
    Family { window: Interval, hyperbolic: bool },
}

fn lattice_values(window: Interval, spacing: f64, offset: f64, rotation: bool, j: usize) -> Result<Vec<f64>> {
    let mut lo = window.lo;
    let mut include_zero = false;
    if rotation && lo <= 0.0 {
        lo = 0.0;
        include_zero = true;
    }
    if !window.hi.is_finite() || !lo.is_finite() {
        return Err(Error::UnboundedWindow(j + 1));
    }
    let kmin = ((lo - offset) / spacing).floor() as i64;
    let kmax = ((window.hi - offset) / spacing).ceil() as i64;
    Ok((kmin..=kmax)
        .map(|k| offset + spacing * k as f64)
        .filter(|&v| (v > lo && v < window.hi) || (include_zero && v == 0.0))
        .collect())
}

fn label_for(v: f64, offset: f64) -> LabelEntry {
    if offset == 0.0 && v.fract() == 0.0 {
        LabelEntry::Lattice(v as i64)
    } else {
        LabelEntry::Real(v)
    }
}

/// One record per BS lattice value in the window.
pub fn enumerate_bs_fibres(
    model: &Model,
    window: &Window,
    convention: HolonomyConvention,
) -> Result<Vec<BSFibreRecord>> {
    enumerate_bs_fibres_shifted(model, window, convention, &[])
}

/// As [`enumerate_bs_fibres`] with the lattice of circle action `j` shifted
/// by `offsets[j]` (missing entries are 0).
pub fn enumerate_bs_fibres_shifted(
    model: &Model,
    window: &Window,
    convention: HolonomyConvention,
    offsets: &[f64],
) -> Result<Vec<BSFibreRecord>> {
    if let ModelKind::ToricPolytope(poly) = &model.spec().kind {
        return toric_fibres(poly);
    }
    let n = model.rank();
    if window.actions.len() > n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: window.actions.len(),
        });
    }
    let mut axes = Vec::with_capacity(n);
    for j in 0..n {
        let id = model.generator(j + 1)?;
        let kind = model.generator_kind(id)?;
        let w = window.get(j);
        if let Some(spacing) = lattice_spacing(model, j + 1, convention)? {
            let rotation = kind == GeneratorKind::Rotation;
            let offset = offsets.get(j).copied().unwrap_or(0.0);
            let values = lattice_values(w, spacing, offset, rotation, j)?;
            axes.push(Axis::Lattice { values, rotation, offset });
        } else {
            axes.push(Axis::Family {
                window: w,
                hyperbolic: kind == GeneratorKind::Hyperbolic,
            });
        }
    }

    // cartesian product in generator order, last axis fastest
    let mut records: Vec<(Vec<LabelEntry>, usize, bool)> = vec![(Vec::new(), 0, false)];
    for axis in &axes {
        let mut next = Vec::new();
        for (label, collapsed, ff) in &records {
            match axis {
                Axis::Lattice { values, rotation, offset } => {
                    for &v in values {
                        let mut l = label.clone();
                        l.push(label_for(v, *offset));
                        let c = collapsed + usize::from(*rotation && v == 0.0);
                        next.push((l, c, *ff));
                    }
                }
                Axis::Family { window: w, hyperbolic } => {
                    // a focus-focus block pairs this axis with the next circle axis
                    let ff_split = *hyperbolic && w.contains(0.0);
                    if ff_split {
                        for (piece, singular) in [
                            (LabelEntry::Family(Interval::new(w.lo, 0.0)), false),
                            (LabelEntry::Real(0.0), true),
                            (LabelEntry::Family(Interval::new(0.0, w.hi)), false),
                        ] {
                            let mut l = label.clone();
                            l.push(piece);
                            next.push((l, *collapsed, singular));
                        }
                    } else {
                        let mut l = label.clone();
                        l.push(LabelEntry::Family(*w));
                        next.push((l, *collapsed, false));
                    }
                }
            }
        }
        records = next;
    }

    // the focus-focus critical fibre needs both actions at 0
    let ff_axes: Vec<(usize, usize)> = model
        .block_layout()
        .iter()
        .scan(0usize, |g, (b, _)| {
            let start = *g;
            *g += if *b == Block::FocusFocus { 2 } else { 1 };
            Some((*b, start))
        })
        .filter(|(b, _)| *b == Block::FocusFocus)
        .map(|(_, s)| (s, s + 1))
        .collect();

    Ok(records
        .into_iter()
        .map(|(label, collapsed, _)| {
            let ff = ff_axes.iter().any(|&(a, b)| {
                label[a] == LabelEntry::Real(0.0) && label[b].representative() == 0.0
            });
            let (regularity, fibre_dim) = if ff {
                (Regularity::FocusFocusSingular, n)
            } else if collapsed > 0 {
                (Regularity::EllipticSingular { rank: n - collapsed }, n - collapsed)
            } else {
                (Regularity::Regular, n)
            };
            BSFibreRecord {
                label,
                regularity,
                fibre_dim,
            }
        })
        .collect())
}

/// Interior lattice points are regular fibres; a boundary point on a face
/// with `c` tight facets has a torus fibre of dimension `d - c`.
fn toric_fibres(poly: &Polytope) -> Result<Vec<BSFibreRecord>> {
    let d = poly.dimension();
    let lp = poly.lattice_points()?;
    let mut all: Vec<(Vec<i64>, bool)> = lp
        .interior
        .into_iter()
        .map(|x| (x, true))
        .chain(lp.boundary.into_iter().map(|x| (x, false)))
        .collect();
    all.sort();
    Ok(all
        .into_iter()
        .map(|(x, interior)| {
            let xf: Vec<f64> = x.iter().map(|&v| v as f64).collect();
            let (regularity, fibre_dim) = if interior {
                (Regularity::Regular, d)
            } else {
                let tight = poly
                    .halfspaces()
                    .iter()
                    .filter(|h| {
                        let s: f64 = h.normal.iter().zip(&xf).map(|(&a, v)| a as f64 * v).sum::<f64>() + h.offset;
                        s.abs() < 1e-9
                    })
                    .count();
                let rank = d.saturating_sub(tight);
                (Regularity::EllipticSingular { rank }, rank)
            };
            BSFibreRecord {
                label: x.into_iter().map(LabelEntry::Lattice).collect(),
                regularity,
                fibre_dim,
            }
        })
        .collect())
}

/// Number of regular records.
pub fn regular_count(records: &[BSFibreRecord]) -> usize {
    records
        .iter()
        .filter(|r| r.regularity == Regularity::Regular)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_model, ModelSpec};

    fn window(v: &[(f64, f64)]) -> Window {
        Window::new(v.iter().map(|&(a, b)| Some(Interval::new(a, b))).collect())
    }

    fn lattice(records: &[BSFibreRecord], j: usize) -> Vec<i64> {
        records
            .iter()
            .map(|r| match r.label[j] {
                LabelEntry::Lattice(k) => k,
                ref other => panic!("{other:?}"),
            })
            .collect()
    }

    #[test]
    fn cylinder_points() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        let cfg = NumericsConfig::default();
        assert!(is_bs_point(&m, &[1.0, 0.3], &cfg).unwrap());
        assert!(!is_bs_point(&m, &[0.5, 0.3], &cfg).unwrap());
    }

    #[test]
    fn cylinder_window_matches_scan() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        let cfg = NumericsConfig::default();
        let recs = enumerate_bs_fibres(&m, &window(&[(-2.5, 2.5)]), cfg.convention).unwrap();
        assert_eq!(lattice(&recs, 0), vec![-2, -1, 0, 1, 2]);
        assert!(recs.iter().all(|r| r.regularity == Regularity::Regular && r.fibre_dim == 1));
        // brute scan at step 1e-3
        let mut hits = Vec::new();
        let mut k = -2500;
        while k <= 2500 {
            let x = k as f64 * 1e-3;
            if x > -2.5 && x < 2.5 && is_bs_point(&m, &[x, 0.0], &cfg).unwrap() {
                hits.push(x.round() as i64);
            }
            k += 1;
        }
        assert_eq!(hits, vec![-2, -1, 0, 1, 2]);
    }

    #[test]
    fn disk_labels_under_both_conventions() {
        let m = make_model(ModelSpec::disk()).unwrap();
        let w = window(&[(f64::NEG_INFINITY, 3.5)]);
        let printed = enumerate_bs_fibres(&m, &w, HolonomyConvention::PaperPrinted).unwrap();
        assert_eq!(lattice(&printed, 0), vec![0, 1, 2, 3]);
        assert_eq!(printed[0].regularity, Regularity::EllipticSingular { rank: 0 });
        assert_eq!(regular_count(&printed), 3);
        let oracle = enumerate_bs_fibres(&m, &w, HolonomyConvention::TransportOracle).unwrap();
        assert_eq!(lattice(&oracle, 0), vec![0, 2]);
        assert_eq!(regular_count(&oracle), 1);
    }

    #[test]
    fn liouville_family() {
        let m = make_model(ModelSpec::liouville(2, 1)).unwrap();
        let w = Window::new(vec![Some(Interval::new(-0.5, 1.5)), None]);
        let recs = enumerate_bs_fibres(&m, &w, HolonomyConvention::TransportOracle).unwrap();
        assert_eq!(lattice(&recs, 0), vec![0, 1]);
        assert!(recs.iter().all(|r| r.label[1] == LabelEntry::Family(Interval::REAL_LINE)));
        assert!(recs.iter().all(|r| r.fibre_dim == 2));
    }

    #[test]
    fn unbounded_quantised_window() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        assert_eq!(
            enumerate_bs_fibres(&m, &Window::unbounded(), HolonomyConvention::TransportOracle),
            Err(Error::UnboundedWindow(1))
        );
        // only non-circle directions unbounded is fine
        let lin = make_model(ModelSpec::linear(2)).unwrap();
        let recs = enumerate_bs_fibres(&lin, &Window::unbounded(), HolonomyConvention::TransportOracle).unwrap();
        assert_eq!(recs.len(), 1);
    }

    #[test]
    fn focus_focus_singular_fibre() {
        let m = make_model(ModelSpec::focus_focus()).unwrap();
        let w = window(&[(-1.0, 1.0), (-1.5, 1.5)]);
        let recs = enumerate_bs_fibres(&m, &w, HolonomyConvention::TransportOracle).unwrap();
        let ff: Vec<_> = recs
            .iter()
            .filter(|r| r.regularity == Regularity::FocusFocusSingular)
            .collect();
        assert_eq!(ff.len(), 1);
        assert_eq!(ff[0].label, vec![LabelEntry::Real(0.0), LabelEntry::Lattice(0)]);
        assert_eq!(recs.len(), 9);
    }

    #[test]
    fn labels_are_bs_and_half_shifts_are_not() {
        let cfg = NumericsConfig::default();
        for spec in [ModelSpec::cylinder(), ModelSpec::disk(), ModelSpec::elliptic(2, 1), ModelSpec::focus_focus()] {
            let m = make_model(spec).unwrap();
            let w = Window::new(vec![Some(Interval::new(-2.2, 3.7)); m.rank()]);
            for r in enumerate_bs_fibres(&m, &w, cfg.convention).unwrap() {
                let actions: Vec<f64> = r.label.iter().map(|l| l.representative()).collect();
                let p = fibre_point(&m, &actions).unwrap();
                assert!(is_bs_point(&m, &p.0, &cfg).unwrap(), "{actions:?}");
                for (j, l) in r.label.iter().enumerate() {
                    if matches!(l, LabelEntry::Lattice(_)) {
                        for shift in [0.5, -0.5] {
                            let mut a = actions.clone();
                            a[j] += shift;
                            if a[j] < 0.0 && m.generator_kind(m.generator(j + 1).unwrap()).unwrap() == GeneratorKind::Rotation {
                                continue;
                            }
                            let p = fibre_point(&m, &a).unwrap();
                            assert!(!is_bs_point(&m, &p.0, &cfg).unwrap(), "{a:?}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn toric_square_records() {
        let sq = Polytope::from_rows(&[[1, 0, 0], [-1, 0, 3], [0, 1, 0], [0, -1, 3]]).unwrap();
        let recs = toric_fibres(&sq).unwrap();
        assert_eq!(recs.len(), 16);
        assert_eq!(regular_count(&recs), 4);
        let corner = recs.iter().find(|r| r.label == vec![LabelEntry::Lattice(0), LabelEntry::Lattice(0)]).unwrap();
        assert_eq!(corner.regularity, Regularity::EllipticSingular { rank: 0 });
        let edge = recs.iter().find(|r| r.label == vec![LabelEntry::Lattice(0), LabelEntry::Lattice(1)]).unwrap();
        assert_eq!(edge.fibre_dim, 1);
    }

    #[test]
    fn shifted_lattice() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        let recs = enumerate_bs_fibres_shifted(&m, &window(&[(-1.0, 1.0)]), HolonomyConvention::TransportOracle, &[0.5]).unwrap();
        assert_eq!(
            recs.iter().map(|r| r.label[0]).collect::<Vec<_>>(),
            vec![LabelEntry::Real(-0.5), LabelEntry::Real(0.5)]
        );
    }
}
