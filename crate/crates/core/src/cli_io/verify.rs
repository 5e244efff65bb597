//! Verification suites: every case reports the worst residual it saw.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::sampling::{case_rng, random_coefficient, random_form, sample_focus_focus_locus, sample_point};
use super::RunConfig;
use crate::bohr_sommerfeld::{enumerate_bs_fibres, fibre_point, is_bs_point, lattice_spacing, Halfspace, Polytope, Window};
use crate::circle_action::{
    cosine_orbit_integral, cosine_orbit_integral_closed_form, holonomy_constancy_check, holonomy_division,
    holonomy_formula, holonomy_transport, homotopy_identity_residual, homotopy_operator, OrbitSample,
};
use crate::error::{Error, Result};
use crate::forms::{
    covariant_derivative, interior_product, lie_derivative, pullback, wedge, NumericsConfig, PolarisedFormRep,
};
use crate::models::{make_model, HolonomyConvention, Interval, ModelRef, ModelSpec};
use crate::numerics::{C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Operators,
    Holonomy,
    Homotopy,
    Division,
    Bs,
    Focusfocus,
    All,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::Operators,
        Suite::Holonomy,
        Suite::Homotopy,
        Suite::Division,
        Suite::Bs,
        Suite::Focusfocus,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Operators => "operators",
            Suite::Holonomy => "holonomy",
            Suite::Homotopy => "homotopy",
            Suite::Division => "division",
            Suite::Bs => "bs",
            Suite::Focusfocus => "focusfocus",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .iter()
            .chain(&[Suite::All])
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| Error::schema("suite", format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyCase {
    pub name: String,
    pub samples: usize,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub seed: u64,
    pub samples: usize,
    pub passed: bool,
    pub cases: Vec<VerifyCase>,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &VerifyCase> {
        self.cases.iter().filter(|c| !c.passed)
    }
}

/// Residual bound for comparisons against closed forms of the holonomy.
pub const HOLONOMY_TOL: f64 = 1e-8;
/// Residual bound for the division roundtrip.
pub const DIVISION_TOL: f64 = 1e-5;
/// Number of factors in the division roundtrip.
pub const DIVISION_FACTORS: usize = 10;
/// Number of random polytopes in the lattice scan.
pub const POLYTOPE_TRIALS: usize = 20;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    num: NumericsConfig,
}

type CaseFn = fn(&Ctx, &str) -> Result<(f64, usize)>;

struct CaseDef {
    name: String,
    tolerance: f64,
    run: CaseFn,
}

const CHART_MODELS: [&str; 3] = ["cylinder", "disk", "focus_focus"];

fn chart(name: &str) -> ModelRef {
    let spec = match name {
        "cylinder" => ModelSpec::cylinder(),
        "disk" => ModelSpec::disk(),
        "focus_focus" => ModelSpec::focus_focus(),
        _ => unreachable!("chart models are fixed"),
    };
    make_model(spec).expect("catalogued model")
}

fn model_of(case: &str) -> ModelRef {
    chart(case.split('/').nth(1).expect("case names are suite/model/check"))
}

fn cases(suite: Suite, tol: f64) -> Vec<CaseDef> {
    let def = |name: String, tolerance: f64, run: CaseFn| CaseDef { name, tolerance, run };
    let mut out = Vec::new();
    match suite {
        Suite::All => {
            for s in Suite::ALL {
                out.extend(cases(s, tol));
            }
        }
        Suite::Operators => {
            for m in CHART_MODELS {
                out.push(def(format!("operators/{m}/d_squared"), tol, op_d_squared));
                out.push(def(format!("operators/{m}/cartan_vs_pullback"), tol, op_cartan));
                out.push(def(format!("operators/{m}/pullback_commutes"), tol, op_pullback_commutes));
            }
            out.push(def("operators/focus_focus/interior_squared".into(), tol, op_interior_squared));
            out.push(def("operators/focus_focus/interior_leibniz".into(), tol, op_interior_leibniz));
        }
        Suite::Holonomy => {
            out.push(def("holonomy/cylinder/closed_form".into(), HOLONOMY_TOL, hol_closed_form));
            out.push(def("holonomy/focus_focus/closed_form".into(), HOLONOMY_TOL, hol_closed_form));
            out.push(def("holonomy/disk/closed_form_transport_oracle".into(), HOLONOMY_TOL, hol_disk));
            out.push(def("holonomy/disk/closed_form_paper_printed".into(), HOLONOMY_TOL, hol_disk));
            for m in CHART_MODELS {
                out.push(def(format!("holonomy/{m}/constancy"), HOLONOMY_TOL, hol_constancy));
            }
        }
        Suite::Homotopy => {
            for m in CHART_MODELS {
                out.push(def(format!("homotopy/{m}/identity"), tol, homotopy_identity));
            }
        }
        Suite::Division => {
            out.push(def("division/disk/roundtrip".into(), DIVISION_TOL, division_roundtrip));
            out.push(def("division/disk/obstruction".into(), 0.0, division_obstruction));
        }
        Suite::Bs => {
            out.push(def("bs/cylinder/lattice_characterisation".into(), 0.0, bs_characterisation));
            out.push(def("bs/disk/lattice_characterisation".into(), 0.0, bs_characterisation));
            out.push(def("bs/cylinder/flow_closure".into(), 0.0, bs_flow_closure));
            out.push(def("bs/disk/flow_closure".into(), 0.0, bs_flow_closure));
            out.push(def("bs/polytope/brute_force_scan".into(), 0.0, bs_polytope_scan));
        }
        Suite::Focusfocus => {
            out.push(def("focusfocus/focus_focus/locus_vanishing".into(), tol, ff_locus));
            out.push(def("focusfocus/disk/origin_vanishing".into(), tol, ff_disk_origin));
            out.push(def("focusfocus/cosine/printed_closed_form".into(), HOLONOMY_TOL, ff_cosine_printed));
            out.push(def("focusfocus/cosine/modulus".into(), HOLONOMY_TOL, ff_cosine_modulus));
            out.push(def("focusfocus/cosine/zero_frequency".into(), HOLONOMY_TOL, ff_cosine_zero));
        }
    }
    out
}

/// Run a suite. Cases are ordered by name and each draws from its own
/// seeded stream.
pub fn run_verify(suite: Suite, cfg: &RunConfig) -> VerifyReport {
    let ctx = Ctx { cfg, num: cfg.numerics() };
    let mut defs = cases(suite, cfg.tol);
    defs.sort_by(|a, b| a.name.cmp(&b.name));
    let cases: Vec<VerifyCase> = defs
        .into_iter()
        .map(|d| match (d.run)(&ctx, &d.name) {
            Ok((residual, samples)) => VerifyCase {
                passed: residual <= d.tolerance,
                name: d.name,
                samples,
                residual,
                tolerance: d.tolerance,
                error: None,
            },
            Err(e) => VerifyCase {
                name: d.name,
                samples: 0,
                residual: f64::INFINITY,
                tolerance: d.tolerance,
                passed: false,
                error: Some(e.to_string()),
            },
        })
        .collect();
    VerifyReport {
        suite,
        seed: cfg.seed,
        samples: cfg.samples,
        passed: cases.iter().all(|c| c.passed),
        cases,
    }
}

fn op_d_squared(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        for degree in 0..m.rank() {
            let a = random_form(m.clone(), degree, &mut rng);
            let dd = covariant_derivative(&covariant_derivative(&a, &ctx.num)?, &ctx.num)?;
            worst = worst.max(dd.max_abs(&p));
        }
    }
    Ok((worst, ctx.cfg.samples))
}

/// Richardson-extrapolated derivative of the pullback at `t = 0`.
fn pullback_derivative(
    x: crate::models::VectorFieldId,
    a: &PolarisedFormRep,
    cfg: &NumericsConfig,
) -> Result<PolarisedFormRep> {
    let central = |h: f64| -> Result<PolarisedFormRep> {
        let d = pullback(x, h, a, cfg)?.sub(&pullback(x, -h, a, cfg)?)?;
        Ok(d.multiply(move |_| C64::new(0.5 / h, 0.0)))
    };
    let h = 1e-3;
    let coarse = central(h)?;
    let fine = central(h / 2.0)?;
    fine.multiply(|_| C64::new(4.0 / 3.0, 0.0))
        .add_scaled(&coarse, C64::new(-1.0 / 3.0, 0.0))
}

fn op_cartan(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        for degree in 0..=m.rank() {
            let a = random_form(m.clone(), degree, &mut rng);
            for x in m.generators() {
                let lie = lie_derivative(x, &a, &ctx.num)?;
                let flow = pullback_derivative(x, &a, &ctx.num)?;
                worst = worst.max(lie.residual(&flow, &p)?);
            }
        }
    }
    Ok((worst, ctx.cfg.samples))
}

fn op_pullback_commutes(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        let t = rng.gen_range(-1.0..1.0);
        for degree in 0..m.rank() {
            let a = random_form(m.clone(), degree, &mut rng);
            for x in m.generators() {
                let lhs = pullback(x, t, &covariant_derivative(&a, &ctx.num)?, &ctx.num)?;
                let rhs = covariant_derivative(&pullback(x, t, &a, &ctx.num)?, &ctx.num)?;
                worst = worst.max(lhs.residual(&rhs, &p)?);
            }
        }
    }
    Ok((worst, ctx.cfg.samples))
}

fn op_interior_squared(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        let a = random_form(m.clone(), 2, &mut rng);
        for x in m.generators() {
            let ii = interior_product(x, &interior_product(x, &a)?)?;
            worst = worst.max(ii.max_abs(&p));
        }
    }
    Ok((worst, ctx.cfg.samples))
}

fn op_interior_leibniz(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        let a = random_form(m.clone(), 1, &mut rng);
        let b = random_form(m.clone(), 1, &mut rng);
        for x in m.generators() {
            let lhs = interior_product(x, &wedge(&a, &b)?)?;
            let rhs = wedge(&interior_product(x, &a)?, &b)?
                .add_scaled(&wedge(&a, &interior_product(x, &b)?)?, C64::new(-1.0, 0.0))?;
            worst = worst.max(lhs.residual(&rhs, &p)?);
        }
    }
    Ok((worst, ctx.cfg.samples))
}

fn transport_gap(m: &ModelRef, p: &[f64], num: &NumericsConfig) -> Result<(C64, C64)> {
    let x = m.circle_generators()[0];
    let orbit = OrbitSample::new(p.to_vec(), x);
    let f = holonomy_formula(m, &orbit, num.convention)?.value;
    let t = holonomy_transport(m, &orbit, num)?.value;
    Ok((f, t))
}

fn hol_closed_form(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        let closed = if m.rank() == 1 {
            (I * TAU * p[0]).exp()
        } else {
            (I * TAU * (p[0] * p[3] - p[1] * p[2])).exp()
        };
        let (f, t) = transport_gap(&m, &p, &ctx.num)?;
        worst = worst.max((f - closed).norm()).max((t - closed).norm());
    }
    Ok((worst, ctx.cfg.samples))
}

fn hol_disk(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let (convention, scale) = if name.ends_with("paper_printed") {
        (HolonomyConvention::PaperPrinted, TAU)
    } else {
        (HolonomyConvention::TransportOracle, PI)
    };
    let num = NumericsConfig { convention, ..ctx.num };
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        let closed = (I * scale * (p[0] * p[0] + p[1] * p[1])).exp();
        let (f, t) = transport_gap(&m, &p, &num)?;
        worst = worst.max((f - closed).norm()).max((t - closed).norm());
    }
    Ok((worst, ctx.cfg.samples))
}

fn hol_constancy(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let x = m.circle_generators()[0];
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        worst = worst.max(holonomy_constancy_check(&m, x, &p, &ctx.num)?);
    }
    Ok((worst, ctx.cfg.samples))
}

fn homotopy_identity(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let x = m.circle_generators()[0];
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_point(&m, &mut rng);
        let a = random_form(m.clone(), 1, &mut rng);
        worst = worst.max(homotopy_identity_residual(x, &a, &p, &ctx.num)?);
    }
    Ok((worst, ctx.cfg.samples))
}

/// Disk points where the holonomy is trivial: the origin and a point on
/// each BS circle of radius below 2.
fn disk_trivial_points(num: &NumericsConfig, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let m = chart("disk");
    let spacing = lattice_spacing(&m, 1, num.convention)
        .expect("disk has one generator")
        .expect("rotation is a circle");
    let mut pts = vec![vec![0.0, 0.0]];
    let mut f = spacing;
    while f < 4.0 {
        let a: f64 = rng.gen_range(0.0..TAU);
        pts.push(vec![f.sqrt() * a.cos(), f.sqrt() * a.sin()]);
        f += spacing;
    }
    pts
}

fn division_roundtrip(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let x = m.circle_generators()[0];
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    for _ in 0..DIVISION_FACTORS {
        let g0 = random_coefficient(&m, &mut rng);
        let (mm, conv) = (m.clone(), ctx.num.convention);
        let g = g0.clone();
        let f = move |p: &[f64]| {
            let q = holonomy_formula(&mm, &OrbitSample::new(p.to_vec(), x), conv)
                .expect("disk points are valid")
                .value;
            (q.inv() - 1.0) * g.eval(p)
        };
        let mut pts = disk_trivial_points(&ctx.num, &mut rng);
        pts.push(sample_point(&m, &mut rng));
        for p in pts {
            let got = holonomy_division(&m, &f, &p, &ctx.num)?;
            worst = worst.max((got - g0.eval(&p)).norm());
            n += 1;
        }
    }
    Ok((worst, n))
}

fn division_obstruction(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let mut rng = case_rng(ctx.cfg.seed, name);
    let one = |_: &[f64]| C64::new(1.0, 0.0);
    let mut missed = 0;
    let mut pts = disk_trivial_points(&ctx.num, &mut rng);
    pts.remove(0);
    pts.push(sample_point(&m, &mut rng));
    for p in &pts {
        if !matches!(holonomy_division(&m, &one, p, &ctx.num), Err(Error::DivisionObstruction { .. })) {
            missed += 1;
        }
    }
    Ok((missed as f64, pts.len()))
}

fn bs_window(name: &str) -> Window {
    let iv = if name.contains("/disk/") {
        Interval::new(0.0, 9.0)
    } else {
        Interval::new(-3.5, 3.5)
    };
    Window::new(vec![Some(iv)])
}

/// Mismatch count: enumerated values must be BS, values half a step away
/// must not be.
fn bs_characterisation(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let spacing = lattice_spacing(&m, 1, ctx.num.convention)?.expect("circle generator");
    let records = enumerate_bs_fibres(&m, &bs_window(name), ctx.num.convention)?;
    let mut bad = 0;
    for r in &records {
        let v = r.label[0].representative();
        if !is_bs_point(&m, fibre_point(&m, &[v])?.coords(), &ctx.num)? {
            bad += 1;
        }
        for s in [-0.5, 0.5] {
            let w = v + s * spacing;
            if w >= 0.0 && is_bs_point(&m, fibre_point(&m, &[w])?.coords(), &ctx.num)? {
                bad += 1;
            }
        }
    }
    Ok((bad as f64, records.len()))
}

fn bs_flow_closure(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let mut rng = case_rng(ctx.cfg.seed, name);
    let records = enumerate_bs_fibres(&m, &bs_window(name), ctx.num.convention)?;
    let mut bad = 0;
    for r in &records {
        let p = fibre_point(&m, &[r.label[0].representative()])?;
        for g in m.generators() {
            let moved = m.flow(g, p.coords(), rng.gen_range(-3.0..3.0))?;
            if !is_bs_point(&m, moved.coords(), &ctx.num)? {
                bad += 1;
            }
        }
    }
    Ok((bad as f64, records.len()))
}

/// Random integer polytope: a box cut by a few extra halfspaces.
pub fn random_polytope(rng: &mut impl Rng) -> Polytope {
    loop {
        let d = rng.gen_range(1..=3usize);
        let mut hs = Vec::new();
        for j in 0..d {
            let mut e = vec![0i64; d];
            e[j] = 1;
            let lo: f64 = rng.gen_range(-3.0..1.0);
            let hi: f64 = lo + rng.gen_range(1.0..6.0);
            hs.push(Halfspace { normal: e.clone(), offset: -lo });
            e[j] = -1;
            hs.push(Halfspace { normal: e, offset: hi });
        }
        for _ in 0..rng.gen_range(0..3) {
            let normal: Vec<i64> = (0..d).map(|_| rng.gen_range(-2..=2)).collect();
            if normal.iter().all(|&a| a == 0) {
                continue;
            }
            hs.push(Halfspace { normal, offset: rng.gen_range(0.5..8.0) });
        }
        if let Ok(p) = Polytope::new(hs) {
            return p;
        }
    }
}

pub type LatticeSplit = (Vec<Vec<i64>>, Vec<Vec<i64>>);

/// Interior and boundary membership by direct floating evaluation over
/// the integer bounding box.
pub fn brute_force_lattice(poly: &Polytope) -> Result<LatticeSplit> {
    let bbox = poly.bounding_box()?;
    let mut interior = Vec::new();
    let mut boundary = Vec::new();
    let mut x: Vec<i64> = bbox.iter().map(|b| b.0).collect();
    loop {
        let slacks: Vec<f64> = poly
            .halfspaces()
            .iter()
            .map(|h| h.normal.iter().zip(&x).map(|(&a, &v)| (a * v) as f64).sum::<f64>() + h.offset)
            .collect();
        if slacks.iter().all(|&s| s > 1e-9) {
            interior.push(x.clone());
        } else if slacks.iter().all(|&s| s > -1e-9) {
            boundary.push(x.clone());
        }
        let mut j = x.len();
        loop {
            if j == 0 {
                return Ok((interior, boundary));
            }
            j -= 1;
            if x[j] < bbox[j].1 {
                x[j] += 1;
                for (k, xk) in x.iter_mut().enumerate().skip(j + 1) {
                    *xk = bbox[k].0;
                }
                break;
            }
        }
    }
}

fn bs_polytope_scan(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut bad = 0;
    for _ in 0..POLYTOPE_TRIALS {
        let poly = random_polytope(&mut rng);
        let lp = poly.lattice_points()?;
        let (interior, boundary) = brute_force_lattice(&poly)?;
        if lp.interior != interior || lp.boundary != boundary {
            bad += 1;
        }
    }
    Ok((bad as f64, POLYTOPE_TRIALS))
}

fn ff_locus(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let x = m.circle_generators()[0];
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let p = sample_focus_focus_locus(&mut rng);
        let a = random_form(m.clone(), 1, &mut rng);
        worst = worst.max(homotopy_operator(x, &a, &p, &ctx.num)?.max_abs());
    }
    Ok((worst, ctx.cfg.samples))
}

fn ff_disk_origin(ctx: &Ctx, name: &str) -> Result<(f64, usize)> {
    let m = model_of(name);
    let x = m.circle_generators()[0];
    let mut rng = case_rng(ctx.cfg.seed, name);
    let mut worst: f64 = 0.0;
    for _ in 0..ctx.cfg.samples {
        let a = random_form(m.clone(), 1, &mut rng);
        worst = worst.max(homotopy_operator(x, &a, &[0.0, 0.0], &ctx.num)?.max_abs());
    }
    Ok((worst, ctx.cfg.samples))
}

/// Frequencies at which the orbit integral is compared with closed forms.
pub const COSINE_FREQUENCIES: [f64; 3] = [0.1, 0.5, 1.7];

/// The closed form exactly as printed, without the factor `i`.
pub fn printed_cosine_closed_form(lambda: f64) -> C64 {
    lambda * ((-I * TAU * lambda).exp() - 1.0) / (lambda * lambda - 1.0)
}

fn ff_cosine_printed(ctx: &Ctx, _: &str) -> Result<(f64, usize)> {
    let worst = COSINE_FREQUENCIES
        .iter()
        .map(|&l| (cosine_orbit_integral(l, &ctx.num) - printed_cosine_closed_form(l)).norm())
        .fold(0.0, f64::max);
    Ok((worst, COSINE_FREQUENCIES.len()))
}

fn ff_cosine_modulus(ctx: &Ctx, _: &str) -> Result<(f64, usize)> {
    let worst = COSINE_FREQUENCIES
        .iter()
        .map(|&l| {
            let q = cosine_orbit_integral(l, &ctx.num);
            let exact = cosine_orbit_integral_closed_form(l);
            (q.norm() - printed_cosine_closed_form(l).norm())
                .abs()
                .max((q - exact).norm())
        })
        .fold(0.0, f64::max);
    Ok((worst, COSINE_FREQUENCIES.len()))
}

fn ff_cosine_zero(ctx: &Ctx, _: &str) -> Result<(f64, usize)> {
    Ok((cosine_orbit_integral(0.0, &ctx.num).norm(), 1))
}
