//! Seeded random forms and sample points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::forms::{multi_indices, Coefficient, PolarisedFormRep};
use crate::models::{Model, ModelRef};
use crate::numerics::{C64, I};

/// Half-width of the sampling box.
pub const SAMPLE_BOX: f64 = 2.0;
/// Radius of the excluded ball around singular points.
pub const SINGULAR_EXCLUSION: f64 = 1e-3;

const WAVES: usize = 3;

/// Independent stream per named case, so results do not depend on the
/// order in which cases run.
pub fn case_rng(seed: u64, name: &str) -> ChaCha8Rng {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.bytes() {
        h = (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

/// Sum of a few plane waves, periodic in angle coordinates, with its
/// exact gradient.
pub fn random_coefficient(model: &Model, rng: &mut impl Rng) -> Coefficient {
    let mask = model.periodic_mask().to_vec();
    let waves: Vec<(C64, Vec<f64>)> = (0..WAVES)
        .map(|_| {
            let c = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let k = mask
                .iter()
                .map(|&periodic| {
                    if periodic {
                        rng.gen_range(-2i32..=2) as f64
                    } else {
                        rng.gen_range(-1.0..1.0)
                    }
                })
                .collect();
            (c, k)
        })
        .collect();
    let w2 = waves.clone();
    let phase = |k: &[f64], p: &[f64]| -> C64 {
        (I * k.iter().zip(p).map(|(a, b)| a * b).sum::<f64>()).exp()
    };
    Coefficient::with_gradient(
        move |p| waves.iter().map(|(c, k)| c * phase(k, p)).sum(),
        move |p| {
            let mut g = vec![C64::new(0.0, 0.0); p.len()];
            for (c, k) in &w2 {
                let e = c * phase(k, p);
                for (gj, kj) in g.iter_mut().zip(k) {
                    *gj += I * kj * e;
                }
            }
            g
        },
    )
}

/// Random form of the given degree with every coefficient populated.
pub fn random_form(model: ModelRef, degree: usize, rng: &mut impl Rng) -> PolarisedFormRep {
    let entries = multi_indices(model.rank(), degree)
        .into_iter()
        .map(|idx| (idx, random_coefficient(&model, rng)))
        .collect();
    PolarisedFormRep::from_coefficients(model, degree, entries).expect("indices are canonical")
}

/// Point of the chart inside `[-2, 2]^dim` intersected with the chart bounds, at
/// least `1e-3` away from the singular set.
pub fn sample_point(model: &Model, rng: &mut impl Rng) -> Vec<f64> {
    let ranges: Vec<(f64, f64)> = model
        .bounds()
        .iter()
        .map(|b| (b.lo.max(-SAMPLE_BOX), b.hi.min(SAMPLE_BOX)))
        .collect();
    loop {
        let p: Vec<f64> = ranges.iter().map(|&(lo, hi)| rng.gen_range(lo..hi)).collect();
        if model.distance_to_singular(&p) >= SINGULAR_EXCLUSION {
            return p;
        }
    }
}

/// Point of the focus-focus chart with `x1 y2 = x2 y1`, away from the origin.
pub fn sample_focus_focus_locus(rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let x = [rng.gen_range(-SAMPLE_BOX..SAMPLE_BOX), rng.gen_range(-SAMPLE_BOX..SAMPLE_BOX)];
        let s = rng.gen_range(-1.0..1.0);
        let p = vec![x[0], x[1], s * x[0], s * x[1]];
        if p.iter().map(|v| v * v).sum::<f64>().sqrt() >= SINGULAR_EXCLUSION {
            return p;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{make_model, ModelSpec};

    #[test]
    fn gradient_matches_difference_quotient() {
        let m = make_model(ModelSpec::focus_focus()).unwrap();
        let mut rng = case_rng(3, "grad");
        let c = random_coefficient(&m, &mut rng);
        let p = sample_point(&m, &mut rng);
        let g = c.gradient().unwrap()(&p);
        for j in 0..4 {
            let h = 1e-6;
            let mut a = p.clone();
            let mut b = p.clone();
            a[j] += h;
            b[j] -= h;
            let fd = (c.eval(&a) - c.eval(&b)) / (2.0 * h);
            assert!((fd - g[j]).norm() < 1e-7);
        }
    }

    #[test]
    fn cylinder_coefficients_are_periodic() {
        let m = make_model(ModelSpec::cylinder()).unwrap();
        let mut rng = case_rng(1, "periodic");
        let c = random_coefficient(&m, &mut rng);
        let a = c.eval(&[0.3, 0.2]);
        let b = c.eval(&[0.3, 0.2 + std::f64::consts::TAU]);
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn locus_points_satisfy_constraint() {
        let mut rng = case_rng(0, "locus");
        for _ in 0..20 {
            let p = sample_focus_focus_locus(&mut rng);
            assert!((p[0] * p[3] - p[1] * p[2]).abs() < 1e-14);
        }
    }
}
