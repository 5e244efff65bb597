use circle_quant::bohr_sommerfeld::{Polytope, Window};
use circle_quant::cli_io::{emit_report, parse_report, parse_spec, run_quantise, RunConfig};
use circle_quant::models::{HolonomyConvention, Interval, ModelSpec};
use circle_quant::quantisation::{
    product_factorise, quantise, DegreeEntry, FibrationBase, FibrationDescriptor, QuantiseOptions,
};
use circle_quant::Error;

fn window(v: &[(f64, f64)]) -> Window {
    Window::new(v.iter().map(|&(a, b)| Some(Interval::new(a, b))).collect())
}

#[test]
fn elliptic_matches_orthant_polytope() {
    for (convention, scale) in [(HolonomyConvention::PaperPrinted, 1.0), (HolonomyConvention::TransportOracle, 0.5)] {
        let opts = QuantiseOptions { convention, ..Default::default() };
        for n in 1..=3 {
            for c in [2.0, 3.0, 4.5, 6.0] {
                let w = window(&vec![(0.0, c); n]);
                let ell = quantise(&FibrationDescriptor::model(ModelSpec::elliptic(n, n)), &w, &opts).unwrap();
                // moment map normalised so BS values sit on the integer lattice
                let hi = vec![c * scale; n];
                let poly = Polytope::axis_box(&vec![0.0; n], &hi).unwrap();
                let toric = quantise(
                    &FibrationDescriptor::new(FibrationBase::ToricPolytope(poly)).compact(true),
                    &Window::unbounded(),
                    &opts,
                )
                .unwrap();
                assert_eq!(ell.degree(n), toric.degree(n), "n={n} c={c} {convention:?}");
            }
        }
    }
}

#[test]
fn disk_products_use_nonsingular_count() {
    let opts = QuantiseOptions::default();
    let disk = quantise(&FibrationDescriptor::model(ModelSpec::disk()), &window(&[(0.0, 5.0)]), &opts).unwrap();
    assert_eq!(disk.degree(1), Some(&DegreeEntry::Finite(2)));
    let lin = quantise(&FibrationDescriptor::model(ModelSpec::linear(2)), &Window::unbounded(), &opts).unwrap();
    let p = product_factorise(&disk, &lin).unwrap();
    assert_eq!(p.degree(1), Some(&DegreeEntry::FunctionSpace { base_dim: 2, copies: 2 }));
    assert_eq!(p.bs_fibres.len(), 3);

    let spec = ModelSpec::product(ModelSpec::disk(), ModelSpec::product(ModelSpec::cylinder(), ModelSpec::linear(1)));
    let direct = quantise(&FibrationDescriptor::model(spec), &window(&[(0.0, 5.0), (-1.5, 1.5)]), &opts).unwrap();
    assert_eq!(direct.degree(2), Some(&DegreeEntry::FunctionSpace { base_dim: 1, copies: 6 }));
    assert!(direct.per_degree.iter().filter(|(_, e)| !e.is_zero()).count() == 1);
}

#[test]
fn refused_descriptors() {
    let opts = QuantiseOptions::default();
    let bad_left = FibrationDescriptor::model(ModelSpec::product(ModelSpec::linear(1), ModelSpec::cylinder()));
    assert!(matches!(quantise(&bad_left, &Window::unbounded(), &opts), Err(Error::NoTheoremApplies { .. })));
    let unbounded = FibrationDescriptor::model(ModelSpec::cylinder());
    assert!(matches!(quantise(&unbounded, &Window::unbounded(), &opts), Err(Error::UnboundedWindow(1))));
}

#[test]
fn reports_are_byte_deterministic_and_roundtrip() {
    let specs = [
        r#"{"kind":"cylinder","window":{"x":[-2.5,2.5]}}"#,
        r#"{"kind":"elliptic","n":2,"k":1,"window":{"x1":[0,4.2],"x2":[-1.2,2.7]}}"#,
        r#"{"kind":"toric_polytope","halfspaces":[[1,0,0],[-1,0,3],[0,1,0],[0,-1,3]]}"#,
        r#"{"kind":"product","left":{"kind":"cylinder"},"right":{"kind":"focus_focus"},"window":[[-0.5,1.5],[-1,1],[-0.5,0.5]]}"#,
        r#"{"kind":"almost_toric","halfspaces":[[1,0,0],[0,1,0],[-1,-1,4]],"marked":[{"point":[1,1]}]}"#,
    ];
    for text in specs {
        let cfg = RunConfig { seed: 11, ..RunConfig::default() };
        let a = emit_report(&run_quantise(&parse_spec(text).unwrap(), &cfg).unwrap());
        let b = emit_report(&run_quantise(&parse_spec(text).unwrap(), &cfg).unwrap());
        assert_eq!(a, b);
        assert_eq!(emit_report(&parse_report(&a).unwrap()), a);
    }
}

#[test]
fn almost_toric_report_keeps_unresolved_entries() {
    let text = r#"{"kind":"almost_toric","halfspaces":[[1,0,0],[0,1,0],[-1,-1,4]],"marked":[{"point":[1,1]}]}"#;
    let doc = run_quantise(&parse_spec(text).unwrap(), &RunConfig::default()).unwrap();
    let json = emit_report(&doc);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(v["per_degree"]["1"]["unresolved"].is_object());
    assert_eq!(v["per_degree"]["2"]["partial"]["finite"], 2);
}
