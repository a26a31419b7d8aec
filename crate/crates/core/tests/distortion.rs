use dimdist::dimension::{geometric_grid, EstimatorOptions};
use dimdist::distortion::{distortion_experiment, thm11_bound, ExperimentOptions, HolderData};
use dimdist::dyadic::{build_system, default_max_level, DyadicParams};
use dimdist::generators::{generate, generate_map, MapKind};

// x^(1/2) sends {n^-2} onto {n^-1}, whose θ-dimension is θ/(1+θ).
#[test]
fn square_root_image_tracks_the_target_dimension() {
    let g = generate(&"sequence_set(2,2000)".parse().unwrap()).unwrap();
    let sys = build_system(&g.space, &DyadicParams::relaxed(default_max_level(&g.space, 0.5))).unwrap();
    let f = generate_map(MapKind::Power { a: 0.5 }, &g.space).unwrap();
    let opts = ExperimentOptions { estimator: EstimatorOptions::for_space(&g.space), ..Default::default() };
    let holder = HolderData { p: 2.0, alpha: 0.5 };
    for theta in [0.25, 0.5, 1.0] {
        let report =
            distortion_experiment(&sys, &f, &g.subset, theta, holder, &geometric_grid(0.25, 0.5, 30), &opts).unwrap();
        let target = theta / (1.0 + theta);
        assert!(
            (report.image_headline - target).abs() < 0.1,
            "theta {theta}: image {} vs {target}",
            report.image_headline
        );
        assert!(!report.has_violation(), "theta {theta}: {:?}", report.violations);
        for r in &report.records {
            assert_eq!(r.bound, thm11_bound(2.0, 0.5, r.d_used));
            assert!(r.delta_y >= r.delta);
        }
    }
}

#[test]
fn identity_reproduces_the_source_exponent() {
    let g = generate(&"cantor(1/3,8)".parse().unwrap()).unwrap();
    let sys = build_system(&g.space, &DyadicParams::relaxed(default_max_level(&g.space, 0.5))).unwrap();
    let f = generate_map(MapKind::Identity, &g.space).unwrap();
    let opts = ExperimentOptions { estimator: EstimatorOptions::for_space(&g.space), ..Default::default() };
    let report = distortion_experiment(
        &sys,
        &f,
        &g.subset,
        1.0,
        HolderData { p: 2.0, alpha: 1.0 },
        &geometric_grid(0.25, 0.5, 30),
        &opts,
    )
    .unwrap();
    for r in &report.records {
        let emp = r.empirical.expect("identity graphs terminate");
        assert!((emp - r.d_measured).abs() < 2e-3, "{}: {emp} vs {}", r.delta, r.d_measured);
    }
}
