use nalgebra::{Matrix2, Vector2};
use slowhom::dirichlet::{BemSolver, DemoConfig, Domain, PrototypeParams};

#[test]
fn harmonic_polynomials_on_a_placed_prototype() {
    let t = 0.7f64;
    let m = Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
    let d = Domain::prototype(PrototypeParams::default()).unwrap().transformed(&m, &Vector2::new(1.0, 2.0)).unwrap();
    let exact = |p: &Vector2<f64>| p.x * p.x - p.y * p.y + 3.0 * p.x * p.y - p.y;
    let u = BemSolver::new(&d, 700).unwrap().solve_real_data(exact, 1.0);
    let (_, c) = d.area_centroid();
    let r = d.distance_to_boundary(&c);
    for i in 0..8 {
        let a = i as f64 * 0.8;
        let x = c + Vector2::new(a.cos(), a.sin()) * (0.7 * r * (i as f64 / 8.0));
        assert!((u.eval(&x).unwrap().re - exact(&x)).abs() < 1e-8, "{x:?}");
    }
}

#[test]
fn partial_demo_config_fills_defaults() {
    let cfg: DemoConfig = serde_json::from_str(r#"{ "gap_base": 3, "domain": { "flat_len": 0.4 } }"#).unwrap();
    assert_eq!(cfg.gap_base, 3);
    assert_eq!(cfg.domain.flat_len, 0.4);
    assert_eq!(cfg.domain.corner_weight, PrototypeParams::default().corner_weight);
    assert_eq!(cfg.trend_eps, DemoConfig::default().trend_eps);
}
