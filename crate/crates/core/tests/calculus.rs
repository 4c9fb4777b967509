use finslerlab::linalg::{bilinear, max_abs_diff, norm};
use finslerlab::zoo::{kropina_tensor_closed_form, navigation_spray};
use finslerlab::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn kropina(h: RiemannianChart, wind: VectorField) -> MetricModel {
    kropina_from_navigation(h, wind, &[]).unwrap()
}

fn kropina_e3() -> MetricModel {
    kropina(
        RiemannianChart::Euclidean { dim: 3 },
        VectorField::Constant {
            components: vec![0.0, 0.0, 1.0],
        },
    )
}

fn kropina_hopf() -> MetricModel {
    kropina(RiemannianChart::RoundSphere { dim: 3 }, VectorField::Hopf)
}

/// `F = α²/β` with `β = 2 e₃`, solved by Newton rather than a closed dual.
fn kropina_profile() -> MetricModel {
    MetricModel::new(MetricKind::AlphaBeta {
        alpha: RiemannianChart::Euclidean { dim: 3 },
        beta: CovectorField::Constant {
            components: vec![0.0, 0.0, 2.0],
        },
        phi: PhiFamily::Kropina,
        b0: 2.0,
        excluded: vec![],
    })
    .unwrap()
}

fn families() -> Vec<(&'static str, MetricModel)> {
    vec![
        ("euclidean", MetricModel::euclidean(3).unwrap()),
        (
            "round-sphere",
            MetricModel::riemannian(RiemannianChart::RoundSphere { dim: 3 }).unwrap(),
        ),
        (
            "constant",
            MetricModel::riemannian(RiemannianChart::Constant {
                matrix: vec![vec![2.0, 0.3, 0.0], vec![0.3, 1.0, 0.1], vec![0.0, 0.1, 0.5]],
            })
            .unwrap(),
        ),
        ("kropina-e3", kropina_e3()),
        ("kropina-hopf", kropina_hopf()),
        ("kropina-profile", kropina_profile()),
        ("helicoid-1-1", MetricModel::helicoid_space(1.0, 1.0).unwrap()),
        ("helicoid-0.5-2", MetricModel::helicoid_space(0.5, 2.0).unwrap()),
    ]
}

fn random_vec(rng: &mut ChaCha8Rng, scale: f64) -> Vec<f64> {
    (0..3).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect()
}

/// Well-conditioned tensor: `cond g < 1e6` and `|g| < 1e3`. Closer to the
/// cone wall every identity loses digits in proportion to `cond g`.
fn interior(model: &MetricModel, x: &[f64], y: &[f64]) -> bool {
    let Ok(pack) = fundamental_tensor(model, x, y) else {
        return false;
    };
    let e = pack.g.clone().symmetric_eigen().eigenvalues;
    e.max() / e.min() < 1e6 && pack.g.amax() < 1e3
}

/// Random `(x, y)` with `y` in the cone at `x`.
fn cone_sample(model: &MetricModel, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>) {
    loop {
        let x = random_vec(rng, 0.8);
        let y = random_vec(rng, 1.5);
        if model.check_point(&x).is_ok() && norm(&y) > 0.1 && model.in_cone(&x, &y).unwrap() {
            // Stay away from the cone boundary, where round trips lose digits.
            let xi = match legendre(model, &x, &y) {
                Ok(xi) => xi,
                Err(_) => continue,
            };
            let f = model.eval(&x, &y).unwrap();
            if f.is_finite() && interior(model, &x, &y) && norm(&xi) > 1e-3 {
                return (x, y);
            }
        }
    }
}

#[test]
fn legendre_round_trips_on_every_family() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for (name, model) in families() {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let (x, y) = cone_sample(&model, &mut rng);
            let xi = legendre(&model, &x, &y).unwrap();
            let back = legendre_inverse(&model, &x, &xi).unwrap();
            worst = worst.max(max_abs_diff(&back, &y) / (1.0 + norm(&y)));
            let fy = model.eval(&x, &y).unwrap();
            let fs = model.eval_dual(&x, &xi).unwrap();
            worst = worst.max((fy - fs).abs() / (1.0 + fy));
        }
        assert!(worst <= 1e-8, "{name}: round trip error {worst:e}");
    }
}

#[test]
fn fundamental_tensor_euler_and_cartan() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (name, model) in families() {
        for _ in 0..10 {
            let (x, y) = cone_sample(&model, &mut rng);
            let f = model.eval(&x, &y).unwrap();
            let pack = fundamental_tensor(&model, &x, &y).unwrap();
            let euler = (bilinear(&pack.g, &y, &y) - f * f).abs();
            let cartan = pack.cartan_annihilation(&y);
            assert!(euler <= 1e-10 * (1.0 + f * f), "{name} x={x:?} y={y:?} euler={euler:e}");
            assert!(cartan <= 1e-9 * (1.0 + f), "{name} x={x:?} y={y:?} F={f} cartan={cartan:e}");
        }
    }
}

#[test]
fn finite_differences_track_exact_tensors() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for (name, model) in families() {
        let fd = model.clone().with_derivatives(DerivativeMode::Fd);
        for _ in 0..5 {
            let (x, y) = cone_sample(&model, &mut rng);
            let a = fundamental_tensor(&model, &x, &y).unwrap().g;
            let b = fundamental_tensor(&fd, &x, &y).unwrap().g;
            assert!((&a - &b).amax() <= 1e-4 * (1.0 + a.amax()), "{name}");
        }
    }
}

#[test]
fn kropina_closed_form_tensor_matches_hessian() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for model in [kropina_e3(), kropina_hopf()] {
        for _ in 0..50 {
            let (x, y) = cone_sample(&model, &mut rng);
            let closed = kropina_tensor_closed_form(&model, &x, &y).unwrap();
            let hess = fundamental_tensor(&model, &x, &y).unwrap().g;
            assert!((&closed - &hess).amax() <= 1e-6 * hess.amax());
        }
    }
}

#[test]
fn kropina_spray_is_navigation_spray_minus_rotation() {
    let model = kropina_hopf();
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for _ in 0..20 {
        let (x, y) = cone_sample(&model, &mut rng);
        let g = spray(&model, &x, &y).unwrap().spray;
        let predicted = navigation_spray(&model, &x, &y).unwrap();
        assert!(max_abs_diff(&g, &predicted) <= 1e-5 * (1.0 + norm(&g)), "{g:?} vs {predicted:?}");
    }
}

#[test]
fn flag_curvature_of_kropina_navigation() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let hopf = kropina_hopf();
    let flat = kropina_e3();
    for _ in 0..10 {
        let (x, y) = cone_sample(&hopf, &mut rng);
        let v = random_vec(&mut rng, 1.0);
        let k = flag_curvature(&hopf, &x, &y, &v).unwrap();
        assert!((k - 1.0).abs() <= 1e-3, "K = {k}");
        let (x, y) = cone_sample(&flat, &mut rng);
        let k = flag_curvature(&flat, &x, &y, &v).unwrap();
        assert!(k.abs() <= 1e-6, "K = {k}");
    }
}

#[test]
fn s_curvature_vanishes_for_kropina_and_minkowski() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for model in [kropina_e3(), kropina_hopf()] {
        for _ in 0..10 {
            let (x, y) = cone_sample(&model, &mut rng);
            let s = s_curvature(&model, &VolumeForm::BusemannHausdorff, &x, &y).unwrap();
            let scale = 1.0 + spray(&model, &x, &y).unwrap().connection.trace().abs();
            assert!(s.abs() <= 1e-9 * scale, "x={x:?} y={y:?} S = {s}");
        }
    }
    let hel = MetricModel::helicoid_space(1.0, 1.0).unwrap();
    let (x, y) = cone_sample(&hel, &mut rng);
    assert_eq!(s_curvature(&hel, &VolumeForm::Lebesgue, &x, &y).unwrap(), 0.0);
}

#[test]
fn laplacian_closure_identity() {
    let fields = [
        ScalarField::linear(vec![0.1, 0.2, 1.0], 0.0),
        ScalarField::quadratic(0.0, vec![0.0, 0.0, 1.0], vec![
            vec![0.1, 0.0, 0.0],
            vec![0.0, -0.05, 0.02],
            vec![0.0, 0.02, 0.1],
        ]),
    ];
    let volumes = [VolumeForm::Lebesgue, VolumeForm::BusemannHausdorff, VolumeForm::Exponential {
        coeffs: vec![0.3, 0.0, -0.2],
    }];
    for model in [kropina_e3(), kropina_hopf(), MetricModel::euclidean(3).unwrap()] {
        for f in &fields {
            for vol in &volumes {
                let r = laplacians(&model, vol, f, &[0.1, -0.2, 0.3]).unwrap();
                assert!(r.closure_residual.abs() <= 1e-6, "{r:?}");
            }
        }
    }
}

#[test]
fn kropina_profile_newton_agrees_with_navigation_dual() {
    // Both describe the same Kropina metric; only one has a closed-form dual.
    let a = kropina_profile();
    let b = kropina_e3();
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for _ in 0..20 {
        let (x, y) = cone_sample(&b, &mut rng);
        assert!((a.eval(&x, &y).unwrap() - b.eval(&x, &y).unwrap()).abs() < 1e-12);
        let xi = legendre(&b, &x, &y).unwrap();
        let ya = legendre_inverse(&a, &x, &xi).unwrap();
        assert!(max_abs_diff(&ya, &y) < 1e-8 * (1.0 + norm(&y)));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn positive_homogeneity(y in prop::array::uniform3(-2.0f64..2.0), lambda in 0.1f64..10.0) {
        for (_, model) in families() {
            let x = [0.1, 0.2, -0.1];
            prop_assume!(norm(&y) > 0.05);
            if !model.in_cone(&x, &y).unwrap() { continue; }
            let ly: Vec<f64> = y.iter().map(|c| lambda * c).collect();
            prop_assert!(model.in_cone(&x, &ly).unwrap());
            let f = model.eval(&x, &y).unwrap();
            let fl = model.eval(&x, &ly).unwrap();
            prop_assert!((fl - lambda * f).abs() <= 1e-10 * (1.0 + fl));
        }
    }

    #[test]
    fn spray_is_two_homogeneous(y in prop::array::uniform3(-2.0f64..2.0), lambda in 0.2f64..5.0) {
        let x = [0.2, 0.1, -0.3];
        for model in [kropina_hopf(), MetricModel::riemannian(RiemannianChart::RoundSphere { dim: 3 }).unwrap()] {
            prop_assume!(norm(&y) > 0.05);
            if !model.in_cone(&x, &y).unwrap() || !interior(&model, &x, &y) { continue; }
            let ly: Vec<f64> = y.iter().map(|c| lambda * c).collect();
            let g = spray(&model, &x, &y).unwrap().spray;
            let gl = spray(&model, &x, &ly).unwrap().spray;
            let scaled: Vec<f64> = g.iter().map(|c| lambda * lambda * c).collect();
            prop_assert!(max_abs_diff(&gl, &scaled) <= 1e-9 * (1.0 + norm(&gl)));
        }
    }

    #[test]
    fn dual_cone_matches_legendre_image(y in prop::array::uniform3(-2.0f64..2.0)) {
        let x = [0.0; 3];
        for (_, model) in families() {
            prop_assume!(norm(&y) > 0.05);
            if !model.in_cone(&x, &y).unwrap() { continue; }
            if let Ok(xi) = legendre(&model, &x, &y) {
                prop_assert!(model.in_dual_cone(&x, &xi).unwrap());
            }
        }
    }
}
