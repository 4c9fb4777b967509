use finslerlab::description::grid;
use finslerlab::*;

fn euclid() -> MetricModel {
    MetricModel::euclidean(3).unwrap()
}

fn kropina_e3() -> MetricModel {
    kropina_from_navigation(
        RiemannianChart::Euclidean { dim: 3 },
        VectorField::Constant {
            components: vec![0.0, 0.0, 1.0],
        },
        &[],
    )
    .unwrap()
}

fn kropina_hopf() -> MetricModel {
    kropina_from_navigation(RiemannianChart::RoundSphere { dim: 3 }, VectorField::Hopf, &[]).unwrap()
}

fn round_s3() -> MetricModel {
    MetricModel::riemannian(RiemannianChart::RoundSphere { dim: 3 }).unwrap()
}

fn curvatures(model: &MetricModel, imm: &Immersion, samples: &[Vec<f64>]) -> Vec<Vec<f64>> {
    samples
        .iter()
        .map(|u| {
            shape_operator(model, imm, u, &ShapeOptions::default())
                .unwrap()
                .principal_curvatures
        })
        .collect()
}

fn spread(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn angle_grid() -> Vec<Vec<f64>> {
    grid(&[[0.3, 2.8, 5.0], [0.0, 6.0, 5.0]]).unwrap()
}

#[test]
fn euclidean_hyperplane_is_flat() {
    let plane = Immersion::Hyperplane {
        origin: vec![0.1, 0.2, 0.3],
        basis: vec![vec![1.0, 0.0, 0.5], vec![0.0, 1.0, -0.2]],
    };
    for k in curvatures(&euclid(), &plane, &grid(&[[-1.0, 1.0, 5.0], [-1.0, 1.0, 5.0]]).unwrap()) {
        assert!(k.iter().all(|k| k.abs() <= 1e-12));
    }
}

#[test]
fn euclidean_sphere_is_umbilic_with_constant_curvature() {
    let sphere = Immersion::Sphere {
        center: vec![0.0; 3],
        radius: 2.0,
    };
    let ks = curvatures(&euclid(), &sphere, &angle_grid());
    assert_eq!(ks.len(), 25);
    assert!(spread(ks.iter().flatten().copied()) <= 1e-6);
    assert!((ks[0][0] + 0.5).abs() <= 1e-12);
}

#[test]
fn euclidean_cylinder_has_two_constant_values() {
    let cyl = Immersion::Cylinder {
        center: vec![0.0; 3],
        radius: 1.0,
        sphere_dim: 1,
    };
    let ks = curvatures(&euclid(), &cyl, &grid(&[[0.0, 6.0, 5.0], [-2.0, 2.0, 5.0]]).unwrap());
    assert!(spread(ks.iter().map(|k| k[0])) <= 1e-12);
    assert!(spread(ks.iter().map(|k| k[1])) <= 1e-12);
    assert!((ks[0][0] + 1.0).abs() <= 1e-12 && ks[0][1].abs() <= 1e-8);
}

#[test]
fn clifford_torus_matches_the_four_dimensional_computation() {
    // In S³ ⊂ R⁴ with normal (s cos θ, s sin θ, −r cos φ, −r sin φ) the
    // principal curvatures are −s/r and r/s.
    for (r, s) in [(0.6, 0.8), (0.5f64.sqrt(), 0.5f64.sqrt())] {
        let torus = Immersion::CliffordTorus { r, s };
        let mut want = [-s / r, r / s];
        want.sort_by(f64::total_cmp);
        for k in curvatures(&round_s3(), &torus, &grid(&[[0.1, 6.0, 4.0], [0.2, 5.9, 4.0]]).unwrap()) {
            assert!(linalg::max_abs_diff(&k, &want) <= 1e-9, "{k:?} vs {want:?}");
        }
    }
}

#[test]
fn s3_spheres_are_umbilic_with_cotangent_curvature() {
    // {p₄ = h} is a geodesic sphere about the chart origin of radius θ₀,
    // cos θ₀ = −h; with the outward normal its curvature is −cot θ₀.
    for h in [0.0, 0.4, -0.3] {
        let sphere = Immersion::S3Sphere { height: h };
        let want = h / (1.0 - h * h).sqrt();
        for k in curvatures(&round_s3(), &sphere, &angle_grid()) {
            assert!(k.iter().all(|k| (k - want).abs() <= 1e-9), "h={h}: {k:?} vs {want}");
        }
    }
}

#[test]
fn kropina_sphere_in_euclidean_wind() {
    let sphere = Immersion::Sphere {
        center: vec![0.0; 3],
        radius: 2.0,
    };
    let c = kropina_equivalence_report(&kropina_e3(), &sphere, &angle_grid(), &Orientation::Default, 1e-6).unwrap();
    assert!(c.passed, "{c:#?}");
    assert_eq!(c.samples.len(), 25);
    assert!(c.max_conformal_residual <= 1e-8 && c.max_derivative_residual <= 1e-6);
    for s in &c.samples {
        assert!(s.finsler_curvatures.iter().all(|k| (k + 0.5).abs() <= 1e-6));
    }
}

#[test]
fn kropina_clifford_torus_under_hopf_wind() {
    let r = 0.5f64.sqrt();
    let torus = Immersion::CliffordTorus { r, s: r };
    let samples = grid(&[[0.1, 6.0, 5.0], [0.2, 5.9, 5.0]]).unwrap();
    let c = kropina_equivalence_report(&kropina_hopf(), &torus, &samples, &Orientation::Default, 1e-6).unwrap();
    assert!(c.passed, "{c:#?}");
    for s in &c.samples {
        assert!(linalg::max_abs_diff(&s.finsler_curvatures, &[-1.0, 1.0]) <= 1e-6);
        // The Hopf field is tangent to the torus, so n = n̄ + W with W₀ = 1.
        assert!((s.w0 - 1.0).abs() <= 1e-12);
        assert!(s.translation_residual <= 1e-9);
    }
}

#[test]
fn kropina_classification_rows_g_equals_one() {
    for h in [0.0, 0.4] {
        let sphere = Immersion::S3Sphere { height: h };
        let c = kropina_equivalence_report(&kropina_hopf(), &sphere, &angle_grid(), &Orientation::Default, 1e-6)
            .unwrap();
        assert!(c.passed, "h={h}: {c:#?}");
        let want = h / (1.0 - h * h).sqrt();
        for s in &c.samples {
            assert_eq!(s.finsler_multiplicities, vec![2]);
            assert!(s.finsler_curvatures.iter().all(|k| (k - want).abs() <= 1e-6));
        }
    }
}

#[test]
fn non_killing_wind_is_rejected() {
    // W = (x¹, 0, 1) is unit at the origin but r₁₁ = 1.
    let model = MetricModel::new(MetricKind::Kropina {
        h: RiemannianChart::Euclidean { dim: 3 },
        wind: VectorField::Linear {
            matrix: vec![vec![1.0, 0.0, 0.0], vec![0.0; 3], vec![0.0; 3]],
            offset: vec![0.0, 0.0, 1.0],
        },
    })
    .unwrap();
    let sphere = Immersion::Sphere {
        center: vec![0.0; 3],
        radius: 2.0,
    };
    let r = kropina_equivalence_report(&model, &sphere, &angle_grid()[..3], &Orientation::Default, 1e-6);
    assert!(matches!(r, Err(GeometryError::NotKilling { .. })), "{r:?}");
}

fn horizontal_plane() -> Immersion {
    Immersion::Hyperplane {
        origin: vec![0.0; 3],
        basis: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
    }
}

#[test]
fn excluded_ray_falls_back_to_the_opposite_one() {
    // F*(−dx³) = 1 − 1 = 0 lies on the boundary of the Kropina dual cone.
    let options = ShapeOptions {
        orientation: Orientation::Reversed,
        ..Default::default()
    };
    let r = shape_operator(&kropina_e3(), &horizontal_plane(), &[0.3, 0.1], &options).unwrap();
    assert_eq!(r.ray, hypersurface::RayChoice::Opposite);
    assert!(linalg::max_abs_diff(&r.normal, &[0.0, 0.0, 2.0]) < 1e-12);
    assert!(r.principal_curvatures.iter().all(|k| k.abs() < 1e-12));
}

#[test]
fn no_conic_normal_is_an_error() {
    // Both conormals ±dx³ violate ξ₁² + ξ₂² > a²ξ₃² in the helicoid space.
    let model = MetricModel::helicoid_space(1.0, 1.0).unwrap();
    let r = shape_operator(&model, &horizontal_plane(), &[0.0, 0.0], &ShapeOptions::default());
    assert!(matches!(r, Err(GeometryError::NoConicNormal(_))), "{r:?}");
}

#[test]
fn reversed_orientation_flips_curvatures() {
    let sphere = Immersion::Sphere {
        center: vec![0.0; 3],
        radius: 2.0,
    };
    let r = shape_operator(
        &euclid(),
        &sphere,
        &[1.0, 1.0],
        &ShapeOptions {
            orientation: Orientation::Reversed,
            ..Default::default()
        },
    )
    .unwrap();
    assert!(r.principal_curvatures.iter().all(|k| (k - 0.5).abs() < 1e-12));
}

#[test]
fn level_set_immersion_recovers_sphere_curvature() {
    let f = ScalarField::norm(vec![0.0; 3]);
    let x = vec![0.6, 0.0, 0.8];
    let imm = Immersion::level_set(f, x.clone()).unwrap();
    let r = shape_operator(&euclid(), &imm, &[0.0, 0.0], &ShapeOptions::default()).unwrap();
    assert!(linalg::max_abs_diff(&r.point, &x) < 1e-14);
    assert!(r.principal_curvatures.iter().all(|k| (k + 1.0).abs() < 1e-9), "{:?}", r.principal_curvatures);
}
