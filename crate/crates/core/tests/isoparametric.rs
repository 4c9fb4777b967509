use finslerlab::isoparametric::{LevelPoints, SCOPE_NOTE};
use finslerlab::*;

fn sampling(levels: Vec<f64>, seed: u64) -> Sampling {
    Sampling {
        levels,
        samples_per_level: 8,
        boxes: vec![SeedBox {
            lower: vec![-0.5; 3],
            upper: vec![0.5; 3],
        }],
        reach: 4.0,
        seed,
    }
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

fn paths_agree(primal: &IsoparametricVerdict, dual: &IsoparametricVerdict) {
    assert_eq!(primal.transnormal, dual.transnormal);
    for (p, d) in primal.levels.iter().zip(&dual.levels) {
        assert!((p.a.mean - d.a.mean).abs() <= 1e-8, "{} vs {}", p.a.mean, d.a.mean);
        let (ph, dh) = (p.hat.as_ref().unwrap(), d.hat.as_ref().unwrap());
        assert!((ph.mean - dh.mean).abs() <= 1e-8, "{} vs {}", ph.mean, dh.mean);
        assert!((ph.max - dh.max).abs() <= 1e-8 && (ph.min - dh.min).abs() <= 1e-8);
    }
}

#[test]
fn linear_field_in_the_helicoid_space() {
    let model = MetricModel::helicoid_space(1.0, 1.0).unwrap();
    let f = ScalarField::linear(vec![1.0, 0.0, 0.1], 0.0);
    let levels = sample_levels(&model, &f, &sampling(vec![-0.2, 0.3], 1)).unwrap();
    let primal = isoparametric_check(&model, &VolumeForm::Lebesgue, &f, &levels, 1e-6).unwrap();
    assert!(primal.passed(), "{primal:#?}");
    assert_eq!(primal.constant_mean_curvature, Some(true));
    let want = model.eval_dual(&[0.0; 3], &[1.0, 0.0, 0.1]).unwrap();
    for l in &primal.levels {
        assert!((l.a.mean - want).abs() <= 1e-10);
        assert!(l.hat.as_ref().unwrap().mean.abs() <= 1e-9);
    }
    let dual = minkowski_dual_check(&model, &f, &levels, 1e-6).unwrap();
    assert!(dual.passed());
    paths_agree(&primal, &dual);
}

#[test]
fn kropina_height_function() {
    let model = kropina_e3();
    let f = ScalarField::linear(vec![0.0, 0.0, 1.0], 0.0);
    let levels = sample_levels(&model, &f, &sampling(vec![-0.5, 0.0, 1.0], 2)).unwrap();
    let v = isoparametric_check(&model, &VolumeForm::BusemannHausdorff, &f, &levels, 1e-6).unwrap();
    assert!(v.passed(), "{v:#?}");
    for l in &v.levels {
        assert!((l.a.mean - 2.0).abs() <= 1e-12);
        assert!(l.hat.as_ref().unwrap().mean.abs() <= 1e-12);
        assert!(l.sigma.as_ref().unwrap().mean.abs() <= 1e-12);
    }
    assert!(v.max_s.unwrap() <= 1e-12);
}

#[test]
fn euclidean_distance_function() {
    let model = MetricModel::euclidean(3).unwrap();
    let f = ScalarField::norm(vec![0.0; 3]);
    let levels = sample_levels(&model, &f, &sampling(vec![1.0, 2.0], 3)).unwrap();
    let primal = isoparametric_check(&model, &VolumeForm::Lebesgue, &f, &levels, 1e-6).unwrap();
    assert!(primal.passed());
    for l in &primal.levels {
        assert!((l.a.mean - 1.0).abs() <= 1e-12);
        assert!((l.hat.as_ref().unwrap().mean - 2.0 / l.level).abs() <= 1e-9);
        let h = l.mean_curvature.as_ref().unwrap();
        assert!((h.mean + 2.0 / l.level).abs() <= 1e-8, "H = {}", h.mean);
    }
    let dual = minkowski_dual_check(&model, &f, &levels, 1e-6).unwrap();
    paths_agree(&primal, &dual);
    assert_eq!(primal.scope_note, SCOPE_NOTE);
}

#[test]
fn negative_control_fails_on_both_paths() {
    let model = MetricModel::euclidean(3).unwrap();
    let f = ScalarField::quadratic(0.0, vec![1.0, 0.0, 0.0], vec![
        vec![0.0; 3],
        vec![0.0, 1.0, 0.0],
        vec![0.0; 3],
    ]);
    let levels = sample_levels(&model, &f, &sampling(vec![0.0, 0.5], 4)).unwrap();
    let primal = isoparametric_check(&model, &VolumeForm::Lebesgue, &f, &levels, 1e-6).unwrap();
    let dual = minkowski_dual_check(&model, &f, &levels, 1e-6).unwrap();
    assert!(!primal.transnormal && !dual.transnormal);
    assert!(!primal.passed() && !dual.passed());
    assert_eq!(primal.isoparametric_hat, Some(false));
    assert!(primal.constant_mean_curvature.is_none());
    paths_agree(&primal, &dual);
    // The offending extremes are reported.
    let a = &primal.levels[0].a;
    assert!(a.max > a.min);
    assert!((f.value(&a.max_point) - 0.0).abs() <= 1e-10);
}

#[test]
fn isoparametric_implies_transnormal() {
    let model = MetricModel::euclidean(3).unwrap();
    for (f, levels) in [
        (ScalarField::norm(vec![0.0; 3]), vec![1.0]),
        (ScalarField::linear(vec![1.0, 2.0, 0.0], 0.0), vec![0.0]),
    ] {
        let lv = sample_levels(&model, &f, &sampling(levels, 5)).unwrap();
        let v = isoparametric_check(&model, &VolumeForm::Lebesgue, &f, &lv, 1e-6).unwrap();
        if v.isoparametric_hat == Some(true) || v.isoparametric_sigma == Some(true) {
            assert!(v.transnormal);
        }
    }
}

#[test]
fn insufficient_samples_are_reported() {
    let model = MetricModel::euclidean(3).unwrap();
    let f = ScalarField::norm(vec![0.0; 3]);
    let short = LevelPoints {
        level: 1.0,
        points: vec![vec![1.0, 0.0, 0.0]; 3],
    };
    assert!(matches!(
        transnormal_check(&model, &f, &[short], 1e-6),
        Err(GeometryError::InsufficientSamples { found: 3, .. })
    ));
}

#[test]
fn dual_path_needs_a_minkowski_model() {
    // Constant wind over a flat base is itself Minkowski; the Hopf wind is not.
    let f = ScalarField::linear(vec![0.0, 0.0, 1.0], 0.0);
    let flat = kropina_e3();
    let lv = sample_levels(&flat, &f, &sampling(vec![0.0], 6)).unwrap();
    assert!(minkowski_dual_check(&flat, &f, &lv, 1e-6).unwrap().passed());
    let hopf = kropina_from_navigation(RiemannianChart::RoundSphere { dim: 3 }, VectorField::Hopf, &[]).unwrap();
    let lv = sample_levels(&hopf, &f, &sampling(vec![0.0], 6)).unwrap();
    assert!(matches!(
        minkowski_dual_check(&hopf, &f, &lv, 1e-6),
        Err(GeometryError::Unsupported(_))
    ));
}
