use regdepth::{
    fit_exact_p2, fit_search, rd_disk_closed, rd_normal_closed, rd_normalized, rd_population_numeric, sample,
    ParamVector, PopulationModel, QuadConfig,
};

#[test]
fn normal_sample_deepest_line_near_origin() {
    let set = sample(&PopulationModel::BivariateNormalStd, 500, 11).unwrap();
    let fit = fit_exact_p2(&set).unwrap();
    assert!(fit.beta_hat.norm() <= 0.2, "{:?}", fit.beta_hat);
    assert!((0.45..=0.5).contains(&fit.depth.normalized), "{}", fit.depth.normalized);
}

#[test]
fn search_comes_within_one_point_of_exact() {
    let mut shortfall = 0;
    for seed in 0..50 {
        let set = sample(&PopulationModel::BivariateNormalStd, 60, 1000 + seed).unwrap();
        let exact = fit_exact_p2(&set).unwrap();
        let search = fit_search(&set, 8, seed).unwrap();
        assert!(search.depth.normalized <= exact.candidate_depth + 1e-12);
        if search.depth.normalized < exact.depth.normalized - 1.0 / 60.0 - 1e-12 {
            shortfall += 1;
        }
    }
    assert_eq!(shortfall, 0);
}

/// Empirical depth on a large sample converges to the population depth.
#[test]
fn population_depth_matches_large_samples() {
    let cfg = QuadConfig::default();
    let models = [PopulationModel::BivariateNormalStd, PopulationModel::UniformUnitDisk];
    let betas = [[0.0, 0.0], [0.3, 0.0], [0.0, 1.0], [-0.5, 0.3], [0.8, -1.5]];
    for model in &models {
        let set = sample(model, 40_000, 99).unwrap();
        for b in betas {
            let beta = ParamVector::new(b.to_vec()).unwrap();
            let pop = rd_population_numeric(model, &beta, &cfg).unwrap();
            let emp = rd_normalized(&set, &beta, None).unwrap().normalized;
            assert!((pop - emp).abs() < 0.01, "{} {b:?}: {pop} vs {emp}", model.name());
        }
    }
}

#[test]
fn closed_forms_agree_with_quadrature_on_a_grid() {
    let cfg = QuadConfig::default();
    for i in -4..=4 {
        for j in -4..=4 {
            let beta = ParamVector::new(vec![i as f64 * 0.3, j as f64 * 0.45]).unwrap();
            let normal = rd_population_numeric(&PopulationModel::BivariateNormalStd, &beta, &cfg).unwrap();
            assert!((normal - rd_normal_closed(&beta).unwrap()).abs() < 1e-6, "{beta:?}");
            let disk = rd_population_numeric(&PopulationModel::UniformUnitDisk, &beta, &cfg).unwrap();
            assert!((disk - rd_disk_closed(&beta).unwrap()).abs() < 1e-6, "{beta:?}");
            assert!(normal <= 0.5 + 1e-12 && disk <= 0.5 + 1e-12);
        }
    }
}
