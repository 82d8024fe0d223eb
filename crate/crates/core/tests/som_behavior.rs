mod oracles;

use caseflow_core::som::{
    names_plot_data, quadrant_profiles, quantization_error, topographic_error, SomTrainer,
};
use caseflow_core::{
    best_matching_unit, run_kmeans, train_som, CaseDataset, KMeansConfig, ScalingParams, SomConfig,
    SomModel,
};
use proptest::prelude::*;

fn clouds_model(seed: u64) -> SomModel {
    let mut cfg = SomConfig::grid(1, 2);
    cfg.seed = seed;
    train_som(&oracles::separated_clouds(), &cfg).unwrap()
}

#[test]
fn clouds_separate_onto_two_neurons() {
    for seed in 0..5 {
        let model = clouds_model(seed);
        let w = model.raw_weights();
        let a = [0.0, 0.0];
        let b = [10.0, 10.0];
        let (na, nb) = if oracles::sq(&w[0], &a) < oracles::sq(&w[1], &a) { (0, 1) } else { (1, 0) };
        assert!(oracles::sq(&w[na], &a) < oracles::sq(&w[na], &b));
        assert!(oracles::sq(&w[nb], &b) < oracles::sq(&w[nb], &a));
        assert!(model.assignments[..5].iter().all(|&x| x == na));
        assert!(model.assignments[5..].iter().all(|&x| x == nb));
        assert_eq!(best_matching_unit(&model, &[9.7, 10.1]).unwrap().bmu, nb);

        // the (10, 10) side sits above the global mean on both features
        let profiles = quadrant_profiles(&model);
        assert!(profiles[nb].deviation.iter().all(|&d| d > 0.0));
    }
}

#[test]
fn same_seed_gives_identical_model() {
    let a = clouds_model(42).to_json();
    let b = clouds_model(42).to_json();
    assert_eq!(a, b);
    let data = oracles::separated_clouds();
    let cfg = SomConfig { seed: 9, ..SomConfig::default() };
    assert_eq!(
        train_som(&data, &cfg).unwrap().to_json(),
        train_som(&data, &cfg).unwrap().to_json()
    );
}

#[test]
fn identical_cases_have_no_quantization_error() {
    let rows = vec![vec![3.0, -1.0, 7.5]; 10];
    let data = CaseDataset::from_rows(vec!["a".into(), "b".into(), "c".into()], rows).unwrap();
    for scale in [true, false] {
        for (r, c) in [(1, 2), (3, 3), (5, 5)] {
            let mut cfg = SomConfig::grid(r, c);
            cfg.iterations = Some(10 * data.n_cases());
            cfg.scale_data = scale;
            let model = train_som(&data, &cfg).unwrap();
            assert!(model.quantization_error < 1e-6);
            assert!(quantization_error(&model, &data).unwrap() < 1e-6);
        }
    }
}

#[test]
fn quantization_error_decreases_across_checkpoints() {
    let data = oracles::separated_clouds();
    for seed in 0..10 {
        let mut cfg = SomConfig::grid(1, 2);
        cfg.seed = seed;
        let mut trainer = SomTrainer::new(&data, &cfg).unwrap();
        let total = trainer.total_steps();
        let mut last = f64::INFINITY;
        for t in [total / 4, total / 2, total] {
            trainer.run_until(t);
            let qe = trainer.quantization_error();
            assert!(qe <= last + 1e-6, "seed {seed} step {t}: {qe} > {last}");
            last = qe;
        }
    }
}

fn line_fixture() -> CaseDataset {
    let rows = (0..50)
        .map(|i| {
            let t = i as f64 / 49.0;
            vec![t, 2.0 * t + 1.0]
        })
        .collect();
    CaseDataset::from_rows(vec!["x".into(), "y".into()], rows).unwrap()
}

fn ordered_along_line(model: &SomModel) -> bool {
    let proj: Vec<f64> = model.raw_weights().iter().map(|w| w[0] + 2.0 * w[1]).collect();
    let up = proj.windows(2).all(|p| p[1] > p[0]);
    let down = proj.windows(2).all(|p| p[1] < p[0]);
    up || down
}

#[test]
fn one_dimensional_ordering() {
    let data = line_fixture();
    let ordered = (0..10)
        .filter(|&seed| {
            let mut cfg = SomConfig::grid(1, 5);
            cfg.seed = seed;
            ordered_along_line(&train_som(&data, &cfg).unwrap())
        })
        .count();
    assert!(ordered >= 9, "only {ordered}/10 seeds ordered");
}

fn hand_model(rows: usize, cols: usize, weights: Vec<Vec<f64>>) -> SomModel {
    SomModel::from_weights(
        SomConfig::grid(rows, cols),
        ScalingParams::identity(weights[0].len()),
        vec!["x".into(), "y".into()],
        weights,
    )
    .unwrap()
}

fn cases(points: &[[f64; 2]]) -> CaseDataset {
    CaseDataset::from_rows(
        vec!["x".into(), "y".into()],
        points.iter().map(|p| p.to_vec()).collect(),
    )
    .unwrap()
}

#[test]
fn topographic_error_fixtures() {
    // 5x5 map laid out row-major along the x axis: neuron i sits at (10 i, 0)
    let weights: Vec<Vec<f64>> = (0..25).map(|i| vec![10.0 * i as f64, 0.0]).collect();
    let model = hand_model(5, 5, weights);
    // 45 is equidistant from neurons 4 (row 0, col 4) and 5 (row 1, col 0)
    let mixed = cases(&[[1.0, 0.0], [12.0, 0.0], [23.0, 0.0], [45.0, 0.0]]);
    assert_eq!(topographic_error(&model, &mixed).unwrap(), 0.25);
    assert_eq!(topographic_error(&model, &cases(&[[45.0, 0.0]])).unwrap(), 1.0);
    assert_eq!(
        topographic_error(&model, &cases(&[[1.0, 0.0], [17.0, 0.0], [66.0, 1.0]])).unwrap(),
        0.0
    );

    // opposite corners of a 5x5 grid
    let mut far = vec![vec![100.0, 100.0]; 25];
    for (i, w) in far.iter_mut().enumerate() {
        w[0] += i as f64;
    }
    far[0] = vec![0.0, 0.0];
    far[24] = vec![0.1, 0.0];
    let corners = hand_model(5, 5, far);
    assert_eq!(topographic_error(&corners, &cases(&[[0.05, 0.0]])).unwrap(), 1.0);

    // any two neurons of a 1x2 map are adjacent
    let pair = hand_model(1, 2, vec![vec![0.0, 0.0], vec![1.0, 1.0]]);
    assert_eq!(topographic_error(&pair, &oracles::separated_clouds()).unwrap(), 0.0);
}

#[test]
fn names_plot_agrees_with_clusters() {
    let data = oracles::separated_clouds();
    let model = clouds_model(3);
    let km = run_kmeans(&data, &KMeansConfig::new(2, 3)).unwrap();
    let cells = names_plot_data(&model, &km).unwrap();
    for cell in &cells {
        assert_eq!(cell.labels.len(), 5);
        let clusters: std::collections::BTreeSet<&str> =
            cell.labels.iter().map(|l| l.split('-').next().unwrap()).collect();
        assert_eq!(clusters.len(), 1);
    }
}

#[test]
fn model_json_is_lossless() {
    let model = clouds_model(11);
    let back = SomModel::from_json(&model.to_json()).unwrap();
    assert_eq!(back, model);
    assert_eq!(back.to_json(), model.to_json());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn assignments_are_nearest_neurons(seed in 0u64..1000, n in 3usize..25, m in 1usize..4, rows in 1usize..4, cols in 2usize..4) {
        let mut r = oracles::rng(seed);
        let data = oracles::random_dataset(&mut r, n, m);
        let mut cfg = SomConfig::grid(rows, cols);
        cfg.seed = seed;
        cfg.iterations = Some(20 * n);
        let model = train_som(&data, &cfg).unwrap();
        let scaled = model.scaling.transform(&data).unwrap();
        let mut total = 0.0;
        for (i, p) in scaled.iter().enumerate() {
            let d: Vec<f64> = model.weights.iter().map(|w| oracles::euclid(p, w)).collect();
            let best = d.iter().cloned().fold(f64::INFINITY, f64::min);
            prop_assert_eq!(d[model.assignments[i]], best);
            total += best;
        }
        prop_assert!((model.quantization_error - total / n as f64).abs() <= 1e-12);
        prop_assert!((0.0..=1.0).contains(&model.topographic_error));
    }
}
