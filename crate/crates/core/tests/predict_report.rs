mod oracles;

use std::collections::BTreeMap;
use std::io::Read;

use caseflow_core::{
    classify, generate_report_at, validate_schema, CaseDataset, KMeansConfig, PredictError,
    ScalingParams, Session, SessionReport, SensitivitySpec, SomConfig, SomModel, Stage, StageSet,
    Statistic,
};
use chrono::{TimeZone, Utc};
use rand::Rng;

#[test]
fn training_cases_classify_to_their_assignments() {
    for seed in 0..10 {
        let mut r = oracles::rng(500 + seed);
        let n = r.random_range(10..40);
        let m = r.random_range(2..5);
        let data = oracles::random_dataset(&mut r, n, m);
        let mut cfg = SomConfig::grid(3, 3);
        cfg.seed = seed;
        let model = caseflow_core::train_som(&data, &cfg).unwrap();
        let result = classify(&model, &data).unwrap();
        for (p, &a) in result.predictions.iter().zip(&model.assignments) {
            assert_eq!(p.best, a);
            assert_ne!(p.best, p.second);
            assert!(p.best_distance <= p.second_distance);
        }
        let ids: Vec<&String> = result.predictions.iter().map(|p| &p.case_id).collect();
        assert_eq!(ids, data.case_ids().iter().collect::<Vec<_>>());
    }
}

#[test]
fn schema_mismatch_names_columns() {
    let data = oracles::separated_clouds();
    let model = caseflow_core::train_som(&data, &SomConfig::grid(1, 2)).unwrap();
    let cases = [
        (vec!["x", "z"], vec!["y"], vec!["z"]),
        (vec!["x"], vec!["y"], vec![]),
        (vec!["x", "y", "w"], vec![], vec!["w"]),
        (vec!["a", "b"], vec!["x", "y"], vec!["a", "b"]),
    ];
    for (cols, missing, extra) in cases {
        let rows = vec![vec![1.0; cols.len()]];
        let d = CaseDataset::from_rows(cols.iter().map(|s| s.to_string()).collect(), rows).unwrap();
        let err = validate_schema(&model, &d).unwrap_err();
        assert_eq!(err.missing, missing);
        assert_eq!(err.extra, extra);
        match classify(&model, &d).unwrap_err() {
            PredictError::Schema(e) => assert_eq!(e, err),
            other => panic!("unexpected {other:?}"),
        }
    }
}

#[test]
fn new_point_near_second_cloud() {
    let data = oracles::separated_clouds();
    let model = caseflow_core::train_som(&data, &SomConfig::grid(1, 2)).unwrap();
    let d = CaseDataset::from_rows(vec!["x".into(), "y".into()], vec![vec![9.5, 10.2]]).unwrap();
    let p = classify(&model, &d).unwrap();
    assert_eq!(p.predictions[0].best, model.assignments[9]);
}

fn full_session() -> Session {
    let mut s = Session::new("matrix");
    s.load_data(oracles::separated_clouds());
    s.run_kmeans(&KMeansConfig::new(2, 8)).unwrap();
    let mut cfg = SomConfig::grid(1, 2);
    cfg.seed = 8;
    s.train_som(&cfg).unwrap();
    let target = s.kmeans.as_ref().unwrap().centroids[1].clone();
    let edits: BTreeMap<String, f64> =
        [("x".to_string(), target[0]), ("y".to_string(), target[1])].into();
    s.run_scenario(0, &edits).unwrap();
    s.sensitivity(&SensitivitySpec {
        cluster: 0,
        deviation: [("x".to_string(), 0.3)].into(),
        n_samples: 200,
        seed: 4,
    })
    .unwrap();
    let new = CaseDataset::from_rows(
        vec!["y".into(), "x".into()],
        vec![vec![10.2, 9.5], vec![0.1, 0.3]],
    )
    .unwrap();
    s.predict(new).unwrap();
    s
}

const OPTIONAL: [Stage; 4] = [Stage::Kmeans, Stage::Som, Stage::Scenario, Stage::Prediction];

fn at() -> chrono::DateTime<Utc> {
    Utc.with_ymd_and_hms(2024, 5, 1, 12, 0, 0).unwrap()
}

#[test]
fn sections_follow_completed_stages() {
    let full = full_session();
    for mask in 1u8..16 {
        let mut s = full.clone();
        let mut want = StageSet::empty();
        for (i, stage) in OPTIONAL.iter().enumerate() {
            if mask & (1 << i) != 0 {
                want.insert(*stage);
                continue;
            }
            match stage {
                Stage::Kmeans => s.kmeans = None,
                Stage::Som => s.som = None,
                Stage::Scenario => s.scenario = None,
                Stage::Prediction => s.prediction = None,
                Stage::Data => unreachable!(),
            }
        }
        assert_eq!(s.completed_stages().reported(), want);
        let report = generate_report_at(&s, at()).unwrap();
        assert_eq!(report.sections(), want, "mask {mask:04b}");

        let json = report.to_json();
        let back = SessionReport::from_json(&json).unwrap();
        assert_eq!(back, report);
        assert_eq!(back.to_json(), json);

        let archive = report.to_csv_archive().unwrap();
        let mut zip = zip::ZipArchive::new(std::io::Cursor::new(archive)).unwrap();
        let names: Vec<String> = zip.file_names().map(String::from).collect();
        for (stage, prefix) in [
            (Stage::Kmeans, "kmeans_"),
            (Stage::Som, "som_"),
            (Stage::Scenario, "scenario_"),
            (Stage::Prediction, "prediction_"),
        ] {
            assert_eq!(names.iter().any(|n| n.starts_with(prefix)), want.contains(stage));
        }
        let mut meta = String::new();
        zip.by_name("metadata.csv").unwrap().read_to_string(&mut meta).unwrap();
        assert!(meta.contains("2024-05-01T12:00:00.000Z"));
    }
}

#[test]
fn empty_session_has_nothing_to_export() {
    let mut s = Session::new("empty");
    assert!(generate_report_at(&s, at()).is_err());
    s.load_data(oracles::separated_clouds());
    assert!(generate_report_at(&s, at()).is_err());
}

#[test]
fn latest_kmeans_run_wins() {
    let mut s = Session::new("latest");
    let mut r = oracles::rng(77);
    s.load_data(oracles::random_dataset(&mut r, 20, 2));
    s.run_kmeans(&KMeansConfig::new(3, 1)).unwrap();
    s.run_kmeans(&KMeansConfig::new(4, 1)).unwrap();
    let report = generate_report_at(&s, at()).unwrap();
    let km = report.kmeans.unwrap();
    assert_eq!(km.k, 4);
    assert_eq!(km.profiles.len(), 4);
}

#[test]
fn awkward_floats_round_trip_exactly() {
    let rows = vec![
        vec![0.1 + 0.2, 1e-300, -0.0],
        vec![1.0 / 3.0, 123_456_789.123_456_79, f64::MIN_POSITIVE],
        vec![2.0f64.sqrt(), -7.5e120, 5e-324],
        vec![std::f64::consts::PI, 1.0, 2.0],
    ];
    let data = CaseDataset::from_rows(vec!["a".into(), "b".into(), "c".into()], rows).unwrap();
    let mut s = Session::new("floats");
    s.load_data(data);
    s.run_kmeans(&KMeansConfig::new(2, 0)).unwrap();
    let report = generate_report_at(&s, at()).unwrap();
    let back = SessionReport::from_json(&report.to_json()).unwrap();
    let (a, b) = (report.kmeans.unwrap(), back.kmeans.unwrap());
    for (p, q) in a.profiles.iter().zip(&b.profiles) {
        for (x, y) in p.values.iter().zip(&q.values) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    assert_eq!(a.wss.to_bits(), b.wss.to_bits());
}

#[test]
fn infinite_f_survives_round_trip() {
    let data = CaseDataset::from_rows(
        vec!["x".into(), "y".into()],
        vec![vec![1.0, 0.0], vec![1.0, 1.0], vec![3.0, 0.5], vec![3.0, 2.0]],
    )
    .unwrap();
    let model = SomModel::from_weights(
        SomConfig::grid(1, 2),
        ScalingParams::identity(2),
        vec!["x".into(), "y".into()],
        vec![vec![1.0, 0.5], vec![3.0, 1.25]],
    )
    .unwrap()
    .with_training_cases(&data)
    .unwrap();
    assert_eq!(model.anova[0].f, Statistic::Infinite);
    let mut s = Session::new("inf");
    s.load_data(data);
    s.som = Some(model);
    let report = generate_report_at(&s, at()).unwrap();
    let json = report.to_json();
    assert!(json.contains("\"inf\""));
    let back = SessionReport::from_json(&json).unwrap();
    assert_eq!(back.som.unwrap().anova[0].f, Statistic::Infinite);
}

#[test]
fn archive_is_reproducible() {
    let report = generate_report_at(&full_session(), at()).unwrap();
    assert_eq!(report.to_csv_archive().unwrap(), report.to_csv_archive().unwrap());
}
