mod oracles;

use caseflow_core::som::anova_by_neuron;
use caseflow_core::stats::{f_survival, one_way_anova};
use caseflow_core::{CaseDataset, ScalingParams, SomConfig, SomModel, Statistic};
use proptest::prelude::*;

#[test]
fn quadrature_agrees_with_closed_form() {
    // F(2, d) has tail (1 + 2f/d)^(-d/2)
    for (d, f) in [(1.0f64, 0.3f64), (4.0, 2.0), (15.0, 5.5)] {
        let exact = (1.0 + 2.0 * f / d).powf(-d / 2.0);
        assert!((oracles::f_tail_quadrature(f, 2.0, d) - exact).abs() < 1e-10);
    }
}

#[test]
fn survival_matches_quadrature() {
    for (d1, d2, f) in oracles::F_TRIPLES {
        let want = oracles::f_tail_quadrature(f, d1, d2);
        let got = f_survival(f, d1, d2);
        assert!((got - want).abs() <= 1e-6, "F({d1},{d2}) at {f}: {got} vs {want}");
    }
}

fn two_neuron_model(names: &[&str], weights: Vec<Vec<f64>>) -> SomModel {
    let m = weights[0].len();
    SomModel::from_weights(
        SomConfig::grid(1, 2),
        ScalingParams::identity(m),
        names.iter().map(|s| s.to_string()).collect(),
        weights,
    )
    .unwrap()
}

#[test]
fn grouped_fixture_through_map() {
    let data = CaseDataset::from_rows(
        vec!["x".into(), "c".into()],
        vec![vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0], vec![4.0, 5.0]],
    )
    .unwrap();
    let model = two_neuron_model(&["x", "c"], vec![vec![1.5, 5.0], vec![3.5, 5.0]]);
    let rows = anova_by_neuron(&model, &data).unwrap();
    assert_eq!(rows[0].f, Statistic::Value(8.0));
    assert!((rows[0].p - 0.1056).abs() <= 1e-4);
    assert!((rows[0].p - oracles::f_tail_quadrature(8.0, 1.0, 2.0)).abs() <= 1e-9);
    assert_eq!((rows[0].df_between, rows[0].df_within), (1, 2));
    // constant feature
    assert_eq!(rows[1].f, Statistic::Value(0.0));
    assert_eq!(rows[1].p, 1.0);
}

#[test]
fn perfectly_separated_groups_give_infinite_f() {
    let a = one_way_anova(&[1.0, 1.0, 3.0, 3.0], &[0, 0, 1, 1]).unwrap();
    assert_eq!(a.f, Statistic::Infinite);
    assert_eq!(a.p, 0.0);
}

proptest! {
    #[test]
    fn label_permutation_leaves_anova_unchanged(
        values in prop::collection::vec(-100.0f64..100.0, 6..30),
        g in 2usize..5,
        relabel in 0usize..24,
    ) {
        let groups: Vec<usize> = (0..values.len()).map(|i| i % g).collect();
        // apply a fixed permutation of label ids
        let mut perm: Vec<usize> = (0..g).collect();
        perm.rotate_left(relabel % g);
        if relabel % 2 == 1 {
            perm.reverse();
        }
        let renamed: Vec<usize> = groups.iter().map(|&l| perm[l]).collect();
        let a = one_way_anova(&values, &groups).unwrap();
        let b = one_way_anova(&values, &renamed).unwrap();
        prop_assert_eq!(a.df_between, b.df_between);
        prop_assert_eq!(a.df_within, b.df_within);
        match (a.f.value(), b.f.value()) {
            (Some(x), Some(y)) => prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0)),
            _ => prop_assert_eq!(a.f, b.f),
        }
        prop_assert!((a.p - b.p).abs() <= 1e-9);
        prop_assert!((0.0..=1.0).contains(&a.p));
    }

    #[test]
    fn survival_is_a_probability(f in 0.0f64..50.0, d1 in 1u32..30, d2 in 1u32..60) {
        let p = f_survival(f, d1 as f64, d2 as f64);
        prop_assert!((0.0..=1.0).contains(&p));
        let q = f_survival(f + 1.0, d1 as f64, d2 as f64);
        prop_assert!(q <= p + 1e-12);
    }
}
