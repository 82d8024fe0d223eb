//! Independent reference computations used by the integration and acceptance
//! tests. Nothing here calls into the library's numeric code paths.
#![allow(dead_code)]

use caseflow_core::CaseDataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    sq(a, b).sqrt()
}

pub fn rows(data: &CaseDataset) -> Vec<Vec<f64>> {
    data.rows().map(|r| r.to_vec()).collect()
}

fn means(points: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let m = points[0].len();
    (0..k)
        .map(|c| {
            let members: Vec<&Vec<f64>> = points
                .iter()
                .zip(labels)
                .filter(|(_, &l)| l == c)
                .map(|(p, _)| p)
                .collect();
            (0..m)
                .map(|j| members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64)
                .collect()
        })
        .collect()
}

/// Within- and between-cluster scatter computed straight from the definitions.
pub fn scatter(points: &[Vec<f64>], labels: &[usize], k: usize) -> (f64, f64) {
    let n = points.len() as f64;
    let m = points[0].len();
    let grand: Vec<f64> = (0..m)
        .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n)
        .collect();
    let cm = means(points, labels, k);
    let ssw: f64 = points.iter().zip(labels).map(|(p, &l)| sq(p, &cm[l])).sum();
    // total scatter minus within, cross-checked against the size-weighted form
    let sst: f64 = points.iter().map(|p| sq(p, &grand)).sum();
    let ssb_weighted: f64 = (0..k)
        .map(|c| labels.iter().filter(|&&l| l == c).count() as f64 * sq(&cm[c], &grand))
        .sum();
    let ssb_diff = sst - ssw;
    assert!(
        (ssb_weighted - ssb_diff).abs() <= 1e-8 * sst.max(1.0),
        "scatter decomposition broken: {ssb_weighted} vs {ssb_diff}"
    );
    (ssw, ssb_weighted)
}

pub fn pseudo_f(points: &[Vec<f64>], labels: &[usize], k: usize) -> Option<f64> {
    let n = points.len();
    if k < 2 || k >= n {
        return None;
    }
    let (ssw, ssb) = scatter(points, labels, k);
    Some((ssb / (k - 1) as f64) / (ssw / (n - k) as f64))
}

/// Minimum within-cluster sum of squares over every partition into exactly k
/// non-empty groups.
pub fn exhaustive_min_wss(points: &[Vec<f64>], k: usize) -> f64 {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            let cm = means(points, &labels, k);
            let w: f64 = points.iter().zip(&labels).map(|(p, &l)| sq(p, &cm[l])).sum();
            best = best.min(w);
        }
        // odometer increment
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Silhouette widths by direct enumeration of pairwise distances.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> Vec<f64> {
    let n = points.len();
    let k = labels.iter().max().unwrap() + 1;
    (0..n)
        .map(|i| {
            let own = labels[i];
            let mates: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == own).collect();
            if mates.is_empty() {
                return 0.0;
            }
            let a = mates.iter().map(|&j| euclid(&points[i], &points[j])).sum::<f64>() / mates.len() as f64;
            let mut b = f64::INFINITY;
            for c in (0..k).filter(|&c| c != own) {
                let others: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
                if others.is_empty() {
                    continue;
                }
                let d = others.iter().map(|&j| euclid(&points[i], &points[j])).sum::<f64>()
                    / others.len() as f64;
                b = b.min(d);
            }
            if a.max(b) == 0.0 {
                0.0
            } else {
                (b - a) / a.max(b)
            }
        })
        .collect()
}

/// Tanh-sinh quadrature of `f` over [0, len], where `f` receives the distance
/// from the left endpoint (so integrable singularities at 0 are handled).
fn tanh_sinh(len: f64, f: impl Fn(f64) -> f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut prev = f64::NAN;
    for level in 3..=10 {
        let h = 1.0 / (1u64 << level) as f64;
        let mut sum = 0.0;
        let kmax = (6.0 / h) as i64;
        for kk in -kmax..=kmax {
            let t = kk as f64 * h;
            let u = half_pi * t.sinh();
            let from_left = len / (1.0 + (-2.0 * u).exp());
            let from_right = len / (1.0 + (2.0 * u).exp());
            if from_left <= 0.0 || from_right <= 0.0 {
                continue;
            }
            let w = len * half_pi * t.cosh() / (2.0 * u.cosh().powi(2));
            if w == 0.0 || !w.is_finite() {
                continue;
            }
            sum += w * f(from_left);
        }
        let est = sum * h;
        if (est - prev).abs() <= 1e-14 * est.abs() {
            return est;
        }
        prev = est;
    }
    prev
}

/// (df_between, df_within, F) points for checking F tail probabilities.
pub const F_TRIPLES: [(f64, f64, f64); 10] = [
    (1.0, 1.0, 0.5),
    (1.0, 2.0, 3.0),
    (2.0, 5.0, 1.7),
    (3.0, 10.0, 2.5),
    (4.0, 20.0, 0.8),
    (5.0, 7.0, 6.0),
    (1.0, 30.0, 4.2),
    (9.0, 3.0, 2.0),
    (12.0, 40.0, 1.1),
    (2.0, 2.0, 8.0),
];

/// P(F > f) for the F(d1, d2) distribution by numerical integration of the
/// unnormalized density (the normalizing constant is integrated as well).
pub fn f_tail_quadrature(f: f64, d1: f64, d2: f64) -> f64 {
    // lower part: ∫_0^f x^{d1/2-1} (1 + d1 x / d2)^{-(d1+d2)/2} dx
    let lower = tanh_sinh(f, |x| {
        ((d1 / 2.0 - 1.0) * x.ln() - (d1 + d2) / 2.0 * (1.0 + d1 * x / d2).ln()).exp()
    });
    // upper part after t = 1/x:
    // ∫_0^{1/f} d2^{(d1+d2)/2} t^{d2/2-1} (d2 t + d1)^{-(d1+d2)/2} dt
    let upper = tanh_sinh(1.0 / f, |t| {
        ((d1 + d2) / 2.0 * d2.ln() + (d2 / 2.0 - 1.0) * t.ln()
            - (d1 + d2) / 2.0 * (d2 * t + d1).ln())
        .exp()
    });
    upper / (lower + upper)
}

/// Two tight point clouds centered exactly on (0, 0) and (10, 10).
pub fn separated_clouds() -> CaseDataset {
    let offsets = [(0.0, 0.0), (0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5)];
    let mut rows = Vec::new();
    for (cx, cy) in [(0.0, 0.0), (10.0, 10.0)] {
        for (dx, dy) in offsets {
            rows.push(vec![cx + dx, cy + dy]);
        }
    }
    CaseDataset::from_rows(vec!["x".into(), "y".into()], rows).unwrap()
}

pub fn separated_clouds_csv() -> String {
    let d = separated_clouds();
    let mut s = String::from("x,y\n");
    for r in d.rows() {
        s.push_str(&format!("{},{}\n", r[0], r[1]));
    }
    s
}

pub fn four_points() -> CaseDataset {
    CaseDataset::from_rows(
        vec!["x".into(), "y".into()],
        vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![10.0, 0.0], vec![10.0, 1.0]],
    )
    .unwrap()
}

/// Uniform random dataset with `n` cases and `m` features.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, m: usize) -> CaseDataset {
    let rows = (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(-10.0..10.0)).collect())
        .collect();
    let names = (0..m).map(|j| format!("f{j}")).collect();
    CaseDataset::from_rows(names, rows).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Re-derivation of the sensitivity sampler from its documented contract:
/// ChaCha8 seeded with `seed`; per sample, one uniform draw per edited
/// feature in feature order, `u = d (2r - 1)`, value `o + delta (1 + u)`.
/// `nearest` maps a raw profile to its neuron.
pub fn sensitivity_counts(
    base: &[f64],
    edited: &[f64],
    deviation: &[f64],
    n_samples: usize,
    seed: u64,
    nearest: impl Fn(&[f64]) -> usize,
) -> std::collections::BTreeMap<usize, u64> {
    let mut r = rng(seed);
    let changed: Vec<usize> = (0..base.len()).filter(|&j| base[j] != edited[j]).collect();
    let mut counts = std::collections::BTreeMap::new();
    for _ in 0..n_samples {
        let mut p = base.to_vec();
        for &j in &changed {
            let u = deviation[j] * (2.0 * r.random::<f64>() - 1.0);
            p[j] = base[j] + (edited[j] - base[j]) * (1.0 + u);
        }
        *counts.entry(nearest(&p)).or_insert(0) += 1;
    }
    counts
}
