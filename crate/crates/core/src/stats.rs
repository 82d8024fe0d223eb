//! Statistical helpers: F-distribution tail probabilities and one-way ANOVA.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

/// A test statistic that may be infinite or undefined.
///
/// Serializes as a JSON number when finite, otherwise as the string
/// `"inf"` or `"undefined"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Statistic {
    Value(f64),
    Infinite,
    Undefined,
}

impl Statistic {
    pub fn value(self) -> Option<f64> {
        match self {
            Statistic::Value(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_undefined(self) -> bool {
        matches!(self, Statistic::Undefined)
    }

    /// Ratio `num / den` with the degenerate cases made explicit.
    pub fn ratio(num: f64, den: f64) -> Self {
        if den > 0.0 {
            Statistic::Value(num / den)
        } else if num > 0.0 {
            Statistic::Infinite
        } else {
            Statistic::Undefined
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Value(v) => write!(f, "{v}"),
            Statistic::Infinite => f.write_str("inf"),
            Statistic::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Statistic {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Statistic::Value(v) => s.serialize_f64(*v),
            Statistic::Infinite => s.serialize_str("inf"),
            Statistic::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Statistic {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Statistic;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"inf\" or \"undefined\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Statistic, E> {
                Ok(Statistic::Value(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Statistic, E> {
                Ok(Statistic::Value(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Statistic, E> {
                Ok(Statistic::Value(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Statistic, E> {
                match v {
                    "inf" => Ok(Statistic::Infinite),
                    "undefined" => Ok(Statistic::Undefined),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

/// ln Γ(x) for x > 0 (Lanczos, g = 7, n = 9).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// Regularized incomplete beta I_x(a, b), continued fraction via modified Lentz.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    assert!(a > 0.0 && b > 0.0, "shape parameters must be positive");
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() + b * (1.0 - x).ln() - (ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b));
    if x < (a + 1.0) / (a + b + 2.0) {
        ln_front.exp() * beta_cf(x, a, b) / a
    } else {
        1.0 - ln_front.exp() * beta_cf(1.0 - x, b, a) / b
    }
}

fn beta_cf(x: f64, a: f64, b: f64) -> f64 {
    const MAX_ITER: usize = 10_000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// Upper tail P(X > f) of the F distribution with (df1, df2) degrees of freedom.
pub fn f_survival(f: f64, df1: f64, df2: f64) -> f64 {
    if f.is_nan() {
        return f64::NAN;
    }
    if f <= 0.0 {
        return 1.0;
    }
    if f.is_infinite() {
        return 0.0;
    }
    let x = df2 / (df2 + df1 * f);
    regularized_incomplete_beta(x, df2 / 2.0, df1 / 2.0).clamp(0.0, 1.0)
}

/// One-way ANOVA outcome for a single variable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneWayAnova {
    pub f: Statistic,
    pub p: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub ss_between: f64,
    pub ss_within: f64,
}

/// One-way ANOVA over `values` partitioned by `groups` (arbitrary labels).
///
/// Returns `None` when fewer than two groups are present or when there are
/// no residual degrees of freedom.
pub fn one_way_anova(values: &[f64], groups: &[usize]) -> Option<OneWayAnova> {
    assert_eq!(values.len(), groups.len());
    let n = values.len();
    let mut labels: Vec<usize> = groups.to_vec();
    labels.sort_unstable();
    labels.dedup();
    let g = labels.len();
    if g < 2 || n <= g {
        return None;
    }
    let mut sums = vec![0.0; g];
    let mut counts = vec![0usize; g];
    let slot = |label: usize| labels.binary_search(&label).expect("label present");
    for (&v, &grp) in values.iter().zip(groups) {
        let s = slot(grp);
        sums[s] += v;
        counts[s] += 1;
    }
    let grand = values.iter().sum::<f64>() / n as f64;
    let means: Vec<f64> = sums.iter().zip(&counts).map(|(s, &c)| s / c as f64).collect();
    let ss_between: f64 = means
        .iter()
        .zip(&counts)
        .map(|(m, &c)| c as f64 * (m - grand).powi(2))
        .sum();
    let ss_within: f64 = values
        .iter()
        .zip(groups)
        .map(|(v, &grp)| (v - means[slot(grp)]).powi(2))
        .sum();
    let df_between = g - 1;
    let df_within = n - g;
    let (f, p) = if ss_between <= 0.0 {
        // no between-group variation, including a constant variable
        (Statistic::Value(0.0), 1.0)
    } else if ss_within <= 0.0 {
        (Statistic::Infinite, 0.0)
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        (Statistic::Value(f), f_survival(f, df_between as f64, df_within as f64))
    };
    Some(OneWayAnova {
        f,
        p,
        df_between,
        df_within,
        ss_between,
        ss_within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-13);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-14);
        assert!((ln_gamma(0.1) - 2.252_712_651_734_206).abs() < 1e-12);
    }

    #[test]
    fn incomplete_beta_closed_forms() {
        // I_x(1, 1) = x; I_x(a, 1) = x^a; I_x(1, b) = 1 - (1-x)^b
        for &x in &[0.01, 0.3, 0.5, 0.77, 0.999] {
            assert!((regularized_incomplete_beta(x, 1.0, 1.0) - x).abs() < 1e-14);
            assert!((regularized_incomplete_beta(x, 3.5, 1.0) - x.powf(3.5)).abs() < 1e-13);
            assert!(
                (regularized_incomplete_beta(x, 1.0, 4.0) - (1.0 - (1.0 - x).powi(4))).abs() < 1e-13
            );
        }
    }

    #[test]
    fn f_tail_df_1_2_closed_form() {
        // F(1, 2) = T_2^2, P(|T_2| > t) = 1 - t / sqrt(2 + t^2)
        for &f in &[0.5, 1.0, 8.0, 30.0] {
            let t: f64 = f64::sqrt(f);
            let expected = 1.0 - t / (2.0 + t * t).sqrt();
            assert!((f_survival(f, 1.0, 2.0) - expected).abs() < 1e-12, "f={f}");
        }
    }

    #[test]
    fn f_tail_df_2_n_closed_form() {
        // P(F(2, d) > f) = (1 + 2f/d)^(-d/2)
        for &(f, d) in &[(0.7f64, 5.0f64), (3.2, 12.0), (10.0, 3.0)] {
            let expected = (1.0 + 2.0 * f / d).powf(-d / 2.0);
            assert!((f_survival(f, 2.0, d) - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn anova_reference_fixture() {
        let r = one_way_anova(&[1.0, 2.0, 3.0, 4.0], &[0, 0, 1, 1]).unwrap();
        assert_eq!(r.ss_between, 4.0);
        assert_eq!(r.ss_within, 1.0);
        assert_eq!((r.df_between, r.df_within), (1, 2));
        assert_eq!(r.f, Statistic::Value(8.0));
        assert!((r.p - 0.105_572_809).abs() < 1e-8);
    }

    #[test]
    fn anova_degenerate_cases() {
        let r = one_way_anova(&[5.0; 4], &[0, 0, 1, 1]).unwrap();
        assert_eq!((r.f, r.p), (Statistic::Value(0.0), 1.0));
        let r = one_way_anova(&[0.0, 0.0, 1.0, 1.0], &[3, 3, 9, 9]).unwrap();
        assert_eq!((r.f, r.p), (Statistic::Infinite, 0.0));
        assert!(one_way_anova(&[1.0, 2.0], &[0, 0]).is_none());
        assert!(one_way_anova(&[1.0, 2.0], &[0, 1]).is_none());
    }

    #[test]
    fn statistic_json_markers() {
        let v = vec![Statistic::Value(2.5), Statistic::Infinite, Statistic::Undefined];
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, r#"[2.5,"inf","undefined"]"#);
        let back: Vec<Statistic> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn ratio_markers() {
        assert_eq!(Statistic::ratio(1.0, 0.0), Statistic::Infinite);
        assert_eq!(Statistic::ratio(0.0, 0.0), Statistic::Undefined);
        assert_eq!(Statistic::ratio(3.0, 2.0), Statistic::Value(1.5));
    }
}
