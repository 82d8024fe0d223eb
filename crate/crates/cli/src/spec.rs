//! `key=value,key=value` stage specifications given on the command line.

use std::collections::BTreeMap;

use caseflow_core::{KMeansConfig, SensitivitySpec, SomConfig};

use crate::pipeline::Intervention;

fn pairs(spec: &str) -> Result<Vec<(String, String)>, String> {
    spec.split(',')
        .map(str::trim)
        .filter(|p| !p.is_empty())
        .map(|p| {
            let (k, v) = p
                .split_once('=')
                .ok_or_else(|| format!("expected key=value, got {p:?}"))?;
            Ok((k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.parse().map_err(|_| format!("invalid value for {key}: {v:?}"))
}

/// Applies e.g. `k=3,n_init=20,scaled=true` on top of `base`.
pub fn kmeans(spec: &str, mut base: KMeansConfig) -> Result<KMeansConfig, String> {
    for (k, v) in pairs(spec)? {
        match k.as_str() {
            "k" => base.k = num(&k, &v)?,
            "seed" => base.seed = num(&k, &v)?,
            "n_init" => base.n_init = num(&k, &v)?,
            "max_iter" => base.max_iter = num(&k, &v)?,
            "scaled" => base.scaled = num(&k, &v)?,
            other => return Err(format!("unknown k-means option {other:?}")),
        }
    }
    Ok(base)
}

/// Applies e.g. `grid=5x5,iterations=2000,learning_rate=0.05` on top of `base`.
pub fn som(spec: &str, mut base: SomConfig) -> Result<SomConfig, String> {
    for (k, v) in pairs(spec)? {
        match k.as_str() {
            "grid" => {
                let (r, c) = v
                    .split_once(['x', 'X'])
                    .ok_or_else(|| format!("grid must look like 5x5, got {v:?}"))?;
                base.grid_rows = num("grid", r)?;
                base.grid_cols = num("grid", c)?;
            }
            "rows" => base.grid_rows = num(&k, &v)?,
            "cols" => base.grid_cols = num(&k, &v)?,
            "iterations" => base.iterations = Some(num(&k, &v)?),
            "learning_rate" | "alpha" => base.learning_rate = num(&k, &v)?,
            "radius" => base.initial_radius = Some(num(&k, &v)?),
            "seed" => base.seed = num(&k, &v)?,
            "scale" | "scale_data" => base.scale_data = num(&k, &v)?,
            other => return Err(format!("unknown SOM option {other:?}")),
        }
    }
    Ok(base)
}

/// `cluster=0,x=1.5,y=2`: every key except `cluster` is a feature edit.
pub fn intervention(spec: &str) -> Result<Intervention, String> {
    let mut cluster = None;
    let mut edits = BTreeMap::new();
    for (k, v) in pairs(spec)? {
        if k == "cluster" {
            cluster = Some(num(&k, &v)?);
        } else {
            edits.insert(k.clone(), num(&k, &v)?);
        }
    }
    Ok(Intervention {
        cluster: cluster.ok_or("intervention needs cluster=<id>")?,
        edits,
    })
}

/// `cluster=0,samples=1000,seed=3,x=0.2`: other keys are per-feature deviations.
pub fn sensitivity(spec: &str) -> Result<SensitivitySpec, String> {
    let mut cluster = None;
    let mut out = SensitivitySpec {
        cluster: 0,
        deviation: BTreeMap::new(),
        n_samples: caseflow_core::scenario::DEFAULT_SAMPLES,
        seed: 0,
    };
    for (k, v) in pairs(spec)? {
        match k.as_str() {
            "cluster" => cluster = Some(num(&k, &v)?),
            "samples" | "n_samples" => out.n_samples = num(&k, &v)?,
            "seed" => out.seed = num(&k, &v)?,
            _ => {
                out.deviation.insert(k.clone(), num(&k, &v)?);
            }
        }
    }
    out.cluster = cluster.ok_or("sensitivity needs cluster=<id>")?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kmeans_spec() {
        let c = kmeans("k=4, n_init=20,scaled=true", KMeansConfig::default()).unwrap();
        assert_eq!((c.k, c.n_init, c.scaled), (4, 20, true));
        assert!(kmeans("k=three", KMeansConfig::default()).is_err());
        assert!(kmeans("q=1", KMeansConfig::default()).is_err());
    }

    #[test]
    fn som_grid() {
        let c = som("grid=3x4,iterations=500", SomConfig::default()).unwrap();
        assert_eq!((c.grid_rows, c.grid_cols, c.iterations), (3, 4, Some(500)));
        assert!(som("grid=3", SomConfig::default()).is_err());
    }

    #[test]
    fn intervention_and_sensitivity() {
        let i = intervention("cluster=1,x=2.5,y=-1").unwrap();
        assert_eq!(i.cluster, 1);
        assert_eq!(i.edits["y"], -1.0);
        assert!(intervention("x=1").is_err());
        let s = sensitivity("cluster=0,samples=50,seed=9,x=0.25").unwrap();
        assert_eq!((s.n_samples, s.seed), (50, 9));
        assert_eq!(s.deviation["x"], 0.25);
    }
}
