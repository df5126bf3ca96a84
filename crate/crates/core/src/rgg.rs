//! Random geometric graphs: r-disc, k-nearest and online nearest-neighbor
//! models over uniform points in the unit cube, plus Monte Carlo sweeps of
//! their connectivity.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{unit_ball_volume, Point};
use crate::graph::RoadmapGraph;
use crate::sampling::RngStream;
use crate::spatial::VertexIndex;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RggError {
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("could not build thread pool: {0}")]
    ThreadPool(String),
}

/// Edge rule of a random geometric graph.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum RggKind {
    /// Edge between every pair strictly closer than `r`.
    RDisc { r: f64 },
    /// Edge when either endpoint is among the other's `k` nearest neighbors.
    KNearest { k: usize },
    /// Every point joins its nearest predecessor in arrival order.
    #[serde(rename = "onlineNN")]
    OnlineNn,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RggModel {
    #[serde(flatten)]
    pub kind: RggKind,
    pub d: usize,
    /// Point count, or the Poisson mean when `poissonized`.
    pub n: usize,
    #[serde(default)]
    pub poissonized: bool,
}

impl RggModel {
    pub fn validate(&self) -> Result<(), RggError> {
        if self.d < 1 {
            return Err(RggError::InvalidModel("dimension must be at least 1".into()));
        }
        match self.kind {
            RggKind::RDisc { r } if !(r > 0.0) => Err(RggError::InvalidModel(format!("r must be positive, got {r}"))),
            RggKind::KNearest { k: 0 } => Err(RggError::InvalidModel("k must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

/// Draws the points of `model` and connects them by its edge rule.
pub fn gen_rgg(model: &RggModel, rng: &mut RngStream) -> Result<RoadmapGraph, RggError> {
    model.validate()?;
    let count = if model.poissonized {
        if model.n == 0 {
            0
        } else {
            rng.poisson_count(model.n as f64) as usize
        }
    } else {
        model.n
    };
    let points: Vec<Point> = (0..count).map(|_| rng.sample_uniform(model.d)).collect();
    Ok(gen_rgg_on(&points, model.kind, model.d))
}

/// Connects a given point sequence by the edge rule `kind`. Edge costs are
/// Euclidean lengths.
pub fn gen_rgg_on(points: &[Point], kind: RggKind, d: usize) -> RoadmapGraph {
    let mut g = RoadmapGraph::roadmap(d);
    let mut index = VertexIndex::new(d);
    for p in points {
        let v = g.add_vertex(p.clone()).expect("dimension checked by caller");
        if let RggKind::OnlineNn = kind {
            if v > 0 {
                let nb = index.nearest(p.coords()).expect("index is nonempty");
                g.add_undirected_edge(nb.id, v, nb.distance).expect("valid edge");
            }
        }
        index.insert(p.coords(), v).expect("ids are fresh");
    }
    match kind {
        RggKind::OnlineNn => {}
        RggKind::RDisc { r } => {
            for (v, p) in points.iter().enumerate() {
                for nb in index.near(p.coords(), r) {
                    if nb.id > v && nb.distance < r {
                        g.add_undirected_edge(v, nb.id, nb.distance).expect("valid edge");
                    }
                }
            }
        }
        RggKind::KNearest { k } => {
            for (v, p) in points.iter().enumerate() {
                let found = index.k_nearest(p.coords(), k + 1);
                for nb in found.into_iter().filter(|nb| nb.id != v).take(k) {
                    g.add_undirected_edge(v, nb.id, nb.distance).expect("valid edge");
                }
            }
        }
    }
    g
}

/// Radius `(ln n / (ζ_d n))^{1/d}` at which `ζ_d r^d = ln n / n`, the
/// connectivity threshold of the r-disc graph.
pub fn connectivity_threshold_radius(n: usize, d: usize) -> f64 {
    assert!(n >= 2, "threshold radius needs n >= 2");
    let n = n as f64;
    (n.ln() / (unit_ball_volume(d) * n)).powf(1.0 / d as f64)
}

/// Radius with `n r^d = lambda`.
pub fn thermodynamic_radius(lambda: f64, n: usize, d: usize) -> f64 {
    (lambda / n as f64).powf(1.0 / d as f64)
}

/// Model family swept over a parameter grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelFamily {
    #[serde(rename = "rdisc")]
    RDisc,
    #[serde(rename = "knearest")]
    KNearest,
    #[serde(rename = "onlinenn")]
    OnlineNn,
}

impl fmt::Display for ModelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ModelFamily::RDisc => "rdisc",
            ModelFamily::KNearest => "knearest",
            ModelFamily::OnlineNn => "onlinenn",
        })
    }
}

impl FromStr for ModelFamily {
    type Err = RggError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "rdisc" => Ok(ModelFamily::RDisc),
            "knearest" => Ok(ModelFamily::KNearest),
            "onlinenn" => Ok(ModelFamily::OnlineNn),
            _ => Err(RggError::InvalidModel(format!("unknown model {s:?}"))),
        }
    }
}

/// How a grid parameter maps to the model's `r` or `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamScale {
    /// The parameter is `r` (r-disc) or `k` (k-nearest, rounded down).
    #[serde(rename = "absolute")]
    Absolute,
    /// `r = param · r_c(n, d)`.
    #[serde(rename = "rc")]
    ThresholdMultiple,
    /// `r = (param / n)^{1/d}`.
    #[serde(rename = "lambda")]
    Lambda,
    /// `k = floor(param · ln n)`.
    #[serde(rename = "logn")]
    LogN,
}

impl FromStr for ParamScale {
    type Err = RggError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "absolute" => Ok(ParamScale::Absolute),
            "rc" => Ok(ParamScale::ThresholdMultiple),
            "lambda" => Ok(ParamScale::Lambda),
            "logn" => Ok(ParamScale::LogN),
            _ => Err(RggError::InvalidModel(format!("unknown parameter scale {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub family: ModelFamily,
    pub d: usize,
    pub n: usize,
    pub params: Vec<f64>,
    pub scale: ParamScale,
    pub trials: usize,
    pub poissonized: bool,
    pub seed: u64,
    pub threads: usize,
}

/// One grid point of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub model: ModelFamily,
    pub d: usize,
    pub n: usize,
    pub param: f64,
    pub p_connected: f64,
    /// Binomial standard error of `p_connected`.
    pub se: f64,
    pub mean_lcc_fraction: f64,
}

pub const SWEEP_CSV_HEADER: &str = "model,d,n,param,p_connected,se,mean_lcc_fraction";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.model, self.d, self.n, self.param, self.p_connected, self.se, self.mean_lcc_fraction
        )
    }
}

impl SweepConfig {
    fn kind_for(&self, param: f64) -> Result<RggKind, RggError> {
        Ok(match self.family {
            ModelFamily::OnlineNn => RggKind::OnlineNn,
            ModelFamily::RDisc => RggKind::RDisc {
                r: match self.scale {
                    ParamScale::Absolute => param,
                    ParamScale::ThresholdMultiple => param * connectivity_threshold_radius(self.n.max(2), self.d),
                    ParamScale::Lambda => thermodynamic_radius(param, self.n, self.d),
                    ParamScale::LogN => {
                        return Err(RggError::InvalidModel("logn scale applies to knearest only".into()))
                    }
                },
            },
            ModelFamily::KNearest => RggKind::KNearest {
                k: match self.scale {
                    ParamScale::Absolute => param as usize,
                    ParamScale::LogN => (param * (self.n as f64).ln()) as usize,
                    _ => {
                        return Err(RggError::InvalidModel(
                            "knearest takes an absolute or logn parameter".into(),
                        ))
                    }
                },
            },
        })
    }
}

/// Estimates, per grid parameter, the probability that the graph is
/// connected and the mean largest-component fraction. Trial `t` draws its
/// points from stream `t` of the seed for every parameter, so the grid points
/// share their point sets.
pub fn sweep(config: &SweepConfig) -> Result<Vec<SweepRow>, RggError> {
    if config.trials == 0 {
        return Err(RggError::InvalidModel("trials must be at least 1".into()));
    }
    let kinds = config
        .params
        .iter()
        .map(|&p| config.kind_for(p))
        .collect::<Result<Vec<_>, _>>()?;
    for &kind in &kinds {
        RggModel {
            kind,
            d: config.d,
            n: config.n,
            poissonized: config.poissonized,
        }
        .validate()?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| RggError::ThreadPool(e.to_string()))?;
    let per_trial: Vec<Vec<(bool, f64)>> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| {
                kinds
                    .iter()
                    .map(|&kind| {
                        let model = RggModel {
                            kind,
                            d: config.d,
                            n: config.n,
                            poissonized: config.poissonized,
                        };
                        let g =
                            gen_rgg(&model, &mut RngStream::derive(config.seed, t as u64)).expect("model validated");
                        (
                            g.vertex_count() > 0 && g.component_count() == 1,
                            g.largest_component_fraction(),
                        )
                    })
                    .collect()
            })
            .collect()
    });
    let trials = config.trials as f64;
    Ok(config
        .params
        .iter()
        .enumerate()
        .map(|(i, &param)| {
            let connected = per_trial.iter().filter(|r| r[i].0).count() as f64;
            let p = connected / trials;
            SweepRow {
                model: config.family,
                d: config.d,
                n: config.n,
                param,
                p_connected: p,
                se: (p * (1.0 - p) / trials).sqrt(),
                mean_lcc_fraction: per_trial.iter().map(|r| r[i].1).sum::<f64>() / trials,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_radius_examples() {
        let r = connectivity_threshold_radius(1000, 2);
        let closed_form = (1000f64.ln() / (std::f64::consts::PI * 1000.0)).sqrt();
        assert!((r - closed_form).abs() < 1e-15);
        assert!((r - 0.046893).abs() < 5e-6, "{r}");
        for n in [3usize, 10, 1000, 123_456] {
            for d in 2..6 {
                let rc = connectivity_threshold_radius(n, d);
                let identity = unit_ball_volume(d) * rc.powi(d as i32) * n as f64 / (n as f64).ln();
                assert!((identity - 1.0).abs() < 1e-12);
                assert!(connectivity_threshold_radius(n + 1, d) < rc);
            }
        }
    }

    #[test]
    fn rdisc_large_radius_is_complete() {
        let model = RggModel {
            kind: RggKind::RDisc { r: 2.0 },
            d: 2,
            n: 30,
            poissonized: false,
        };
        let g = gen_rgg(&model, &mut RngStream::new(1)).unwrap();
        assert_eq!(g.edge_count(), 30 * 29);
    }

    #[test]
    fn online_nn_is_a_spanning_tree() {
        let model = RggModel {
            kind: RggKind::OnlineNn,
            d: 3,
            n: 500,
            poissonized: false,
        };
        let g = gen_rgg(&model, &mut RngStream::new(2)).unwrap();
        assert_eq!(g.undirected_edges().len(), 499);
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn invalid_models_rejected() {
        let bad = RggModel {
            kind: RggKind::KNearest { k: 0 },
            d: 2,
            n: 5,
            poissonized: false,
        };
        assert!(gen_rgg(&bad, &mut RngStream::new(0)).is_err());
        assert!("torus".parse::<ModelFamily>().is_err());
    }

    #[test]
    fn model_json() {
        let m: RggModel = serde_json::from_str(r#"{"kind": "rDisc", "r": 0.1, "d": 2, "n": 100}"#).unwrap();
        assert_eq!(m.kind, RggKind::RDisc { r: 0.1 });
        let m: RggModel = serde_json::from_str(r#"{"kind": "onlineNN", "d": 2, "n": 100}"#).unwrap();
        assert_eq!(m.kind, RggKind::OnlineNn);
    }
}
