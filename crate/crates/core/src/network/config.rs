//! JSON network description.
//!
//! ```json
//! {
//!   "vertices": 2,
//!   "edges": [{"tail": 0, "head": 1}, {"tail": 1, "head": 0}],
//!   "weights": [{"into_edge": 1, "from_edge": 0, "w": 1.0}, {"into_edge": 0, "from_edge": 1, "w": 1.0}],
//!   "velocities": [1.0, 1.0],
//!   "absorption": [0.0, [0.0, -0.1, -0.2]],
//!   "grid": {"n_cells": 400},
//!   "initial": ["sin2", 0.0]
//! }
//! ```
//!
//! `weights`, `absorption` and `initial` are optional. Sampled absorption
//! and initial profiles are equispaced on `[0, 1]` and resampled by linear
//! interpolation onto the network grid.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{Grid, GridFunction};

use super::{Edge, EdgeState, Network, NetworkError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub tail: usize,
    pub head: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    pub into_edge: usize,
    pub from_edge: usize,
    pub w: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_cells: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { n_cells: 400 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AbsorptionSpec {
    Constant(f64),
    Sampled(Vec<f64>),
}

/// Initial profile: a constant, equispaced samples, or a named shape
/// (`zero`, `one`, `sin2` = sin²(πx), `sin` = sin(πx), `x`, `1-x`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Constant(f64),
    Sampled(Vec<f64>),
    Named(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub vertices: usize,
    pub edges: Vec<EdgeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<WeightSpec>>,
    pub velocities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub absorption: Option<Vec<AbsorptionSpec>>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial: Option<Vec<InitialSpec>>,
}

/// Linear resampling of equispaced samples on `[0, 1]`.
fn resample(grid: Grid, samples: &[f64]) -> std::result::Result<GridFunction, String> {
    match samples.len() {
        0 => Err("no samples".into()),
        1 => Ok(GridFunction::constant(grid, samples[0])),
        n => {
            let last = (n - 1) as f64;
            Ok(GridFunction::from_fn(grid, |x| {
                let pos = (x * last).clamp(0.0, last);
                let i = (pos.floor() as usize).min(n - 2);
                let theta = pos - i as f64;
                (1.0 - theta) * samples[i] + theta * samples[i + 1]
            }))
        }
    }
}

fn named_profile(name: &str) -> Option<fn(f64) -> f64> {
    Some(match name {
        "zero" => |_| 0.0,
        "one" => |_| 1.0,
        "sin2" => |x| (PI * x).sin().powi(2),
        "sin" => |x| (PI * x).sin(),
        "x" => |x| x,
        "1-x" => |x| 1.0 - x,
        _ => return None,
    })
}

impl NetworkConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        crate::output::to_json(self)
    }

    pub fn build(&self) -> Result<Network> {
        let edges: Vec<Edge> = self.edges.iter().map(|e| Edge { tail: e.tail, head: e.head }).collect();
        let weights: Option<Vec<(usize, usize, f64)>> =
            self.weights.as_ref().map(|w| w.iter().map(|w| (w.into_edge, w.from_edge, w.w)).collect());
        let grid = Grid::new(0.0, 1.0, self.grid.n_cells)?;
        let absorption = match &self.absorption {
            None => None,
            Some(specs) => {
                if specs.len() != edges.len() {
                    return Err(NetworkError::Count {
                        what: "absorption profiles",
                        expected: edges.len(),
                        actual: specs.len(),
                    }
                    .into());
                }
                let mut q = Vec::with_capacity(specs.len());
                for (edge, s) in specs.iter().enumerate() {
                    let profile = match s {
                        AbsorptionSpec::Constant(v) => resample(grid, &[*v]),
                        AbsorptionSpec::Sampled(v) => resample(grid, v),
                    }
                    .map_err(|reason| NetworkError::Absorption { edge, reason })?;
                    if profile.values().iter().any(|v| !v.is_finite()) {
                        return Err(NetworkError::Absorption { edge, reason: "non-finite value".into() }.into());
                    }
                    q.push(profile);
                }
                Some(q)
            }
        };
        Network::new(self.vertices, edges, weights.as_deref(), self.velocities.clone(), absorption, self.grid.n_cells)
    }

    /// Initial state on `net`; zero when no `initial` entry is given.
    pub fn initial_state(&self, net: &Network) -> Result<EdgeState> {
        let Some(specs) = &self.initial else {
            return Ok(EdgeState::zeros(net));
        };
        if specs.len() != net.n_edges() {
            return Err(
                NetworkError::Count { what: "initial profiles", expected: net.n_edges(), actual: specs.len() }.into()
            );
        }
        let grid = *net.grid();
        let mut edges = Vec::with_capacity(specs.len());
        for (edge, s) in specs.iter().enumerate() {
            let f = match s {
                InitialSpec::Constant(v) if v.is_finite() => Ok(GridFunction::constant(grid, *v)),
                InitialSpec::Constant(_) => Err("non-finite value".to_string()),
                InitialSpec::Sampled(v) if v.iter().all(|x| x.is_finite()) => resample(grid, v),
                InitialSpec::Sampled(_) => Err("non-finite sample".to_string()),
                InitialSpec::Named(name) => named_profile(name)
                    .map(|f| GridFunction::from_fn(grid, f))
                    .ok_or_else(|| format!("unknown profile '{name}' (zero, one, sin2, sin, x, 1-x)")),
            }
            .map_err(|reason| NetworkError::Initial { edge, reason })?;
            edges.push(f);
        }
        EdgeState::new(edges, 0.0)
    }

    /// The 2-cycle with `sin²(πx)` on edge 0 and zero on edge 1.
    pub fn two_cycle_example(velocities: [f64; 2], n_cells: usize) -> Self {
        Self {
            vertices: 2,
            edges: vec![EdgeSpec { tail: 0, head: 1 }, EdgeSpec { tail: 1, head: 0 }],
            weights: Some(vec![
                WeightSpec { into_edge: 1, from_edge: 0, w: 1.0 },
                WeightSpec { into_edge: 0, from_edge: 1, w: 1.0 },
            ]),
            velocities: velocities.to_vec(),
            absorption: None,
            grid: GridSpec { n_cells },
            initial: Some(vec![InitialSpec::Named("sin2".into()), InitialSpec::Constant(0.0)]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::network::total_mass;
    use approx::assert_abs_diff_eq;

    #[test]
    fn json_round_trip_and_build() {
        let cfg = NetworkConfig::two_cycle_example([1.0, 1.0], 1000);
        let back = NetworkConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!(back, cfg);
        let net = back.build().unwrap();
        let s = back.initial_state(&net).unwrap();
        assert_abs_diff_eq!(total_mass(&s), 0.5, epsilon = 1e-6);
    }

    #[test]
    fn mixed_absorption_and_defaults() {
        let text = r#"{
            "vertices": 2,
            "edges": [{"tail": 0, "head": 1}, {"tail": 1, "head": 0}],
            "velocities": [1.0, 2.0],
            "absorption": [-0.5, [0.0, -1.0]],
            "grid": {"n_cells": 10},
            "initial": [[0.0, 1.0], "x"]
        }"#;
        let cfg = NetworkConfig::from_json(text).unwrap();
        let net = cfg.build().unwrap();
        assert_eq!(net.absorption()[0].value(3), -0.5);
        assert_abs_diff_eq!(net.absorption()[1].value(5), -0.5, epsilon = 1e-15);
        let s = cfg.initial_state(&net).unwrap();
        assert_eq!(s.edge(0), s.edge(1));
    }

    #[test]
    fn config_errors_name_the_problem() {
        let sink = r#"{"vertices": 2, "edges": [{"tail": 0, "head": 1}], "velocities": [1.0]}"#;
        let err = NetworkConfig::from_json(sink).unwrap().build().unwrap_err();
        assert!(err.to_string().contains("column sum ≠ 1"), "{err}");

        let bad = r#"{"vertices": 2, "edges": [{"tail": 0, "head": 1}, {"tail": 1, "head": 0}], "velocities": [1.0, 1.0], "initial": ["wave", 0]}"#;
        let cfg = NetworkConfig::from_json(bad).unwrap();
        let net = cfg.build().unwrap();
        assert!(matches!(cfg.initial_state(&net), Err(Error::Network(NetworkError::Initial { edge: 0, .. }))));

        assert!(matches!(NetworkConfig::from_json("{"), Err(Error::Json(_))));
    }
}
