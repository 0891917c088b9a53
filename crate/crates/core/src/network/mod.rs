//! Transport flows on finite directed metric graphs.
//!
//! Every edge is parametrized on `[0, 1]` with its tail at `x = 1` and its
//! head at `x = 0`; mass travels toward the head with speed `c_j` and obeys
//!
//! ```text
//! ∂_t u_j = c_j ∂_x u_j + q_j u_j,      u_j(1, t) = Σ_k 𝔹ᶜ_jk u_k(0, t),
//! ```
//!
//! where `𝔹` is the column-stochastic weighted adjacency matrix of the line
//! graph and `𝔹ᶜ = C⁻¹ 𝔹 C`. The absorption term is taken with the sign as
//! written (`+q`); a damping rate is a negative `q`.

mod config;
mod flow;
mod resolvent;
mod state;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::grid::{Grid, GridFunction};

pub use config::{AbsorptionSpec, EdgeSpec, GridSpec, InitialSpec, NetworkConfig, WeightSpec};
pub use flow::{cfl_number, step_characteristics, step_upwind, NetworkSemigroup};
pub use resolvent::{network_resolvent, NetworkGenerator, ResolventSolve, CONDITION_LIMIT};
pub use state::{supnorm_l1, total_mass, EdgeState, SupNormL1};

/// Column sums and entries of `𝔹` are compared against this.
pub const STOCHASTIC_TOL: f64 = 1e-12;

/// Validation and numerical failures, each naming the violated invariant.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetworkError {
    #[error("network has no edges")]
    NoEdges,

    #[error("edge {edge}: vertex {vertex} out of range (network has {n_vertices} vertices)")]
    VertexOutOfRange { edge: usize, vertex: usize, n_vertices: usize },

    #[error("edge {edge} is a loop at vertex {vertex}; the graph must be simple")]
    SelfLoop { edge: usize, vertex: usize },

    #[error("edges {first} and {second} are duplicate directed edges; the graph must be simple")]
    DuplicateEdge { first: usize, second: usize },

    #[error("weight entry refers to edge {edge}, but only {n_edges} edges exist")]
    EdgeOutOfRange { edge: usize, n_edges: usize },

    #[error("weight w[{into_edge}][{from_edge}] = {w} outside [0, 1]")]
    WeightOutOfRange { into_edge: usize, from_edge: usize, w: f64 },

    #[error("weight w[{into_edge}][{from_edge}]: edge {from_edge} does not flow into edge {into_edge}")]
    NotAdjacent { into_edge: usize, from_edge: usize },

    #[error("weight w[{into_edge}][{from_edge}] given twice")]
    DuplicateWeight { into_edge: usize, from_edge: usize },

    #[error("column sum ≠ 1: column {column} (edge {column} into vertex {vertex}) sums to {sum}")]
    ColumnSum { column: usize, vertex: usize, sum: f64 },

    #[error("expected {expected} {what}, got {actual}")]
    Count { what: &'static str, expected: usize, actual: usize },

    #[error("velocity c[{edge}] = {value} must be finite and positive")]
    Velocity { edge: usize, value: f64 },

    #[error("absorption on edge {edge}: {reason}")]
    Absorption { edge: usize, reason: String },

    #[error("initial data on edge {edge}: {reason}")]
    Initial { edge: usize, reason: String },

    #[error("state does not match the network: {0}")]
    StateMismatch(String),

    #[error("CFL violated: dt = {dt} gives c_max dt / h = {cfl} > 1")]
    Cfl { dt: f64, cfl: f64 },

    #[error("characteristic tracing exceeded {cap} vertex crossings")]
    DepthExceeded { cap: usize },

    #[error("coupling matrix condition number {condition:.3e} at λ = {lambda}; raise λ")]
    IllConditioned { condition: f64, lambda: f64 },
}

/// A directed edge `tail → head`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    pub tail: usize,
    pub head: usize,
}

/// A validated finite network with velocities, absorption and a shared grid.
#[derive(Clone, Debug)]
pub struct Network {
    n_vertices: usize,
    edges: Vec<Edge>,
    b: DMatrix<f64>,
    bc: DMatrix<f64>,
    velocities: Vec<f64>,
    absorption: Vec<GridFunction>,
    grid: Grid,
}

impl Network {
    /// Build and validate. `weights` lists `(into_edge, from_edge, w)`; when
    /// `None`, flow arriving at a vertex is split evenly among its outgoing
    /// edges. `absorption` defaults to zero.
    pub fn new(
        n_vertices: usize,
        edges: Vec<Edge>,
        weights: Option<&[(usize, usize, f64)]>,
        velocities: Vec<f64>,
        absorption: Option<Vec<GridFunction>>,
        n_cells: usize,
    ) -> Result<Self, crate::error::Error> {
        validate_topology(n_vertices, &edges)?;
        let m = edges.len();
        if velocities.len() != m {
            return Err(NetworkError::Count { what: "velocities", expected: m, actual: velocities.len() }.into());
        }
        if let Some((edge, &value)) = velocities.iter().enumerate().find(|(_, c)| !(c.is_finite() && **c > 0.0)) {
            return Err(NetworkError::Velocity { edge, value }.into());
        }
        let grid = Grid::new(0.0, 1.0, n_cells)?;
        let absorption = match absorption {
            None => vec![GridFunction::zeros(grid); m],
            Some(q) => {
                if q.len() != m {
                    return Err(
                        NetworkError::Count { what: "absorption profiles", expected: m, actual: q.len() }.into()
                    );
                }
                if let Some(edge) = q.iter().position(|qj| qj.grid() != &grid) {
                    return Err(
                        NetworkError::Absorption { edge, reason: "not sampled on the network grid".into() }.into()
                    );
                }
                q
            }
        };
        let b = match weights {
            Some(w) => adjacency_from_weights(&edges, w)?,
            None => uniform_adjacency(&edges),
        };
        check_columns(&edges, &b)?;
        let bc = weighted_bc_matrix(&b, &velocities);
        Ok(Self { n_vertices, edges, b, bc, velocities, absorption, grid })
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn absorption(&self) -> &[GridFunction] {
        &self.absorption
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn c_min(&self) -> f64 {
        self.velocities.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn c_max(&self) -> f64 {
        self.velocities.iter().copied().fold(0.0, f64::max)
    }

    /// `𝔹`, validated column-stochastic.
    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.b
    }

    /// `𝔹ᶜ = C⁻¹ 𝔹 C`.
    pub fn weighted(&self) -> &DMatrix<f64> {
        &self.bc
    }

    /// Largest number of nonzero entries in a row of `𝔹ᶜ` (tracing fan-out).
    pub(crate) fn max_fan_in(&self) -> usize {
        (0..self.n_edges()).map(|j| self.bc.row(j).iter().filter(|w| **w != 0.0).count()).max().unwrap_or(0)
    }

    /// `e₀: v₀ → v₁`, `e₁: v₁ → v₀` with unit weights.
    pub fn two_cycle(velocities: [f64; 2], n_cells: usize) -> Result<Self, crate::error::Error> {
        Self::cycle(velocities.to_vec(), n_cells)
    }

    /// Directed cycle `v₀ → v₁ → … → v₀` with unit weights.
    pub fn cycle(velocities: Vec<f64>, n_cells: usize) -> Result<Self, crate::error::Error> {
        let n = velocities.len();
        let edges = (0..n).map(|i| Edge { tail: i, head: (i + 1) % n }).collect();
        Self::new(n, edges, None, velocities, None, n_cells)
    }

    /// Returns a copy with new absorption profiles.
    pub fn with_absorption(&self, q: Vec<GridFunction>) -> Result<Self, crate::error::Error> {
        let w = self.weight_list();
        Self::new(self.n_vertices, self.edges.clone(), Some(&w), self.velocities.clone(), Some(q), self.grid.n_cells())
    }

    /// Nonzero `𝔹` entries as `(into_edge, from_edge, w)`.
    pub fn weight_list(&self) -> Vec<(usize, usize, f64)> {
        let m = self.n_edges();
        let mut out = Vec::new();
        for j in 0..m {
            for i in 0..m {
                if self.b[(i, j)] != 0.0 {
                    out.push((i, j, self.b[(i, j)]));
                }
            }
        }
        out
    }
}

fn validate_topology(n_vertices: usize, edges: &[Edge]) -> Result<(), NetworkError> {
    if edges.is_empty() {
        return Err(NetworkError::NoEdges);
    }
    for (k, e) in edges.iter().enumerate() {
        for vertex in [e.tail, e.head] {
            if vertex >= n_vertices {
                return Err(NetworkError::VertexOutOfRange { edge: k, vertex, n_vertices });
            }
        }
        if e.tail == e.head {
            return Err(NetworkError::SelfLoop { edge: k, vertex: e.tail });
        }
        if let Some(first) = edges[..k].iter().position(|f| f == e) {
            return Err(NetworkError::DuplicateEdge { first, second: k });
        }
    }
    Ok(())
}

fn uniform_adjacency(edges: &[Edge]) -> DMatrix<f64> {
    let m = edges.len();
    let mut b = DMatrix::zeros(m, m);
    for j in 0..m {
        let outgoing: Vec<usize> = (0..m).filter(|&i| edges[i].tail == edges[j].head).collect();
        for &i in &outgoing {
            b[(i, j)] = 1.0 / outgoing.len() as f64;
        }
    }
    b
}

fn adjacency_from_weights(edges: &[Edge], weights: &[(usize, usize, f64)]) -> Result<DMatrix<f64>, NetworkError> {
    let m = edges.len();
    let mut b = DMatrix::zeros(m, m);
    let mut seen = vec![false; m * m];
    for &(into_edge, from_edge, w) in weights {
        for edge in [into_edge, from_edge] {
            if edge >= m {
                return Err(NetworkError::EdgeOutOfRange { edge, n_edges: m });
            }
        }
        if !(0.0..=1.0).contains(&w) {
            return Err(NetworkError::WeightOutOfRange { into_edge, from_edge, w });
        }
        if edges[from_edge].head != edges[into_edge].tail {
            return Err(NetworkError::NotAdjacent { into_edge, from_edge });
        }
        let slot = into_edge * m + from_edge;
        if seen[slot] {
            return Err(NetworkError::DuplicateWeight { into_edge, from_edge });
        }
        seen[slot] = true;
        b[(into_edge, from_edge)] = w;
    }
    Ok(b)
}

fn check_columns(edges: &[Edge], b: &DMatrix<f64>) -> Result<(), NetworkError> {
    for (column, col) in b.column_iter().enumerate() {
        let sum: f64 = col.iter().sum();
        if (sum - 1.0).abs() > STOCHASTIC_TOL {
            return Err(NetworkError::ColumnSum { column, vertex: edges[column].head, sum });
        }
    }
    Ok(())
}

fn weighted_bc_matrix(b: &DMatrix<f64>, c: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(b.nrows(), b.ncols(), |j, k| b[(j, k)] * c[k] / c[j])
}

/// `𝔹_ij = w_ij` if edge `j` ends where edge `i` starts, else 0.
pub fn build_adjacency(net: &Network) -> DMatrix<f64> {
    net.b.clone()
}

/// `𝔹ᶜ_jk = c_j⁻¹ 𝔹_jk c_k`.
pub fn weighted_bc(net: &Network, b: &DMatrix<f64>) -> DMatrix<f64> {
    weighted_bc_matrix(b, &net.velocities)
}

/// `‖transpose(𝔹ᶜ) C𝟏 - C𝟏‖_∞`; zero in exact arithmetic.
pub fn fixed_vector_residual(net: &Network) -> f64 {
    let c = nalgebra::DVector::from_column_slice(&net.velocities);
    (net.bc.transpose() * &c - &c).amax()
}

/// Ratio `‖𝔹^{k+1} v‖₁ / ‖𝔹^k v‖₁` after `iters` steps from a positive `v`.
pub fn power_iteration_ratio(net: &Network, iters: usize) -> f64 {
    let m = net.n_edges();
    let mut v = nalgebra::DVector::from_element(m, 1.0 / m as f64);
    let mut ratio = 1.0;
    for _ in 0..iters {
        let next = &net.b * &v;
        ratio = next.lp_norm(1) / v.lp_norm(1);
        v = next;
    }
    ratio
}

/// A seeded random strongly connected network: a Hamiltonian cycle through
/// all vertices plus random chords, random column-stochastic weights and
/// velocities uniform in `c_range`.
pub fn random_network(
    seed: u64,
    n_vertices: usize,
    n_edges: usize,
    c_range: (f64, f64),
    n_cells: usize,
) -> Result<Network, crate::error::Error> {
    if n_vertices < 2 || n_edges < n_vertices || n_edges > n_vertices * (n_vertices - 1) {
        return Err(crate::error::Error::InvalidParameter(format!(
            "cannot build a simple strongly connected graph with {n_vertices} vertices and {n_edges} edges"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<Edge> = (0..n_vertices).map(|i| Edge { tail: i, head: (i + 1) % n_vertices }).collect();
    while edges.len() < n_edges {
        let e = Edge { tail: rng.gen_range(0..n_vertices), head: rng.gen_range(0..n_vertices) };
        if e.tail != e.head && !edges.contains(&e) {
            edges.push(e);
        }
    }
    let mut weights = Vec::new();
    for j in 0..n_edges {
        let outgoing: Vec<usize> = (0..n_edges).filter(|&i| edges[i].tail == edges[j].head).collect();
        let raw: Vec<f64> = outgoing.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let mut acc = 0.0;
        for (k, (&i, r)) in outgoing.iter().zip(&raw).enumerate() {
            // last weight absorbs rounding so the column sums to 1 exactly-ish
            let w = if k + 1 == outgoing.len() { 1.0 - acc } else { r / total };
            acc += w;
            weights.push((i, j, w.clamp(0.0, 1.0)));
        }
    }
    let velocities = (0..n_edges).map(|_| rng.gen_range(c_range.0..=c_range.1)).collect();
    Network::new(n_vertices, edges, Some(&weights), velocities, None, n_cells)
}
