//! `(λ - A) f = g` for the network transport generator.
//!
//! On each edge `c_j f_j' = (λ - q_j) f_j - g_j`. Integrating from the tail
//! `x = 1` toward the head with the decaying kernel gives
//! `f_j(0) = f_j(1) / μ_j + β_j`, `μ_j = exp((λ - q̄_j) / c_j)`. With
//! `v = f(0)` and the boundary condition `f(1) = 𝔹ᶜ v` this is the coupling
//! system `(diag(μ) - 𝔹ᶜ) v = w`, `w_j = μ_j β_j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{positive_lambda, Error, Result};
use crate::grid::{kernel, GridFunction};
use crate::operators::Generator;
use crate::parallel;
use crate::space::VectorState;

use super::{EdgeState, Network, NetworkError};

/// Coupling systems with a larger 2-norm condition number are refused.
pub const CONDITION_LIMIT: f64 = 1e12;

#[derive(Clone, Debug)]
pub struct ResolventSolve {
    pub state: EdgeState,
    /// 2-norm condition number of `diag(μ) - 𝔹ᶜ`.
    pub condition: f64,
    /// Set when `min μ_j <= max_k Σ_j 𝔹ᶜ_jk`, i.e. the Neumann-series
    /// argument for invertibility does not apply.
    pub warning: Option<String>,
    /// `max_j |f_j(1) - (𝔹ᶜ f(0))_j|`.
    pub boundary_residual: f64,
    /// `supnorm_ℓ¹(λ f - A_h f - g)` with the central-difference `A_h`.
    pub residual: f64,
}

/// Per-edge sweep data in the reversed coordinate `y = 1 - x`.
struct EdgeSweep {
    /// `exp(-∫ rate)` across the whole edge, i.e. `1 / μ_j`.
    decay: f64,
    /// Particular solution with `f_j(1) = 0`, in reversed order.
    particular: Vec<f64>,
    /// Per-cell rates in reversed order.
    rates: Vec<f64>,
}

fn sweep_edge(net: &Network, j: usize, lambda: f64, g: &GridFunction) -> EdgeSweep {
    let c = net.velocities()[j];
    let h = net.grid().spacing();
    let q = net.absorption()[j].values();
    let n = q.len();
    // reversed cell i spans reversed nodes i-1..i, i.e. original nodes n-i..n-i-1
    let mut rates = vec![0.0; n];
    for (i, r) in rates.iter_mut().enumerate().skip(1) {
        let (a, b) = (n - i, n - i - 1);
        *r = (lambda - 0.5 * (q[a] + q[b])) / c;
    }
    let data: Vec<f64> = g.values().iter().rev().map(|v| v / c).collect();
    let particular = kernel::causal_sweep(&data, h, |i| rates[i], 0.0);
    let decay = (-h * rates.iter().sum::<f64>()).exp();
    EdgeSweep { decay, particular, rates }
}

/// Solve `(λ - A) f = g` on the network.
pub fn network_resolvent(net: &Network, lambda: f64, g: &EdgeState) -> Result<ResolventSolve> {
    positive_lambda(lambda)?;
    g.ensure_matches(net)?;
    let m = net.n_edges();
    let n = net.grid().n_cells();
    let h = net.grid().spacing();
    let sweeps = parallel::map_range(m, |j| sweep_edge(net, j, lambda, g.edge(j)));

    let bc = net.weighted();
    let mu: Vec<f64> = sweeps.iter().map(|s| 1.0 / s.decay).collect();
    let coupling = DMatrix::from_fn(m, m, |j, k| if j == k { mu[j] } else { 0.0 } - bc[(j, k)]);
    let w = DVector::from_fn(m, |j, _| mu[j] * sweeps[j].particular[n]);

    let sv = coupling.clone().singular_values();
    let condition = sv.max() / sv.min();
    if !condition.is_finite() || condition > CONDITION_LIMIT {
        return Err(NetworkError::IllConditioned { condition, lambda }.into());
    }
    let col_norm = (0..m).map(|k| bc.column(k).sum()).fold(0.0, f64::max);
    let mu_min = mu.iter().copied().fold(f64::INFINITY, f64::min);
    let warning = (mu_min <= col_norm).then(|| {
        format!(
            "min μ = {mu_min:.6e} <= ‖𝔹ᶜ‖_col = {col_norm:.6e}; coupling solve not covered by the Neumann bound (condition {condition:.3e}); raise λ if results look unstable"
        )
    });
    let v = coupling.lu().solve(&w).ok_or_else(|| Error::Singular("network coupling matrix".into()))?;
    let tails = bc * &v;

    let grid = *net.grid();
    let edges: Vec<GridFunction> = parallel::map_range(m, |j| {
        let s = &sweeps[j];
        let data: Vec<f64> = g.edge(j).values().iter().rev().map(|x| x / net.velocities()[j]).collect();
        let mut vals = kernel::causal_sweep(&data, h, |i| s.rates[i], tails[j]);
        vals.reverse();
        GridFunction::from_values_unchecked(grid, vals)
    });
    let state = EdgeState::new(edges, g.time())?;

    let boundary_residual = (0..m)
        .map(|j| (state.edge(j).value(n) - tails[j]).abs().max((state.edge(j).value(0) - v[j]).abs()))
        .fold(0.0, f64::max);
    let generator = NetworkGenerator::new(net.clone());
    let mut r = state.clone();
    r.scale_mut(lambda);
    r.axpy(-1.0, &generator.apply(&state));
    r.axpy(-1.0, g);
    let residual = r.norm();
    Ok(ResolventSolve { state, condition, warning, boundary_residual, residual })
}

/// `(Af)_j = c_j f_j' + q_j f_j` with `dom(A) = { f : f(1) = 𝔹ᶜ f(0) }`.
#[derive(Clone, Debug)]
pub struct NetworkGenerator {
    net: Network,
}

impl NetworkGenerator {
    pub fn new(net: Network) -> Self {
        Self { net }
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    /// `max_j |f_j(1) - Σ_k 𝔹ᶜ_jk f_k(0)|`.
    pub fn boundary_defect(&self, f: &EdgeState) -> f64 {
        let heads = DVector::from_vec(f.head_values());
        let want = self.net.weighted() * heads;
        f.tail_values().iter().zip(want.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl Generator for NetworkGenerator {
    type State = EdgeState;

    fn label(&self) -> &str {
        "network_transport"
    }

    fn apply(&self, f: &EdgeState) -> EdgeState {
        let edges = f
            .edges()
            .iter()
            .zip(self.net.velocities())
            .zip(self.net.absorption())
            .map(|((u, &c), q)| {
                let du = u.differentiate();
                let vals =
                    du.values().iter().zip(u.values()).zip(q.values()).map(|((d, v), qv)| c * d + qv * v).collect();
                GridFunction::from_values_unchecked(*u.grid(), vals)
            })
            .collect();
        EdgeState::new(edges, f.time()).expect("apply preserves the state layout")
    }

    fn resolvent(&self, lambda: f64, g: &EdgeState) -> Result<EdgeState> {
        Ok(network_resolvent(&self.net, lambda, g)?.state)
    }

    fn domain_check(&self, f: &EdgeState) -> bool {
        self.boundary_defect(f) <= 1e-9 * (1.0 + f.norm())
    }

    /// `10 h² (1 + λ / c_min)² c_max`: the central stencil error scaled by velocity.
    fn consistency_tolerance(&self, lambda: f64) -> f64 {
        let h = self.net.grid().spacing();
        10.0 * h * h * (1.0 + lambda / self.net.c_min()).powi(2) * self.net.c_max()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{random_network, supnorm_l1, Edge};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn constant_data_on_two_cycle() {
        let net = Network::two_cycle([1.0, 1.0], 400).unwrap();
        for lambda in [1.0, 5.0, 0.3] {
            let sol = network_resolvent(&net, lambda, &EdgeState::constant(&net, 1.0)).unwrap();
            for e in sol.state.edges() {
                for v in e.values() {
                    assert_abs_diff_eq!(*v, 1.0 / lambda, epsilon = 1e-12);
                }
            }
            assert!(sol.boundary_residual <= 1e-12);
        }
    }

    #[test]
    fn unit_lambda_two_cycle_returns_ones_scaled() {
        // λ = 1, g ≡ 1: f ≡ 1
        let net = Network::two_cycle([1.0, 1.0], 100).unwrap();
        let sol = network_resolvent(&net, 1.0, &EdgeState::constant(&net, 1.0)).unwrap();
        assert!(sol.state.distance(&EdgeState::constant(&net, 1.0)) <= 1e-12);
        assert!(sol.warning.is_none());
    }

    #[test]
    fn zero_in_zero_out() {
        let net = Network::cycle(vec![1.0, 2.0, 3.0], 50).unwrap();
        let sol = network_resolvent(&net, 2.0, &EdgeState::zeros(&net)).unwrap();
        assert_eq!(supnorm_l1(&sol.state), 0.0);
        assert!(network_resolvent(&net, 0.0, &EdgeState::zeros(&net)).is_err());
    }

    #[test]
    fn solution_is_in_domain_and_solves_the_equation() {
        let net = random_network(3, 3, 5, (0.5, 4.0), 800).unwrap();
        let gen = NetworkGenerator::new(net.clone());
        let g = EdgeState::new(
            (0..5).map(|j| GridFunction::from_fn(*net.grid(), |x| (PI * (j as f64 + 1.0) * x).sin() + 0.3)).collect(),
            0.0,
        )
        .unwrap();
        for lambda in [0.5, 1.0, 5.0] {
            let sol = network_resolvent(&net, lambda, &g).unwrap();
            assert!(sol.boundary_residual <= 1e-9);
            assert!(gen.domain_check(&sol.state));
            // interior derivative error is O(h²); one-sided end stencils dominate
            assert!(sol.residual <= 1e-3, "λ={lambda}: residual {}", sol.residual);
        }
    }

    #[test]
    fn absorption_enters_through_mu() {
        let net = Network::two_cycle([1.0, 1.0], 200).unwrap();
        let q = vec![GridFunction::constant(*net.grid(), -1.0); 2];
        let net = net.with_absorption(q).unwrap();
        // A𝟏 = -𝟏, so (λ - A)𝟏 = (λ + 1)𝟏
        let sol = network_resolvent(&net, 1.0, &EdgeState::constant(&net, 2.0)).unwrap();
        assert!(sol.state.distance(&EdgeState::constant(&net, 1.0)) <= 1e-12);
    }

    #[test]
    fn branching_network_contraction() {
        let edges = vec![
            Edge { tail: 0, head: 1 },
            Edge { tail: 1, head: 0 },
            Edge { tail: 1, head: 2 },
            Edge { tail: 2, head: 0 },
        ];
        let w = [(1, 0, 0.25), (2, 0, 0.75), (0, 1, 1.0), (0, 3, 1.0), (3, 2, 1.0)];
        let net = Network::new(3, edges, Some(&w), vec![2.0; 4], None, 300).unwrap();
        let g = EdgeState::new(
            (0..4).map(|j| GridFunction::from_fn(*net.grid(), |x| ((j + 2) as f64 * x).cos())).collect(),
            0.0,
        )
        .unwrap();
        for lambda in [1.0, 5.0] {
            let f = network_resolvent(&net, lambda, &g).unwrap().state;
            assert!(lambda * supnorm_l1(&f) <= supnorm_l1(&g) * (1.0 + 1e-6));
        }
    }
}
