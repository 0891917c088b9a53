//! Time evolution: exact characteristics and the first-order upwind scheme.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::parallel;
use crate::semigroups::Semigroup;

use super::{EdgeState, Network, NetworkError};

/// A trace that lands this close past `x = 1` is treated as landing on it.
const CROSSING_SLACK: f64 = 1e-12;

/// Fan-out budget per [`NetworkSemigroup`] sub-step: at most this many
/// characteristic paths per query point.
const PATH_BUDGET: f64 = 256.0;

/// Antiderivatives `Q_j(x) = ∫_0^x q_j` of the piecewise-linear absorption.
struct Absorption {
    cumulative: Vec<Vec<f64>>,
    profiles: Vec<GridFunction>,
    any: bool,
}

impl Absorption {
    fn new(net: &Network) -> Self {
        let h = net.grid().spacing();
        let profiles = net.absorption().to_vec();
        let any = profiles.iter().any(|q| q.values().iter().any(|v| *v != 0.0));
        let cumulative = profiles
            .iter()
            .map(|q| {
                let mut acc = 0.0;
                let mut out = Vec::with_capacity(q.values().len());
                out.push(0.0);
                for w in q.values().windows(2) {
                    acc += 0.5 * h * (w[0] + w[1]);
                    out.push(acc);
                }
                out
            })
            .collect();
        Self { cumulative, profiles, any }
    }

    /// `Q_j(x)`, exact for the linear interpolant.
    fn at(&self, j: usize, x: f64) -> f64 {
        let q = &self.profiles[j];
        let (i, theta) = q.grid().locate(x);
        if theta == 0.0 {
            return self.cumulative[j][i];
        }
        let h = q.grid().spacing();
        let (q0, q1) = (q.value(i), q.value(i + 1));
        self.cumulative[j][i] + h * (q0 * theta + 0.5 * (q1 - q0) * theta * theta)
    }

    /// `exp((Q_j(b) - Q_j(a)) / c_j)`.
    fn factor(&self, j: usize, a: f64, b: f64, c: f64) -> f64 {
        if self.any {
            ((self.at(j, b) - self.at(j, a)) / c).exp()
        } else {
            1.0
        }
    }
}

struct Tracer<'a> {
    net: &'a Network,
    state: &'a EdgeState,
    absorption: Absorption,
    cap: usize,
}

impl Tracer<'_> {
    /// `u_j(x, s)`, with time measured from the input state.
    fn value(&self, j: usize, x: f64, s: f64, depth: usize) -> Result<f64> {
        let c = self.net.velocities()[j];
        let reach = x + c * s;
        if reach <= 1.0 + CROSSING_SLACK {
            let pos = reach.min(1.0);
            let v = self.state.edge(j).interpolate(pos).expect("traced point lies on the edge");
            return Ok(v * self.absorption.factor(j, x, pos, c));
        }
        if depth >= self.cap {
            return Err(NetworkError::DepthExceeded { cap: self.cap }.into());
        }
        let tau = (s - (1.0 - x) / c).max(0.0);
        let bc = self.net.weighted();
        let mut inflow = 0.0;
        for k in 0..self.net.n_edges() {
            let w = bc[(j, k)];
            if w != 0.0 {
                inflow += w * self.value(k, 0.0, tau, depth + 1)?;
            }
        }
        Ok(inflow * self.absorption.factor(j, x, 1.0, c))
    }
}

/// Exact method-of-characteristics evolution over time `t`: each node value
/// is traced back along `x + c_j s`, pulling `Σ_k 𝔹ᶜ_jk u_k(0, ·)` at every
/// vertex crossing. Node traces run in parallel.
pub fn step_characteristics(net: &Network, state: &EdgeState, t: f64) -> Result<EdgeState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::NegativeTime(t));
    }
    state.ensure_matches(net)?;
    if t == 0.0 {
        return Ok(state.clone());
    }
    let tracer = Tracer { net, state, absorption: Absorption::new(net), cap: (t * net.c_max()).ceil() as usize + 2 };
    let grid = *net.grid();
    let nn = grid.num_nodes();
    let values = parallel::map_range(net.n_edges() * nn, |idx| tracer.value(idx / nn, grid.node(idx % nn), t, 0));
    let mut edges = Vec::with_capacity(net.n_edges());
    let mut it = values.into_iter();
    for _ in 0..net.n_edges() {
        let v = it.by_ref().take(nn).collect::<Result<Vec<f64>>>()?;
        edges.push(GridFunction::from_values_unchecked(grid, v));
    }
    EdgeState::new(edges, state.time() + t)
}

/// `c_max dt / h`.
pub fn cfl_number(net: &Network, dt: f64) -> f64 {
    net.c_max() * dt / net.grid().spacing()
}

/// One explicit upwind step of size `dt`:
/// `u_i += (c dt / h)(u_{i+1} - u_i) + dt q_i u_i` for interior and head
/// nodes, then the tail node of every edge is set from the boundary
/// condition using the updated head values.
pub fn step_upwind(net: &Network, state: &EdgeState, dt: f64) -> Result<EdgeState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::NonPositive { name: "dt", value: dt });
    }
    state.ensure_matches(net)?;
    let cfl = cfl_number(net, dt);
    if cfl > 1.0 + 1e-12 {
        return Err(NetworkError::Cfl { dt, cfl }.into());
    }
    let h = net.grid().spacing();
    let n = net.grid().n_cells();
    let mut next: Vec<Vec<f64>> = parallel::map_range(net.n_edges(), |j| {
        let u = state.edge(j).values();
        let q = net.absorption()[j].values();
        let nu = net.velocities()[j] * dt / h;
        let mut v = u.to_vec();
        for i in 0..n {
            v[i] = u[i] + nu * (u[i + 1] - u[i]) + dt * q[i] * u[i];
        }
        v
    });
    let heads: Vec<f64> = next.iter().map(|v| v[0]).collect();
    let bc = net.weighted();
    for (j, v) in next.iter_mut().enumerate() {
        v[n] = (0..heads.len()).map(|k| bc[(j, k)] * heads[k]).sum();
    }
    let grid = *net.grid();
    let edges = next.into_iter().map(|v| GridFunction::from_values_unchecked(grid, v)).collect();
    EdgeState::new(edges, state.time() + dt)
}

/// The transport semigroup, evaluated by exact characteristics.
///
/// Long times are split into sub-steps so that the number of traced paths
/// per node stays bounded on branching networks; on networks where every
/// edge has a single feeder the whole time is traced at once.
#[derive(Clone, Debug)]
pub struct NetworkSemigroup {
    net: Network,
}

impl NetworkSemigroup {
    pub fn new(net: Network) -> Self {
        Self { net }
    }

    pub fn network(&self) -> &Network {
        &self.net
    }

    fn max_substep(&self) -> f64 {
        let fan = self.net.max_fan_in();
        if fan <= 1 {
            return f64::INFINITY;
        }
        let crossings = (PATH_BUDGET.ln() / (fan as f64).ln()).floor().max(2.0) - 1.0;
        crossings / self.net.c_max()
    }
}

impl Semigroup for NetworkSemigroup {
    type State = EdgeState;

    fn label(&self) -> &str {
        "network_transport"
    }

    fn apply(&self, t: f64, f: &EdgeState) -> Result<EdgeState> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::NegativeTime(t));
        }
        let chunk = self.max_substep();
        if t <= chunk {
            return step_characteristics(&self.net, f, t);
        }
        let pieces = (t / chunk).ceil() as usize;
        let dt = t / pieces as f64;
        let mut u = f.clone();
        for _ in 0..pieces {
            u = step_characteristics(&self.net, &u, dt)?;
        }
        Ok(u)
    }

    /// Only uniform-velocity networks without gain are contractive in the
    /// sup-ℓ¹ norm; `𝔹ᶜ` can have column sums above 1 otherwise.
    fn is_contraction(&self) -> bool {
        let c = self.net.velocities();
        let uniform = c.iter().all(|v| *v == c[0]);
        let no_gain = self.net.absorption().iter().all(|q| q.values().iter().all(|v| *v <= 0.0));
        uniform && no_gain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{supnorm_l1, total_mass, Edge};
    use crate::space::VectorState;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn sin2_cycle(n_cells: usize) -> (Network, EdgeState) {
        let net = Network::two_cycle([1.0, 1.0], n_cells).unwrap();
        let s = EdgeState::from_fns(&net, &[&|x| (PI * x).sin().powi(2), &|_| 0.0]).unwrap();
        (net, s)
    }

    #[test]
    fn two_cycle_hops_and_returns() {
        let (net, f) = sin2_cycle(400);
        assert_eq!(step_characteristics(&net, &f, 0.0).unwrap(), f);
        let one = step_characteristics(&net, &f, 1.0).unwrap();
        assert!(one.edge(0).sup_norm() <= 1e-12);
        assert!(one.edge(1).distance(f.edge(0)) <= 1e-12);
        let two = step_characteristics(&net, &f, 2.0).unwrap();
        assert!(two.distance(&f) <= 1e-9);
        assert_eq!(two.time(), 2.0);
    }

    #[test]
    fn characteristics_conserve_mass() {
        let (net, f) = sin2_cycle(400);
        for t in [0.1, 0.37, 1.0, 2.5, 7.3] {
            assert_abs_diff_eq!(
                total_mass(&step_characteristics(&net, &f, t).unwrap()),
                total_mass(&f),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn characteristics_semigroup_law() {
        let net = Network::cycle(vec![1.0, 1.5, 0.7], 300).unwrap();
        let f = EdgeState::from_fns(&net, &[&|x| (PI * x).sin().powi(2), &|x| x * (1.0 - x), &|_| 0.0]).unwrap();
        let lip = 4.0;
        let (s, t) = (0.43, 0.81);
        let a = step_characteristics(&net, &f, s + t).unwrap();
        let b = step_characteristics(&net, &step_characteristics(&net, &f, s).unwrap(), t).unwrap();
        assert!(a.distance(&b) <= 2.0 * net.grid().spacing() * lip);
    }

    #[test]
    fn absorption_damps_exponentially() {
        let net = Network::two_cycle([1.0, 1.0], 200).unwrap();
        let q = vec![GridFunction::constant(*net.grid(), -0.5); 2];
        let net = net.with_absorption(q).unwrap();
        let one = EdgeState::constant(&net, 1.0);
        let u = step_characteristics(&net, &one, 1.3).unwrap();
        for e in u.edges() {
            for v in e.values() {
                assert_abs_diff_eq!(*v, (-0.65f64).exp(), epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn depth_cap_reports() {
        let (net, f) = sin2_cycle(10);
        let tracer = Tracer { net: &net, state: &f, absorption: Absorption::new(&net), cap: 1 };
        assert!(matches!(tracer.value(0, 0.0, 5.0, 0), Err(Error::Network(NetworkError::DepthExceeded { cap: 1 }))));
    }

    #[test]
    fn upwind_at_unit_cfl_is_exact_transport() {
        let (net, f) = sin2_cycle(200);
        let h = net.grid().spacing();
        let mut u = f.clone();
        let steps = 73;
        for _ in 0..steps {
            u = step_upwind(&net, &u, h).unwrap();
        }
        let exact = step_characteristics(&net, &f, steps as f64 * h).unwrap();
        assert!(u.distance(&exact) <= 1e-12, "{}", u.distance(&exact));
    }

    #[test]
    fn upwind_rejects_cfl_violation_and_keeps_zero() {
        let (net, f) = sin2_cycle(100);
        let h = net.grid().spacing();
        assert!(matches!(step_upwind(&net, &f, 1.5 * h), Err(Error::Network(NetworkError::Cfl { .. }))));
        let z = EdgeState::zeros(&net);
        assert_eq!(supnorm_l1(&step_upwind(&net, &z, 0.5 * h).unwrap()), 0.0);
    }

    #[test]
    fn upwind_mass_drift_on_two_cycle() {
        let (net, f) = sin2_cycle(400);
        let dt = 0.9 * net.grid().spacing() / net.c_max();
        let mut u = f.clone();
        while u.time() < 10.0 {
            u = step_upwind(&net, &u, dt).unwrap();
        }
        let drift = (total_mass(&u) - total_mass(&f)).abs() / total_mass(&f);
        assert!(drift <= 1e-3, "{drift}");
    }

    #[test]
    fn upwind_mass_drift_is_first_order_for_mixed_velocities() {
        // trapezoid mass differs from the conserved left sum by h/2 (u(1) - u(0))
        let net = Network::two_cycle([1.0, 2.5], 200).unwrap();
        let f = EdgeState::from_fns(&net, &[&|x| (PI * x).sin().powi(2), &|_| 0.0]).unwrap();
        let h = net.grid().spacing();
        let dt = 0.9 * h / net.c_max();
        let mut u = f.clone();
        for _ in 0..500 {
            u = step_upwind(&net, &u, dt).unwrap();
        }
        let drift = (total_mass(&u) - total_mass(&f)).abs() / total_mass(&f);
        assert!(drift <= 2.0 * h, "{drift}");
    }

    #[test]
    fn semigroup_substeps_on_branching_networks() {
        // v0 -> v1 splits to v0 and v2; v2 -> v0
        let edges = vec![
            Edge { tail: 0, head: 1 },
            Edge { tail: 1, head: 0 },
            Edge { tail: 1, head: 2 },
            Edge { tail: 2, head: 0 },
        ];
        let w = [(1, 0, 0.5), (2, 0, 0.5), (0, 1, 1.0), (0, 3, 1.0), (3, 2, 1.0)];
        let net = Network::new(3, edges, Some(&w), vec![1.0; 4], None, 100).unwrap();
        let sg = NetworkSemigroup::new(net.clone());
        assert!(sg.is_contraction());
        let f = EdgeState::from_fns(&net, &[&|x| (PI * x).sin().powi(2), &|_| 0.0, &|_| 0.0, &|_| 0.0]).unwrap();
        let u = sg.apply(20.0, &f).unwrap();
        assert_abs_diff_eq!(total_mass(&u), total_mass(&f), epsilon = 1e-12);
        assert!(supnorm_l1(&u) <= supnorm_l1(&f) + 1e-12);
    }

    #[test]
    fn nonuniform_velocity_is_not_a_sup_l1_contraction() {
        // 𝔹ᶜ has a column summing to 2: inflow is compressed onto the slower edge
        let net = Network::two_cycle([1.0, 2.0], 400).unwrap();
        let sg = NetworkSemigroup::new(net.clone());
        assert!(!sg.is_contraction());
        let f = EdgeState::from_fns(&net, &[&|_| 0.0, &|x| (PI * x).sin().powi(2)]).unwrap();
        let u = sg.apply(0.5, &f).unwrap();
        assert!(supnorm_l1(&u) > 1.5 * supnorm_l1(&f));
        assert_abs_diff_eq!(total_mass(&u), total_mass(&f), epsilon = 1e-3);
    }
}
