use crate::error::Result;
use crate::grid::{Grid, GridFunction};
use crate::seminorms::SeminormFamily;
use crate::space::VectorState;

use super::{Network, NetworkError};

/// Per-edge profiles `u_j` on a shared grid over `[0, 1]`, stamped with a time.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeState {
    edges: Vec<GridFunction>,
    t: f64,
}

impl EdgeState {
    pub fn new(edges: Vec<GridFunction>, t: f64) -> Result<Self> {
        let Some(first) = edges.first() else {
            return Err(NetworkError::StateMismatch("state has no edges".into()).into());
        };
        let grid = *first.grid();
        if grid.a() != 0.0 || grid.b() != 1.0 {
            return Err(NetworkError::StateMismatch("edge profiles must live on [0, 1]".into()).into());
        }
        if let Some(j) = edges.iter().position(|u| u.grid() != &grid) {
            return Err(NetworkError::StateMismatch(format!("edge {j} uses a different grid")).into());
        }
        Ok(Self { edges, t })
    }

    /// `u_j = f_j` sampled on the network grid.
    pub fn from_fns(net: &Network, fs: &[&dyn Fn(f64) -> f64]) -> Result<Self> {
        if fs.len() != net.n_edges() {
            return Err(NetworkError::Count { what: "edge profiles", expected: net.n_edges(), actual: fs.len() }.into());
        }
        Self::new(fs.iter().map(|f| GridFunction::from_fn(*net.grid(), f)).collect(), 0.0)
    }

    pub fn zeros(net: &Network) -> Self {
        Self { edges: vec![GridFunction::zeros(*net.grid()); net.n_edges()], t: 0.0 }
    }

    pub fn constant(net: &Network, c: f64) -> Self {
        Self { edges: vec![GridFunction::constant(*net.grid(), c); net.n_edges()], t: 0.0 }
    }

    pub fn edges(&self) -> &[GridFunction] {
        &self.edges
    }

    pub fn edge(&self, j: usize) -> &GridFunction {
        &self.edges[j]
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn grid(&self) -> &Grid {
        self.edges[0].grid()
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn with_time(mut self, t: f64) -> Self {
        self.t = t;
        self
    }

    /// `u_j(0)` for every edge.
    pub fn head_values(&self) -> Vec<f64> {
        self.edges.iter().map(|u| u.value(0)).collect()
    }

    /// `u_j(1)` for every edge.
    pub fn tail_values(&self) -> Vec<f64> {
        let last = self.grid().n_cells();
        self.edges.iter().map(|u| u.value(last)).collect()
    }

    pub(crate) fn ensure_matches(&self, net: &Network) -> Result<()> {
        if self.n_edges() != net.n_edges() {
            return Err(
                NetworkError::Count { what: "edge profiles", expected: net.n_edges(), actual: self.n_edges() }.into()
            );
        }
        if self.grid() != net.grid() {
            return Err(NetworkError::StateMismatch("grid differs from the network grid".into()).into());
        }
        Ok(())
    }

    /// CSV rows `t,edge,x,u` (no header).
    pub fn csv_rows(&self) -> String {
        use crate::output::fmt_f64;
        let mut s = String::new();
        let t = fmt_f64(self.t);
        for (j, u) in self.edges.iter().enumerate() {
            for (x, v) in u.grid().nodes().zip(u.values()) {
                s.push_str(&format!("{t},{j},{},{}\n", fmt_f64(x), fmt_f64(*v)));
            }
        }
        s
    }
}

/// `Σ_j ∫_0^1 u_j`.
pub fn total_mass(state: &EdgeState) -> f64 {
    state.edges.iter().map(GridFunction::integrate).sum()
}

/// `max_x Σ_j |u_j(x)|` over grid nodes.
pub fn supnorm_l1(state: &EdgeState) -> f64 {
    (0..state.grid().num_nodes()).map(|i| state.edges.iter().map(|u| u.value(i).abs()).sum::<f64>()).fold(0.0, f64::max)
}

impl VectorState for EdgeState {
    fn zeros_like(&self) -> Self {
        Self { edges: self.edges.iter().map(VectorState::zeros_like).collect(), t: self.t }
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        assert_eq!(self.n_edges(), x.n_edges(), "axpy on states with different edge counts");
        for (a, b) in self.edges.iter_mut().zip(&x.edges) {
            a.axpy(alpha, b);
        }
    }

    fn scale_mut(&mut self, alpha: f64) {
        for u in &mut self.edges {
            u.scale_mut(alpha);
        }
    }

    fn norm(&self) -> f64 {
        supnorm_l1(self)
    }
}

/// The one-element family `{supnorm_ℓ¹}`. It norms the space by definition;
/// dissipativity in it is the norm statement.
#[derive(Clone, Copy, Debug, Default)]
pub struct SupNormL1;

impl SeminormFamily<EdgeState> for SupNormL1 {
    fn name(&self) -> String {
        "sup over x of the l1 edge sum".into()
    }

    fn len(&self) -> usize {
        1
    }

    fn eval(&self, n: usize, f: &EdgeState) -> Result<f64> {
        if n != 1 {
            return Err(crate::error::Error::IndexOutOfRange { index: n, max: 1 });
        }
        Ok(supnorm_l1(f))
    }

    fn norming_residual(&self, _f: &EdgeState) -> f64 {
        0.0
    }

    fn covers(&self, _f: &EdgeState) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    #[test]
    fn mass_and_norm_examples() {
        let net = Network::two_cycle([1.0, 1.0], 1000).unwrap();
        let zero = EdgeState::zeros(&net);
        assert_eq!(total_mass(&zero), 0.0);
        assert_eq!(supnorm_l1(&zero), 0.0);

        let s = EdgeState::from_fns(&net, &[&|x| (PI * x).sin().powi(2), &|_| 0.0]).unwrap();
        assert_abs_diff_eq!(total_mass(&s), 0.5, epsilon = 1e-6);

        let s = EdgeState::from_fns(&net, &[&|x| x, &|x| 1.0 - x]).unwrap();
        assert_abs_diff_eq!(supnorm_l1(&s), 1.0, epsilon = 1e-15);

        let s = EdgeState::from_fns(&net, &[&|x| (PI * x).sin(), &|x| (PI * x).sin()]).unwrap();
        assert_abs_diff_eq!(supnorm_l1(&s), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn states_must_share_a_unit_grid() {
        let g = Grid::new(0.0, 1.0, 10).unwrap();
        let g2 = Grid::new(0.0, 1.0, 20).unwrap();
        assert!(EdgeState::new(vec![GridFunction::zeros(g), GridFunction::zeros(g2)], 0.0).is_err());
        assert!(EdgeState::new(vec![GridFunction::zeros(Grid::new(0.0, 2.0, 10).unwrap())], 0.0).is_err());
        assert!(EdgeState::new(vec![], 0.0).is_err());
    }

    #[test]
    fn csv_rows_shape() {
        let net = Network::two_cycle([1.0, 1.0], 4).unwrap();
        let rows = EdgeState::constant(&net, 1.0).csv_rows();
        assert_eq!(rows.lines().count(), 2 * 5);
        assert!(rows.starts_with("0.0000000000000000e0,0,0.0000000000000000e0,1.0000000000000000e0\n"));
    }
}
