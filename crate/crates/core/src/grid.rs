//! Uniform 1D grids and sampled functions on them.
//!
//! A [`GridFunction`] is the concrete stand-in for an element of a space of
//! bounded continuous (or essentially bounded) functions: node values on a
//! uniform grid, linearly interpolated between nodes where a continuum
//! value is needed.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::fmt_f64;

/// Uniform grid on `[a, b]` with `n_cells + 1` nodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    a: f64,
    b: f64,
    n_cells: usize,
}

impl Grid {
    pub fn new(a: f64, b: f64, n_cells: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) || a >= b {
            return Err(Error::InvalidGrid(format!("need finite a < b, got [{a}, {b}]")));
        }
        if n_cells < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 cells, got {n_cells}")));
        }
        Ok(Self { a, b, n_cells })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn num_nodes(&self) -> usize {
        self.n_cells + 1
    }

    pub fn spacing(&self) -> f64 {
        (self.b - self.a) / self.n_cells as f64
    }

    /// Node `i`, computed as `a + (b - a) * i / n_cells` so that nodes which
    /// are exact rationals of the interval land exactly (e.g. -2 on [-10, 0]).
    pub fn node(&self, i: usize) -> f64 {
        debug_assert!(i <= self.n_cells);
        if i == self.n_cells {
            return self.b;
        }
        self.a + (self.b - self.a) * i as f64 / self.n_cells as f64
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.n_cells).map(move |i| self.node(i))
    }

    /// Slack used when deciding whether a node lies in a closed window.
    pub(crate) fn node_slack(&self) -> f64 {
        1e-9 * self.spacing()
    }

    /// Indices of nodes lying in `[lo, hi]`, or `None` if there are none.
    pub fn node_range(&self, lo: f64, hi: f64) -> Option<(usize, usize)> {
        let n = self.n_cells;
        let slack = self.node_slack();
        let (lo, hi) = (lo - slack, hi + slack);
        if lo.is_nan() || hi.is_nan() || lo > hi || hi < self.a || lo > self.b {
            return None;
        }
        let h = self.spacing();
        let mut i0 = (((lo - self.a) / h).ceil().max(0.0) as usize).min(n);
        while i0 > 0 && self.node(i0 - 1) >= lo {
            i0 -= 1;
        }
        while i0 < n && self.node(i0) < lo {
            i0 += 1;
        }
        let mut i1 = (((hi - self.a) / h).floor().max(0.0) as usize).min(n);
        while i1 < n && self.node(i1 + 1) <= hi {
            i1 += 1;
        }
        while i1 > 0 && self.node(i1) > hi {
            i1 -= 1;
        }
        (self.node(i0) >= lo && self.node(i1) <= hi && i0 <= i1).then_some((i0, i1))
    }

    /// Cell index and local coordinate in `[0, 1]` for a point of `[a, b]`.
    pub(crate) fn locate(&self, x: f64) -> (usize, f64) {
        let s = (x - self.a) / self.spacing();
        if s <= 0.0 {
            return (0, 0.0);
        }
        if s >= self.n_cells as f64 {
            return (self.n_cells - 1, 1.0);
        }
        let i = (s.floor() as usize).min(self.n_cells - 1);
        (i, s - i as f64)
    }
}

/// Node values of a function on a [`Grid`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.num_nodes() {
            return Err(Error::LengthMismatch { expected: grid.num_nodes(), actual: values.len() });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node. Panics if `f` produces a non-finite value.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values: Vec<f64> = grid.nodes().map(f).collect();
        assert!(values.iter().all(|v| v.is_finite()), "sampled function is not finite");
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self { grid, values: vec![0.0; grid.num_nodes()] }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.num_nodes()] }
    }

    pub(crate) fn from_values_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.num_nodes());
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_values_unchecked(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        self.map(|v| alpha * v)
    }

    /// `alpha * self + beta * other` on a shared grid.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(x, y)| alpha * x + beta * y).collect();
        Ok(Self::from_values_unchecked(self.grid, values))
    }

    /// Composite trapezoid rule over `[a, b]`.
    pub fn integrate(&self) -> f64 {
        let n = self.values.len();
        let inner: f64 = self.values[1..n - 1].iter().sum();
        self.grid.spacing() * (inner + 0.5 * (self.values[0] + self.values[n - 1]))
    }

    /// First derivative: central differences inside, second-order one-sided
    /// stencils at both ends. Exact on quadratics.
    pub fn differentiate(&self) -> Self {
        let v = &self.values;
        let n = v.len();
        let h = self.grid.spacing();
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
        }
        d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
        d[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h);
        Self::from_values_unchecked(self.grid, d)
    }

    /// Second derivative: three-point stencil inside, four-point one-sided
    /// stencils at the ends (exact on cubics). Falls back to the three-point
    /// stencil shifted inward when the grid has only two cells.
    pub fn second_derivative(&self) -> Self {
        let v = &self.values;
        let n = v.len();
        let h2 = self.grid.spacing().powi(2);
        let mut d = vec![0.0; n];
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - 2.0 * v[i] + v[i - 1]) / h2;
        }
        if n >= 4 {
            d[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
            d[n - 1] = (2.0 * v[n - 1] - 5.0 * v[n - 2] + 4.0 * v[n - 3] - v[n - 4]) / h2;
        } else {
            d[0] = d[1];
            d[n - 1] = d[n - 2];
        }
        Self::from_values_unchecked(self.grid, d)
    }

    /// Max of `|f|` over the nodes lying in `[lo, hi]`.
    pub fn window_sup(&self, lo: f64, hi: f64) -> Result<f64> {
        let (i0, i1) =
            self.grid.node_range(lo, hi).ok_or(Error::EmptyWindow { lo, hi, a: self.grid.a, b: self.grid.b })?;
        Ok(self.values[i0..=i1].iter().fold(0.0, |m, v| m.max(v.abs())))
    }

    /// Discrete sup-norm.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Piecewise-linear interpolant at `x`; `None` outside `[a, b]`.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let slack = self.grid.node_slack();
        if x < self.grid.a - slack || x > self.grid.b + slack {
            return None;
        }
        let (i, theta) = self.grid.locate(x);
        Some((1.0 - theta) * self.values[i] + theta * self.values[i + 1])
    }

    /// CSV with header `x,value`, one node per row.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "x,value")?;
        for (x, v) in self.grid.nodes().zip(&self.values) {
            writeln!(out, "{},{}", fmt_f64(x), fmt_f64(*v))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv output is ascii")
    }
}

/// Exponentially fitted quadrature for causal kernels.
///
/// Each cell integral `∫_0^h e^{-k s} ĝ(x_i - s) ds` is evaluated exactly for
/// the piecewise-linear interpolant `ĝ`, so the sweep below is the exact
/// convolution of `ĝ` with a decaying exponential. Positive weights make it a
/// discrete contraction for any `k h`, unlike the trapezoid recursion.
pub(crate) mod kernel {
    /// `(1 - e^{-z}) / z` and `(1 - e^{-z}(1 + z)) / z^2`.
    pub fn phi12(z: f64) -> (f64, f64) {
        if z.abs() < 0.5 {
            // Σ (-z)^k / (k+1)!  and  Σ (-z)^k (k+1) / (k+2)!
            let (mut p1, mut p2) = (0.0, 0.0);
            let mut pow = 1.0; // (-z)^k
            let mut fact = 1.0; // (k+1)!
            for k in 0..24 {
                let kf = k as f64;
                p1 += pow / fact;
                p2 += pow * (kf + 1.0) / (fact * (kf + 2.0));
                pow *= -z;
                fact *= kf + 2.0;
            }
            (p1, p2)
        } else {
            let e = (-z).exp();
            ((-(-z).exp_m1()) / z, (1.0 - e * (1.0 + z)) / (z * z))
        }
    }

    /// Weights `(near, far)` such that
    /// `∫_0^h e^{-k s} ĝ(x_i - s) ds = near * g_i + far * g_{i-1}`.
    pub fn cell_weights(rate: f64, h: f64) -> (f64, f64) {
        let (p1, p2) = phi12(rate * h);
        (h * (p1 - p2), h * p2)
    }

    /// `F_0 = init`, `F_i = e^{-k_i h} F_{i-1} + ∫ e^{-k_i s} ĝ(x_i - s) ds`
    /// with a per-cell rate `k_i` (cell `i` spans nodes `i-1..i`).
    pub fn causal_sweep(values: &[f64], h: f64, rate: impl Fn(usize) -> f64, init: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(values.len());
        out.push(init);
        for i in 1..values.len() {
            let k = rate(i);
            let (near, far) = cell_weights(k, h);
            let prev = out[i - 1];
            out.push((-k * h).exp() * prev + near * values[i] + far * values[i - 1]);
        }
        out
    }
}
