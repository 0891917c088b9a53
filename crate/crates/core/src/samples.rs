//! Seeded sample functions for the check suite.
//!
//! Every sample carries an id that encodes its family, parameters and the
//! seed it came from, so a failing witness can be regenerated.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{Grid, GridFunction};
use crate::network::{EdgeState, Network};

#[derive(Clone, Debug)]
pub struct Sample<S> {
    pub id: String,
    pub f: S,
}

/// `sin²(π (x - lo) / w)` on `[lo, lo + w]`, zero elsewhere (C¹).
pub fn sin2_bump(grid: Grid, lo: f64, width: f64) -> GridFunction {
    GridFunction::from_fn(
        grid,
        move |x| {
            if x > lo && x < lo + width {
                (PI * (x - lo) / width).sin().powi(2)
            } else {
                0.0
            }
        },
    )
}

/// The smooth bump on `[2, 3]` used for Euler and orbit studies.
pub fn reference_bump(grid: Grid) -> GridFunction {
    sin2_bump(grid, 2.0, 1.0)
}

/// `(-n - x)` clamped to `[0, 1]`: zero on `[-n, 0]`, one left of `-n - 1`.
pub fn ramp(grid: Grid, n: f64) -> GridFunction {
    GridFunction::from_fn(grid, move |x| (-n - x).clamp(0.0, 1.0))
}

/// `count` seeded samples on `grid`. On grids starting at `0` they all vanish
/// there (so they lie in the left shift's domain). Families rotate through
/// bumps, damped ramps, exponential differences and trig products.
pub fn function_library(grid: Grid, count: usize, seed: u64) -> Vec<Sample<GridFunction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (a, b) = (grid.a(), grid.b());
    let span = b - a;
    (0..count)
        .map(|k| {
            let amp = rng.gen_range(0.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let (family, f) = match k % 4 {
                0 => {
                    let width = rng.gen_range(0.25 * span.min(2.0)..0.5 * span);
                    let lo = rng.gen_range(a..b - width);
                    (format!("bump(lo={lo:.6},w={width:.6})"), sin2_bump(grid, lo, width).scaled(amp))
                }
                1 => {
                    let rate = rng.gen_range(0.1..2.0);
                    (
                        format!("ramp(rate={rate:.6})"),
                        GridFunction::from_fn(grid, move |x| amp * x * (-rate * x.abs()).exp()),
                    )
                }
                2 => {
                    let (r1, r2) = (rng.gen_range(0.05..0.5), rng.gen_range(0.6..3.0));
                    let f = GridFunction::from_fn(grid, move |x| amp * ((-r1 * x.abs()).exp() - (-r2 * x.abs()).exp()));
                    (format!("expdiff(r1={r1:.6},r2={r2:.6})"), f)
                }
                _ => {
                    let (w1, w2) = (rng.gen_range(0.2..3.0), rng.gen_range(0.1..1.5));
                    let f = GridFunction::from_fn(grid, move |x| {
                        amp * (w1 * x).sin() * (w2 * x).cos() * (-0.1 * x.abs()).exp()
                    });
                    (format!("trig(w1={w1:.6},w2={w2:.6})"), f)
                }
            };
            Sample { id: format!("{family},amp={amp:.6},seed={seed},k={k}"), f }
        })
        .collect()
}

/// Seeded per-edge trigonometric data on a network grid.
pub fn edge_library(net: &Network, count: usize, seed: u64) -> Vec<Sample<EdgeState>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|k| {
            let params: Vec<(f64, f64, f64)> = (0..net.n_edges())
                .map(|_| (rng.gen_range(-2.0..2.0), rng.gen_range(0.5..6.0), rng.gen_range(0.0..PI)))
                .collect();
            let edges = params
                .iter()
                .map(|&(a, w, p)| GridFunction::from_fn(*net.grid(), move |x| a * (w * x + p).sin()))
                .collect();
            let f = EdgeState::new(edges, 0.0).expect("network grid");
            Sample { id: format!("edge_trig,seed={seed},k={k}"), f }
        })
        .collect()
}

/// Seeded grid functions with independent uniform node values in `[-1, 1]`.
pub fn random_probes(grid: Grid, count: usize, seed: u64) -> Vec<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let v = (0..grid.num_nodes()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            GridFunction::new(grid, v).expect("finite")
        })
        .collect()
}
