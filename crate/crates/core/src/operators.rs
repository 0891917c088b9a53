//! Concrete generators on grid functions and their resolvents.
//!
//! * [`LeftShift`]: `Af = -f'` on `[0, X]` with `f(0) = 0`; generates the
//!   left shift `(T(t)f)(x) = f(x - t)` (zero-filled for `x < t`).
//! * [`RightTranslation`]: `Af = -f'` on `[-X, 0]`, no boundary condition;
//!   the half-line `(-∞, 0]` is truncated and the missing history is the
//!   constant extension of the leftmost value.
//! * [`Laplacian`]: `Af = f''`; no resolvent is offered.
//!
//! Resolvents are evaluated with exponentially fitted quadrature (see
//! `grid::kernel`), i.e. exactly for the piecewise-linear interpolant of
//! the data. This keeps `λ‖R(λ)g‖ <= ‖g‖` exact up to rounding on every
//! window anchored at the inflow end.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{positive_lambda, Error, Result};
use crate::grid::{kernel, Grid, GridFunction};
use crate::space::VectorState;

/// An operator `(A, dom(A))` with (optionally) a resolvent for `λ > 0`.
pub trait Generator: Send + Sync {
    type State: VectorState;

    fn label(&self) -> &str;

    /// The action `f ↦ Af`. Callers check `domain_check` first when it matters.
    fn apply(&self, f: &Self::State) -> Self::State;

    /// `R(λ, A) g = (λ - A)^{-1} g`.
    fn resolvent(&self, lambda: f64, g: &Self::State) -> Result<Self::State>;

    fn has_resolvent(&self) -> bool {
        true
    }

    fn domain_check(&self, f: &Self::State) -> bool;

    /// Documented bound on `‖λf - Af - g‖ / ‖g‖` for `f = R(λ)g` and smooth
    /// `g`, and the slack used for discretized-operator inequality checks.
    fn consistency_tolerance(&self, lambda: f64) -> f64;
}

/// CLI-facing generator names.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorLabel {
    LeftShift,
    RightTranslation,
    Laplacian,
}

impl OperatorLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            OperatorLabel::LeftShift => "left_shift",
            OperatorLabel::RightTranslation => "right_translation",
            OperatorLabel::Laplacian => "laplacian",
        }
    }
}

impl fmt::Display for OperatorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OperatorLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "left_shift" => Ok(OperatorLabel::LeftShift),
            "right_translation" => Ok(OperatorLabel::RightTranslation),
            "laplacian" => Ok(OperatorLabel::Laplacian),
            other => Err(Error::UnknownOperator(other.to_string())),
        }
    }
}

/// Default truncation of `[0, ∞)`.
pub const DEFAULT_X_MAX: f64 = 20.0;
/// Default truncation of `(-∞, 0]`.
pub const DEFAULT_X_MIN: f64 = 10.0;

fn ensure_grid(g: &GridFunction, grid: &Grid) -> Result<()> {
    if g.grid() == grid {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

/// `Af = -f'`, `dom(A) = { f ∈ C¹_b : f(0) = 0 }` on `[0, X]`.
#[derive(Clone, Debug)]
pub struct LeftShift {
    grid: Grid,
}

pub fn left_shift_generator(grid: Grid) -> Result<LeftShift> {
    if grid.a() != 0.0 {
        return Err(Error::InvalidGrid(format!("left shift needs a grid starting at 0, got {}", grid.a())));
    }
    Ok(LeftShift { grid })
}

impl LeftShift {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

impl Generator for LeftShift {
    type State = GridFunction;

    fn label(&self) -> &str {
        "left_shift"
    }

    fn apply(&self, f: &GridFunction) -> GridFunction {
        f.differentiate().scaled(-1.0)
    }

    fn resolvent(&self, lambda: f64, g: &GridFunction) -> Result<GridFunction> {
        ensure_grid(g, &self.grid)?;
        resolvent_shift(lambda, g)
    }

    fn domain_check(&self, f: &GridFunction) -> bool {
        f.value(0).abs() <= 1e-12
    }

    fn consistency_tolerance(&self, lambda: f64) -> f64 {
        shift_tolerance(&self.grid, lambda)
    }
}

/// `10 h² (1 + λ)²`: the derivative stencils see `f''' = λ² f' - λ g' - g''`.
fn shift_tolerance(grid: &Grid, lambda: f64) -> f64 {
    let h = grid.spacing();
    10.0 * h * h * (1.0 + lambda).powi(2)
}

/// `(R(λ,A)g)(x) = ∫_0^x e^{λ(t-x)} g(t) dt` for the left shift.
///
/// The result vanishes at `x = 0`.
pub fn resolvent_shift(lambda: f64, g: &GridFunction) -> Result<GridFunction> {
    positive_lambda(lambda)?;
    let h = g.grid().spacing();
    let values = kernel::causal_sweep(g.values(), h, |_| lambda, 0.0);
    Ok(GridFunction::from_values_unchecked(*g.grid(), values))
}

/// `Af = -f'` on `[-X, 0]`: generator of `(T(t)f)(x) = f(x - t)`.
#[derive(Clone, Debug)]
pub struct RightTranslation {
    grid: Grid,
}

pub fn right_translation_generator(grid: Grid) -> Result<RightTranslation> {
    if grid.b() != 0.0 {
        return Err(Error::InvalidGrid(format!("right translation needs a grid ending at 0, got {}", grid.b())));
    }
    Ok(RightTranslation { grid })
}

impl RightTranslation {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

impl Generator for RightTranslation {
    type State = GridFunction;

    fn label(&self) -> &str {
        "right_translation"
    }

    fn apply(&self, f: &GridFunction) -> GridFunction {
        f.differentiate().scaled(-1.0)
    }

    fn resolvent(&self, lambda: f64, g: &GridFunction) -> Result<GridFunction> {
        ensure_grid(g, &self.grid)?;
        right_translation_resolvent(lambda, g)
    }

    fn domain_check(&self, _f: &GridFunction) -> bool {
        true
    }

    fn consistency_tolerance(&self, lambda: f64) -> f64 {
        shift_tolerance(&self.grid, lambda)
    }
}

/// `(R(λ,A)g)(x) = ∫_{-∞}^x e^{-λ(x-s)} g(s) ds` on `[-X, 0]`.
///
/// Below `-X` the data is continued by its leftmost value, which contributes
/// the analytic tail `g(-X) e^{-λ(x+X)} / λ`.
pub fn right_translation_resolvent(lambda: f64, g: &GridFunction) -> Result<GridFunction> {
    positive_lambda(lambda)?;
    let h = g.grid().spacing();
    let tail = g.value(0) / lambda;
    let values = kernel::causal_sweep(g.values(), h, |_| lambda, tail);
    Ok(GridFunction::from_values_unchecked(*g.grid(), values))
}

/// `Af = f''`, `dom(A) = C²_b`. The resolvent is deliberately not offered.
#[derive(Clone, Debug)]
pub struct Laplacian {
    grid: Grid,
}

pub fn laplacian_generator(grid: Grid) -> Laplacian {
    Laplacian { grid }
}

impl Laplacian {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }
}

impl Generator for Laplacian {
    type State = GridFunction;

    fn label(&self) -> &str {
        "laplacian"
    }

    fn apply(&self, f: &GridFunction) -> GridFunction {
        f.second_derivative()
    }

    fn resolvent(&self, _lambda: f64, _g: &GridFunction) -> Result<GridFunction> {
        Err(Error::ResolventUnavailable(self.label().to_string()))
    }

    fn has_resolvent(&self) -> bool {
        false
    }

    fn domain_check(&self, _f: &GridFunction) -> bool {
        true
    }

    fn consistency_tolerance(&self, _lambda: f64) -> f64 {
        let h = self.grid.spacing();
        10.0 * h * h
    }
}

/// First-order upwind matrix for `Af = -f'` with the inflow value `f_0 = 0`
/// eliminated: `(A_h f)_i = -(f_i - f_{i-1}) / h`.
///
/// Lower bidiagonal, diagonal `-1/h`, subdiagonal `+1/h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UpwindMatrix {
    size: usize,
    h: f64,
}

pub fn upwind_discretize(label: &str, size: usize, h: f64) -> Result<UpwindMatrix> {
    if label.parse::<OperatorLabel>()? != OperatorLabel::LeftShift {
        return Err(Error::InvalidParameter(format!("no upwind discretization for '{label}'")));
    }
    if size < 2 {
        return Err(Error::InvalidParameter(format!("upwind matrix needs size >= 2, got {size}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::NonPositive { name: "h", value: h });
    }
    Ok(UpwindMatrix { size, h })
}

impl UpwindMatrix {
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let inv_h = 1.0 / self.h;
        DMatrix::from_fn(self.size, self.size, |i, j| {
            if i == j {
                -inv_h
            } else if i == j + 1 {
                inv_h
            } else {
                0.0
            }
        })
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        assert_eq!(f.len(), self.size);
        (0..self.size)
            .map(|i| {
                let left = if i == 0 { 0.0 } else { f[i - 1] };
                -(f[i] - left) / self.h
            })
            .collect()
    }

    /// `(λI - A_h)^{-1} g` by forward substitution:
    /// `f_i = (g_i + f_{i-1}/h) / (λ + 1/h)`.
    pub fn resolvent_apply(&self, lambda: f64, g: &[f64]) -> Result<Vec<f64>> {
        positive_lambda(lambda)?;
        assert_eq!(g.len(), self.size);
        let inv_h = 1.0 / self.h;
        let mut out = Vec::with_capacity(self.size);
        let mut prev = 0.0;
        for gi in g {
            prev = (gi + prev * inv_h) / (lambda + inv_h);
            out.push(prev);
        }
        Ok(out)
    }
}
