//! Exact semigroups and semigroup reconstructions from resolvents.
//!
//! * [`ShiftSemigroup`] / [`RightTranslationSemigroup`]: translations with
//!   linear interpolation between nodes (sup-norm nonexpansive).
//! * [`euler_apply`]: `((m/t) R(m/t, A))^m f`, applied as `m` sequential
//!   resolvent solves.
//! * [`laplace_resolvent`]: `∫_0^H e^{-λs} T(s) f ds` by the trapezoid rule
//!   in time, reported together with the tail bound `e^{-λH} ‖f‖ / λ`.
//! * [`orbit_integral_residual`]: `‖A ∫_0^t T(s) f ds - (T(t) f - f)‖`.

use serde::Serialize;

use crate::error::{positive_lambda, Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::operators::Generator;
use crate::parallel;
use crate::seminorms::SeminormFamily;
use crate::space::VectorState;

/// A contraction-type (M = 1, ω = 0) semigroup `(T(t))_{t >= 0}`.
pub trait Semigroup: Send + Sync {
    type State: VectorState;

    fn label(&self) -> &str;

    fn apply(&self, t: f64, f: &Self::State) -> Result<Self::State>;

    /// Whether `‖T(t)‖ <= 1` is intended (and tested) for this semigroup.
    fn is_contraction(&self) -> bool {
        true
    }
}

fn nonnegative_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeTime(t))
    }
}

/// Left shift on `[0, X]`: `(T(t)f)(x) = f(x - t)` for `x >= t`, else 0.
#[derive(Clone, Debug)]
pub struct ShiftSemigroup {
    grid: Grid,
}

impl ShiftSemigroup {
    pub fn new(grid: Grid) -> Self {
        Self { grid }
    }
}

impl Semigroup for ShiftSemigroup {
    type State = GridFunction;

    fn label(&self) -> &str {
        "left_shift"
    }

    fn apply(&self, t: f64, f: &GridFunction) -> Result<GridFunction> {
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        shift_semigroup_apply(t, f)
    }
}

pub fn shift_semigroup_apply(t: f64, f: &GridFunction) -> Result<GridFunction> {
    nonnegative_time(t)?;
    if t == 0.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let slack = grid.node_slack();
    let values = grid
        .nodes()
        .map(|x| {
            let src = x - t;
            if src < grid.a() - slack {
                0.0
            } else {
                f.interpolate(src.max(grid.a())).unwrap_or(0.0)
            }
        })
        .collect();
    Ok(GridFunction::from_values_unchecked(grid, values))
}

/// Right translation on `[-X, 0]`, history continued by the leftmost value.
#[derive(Clone, Debug)]
pub struct RightTranslationSemigroup {
    grid: Grid,
}

impl RightTranslationSemigroup {
    pub fn new(grid: Grid) -> Self {
        Self { grid }
    }
}

impl Semigroup for RightTranslationSemigroup {
    type State = GridFunction;

    fn label(&self) -> &str {
        "right_translation"
    }

    fn apply(&self, t: f64, f: &GridFunction) -> Result<GridFunction> {
        nonnegative_time(t)?;
        if f.grid() != &self.grid {
            return Err(Error::GridMismatch);
        }
        if t == 0.0 {
            return Ok(f.clone());
        }
        let a = self.grid.a();
        let values = self.grid.nodes().map(|x| f.interpolate((x - t).max(a)).unwrap_or(f.value(0))).collect();
        Ok(GridFunction::from_values_unchecked(self.grid, values))
    }
}

/// `((m/t) R(m/t, A))^m f`.
pub fn euler_apply<G: Generator>(generator: &G, t: f64, m: usize, f: &G::State) -> Result<G::State> {
    if !generator.has_resolvent() {
        return Err(Error::ResolventUnavailable(generator.label().to_string()));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositive { name: "t", value: t });
    }
    if m == 0 {
        return Err(Error::InvalidParameter("Euler power m must be >= 1".into()));
    }
    let lambda = m as f64 / t;
    let mut u = f.clone();
    for _ in 0..m {
        u = generator.resolvent(lambda, &u)?;
        u.scale_mut(lambda);
    }
    Ok(u)
}

/// One rung of an Euler convergence ladder.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EulerRung {
    pub m: usize,
    /// `errors[n - 1] = p_n(Euler_m f - T(t) f)`.
    pub errors: Vec<f64>,
}

/// Euler approximations for each `m` in `ladder`, measured against the exact
/// semigroup in every seminorm of `family`. Rungs run in parallel.
pub fn euler_convergence<G, S, F>(
    generator: &G,
    semigroup: &S,
    family: &F,
    t: f64,
    ladder: &[usize],
    f: &G::State,
) -> Result<Vec<EulerRung>>
where
    G: Generator,
    S: Semigroup<State = G::State>,
    F: SeminormFamily<G::State> + Sync,
{
    let exact = semigroup.apply(t, f)?;
    let rungs = parallel::map_slice(ladder, |&m| -> Result<EulerRung> {
        let mut diff = euler_apply(generator, t, m, f)?;
        diff.axpy(-1.0, &exact);
        let errors = (1..=family.len()).map(|n| family.eval(n, &diff)).collect::<Result<_>>()?;
        Ok(EulerRung { m, errors })
    });
    rungs.into_iter().collect()
}

/// CSV `m,seminorm_index,error`.
pub fn euler_csv(rungs: &[EulerRung]) -> String {
    use crate::output::fmt_f64;
    let mut s = String::from("m,seminorm_index,error\n");
    for r in rungs {
        for (i, e) in r.errors.iter().enumerate() {
            s.push_str(&format!("{},{},{}\n", r.m, i + 1, fmt_f64(*e)));
        }
    }
    s
}

#[derive(Clone, Debug)]
pub struct LaplaceResolvent<S> {
    pub value: S,
    /// `e^{-λH} ‖f‖ / λ`: norm of the discarded tail, as a diagnostic.
    pub tail_bound: f64,
}

/// Time nodes per parallel work item; fixed so sums are order-independent
/// of the thread count.
const TIME_CHUNK: usize = 32;

/// Trapezoid sum `Σ_k w_k weight(s_k) T(s_k) f` over `steps + 1` uniform
/// time nodes on `[0, horizon]`.
fn time_trapezoid<S: Semigroup>(
    semigroup: &S,
    f: &S::State,
    horizon: f64,
    steps: usize,
    weight: impl Fn(f64) -> f64 + Sync + Send,
) -> Result<S::State> {
    let dt = horizon / steps as f64;
    let n_nodes = steps + 1;
    let n_chunks = n_nodes.div_ceil(TIME_CHUNK);
    let partials = parallel::map_range(n_chunks, |c| -> Result<S::State> {
        let mut acc = f.zeros_like();
        for k in c * TIME_CHUNK..((c + 1) * TIME_CHUNK).min(n_nodes) {
            let s = if k == steps { horizon } else { k as f64 * dt };
            let end = if k == 0 || k == steps { 0.5 } else { 1.0 };
            let w = dt * end * weight(s);
            if w != 0.0 {
                acc.axpy(w, &semigroup.apply(s, f)?);
            }
        }
        Ok(acc)
    });
    let mut total = f.zeros_like();
    for p in partials {
        total.axpy(1.0, &p?);
    }
    Ok(total)
}

/// `R(λ, A) f ≈ ∫_0^H e^{-λs} T(s) f ds` with `steps` trapezoid intervals.
pub fn laplace_resolvent<S: Semigroup>(
    semigroup: &S,
    lambda: f64,
    f: &S::State,
    horizon: f64,
    steps: usize,
) -> Result<LaplaceResolvent<S::State>> {
    positive_lambda(lambda)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::NonPositive { name: "horizon", value: horizon });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one time step".into()));
    }
    let value = time_trapezoid(semigroup, f, horizon, steps, |s| (-lambda * s).exp())?;
    let tail_bound = (-lambda * horizon).exp() * f.norm() / lambda;
    Ok(LaplaceResolvent { value, tail_bound })
}

/// `‖A ∫_0^t T(s) f ds - (T(t) f - f)‖` with a `steps`-interval time trapezoid.
pub fn orbit_integral_residual<G, S>(generator: &G, semigroup: &S, t: f64, f: &G::State, steps: usize) -> Result<f64>
where
    G: Generator,
    S: Semigroup<State = G::State>,
{
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::NonPositive { name: "t", value: t });
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("need at least one time step".into()));
    }
    let integral = time_trapezoid(semigroup, f, t, steps, |_| 1.0)?;
    let mut residual = generator.apply(&integral);
    residual.axpy(-1.0, &semigroup.apply(t, f)?);
    residual.axpy(1.0, f);
    Ok(residual.norm())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{left_shift_generator, resolvent_shift, right_translation_generator};
    use crate::seminorms::{CompactSeminormFamily, WindowOrientation};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn hat(grid: Grid, lo: f64, hi: f64) -> GridFunction {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        GridFunction::from_fn(grid, |x| (1.0 - (x - mid).abs() / half).max(0.0))
    }

    fn sin2_bump(grid: Grid, lo: f64) -> GridFunction {
        GridFunction::from_fn(grid, |x| if x > lo && x < lo + 1.0 { (PI * (x - lo)).sin().powi(2) } else { 0.0 })
    }

    #[test]
    fn shift_identity_and_translation() {
        let g = Grid::new(0.0, 5.0, 500).unwrap();
        let f = hat(g, 1.0, 2.0);
        assert_eq!(shift_semigroup_apply(0.0, &f).unwrap(), f);
        let moved = shift_semigroup_apply(0.5, &f).unwrap();
        let expect = hat(g, 1.5, 2.5);
        assert!(moved.distance(&expect) < 1e-12);
        assert!(matches!(shift_semigroup_apply(-1.0, &f), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn shift_is_sup_contraction() {
        let g = Grid::new(0.0, 10.0, 997).unwrap();
        let f = GridFunction::from_fn(g, |x| (3.1 * x).sin() * (1.0 + 0.2 * x).ln());
        for t in [0.1, 1.0, 5.0, 0.0123] {
            assert!(shift_semigroup_apply(t, &f).unwrap().sup_norm() <= f.sup_norm());
        }
    }

    #[test]
    fn shift_semigroup_law_within_interpolation_error() {
        let g = Grid::new(0.0, 10.0, 1000).unwrap();
        let f = GridFunction::from_fn(g, |x| (x * 1.7).sin() * x.min(1.0));
        let lip = 1.7 + 1.0;
        for (s, t) in [(0.123, 0.456), (1.0, 2.5), (0.005, 3.3333)] {
            let a = shift_semigroup_apply(s + t, &f).unwrap();
            let b = shift_semigroup_apply(t, &shift_semigroup_apply(s, &f).unwrap()).unwrap();
            assert!(a.distance(&b) <= 2.0 * g.spacing() * lip);
        }
    }

    #[test]
    fn right_translation_keeps_constants() {
        let g = Grid::new(-10.0, 0.0, 400).unwrap();
        let s = RightTranslationSemigroup::new(g);
        let one = GridFunction::constant(g, 1.0);
        assert!(s.apply(3.7, &one).unwrap().distance(&one) < 1e-15);
    }

    #[test]
    fn euler_zero_and_errors() {
        let g = Grid::new(0.0, 5.0, 500).unwrap();
        let a = left_shift_generator(g).unwrap();
        let z = euler_apply(&a, 1.0, 7, &GridFunction::zeros(g)).unwrap();
        assert_eq!(z.sup_norm(), 0.0);
        assert!(euler_apply(&a, 0.0, 4, &z).is_err());
        assert!(euler_apply(&a, 1.0, 0, &z).is_err());
        let lap = crate::operators::laplacian_generator(g);
        assert!(matches!(euler_apply(&lap, 1.0, 4, &z), Err(Error::ResolventUnavailable(_))));
    }

    #[test]
    fn euler_single_step_is_scaled_resolvent() {
        let g = Grid::new(0.0, 5.0, 500).unwrap();
        let a = left_shift_generator(g).unwrap();
        let f = sin2_bump(g, 2.0);
        let e = euler_apply(&a, 0.5, 1, &f).unwrap();
        let r = resolvent_shift(2.0, &f).unwrap().scaled(2.0);
        assert_eq!(e, r);
    }

    #[test]
    fn euler_errors_decrease_along_ladder() {
        let g = Grid::new(0.0, 5.0, 2000).unwrap();
        let a = left_shift_generator(g).unwrap();
        let s = ShiftSemigroup::new(g);
        let fam = CompactSeminormFamily::new(WindowOrientation::Right, 5).unwrap();
        let f = sin2_bump(g, 2.0);
        let rungs = euler_convergence(&a, &s, &fam, 1.0, &[4, 16, 64], &f).unwrap();
        let p5: Vec<f64> = rungs.iter().map(|r| r.errors[4]).collect();
        assert!(p5[1] < p5[0] && p5[2] < p5[1], "{p5:?}");
        let csv = euler_csv(&rungs);
        assert!(csv.starts_with("m,seminorm_index,error\n"));
        assert_eq!(csv.lines().count(), 1 + 3 * 5);
    }

    #[test]
    fn laplace_resolvent_examples() {
        let g = Grid::new(0.0, 20.0, 4000).unwrap();
        let s = ShiftSemigroup::new(g);

        let z = laplace_resolvent(&s, 1.0, &GridFunction::zeros(g), 15.0, 300).unwrap();
        assert_eq!(z.value.sup_norm(), 0.0);
        assert_eq!(z.tail_bound, 0.0);

        // smooth data vanishing at 0
        let f = sin2_bump(g, 1.0);
        let lr = laplace_resolvent(&s, 1.0, &f, 15.0, 3000).unwrap();
        let exact = resolvent_shift(1.0, &f).unwrap();
        let err = lr.value.combine(1.0, &exact, -1.0).unwrap().window_sup(0.0, 5.0).unwrap();
        assert!(err <= 1e-3, "err {err}");
        assert_abs_diff_eq!(lr.tail_bound, (-15.0f64).exp(), epsilon = 1e-15);

        // constant data in the far interior: 1/λ
        let one = GridFunction::constant(g, 1.0);
        let lr = laplace_resolvent(&s, 2.0, &one, 15.0, 3000).unwrap();
        let exact = resolvent_shift(2.0, &one).unwrap();
        for x in [8.0, 12.0, 19.0] {
            assert_abs_diff_eq!(lr.value.interpolate(x).unwrap(), 0.5, epsilon = 1e-3);
            assert_abs_diff_eq!(exact.interpolate(x).unwrap(), 0.5, epsilon = 1e-6);
        }

        assert!(laplace_resolvent(&s, 0.0, &one, 15.0, 10).is_err());
        assert!(laplace_resolvent(&s, 1.0, &one, -1.0, 10).is_err());
    }

    #[test]
    fn laplace_resolvent_right_translation() {
        let g = Grid::new(-10.0, 0.0, 2000).unwrap();
        let s = RightTranslationSemigroup::new(g);
        let a = right_translation_generator(g).unwrap();
        let f = GridFunction::from_fn(g, |x| (x * 0.7).cos());
        let lr = laplace_resolvent(&s, 1.0, &f, 20.0, 4000).unwrap();
        let exact = a.resolvent(1.0, &f).unwrap();
        assert!(lr.value.distance(&exact) <= 1e-4 + lr.tail_bound);
    }

    #[test]
    fn orbit_residual_examples() {
        let g = Grid::new(0.0, 5.0, 2000).unwrap();
        let a = left_shift_generator(g).unwrap();
        let s = ShiftSemigroup::new(g);
        let f = sin2_bump(g, 1.0);
        let r = orbit_integral_residual(&a, &s, 0.5, &f, 2000).unwrap();
        assert!(r <= 1e-3 * f.sup_norm(), "residual {r}");
        let r0 = orbit_integral_residual(&a, &s, 1e-6, &f, 2000).unwrap();
        assert!(r0 <= 1e-6 * f.sup_norm(), "residual {r0}");
        assert_eq!(orbit_integral_residual(&a, &s, 0.5, &GridFunction::zeros(g), 10).unwrap(), 0.0);
    }

    #[test]
    fn sequential_and_parallel_sums_agree_bitwise() {
        let g = Grid::new(0.0, 20.0, 800).unwrap();
        let s = ShiftSemigroup::new(g);
        let f = sin2_bump(g, 3.0);
        let a = laplace_resolvent(&s, 1.0, &f, 15.0, 500).unwrap().value;
        let b = parallel::sequential(|| laplace_resolvent(&s, 1.0, &f, 15.0, 500).unwrap().value);
        assert_eq!(a, b);
    }
}
