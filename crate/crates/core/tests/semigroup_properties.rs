use proptest::prelude::*;
use semigroup_lab::operators::{left_shift_generator, resolvent_shift, upwind_discretize};
use semigroup_lab::samples::{function_library, reference_bump};
use semigroup_lab::semigroups::{euler_apply, laplace_resolvent, RightTranslationSemigroup, ShiftSemigroup};
use semigroup_lab::{Grid, GridFunction, Semigroup, VectorState};

fn lipschitz(f: &GridFunction) -> f64 {
    let h = f.grid().spacing();
    f.values().windows(2).map(|w| (w[1] - w[0]).abs() / h).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn shift_semigroup_law_and_contraction(seed in any::<u64>(), s in 0.0..4.0f64, t in 0.0..4.0f64) {
        let grid = Grid::new(0.0, 10.0, 1000).unwrap();
        let sg = ShiftSemigroup::new(grid);
        for sample in function_library(grid, 4, seed) {
            let f = &sample.f;
            let direct = sg.apply(s + t, f).unwrap();
            let composed = sg.apply(t, &sg.apply(s, f).unwrap()).unwrap();
            prop_assert!(direct.distance(&composed) <= 2.0 * grid.spacing() * lipschitz(f));
            prop_assert!(direct.sup_norm() <= f.sup_norm());
        }
    }

    #[test]
    fn right_translation_is_a_contraction(seed in any::<u64>(), t in 0.0..8.0f64) {
        let grid = Grid::new(-10.0, 0.0, 1000).unwrap();
        let sg = RightTranslationSemigroup::new(grid);
        for sample in function_library(grid, 4, seed) {
            prop_assert!(sg.apply(t, &sample.f).unwrap().sup_norm() <= sample.f.sup_norm());
        }
    }

    /// ‖(λ - A_h)⁻¹ g‖_∞ <= ‖g‖_∞ / λ for the upwind matrix.
    #[test]
    fn upwind_resolvent_bound(g in proptest::collection::vec(-5.0..5.0f64, 60), lambda in 0.01..50.0f64, h in 0.001..1.0f64) {
        let m = upwind_discretize("left_shift", g.len(), h).unwrap();
        let f = m.resolvent_apply(lambda, &g).unwrap();
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        prop_assert!(lambda * sup(&f) <= sup(&g) * (1.0 + 1e-12));
    }
}

#[test]
fn euler_single_step_is_scaled_resolvent() {
    let grid = Grid::new(0.0, 10.0, 1000).unwrap();
    let a = left_shift_generator(grid).unwrap();
    let f = reference_bump(grid);
    let e = euler_apply(&a, 0.5, 1, &f).unwrap();
    let r = resolvent_shift(2.0, &f).unwrap().scaled(2.0);
    assert!(e.distance(&r) <= 1e-14);
}

#[test]
fn laplace_resolvent_converges_with_steps() {
    let grid = Grid::new(0.0, 20.0, 2000).unwrap();
    let f = reference_bump(grid);
    let exact = resolvent_shift(1.0, &f).unwrap();
    let err = |steps| {
        let lr = laplace_resolvent(&ShiftSemigroup::new(grid), 1.0, &f, 15.0, steps).unwrap();
        lr.value.combine(1.0, &exact, -1.0).unwrap().window_sup(0.0, 5.0).unwrap()
    };
    let (coarse, fine) = (err(300), err(3000));
    assert!(fine < coarse && fine <= 1e-3, "{coarse} {fine}");
}
