//! Compact-open seminorm families and mixed seminorms built from them.
//!
//! `p_n(f)` is the sup of `|f|` over the n-th window; windows are nested, so
//! `p_n <= p_{n+1}`. A mixed seminorm is `sup_n a_n p_n(f)` for a finite,
//! explicitly stored weight vector. Families are truncated at `max_index`;
//! every check that uses one reports the truncation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// A finite family of seminorms indexed `1..=len()` on some state space.
pub trait SeminormFamily<S> {
    /// Human-readable name, recorded in check reports.
    fn name(&self) -> String;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn eval(&self, n: usize, f: &S) -> Result<f64>;
    /// `|sup_n p_n(f) - ‖f‖|`; zero when the family norms `f`.
    fn norming_residual(&self, f: &S) -> f64;
    /// Whether the largest seminorm is known to equal the norm on `f`'s space.
    fn covers(&self, f: &S) -> bool;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowOrientation {
    /// `[0, n]`
    Right,
    /// `[-n, 0]`
    Left,
    /// `[-n, n]`
    Symmetric,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompactSeminormFamily {
    orientation: WindowOrientation,
    max_index: usize,
}

impl CompactSeminormFamily {
    pub fn new(orientation: WindowOrientation, max_index: usize) -> Result<Self> {
        if max_index == 0 {
            return Err(Error::InvalidParameter("seminorm family needs max_index >= 1".into()));
        }
        Ok(Self { orientation, max_index })
    }

    pub fn orientation(&self) -> WindowOrientation {
        self.orientation
    }

    pub fn max_index(&self) -> usize {
        self.max_index
    }

    pub fn window(&self, n: usize) -> (f64, f64) {
        let r = n as f64;
        match self.orientation {
            WindowOrientation::Right => (0.0, r),
            WindowOrientation::Left => (-r, 0.0),
            WindowOrientation::Symmetric => (-r, r),
        }
    }

    fn check_index(&self, n: usize) -> Result<()> {
        if (1..=self.max_index).contains(&n) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: n, max: self.max_index })
        }
    }

    pub fn eval_pn(&self, n: usize, f: &GridFunction) -> Result<f64> {
        self.check_index(n)?;
        let (lo, hi) = self.window(n);
        f.window_sup(lo, hi)
    }
}

impl SeminormFamily<GridFunction> for CompactSeminormFamily {
    fn name(&self) -> String {
        let kind = match self.orientation {
            WindowOrientation::Right => "[0,n]",
            WindowOrientation::Left => "[-n,0]",
            WindowOrientation::Symmetric => "[-n,n]",
        };
        format!("compact-open sup over {kind}, n=1..{}", self.max_index)
    }

    fn len(&self) -> usize {
        self.max_index
    }

    fn eval(&self, n: usize, f: &GridFunction) -> Result<f64> {
        self.eval_pn(n, f)
    }

    fn norming_residual(&self, f: &GridFunction) -> f64 {
        norming_residual(self, f)
    }

    fn covers(&self, f: &GridFunction) -> bool {
        let (lo, hi) = self.window(self.max_index);
        let slack = f.grid().node_slack();
        lo <= f.grid().a() + slack && hi >= f.grid().b() - slack
    }
}

/// `|sup_n p_n(f) - ‖f‖_∞|` over the windows that meet the grid.
pub fn norming_residual(family: &CompactSeminormFamily, f: &GridFunction) -> f64 {
    let sup = (1..=family.max_index).filter_map(|n| family.eval_pn(n, f).ok()).fold(0.0, f64::max);
    (sup - f.sup_norm()).abs()
}

/// `sup_n a_n p_n(f)` with an explicit weight vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixedSeminorm {
    weights: Vec<f64>,
    family: CompactSeminormFamily,
}

impl MixedSeminorm {
    pub fn new(weights: Vec<f64>, family: CompactSeminormFamily) -> Result<Self> {
        if weights.len() != family.max_index {
            return Err(Error::InvalidWeights(format!(
                "{} weights for a family of {} seminorms",
                weights.len(),
                family.max_index
            )));
        }
        if weights.iter().any(|a| !(a.is_finite() && *a >= 0.0)) {
            return Err(Error::InvalidWeights("weights must be finite and nonnegative".into()));
        }
        if weights.iter().all(|a| *a == 0.0) {
            return Err(Error::InvalidWeights("at least one weight must be positive".into()));
        }
        Ok(Self { weights, family })
    }

    /// Weights `a_n = f(n)` for `n = 1..=N`.
    pub fn from_fn(family: CompactSeminormFamily, f: impl Fn(usize) -> f64) -> Result<Self> {
        Self::new((1..=family.max_index).map(f).collect(), family)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn family(&self) -> &CompactSeminormFamily {
        &self.family
    }

    pub fn eval(&self, f: &GridFunction) -> Result<f64> {
        let mut best = 0.0f64;
        for (i, a) in self.weights.iter().enumerate() {
            best = best.max(a * self.family.eval_pn(i + 1, f)?);
        }
        Ok(best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use approx::assert_abs_diff_eq;

    fn right(n: usize) -> CompactSeminormFamily {
        CompactSeminormFamily::new(WindowOrientation::Right, n).unwrap()
    }

    #[test]
    fn eval_pn_examples() {
        let g = Grid::new(0.0, 10.0, 1000).unwrap();
        assert_eq!(right(10).eval_pn(3, &GridFunction::constant(g, 1.0)).unwrap(), 1.0);
        assert_eq!(right(10).eval_pn(1, &GridFunction::from_fn(g, |x| (-x).exp())).unwrap(), 1.0);

        let sym = CompactSeminormFamily::new(WindowOrientation::Symmetric, 2).unwrap();
        let g = Grid::new(-2.0, 2.0, 4000).unwrap();
        assert_abs_diff_eq!(sym.eval_pn(2, &GridFunction::from_fn(g, |x| x * x)).unwrap(), 4.0, epsilon = 1e-12);
    }

    #[test]
    fn eval_pn_rejects_bad_index() {
        let g = Grid::new(0.0, 10.0, 10).unwrap();
        let f = GridFunction::zeros(g);
        assert!(matches!(right(3).eval_pn(0, &f), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(right(3).eval_pn(4, &f), Err(Error::IndexOutOfRange { index: 4, max: 3 })));
    }

    #[test]
    fn mixed_examples() {
        let g = Grid::new(0.0, 10.0, 1000).unwrap();
        let fam = right(10);
        let inv = MixedSeminorm::from_fn(fam, |n| 1.0 / n as f64).unwrap();
        assert_eq!(inv.eval(&GridFunction::constant(g, 1.0)).unwrap(), 1.0);
        assert_eq!(inv.eval(&GridFunction::zeros(g)).unwrap(), 0.0);

        // brute force: max_n n / n^2
        let f = GridFunction::from_fn(g, |x| x);
        let inv_sq = MixedSeminorm::from_fn(fam, |n| 1.0 / (n * n) as f64).unwrap();
        let brute = (1..=10).map(|n| n as f64 / (n * n) as f64).fold(0.0, f64::max);
        assert_abs_diff_eq!(inv_sq.eval(&f).unwrap(), brute, epsilon = 1e-12);
        assert_abs_diff_eq!(brute, 1.0);
    }

    #[test]
    fn mixed_weights_validated() {
        let fam = right(3);
        assert!(MixedSeminorm::new(vec![1.0, 0.5], fam).is_err());
        assert!(MixedSeminorm::new(vec![1.0, -0.5, 0.0], fam).is_err());
        assert!(MixedSeminorm::new(vec![0.0; 3], fam).is_err());
        assert!(MixedSeminorm::new(vec![0.0, 0.0, 0.1], fam).is_ok());
    }

    #[test]
    fn norming_residual_examples() {
        let g = Grid::new(0.0, 10.0, 1000).unwrap();
        let f = GridFunction::from_fn(g, |x| x);
        assert_eq!(norming_residual(&right(10), &f), 0.0);
        assert!(right(10).covers(&f));
        assert_abs_diff_eq!(norming_residual(&right(5), &f), 5.0, epsilon = 1e-12);
        assert!(!right(5).covers(&f));

        let g3 = Grid::new(0.0, 3.0, 30).unwrap();
        assert_eq!(norming_residual(&right(3), &GridFunction::constant(g3, 5.0)), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn gf() -> impl Strategy<Value = GridFunction> {
            proptest::collection::vec(-5.0..5.0f64, 101)
                .prop_map(|v| GridFunction::new(Grid::new(0.0, 10.0, 100).unwrap(), v).unwrap())
        }

        proptest! {
            #[test]
            fn monotone_in_index(f in gf()) {
                let fam = right(10);
                for n in 1..10 {
                    prop_assert!(fam.eval_pn(n, &f).unwrap() <= fam.eval_pn(n + 1, &f).unwrap());
                }
            }

            #[test]
            fn seminorm_axioms(f in gf(), g in gf(), alpha in -4.0..4.0f64, w in proptest::collection::vec(0.0..1.0f64, 10)) {
                let fam = right(10);
                let mut w = w;
                w[0] += 0.1;
                let mixed = MixedSeminorm::new(w, fam).unwrap();
                let sum = f.combine(1.0, &g, 1.0).unwrap();
                let scaled = f.scaled(alpha);
                for n in 1..=10 {
                    let pf = fam.eval_pn(n, &f).unwrap();
                    let pg = fam.eval_pn(n, &g).unwrap();
                    prop_assert!(fam.eval_pn(n, &sum).unwrap() <= pf + pg + 1e-12);
                    prop_assert!((fam.eval_pn(n, &scaled).unwrap() - alpha.abs() * pf).abs() <= 1e-12);
                }
                let (mf, mg) = (mixed.eval(&f).unwrap(), mixed.eval(&g).unwrap());
                prop_assert!(mixed.eval(&sum).unwrap() <= mf + mg + 1e-12);
                prop_assert!((mixed.eval(&scaled).unwrap() - alpha.abs() * mf).abs() <= 1e-12);
            }

            /// If p_n(y) >= λ p_n(x) for every n, the same holds for every
            /// mixed seminorm built on the family.
            #[test]
            fn dissipativity_transfers_to_mixed(x in gf(), noise in gf(), lambda in 0.1..5.0f64, w in proptest::collection::vec(0.0..2.0f64, 10)) {
                let fam = right(10);
                // |y| = λ|x| + |noise| pointwise wherever x != 0
                let vals = x.values().iter().zip(noise.values())
                    .map(|(a, e)| lambda * a + a.signum() * e.abs())
                    .collect();
                let y = GridFunction::new(*x.grid(), vals).unwrap();
                for n in 1..=10 {
                    prop_assert!(fam.eval_pn(n, &y).unwrap() >= lambda * fam.eval_pn(n, &x).unwrap() - 1e-12);
                }
                let mut w = w;
                w[9] += 0.01;
                let mixed = MixedSeminorm::new(w, fam).unwrap();
                prop_assert!(mixed.eval(&y).unwrap() >= lambda * mixed.eval(&x).unwrap() - 1e-12);
            }
        }
    }
}
