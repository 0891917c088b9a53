use crate::grid::GridFunction;

/// Minimal linear structure needed by the generic semigroup machinery.
///
/// `norm` is the Banach-space norm of the concrete space: the discrete
/// sup-norm for [`GridFunction`], the sup over `x` of the ℓ¹ edge sum for
/// network states.
pub trait VectorState: Clone + Send + Sync {
    fn zeros_like(&self) -> Self;
    /// `self += alpha * x`
    fn axpy(&mut self, alpha: f64, x: &Self);
    fn scale_mut(&mut self, alpha: f64);
    fn norm(&self) -> f64;
    /// Norm of `self - other`.
    fn distance(&self, other: &Self) -> f64 {
        let mut d = self.clone();
        d.axpy(-1.0, other);
        d.norm()
    }
}

impl VectorState for GridFunction {
    fn zeros_like(&self) -> Self {
        GridFunction::zeros(*self.grid())
    }

    fn axpy(&mut self, alpha: f64, x: &Self) {
        assert_eq!(self.grid(), x.grid(), "axpy on mismatched grids");
        for (a, b) in self.values_mut().iter_mut().zip(x.values()) {
            *a += alpha * b;
        }
    }

    fn scale_mut(&mut self, alpha: f64) {
        for a in self.values_mut() {
            *a *= alpha;
        }
    }

    fn norm(&self) -> f64 {
        self.sup_norm()
    }
}
