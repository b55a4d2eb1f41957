use alloc::vec;
use alloc::vec::Vec;

/// Numbering of free DOFs; constrained DOFs are fixed at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    slots: Vec<Option<usize>>,
    n_free: usize,
}

impl DofMap {
    pub fn new(n_full: usize, fixed: impl Fn(usize) -> bool) -> Self {
        let mut n_free = 0;
        let slots = (0..n_full)
            .map(|i| {
                if fixed(i) {
                    None
                } else {
                    n_free += 1;
                    Some(n_free - 1)
                }
            })
            .collect();
        Self { slots, n_free }
    }

    pub fn n_full(&self) -> usize {
        self.slots.len()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    #[inline]
    pub fn free(&self, i: usize) -> Option<usize> {
        self.slots[i]
    }

    /// Scatters reduced values into a full vector, zero at fixed DOFs.
    pub fn expand(&self, reduced: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.slots.len()];
        for (o, s) in out.iter_mut().zip(&self.slots) {
            if let Some(k) = s {
                *o = reduced[*k];
            }
        }
        out
    }

    /// Gathers the free entries of a full vector.
    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_free];
        for (v, s) in full.iter().zip(&self.slots) {
            if let Some(k) = s {
                out[*k] = *v;
            }
        }
        out
    }
}

/// Subtracts from each component its weighted mean. `component(i)` names the
/// kernel component DOF `i` belongs to (`None` for DOFs outside the kernel,
/// e.g. slopes), and `weights[i] = ∫ φᵢ`.
pub fn project_mean_zero(
    values: &mut [f64],
    weights: &[f64],
    n_components: usize,
    component: impl Fn(usize) -> Option<usize>,
) {
    let mut num = vec![0.0; n_components];
    let mut den = vec![0.0; n_components];
    for (i, v) in values.iter().enumerate() {
        if let Some(c) = component(i) {
            num[c] += weights[i] * v;
            den[c] += weights[i];
        }
    }
    for (i, v) in values.iter_mut().enumerate() {
        if let Some(c) = component(i) {
            if den[c] > 0.0 {
                *v -= num[c] / den[c];
            }
        }
    }
}
