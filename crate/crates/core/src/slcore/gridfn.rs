use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

use super::grid::Grid;

/// Complex samples of `u` and of its quasiderivative `p u'` on a grid.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<Complex64>,
    pub quasi: Vec<Complex64>,
    /// Set when `quasi` came from finite differences rather than from an
    /// ODE solution or an exact formula.
    pub approximate_quasi: bool,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<Complex64>, quasi: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() || quasi.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(GridFunction {
            grid,
            values,
            quasi,
            approximate_quasi: false,
        })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.len();
        GridFunction {
            grid,
            values: vec![Complex64::new(0.0, 0.0); n],
            quasi: vec![Complex64::new(0.0, 0.0); n],
            approximate_quasi: false,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || *self.grid == *other.grid
    }

    pub fn check_grid(&self, other: &GridFunction) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
            quasi: self.quasi.iter().map(|v| v * c).collect(),
            approximate_quasi: self.approximate_quasi,
        }
    }

    pub fn conj(&self) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v.conj()).collect(),
            quasi: self.quasi.iter().map(|v| v.conj()).collect(),
            approximate_quasi: self.approximate_quasi,
        }
    }

    /// `Σ c_i f_i` over functions on a common grid.
    pub fn lincomb(terms: &[(Complex64, &GridFunction)]) -> Result<GridFunction> {
        let first = terms
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty linear combination".into()))?
            .1;
        let mut out = GridFunction::zeros(first.grid.clone());
        for (c, f) in terms {
            first.check_grid(f)?;
            for k in 0..out.len() {
                out.values[k] += c * f.values[k];
                out.quasi[k] += c * f.quasi[k];
            }
            out.approximate_quasi |= f.approximate_quasi;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction> {
        let one = Complex64::new(1.0, 0.0);
        GridFunction::lincomb(&[(one, self), (-one, other)])
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// Cubic interpolation of `(u, p u')` at an arbitrary point.
    pub fn interpolate(&self, x: f64) -> (Complex64, Complex64) {
        let g = &self.grid;
        let n = g.len();
        if let Ok(k) = g.nodes.binary_search_by(|n| n.total_cmp(&x)) {
            return (self.values[k], self.quasi[k]);
        }
        let k = g.locate(x);
        let start = k.saturating_sub(1).min(n.saturating_sub(4));
        let idx: Vec<usize> = (start..(start + 4).min(n)).collect();
        let mut u = Complex64::new(0.0, 0.0);
        let mut v = Complex64::new(0.0, 0.0);
        for &i in &idx {
            let mut l = 1.0;
            for &j in &idx {
                if j != i {
                    l *= (x - g.nodes[j]) / (g.nodes[i] - g.nodes[j]);
                }
            }
            u += self.values[i] * l;
            v += self.quasi[i] * l;
        }
        (u, v)
    }
}
