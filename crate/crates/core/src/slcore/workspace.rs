use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;

use crate::error::Result;

use super::grid::{build_grid_with_breaks, Grid};
use super::problem::Problem;
use super::solve::{endpoint_solutions, solve_basis, SolutionPair};

/// Solutions keyed by the bit pattern of `z`. Reads run concurrently;
/// insertions take the write lock and keep the first value stored.
#[derive(Debug)]
pub struct SolutionCache {
    map: RwLock<HashMap<(u64, u64), Arc<SolutionPair>>>,
    capacity: usize,
}

impl SolutionCache {
    pub fn new(capacity: usize) -> Self {
        SolutionCache {
            map: RwLock::new(HashMap::new()),
            capacity,
        }
    }

    fn key(z: Complex64) -> (u64, u64) {
        // Fold -0.0 onto 0.0 so that conj(x + 0i) hits the same entry.
        ((z.re + 0.0).to_bits(), (z.im + 0.0).to_bits())
    }

    pub fn get(&self, z: Complex64) -> Option<Arc<SolutionPair>> {
        self.map.read().expect("cache lock").get(&Self::key(z)).cloned()
    }

    pub fn get_or_solve(&self, prob: &Problem, grid: &Arc<Grid>, z: Complex64) -> Result<Arc<SolutionPair>> {
        if let Some(s) = self.get(z) {
            return Ok(s);
        }
        let sol = Arc::new(solve_basis(prob, z, grid)?);
        let mut map = self.map.write().expect("cache lock");
        if map.len() >= self.capacity && !map.contains_key(&Self::key(z)) {
            return Ok(sol);
        }
        Ok(map.entry(Self::key(z)).or_insert(sol).clone())
    }

    pub fn len(&self) -> usize {
        self.map.read().expect("cache lock").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A problem with a fixed truncation point, its grid and a solution cache.
#[derive(Debug)]
pub struct Workspace {
    prob: Problem,
    grid: Arc<Grid>,
    cache: SolutionCache,
}

/// Default number of cached solution pairs per workspace.
pub const DEFAULT_CACHE_CAPACITY: usize = 48;

impl Workspace {
    /// `z_ref_bound` bounds `|z|` for every later solve; `breaks` become
    /// pair-aligned grid nodes (cutoff endpoints).
    pub fn new(prob: Problem, z_ref_bound: f64, breaks: &[f64]) -> Result<Workspace> {
        let grid = Arc::new(build_grid_with_breaks(&prob, z_ref_bound, breaks)?);
        Ok(Workspace {
            prob,
            grid,
            cache: SolutionCache::new(DEFAULT_CACHE_CAPACITY),
        })
    }

    pub fn from_grid(prob: Problem, grid: Arc<Grid>) -> Workspace {
        Workspace {
            prob,
            grid,
            cache: SolutionCache::new(DEFAULT_CACHE_CAPACITY),
        }
    }

    pub fn problem(&self) -> &Problem {
        &self.prob
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn x_max(&self) -> f64 {
        self.grid.x_max()
    }

    pub fn cache(&self) -> &SolutionCache {
        &self.cache
    }

    /// Standard solutions at `z` on the workspace grid (cached).
    pub fn solutions(&self, z: Complex64) -> Result<Arc<SolutionPair>> {
        self.cache.get_or_solve(&self.prob, &self.grid, z)
    }

    /// Standard solutions at `z` without caching (for one-off spectral points).
    pub fn solve_uncached(&self, z: Complex64) -> Result<SolutionPair> {
        solve_basis(&self.prob, z, &self.grid)
    }

    /// `([phi, p phi'], [theta, p theta'])` at `X_max` only, integrated
    /// without sampling on the grid.
    pub fn endpoint_values(&self, z: Complex64) -> Result<([Complex64; 2], [Complex64; 2])> {
        if let Some(s) = self.cache.get(z) {
            let n = s.phi.len() - 1;
            return Ok(([s.phi.values[n], s.phi.quasi[n]], [s.theta.values[n], s.theta.quasi[n]]));
        }
        Ok(endpoint_solutions(&self.prob, z, &[self.x_max()])?[0])
    }
}
