use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{Vector, MAX_DIM};
use crate::rng;

/// Largest number of stored fine increments (steps × dimension).
pub const MAX_LATTICE_ENTRIES: usize = 1 << 28;

/// Gaussian increments of an ambient Brownian motion on a dyadic grid.
///
/// The fine grid has `fine_steps` (a power of two) steps over `[0, T]`; each
/// increment is `N(0, (T/fine_steps)·I)`. Coarser grids are obtained by
/// pairwise summation, so every coarse increment is the exact floating-point
/// sum of its two children on the next finer grid.
#[derive(Debug, Clone, PartialEq)]
pub struct BrownianLattice {
    seed: u64,
    horizon: f64,
    fine_steps: usize,
    dim: usize,
    increments: Vec<f64>,
}

/// Increments of one grid level.
#[derive(Debug, Clone, PartialEq)]
pub struct Increments {
    steps: usize,
    dim: usize,
    step_size: f64,
    data: Vec<f64>,
}

impl Increments {
    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn step_size(&self) -> f64 {
        self.step_size
    }

    pub fn get(&self, k: usize) -> Vector {
        Vector::from_slice(&self.data[k * self.dim..(k + 1) * self.dim])
    }

    /// Pairwise-summed increments of the grid with half as many steps.
    pub fn halve(&self) -> Increments {
        let steps = self.steps / 2;
        let d = self.dim;
        let mut data = Vec::with_capacity(steps * d);
        for k in 0..steps {
            for i in 0..d {
                data.push(self.data[2 * k * d + i] + self.data[(2 * k + 1) * d + i]);
            }
        }
        Increments { steps, dim: d, step_size: 2.0 * self.step_size, data }
    }
}

impl BrownianLattice {
    pub fn generate(seed: u64, horizon: f64, fine_steps: usize, dim: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidParameter { name: "horizon" });
        }
        if fine_steps == 0 || !fine_steps.is_power_of_two() {
            return Err(Error::InvalidParameter { name: "fine_steps" });
        }
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidParameter { name: "dim" });
        }
        if fine_steps.checked_mul(dim).map_or(true, |e| e > MAX_LATTICE_ENTRIES) {
            return Err(Error::InvalidParameter { name: "fine_steps" });
        }
        let sd = (horizon / fine_steps as f64).sqrt();
        let mut stream = rng::stream(seed);
        let increments = (0..fine_steps * dim).map(|_| sd * rng::standard_normal(&mut stream)).collect();
        Ok(BrownianLattice { seed, horizon, fine_steps, dim, increments })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn fine_steps(&self) -> usize {
        self.fine_steps
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fine(&self) -> Increments {
        Increments {
            steps: self.fine_steps,
            dim: self.dim,
            step_size: self.horizon / self.fine_steps as f64,
            data: self.increments.clone(),
        }
    }

    /// Increments on the grid with `steps` steps, which must be a power of two
    /// not exceeding `fine_steps`.
    pub fn coarsen(&self, steps: usize) -> Result<Increments> {
        if steps == 0 || !steps.is_power_of_two() || steps > self.fine_steps {
            return Err(Error::LevelMismatch { level: steps, fine: self.fine_steps });
        }
        let mut inc = self.fine();
        while inc.steps > steps {
            inc = inc.halve();
        }
        Ok(inc)
    }

    /// `W_T − W_0`, the single increment of the one-step grid.
    pub fn total(&self) -> Vector {
        self.coarsen(1).map(|i| i.get(0)).unwrap_or_else(|_| Vector::zeros(self.dim))
    }
}
