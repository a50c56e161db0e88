use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::geometry::{check_on_manifold, Manifold};
use crate::linalg::Vector;

/// Largest cloud size accepted by [`wasserstein_p`].
pub const MAX_POINTS: usize = 1024;

/// An equally weighted point cloud.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<Vector>,
    tag: Option<&'static str>,
}

impl EmpiricalMeasure {
    pub fn new(points: Vec<Vector>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::TooFewEntries { needed: 1, got: 0 });
        }
        let n = points[0].len();
        if let Some(p) = points.iter().find(|p| p.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.len() });
        }
        Ok(EmpiricalMeasure { points, tag: None })
    }

    /// A cloud whose points are all checked for membership in `m`.
    pub fn on_manifold(m: &(impl Manifold + ?Sized), points: Vec<Vector>, tag: &'static str) -> Result<Self> {
        for p in &points {
            check_on_manifold(m, p)?;
        }
        let mut out = Self::new(points)?;
        out.tag = Some(tag);
        Ok(out)
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn tag(&self) -> Option<&'static str> {
        self.tag
    }

    pub fn mean(&self) -> Vector {
        let n = self.points[0].len();
        let sum = self.points.iter().fold(Vector::zeros(n), |acc, p| acc + *p);
        sum.scale(1.0 / self.points.len() as f64)
    }
}

/// Ground metric for transport costs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundMetric {
    /// Ambient Euclidean distance.
    Extrinsic,
    /// Great-circle distance `arccos⟨x, y⟩` between unit vectors.
    Spherical,
}

impl GroundMetric {
    pub fn distance(self, x: &Vector, y: &Vector) -> f64 {
        match self {
            GroundMetric::Extrinsic => x.distance(y),
            GroundMetric::Spherical => x.dot(y).clamp(-1.0, 1.0).acos(),
        }
    }
}

/// Exact empirical `W_p` between equal-size clouds via optimal assignment.
pub fn wasserstein_p(mu: &EmpiricalMeasure, nu: &EmpiricalMeasure, p: u32, metric: GroundMetric) -> Result<f64> {
    if mu.len() != nu.len() {
        return Err(Error::SizeMismatch { left: mu.len(), right: nu.len() });
    }
    if mu.len() > MAX_POINTS {
        return Err(Error::TooManyPoints { size: mu.len(), cap: MAX_POINTS });
    }
    if p != 1 && p != 2 {
        return Err(Error::InvalidParameter { name: "p" });
    }
    let n = mu.len();
    let mut cost = Vec::with_capacity(n * n);
    for x in mu.points() {
        for y in nu.points() {
            cost.push(metric.distance(x, y).powi(p as i32));
        }
    }
    let assignment = min_cost_assignment(&cost, n);
    Ok((assignment_cost(&cost, n, &assignment) / n as f64).powf(1.0 / p as f64))
}

/// `Σᵢ cost[i][σ(i)]`, summed in row order.
pub fn assignment_cost(cost: &[f64], n: usize, assignment: &[usize]) -> f64 {
    (0..n).map(|i| cost[i * n + assignment[i]]).sum()
}

/// Minimum-cost perfect matching for a row-major `n × n` cost matrix
/// (Hungarian method with potentials, `O(n³)`). Returns the column assigned
/// to each row.
pub fn min_cost_assignment(cost: &[f64], n: usize) -> Vec<usize> {
    assert_eq!(cost.len(), n * n);
    if n == 0 {
        return Vec::new();
    }
    // 1-based arrays; column 0 is a virtual start column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0; n + 1];
    let mut used = vec![false; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        minv.iter_mut().for_each(|m| *m = f64::INFINITY);
        used.iter_mut().for_each(|b| *b = false);
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            let row = &cost[(i0 - 1) * n..i0 * n];
            for j in 1..=n {
                if !used[j] {
                    let cur = row[j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0usize; n];
    for j in 1..=n {
        out[row_of[j] - 1] = j - 1;
    }
    out
}
