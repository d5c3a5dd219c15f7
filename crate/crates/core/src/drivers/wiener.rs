use std::sync::Arc;

use rand_distr::{Distribution, StandardNormal};

use super::Seed;
use crate::error::{domain, Result};
use crate::grid::TimeGrid;
use crate::path::SampledPath;

/// Diagonal trace-class covariance `Q e_j = λ_j e_j` truncated to the
/// supplied eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct QSpec {
    eigenvalues: Vec<f64>,
}

impl QSpec {
    pub fn new(eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.is_empty() {
            return domain("Q needs at least one eigenvalue");
        }
        if let Some(l) = eigenvalues.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
            return domain(format!("eigenvalues must be positive and finite, got {l}"));
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) {
            return domain("eigenvalues must be non-increasing");
        }
        Ok(QSpec { eigenvalues })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn trace(&self) -> f64 {
        self.eigenvalues.iter().sum()
    }
}

/// Scalar Wiener path with `Var(W_t) = rate · t`.
pub fn simulate_wiener(grid: &Arc<TimeGrid>, rate: f64, seed: Seed) -> Result<SampledPath> {
    if !(rate > 0.0 && rate.is_finite()) {
        return domain(format!("Wiener variance rate must be positive, got {rate}"));
    }
    let mut rng = seed.rng();
    let pts = grid.points();
    let mut data = Vec::with_capacity(pts.len());
    let mut w = 0.0;
    data.push(w);
    for cell in pts.windows(2) {
        let z: f64 = StandardNormal.sample(&mut rng);
        w += (rate * (cell[1] - cell[0])).sqrt() * z;
        data.push(w);
    }
    Ok(SampledPath::from_flat(grid.clone(), 1, data))
}

/// Q-Wiener path `W_t = Σ_j √λ_j β_j(t) e_j` with independent standard
/// Brownian coordinates `β_j`.
pub fn simulate_q_wiener(grid: &Arc<TimeGrid>, q: &QSpec, seed: Seed) -> SampledPath {
    let mut rng = seed.rng();
    let d = q.modes();
    let scale: Vec<f64> = q.eigenvalues.iter().map(|l| l.sqrt()).collect();
    let pts = grid.points();
    let mut data = Vec::with_capacity(pts.len() * d);
    data.extend(std::iter::repeat_n(0.0, d));
    for (k, cell) in pts.windows(2).enumerate() {
        let sdt = (cell[1] - cell[0]).sqrt();
        for j in 0..d {
            let z: f64 = StandardNormal.sample(&mut rng);
            let prev = data[k * d + j];
            data.push(prev + scale[j] * sdt * z);
        }
    }
    SampledPath::from_flat(grid.clone(), d, data)
}
