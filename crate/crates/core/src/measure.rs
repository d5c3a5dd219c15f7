//! The time kernel `K(dt) = f(t) dt` of a Doléans-type measure `μ = P ⊗ K`
//! on `Ω × [0, T]`, with exact per-realization `L^p` integrals for step paths.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Error, Result};
use crate::path::StepPath;
use crate::vector::norm_pow;

/// Deterministic kernel density `f(t) ≥ 0`.
#[derive(Clone)]
pub enum Density {
    Constant(f64),
    /// Scalar step path; read on open intervals, so its side is irrelevant.
    Step(StepPath),
    /// Arbitrary density. Valid as a measure but not integrable exactly.
    Function(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Density::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            Density::Step(p) => f.debug_tuple("Step").field(p).finish(),
            Density::Function(_) => f.write_str("Function(..)"),
        }
    }
}

/// `μ = P ⊗ K` on `[0, T]` together with the exponent `p` of the `L^p` space.
#[derive(Debug, Clone)]
pub struct DoleansMeasure {
    horizon: f64,
    density: Density,
    p: f64,
}

impl DoleansMeasure {
    pub fn new(horizon: f64, density: Density, p: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return domain(format!("horizon must be positive and finite, got {horizon}"));
        }
        if !(p >= 1.0 && p.is_finite()) {
            return domain(format!("exponent p must be >= 1, got {p}"));
        }
        match &density {
            Density::Constant(c) if !(*c >= 0.0 && c.is_finite()) => {
                return domain(format!("density must be finite and nonnegative, got {c}"));
            }
            Density::Step(f) => {
                if f.dim() != 1 {
                    return domain("step density must be scalar");
                }
                if f.horizon() != horizon {
                    return domain("step density horizon differs from the measure horizon");
                }
                if (0..f.piece_count()).any(|i| !(f.piece(i)[0] >= 0.0 && f.piece(i)[0].is_finite())) {
                    return domain("step density takes a negative or non-finite value");
                }
            }
            _ => {}
        }
        Ok(DoleansMeasure { horizon, density, p })
    }

    /// Lebesgue measure on `[0, T]`.
    pub fn lebesgue(horizon: f64, p: f64) -> Result<Self> {
        Self::new(horizon, Density::Constant(1.0), p)
    }

    pub fn constant(horizon: f64, c: f64, p: f64) -> Result<Self> {
        Self::new(horizon, Density::Constant(c), p)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn with_p(&self, p: f64) -> Result<Self> {
        Self::new(self.horizon, self.density.clone(), p)
    }

    /// `K([a, b])` for `0 ≤ a ≤ b ≤ T`.
    pub fn mass(&self, a: f64, b: f64) -> Result<f64> {
        if !(0.0 <= a && a <= b && b <= self.horizon) {
            return domain(format!("interval [{a}, {b}] not inside [0, {}]", self.horizon));
        }
        match &self.density {
            Density::Constant(c) => Ok(c * (b - a)),
            Density::Step(f) => Ok(f.integral_to(b)?[0] - f.integral_to(a)?[0]),
            Density::Function(_) => Err(Error::UnsupportedDensity),
        }
    }
}

/// `∫_0^T ‖Φ_t‖^p f(t) dt` for one realization, summed exactly over the
/// constancy intervals of the path and the density.
pub fn exact_lp_integral(path: &StepPath, measure: &DoleansMeasure) -> Result<f64> {
    if path.horizon() != measure.horizon {
        return domain(format!(
            "path horizon {} differs from measure horizon {}",
            path.horizon(),
            measure.horizon
        ));
    }
    let p = measure.p;
    match &measure.density {
        Density::Constant(c) => {
            let s: f64 = path
                .intervals()
                .map(|(a, b, i)| norm_pow(path.piece(i), p) * (b - a))
                .sum();
            Ok(c * s)
        }
        Density::Step(f) => {
            let joint = path.zip_with(f, |v, d| vec![norm_pow(v, p) * d[0]])?;
            Ok(joint.intervals().map(|(a, b, i)| joint.piece(i)[0] * (b - a)).sum())
        }
        Density::Function(_) => Err(Error::UnsupportedDensity),
    }
}

/// `∫ ‖a - b‖^p dK`, the per-realization `L^p(μ)` distance raised to `p`.
pub fn exact_lp_distance(a: &StepPath, b: &StepPath, measure: &DoleansMeasure) -> Result<f64> {
    exact_lp_integral(&a.sub(b)?, measure)
}
