//! Predictable versions of adapted paths.
//!
//! Three constructions are provided: the left-limit projection `Φ ↦ Φ_-`,
//! which is exact for càdlàg paths; the dyadic shift
//! `Φ^n_t = Φ_{s + θ_n(t - s)}`, which works for any adapted path and
//! converges to it in `L^p(μ)` as `n → ∞`; and the radial truncation
//! `Φ ↦ Φ · min(1, n/‖Φ‖)` that reduces to bounded integrands.
//! Equality `μ`-almost everywhere is decided by exact interval integration.

use crate::error::{domain, Result};
use crate::measure::{exact_lp_integral, DoleansMeasure};
use crate::path::{Side, StepPath};
use crate::vector::{norm, Vector};

/// `θ_n(t) = (j - 1)/2^n` for the unique `j` with `t ∈ ((j-1)/2^n, j/2^n]`.
pub fn theta(level: u32, t: f64) -> f64 {
    let scale = f64::from(level).exp2();
    ((t * scale).ceil() - 1.0) / scale
}

/// Resolution `n` and anchor `s` of a dyadic approximation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicApproxParams {
    level: u32,
    anchor: f64,
}

impl DyadicApproxParams {
    pub fn new(level: u32, anchor: f64) -> Result<Self> {
        if level > 60 {
            return domain(format!("dyadic level {level} exceeds 60"));
        }
        if !(anchor >= 0.0 && anchor.is_finite()) {
            return domain(format!("anchor must be a nonnegative finite time, got {anchor}"));
        }
        Ok(DyadicApproxParams { level, anchor })
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn anchor(&self) -> f64 {
        self.anchor
    }

    pub fn cell_width(&self) -> f64 {
        (-f64::from(self.level)).exp2()
    }
}

// Φ extended by zero outside [0, T].
fn extended_value(path: &StepPath, u: f64) -> Vector {
    if (0.0..=path.horizon()).contains(&u) {
        Vector::from(path.value(u).expect("time checked against horizon"))
    } else {
        Vector::zeros(path.dim())
    }
}

/// `Φ_{s + θ_n(t - s)}` evaluated pointwise.
pub fn dyadic_value(path: &StepPath, params: &DyadicApproxParams, t: f64) -> Vector {
    let s = params.anchor;
    extended_value(path, s + theta(params.level, t - s))
}

/// The dyadic approximation as a left-continuous step path: on each cell
/// `(s + (j-1)/2^n, s + j/2^n]` it takes the value of the input at the left
/// endpoint, and zero where that endpoint lies before time 0.
pub fn dyadic_shift(path: &StepPath, params: &DyadicApproxParams) -> Result<StepPath> {
    let horizon = path.horizon();
    let s = params.anchor;
    if s > horizon {
        return domain(format!("anchor {s} beyond horizon {horizon}"));
    }
    let h = params.cell_width();
    let mut k = (-s / h).ceil() as i64;
    let mut events = Vec::new();
    loop {
        let a = s + k as f64 * h;
        if a >= horizon {
            break;
        }
        if a >= 0.0 {
            events.push((a, extended_value(path, a)));
        }
        k += 1;
    }
    StepPath::left_continuous(horizon, Vector::zeros(path.dim()), events)
}

/// Radial truncation level `n ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationSpec {
    level: f64,
}

impl TruncationSpec {
    pub fn new(level: f64) -> Result<Self> {
        if level.is_nan() || level < 1.0 {
            return domain(format!("truncation level must be >= 1, got {level}"));
        }
        Ok(TruncationSpec { level })
    }

    pub fn level(&self) -> f64 {
        self.level
    }
}

/// Replace every value `v` by `v · min(1, n/‖v‖)`.
pub fn truncate(path: &StepPath, spec: &TruncationSpec) -> StepPath {
    let n = spec.level;
    path.map(|v| {
        let r = norm(v);
        if r <= n {
            v.to_vec()
        } else {
            v.iter().map(|x| x * n / r).collect()
        }
    })
}

/// The predictable projection of a càdlàg path, `t ↦ Φ(t-)`, returned as the
/// left-continuous reading of the same events.
pub fn project_left_limit(path: &StepPath) -> StepPath {
    path.with_side(Side::Left)
}

/// Result of an `L^p(μ)` comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AeComparison {
    /// `∫ ‖a - b‖^p dK` for the realization.
    pub distance: f64,
    pub equal: bool,
}

/// Decide `a = b` `μ`-a.e. up to `tol` by exact interval integration.
pub fn mu_ae_equal(a: &StepPath, b: &StepPath, mu: &DoleansMeasure, tol: f64) -> Result<AeComparison> {
    if a.horizon() != b.horizon() || a.horizon() != mu.horizon() {
        return domain("paths and measure must share one horizon");
    }
    let distance = exact_lp_integral(&a.sub(b)?, mu)?;
    Ok(AeComparison { distance, equal: distance <= tol })
}
