//! Stochastic integrals.
//!
//! Every integral is built the same way: a predictable step integrand is
//! summed against driver increments ([`ito_simple`]); adapted integrands are
//! first replaced by a predictable version from [`crate::projection`]
//! ([`ito_extended`]). The pathwise Lebesgue–Stieltjes integral
//! ([`lebesgue_stieltjes`]) is kept alongside for comparison: it evaluates the
//! integrand at the jump itself instead of just before it.

mod prm;
mod qwiener;

use std::fmt;
use std::str::FromStr;

pub use prm::{prm_bracket, prm_integral, PrmIntegrand};
pub use qwiener::{hs_norm, qwiener_integral, HsOperator, OperatorStepFn};

use crate::drivers::MartingaleDriver;
use crate::error::{domain, Error, Result};
use crate::measure::{exact_lp_integral, DoleansMeasure};
use crate::path::{FvPath, SampledPath, Side, StepPath};
use crate::projection::{dyadic_shift, project_left_limit, DyadicApproxParams};

/// Driver of a scalar-indexed integral.
#[derive(Debug, Clone, Copy)]
pub enum Integrator<'a> {
    /// Grid-sampled martingale (Wiener, Q-Wiener).
    Sampled(&'a SampledPath),
    /// Finite-variation martingale such as `N_t - λ t`.
    FiniteVariation(&'a FvPath),
}

impl Integrator<'_> {
    fn horizon(&self) -> f64 {
        match self {
            Integrator::Sampled(w) => w.grid().t_end(),
            Integrator::FiniteVariation(m) => m.horizon(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Integrator::Sampled(w) => w.dim(),
            Integrator::FiniteVariation(m) => m.dim(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriverKind {
    Wiener,
    QWiener,
    CompensatedPoisson,
    PoissonRandomMeasure,
}

/// How the integrand was turned into a predictable one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Provenance {
    /// Integrand was already a predictable step function.
    Simple,
    LeftLimit,
    Dyadic { level: u32, anchor: f64 },
    /// Pathwise Lebesgue–Stieltjes sum, not an Itô integral.
    Pathwise,
}

/// Projection applied by [`ito_extended`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProjectionMode {
    LeftLimit,
    Dyadic(DyadicApproxParams),
}

impl ProjectionMode {
    pub fn provenance(&self) -> Provenance {
        match self {
            ProjectionMode::LeftLimit => Provenance::LeftLimit,
            ProjectionMode::Dyadic(p) => Provenance::Dyadic { level: p.level(), anchor: p.anchor() },
        }
    }
}

impl fmt::Display for ProjectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProjectionMode::LeftLimit => f.write_str("left_limit"),
            ProjectionMode::Dyadic(p) => write!(f, "dyadic:{}:{}", p.level(), p.anchor()),
        }
    }
}

/// Parses `left_limit`, `dyadic:<n>` or `dyadic:<n>:<s>`.
impl FromStr for ProjectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        match parts.next() {
            Some("left_limit") if parts.next().is_none() => Ok(ProjectionMode::LeftLimit),
            Some("dyadic") => {
                let level = parts
                    .next()
                    .ok_or_else(|| Error::Config("dyadic mode needs a level, e.g. dyadic:8".into()))?
                    .parse::<u32>()
                    .map_err(|e| Error::Config(format!("dyadic level: {e}")))?;
                let anchor = match parts.next() {
                    Some(a) => a.parse::<f64>().map_err(|e| Error::Config(format!("dyadic anchor: {e}")))?,
                    None => 0.0,
                };
                if parts.next().is_some() {
                    return Err(Error::Config(format!("unknown projection mode {s:?}")));
                }
                let params = DyadicApproxParams::new(level, anchor).map_err(|e| Error::Config(e.to_string()))?;
                Ok(ProjectionMode::Dyadic(params))
            }
            _ => Err(Error::Config(format!("unknown projection mode {s:?} (expected left_limit or dyadic:<n>[:<s>])"))),
        }
    }
}

/// Running integral `t ↦ I_t`.
#[derive(Debug, Clone, PartialEq)]
pub enum IntegralPath {
    Sampled(SampledPath),
    FiniteVariation(FvPath),
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegralProcess {
    pub path: IntegralPath,
    pub driver: DriverKind,
    pub provenance: Provenance,
}

impl IntegralProcess {
    pub fn dim(&self) -> usize {
        match &self.path {
            IntegralPath::Sampled(p) => p.dim(),
            IntegralPath::FiniteVariation(p) => p.dim(),
        }
    }

    pub fn horizon(&self) -> f64 {
        match &self.path {
            IntegralPath::Sampled(p) => p.grid().t_end(),
            IntegralPath::FiniteVariation(p) => p.horizon(),
        }
    }

    /// `I_t`; sampled integrals are read as càdlàg steps between grid points.
    pub fn value(&self, t: f64) -> Result<Vec<f64>> {
        match &self.path {
            IntegralPath::Sampled(p) => Ok(p.value_at(t)?.to_vec()),
            IntegralPath::FiniteVariation(p) => p.value(t),
        }
    }

    pub fn terminal(&self) -> Vec<f64> {
        self.value(self.horizon()).expect("horizon is in range")
    }

    /// `‖I_T‖²`.
    pub fn terminal_norm_sq(&self) -> f64 {
        self.terminal().iter().map(|x| x * x).sum()
    }
}

// Integrand value times driver increment. One side must be scalar.
fn output_dim(integrand: usize, driver: usize) -> Result<usize> {
    match (integrand, driver) {
        (d, 1) => Ok(d),
        (1, m) => Ok(m),
        (d, m) => Err(Error::DimensionMismatch { expected: d, found: m }),
    }
}

fn mul_into(out: &mut [f64], v: &[f64], x: &[f64]) {
    if x.len() == 1 {
        for (o, a) in out.iter_mut().zip(v) {
            *o += a * x[0];
        }
    } else {
        for (o, b) in out.iter_mut().zip(x) {
            *o += v[0] * b;
        }
    }
}

fn ensure_predictable(integrand: &StepPath) -> Result<()> {
    if integrand.side() == Side::Left {
        return Ok(());
    }
    let jumps = (1..integrand.piece_count()).any(|i| integrand.piece(i) != integrand.piece(i - 1));
    if jumps {
        Err(Error::PredictabilityViolation(
            "integrand is right-continuous with jumps; its value on (u, v] is not fixed at u. \
             Project it first (left limit or dyadic shift)"
                .into(),
        ))
    } else {
        Ok(())
    }
}

/// Elementary Itô integral `I_t = Σ_i Φ_{t_i}(M_{t_{i+1}∧t} - M_{t_i∧t})` of a
/// predictable (left-continuous) step integrand.
///
/// For a sampled driver every integrand breakpoint must be a grid point
/// (refine the driver grid first). For a finite-variation driver
/// `M = J - ∫c` the result is `Σ_{τ≤t} Φ(τ-)ΔJ_τ - ∫_0^t Φ c ds`, exactly.
pub fn ito_simple(integrand: &StepPath, driver: Integrator<'_>) -> Result<IntegralProcess> {
    ensure_predictable(integrand)?;
    if integrand.horizon() != driver.horizon() {
        return domain(format!(
            "integrand horizon {} differs from driver horizon {}",
            integrand.horizon(),
            driver.horizon()
        ));
    }
    let dim = output_dim(integrand.dim(), driver.dim())?;
    match driver {
        Integrator::Sampled(w) => {
            let grid = w.grid();
            if let Some(t) = integrand.event_times().iter().find(|&&t| grid.index_of(t).is_none()) {
                return domain(format!("integrand breakpoint {t} is not a driver grid point; refine the grid"));
            }
            let pts = grid.points();
            let times = integrand.event_times();
            let mut data = Vec::with_capacity(pts.len() * dim);
            data.extend(std::iter::repeat_n(0.0, dim));
            let mut piece = 0;
            let mut acc = vec![0.0; dim];
            for (k, &t) in pts[..grid.cells()].iter().enumerate() {
                // value on (t_k, t_{k+1}] is the piece after the last event <= t_k
                while piece < times.len() && times[piece] <= t {
                    piece += 1;
                }
                mul_into(&mut acc, integrand.piece(piece), &w.increment(k));
                data.extend_from_slice(&acc);
            }
            Ok(IntegralProcess {
                path: IntegralPath::Sampled(SampledPath::from_flat(grid.clone(), dim, data)),
                driver: if w.dim() == 1 { DriverKind::Wiener } else { DriverKind::QWiener },
                provenance: Provenance::Simple,
            })
        }
        Integrator::FiniteVariation(m) => {
            let path = fv_integral(integrand, m, dim, |p, t| p.left_limit(t))?;
            Ok(IntegralProcess {
                path: IntegralPath::FiniteVariation(path),
                driver: DriverKind::CompensatedPoisson,
                provenance: Provenance::Simple,
            })
        }
    }
}

// Σ_τ eval(Φ, τ)·ΔJ_τ − ∫ Φ c ds as a finite-variation path.
fn fv_integral<'p>(
    integrand: &'p StepPath,
    m: &FvPath,
    dim: usize,
    eval: impl Fn(&'p StepPath, f64) -> Result<&'p [f64]>,
) -> Result<FvPath> {
    let jumps = m.jumps();
    let horizon = m.horizon();
    let mut pieces = vec![0.0; dim];
    let mut acc = vec![0.0; dim];
    for (i, &t) in jumps.event_times().iter().enumerate() {
        let dj: Vec<f64> = jumps.piece(i + 1).iter().zip(jumps.piece(i)).map(|(a, b)| a - b).collect();
        mul_into(&mut acc, eval(integrand, t)?, &dj);
        pieces.extend_from_slice(&acc);
    }
    let jump_part = StepPath::from_raw(horizon, dim, Side::Right, jumps.event_times().to_vec(), pieces);
    let rate = integrand.zip_with(m.compensator_rate(), |v, c| {
        let mut out = vec![0.0; dim];
        mul_into(&mut out, v, c);
        out
    })?;
    FvPath::new(jump_part, rate)
}

/// Itô integral of an adapted càdlàg integrand: project to a predictable
/// version, then integrate it with [`ito_simple`].
pub fn ito_extended(integrand: &StepPath, driver: Integrator<'_>, mode: ProjectionMode) -> Result<IntegralProcess> {
    let projected = match mode {
        ProjectionMode::LeftLimit => project_left_limit(integrand),
        ProjectionMode::Dyadic(params) => dyadic_shift(integrand, &params)?,
    };
    let mut out = ito_simple(&projected, driver)?;
    out.provenance = mode.provenance();
    Ok(out)
}

/// Pathwise Lebesgue–Stieltjes integral `Σ_τ Φ(τ)ΔJ_τ - ∫Φ c ds` against a
/// finite-variation driver, with `Φ` read at the jump time itself.
pub fn lebesgue_stieltjes(integrand: &StepPath, driver: Integrator<'_>) -> Result<IntegralProcess> {
    let m = match driver {
        Integrator::FiniteVariation(m) => m,
        Integrator::Sampled(_) => {
            return Err(Error::Unsupported(
                "no pathwise Lebesgue–Stieltjes integral against a sampled (Wiener-type) driver".into(),
            ))
        }
    };
    if integrand.horizon() != m.horizon() {
        return domain("integrand and driver horizons differ");
    }
    let dim = output_dim(integrand.dim(), m.dim())?;
    let path = fv_integral(integrand, m, dim, |p, t| p.value(t))?;
    Ok(IntegralProcess {
        path: IntegralPath::FiniteVariation(path),
        driver: DriverKind::CompensatedPoisson,
        provenance: Provenance::Pathwise,
    })
}

/// `∫_0^T ‖Φ_s‖² d⟨M,M⟩_s`, exact for step integrands.
pub fn bracket_integral(integrand: &StepPath, driver: &MartingaleDriver) -> Result<f64> {
    let mu = DoleansMeasure::constant(integrand.horizon(), driver.bracket_density(), 2.0)?;
    exact_lp_integral(integrand, &mu)
}
