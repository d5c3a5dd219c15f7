use std::fmt;
use std::sync::Arc;

use super::{DriverKind, IntegralPath, IntegralProcess, Provenance};
use crate::drivers::{Mark, PrmRealization};
use crate::error::{check_dim, domain, Error, Result};
use crate::path::{FvPath, Side, StepPath};

type StateMarkFn = Arc<dyn Fn(&[f64], &Mark) -> Vec<f64> + Send + Sync>;
type TimeMarkFn = Arc<dyn Fn(f64, &Mark) -> Vec<f64> + Send + Sync>;

/// Integrand `Φ(s, x)` against a compensated Poisson random measure.
#[derive(Clone)]
pub enum PrmIntegrand {
    /// `Φ(s, x) = f(state(s-), x)` for an adapted step state (or no state).
    /// Its compensator is exact: the state is constant between events.
    StateDependent {
        dim: usize,
        state: Option<StepPath>,
        f: StateMarkFn,
    },
    /// Arbitrary time dependence. Atom sums are defined, the compensator is not.
    General { dim: usize, f: TimeMarkFn },
}

impl PrmIntegrand {
    /// `Φ(s, x) = g(x)`.
    pub fn marks_only(dim: usize, g: impl Fn(&Mark) -> Vec<f64> + Send + Sync + 'static) -> Self {
        PrmIntegrand::StateDependent { dim, state: None, f: Arc::new(move |_, x| g(x)) }
    }

    /// `Φ(s, x) = f(state(s-), x)`.
    pub fn with_state(
        dim: usize,
        state: StepPath,
        f: impl Fn(&[f64], &Mark) -> Vec<f64> + Send + Sync + 'static,
    ) -> Self {
        PrmIntegrand::StateDependent { dim, state: Some(state), f: Arc::new(f) }
    }

    pub fn general(dim: usize, f: impl Fn(f64, &Mark) -> Vec<f64> + Send + Sync + 'static) -> Self {
        PrmIntegrand::General { dim, f: Arc::new(f) }
    }

    pub fn dim(&self) -> usize {
        match self {
            PrmIntegrand::StateDependent { dim, .. } | PrmIntegrand::General { dim, .. } => *dim,
        }
    }
}

impl fmt::Debug for PrmIntegrand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrmIntegrand::StateDependent { dim, state, .. } => f
                .debug_struct("StateDependent")
                .field("dim", dim)
                .field("state_events", &state.as_ref().map(|s| s.event_count()))
                .finish(),
            PrmIntegrand::General { dim, .. } => f.debug_struct("General").field("dim", dim).finish(),
        }
    }
}

// The mark-integrated rate c(s) = ∫_E h(Φ(s, x)) β(dx) as a step path in s.
fn mark_integrated<'a>(
    dim: usize,
    state: &'a Option<StepPath>,
    f: &'a StateMarkFn,
    prm: &PrmRealization,
    out_dim: usize,
    h: impl Fn(Vec<f64>) -> Vec<f64>,
) -> Result<StepPath> {
    let ms = prm.mark_space();
    let rate = |s: &[f64]| {
        ms.integrate(out_dim, |x| {
            let v = f(s, x);
            assert_eq!(v.len(), dim, "integrand returned a value of the wrong dimension");
            h(v)
        })
    };
    match state {
        None => StepPath::constant(prm.horizon(), rate(&[])),
        Some(state) => Ok(state.map(rate).with_side(Side::Left)),
    }
}

/// `I_t = Σ_{τ_i ≤ t} Φ(τ_i-, ξ_i) - ∫_0^t ∫_E Φ(s-, x) β(dx) ds`.
pub fn prm_integral(integrand: &PrmIntegrand, prm: &PrmRealization) -> Result<IntegralProcess> {
    let (dim, state, f) = match integrand {
        PrmIntegrand::StateDependent { dim, state, f } => (*dim, state, f),
        PrmIntegrand::General { .. } => {
            return Err(Error::Unsupported(
                "compensator needs an integrand that is piecewise constant in time".into(),
            ))
        }
    };
    if let Some(s) = state {
        if s.horizon() != prm.horizon() {
            return domain("integrand state and random measure have different horizons");
        }
    }
    let horizon = prm.horizon();
    let mut pieces = vec![0.0; dim];
    let mut acc = vec![0.0; dim];
    for (t, x) in prm.atoms() {
        let v = match state {
            None => f(&[], x),
            Some(s) => f(s.left_limit(*t)?, x),
        };
        check_dim(dim, v.len())?;
        for (a, v) in acc.iter_mut().zip(v) {
            *a += v;
        }
        pieces.extend_from_slice(&acc);
    }
    let jumps = StepPath::from_raw(horizon, dim, Side::Right, prm.atom_times(), pieces);
    let rate = mark_integrated(dim, state, f, prm, dim, |v| v)?;
    Ok(IntegralProcess {
        path: IntegralPath::FiniteVariation(FvPath::new(jumps, rate)?),
        driver: DriverKind::PoissonRandomMeasure,
        provenance: Provenance::Simple,
    })
}

/// `∫_0^T ∫_E ‖Φ(s, x)‖² β(dx) ds` for one realization of the state.
pub fn prm_bracket(integrand: &PrmIntegrand, prm: &PrmRealization) -> Result<f64> {
    let (dim, state, f) = match integrand {
        PrmIntegrand::StateDependent { dim, state, f } => (*dim, state, f),
        PrmIntegrand::General { .. } => {
            return Err(Error::Unsupported("bracket needs an integrand piecewise constant in time".into()))
        }
    };
    let rate = mark_integrated(dim, state, f, prm, 1, |v| vec![v.iter().map(|x| x * x).sum()])?;
    Ok(rate.integral_to(prm.horizon())?[0])
}
