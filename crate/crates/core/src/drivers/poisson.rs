use rand_distr::{Distribution, Exp1};

use super::Seed;
use crate::error::{domain, Result};
use crate::path::{FvPath, StepPath};

/// Square-integrable martingale driver with absolutely continuous bracket
/// `⟨M,M⟩_t = bracket_density · t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MartingaleDriver {
    /// Brownian motion with variance rate `c`.
    Wiener { rate: f64 },
    /// `N_t - λ t` for a Poisson process `N` of intensity `λ`.
    CompensatedPoisson { rate: f64 },
}

impl MartingaleDriver {
    pub fn wiener(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(MartingaleDriver::Wiener { rate })
    }

    pub fn compensated_poisson(rate: f64) -> Result<Self> {
        check_rate(rate)?;
        Ok(MartingaleDriver::CompensatedPoisson { rate })
    }

    pub fn bracket_density(&self) -> f64 {
        match *self {
            MartingaleDriver::Wiener { rate } | MartingaleDriver::CompensatedPoisson { rate } => rate,
        }
    }
}

fn check_rate(rate: f64) -> Result<()> {
    if rate > 0.0 && rate.is_finite() {
        Ok(())
    } else {
        domain(format!("rate must be positive and finite, got {rate}"))
    }
}

/// Counting path of a Poisson process on `[0, T]`: unit jumps at partial sums
/// of i.i.d. exponential inter-arrival times.
pub fn simulate_poisson(rate: f64, horizon: f64, seed: Seed) -> Result<StepPath> {
    check_rate(rate)?;
    if !(horizon > 0.0 && horizon.is_finite()) {
        return domain(format!("horizon must be positive and finite, got {horizon}"));
    }
    let mut rng = seed.rng();
    let mut times = Vec::new();
    let mut t = 0.0;
    loop {
        let e: f64 = Exp1.sample(&mut rng);
        t += e / rate;
        if t > horizon {
            break;
        }
        // Exp1 can return 0; a repeated time would not be a valid event list.
        if times.last().is_some_and(|&last| t <= last) || t == 0.0 {
            continue;
        }
        times.push(t);
    }
    let pieces = (0..=times.len()).map(|k| k as f64).collect();
    Ok(StepPath::from_raw(horizon, 1, crate::path::Side::Right, times, pieces))
}

/// `M_t = N_t - λ t`, kept exact as jump part minus linear compensator.
pub fn compensated_path(counting: &StepPath, rate: f64) -> Result<FvPath> {
    check_rate(rate)?;
    if counting.dim() != 1 {
        return domain("counting path must be scalar");
    }
    FvPath::new(counting.clone(), StepPath::constant(counting.horizon(), rate)?)
}
