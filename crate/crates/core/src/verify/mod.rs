//! Statistical and exact acceptance checks.

mod stats;

use std::sync::Arc;

pub use stats::{monte_carlo, McReport, SampleStats, DEFAULT_Z};

use crate::drivers::{
    compensated_path, simulate_poisson, simulate_prm, simulate_q_wiener, simulate_wiener, MarkSpace,
    MartingaleDriver, QSpec, Seed,
};
use crate::error::{domain, Error, Result};
use crate::grid::TimeGrid;
use crate::integrate::{
    bracket_integral, ito_extended, ito_simple, prm_bracket, prm_integral, qwiener_integral, Integrator,
    OperatorStepFn, PrmIntegrand, ProjectionMode,
};
use crate::measure::{exact_lp_distance, exact_lp_integral, DoleansMeasure};
use crate::path::StepPath;
use crate::projection::{dyadic_shift, project_left_limit, DyadicApproxParams};
use crate::spde::{mild_step_solve, SpdeSpec};

/// Minimum number of samples accepted by [`martingale_mean_test`].
pub const MIN_SAMPLES: usize = 100;

/// z-test of the sample mean at each time against `target(t)`.
///
/// `samples` holds one `(t, values)` entry per time. Zero-variance samples
/// pass only when they equal the target exactly.
pub fn martingale_mean_test(
    samples: &[(f64, Vec<f64>)],
    target: impl Fn(f64) -> f64,
    z_threshold: f64,
    seed: Option<u64>,
) -> Result<Vec<McReport>> {
    samples
        .iter()
        .map(|(t, xs)| {
            if xs.len() < MIN_SAMPLES {
                return domain(format!("mean test at t={t} needs at least {MIN_SAMPLES} samples, got {}", xs.len()));
            }
            Ok(McReport::mean_test(format!("mean@{t}"), seed, xs, target(*t), z_threshold))
        })
        .collect()
}

/// Integrand and driver pairing for [`isometry_test`].
#[derive(Debug, Clone)]
pub enum IsometryCase {
    /// Step integrand against a Wiener process with `E[W_t²] = rate·t`.
    Wiener { rate: f64, grid: Arc<TimeGrid>, integrand: WienerIntegrand },
    /// Deterministic operator-valued integrand against a Q-Wiener process.
    QWiener { qspec: QSpec, grid: Arc<TimeGrid>, integrand: OperatorStepFn },
    /// `Φ = N₋` against `N_t - λt` for the same Poisson process `N`.
    PoissonLeftLimit { rate: f64, horizon: f64 },
    /// Mark integrand against a compensated Poisson random measure.
    Prm { mark_space: MarkSpace, horizon: f64, integrand: PrmIntegrand },
}

impl IsometryCase {
    pub fn label(&self) -> &'static str {
        match self {
            IsometryCase::Wiener { .. } => "wiener",
            IsometryCase::QWiener { .. } => "qwiener",
            IsometryCase::PoissonLeftLimit { .. } => "poisson",
            IsometryCase::Prm { .. } => "prm",
        }
    }

    // (‖I_T‖², right-hand side) for one path.
    fn sample(&self, seed: Seed) -> Result<(f64, f64)> {
        match self {
            IsometryCase::Wiener { rate, grid, integrand } => {
                let driver = MartingaleDriver::wiener(*rate)?;
                match integrand {
                    WienerIntegrand::Deterministic(phi) => {
                        let w = simulate_wiener(grid, *rate, seed)?;
                        let i = ito_simple(phi, Integrator::Sampled(&w))?;
                        Ok((i.terminal_norm_sq(), bracket_integral(phi, &driver)?))
                    }
                    WienerIntegrand::IndependentPoisson { rate: jump_rate } => {
                        let n = simulate_poisson(*jump_rate, grid.t_end(), seed.derive(1))?;
                        let phi = project_left_limit(&n);
                        let fine = Arc::new(grid.refine(n.event_times())?);
                        let w = simulate_wiener(&fine, *rate, seed.derive(2))?;
                        let i = ito_simple(&phi, Integrator::Sampled(&w))?;
                        Ok((i.terminal_norm_sq(), bracket_integral(&phi, &driver)?))
                    }
                }
            }
            IsometryCase::QWiener { qspec, grid, integrand } => {
                let w = simulate_q_wiener(grid, qspec, seed);
                let i = qwiener_integral(integrand, &w)?;
                Ok((i.terminal_norm_sq(), integrand.hs_square_integral(qspec)?))
            }
            IsometryCase::PoissonLeftLimit { rate, horizon } => {
                let n = simulate_poisson(*rate, *horizon, seed)?;
                let m = compensated_path(&n, *rate)?;
                let i = ito_extended(&n, Integrator::FiniteVariation(&m), ProjectionMode::LeftLimit)?;
                let rhs = bracket_integral(&project_left_limit(&n), &MartingaleDriver::compensated_poisson(*rate)?)?;
                Ok((i.terminal_norm_sq(), rhs))
            }
            IsometryCase::Prm { mark_space, horizon, integrand } => {
                let prm = simulate_prm(mark_space, *horizon, seed)?;
                let i = prm_integral(integrand, &prm)?;
                Ok((i.terminal_norm_sq(), prm_bracket(integrand, &prm)?))
            }
        }
    }
}

/// Integrand for [`IsometryCase::Wiener`].
#[derive(Debug, Clone)]
pub enum WienerIntegrand {
    /// Fixed predictable step function with breakpoints on the grid.
    Deterministic(StepPath),
    /// `Φ = N₋` for a Poisson process `N` independent of `W`; the grid is
    /// refined by the jump times of each path.
    IndependentPoisson { rate: f64 },
}

/// Geometry of the target space of the integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Hilbert,
    Banach,
}

/// Compares `E‖I_T‖²` with the expected bracket side by Monte Carlo.
///
/// Both sides are computed on each path; the z-score uses the standard error
/// of the per-path difference. `estimate` and `target` in the report are the
/// two sample means.
pub fn isometry_test(
    case: &IsometryCase,
    space: SpaceKind,
    n_paths: usize,
    seed_value: u64,
    z_threshold: f64,
) -> Result<McReport> {
    if space == SpaceKind::Banach {
        return Err(Error::Unsupported("the isometry only holds for Hilbert-space integrals".into()));
    }
    if n_paths < 2 {
        return domain("isometry test needs at least two paths");
    }
    let pairs = monte_carlo(n_paths, seed_value, |s| case.sample(s)).into_iter().collect::<Result<Vec<_>>>()?;
    let lhs: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let rhs: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let diff: Vec<f64> = pairs.iter().map(|p| p.0 - p.1).collect();
    let se = SampleStats::of(&diff).std_error;
    let (l, r) = (SampleStats::of(&lhs).mean, SampleStats::of(&rhs).mean);
    let mut report =
        McReport::new(format!("isometry:{}", case.label()), Some(seed_value), n_paths, l - r, 0.0, se, z_threshold);
    report.estimate = l;
    report.target = r;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub level: u32,
    /// `(mean over seeds of ∫|Φⁿ - Φ|^p dμ)^{1/p}`.
    pub lp_error: f64,
    /// Mean Lebesgue measure of `{t : Φⁿ_t ≠ Φ_t}`.
    pub mismatch: f64,
    /// Largest `mismatch - (#events)·2⁻ⁿ` over seeds.
    pub mismatch_excess: f64,
}

/// Dyadic approximation errors for one anchor `s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub anchor: f64,
    pub p: f64,
    pub rows: Vec<ConvergenceRow>,
    /// log₂ slope of `lp_error` against `n` over the top half of the levels;
    /// `None` when some error there is zero.
    pub fitted_rate: Option<f64>,
}

impl ConvergenceTable {
    /// log₂ slope of `lp_error` over the rows with `lo ≤ n ≤ hi`.
    pub fn rate_over(&self, lo: u32, hi: u32) -> Option<f64> {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| (lo..=hi).contains(&r.level))
            .map(|r| (r.level as f64, r.lp_error))
            .collect();
        fit_log2_slope(&pts)
    }

    /// Number of steps where the error increases with `n`.
    pub fn monotone_violations(&self) -> usize {
        self.rows.windows(2).filter(|w| w[1].lp_error > w[0].lp_error).count()
    }

    /// Non-increasing up to at most one upward step.
    pub fn is_monotone_with_slack(&self) -> bool {
        self.monotone_violations() <= 1
    }
}

/// Least-squares slope of `log₂ y` against `x`. `None` for fewer than two
/// points or a non-positive `y`.
pub fn fit_log2_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|p| p.1 <= 0.0 || !p.1.is_finite()) {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.log2()).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.log2() - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(sxy / sxx)
}

/// `L^p(μ)` error of the dyadic shift `Φⁿ` for every level and anchor,
/// averaged over `n_seeds` paths from `generator`. One table per anchor.
pub fn dyadic_convergence_study<G>(
    generator: G,
    measure: &DoleansMeasure,
    levels: &[u32],
    anchors: &[f64],
    n_seeds: usize,
    seed_value: u64,
) -> Result<Vec<ConvergenceTable>>
where
    G: Fn(Seed) -> Result<StepPath> + Sync + Send,
{
    if levels.is_empty() || levels.windows(2).any(|w| w[0] >= w[1]) {
        return domain("levels must be non-empty and strictly ascending");
    }
    if n_seeds == 0 {
        return domain("convergence study needs at least one seed");
    }
    let params: Vec<Vec<DyadicApproxParams>> = anchors
        .iter()
        .map(|&s| levels.iter().map(|&n| DyadicApproxParams::new(n, s)).collect())
        .collect::<Result<_>>()?;
    // per seed: [anchor][level] -> (∫|·|^p, mismatch, excess)
    let per_seed = monte_carlo(n_seeds, seed_value, |seed| -> Result<Vec<Vec<(f64, f64, f64)>>> {
        let path = generator(seed)?;
        params
            .iter()
            .map(|row| {
                row.iter()
                    .map(|prm| {
                        let approx = dyadic_shift(&path, prm)?;
                        let err = exact_lp_distance(&approx, &path, measure)?;
                        let mm = approx.mismatch_measure(&path)?;
                        Ok((err, mm, mm - path.event_count() as f64 * prm.cell_width()))
                    })
                    .collect()
            })
            .collect()
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let p = measure.p();
    let k = n_seeds as f64;
    let top = levels.len() / 2;
    Ok(anchors
        .iter()
        .enumerate()
        .map(|(a, &anchor)| {
            let rows: Vec<ConvergenceRow> = levels
                .iter()
                .enumerate()
                .map(|(l, &level)| {
                    let mut sum = 0.0;
                    let mut mm = 0.0;
                    let mut excess = f64::NEG_INFINITY;
                    for s in &per_seed {
                        let (e, m, x) = s[a][l];
                        sum += e;
                        mm += m;
                        excess = excess.max(x);
                    }
                    ConvergenceRow { level, lp_error: (sum / k).powf(1.0 / p), mismatch: mm / k, mismatch_excess: excess }
                })
                .collect();
            let pts: Vec<(f64, f64)> = rows[top..].iter().map(|r| (r.level as f64, r.lp_error)).collect();
            ConvergenceTable { anchor, p, fitted_rate: fit_log2_slope(&pts), rows }
        })
        .collect())
}

/// One `(path, measure)` outcome of [`left_limit_ae_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct AeRecord {
    pub path_index: usize,
    pub measure_index: usize,
    pub p: f64,
    /// `∫‖Φ - Φ₋‖^p dμ`.
    pub value: f64,
    pub pass: bool,
}

/// Exact check that `Φ = Φ₋` μ-a.e.: the integral must be exactly zero.
pub fn left_limit_ae_check(paths: &[StepPath], measures: &[DoleansMeasure]) -> Result<Vec<AeRecord>> {
    let mut out = Vec::with_capacity(paths.len() * measures.len());
    for (i, path) in paths.iter().enumerate() {
        let gap = path.sub(&project_left_limit(path))?;
        for (j, mu) in measures.iter().enumerate() {
            let value = exact_lp_integral(&gap, mu)?;
            out.push(AeRecord { path_index: i, measure_index: j, p: mu.p(), value, pass: value == 0.0 });
        }
    }
    Ok(out)
}

/// Monte Carlo moments of one mode coordinate at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeMoments {
    pub t: f64,
    pub mode: usize,
    pub mean: f64,
    pub mean_se: f64,
    pub variance: f64,
    pub variance_se: f64,
}

/// Runs the one-pass solver on `n_paths` seeds and collects mode moments at
/// each of `times`.
pub fn spde_mode_moments(spec: &SpdeSpec, n_paths: usize, seed_value: u64, times: &[f64]) -> Result<Vec<ModeMoments>> {
    if n_paths < 2 {
        return domain("moment estimation needs at least two paths");
    }
    let modes = spec.modes();
    let samples = monte_carlo(n_paths, seed_value, |seed| -> Result<Vec<f64>> {
        let sol = mild_step_solve(spec, seed)?;
        let mut v = Vec::with_capacity(times.len() * modes);
        for &t in times {
            v.extend_from_slice(sol.value_at(t)?);
        }
        Ok(v)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(times.len() * modes);
    for (ti, &t) in times.iter().enumerate() {
        for mode in 0..modes {
            let xs: Vec<f64> = samples.iter().map(|v| v[ti * modes + mode]).collect();
            let st = SampleStats::of(&xs);
            out.push(ModeMoments {
                t,
                mode,
                mean: st.mean,
                mean_se: st.std_error,
                variance: st.variance,
                variance_se: SampleStats::variance_std_error(&xs),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivers::Mark;
    use crate::integrate::HsOperator;
    use crate::measure::Density;
    use crate::path::Side;

    #[test]
    fn mean_test_requires_samples() {
        assert!(martingale_mean_test(&[(1.0, vec![0.0; 99])], |_| 0.0, 4.0, None).is_err());
        let r = martingale_mean_test(&[(1.0, vec![0.0; 100])], |_| 0.0, 4.0, None).unwrap();
        assert!(r[0].pass);
        let r = martingale_mean_test(&[(1.0, vec![0.0; 100])], |t| t, 4.0, None).unwrap();
        assert!(!r[0].pass);
    }

    #[test]
    fn lebesgue_stieltjes_mean_is_t_not_zero() {
        use crate::integrate::lebesgue_stieltjes;
        let xs: Vec<f64> = monte_carlo(20_000, 3, |s| {
            let n = simulate_poisson(1.0, 1.0, s).unwrap();
            let m = compensated_path(&n, 1.0).unwrap();
            lebesgue_stieltjes(&n, Integrator::FiniteVariation(&m)).unwrap().terminal()[0]
        });
        let r = martingale_mean_test(&[(1.0, xs)], |t| t, 4.0, Some(3)).unwrap();
        assert!(r[0].pass, "{r:?}");
        let xs = monte_carlo(20_000, 3, |s| {
            let n = simulate_poisson(1.0, 1.0, s).unwrap();
            let m = compensated_path(&n, 1.0).unwrap();
            lebesgue_stieltjes(&n, Integrator::FiniteVariation(&m)).unwrap().terminal()[0]
        });
        let r = martingale_mean_test(&[(1.0, xs)], |_| 0.0, 4.0, Some(3)).unwrap();
        assert!(!r[0].pass);
    }

    #[test]
    fn wiener_deterministic_isometry() {
        let grid = Arc::new(TimeGrid::uniform(1.0, 4).unwrap());
        let phi = StepPath::constant(1.0, 2.0).unwrap().with_side(Side::Left);
        let case = IsometryCase::Wiener { rate: 1.0, grid: grid.clone(), integrand: WienerIntegrand::Deterministic(phi) };
        let r = isometry_test(&case, SpaceKind::Hilbert, 20_000, 1, 4.0).unwrap();
        assert_eq!(r.target, 4.0);
        assert!(r.pass, "{r:?}");
        let case = IsometryCase::Wiener {
            rate: 1.0,
            grid,
            integrand: WienerIntegrand::IndependentPoisson { rate: 2.0 },
        };
        let r = isometry_test(&case, SpaceKind::Hilbert, 20_000, 1, 4.0).unwrap();
        // E∫N_{s-}² ds = ∫(2s + 4s²) ds = 7/3
        assert!((r.target - 7.0 / 3.0).abs() < 0.1, "{r:?}");
        assert!(r.pass, "{r:?}");
        assert!(matches!(isometry_test(&case, SpaceKind::Banach, 100, 1, 4.0), Err(Error::Unsupported(_))));
    }

    #[test]
    fn qwiener_identity_isometry() {
        let q = QSpec::new(vec![0.5, 0.25, 0.125]).unwrap();
        let grid = Arc::new(TimeGrid::uniform(1.0, 1).unwrap());
        let integrand = OperatorStepFn::constant(1.0, HsOperator::identity(3)).unwrap();
        let case = IsometryCase::QWiener { qspec: q, grid, integrand };
        let r = isometry_test(&case, SpaceKind::Hilbert, 20_000, 2, 4.0).unwrap();
        assert!((r.target - 0.875).abs() < 1e-15);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn poisson_and_prm_isometry() {
        let case = IsometryCase::PoissonLeftLimit { rate: 1.0, horizon: 1.0 };
        let r = isometry_test(&case, SpaceKind::Hilbert, 20_000, 4, 4.0).unwrap();
        assert!(r.pass, "{r:?}");
        // E∫N_{s-}² ds = ∫(s + s²) ds = 5/6
        assert!((r.target - 5.0 / 6.0).abs() < 0.05);

        let ms = MarkSpace::finite(vec![1.0, 2.0]).unwrap();
        let ind = PrmIntegrand::marks_only(1, |m| vec![if *m == Mark::Label(1) { 1.0 } else { 0.0 }]);
        let case = IsometryCase::Prm { mark_space: ms, horizon: 1.0, integrand: ind };
        let r = isometry_test(&case, SpaceKind::Hilbert, 20_000, 5, 4.0).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.target, 2.0);
    }

    #[test]
    fn slope_fit() {
        let pts: Vec<(f64, f64)> = (0..5).map(|n| (n as f64, 3.0 * 2f64.powf(-0.5 * n as f64))).collect();
        assert!((fit_log2_slope(&pts).unwrap() + 0.5).abs() < 1e-12);
        assert!(fit_log2_slope(&pts[..1]).is_none());
        assert!(fit_log2_slope(&[(0.0, 1.0), (1.0, 0.0)]).is_none());
    }

    #[test]
    fn constant_path_converges_immediately() {
        let mu = DoleansMeasure::lebesgue(1.0, 1.0).unwrap();
        let tables = dyadic_convergence_study(|_| StepPath::constant(1.0, 1.0), &mu, &[2, 3, 4], &[0.0], 4, 0).unwrap();
        assert!(tables[0].rows.iter().all(|r| r.lp_error == 0.0));
        assert!(tables[0].fitted_rate.is_none());
        assert!(dyadic_convergence_study(|_| StepPath::constant(1.0, 1.0), &mu, &[3, 2], &[0.0], 4, 0).is_err());
    }

    #[test]
    fn poisson_mismatch_bounded_by_jumps() {
        let mu = DoleansMeasure::lebesgue(1.0, 1.0).unwrap();
        let tables =
            dyadic_convergence_study(|s| simulate_poisson(5.0, 1.0, s), &mu, &[4, 5, 6, 7, 8], &[0.0], 200, 7).unwrap();
        let t = &tables[0];
        assert!(t.rows.iter().all(|r| r.mismatch_excess <= 1e-12));
        assert!(t.is_monotone_with_slack());
        let rate = t.fitted_rate.unwrap();
        assert!((rate + 1.0).abs() < 0.2, "rate {rate}");
    }

    #[test]
    fn left_limit_ae_exact_zero_and_control() {
        let path = StepPath::scalar(1.0, 0.0, &[(0.25, 1.0), (0.5, 3.0)]).unwrap();
        let step = StepPath::scalar(1.0, 1.0, &[(0.5, 2.0)]).unwrap();
        let mus = vec![
            DoleansMeasure::lebesgue(1.0, 1.0).unwrap(),
            DoleansMeasure::constant(1.0, 2.0, 2.0).unwrap(),
            DoleansMeasure::new(1.0, Density::Step(step), 2.0).unwrap(),
        ];
        let recs = left_limit_ae_check(std::slice::from_ref(&path), &mus).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs.iter().all(|r| r.pass && r.value == 0.0));
        let shifted = path.map(|v| vec![v[0] + 1.0]);
        let d = exact_lp_distance(&path, &shifted, &mus[0]).unwrap();
        assert_eq!(d, 1.0);
    }
}
