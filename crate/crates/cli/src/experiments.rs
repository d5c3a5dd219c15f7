use std::sync::Arc;

use serde_json::{json, Value};

use itoext::drivers::{
    compensated_path, simulate_poisson, simulate_prm, simulate_q_wiener, simulate_wiener, Mark, MarkSpace, QSpec,
    Seed,
};
use itoext::integrate::{
    ito_extended, lebesgue_stieltjes, HsOperator, Integrator, OperatorStepFn, PrmIntegrand, ProjectionMode,
};
use itoext::spde::{heat_eigenvalues, ou_variance, Diffusion, SpdeSpec};
use itoext::verify::{
    dyadic_convergence_study, isometry_test, left_limit_ae_check, martingale_mean_test, monte_carlo,
    spde_mode_moments, IsometryCase, McReport, SpaceKind, WienerIntegrand,
};
use itoext::{Density, DoleansMeasure, StepPath, TimeGrid};

use crate::config::{Driver, Experiment, ExperimentConfig};
use crate::output::{Cell, Outcome, Table};
use crate::CliError;

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    match cfg.experiment {
        Experiment::PoissonExample => poisson_example(cfg),
        Experiment::Isometry => isometry(cfg),
        Experiment::Project => project(cfg),
        Experiment::Qwiener => qwiener(cfg),
        Experiment::Prm => prm(cfg),
        Experiment::Spde => spde(cfg),
    }
}

fn report_json(r: &McReport) -> Value {
    json!({
        "estimator": r.estimator,
        "n_paths": r.n_paths,
        "estimate": r.estimate,
        "target": r.target,
        "std_error": r.std_error,
        "z_score": r.z_score,
        "threshold": r.threshold,
        "pass": r.pass,
    })
}

fn check_row(table: &mut Table, r: &McReport) {
    table.push(vec![
        r.estimator.clone().into(),
        r.estimate.into(),
        r.target.into(),
        r.std_error.into(),
        r.z_score.into(),
        r.pass.into(),
    ]);
}

fn check_table() -> Table {
    Table::new(vec!["check", "estimate", "target", "std_error", "z", "pass"])
}

fn uniform(horizon: f64, cells: usize) -> Result<Arc<TimeGrid>> {
    Ok(Arc::new(TimeGrid::uniform(horizon, cells)?))
}

struct PoissonRow {
    n_t: f64,
    ito: [f64; 3],
    ls: [f64; 3],
    residual: f64,
}

fn poisson_example(cfg: &ExperimentConfig) -> Result<Outcome> {
    let t_end = cfg.horizon;
    let times = [t_end / 4.0, t_end / 2.0, t_end];
    let mode = cfg.projection()?;
    let rows = monte_carlo(cfg.paths, cfg.seed, |seed| -> itoext::Result<PoissonRow> {
        let n = simulate_poisson(cfg.rate, t_end, seed)?;
        let m = compensated_path(&n, cfg.rate)?;
        let ito = ito_extended(&n, Integrator::FiniteVariation(&m), mode)?;
        let ls = lebesgue_stieltjes(&n, Integrator::FiniteVariation(&m))?;
        let mut row = PoissonRow { n_t: n.value(t_end)?[0], ito: [0.0; 3], ls: [0.0; 3], residual: 0.0 };
        for (i, &t) in times.iter().enumerate() {
            row.ito[i] = ito.value(t)?[0];
            row.ls[i] = ls.value(t)?[0];
            let r = row.ls[i] - n.value(t)?[0] - row.ito[i];
            row.residual = row.residual.max(r.abs());
        }
        Ok(row)
    })
    .into_iter()
    .collect::<itoext::Result<Vec<_>>>()?;

    let mut table = Table::new(vec!["path_id", "N_1", "ito_ext_1", "ls_1", "identity_residual"]);
    for (i, r) in rows.iter().enumerate() {
        table.push(vec![i.into(), r.n_t.into(), r.ito[2].into(), r.ls[2].into(), r.residual.into()]);
    }
    let samples = |f: &dyn Fn(&PoissonRow) -> [f64; 3]| -> Vec<(f64, Vec<f64>)> {
        times.iter().enumerate().map(|(i, &t)| (t, rows.iter().map(|r| f(r)[i]).collect())).collect()
    };
    let seed = Some(cfg.seed);
    let ito = martingale_mean_test(&samples(&|r| r.ito), |_| 0.0, cfg.z, seed)?;
    let ls = martingale_mean_test(&samples(&|r| r.ls), |t| cfg.rate * t, cfg.z, seed)?;
    let control = martingale_mean_test(&samples(&|r| r.ls), |_| 0.0, cfg.z, seed)?;
    let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
    let identity_applies = mode == ProjectionMode::LeftLimit;
    let identity_ok = !identity_applies || max_residual <= 1e-12;
    let pass = identity_ok
        && ito.iter().all(|r| r.pass)
        && ls.iter().all(|r| r.pass)
        && control.iter().all(|r| !r.pass);
    let summary = json!({
        "projection": mode.to_string(),
        "max_identity_residual": max_residual,
        "identity_checked": identity_applies,
        "ito_mean_vs_zero": ito.iter().map(report_json).collect::<Vec<_>>(),
        "pathwise_mean_vs_rate_t": ls.iter().map(report_json).collect::<Vec<_>>(),
        "pathwise_mean_vs_zero_control": control.iter().map(report_json).collect::<Vec<_>>(),
    });
    Ok(Outcome { table, summary, pass })
}

fn mark_indicator(label: usize) -> PrmIntegrand {
    PrmIntegrand::marks_only(1, move |m| vec![if *m == Mark::Label(label) { 1.0 } else { 0.0 }])
}

fn isometry(cfg: &ExperimentConfig) -> Result<Outcome> {
    let drivers = match cfg.driver.unwrap_or(Driver::All) {
        Driver::All => vec![Driver::Wiener, Driver::Qwiener, Driver::Poisson, Driver::Prm],
        d => vec![d],
    };
    let mut table = Table::new(vec!["driver", "paths", "lhs_mean", "rhs_mean", "diff_std_error", "z", "pass"]);
    let mut reports = Vec::new();
    for d in drivers {
        let case = match d {
            Driver::Wiener => IsometryCase::Wiener {
                rate: 1.0,
                grid: uniform(cfg.horizon, cfg.grid_cells)?,
                integrand: WienerIntegrand::IndependentPoisson { rate: cfg.rate },
            },
            Driver::Qwiener => IsometryCase::QWiener {
                qspec: QSpec::new(cfg.eigenvalues.clone())?,
                grid: uniform(cfg.horizon, cfg.grid_cells)?,
                integrand: OperatorStepFn::constant(cfg.horizon, HsOperator::identity(cfg.eigenvalues.len()))?,
            },
            Driver::Poisson => IsometryCase::PoissonLeftLimit { rate: cfg.rate, horizon: cfg.horizon },
            Driver::Prm => IsometryCase::Prm {
                mark_space: MarkSpace::finite(cfg.mark_weights.clone())?,
                horizon: cfg.horizon,
                integrand: mark_indicator(cfg.mark_weights.len() - 1),
            },
            Driver::All => unreachable!(),
        };
        let r = isometry_test(&case, SpaceKind::Hilbert, cfg.paths, cfg.seed, cfg.z)?;
        table.push(vec![
            case.label().into(),
            r.n_paths.into(),
            r.estimate.into(),
            r.target.into(),
            r.std_error.into(),
            r.z_score.into(),
            r.pass.into(),
        ]);
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.pass);
    let summary = json!({ "reports": reports.iter().map(report_json).collect::<Vec<_>>() });
    Ok(Outcome { table, summary, pass })
}

fn project(cfg: &ExperimentConfig) -> Result<Outcome> {
    let t_end = cfg.horizon;
    let levels = cfg.levels.levels();
    let mu = DoleansMeasure::lebesgue(t_end, cfg.p)?;
    let grid = uniform(t_end, cfg.grid_cells)?;
    let poisson = cfg.driver == Some(Driver::Poisson);
    let (tables, expected) = match cfg.driver {
        Some(Driver::Wiener) => {
            let gen = |s| Ok(simulate_wiener(&grid, 1.0, s)?.to_step_path());
            (dyadic_convergence_study(gen, &mu, &levels, &[cfg.s], cfg.paths, cfg.seed)?, -0.5)
        }
        _ => {
            let gen = |s| simulate_poisson(cfg.rate, t_end, s);
            (dyadic_convergence_study(gen, &mu, &levels, &[cfg.s], cfg.paths, cfg.seed)?, -1.0 / cfg.p)
        }
    };
    let mut table = Table::new(vec!["n", "s", "lp_error"]);
    let mut studies = Vec::new();
    let mut pass = true;
    for t in &tables {
        for r in &t.rows {
            table.push(vec![r.level.into(), t.anchor.into(), r.lp_error.into()]);
        }
        let rate_ok = t.fitted_rate.is_some_and(|r| (r - expected).abs() <= 0.25 * expected.abs());
        let monotone = t.is_monotone_with_slack();
        let excess = t.rows.iter().map(|r| r.mismatch_excess).fold(f64::NEG_INFINITY, f64::max);
        let mismatch_ok = !poisson || excess <= 1e-12;
        pass &= rate_ok && monotone && mismatch_ok;
        studies.push(json!({
            "anchor": t.anchor,
            "fitted_rate": t.fitted_rate,
            "expected_rate": expected,
            "monotone_violations": t.monotone_violations(),
            "max_mismatch_excess": excess,
            "mismatch": t.rows.iter().map(|r| r.mismatch).collect::<Vec<_>>(),
        }));
    }

    // Φ = Φ₋ μ-a.e.: random Poisson paths plus one path jumping on a density breakpoint.
    let ae_seed = Seed::new(cfg.seed, 0).derive(7).value;
    let mut paths = monte_carlo(100, ae_seed, |s| simulate_poisson(cfg.rate, t_end, s))
        .into_iter()
        .collect::<itoext::Result<Vec<StepPath>>>()?;
    paths.push(StepPath::scalar(t_end, 1.0, &[(t_end / 2.0, -2.0)])?);
    let piecewise = StepPath::scalar(t_end, 1.0, &[(t_end / 4.0, 3.0), (t_end / 2.0, 0.5)])?;
    let mut measures = Vec::new();
    for p in [1.0, 2.0] {
        measures.push(DoleansMeasure::constant(t_end, 1.0, p)?);
        measures.push(DoleansMeasure::constant(t_end, 2.0, p)?);
        measures.push(DoleansMeasure::new(t_end, Density::Step(piecewise.clone()), p)?);
    }
    let checks = left_limit_ae_check(&paths, &measures)?;
    let ae_ok = checks.iter().all(|c| c.pass);
    pass &= ae_ok;
    let summary = json!({
        "driver": if poisson { "poisson" } else { "wiener" },
        "p": cfg.p,
        "studies": studies,
        "left_limit_ae": {
            "combinations": checks.len(),
            "all_exactly_zero": ae_ok,
            "max_value": checks.iter().map(|c| c.value).fold(0.0, f64::max),
        },
    });
    Ok(Outcome { table, summary, pass })
}

fn qwiener(cfg: &ExperimentConfig) -> Result<Outcome> {
    let q = QSpec::new(cfg.eigenvalues.clone())?;
    let t_end = cfg.horizon;
    let grid = uniform(t_end, cfg.grid_cells)?;
    let ends: Vec<Vec<f64>> = monte_carlo(cfg.paths, cfg.seed, |s| simulate_q_wiener(&grid, &q, s).last().to_vec());
    let mut table = check_table();
    let mut reports = Vec::new();
    let norms: Vec<f64> = ends.iter().map(|v| v.iter().map(|x| x * x).sum()).collect();
    reports.push(McReport::mean_test("trace", Some(cfg.seed), &norms, t_end * q.trace(), cfg.z));
    for (j, lambda) in q.eigenvalues().iter().enumerate() {
        let xs: Vec<f64> = ends.iter().map(|v| v[j] * v[j]).collect();
        reports.push(McReport::mean_test(format!("mode_{}_second_moment", j + 1), Some(cfg.seed), &xs, t_end * lambda, cfg.z));
    }
    let d = q.modes();
    let fine = Arc::new(grid.refine(&[t_end / 2.0])?);
    let step = OperatorStepFn::new(
        t_end,
        vec![(0.0, HsOperator::identity(d)), (t_end / 2.0, HsOperator::identity(d).scale(2.0))],
    )?;
    for (label, integrand, g) in [
        ("isometry_identity", OperatorStepFn::constant(t_end, HsOperator::identity(d))?, grid.clone()),
        ("isometry_step", step, fine),
    ] {
        let case = IsometryCase::QWiener { qspec: q.clone(), grid: g, integrand };
        let mut r = isometry_test(&case, SpaceKind::Hilbert, cfg.paths, cfg.seed, cfg.z)?;
        r.estimator = label.into();
        reports.push(r);
    }
    for r in &reports {
        check_row(&mut table, r);
    }
    let pass = reports.iter().all(|r| r.pass);
    let summary = json!({ "trace": q.trace(), "reports": reports.iter().map(report_json).collect::<Vec<_>>() });
    Ok(Outcome { table, summary, pass })
}

fn prm(cfg: &ExperimentConfig) -> Result<Outcome> {
    let ms = MarkSpace::finite(cfg.mark_weights.clone())?;
    let t_end = cfg.horizon;
    let k = cfg.mark_weights.len();
    let g = |m: &Mark| match m {
        Mark::Label(i) => (*i + 1) as f64,
        Mark::Point(x) => *x,
    };
    let compensator = t_end * ms.integrate_scalar(g);
    let per_path = monte_carlo(cfg.paths, cfg.seed, |s| -> itoext::Result<(Vec<f64>, f64)> {
        let prm = simulate_prm(&ms, t_end, s)?;
        let counts = (0..k).map(|i| prm.count(t_end, |m| *m == Mark::Label(i)) as f64).collect();
        let sum = prm.atoms().iter().map(|(_, m)| g(m)).sum::<f64>() - compensator;
        Ok((counts, sum))
    })
    .into_iter()
    .collect::<itoext::Result<Vec<_>>>()?;
    let mut reports = Vec::new();
    for (i, w) in cfg.mark_weights.iter().enumerate() {
        let xs: Vec<f64> = per_path.iter().map(|p| p.0[i]).collect();
        reports.push(McReport::mean_test(format!("count_mark_{i}"), Some(cfg.seed), &xs, t_end * w, cfg.z));
    }
    let sums: Vec<f64> = per_path.iter().map(|p| p.1).collect();
    reports.push(McReport::mean_test("compensated_sum", Some(cfg.seed), &sums, 0.0, cfg.z));
    let case = IsometryCase::Prm { mark_space: ms.clone(), horizon: t_end, integrand: mark_indicator(k - 1) };
    let mut iso = isometry_test(&case, SpaceKind::Hilbert, cfg.paths, cfg.seed, cfg.z)?;
    iso.estimator = "isometry_indicator".into();
    reports.push(iso);
    let mut table = check_table();
    for r in &reports {
        check_row(&mut table, r);
    }
    let pass = reports.iter().all(|r| r.pass);
    let summary = json!({
        "total_mass": ms.total_mass(),
        "indicator_bracket": t_end * cfg.mark_weights[k - 1],
        "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
    });
    Ok(Outcome { table, summary, pass })
}

/// Noise covariance eigenvalues `λ_j = 1/j²` of the `spde` experiment.
pub fn spde_noise_eigenvalues(modes: usize) -> Vec<f64> {
    (1..=modes).map(|j| 1.0 / (j * j) as f64).collect()
}

fn spde(cfg: &ExperimentConfig) -> Result<Outcome> {
    let modes = cfg.modes;
    let mus = heat_eigenvalues(modes);
    let lambdas = spde_noise_eigenvalues(modes);
    let grid = uniform(cfg.horizon, cfg.grid_cells)?;
    let pts = grid.points();
    let times = [pts[(cfg.grid_cells / 10).max(1)], pts[cfg.grid_cells]];
    let spec = SpdeSpec::new(mus.clone(), modes, vec![0.0; modes], grid)?
        .with_wiener(QSpec::new(lambdas.clone())?, Diffusion::Additive(HsOperator::identity(modes)))?;
    let moments = spde_mode_moments(&spec, cfg.paths, cfg.seed, &times)?;
    let mut table = Table::new(vec!["mode", "t", "mc_var", "exact_var", "z"]);
    let mut reports = Vec::new();
    for m in &moments {
        let exact = ou_variance(1.0, lambdas[m.mode], mus[m.mode], m.t);
        let r = McReport::new(
            format!("mode_{}_var@{}", m.mode + 1, m.t),
            Some(cfg.seed),
            cfg.paths,
            m.variance,
            exact,
            m.variance_se,
            cfg.z,
        );
        table.push(vec![Cell::from(m.mode + 1), m.t.into(), m.variance.into(), exact.into(), r.z_score.into()]);
        reports.push(r);
    }
    let pass = reports.iter().all(|r| r.pass);
    let max_z = reports.iter().map(|r| r.z_score.abs()).fold(0.0, f64::max);
    let means: Vec<f64> = moments.iter().map(|m| m.mean / m.mean_se.max(f64::MIN_POSITIVE)).collect();
    let summary = json!({
        "generator_eigenvalues": mus,
        "noise_eigenvalues": lambdas,
        "cell_width": cfg.horizon / cfg.grid_cells as f64,
        "max_abs_z": max_z,
        "max_abs_mean_z": means.iter().fold(0.0, |a: f64, b| a.max(b.abs())),
    });
    Ok(Outcome { table, summary, pass })
}
