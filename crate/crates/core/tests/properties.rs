use std::sync::Arc;

use proptest::prelude::*;

use itoext::drivers::{compensated_path, simulate_poisson, simulate_wiener, Mark, MarkSpace, PrmRealization, Seed};
use itoext::integrate::{
    ito_extended, ito_simple, lebesgue_stieltjes, prm_integral, qwiener_integral, HsOperator, Integrator,
    OperatorStepFn, PrmIntegrand, ProjectionMode,
};
use itoext::measure::{exact_lp_distance, exact_lp_integral, Density, DoleansMeasure};
use itoext::projection::{
    dyadic_shift, dyadic_value, project_left_limit, theta, truncate, DyadicApproxParams, TruncationSpec,
};
use itoext::vector::norm;
use itoext::{SampledPath, Side, StepPath, TimeGrid, Vector};

const T: f64 = 1.0;

fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

// Event times in (0, T] drawn on a fine lattice so that ties and exact
// dyadic points occur, plus values in `dim` dimensions.
fn step_path(dim: usize) -> impl Strategy<Value = StepPath> {
    (
        prop::collection::vec(-3.0f64..3.0, dim),
        prop::collection::btree_set(1u32..=1024, 0..12),
        prop::collection::vec(prop::collection::vec(-5.0f64..5.0, dim), 12),
    )
        .prop_map(move |(init, times, values)| {
            let events = times.iter().zip(values).map(|(&k, v)| (k as f64 / 1024.0, Vector::new(v))).collect();
            StepPath::new(T, Vector::new(init), events).unwrap()
        })
}

fn scalar_path() -> impl Strategy<Value = StepPath> {
    step_path(1)
}

fn probe_times(path: &StepPath, extra: &[f64]) -> Vec<f64> {
    let mut ts: Vec<f64> = path.event_times().to_vec();
    ts.extend_from_slice(extra);
    ts.extend([0.0, T]);
    ts
}

fn measures(p: f64) -> Vec<DoleansMeasure> {
    let step = StepPath::scalar(T, 1.0, &[(0.25, 3.0), (0.5, 0.5), (0.75, 2.0)]).unwrap();
    vec![
        DoleansMeasure::lebesgue(T, p).unwrap(),
        DoleansMeasure::constant(T, 2.0, p).unwrap(),
        DoleansMeasure::new(T, Density::Step(step), p).unwrap(),
    ]
}

proptest! {
    #[test]
    fn value_is_left_limit_plus_jump(path in step_path(2), extra in prop::collection::vec(0.0f64..=T, 8)) {
        for t in probe_times(&path, &extra) {
            let v = path.value(t).unwrap();
            let l = path.left_limit(t).unwrap();
            let j = path.jump(t).unwrap();
            for i in 0..2 {
                prop_assert!(approx_eq(v[i], l[i] + j[i], 1e-15));
                prop_assert_eq!(j[i] != 0.0, v[i] != l[i]);
            }
        }
    }

    #[test]
    fn lp_integral_additive_over_time(path in step_path(2), cut in 1u32..1024, p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)]) {
        let a = cut as f64 / 1024.0;
        let head = StepPath::scalar(T, 1.0, &[(a, 0.0)]).unwrap();
        let tail = StepPath::scalar(T, 0.0, &[(a, 1.0)]).unwrap();
        let whole = exact_lp_integral(&path, &DoleansMeasure::lebesgue(T, p).unwrap()).unwrap();
        let h = exact_lp_integral(&path, &DoleansMeasure::new(T, Density::Step(head), p).unwrap()).unwrap();
        let t = exact_lp_integral(&path, &DoleansMeasure::new(T, Density::Step(tail), p).unwrap()).unwrap();
        prop_assert!(approx_eq(whole, h + t, 1e-12), "{} vs {}", whole, h + t);
    }

    #[test]
    fn lp_integral_homogeneous(path in step_path(2), c in -4.0f64..4.0, p in prop_oneof![Just(1.0), Just(2.0), Just(1.5)]) {
        for mu in measures(p) {
            let base = exact_lp_integral(&path, &mu).unwrap();
            let scaled = exact_lp_integral(&path.scale(c), &mu).unwrap();
            prop_assert!(approx_eq(scaled, c.abs().powf(p) * base, 1e-12));
        }
    }

    #[test]
    fn left_limit_equal_almost_everywhere(path in step_path(2), p in prop_oneof![Just(1.0), Just(2.0)]) {
        let gap = path.sub(&project_left_limit(&path)).unwrap();
        for mu in measures(p) {
            prop_assert_eq!(exact_lp_integral(&gap, &mu).unwrap(), 0.0);
        }
    }

    #[test]
    fn theta_brackets_t(t in -2.0f64..2.0, n in 0u32..30) {
        let th = theta(n, t);
        let h = 2f64.powi(-(n as i32));
        prop_assert!(th < t && t <= th + h);
        prop_assert!(theta(n + 1, t) >= th);
    }

    #[test]
    fn dyadic_shift_is_predictable(
        path in scalar_path(),
        n in 1u32..9,
        s_num in 0u32..64,
        t in 0.0f64..=T,
        bump in -5.0f64..5.0,
        after in 0.0f64..1.0,
    ) {
        let params = DyadicApproxParams::new(n, s_num as f64 / 64.0).unwrap();
        let read_at = params.anchor() + theta(n, t - params.anchor());
        prop_assert!(read_at < t);
        // perturb the input strictly after the read time
        let tau = read_at.max(0.0) + (T - read_at.max(0.0)) * after;
        prop_assume!(tau > read_at && tau > 0.0 && tau <= T);
        let perturb = StepPath::scalar(T, 0.0, &[(tau, bump)]).unwrap();
        let moved = path.add(&perturb).unwrap();
        prop_assert_eq!(dyadic_value(&path, &params, t), dyadic_value(&moved, &params, t));
        let shifted = dyadic_shift(&path, &params).unwrap();
        let expect = dyadic_value(&path, &params, t);
        prop_assert_eq!(shifted.value(t).unwrap(), expect.as_slice());
    }

    #[test]
    fn left_limit_projection_idempotent(path in step_path(2), extra in prop::collection::vec(0.0f64..=T, 8)) {
        let once = project_left_limit(&path);
        let twice = project_left_limit(&once);
        for t in probe_times(&path, &extra) {
            prop_assert_eq!(once.value(t).unwrap(), twice.value(t).unwrap());
        }
    }

    #[test]
    fn truncation_shrinks_and_commutes(path in step_path(3), level in 1.0f64..6.0, extra in prop::collection::vec(0.0f64..=T, 8)) {
        let spec = TruncationSpec::new(level).unwrap();
        let cut = truncate(&path, &spec);
        let a = truncate(&project_left_limit(&path), &spec);
        let b = project_left_limit(&cut);
        for t in probe_times(&path, &extra) {
            let r = norm(cut.value(t).unwrap());
            prop_assert!(r <= norm(path.value(t).unwrap()) + 1e-12);
            prop_assert!(r <= level * (1.0 + 1e-12));
            prop_assert_eq!(a.value(t).unwrap(), b.value(t).unwrap());
        }
    }

    #[test]
    fn fv_integrals_are_linear(phi in scalar_path(), psi in scalar_path(), a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
        let n = simulate_poisson(4.0, T, Seed::new(seed, 0)).unwrap();
        let m = compensated_path(&n, 4.0).unwrap();
        let drv = Integrator::FiniteVariation(&m);
        let combo = phi.scale(a).add(&psi.scale(b)).unwrap();
        for mode in [ProjectionMode::LeftLimit, ProjectionMode::Dyadic(DyadicApproxParams::new(5, 0.0).unwrap())] {
            let lhs = ito_extended(&combo, drv, mode).unwrap();
            let i1 = ito_extended(&phi, drv, mode).unwrap();
            let i2 = ito_extended(&psi, drv, mode).unwrap();
            for t in [0.3, 0.7, T] {
                let want = a * i1.value(t).unwrap()[0] + b * i2.value(t).unwrap()[0];
                prop_assert!(approx_eq(lhs.value(t).unwrap()[0], want, 1e-12));
            }
        }
        let lhs = lebesgue_stieltjes(&combo, drv).unwrap();
        let want = a * lebesgue_stieltjes(&phi, drv).unwrap().terminal()[0]
            + b * lebesgue_stieltjes(&psi, drv).unwrap().terminal()[0];
        prop_assert!(approx_eq(lhs.terminal()[0], want, 1e-12));
    }

    #[test]
    fn sampled_integrals_are_linear(phi in scalar_path(), psi in scalar_path(), a in -3.0f64..3.0, b in -3.0f64..3.0, seed in 0u64..1000) {
        // integrand breakpoints are multiples of 1/1024, so this grid holds them
        let grid = Arc::new(TimeGrid::uniform(T, 1024).unwrap());
        let w = simulate_wiener(&grid, 1.0, Seed::new(seed, 1)).unwrap();
        let (phi, psi) = (project_left_limit(&phi), project_left_limit(&psi));
        let combo = phi.scale(a).add(&psi.scale(b)).unwrap();
        let lhs = ito_simple(&combo, Integrator::Sampled(&w)).unwrap();
        let i1 = ito_simple(&phi, Integrator::Sampled(&w)).unwrap();
        let i2 = ito_simple(&psi, Integrator::Sampled(&w)).unwrap();
        for t in [0.25, 0.5, T] {
            let want = a * i1.value(t).unwrap()[0] + b * i2.value(t).unwrap()[0];
            prop_assert!(approx_eq(lhs.value(t).unwrap()[0], want, 1e-12));
        }
    }

    #[test]
    fn qwiener_and_prm_integrals_are_linear(a in -3.0f64..3.0, b in -3.0f64..3.0, d in prop::collection::vec(-2.0f64..2.0, 6), seed in 0u64..1000) {
        let grid = Arc::new(TimeGrid::uniform(T, 16).unwrap());
        let w = itoext::drivers::simulate_q_wiener(&grid, &itoext::drivers::QSpec::new(vec![1.0, 0.5]).unwrap(), Seed::new(seed, 2));
        let op1 = HsOperator::new(1, 2, d[..2].to_vec()).unwrap();
        let op2 = HsOperator::new(1, 2, d[2..4].to_vec()).unwrap();
        let combo = HsOperator::new(1, 2, (0..2).map(|i| a * d[i] + b * d[2 + i]).collect()).unwrap();
        let i = |op: HsOperator| qwiener_integral(&OperatorStepFn::constant(T, op).unwrap(), &w).unwrap().terminal()[0];
        prop_assert!(approx_eq(i(combo), a * i(op1) + b * i(op2), 1e-12));

        let ms = MarkSpace::finite(vec![1.0, 2.0]).unwrap();
        let prm = itoext::drivers::simulate_prm(&ms, T, Seed::new(seed, 3)).unwrap();
        let g = |c: [f64; 2]| PrmIntegrand::marks_only(1, move |m| match m {
            Mark::Label(i) => vec![c[*i]],
            Mark::Point(_) => unreachable!(),
        });
        let (c1, c2) = ([d[4], d[5]], [d[5], -d[4]]);
        let cc = [a * c1[0] + b * c2[0], a * c1[1] + b * c2[1]];
        let j = |c| prm_integral(&g(c), &prm).unwrap().terminal()[0];
        prop_assert!(approx_eq(j(cc), a * j(c1) + b * j(c2), 1e-12));
    }

    #[test]
    fn dyadic_projection_exact_on_dyadic_step_integrands(phi in scalar_path(), n in 10u32..13, seed in 0u64..1000) {
        // breakpoints k/1024 are cell boundaries once 2^-n ≤ 1/1024
        let cells = 1usize << n;
        let grid = Arc::new(TimeGrid::uniform(T, cells).unwrap());
        let w = simulate_wiener(&grid, 1.0, Seed::new(seed, 4)).unwrap();
        let dy = DyadicApproxParams::new(n, 0.0).unwrap();
        let shifted = dyadic_shift(&phi, &dy).unwrap();
        // Φ(0) on (0, h] versus Φ(0-) = Φ(0): identical off {0}
        let mu = DoleansMeasure::lebesgue(T, 2.0).unwrap();
        prop_assert_eq!(exact_lp_distance(&shifted, &project_left_limit(&phi), &mu).unwrap(), 0.0);
        let a = ito_extended(&phi, Integrator::Sampled(&w), ProjectionMode::LeftLimit).unwrap();
        let b = ito_extended(&phi, Integrator::Sampled(&w), ProjectionMode::Dyadic(dy)).unwrap();
        prop_assert!(approx_eq(a.terminal()[0], b.terminal()[0], 1e-12));
    }
}

#[test]
fn sampled_path_to_step_reading() {
    let grid = Arc::new(TimeGrid::uniform(1.0, 2).unwrap());
    let w = SampledPath::new(grid, vec![Vector::scalar(0.0), Vector::scalar(1.0), Vector::scalar(-1.0)]).unwrap();
    let s = w.to_step_path();
    assert_eq!(s.side(), Side::Right);
    assert_eq!(s.value(0.5).unwrap(), &[1.0]);
    assert_eq!(s.left_limit(0.5).unwrap(), &[0.0]);
}

#[test]
fn prm_realization_rejects_out_of_range_atoms() {
    let ms = MarkSpace::finite(vec![1.0]).unwrap();
    assert!(PrmRealization::new(vec![(1.5, Mark::Label(0))], ms.clone(), 1.0).is_err());
    assert!(PrmRealization::new(vec![(0.5, Mark::Label(3))], ms, 1.0).is_err());
}
