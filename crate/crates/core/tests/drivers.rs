use std::sync::Arc;

use itoext::drivers::{
    compensated_path, simulate_poisson, simulate_prm, simulate_q_wiener, simulate_wiener, Mark, MarkSpace, QSpec, Seed,
};
use itoext::verify::{monte_carlo, McReport, SampleStats};
use itoext::TimeGrid;

const Z: f64 = 4.0;

fn variance_report(label: &str, xs: &[f64], target: f64) -> McReport {
    let st = SampleStats::of(xs);
    McReport::new(label, None, xs.len(), st.variance, target, SampleStats::variance_std_error(xs), Z)
}

#[test]
fn same_seed_same_path() {
    let grid = Arc::new(TimeGrid::uniform(1.0, 64).unwrap());
    let s = Seed::new(17, 3);
    let a = simulate_wiener(&grid, 1.0, s).unwrap();
    let b = simulate_wiener(&grid, 1.0, s).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, simulate_wiener(&grid, 1.0, s.with_stream(4)).unwrap());
    let p = simulate_poisson(3.0, 2.0, s).unwrap();
    assert_eq!(p, simulate_poisson(3.0, 2.0, s).unwrap());
    assert_ne!(s.derive(1), s.derive(2));
}

#[test]
fn poisson_count_moments() {
    let counts: Vec<f64> = monte_carlo(20_000, 11, |s| simulate_poisson(2.5, 2.0, s).unwrap().event_count() as f64);
    let m = McReport::mean_test("mean", None, &counts, 5.0, Z);
    assert!(m.pass, "{m:?}");
    let v = variance_report("var", &counts, 5.0);
    assert!(v.pass, "{v:?}");
}

#[test]
fn compensated_poisson_has_zero_mean() {
    let xs: Vec<f64> = monte_carlo(20_000, 12, |s| {
        let n = simulate_poisson(1.5, 1.0, s).unwrap();
        compensated_path(&n, 1.5).unwrap().value(0.6).unwrap()[0]
    });
    let r = McReport::mean_test("M_0.6", None, &xs, 0.0, Z);
    assert!(r.pass, "{r:?}");
}

#[test]
fn poisson_superposition() {
    // Merge two independent realizations and compare count statistics with
    // a rate-(λ₁+λ₂) process on two windows.
    let (l1, l2) = (0.7, 1.8);
    let stats: Vec<(f64, f64)> = monte_carlo(20_000, 13, |s| {
        let a = simulate_poisson(l1, 1.0, s.derive(1)).unwrap();
        let b = simulate_poisson(l2, 1.0, s.derive(2)).unwrap();
        let mut merged: Vec<f64> = a.event_times().iter().chain(b.event_times()).copied().collect();
        merged.sort_by(f64::total_cmp);
        let early = merged.iter().filter(|&&t| t <= 0.4).count() as f64;
        (early, merged.len() as f64 - early)
    });
    let early: Vec<f64> = stats.iter().map(|s| s.0).collect();
    let late: Vec<f64> = stats.iter().map(|s| s.1).collect();
    let l = l1 + l2;
    for r in [
        McReport::mean_test("early mean", None, &early, 0.4 * l, Z),
        McReport::mean_test("late mean", None, &late, 0.6 * l, Z),
        variance_report("early var", &early, 0.4 * l),
        variance_report("late var", &late, 0.6 * l),
    ] {
        assert!(r.pass, "{r:?}");
    }
    let prod: Vec<f64> = stats.iter().map(|s| (s.0 - 0.4 * l) * (s.1 - 0.6 * l)).collect();
    let cov = McReport::mean_test("window covariance", None, &prod, 0.0, Z);
    assert!(cov.pass, "{cov:?}");
}

#[test]
fn wiener_increments_uncorrelated_with_right_variance() {
    let grid = Arc::new(TimeGrid::uniform(1.0, 8).unwrap());
    let n = 20_000;
    let inc: Vec<(f64, f64)> = monte_carlo(n, 14, |s| {
        let w = simulate_wiener(&grid, 2.0, s).unwrap();
        (w.value(4)[0], w.value(8)[0] - w.value(4)[0])
    });
    let a: Vec<f64> = inc.iter().map(|x| x.0).collect();
    let b: Vec<f64> = inc.iter().map(|x| x.1).collect();
    let (sa, sb) = (SampleStats::of(&a), SampleStats::of(&b));
    let cov = a.iter().zip(&b).map(|(x, y)| (x - sa.mean) * (y - sb.mean)).sum::<f64>() / (n - 1) as f64;
    let corr = cov / (sa.variance * sb.variance).sqrt();
    assert!(corr.abs() <= 4.0 / (n as f64).sqrt(), "corr {corr}");
    for r in [variance_report("first half", &a, 1.0), variance_report("second half", &b, 1.0)] {
        assert!(r.pass, "{r:?}");
    }
}

#[test]
fn q_wiener_mode_variances() {
    let q = QSpec::new(vec![0.5, 0.25, 0.125]).unwrap();
    let grid = Arc::new(TimeGrid::uniform(2.0, 4).unwrap());
    let ends: Vec<Vec<f64>> = monte_carlo(20_000, 15, |s| simulate_q_wiener(&grid, &q, s).last().to_vec());
    for (j, lambda) in q.eigenvalues().iter().enumerate() {
        let xs: Vec<f64> = ends.iter().map(|v| v[j]).collect();
        let r = variance_report("mode", &xs, 2.0 * lambda);
        assert!(r.pass, "mode {j}: {r:?}");
    }
    let cross: Vec<f64> = ends.iter().map(|v| v[0] * v[2]).collect();
    let r = McReport::mean_test("cross", None, &cross, 0.0, Z);
    assert!(r.pass, "{r:?}");
}

#[test]
fn prm_counts_per_mark() {
    let ms = MarkSpace::finite(vec![0.5, 1.5, 3.0]).unwrap();
    let counts: Vec<Vec<f64>> = monte_carlo(20_000, 16, |s| {
        let prm = simulate_prm(&ms, 2.0, s).unwrap();
        (0..3).map(|i| prm.count(2.0, |m| *m == Mark::Label(i)) as f64).collect()
    });
    for (i, w) in [0.5, 1.5, 3.0].iter().enumerate() {
        let xs: Vec<f64> = counts.iter().map(|c| c[i]).collect();
        let r = McReport::mean_test("count", None, &xs, 2.0 * w, Z);
        assert!(r.pass, "mark {i}: {r:?}");
        let r = variance_report("count var", &xs, 2.0 * w);
        assert!(r.pass, "mark {i}: {r:?}");
    }
}

#[test]
fn prm_compensation_for_bounded_g() {
    let ms = MarkSpace::interval(0.0, 2.0, |x: f64| 1.0 + x, 3.0).unwrap();
    let g = |m: &Mark| match m {
        Mark::Point(x) => (3.0 * x).sin(),
        Mark::Label(_) => unreachable!(),
    };
    let compensator = 1.5 * ms.integrate_scalar(g);
    let xs: Vec<f64> = monte_carlo(20_000, 17, |s| {
        let prm = simulate_prm(&ms, 1.5, s).unwrap();
        prm.atoms().iter().map(|(_, m)| g(m)).sum::<f64>() - compensator
    });
    let r = McReport::mean_test("compensated sum", None, &xs, 0.0, Z);
    assert!(r.pass, "{r:?}");
}
