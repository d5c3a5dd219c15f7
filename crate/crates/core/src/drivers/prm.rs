use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::{PathRng, Seed};
use crate::error::{domain, Result};

/// A point of the mark space `E`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mark {
    /// Index into a finite mark set.
    Label(usize),
    /// Point of an interval mark space.
    Point(f64),
}

type MarkDensity = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum MarkKind {
    Finite { weights: Vec<f64>, cumulative: Vec<f64> },
    Interval { lo: f64, hi: f64, density: MarkDensity, bound: f64 },
}

/// Finite intensity measure `β` on the mark space `E`.
#[derive(Clone)]
pub struct MarkSpace {
    kind: MarkKind,
    total_mass: f64,
    // (mark, weight) pairs with Σ weight · g(mark) = ∫ g dβ; exact for finite
    // mark sets, composite Simpson for interval densities.
    quadrature: Vec<(Mark, f64)>,
}

const SIMPSON_PANELS: usize = 2048;

impl MarkSpace {
    /// `β = Σ_i w_i δ_i` on the labels `0..weights.len()`.
    pub fn finite(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return domain("finite mark space needs at least one mark");
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return domain(format!("mark weights must be positive and finite, got {w}"));
        }
        let mut cumulative = Vec::with_capacity(weights.len());
        let mut acc = 0.0;
        for w in &weights {
            acc += w;
            cumulative.push(acc);
        }
        let quadrature = weights.iter().enumerate().map(|(i, &w)| (Mark::Label(i), w)).collect();
        Ok(MarkSpace { total_mass: acc, kind: MarkKind::Finite { weights, cumulative }, quadrature })
    }

    /// `β(dx) = density(x) dx` on `[lo, hi]`, with `0 ≤ density ≤ bound`.
    pub fn interval(
        lo: f64,
        hi: f64,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bound: f64,
    ) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return domain(format!("mark interval [{lo}, {hi}] is empty or unbounded"));
        }
        if !(bound > 0.0 && bound.is_finite()) {
            return domain("density bound must be positive and finite");
        }
        let h = (hi - lo) / SIMPSON_PANELS as f64;
        let mut quadrature = Vec::with_capacity(SIMPSON_PANELS + 1);
        for i in 0..=SIMPSON_PANELS {
            let x = if i == SIMPSON_PANELS { hi } else { lo + i as f64 * h };
            let rho = density(x);
            if !(0.0..=bound).contains(&rho) {
                return domain(format!("density {rho} at {x} outside [0, {bound}]"));
            }
            let c = if i == 0 || i == SIMPSON_PANELS {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            quadrature.push((Mark::Point(x), c * h / 3.0 * rho));
        }
        let total_mass: f64 = quadrature.iter().map(|(_, w)| w).sum();
        if total_mass.is_nan() || total_mass <= 0.0 {
            return domain("mark density has zero total mass");
        }
        let kind = MarkKind::Interval { lo, hi, density: Arc::new(density), bound };
        Ok(MarkSpace { kind, total_mass, quadrature })
    }

    /// Whether `mark` is a point of `E`.
    pub fn contains(&self, mark: &Mark) -> bool {
        match (&self.kind, mark) {
            (MarkKind::Finite { weights, .. }, Mark::Label(i)) => *i < weights.len(),
            (MarkKind::Interval { lo, hi, .. }, Mark::Point(x)) => (*lo..=*hi).contains(x),
            _ => false,
        }
    }

    /// `β(E)`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// Weight `β({i})` of a finite mark.
    pub fn weight(&self, label: usize) -> Option<f64> {
        match &self.kind {
            MarkKind::Finite { weights, .. } => weights.get(label).copied(),
            MarkKind::Interval { .. } => None,
        }
    }

    /// `∫_E g dβ` for vector-valued `g` of dimension `dim`.
    pub fn integrate(&self, dim: usize, mut g: impl FnMut(&Mark) -> Vec<f64>) -> Vec<f64> {
        let mut acc = vec![0.0; dim];
        for (m, w) in &self.quadrature {
            for (a, v) in acc.iter_mut().zip(g(m)) {
                *a += w * v;
            }
        }
        acc
    }

    pub fn integrate_scalar(&self, mut g: impl FnMut(&Mark) -> f64) -> f64 {
        self.quadrature.iter().map(|(m, w)| w * g(m)).sum()
    }

    /// `β(A)` for `A = {x : pred(x)}`.
    pub fn mass_of(&self, pred: impl Fn(&Mark) -> bool) -> f64 {
        self.integrate_scalar(|m| if pred(m) { 1.0 } else { 0.0 })
    }

    /// Draw a mark from the normalised law `β / β(E)`.
    pub fn sample_mark(&self, rng: &mut PathRng) -> Mark {
        match &self.kind {
            MarkKind::Finite { cumulative, .. } => {
                let u = rng.random::<f64>() * self.total_mass;
                let i = cumulative.partition_point(|&c| c <= u);
                Mark::Label(i.min(cumulative.len() - 1))
            }
            MarkKind::Interval { lo, hi, density, bound } => loop {
                let x = lo + (hi - lo) * rng.random::<f64>();
                if rng.random::<f64>() * bound < density(x) {
                    return Mark::Point(x);
                }
            },
        }
    }
}

impl fmt::Debug for MarkSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            MarkKind::Finite { weights, .. } => f.debug_struct("MarkSpace::Finite").field("weights", weights).finish(),
            MarkKind::Interval { lo, hi, bound, .. } => f
                .debug_struct("MarkSpace::Interval")
                .field("lo", lo)
                .field("hi", hi)
                .field("bound", bound)
                .field("total_mass", &self.total_mass)
                .finish(),
        }
    }
}

/// Atoms `(τ_i, ξ_i)` of a Poisson random measure on `(0, T] × E`, sorted by time.
#[derive(Debug, Clone)]
pub struct PrmRealization {
    atoms: Vec<(f64, Mark)>,
    mark_space: MarkSpace,
    horizon: f64,
}

impl PrmRealization {
    /// Build from explicit atoms, which must have strictly increasing times in `(0, T]`.
    pub fn new(atoms: Vec<(f64, Mark)>, mark_space: MarkSpace, horizon: f64) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return domain(format!("horizon must be positive and finite, got {horizon}"));
        }
        if atoms.iter().any(|&(t, _)| !(t > 0.0 && t <= horizon)) {
            return domain("atom time outside (0, T]");
        }
        if atoms.windows(2).any(|w| w[0].0 >= w[1].0) {
            return domain("atom times must be strictly increasing");
        }
        if let Some((_, m)) = atoms.iter().find(|(_, m)| !mark_space.contains(m)) {
            return domain(format!("mark {m:?} is not in the mark space"));
        }
        Ok(PrmRealization { atoms, mark_space, horizon })
    }

    pub fn atoms(&self) -> &[(f64, Mark)] {
        &self.atoms
    }

    pub fn atom_times(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    pub fn mark_space(&self) -> &MarkSpace {
        &self.mark_space
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `N([0, t] × A)`.
    pub fn count(&self, t: f64, pred: impl Fn(&Mark) -> bool) -> usize {
        self.atoms.iter().filter(|(s, m)| *s <= t && pred(m)).count()
    }
}

/// Homogeneous Poisson random measure with compensator `dt ⊗ β(dx)` on `[0, T] × E`.
pub fn simulate_prm(mark_space: &MarkSpace, horizon: f64, seed: Seed) -> Result<PrmRealization> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return domain(format!("horizon must be positive and finite, got {horizon}"));
    }
    let mut rng = seed.rng();
    let mean = mark_space.total_mass() * horizon;
    let law = Poisson::new(mean).map_err(|e| crate::Error::Domain(e.to_string()))?;
    let count = law.sample(&mut rng) as usize;
    let uniform_time = |rng: &mut PathRng| horizon * (1.0 - rng.random::<f64>());
    let mut times: Vec<f64> = (0..count).map(|_| uniform_time(&mut rng)).collect();
    times.sort_by(f64::total_cmp);
    // Ties have probability zero; redraw until the times are distinct.
    while times.windows(2).any(|w| w[0] == w[1]) {
        times.dedup();
        while times.len() < count {
            times.push(uniform_time(&mut rng));
        }
        times.sort_by(f64::total_cmp);
    }
    let atoms = times.into_iter().map(|t| (t, mark_space.sample_mark(&mut rng))).collect();
    Ok(PrmRealization { atoms, mark_space: mark_space.clone(), horizon })
}
