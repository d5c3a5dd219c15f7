//! Mild solutions of
//! `dr = (A r + α(t, r)) dt + σ(t, r) dW + ∫_E γ(t, x, r) q(dt, dx)`, `r_0 = h_0`,
//! for a diagonal generator `A e_j = -μ_j e_j`, truncated to the first
//! `modes` eigenfunctions.
//!
//! One cell `[t_k, t_{k+1}]` of width `Δ` advances every mode by
//!
//! ```text
//! r_j ← e^{-μ_j Δ} (r_j + α_j Δ + (σ ΔW)_j + Σ_{atoms in cell} γ_j(ξ) - Δ ∫_E γ_j dβ)
//! ```
//!
//! with all coefficients evaluated at `(t_k, r(t_k))`. The grid is refined to
//! contain every atom time of the random measure, so each atom closes a cell.

use std::fmt;
use std::sync::Arc;

use crate::drivers::{simulate_prm, simulate_q_wiener, Mark, MarkSpace, PrmRealization, QSpec, Seed};
use crate::error::{check_dim, domain, Error, Result};
use crate::grid::TimeGrid;
use crate::integrate::HsOperator;
use crate::path::SampledPath;
use crate::vector::{norm, Vector};

type StateFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;
type OperatorFn = Arc<dyn Fn(f64, &[f64]) -> HsOperator + Send + Sync>;
type MarkFn = Arc<dyn Fn(&Mark) -> Vec<f64> + Send + Sync>;
type JumpFn = Arc<dyn Fn(f64, &Mark, &[f64]) -> Vec<f64> + Send + Sync>;

/// Drift `α(t, r)`.
#[derive(Clone)]
pub enum Drift {
    Zero,
    /// `α(t, r) = B r`.
    Linear(HsOperator),
    Fn(StateFn),
}

/// Diffusion `σ(t, r)`, an operator from the noise modes into the state modes.
#[derive(Clone)]
pub enum Diffusion {
    Additive(HsOperator),
    Fn(OperatorFn),
}

/// Jump coefficient `γ(t, x, r)`.
#[derive(Clone)]
pub enum JumpCoefficient {
    /// `γ(t, x, r) = g(x)`.
    Additive(MarkFn),
    Fn(JumpFn),
}

#[derive(Clone)]
pub struct WienerNoise {
    pub qspec: QSpec,
    pub sigma: Diffusion,
}

#[derive(Clone)]
pub struct JumpNoise {
    pub mark_space: MarkSpace,
    pub gamma: JumpCoefficient,
}

/// Problem data for the mild solver.
#[derive(Clone)]
pub struct SpdeSpec {
    generator_eigs: Vec<f64>,
    modes: usize,
    h0: Vector,
    grid: Arc<TimeGrid>,
    drift: Drift,
    wiener: Option<WienerNoise>,
    jumps: Option<JumpNoise>,
}

impl fmt::Debug for SpdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpdeSpec")
            .field("generator_eigs", &self.generator_eigs)
            .field("modes", &self.modes)
            .field("h0", &self.h0)
            .field("cells", &self.grid.cells())
            .field("wiener", &self.wiener.as_ref().map(|w| w.qspec.eigenvalues().to_vec()))
            .field("jumps", &self.jumps.as_ref().map(|j| j.mark_space.total_mass()))
            .finish()
    }
}

/// `μ_j = j² π²`, the Dirichlet Laplacian spectrum on `(0, 1)`.
pub fn heat_eigenvalues(modes: usize) -> Vec<f64> {
    (1..=modes).map(|j| (j as f64 * std::f64::consts::PI).powi(2)).collect()
}

impl SpdeSpec {
    /// Deterministic heat flow; add noise and drift with the `with_*` builders.
    pub fn new(generator_eigs: Vec<f64>, modes: usize, h0: impl Into<Vector>, grid: Arc<TimeGrid>) -> Result<Self> {
        let h0 = h0.into();
        if modes == 0 {
            return domain("at least one Galerkin mode is required");
        }
        if generator_eigs.len() < modes {
            return domain(format!("{} generator eigenvalues for {modes} modes", generator_eigs.len()));
        }
        if let Some(m) = generator_eigs.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return domain(format!("generator eigenvalues must be positive, got {m}"));
        }
        check_dim(modes, h0.dim())?;
        Ok(SpdeSpec { generator_eigs, modes, h0, grid, drift: Drift::Zero, wiener: None, jumps: None })
    }

    pub fn with_drift(mut self, drift: Drift) -> Result<Self> {
        if let Drift::Linear(b) = &drift {
            check_dim(self.modes, b.rows())?;
            check_dim(self.modes, b.cols())?;
        }
        self.drift = drift;
        Ok(self)
    }

    /// Q-Wiener forcing; `qspec` is truncated to the Galerkin modes.
    pub fn with_wiener(mut self, qspec: QSpec, sigma: Diffusion) -> Result<Self> {
        if qspec.modes() < self.modes {
            return domain(format!("{} noise eigenvalues for {} modes", qspec.modes(), self.modes));
        }
        let qspec = QSpec::new(qspec.eigenvalues()[..self.modes].to_vec())?;
        if let Diffusion::Additive(s) = &sigma {
            check_dim(self.modes, s.rows())?;
            check_dim(self.modes, s.cols())?;
        }
        self.wiener = Some(WienerNoise { qspec, sigma });
        Ok(self)
    }

    pub fn with_jumps(mut self, mark_space: MarkSpace, gamma: JumpCoefficient) -> Self {
        self.jumps = Some(JumpNoise { mark_space, gamma });
        self
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn generator_eigs(&self) -> &[f64] {
        &self.generator_eigs[..self.modes]
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn h0(&self) -> &Vector {
        &self.h0
    }

    pub fn wiener(&self) -> Option<&WienerNoise> {
        self.wiener.as_ref()
    }

    pub fn jumps(&self) -> Option<&JumpNoise> {
        self.jumps.as_ref()
    }
}

/// One realization of the driving noise on a grid that contains every atom time.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    grid: Arc<TimeGrid>,
    wiener: Option<SampledPath>,
    prm: Option<PrmRealization>,
    // (cell, atom index), sorted.
    atom_cells: Vec<(usize, usize)>,
}

impl NoiseRealization {
    pub fn new(grid: Arc<TimeGrid>, wiener: Option<SampledPath>, prm: Option<PrmRealization>) -> Result<Self> {
        if let Some(w) = &wiener {
            if w.grid().points() != grid.points() {
                return domain("Wiener path is not sampled on the noise grid");
            }
        }
        let mut atom_cells = Vec::new();
        if let Some(prm) = &prm {
            if prm.horizon() != grid.t_end() {
                return domain("random measure horizon differs from the grid horizon");
            }
            for (i, (t, _)) in prm.atoms().iter().enumerate() {
                let k = grid
                    .index_of(*t)
                    .ok_or_else(|| Error::Domain(format!("atom time {t} is not a grid point")))?;
                atom_cells.push((k - 1, i));
            }
        }
        Ok(NoiseRealization { grid, wiener, prm, atom_cells })
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn wiener(&self) -> Option<&SampledPath> {
        self.wiener.as_ref()
    }

    pub fn prm(&self) -> Option<&PrmRealization> {
        self.prm.as_ref()
    }
}

/// Draw the noise for `spec` from `seed`: atoms first, then the Wiener path
/// on the grid refined by the atom times.
pub fn sample_noise(spec: &SpdeSpec, seed: Seed) -> Result<NoiseRealization> {
    let horizon = spec.grid.t_end();
    let prm = match &spec.jumps {
        Some(j) => Some(simulate_prm(&j.mark_space, horizon, seed.derive(1))?),
        None => None,
    };
    let grid = match &prm {
        Some(p) if !p.atoms().is_empty() => Arc::new(spec.grid.refine(&p.atom_times())?),
        _ => spec.grid.clone(),
    };
    let wiener = spec.wiener.as_ref().map(|w| simulate_q_wiener(&grid, &w.qspec, seed.derive(2)));
    NoiseRealization::new(grid, wiener, prm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMode {
    OnePass,
    Picard,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    /// Mode coordinates of `r` on the (refined) noise grid.
    pub trajectory: SampledPath,
    /// Sup-norm gaps between successive Picard iterates; empty for one pass.
    pub picard_residuals: Vec<f64>,
    pub mode: SolveMode,
}

impl SolveReport {
    pub fn value_at(&self, t: f64) -> Result<&[f64]> {
        self.trajectory.value_at(t)
    }
}

struct Stepper<'a> {
    spec: &'a SpdeSpec,
    noise: &'a NoiseRealization,
    decay: Vec<f64>,
    additive_compensator: Option<Vec<f64>>,
}

impl<'a> Stepper<'a> {
    fn new(spec: &'a SpdeSpec, noise: &'a NoiseRealization) -> Result<Self> {
        if noise.grid.t_end() != spec.grid.t_end() {
            return domain("noise grid and problem grid have different horizons");
        }
        if spec.wiener.is_some() != noise.wiener.is_some() || spec.jumps.is_some() != noise.prm.is_some() {
            return domain("noise realization does not match the noise terms of the problem");
        }
        if let (Some(w), Some(path)) = (&spec.wiener, &noise.wiener) {
            check_dim(w.qspec.modes(), path.dim())?;
        }
        let additive_compensator = match &spec.jumps {
            Some(JumpNoise { mark_space, gamma: JumpCoefficient::Additive(g) }) => {
                Some(mark_space.integrate(spec.modes, |x| g(x)))
            }
            _ => None,
        };
        Ok(Stepper { spec, noise, decay: Vec::new(), additive_compensator })
    }

    fn prepare_decay(&mut self, k: usize) -> f64 {
        let pts = self.noise.grid.points();
        let dt = pts[k + 1] - pts[k];
        self.decay.clear();
        self.decay.extend(self.spec.generator_eigs().iter().map(|m| (-m * dt).exp()));
        dt
    }

    // out = r_next given the frozen left-endpoint state `frozen` and the
    // current iterate value `base` at t_k.
    fn step(&mut self, k: usize, atom_cursor: &mut usize, base: &[f64], frozen: &[f64], out: &mut [f64]) {
        let spec = self.spec;
        let t = self.noise.grid.points()[k];
        let dt = self.prepare_decay(k);
        out.copy_from_slice(base);
        match &spec.drift {
            Drift::Zero => {}
            Drift::Linear(b) => {
                let mut tmp = vec![0.0; spec.modes];
                b.apply_add(frozen, &mut tmp);
                out.iter_mut().zip(tmp).for_each(|(o, a)| *o += a * dt);
            }
            Drift::Fn(f) => out.iter_mut().zip(f(t, frozen)).for_each(|(o, a)| *o += a * dt),
        }
        if let (Some(w), Some(path)) = (&spec.wiener, &self.noise.wiener) {
            let dw = path.increment(k);
            match &w.sigma {
                Diffusion::Additive(s) => s.apply_add(&dw, out),
                Diffusion::Fn(f) => f(t, frozen).apply_add(&dw, out),
            }
        }
        if let (Some(j), Some(prm)) = (&spec.jumps, &self.noise.prm) {
            while let Some(&(cell, i)) = self.noise.atom_cells.get(*atom_cursor) {
                if cell != k {
                    break;
                }
                let x = &prm.atoms()[i].1;
                let g = match &j.gamma {
                    JumpCoefficient::Additive(g) => g(x),
                    JumpCoefficient::Fn(g) => g(t, x, frozen),
                };
                out.iter_mut().zip(g).for_each(|(o, g)| *o += g);
                *atom_cursor += 1;
            }
            let comp = match (&j.gamma, &self.additive_compensator) {
                (JumpCoefficient::Additive(_), Some(c)) => c.clone(),
                (JumpCoefficient::Fn(g), _) => j.mark_space.integrate(spec.modes, |x| g(t, x, frozen)),
                (JumpCoefficient::Additive(g), None) => j.mark_space.integrate(spec.modes, |x| g(x)),
            };
            out.iter_mut().zip(comp).for_each(|(o, c)| *o -= c * dt);
        }
        out.iter_mut().zip(&self.decay).for_each(|(o, d)| *o *= d);
    }

    // Γ(input): the discrete mild map with coefficients frozen along `input`.
    // With `input = None` the map is applied along its own output (one pass).
    fn sweep(&mut self, input: Option<&[f64]>) -> Result<Vec<f64>> {
        let d = self.spec.modes;
        let cells = self.noise.grid.cells();
        let mut data = Vec::with_capacity((cells + 1) * d);
        data.extend_from_slice(self.spec.h0.as_slice());
        let mut base = self.spec.h0.as_slice().to_vec();
        let mut next = vec![0.0; d];
        let mut cursor = 0;
        for k in 0..cells {
            let frozen = match input {
                Some(inp) => &inp[k * d..(k + 1) * d],
                None => &base[..],
            };
            self.step(k, &mut cursor, &base, frozen, &mut next);
            if next.iter().any(|x| !x.is_finite()) {
                return Err(Error::Divergence { cell: k });
            }
            data.extend_from_slice(&next);
            std::mem::swap(&mut base, &mut next);
        }
        Ok(data)
    }
}

/// One-pass exponential scheme on a given noise realization.
pub fn mild_step_solve_with_noise(spec: &SpdeSpec, noise: &NoiseRealization) -> Result<SolveReport> {
    let data = Stepper::new(spec, noise)?.sweep(None)?;
    Ok(SolveReport {
        trajectory: SampledPath::from_flat(noise.grid.clone(), spec.modes, data),
        picard_residuals: Vec::new(),
        mode: SolveMode::OnePass,
    })
}

pub fn mild_step_solve(spec: &SpdeSpec, seed: Seed) -> Result<SolveReport> {
    mild_step_solve_with_noise(spec, &sample_noise(spec, seed)?)
}

fn sup_gap(a: &[f64], b: &[f64], d: usize) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    diff.chunks(d).map(norm).fold(0.0, f64::max)
}

/// Picard iteration `r^{(k+1)} = Γ(r^{(k)})` of the discrete mild map on a
/// fixed noise realization, started from `r^{(0)} ≡ h_0`.
pub fn picard_solve_with_noise(
    spec: &SpdeSpec,
    noise: &NoiseRealization,
    max_iters: usize,
    tol: f64,
) -> Result<SolveReport> {
    let d = spec.modes;
    let mut stepper = Stepper::new(spec, noise)?;
    let mut current: Vec<f64> = spec.h0.as_slice().repeat(noise.grid.len());
    let mut residuals = Vec::new();
    for _ in 0..max_iters {
        let next = stepper.sweep(Some(&current))?;
        let gap = sup_gap(&next, &current, d);
        residuals.push(gap);
        current = next;
        if gap < tol {
            return Ok(SolveReport {
                trajectory: SampledPath::from_flat(noise.grid.clone(), d, current),
                picard_residuals: residuals,
                mode: SolveMode::Picard,
            });
        }
    }
    Err(Error::FixedPointFailure { residuals })
}

pub fn picard_solve(spec: &SpdeSpec, seed: Seed, max_iters: usize, tol: f64) -> Result<SolveReport> {
    picard_solve_with_noise(spec, &sample_noise(spec, seed)?, max_iters, tol)
}

/// Second moment of mode `j` for additive diagonal noise:
/// `σ_jj² λ_j (1 - e^{-2 μ_j t}) / (2 μ_j)`.
pub fn ou_variance(sigma_jj: f64, lambda_j: f64, mu_j: f64, t: f64) -> f64 {
    sigma_jj * sigma_jj * lambda_j * (-(-2.0 * mu_j * t).exp_m1()) / (2.0 * mu_j)
}
