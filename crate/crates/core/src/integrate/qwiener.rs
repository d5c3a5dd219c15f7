use super::{DriverKind, IntegralPath, IntegralProcess, Provenance};
use crate::drivers::QSpec;
use crate::error::{check_dim, domain, Result};
use crate::path::SampledPath;

/// Linear map from the eigen-coordinates of `U` into `H`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HsOperator {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl HsOperator {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return domain("operator must have at least one row and one column");
        }
        check_dim(rows * cols, data.len())?;
        Ok(HsOperator { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        HsOperator { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut op = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            op.data[i * n + i] = *d;
        }
        op
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }

    pub fn set(&mut self, row: usize, col: usize, v: f64) {
        self.data[row * self.cols + col] = v;
    }

    pub fn scale(&self, c: f64) -> HsOperator {
        HsOperator { data: self.data.iter().map(|x| c * x).collect(), ..*self }
    }

    /// `out += self · x`.
    pub fn apply_add(&self, x: &[f64], out: &mut [f64]) {
        for (r, o) in out.iter_mut().enumerate().take(self.rows) {
            let row = &self.data[r * self.cols..(r + 1) * self.cols];
            *o += row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        self.apply_add(x, &mut out);
        out
    }

    /// Frobenius norm, an upper bound for the operator norm.
    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

fn hs_norm_sq(op: &HsOperator, q: &QSpec) -> Result<f64> {
    check_dim(q.modes(), op.cols)?;
    let mut s = 0.0;
    for (j, lambda) in q.eigenvalues().iter().enumerate() {
        let col: f64 = (0..op.rows).map(|r| op.get(r, j).powi(2)).sum();
        s += lambda * col;
    }
    Ok(s)
}

/// `‖Φ‖_{L⁰₂} = (Σ_j λ_j ‖Φ e_j‖²)^{1/2}`.
pub fn hs_norm(op: &HsOperator, q: &QSpec) -> Result<f64> {
    hs_norm_sq(op, q).map(f64::sqrt)
}

/// Predictable operator-valued step function: `ops[i]` acts on
/// `(anchors[i], anchors[i+1]]`, with `anchors[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorStepFn {
    horizon: f64,
    anchors: Vec<f64>,
    ops: Vec<HsOperator>,
}

impl OperatorStepFn {
    pub fn new(horizon: f64, pieces: Vec<(f64, HsOperator)>) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) {
            return domain(format!("horizon must be positive and finite, got {horizon}"));
        }
        if pieces.first().map(|p| p.0) != Some(0.0) {
            return domain("first operator piece must start at 0");
        }
        if pieces.windows(2).any(|w| w[0].0 >= w[1].0) || pieces.iter().any(|p| p.0 >= horizon) {
            return domain("operator anchors must be strictly increasing in [0, T)");
        }
        let (rows, cols) = (pieces[0].1.rows, pieces[0].1.cols);
        for (_, op) in &pieces {
            check_dim(rows, op.rows)?;
            check_dim(cols, op.cols)?;
        }
        let (anchors, ops) = pieces.into_iter().unzip();
        Ok(OperatorStepFn { horizon, anchors, ops })
    }

    pub fn constant(horizon: f64, op: HsOperator) -> Result<Self> {
        Self::new(horizon, vec![(0.0, op)])
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn rows(&self) -> usize {
        self.ops[0].rows
    }

    pub fn cols(&self) -> usize {
        self.ops[0].cols
    }

    /// Operator in force at `t` (left-continuous reading).
    pub fn at(&self, t: f64) -> &HsOperator {
        let i = self.anchors.partition_point(|&a| a < t);
        &self.ops[i.saturating_sub(1)]
    }

    /// `∫_0^T ‖Φ_s‖²_{L⁰₂} ds`, the right-hand side of the isometry.
    pub fn hs_square_integral(&self, q: &QSpec) -> Result<f64> {
        let mut s = 0.0;
        for (i, op) in self.ops.iter().enumerate() {
            let end = self.anchors.get(i + 1).copied().unwrap_or(self.horizon);
            s += hs_norm_sq(op, q)? * (end - self.anchors[i]);
        }
        Ok(s)
    }
}

/// `I_t = Σ_i Φ_{t_i}(W_{t_{i+1}∧t} - W_{t_i∧t})` for a Q-Wiener path `w`.
pub fn qwiener_integral(integrand: &OperatorStepFn, w: &SampledPath) -> Result<IntegralProcess> {
    let grid = w.grid();
    if integrand.horizon != grid.t_end() {
        return domain("integrand horizon differs from the driver grid horizon");
    }
    check_dim(w.dim(), integrand.cols())?;
    if let Some(a) = integrand.anchors.iter().find(|&&a| grid.index_of(a).is_none()) {
        return domain(format!("integrand anchor {a} is not a driver grid point; refine the grid"));
    }
    let rows = integrand.rows();
    let pts = grid.points();
    let mut data = Vec::with_capacity(pts.len() * rows);
    let mut acc = vec![0.0; rows];
    data.extend_from_slice(&acc);
    let mut piece = 0;
    for (k, &t) in pts[..grid.cells()].iter().enumerate() {
        while piece + 1 < integrand.anchors.len() && integrand.anchors[piece + 1] <= t {
            piece += 1;
        }
        integrand.ops[piece].apply_add(&w.increment(k), &mut acc);
        data.extend_from_slice(&acc);
    }
    Ok(IntegralProcess {
        path: IntegralPath::Sampled(SampledPath::from_flat(grid.clone(), rows, data)),
        driver: DriverKind::QWiener,
        provenance: Provenance::Simple,
    })
}
