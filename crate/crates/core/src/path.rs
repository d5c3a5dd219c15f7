//! Exact piecewise-constant paths and grid-sampled paths.
//!
//! A [`StepPath`] is stored as an initial value plus a list of events
//! `(time, value-after)`. The same data can be read right-continuously
//! (càdlàg, the usual representation of an adapted jump path) or
//! left-continuously (càglàd, the representation of a predictable step
//! integrand such as `Φ_-` or a dyadic approximation). On the open intervals
//! between event times both readings agree, so every Lebesgue-type integral
//! of a path is independent of the reading.

use std::sync::Arc;

use crate::error::{check_dim, domain, Result};
use crate::grid::TimeGrid;
use crate::vector::Vector;

/// Which side a step path is continuous from at its event times.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// `value(t)` is the value after the last event at or before `t`.
    Right,
    /// `value(t)` is the value after the last event strictly before `t`.
    Left,
}

/// Piecewise-constant vector-valued path on `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    horizon: f64,
    dim: usize,
    side: Side,
    times: Vec<f64>,
    // piece 0 is the initial value, piece i+1 the value after event i.
    pieces: Vec<f64>,
}

impl StepPath {
    /// Càdlàg path with event times strictly increasing in `(0, T]`.
    pub fn new(horizon: f64, initial: impl Into<Vector>, events: Vec<(f64, Vector)>) -> Result<Self> {
        Self::build(horizon, initial.into(), events, Side::Right)
    }

    /// Left-continuous path; event times strictly increasing in `[0, T]`.
    pub fn left_continuous(
        horizon: f64,
        initial: impl Into<Vector>,
        events: Vec<(f64, Vector)>,
    ) -> Result<Self> {
        Self::build(horizon, initial.into(), events, Side::Left)
    }

    pub fn constant(horizon: f64, value: impl Into<Vector>) -> Result<Self> {
        Self::new(horizon, value, Vec::new())
    }

    /// Scalar càdlàg path from `(time, value)` pairs.
    pub fn scalar(horizon: f64, initial: f64, events: &[(f64, f64)]) -> Result<Self> {
        Self::new(
            horizon,
            initial,
            events.iter().map(|&(t, v)| (t, Vector::scalar(v))).collect(),
        )
    }

    fn build(horizon: f64, initial: Vector, events: Vec<(f64, Vector)>, side: Side) -> Result<Self> {
        check_horizon(horizon)?;
        let dim = initial.dim();
        if dim == 0 {
            return domain("path values must have at least one coordinate");
        }
        let mut times = Vec::with_capacity(events.len());
        let mut pieces = Vec::with_capacity((events.len() + 1) * dim);
        pieces.extend_from_slice(&initial);
        let lower_ok = |t: f64| match side {
            Side::Right => t > 0.0,
            Side::Left => t >= 0.0,
        };
        for (t, v) in events {
            check_dim(dim, v.dim())?;
            if !lower_ok(t) || t > horizon || !t.is_finite() {
                return domain(format!("event time {t} outside the horizon (0, {horizon}]"));
            }
            if times.last().is_some_and(|&last| t <= last) {
                return domain(format!("event times not strictly increasing at {t}"));
            }
            times.push(t);
            pieces.extend_from_slice(&v);
        }
        Ok(StepPath { horizon, dim, side, times, pieces })
    }

    pub(crate) fn from_raw(horizon: f64, dim: usize, side: Side, times: Vec<f64>, pieces: Vec<f64>) -> Self {
        debug_assert_eq!(pieces.len(), (times.len() + 1) * dim);
        debug_assert!(times.windows(2).all(|w| w[0] < w[1]));
        StepPath { horizon, dim, side, times, pieces }
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn event_times(&self) -> &[f64] {
        &self.times
    }

    pub fn event_count(&self) -> usize {
        self.times.len()
    }

    pub fn initial(&self) -> &[f64] {
        self.piece(0)
    }

    /// Value on the `i`-th constancy interval (0 = before the first event).
    pub fn piece(&self, i: usize) -> &[f64] {
        &self.pieces[i * self.dim..(i + 1) * self.dim]
    }

    pub fn piece_count(&self) -> usize {
        self.times.len() + 1
    }

    /// Constancy intervals `(start, end, piece)` covering `[0, T]`; zero-length
    /// intervals are skipped.
    pub fn intervals(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        (0..self.piece_count()).filter_map(move |i| {
            let a = if i == 0 { 0.0 } else { self.times[i - 1] };
            let b = self.times.get(i).copied().unwrap_or(self.horizon);
            (b > a).then_some((a, b, i))
        })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.horizon).contains(&t) {
            Ok(())
        } else {
            domain(format!("time {t} outside [0, {}]", self.horizon))
        }
    }

    // Number of events at or before t (inclusive) or strictly before t.
    fn events_before(&self, t: f64, inclusive: bool) -> usize {
        if inclusive {
            self.times.partition_point(|&s| s <= t)
        } else {
            self.times.partition_point(|&s| s < t)
        }
    }

    /// Evaluation according to the path's [`Side`].
    pub fn value(&self, t: f64) -> Result<&[f64]> {
        self.check_time(t)?;
        Ok(self.piece(self.events_before(t, self.side == Side::Right)))
    }

    /// Strict-past value `Φ(t-)`, with the convention `Φ(0-) = Φ(0)` initial.
    pub fn left_limit(&self, t: f64) -> Result<&[f64]> {
        self.check_time(t)?;
        Ok(self.piece(self.events_before(t, false)))
    }

    /// Right limit `Φ(t+)`; equals `value(t)` for càdlàg paths.
    pub fn right_limit(&self, t: f64) -> Result<&[f64]> {
        self.check_time(t)?;
        Ok(self.piece(self.events_before(t, true)))
    }

    /// `value(t) - left_limit(t)`.
    pub fn jump(&self, t: f64) -> Result<Vector> {
        let v = self.value(t)?;
        let l = self.left_limit(t)?;
        Ok(v.iter().zip(l).map(|(a, b)| a - b).collect::<Vec<_>>().into())
    }

    /// Same events read with a different continuity side.
    pub fn with_side(&self, side: Side) -> StepPath {
        StepPath { side, ..self.clone() }
    }

    /// Apply `f` to every piece value. The output dimension is taken from the
    /// image of the initial value.
    pub fn map(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> StepPath {
        let first = f(self.piece(0));
        let dim = first.len();
        let mut pieces = Vec::with_capacity(self.piece_count() * dim);
        pieces.extend(first);
        for i in 1..self.piece_count() {
            let v = f(self.piece(i));
            assert_eq!(v.len(), dim, "map must preserve the output dimension");
            pieces.extend(v);
        }
        StepPath::from_raw(self.horizon, dim, self.side, self.times.clone(), pieces)
    }

    pub fn scale(&self, c: f64) -> StepPath {
        self.map(|v| v.iter().map(|x| c * x).collect())
    }

    /// Pointwise combination on the merged event set. The result takes
    /// `self`'s side and is defined by the values on the open intervals, so at
    /// event times where the two paths read from different sides it is a
    /// representative equal to the pointwise combination off a finite set.
    pub fn zip_with(&self, other: &StepPath, mut f: impl FnMut(&[f64], &[f64]) -> Vec<f64>) -> Result<StepPath> {
        if self.horizon != other.horizon {
            return domain(format!("horizon mismatch: {} vs {}", self.horizon, other.horizon));
        }
        let mut times = Vec::with_capacity(self.times.len() + other.times.len());
        let first = f(self.piece(0), other.piece(0));
        let dim = first.len();
        let mut pieces = first;
        let (mut i, mut j) = (0, 0);
        while i < self.times.len() || j < other.times.len() {
            let ta = self.times.get(i).copied().unwrap_or(f64::INFINITY);
            let tb = other.times.get(j).copied().unwrap_or(f64::INFINITY);
            let t = ta.min(tb);
            if ta == t {
                i += 1;
            }
            if tb == t {
                j += 1;
            }
            times.push(t);
            let v = f(self.piece(i), other.piece(j));
            check_dim(dim, v.len())?;
            pieces.extend(v);
        }
        Ok(StepPath::from_raw(self.horizon, dim, self.side, times, pieces))
    }

    pub fn sub(&self, other: &StepPath) -> Result<StepPath> {
        check_dim(self.dim, other.dim)?;
        self.zip_with(other, |a, b| a.iter().zip(b).map(|(x, y)| x - y).collect())
    }

    pub fn add(&self, other: &StepPath) -> Result<StepPath> {
        check_dim(self.dim, other.dim)?;
        self.zip_with(other, |a, b| a.iter().zip(b).map(|(x, y)| x + y).collect())
    }

    /// `∫_0^t value(s) ds`, exact interval sum.
    pub fn integral_to(&self, t: f64) -> Result<Vec<f64>> {
        self.check_time(t)?;
        let mut acc = vec![0.0; self.dim];
        for (a, b, i) in self.intervals() {
            if a >= t {
                break;
            }
            let len = b.min(t) - a;
            for (acc, v) in acc.iter_mut().zip(self.piece(i)) {
                *acc += v * len;
            }
        }
        Ok(acc)
    }

    /// Lebesgue measure of `{t in [0,T] : self(t) != other(t)}`, decided
    /// exactly on the merged constancy intervals.
    pub fn mismatch_measure(&self, other: &StepPath) -> Result<f64> {
        check_dim(self.dim, other.dim)?;
        let diff = self.zip_with(other, |a, b| vec![if a == b { 0.0 } else { 1.0 }])?;
        Ok(diff
            .intervals()
            .filter(|&(_, _, i)| diff.piece(i)[0] != 0.0)
            .map(|(a, b, _)| b - a)
            .sum())
    }

    /// Largest norm attained by the path.
    pub fn sup_norm(&self) -> f64 {
        (0..self.piece_count())
            .map(|i| crate::vector::norm(self.piece(i)))
            .fold(0.0, f64::max)
    }
}

fn check_horizon(horizon: f64) -> Result<()> {
    if horizon > 0.0 && horizon.is_finite() {
        Ok(())
    } else {
        domain(format!("horizon must be positive and finite, got {horizon}"))
    }
}

/// Vector-valued path sampled at the points of a time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPath {
    grid: Arc<TimeGrid>,
    dim: usize,
    data: Vec<f64>,
}

impl SampledPath {
    pub fn new(grid: Arc<TimeGrid>, values: Vec<Vector>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!("{} values for a grid of {} points", values.len(), grid.len()));
        }
        let dim = values[0].dim();
        let mut data = Vec::with_capacity(dim * values.len());
        for v in &values {
            check_dim(dim, v.dim())?;
            data.extend_from_slice(v);
        }
        Ok(SampledPath { grid, dim, data })
    }

    pub(crate) fn from_flat(grid: Arc<TimeGrid>, dim: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len() * dim);
        SampledPath { grid, dim, data }
    }

    pub fn grid(&self) -> &Arc<TimeGrid> {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Value at grid index `k`.
    pub fn value(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn last(&self) -> &[f64] {
        self.value(self.len() - 1)
    }

    /// Value at the last grid point not after `t` (step reading of the samples).
    pub fn value_at(&self, t: f64) -> Result<&[f64]> {
        match self.grid.cell_of(t) {
            Some(k) if self.grid.points()[k + 1] <= t => Ok(self.value(k + 1)),
            Some(k) => Ok(self.value(k)),
            None => domain(format!("time {t} outside [0, {}]", self.grid.t_end())),
        }
    }

    /// Increment `X(t_{k+1}) - X(t_k)` over grid cell `k`.
    pub fn increment(&self, k: usize) -> Vec<f64> {
        self.value(k + 1).iter().zip(self.value(k)).map(|(b, a)| b - a).collect()
    }

    /// Càdlàg step reading: constant on `[t_k, t_{k+1})`, value at `T` is the last sample.
    pub fn to_step_path(&self) -> StepPath {
        let times = self.grid.points()[1..].to_vec();
        StepPath::from_raw(self.grid.t_end(), self.dim, Side::Right, times, self.data.clone())
    }
}

/// Finite-variation path `X_t = J_t - ∫_0^t c(s) ds` where `J` is a pure-jump
/// step path and `c` a step rate. Compensated Poisson processes and the
/// running integrals against them have this form.
#[derive(Debug, Clone, PartialEq)]
pub struct FvPath {
    jumps: StepPath,
    compensator_rate: StepPath,
}

impl FvPath {
    pub fn new(jumps: StepPath, compensator_rate: StepPath) -> Result<Self> {
        check_dim(jumps.dim(), compensator_rate.dim())?;
        if jumps.horizon() != compensator_rate.horizon() {
            return domain("jump part and compensator rate have different horizons");
        }
        Ok(FvPath { jumps: jumps.with_side(Side::Right), compensator_rate })
    }

    pub fn jumps(&self) -> &StepPath {
        &self.jumps
    }

    pub fn compensator_rate(&self) -> &StepPath {
        &self.compensator_rate
    }

    pub fn horizon(&self) -> f64 {
        self.jumps.horizon()
    }

    pub fn dim(&self) -> usize {
        self.jumps.dim()
    }

    pub fn jump_times(&self) -> &[f64] {
        self.jumps.event_times()
    }

    /// `∫_0^t c(s) ds`.
    pub fn compensator(&self, t: f64) -> Result<Vec<f64>> {
        self.compensator_rate.integral_to(t)
    }

    pub fn value(&self, t: f64) -> Result<Vec<f64>> {
        let c = self.compensator(t)?;
        Ok(self.jumps.value(t)?.iter().zip(c).map(|(j, c)| j - c).collect())
    }

    pub fn left_limit(&self, t: f64) -> Result<Vec<f64>> {
        let c = self.compensator(t)?;
        Ok(self.jumps.left_limit(t)?.iter().zip(c).map(|(j, c)| j - c).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_jump() -> StepPath {
        StepPath::scalar(1.0, 0.0, &[(0.3, 1.0), (0.7, 2.0)]).unwrap()
    }

    #[test]
    fn value_is_right_continuous() {
        let p = two_jump();
        assert_eq!(p.value(0.3).unwrap(), &[1.0]);
        assert_eq!(p.value(0.29).unwrap(), &[0.0]);
        assert_eq!(p.value(1.0).unwrap(), &[2.0]);
    }

    #[test]
    fn left_limit_is_strict_past() {
        let p = two_jump();
        assert_eq!(p.left_limit(0.3).unwrap(), &[0.0]);
        assert_eq!(p.left_limit(0.5).unwrap(), &[1.0]);
        assert_eq!(p.left_limit(0.0).unwrap(), &[0.0]);
    }

    #[test]
    fn jump_only_at_events() {
        let p = two_jump();
        assert_eq!(p.jump(0.3).unwrap().as_slice(), &[1.0]);
        assert_eq!(p.jump(0.7).unwrap().as_slice(), &[1.0]);
        assert_eq!(p.jump(0.5).unwrap().as_slice(), &[0.0]);
        assert_eq!(p.jump(0.0).unwrap().as_slice(), &[0.0]);
    }

    #[test]
    fn out_of_range_time_is_domain_error() {
        let p = two_jump();
        assert!(p.value(1.01).is_err());
        assert!(p.value(-0.01).is_err());
        assert!(p.left_limit(2.0).is_err());
    }

    #[test]
    fn constructor_validation() {
        assert!(StepPath::scalar(1.0, 0.0, &[(0.0, 1.0)]).is_err());
        assert!(StepPath::scalar(1.0, 0.0, &[(0.5, 1.0), (0.5, 2.0)]).is_err());
        assert!(StepPath::scalar(1.0, 0.0, &[(1.5, 1.0)]).is_err());
        assert!(StepPath::scalar(0.0, 0.0, &[]).is_err());
        assert!(StepPath::new(1.0, vec![0.0, 0.0], vec![(0.5, Vector::scalar(1.0))]).is_err());
        assert!(StepPath::left_continuous(1.0, 0.0, vec![(0.0, 1.0.into())]).is_ok());
    }

    #[test]
    fn left_side_reading() {
        let p = two_jump().with_side(Side::Left);
        assert_eq!(p.value(0.3).unwrap(), &[0.0]);
        assert_eq!(p.value(0.31).unwrap(), &[1.0]);
        assert_eq!(p.right_limit(0.3).unwrap(), &[1.0]);
    }

    #[test]
    fn intervals_cover_horizon() {
        let p = two_jump();
        let iv: Vec<_> = p.intervals().collect();
        assert_eq!(iv, vec![(0.0, 0.3, 0), (0.3, 0.7, 1), (0.7, 1.0, 2)]);
        let q = StepPath::scalar(1.0, 0.0, &[(1.0, 5.0)]).unwrap();
        assert_eq!(q.intervals().count(), 1);
    }

    #[test]
    fn integral_to_sums_intervals() {
        let p = two_jump();
        assert!((p.integral_to(1.0).unwrap()[0] - 1.0).abs() < 1e-15);
        assert!((p.integral_to(0.5).unwrap()[0] - 0.2).abs() < 1e-15);
        assert_eq!(p.integral_to(0.0).unwrap()[0], 0.0);
    }

    #[test]
    fn zip_merges_event_sets() {
        let a = two_jump();
        let b = StepPath::scalar(1.0, 1.0, &[(0.5, 3.0), (0.7, 4.0)]).unwrap();
        let s = a.add(&b).unwrap();
        assert_eq!(s.event_times(), &[0.3, 0.5, 0.7]);
        assert_eq!(s.value(0.1).unwrap(), &[1.0]);
        assert_eq!(s.value(0.4).unwrap(), &[2.0]);
        assert_eq!(s.value(0.6).unwrap(), &[4.0]);
        assert_eq!(s.value(0.9).unwrap(), &[6.0]);
        let c = StepPath::scalar(2.0, 0.0, &[]).unwrap();
        assert!(a.sub(&c).is_err());
    }

    #[test]
    fn mismatch_of_shifted_jump() {
        let a = StepPath::scalar(1.0, 0.0, &[(0.5, 1.0)]).unwrap();
        let b = StepPath::scalar(1.0, 0.0, &[(0.75, 1.0)]).unwrap();
        assert_eq!(a.mismatch_measure(&b).unwrap(), 0.25);
        assert_eq!(a.mismatch_measure(&a).unwrap(), 0.0);
    }

    #[test]
    fn sampled_path_readings() {
        let grid = Arc::new(TimeGrid::uniform(1.0, 4).unwrap());
        let vals = [0.0, 1.0, -1.0, 2.0, 0.5].iter().map(|&x| Vector::scalar(x)).collect();
        let p = SampledPath::new(grid, vals).unwrap();
        assert_eq!(p.value_at(0.25).unwrap(), &[1.0]);
        assert_eq!(p.value_at(0.3).unwrap(), &[1.0]);
        assert_eq!(p.value_at(1.0).unwrap(), &[0.5]);
        assert_eq!(p.increment(2), vec![3.0]);
        let s = p.to_step_path();
        assert_eq!(s.value(0.5).unwrap(), &[-1.0]);
        assert_eq!(s.value(1.0).unwrap(), &[0.5]);
        assert_eq!(s.left_limit(1.0).unwrap(), &[2.0]);
    }

    #[test]
    fn fv_path_compensation() {
        let n = two_jump();
        let m = FvPath::new(n, StepPath::constant(1.0, 1.0).unwrap()).unwrap();
        assert_eq!(m.value(1.0).unwrap(), vec![1.0]);
        assert_eq!(m.value(0.0).unwrap(), vec![0.0]);
        assert!((m.left_limit(0.7).unwrap()[0] - 0.3).abs() < 1e-15);
    }
}
