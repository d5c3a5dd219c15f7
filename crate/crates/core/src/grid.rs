use crate::error::{domain, Result};

/// Strictly increasing time points `0 = t_0 < t_1 < ... < t_m = T`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    points: Vec<f64>,
}

impl TimeGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return domain("time grid needs at least two points");
        }
        if points[0] != 0.0 {
            return domain(format!("time grid must start at 0, got {}", points[0]));
        }
        if !points.iter().all(|t| t.is_finite()) {
            return domain("time grid contains a non-finite point");
        }
        if let Some(w) = points.windows(2).find(|w| w[0] >= w[1]) {
            return domain(format!("time grid not strictly increasing at {} >= {}", w[0], w[1]));
        }
        Ok(TimeGrid { points })
    }

    /// `cells` equal cells on `[0, t_end]`. The last point is exactly `t_end`.
    pub fn uniform(t_end: f64, cells: usize) -> Result<Self> {
        if t_end <= 0.0 || !t_end.is_finite() {
            return domain(format!("horizon must be positive and finite, got {t_end}"));
        }
        if cells == 0 {
            return domain("uniform grid needs at least one cell");
        }
        let mut points: Vec<f64> = (0..cells).map(|k| t_end * k as f64 / cells as f64).collect();
        points.push(t_end);
        TimeGrid::new(points)
    }

    pub fn t_end(&self) -> f64 {
        *self.points.last().expect("grid has at least two points")
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cells(&self) -> usize {
        self.points.len() - 1
    }

    /// Index of `t` if it is one of the grid points.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        self.points.binary_search_by(|p| p.total_cmp(&t)).ok()
    }

    /// Index `k` of the cell `[t_k, t_{k+1})` containing `t`; the last cell is closed.
    pub fn cell_of(&self, t: f64) -> Option<usize> {
        if t < 0.0 || t > self.t_end() {
            return None;
        }
        let k = self.points.partition_point(|&p| p <= t);
        Some(k.saturating_sub(1).min(self.cells() - 1))
    }

    /// Merge `extra` into the grid, sorted and deduplicated.
    pub fn refine(&self, extra: &[f64]) -> Result<TimeGrid> {
        let t_end = self.t_end();
        if let Some(t) = extra.iter().find(|&&t| !(0.0..=t_end).contains(&t)) {
            return domain(format!("refinement point {t} outside [0, {t_end}]"));
        }
        let mut points = Vec::with_capacity(self.points.len() + extra.len());
        points.extend_from_slice(&self.points);
        points.extend_from_slice(extra);
        points.sort_by(f64::total_cmp);
        points.dedup();
        TimeGrid::new(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refine_examples() {
        let g = TimeGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(g.refine(&[0.25]).unwrap().points(), &[0.0, 0.25, 0.5, 1.0]);
        let g = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(g.refine(&[]).unwrap().points(), &[0.0, 1.0]);
        assert_eq!(g.refine(&[0.5, 0.5]).unwrap().points(), &[0.0, 0.5, 1.0]);
    }

    #[test]
    fn refine_rejects_points_outside_horizon() {
        let g = TimeGrid::new(vec![0.0, 1.0]).unwrap();
        assert!(g.refine(&[1.5]).is_err());
        assert!(g.refine(&[-0.1]).is_err());
    }

    #[test]
    fn invalid_grids() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.1, 1.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 0.5, 0.5]).is_err());
        assert!(TimeGrid::uniform(0.0, 4).is_err());
        assert!(TimeGrid::uniform(1.0, 0).is_err());
    }

    #[test]
    fn uniform_ends_exactly_at_horizon() {
        let g = TimeGrid::uniform(0.1, 1000).unwrap();
        assert_eq!(g.t_end(), 0.1);
        assert_eq!(g.cells(), 1000);
        assert_eq!(g.index_of(0.1), Some(1000));
    }

    #[test]
    fn cell_lookup() {
        let g = TimeGrid::uniform(1.0, 4).unwrap();
        assert_eq!(g.cell_of(0.0), Some(0));
        assert_eq!(g.cell_of(0.25), Some(1));
        assert_eq!(g.cell_of(0.3), Some(1));
        assert_eq!(g.cell_of(1.0), Some(3));
        assert_eq!(g.cell_of(1.1), None);
    }
}
