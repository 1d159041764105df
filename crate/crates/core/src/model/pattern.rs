use crate::error::{Error, Result};

use super::window::{dist2, Point, Window};

/// Finite point configuration in a window, with optional real marks and
/// weights attached to each point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    window: Window,
    points: Vec<Point>,
    marks: Option<Vec<f64>>,
    weights: Option<Vec<f64>>,
}

impl PointPattern {
    /// Builds a pattern after checking lengths, window containment and
    /// pairwise distinctness.
    pub fn new(
        window: Window,
        points: Vec<Point>,
        marks: Option<Vec<f64>>,
        weights: Option<Vec<f64>>,
    ) -> Result<Self> {
        let pat = Self::from_parts_unchecked(window, points, marks, weights);
        pat.validate()?;
        Ok(pat)
    }

    /// Skips the containment and distinctness checks; callers guarantee them.
    pub(crate) fn from_parts_unchecked(
        window: Window,
        points: Vec<Point>,
        marks: Option<Vec<f64>>,
        weights: Option<Vec<f64>>,
    ) -> Self {
        Self {
            window,
            points,
            marks,
            weights,
        }
    }

    pub fn empty(window: Window) -> Self {
        Self::from_parts_unchecked(window, Vec::new(), None, None)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.points.len();
        if let Some(m) = &self.marks {
            if m.len() != n {
                return Err(Error::invalid("marks", format!("{} marks for {n} points", m.len())));
            }
        }
        if let Some(w) = &self.weights {
            if w.len() != n {
                return Err(Error::invalid("weights", format!("{} weights for {n} points", w.len())));
            }
        }
        let dim = self.window.dim();
        for (i, p) in self.points.iter().enumerate() {
            if p[dim..].iter().any(|&c| c != 0.0) || p.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("points[{i}]"), "bad coordinates for window dimension"));
            }
            if !self.window.contains(p) {
                return Err(Error::invalid(format!("points[{i}]"), format!("{:?} lies outside the window", &p[..dim])));
            }
        }
        if let Some((i, j)) = self.find_duplicate() {
            return Err(Error::invalid(
                format!("points[{j}]"),
                format!("coincides with points[{i}]"),
            ));
        }
        Ok(())
    }

    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let tol = 1e-12 * self.window.diameter();
        let mut order: Vec<usize> = (0..self.points.len()).collect();
        order.sort_by(|&a, &b| self.points[a][0].total_cmp(&self.points[b][0]));
        for (k, &i) in order.iter().enumerate() {
            for &j in &order[k + 1..] {
                if self.points[j][0] - self.points[i][0] > tol {
                    break;
                }
                if dist2(&self.points[i], &self.points[j]) <= tol * tol {
                    return Some((i.min(j), i.max(j)));
                }
            }
        }
        None
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn marks(&self) -> Option<&[f64]> {
        self.marks.as_deref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Keeps the points with the given indices (in the given order).
    pub fn select(&self, idx: &[usize]) -> PointPattern {
        self.select_into(idx, self.window.clone())
    }

    pub(crate) fn select_into(&self, idx: &[usize], window: Window) -> PointPattern {
        let pick = |v: &Option<Vec<f64>>| v.as_ref().map(|v| idx.iter().map(|&i| v[i]).collect());
        PointPattern {
            window,
            points: idx.iter().map(|&i| self.points[i]).collect(),
            marks: pick(&self.marks),
            weights: pick(&self.weights),
        }
    }

    /// Points inside `window`, which becomes the new observation window.
    pub fn restrict(&self, window: &Window) -> PointPattern {
        let idx: Vec<usize> = (0..self.len())
            .filter(|&i| window.contains(&self.points[i]))
            .collect();
        self.select_into(&idx, window.clone())
    }

    /// Rigid translation of points and window.
    pub fn translate(&self, shift: &[f64]) -> PointPattern {
        let mut out = self.clone();
        out.window = self.window.translate(shift);
        for p in &mut out.points {
            for (i, s) in shift.iter().enumerate().take(self.dim()) {
                p[i] += s;
            }
        }
        out
    }

    pub fn with_marks(mut self, marks: Option<Vec<f64>>) -> Result<Self> {
        self.marks = marks;
        self.validate()?;
        Ok(self)
    }

    pub fn with_weights(mut self, weights: Option<Vec<f64>>) -> Result<Self> {
        self.weights = weights;
        self.validate()?;
        Ok(self)
    }

    /// Observed intensity `n / |W|`.
    pub fn intensity(&self) -> f64 {
        self.len() as f64 / self.window.volume()
    }
}
