//! Uniform cell grid for fixed-radius neighbour queries.

use crate::model::window::{dist2, Point};

const MAX_CELLS: usize = 1 << 22;

pub struct CellGrid<'a> {
    points: &'a [Point],
    dim: usize,
    origin: [f64; 3],
    side: f64,
    shape: [usize; 3],
    start: Vec<u32>,
    items: Vec<u32>,
}

impl<'a> CellGrid<'a> {
    /// Bins `points` (all inside `[lower, upper]`) into cells of side at least `min_side`.
    pub fn new(points: &'a [Point], lower: &[f64], upper: &[f64], min_side: f64) -> Self {
        let dim = lower.len();
        let mut side = if min_side.is_finite() && min_side > 0.0 {
            min_side
        } else {
            f64::INFINITY
        };
        let extent: Vec<f64> = (0..dim).map(|i| (upper[i] - lower[i]).max(0.0)).collect();
        let count = |s: f64| -> usize {
            extent
                .iter()
                .map(|e| if s.is_finite() { ((e / s).floor() as usize).max(1) } else { 1 })
                .product()
        };
        while count(side) > MAX_CELLS {
            side *= 2.0;
        }
        let mut shape = [1usize; 3];
        let mut origin = [0.0; 3];
        for i in 0..dim {
            origin[i] = lower[i];
            shape[i] = if side.is_finite() {
                ((extent[i] / side).floor() as usize).max(1)
            } else {
                1
            };
        }
        let ncell = shape.iter().product::<usize>();
        let mut grid = Self {
            points,
            dim,
            origin,
            side,
            shape,
            start: vec![0; ncell + 1],
            items: vec![0; points.len()],
        };
        let cells: Vec<usize> = points.iter().map(|p| grid.flat(&grid.cell_of(p))).collect();
        for &c in &cells {
            grid.start[c + 1] += 1;
        }
        for c in 0..ncell {
            grid.start[c + 1] += grid.start[c];
        }
        let mut fill = grid.start.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    fn cell_of(&self, p: &Point) -> [usize; 3] {
        let mut c = [0usize; 3];
        for i in 0..self.dim {
            if self.side.is_finite() {
                let k = ((p[i] - self.origin[i]) / self.side).floor();
                c[i] = (k.max(0.0) as usize).min(self.shape[i] - 1);
            }
        }
        c
    }

    #[inline]
    fn flat(&self, c: &[usize; 3]) -> usize {
        (c[2] * self.shape[1] + c[1]) * self.shape[0] + c[0]
    }

    /// Calls `visit(index, squared_distance)` for every point within
    /// distance `r` of `p`; stops early when `visit` returns `false`.
    pub fn for_each_within<F: FnMut(usize, f64) -> bool>(&self, p: &Point, r: f64, mut visit: F) {
        let r2 = r * r;
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for i in 0..self.dim {
            if self.side.is_finite() && r.is_finite() {
                let a = ((p[i] - r - self.origin[i]) / self.side).floor();
                let b = ((p[i] + r - self.origin[i]) / self.side).floor();
                lo[i] = (a.max(0.0) as usize).min(self.shape[i] - 1);
                hi[i] = (b.max(0.0) as usize).min(self.shape[i] - 1);
            } else {
                hi[i] = self.shape[i] - 1;
            }
        }
        for cz in lo[2]..=hi[2] {
            for cy in lo[1]..=hi[1] {
                for cx in lo[0]..=hi[0] {
                    let c = self.flat(&[cx, cy, cz]);
                    for &j in &self.items[self.start[c] as usize..self.start[c + 1] as usize] {
                        let d2 = dist2(p, &self.points[j as usize]);
                        if d2 <= r2 && !visit(j as usize, d2) {
                            return;
                        }
                    }
                }
            }
        }
    }

    /// Nearest point other than `exclude` within distance `r`.
    pub fn nearest_within(&self, p: &Point, r: f64, exclude: Option<usize>) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.for_each_within(p, r, |j, d2| {
            if Some(j) != exclude && best.is_none_or(|(_, b)| d2 < b) {
                best = Some((j, d2));
            }
            true
        });
        best.map(|(j, d2)| (j, d2.sqrt()))
    }
}
