use serde::{Deserialize, Serialize};

use crate::error::{Checker, Error, Result};

/// Coordinates are stored in a fixed 3-vector; unused axes stay at zero.
pub type Point = [f64; 3];

/// Axis-aligned box in `R^d`, `d` in 1..=3.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "WindowDoc", into = "WindowDoc")]
pub struct Window {
    dim: usize,
    lower: Point,
    upper: Point,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WindowDoc {
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    units: Option<String>,
}

impl TryFrom<WindowDoc> for Window {
    type Error = Error;
    fn try_from(doc: WindowDoc) -> Result<Self> {
        Window::new(&doc.lower, &doc.upper).and_then(|w| {
            if w.dim != doc.dim {
                Err(Error::invalid(
                    "dim",
                    format!("dim = {} but bounds have {} coordinates", doc.dim, w.dim),
                ))
            } else {
                Ok(w)
            }
        })
    }
}

impl From<Window> for WindowDoc {
    fn from(w: Window) -> Self {
        WindowDoc {
            dim: w.dim,
            lower: w.lower().to_vec(),
            upper: w.upper().to_vec(),
            units: None,
        }
    }
}

impl Window {
    pub fn new(lower: &[f64], upper: &[f64]) -> Result<Self> {
        let mut c = Checker::new();
        c.check(
            (1..=3).contains(&lower.len()),
            "dim",
            format!("dimension must be 1, 2 or 3 (got {})", lower.len()),
        );
        c.check(
            lower.len() == upper.len(),
            "upper",
            "lower and upper must have the same length",
        );
        c.finish()?;
        let mut c = Checker::new();
        for i in 0..lower.len() {
            c.check(
                lower[i].is_finite() && upper[i].is_finite() && upper[i] > lower[i],
                format!("upper[{i}]"),
                format!("need finite lower < upper (got {} .. {})", lower[i], upper[i]),
            );
        }
        c.finish()?;
        let mut lo = [0.0; 3];
        let mut hi = [0.0; 3];
        lo[..lower.len()].copy_from_slice(lower);
        hi[..upper.len()].copy_from_slice(upper);
        Ok(Self {
            dim: lower.len(),
            lower: lo,
            upper: hi,
        })
    }

    /// `[0, side]^dim`.
    pub fn cube(dim: usize, side: f64) -> Result<Self> {
        Self::new(&vec![0.0; dim], &vec![side; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower[..self.dim]
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper[..self.dim]
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn sides(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.side(i)).collect()
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim).map(|i| self.side(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim).map(|i| self.side(i)).product()
    }

    pub fn diameter(&self) -> f64 {
        (0..self.dim).map(|i| self.side(i).powi(2)).sum::<f64>().sqrt()
    }

    pub fn dilate(&self, r: f64) -> Window {
        assert!(r >= 0.0 && r.is_finite(), "dilation radius must be finite and >= 0");
        let mut w = self.clone();
        for i in 0..self.dim {
            w.lower[i] -= r;
            w.upper[i] += r;
        }
        w
    }

    /// Inner parallel box at distance `r`; `None` when it is empty.
    pub fn erode(&self, r: f64) -> Option<Window> {
        let mut w = self.clone();
        for i in 0..self.dim {
            w.lower[i] += r;
            w.upper[i] -= r;
            if w.upper[i] <= w.lower[i] {
                return None;
            }
        }
        Some(w)
    }

    pub fn contains(&self, p: &Point) -> bool {
        (0..self.dim).all(|i| p[i] >= self.lower[i] && p[i] <= self.upper[i])
    }

    /// Distance from an interior point to the boundary.
    pub fn boundary_distance(&self, p: &Point) -> f64 {
        (0..self.dim)
            .map(|i| (p[i] - self.lower[i]).min(self.upper[i] - p[i]))
            .fold(f64::INFINITY, f64::min)
    }

    /// `|W ∩ (W + z)|` for a displacement `z`, the translation edge-correction weight.
    pub fn overlap_volume(&self, z: &Point) -> f64 {
        (0..self.dim)
            .map(|i| (self.side(i) - z[i].abs()).max(0.0))
            .product()
    }

    pub fn translate(&self, shift: &[f64]) -> Window {
        let mut w = self.clone();
        for i in 0..self.dim {
            w.lower[i] += shift[i];
            w.upper[i] += shift[i];
        }
        w
    }
}

/// Squared Euclidean distance (unused axes are zero).
#[inline]
pub fn dist2(a: &Point, b: &Point) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}
