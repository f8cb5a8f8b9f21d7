//! Uniform square grids on `[−L, L]²` and second-order finite differences.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Node `(i, j)` sits at `x = −L + i·h`, `x̃ = −L + j·h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    points: usize,
    spacing: f64,
}

impl GridSpec {
    /// Lattice covering `[−half_width, half_width]²`; the half width is
    /// rounded to a whole number of cells.
    pub fn new(half_width: f64, spacing: f64) -> Result<Self> {
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::invalid("spacing", format!("must be > 0, got {spacing}")));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::invalid("half_width", format!("must be > 0, got {half_width}")));
        }
        let cells = (2.0 * half_width / spacing).round() as usize;
        if cells < 4 {
            return Err(Error::invalid("spacing", "grid needs at least 5 nodes per axis"));
        }
        Ok(GridSpec {
            points: cells + 1,
            spacing,
        })
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.points - 1) as f64 * self.spacing
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width() + i as f64 * self.spacing
    }

    pub fn len(&self) -> usize {
        self.points * self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points == 0
    }

    /// Same domain, half the spacing; coarse node `i` is fine node `2i`.
    pub fn refined(&self) -> Self {
        GridSpec {
            points: 2 * (self.points - 1) + 1,
            spacing: 0.5 * self.spacing,
        }
    }

    /// Same domain, twice the spacing.
    pub fn coarsened(&self) -> Result<Self> {
        if !(self.points - 1).is_multiple_of(2) {
            return Err(Error::invalid("spacing", "odd cell count cannot be coarsened"));
        }
        GridSpec::new(self.half_width(), 2.0 * self.spacing)
    }

    fn same_lattice(&self, other: &GridSpec) -> bool {
        self.points == other.points
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
    }
}

/// Row-major samples: row `i` runs over `x`, column `j` over `x̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    spec: GridSpec,
    values: Vec<f64>,
}

impl GridField {
    pub fn sample(spec: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = spec.points;
        let mut values = Vec::with_capacity(spec.len());
        for i in 0..n {
            let x = spec.coord(i);
            for j in 0..n {
                values.push(f(x, spec.coord(j)));
            }
        }
        GridField { spec, values }
    }

    pub fn from_values(spec: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::GridMismatch);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("grid", "values must be finite"));
        }
        Ok(GridField { spec, values })
    }

    pub fn zeros(spec: GridSpec) -> Self {
        GridField {
            spec,
            values: vec![0.0; spec.len()],
        }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.spec.points + j]
    }

    pub fn check_lattice(&self, other: &GridField) -> Result<()> {
        if self.spec.same_lattice(&other.spec) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridField {
            spec: self.spec,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_lattice(other)?;
        Ok(GridField {
            spec: self.spec,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Central difference in `x` at an interior node.
    #[inline]
    pub fn dx_at(&self, i: usize, j: usize) -> f64 {
        (self.at(i + 1, j) - self.at(i - 1, j)) / (2.0 * self.spec.spacing)
    }

    #[inline]
    pub fn dxt_at(&self, i: usize, j: usize) -> f64 {
        (self.at(i, j + 1) - self.at(i, j - 1)) / (2.0 * self.spec.spacing)
    }

    #[inline]
    pub fn dxx_at(&self, i: usize, j: usize) -> f64 {
        let h = self.spec.spacing;
        (self.at(i + 1, j) - 2.0 * self.at(i, j) + self.at(i - 1, j)) / (h * h)
    }

    #[inline]
    pub fn dxtxt_at(&self, i: usize, j: usize) -> f64 {
        let h = self.spec.spacing;
        (self.at(i, j + 1) - 2.0 * self.at(i, j) + self.at(i, j - 1)) / (h * h)
    }

    /// Whole-field first derivative with span `stride·h`: central inside,
    /// second-order one-sided within `stride` nodes of the edge.
    fn derivative_with_stride(&self, along_x: bool, stride: usize) -> Self {
        let n = self.spec.points;
        let h = self.spec.spacing * stride as f64;
        let s = stride;
        let get = |a: usize, b: usize| {
            if along_x {
                self.at(a, b)
            } else {
                self.at(b, a)
            }
        };
        let mut values = vec![0.0; self.spec.len()];
        for a in 0..n {
            for b in 0..n {
                let d = if a >= s && a + s < n {
                    (get(a + s, b) - get(a - s, b)) / (2.0 * h)
                } else if a < s {
                    (-3.0 * get(a, b) + 4.0 * get(a + s, b) - get(a + 2 * s, b)) / (2.0 * h)
                } else {
                    (3.0 * get(a, b) - 4.0 * get(a - s, b) + get(a - 2 * s, b)) / (2.0 * h)
                };
                let (i, j) = if along_x { (a, b) } else { (b, a) };
                values[i * n + j] = d;
            }
        }
        GridField {
            spec: self.spec,
            values,
        }
    }

    pub fn d_dx(&self) -> Self {
        self.derivative_with_stride(true, 1)
    }

    pub fn d_dx_tilde(&self) -> Self {
        self.derivative_with_stride(false, 1)
    }

    /// Largest change of either gradient component when the stencil span
    /// doubles, relative to the gradient's max-norm. Used as a resolution check.
    pub fn gradient_resolution_change(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for along_x in [true, false] {
            let fine = self.derivative_with_stride(along_x, 1);
            let coarse = self.derivative_with_stride(along_x, 2);
            let scale = fine.max_abs(0);
            if scale < 1e-12 {
                continue;
            }
            let diff = fine
                .values
                .iter()
                .zip(&coarse.values)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            worst = worst.max(diff / scale);
        }
        worst
    }

    /// Max-norm over nodes at least `margin` cells from the boundary.
    pub fn max_abs(&self, margin: usize) -> f64 {
        let n = self.spec.points;
        let mut m: f64 = 0.0;
        for i in margin..n.saturating_sub(margin) {
            for j in margin..n.saturating_sub(margin) {
                m = m.max(self.at(i, j).abs());
            }
        }
        m
    }

    /// Plain-text matrix: header `# L=<half width> h=<spacing>`, then one
    /// space-separated row per `x` node.
    pub fn write_text<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# L={:e} h={:e}", self.spec.half_width(), self.spec.spacing)?;
        let n = self.spec.points;
        let mut line = String::new();
        for i in 0..n {
            line.clear();
            for j in 0..n {
                if j > 0 {
                    line.push(' ');
                }
                write!(line, "{:e}", self.at(i, j)).expect("write to String");
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty grid file".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let mut half_width = None;
        let mut spacing = None;
        for tok in header.trim_start_matches('#').split_whitespace() {
            if let Some(v) = tok.strip_prefix("L=") {
                half_width = v.parse::<f64>().ok();
            } else if let Some(v) = tok.strip_prefix("h=") {
                spacing = v.parse::<f64>().ok();
            }
        }
        let (Some(l), Some(h)) = (half_width, spacing) else {
            return Err(Error::Parse(format!("bad grid header `{header}`")));
        };
        let spec = GridSpec::new(l, h)?;
        let mut values = Vec::with_capacity(spec.len());
        for line in lines {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let row: std::result::Result<Vec<f64>, _> =
                line.split_whitespace().map(str::parse::<f64>).collect();
            let row = row.map_err(|e| Error::Parse(e.to_string()))?;
            if row.len() != spec.points {
                return Err(Error::Parse(format!(
                    "row has {} entries, expected {}",
                    row.len(),
                    spec.points
                )));
            }
            values.extend(row);
        }
        GridField::from_values(spec, values)
    }
}
