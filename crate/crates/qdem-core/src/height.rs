//! Gridded height fields on a coordinate chart, with sup-distance comparison.

use alloc::vec::Vec;
use core::fmt;

/// Coordinate chart a field lives on. Fields on different charts are never
/// comparable, even when their grids coincide numerically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Chart {
    /// Triangle coordinates `(s, y)` with `0 <= y <= s <= 1`.
    Triangle,
    /// Cylinder coordinates `(v, u)`, both normalized by the circumference.
    Cylinder,
    /// The unit square `(x, y)` of the permutation height function.
    UnitSquare,
}

impl fmt::Display for Chart {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Chart::Triangle => "triangle",
            Chart::Cylinder => "cylinder",
            Chart::UnitSquare => "unit-square",
        };
        write!(f, "{name}")
    }
}

/// Provenance of a field: which model produced it and at what size.
/// All entries other than the chart are optional — exact limit profiles
/// have no `n` or `samples`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldMeta {
    pub chart: Chart,
    pub n: Option<u64>,
    pub samples: Option<u64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

impl FieldMeta {
    pub fn bare(chart: Chart) -> Self {
        FieldMeta {
            chart,
            n: None,
            samples: None,
            p: None,
            q: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FieldError {
    EmptyAxis,
    UnsortedAxis,
    NonFiniteCoordinate,
    /// `values.len()` must equal `coords1.len() * coords2.len()`.
    ValueCount { expected: usize, got: usize },
    /// Heights here are normalized counts, so every value lies in `[0, 1]`.
    ValueRange { value: f64 },
    ChartMismatch { left: Chart, right: Chart },
    /// Grids must agree exactly for a pointwise comparison.
    AxisMismatch,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldError::EmptyAxis => write!(f, "field axes must be non-empty"),
            FieldError::UnsortedAxis => write!(f, "field axes must be strictly increasing"),
            FieldError::NonFiniteCoordinate => write!(f, "field coordinates must be finite"),
            FieldError::ValueCount { expected, got } => {
                write!(f, "expected {expected} values for the grid, got {got}")
            }
            FieldError::ValueRange { value } => {
                write!(f, "height value {value} outside [0, 1]")
            }
            FieldError::ChartMismatch { left, right } => {
                write!(f, "cannot compare fields on different charts ({left} vs {right})")
            }
            FieldError::AxisMismatch => write!(f, "cannot compare fields on different grids"),
        }
    }
}

/// A function sampled on the product grid `coords1 x coords2`, stored
/// row-major: `values[i * coords2.len() + j]` is the value at
/// `(coords1[i], coords2[j])`.
#[derive(Clone, Debug, PartialEq)]
pub struct HeightField {
    coords1: Vec<f64>,
    coords2: Vec<f64>,
    values: Vec<f64>,
    meta: FieldMeta,
}

fn check_axis(axis: &[f64]) -> Result<(), FieldError> {
    if axis.is_empty() {
        return Err(FieldError::EmptyAxis);
    }
    if axis.iter().any(|c| !c.is_finite()) {
        return Err(FieldError::NonFiniteCoordinate);
    }
    if axis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(FieldError::UnsortedAxis);
    }
    Ok(())
}

impl HeightField {
    pub fn new(
        coords1: Vec<f64>,
        coords2: Vec<f64>,
        values: Vec<f64>,
        meta: FieldMeta,
    ) -> Result<Self, FieldError> {
        check_axis(&coords1)?;
        check_axis(&coords2)?;
        let expected = coords1.len() * coords2.len();
        if values.len() != expected {
            return Err(FieldError::ValueCount {
                expected,
                got: values.len(),
            });
        }
        for &v in &values {
            if !v.is_finite() || !(0.0..=1.0).contains(&v) {
                return Err(FieldError::ValueRange { value: v });
            }
        }
        Ok(HeightField {
            coords1,
            coords2,
            values,
            meta,
        })
    }

    /// Evaluates `f(c1, c2)` at every grid point.
    pub fn from_fn(
        coords1: Vec<f64>,
        coords2: Vec<f64>,
        meta: FieldMeta,
        mut f: impl FnMut(f64, f64) -> f64,
    ) -> Result<Self, FieldError> {
        let mut values = Vec::with_capacity(coords1.len() * coords2.len());
        for &c1 in &coords1 {
            for &c2 in &coords2 {
                values.push(f(c1, c2));
            }
        }
        HeightField::new(coords1, coords2, values, meta)
    }

    pub fn coords1(&self) -> &[f64] {
        &self.coords1
    }

    pub fn coords2(&self) -> &[f64] {
        &self.coords2
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn meta(&self) -> &FieldMeta {
        &self.meta
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.coords2.len() + j]
    }

    fn check_comparable(&self, other: &HeightField) -> Result<(), FieldError> {
        if self.meta.chart != other.meta.chart {
            return Err(FieldError::ChartMismatch {
                left: self.meta.chart,
                right: other.meta.chart,
            });
        }
        if self.coords1 != other.coords1 || self.coords2 != other.coords2 {
            return Err(FieldError::AxisMismatch);
        }
        Ok(())
    }

    /// Sup-norm distance over the shared grid.
    pub fn sup_distance(&self, other: &HeightField) -> Result<f64, FieldError> {
        self.check_comparable(other)?;
        let mut sup = 0.0f64;
        for (a, b) in self.values.iter().zip(&other.values) {
            sup = sup.max((a - b).abs());
        }
        Ok(sup)
    }

    /// Pointwise absolute differences, same layout as [`HeightField::values`].
    pub fn abs_differences(&self, other: &HeightField) -> Result<Vec<f64>, FieldError> {
        self.check_comparable(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .collect())
    }
}

/// `count + 1` evenly spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 1 && lo < hi);
    (0..=count)
        // Endpoints are pinned exactly; `lo + (hi - lo)` need not round to `hi`.
        .map(|k| {
            if k == count {
                hi
            } else {
                lo + (hi - lo) * k as f64 / count as f64
            }
        })
        .collect()
}
