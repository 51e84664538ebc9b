//! Extended-real arithmetic, uniform box grids and tabulated functions.
//!
//! Everything else in the crate computes over these types. Values are
//! immutable after construction and all operations are pure.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// A real number extended with `+inf`. Negative infinity is rejected at
/// construction: all tabulated functions are proper.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Builds from a raw `f64`. `+inf` maps to [`ExtReal::PosInf`];
    /// `-inf` and NaN are rejected.
    pub fn new(v: f64) -> Result<Self> {
        if v.is_nan() {
            Err(Error::NotANumber)
        } else if v == f64::NEG_INFINITY {
            Err(Error::NegativeInfinity)
        } else if v == f64::INFINITY {
            Ok(ExtReal::PosInf)
        } else {
            Ok(ExtReal::Finite(v))
        }
    }

    pub fn finite(v: f64) -> Self {
        assert!(v.is_finite(), "ExtReal::finite requires a finite value");
        ExtReal::Finite(v)
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    /// Raw `f64` view; `PosInf` becomes `f64::INFINITY`.
    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }
}

impl std::ops::Add for ExtReal {
    type Output = ExtReal;
    fn add(self, rhs: ExtReal) -> ExtReal {
        match (self, rhs) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => ExtReal::Finite(a + b),
            _ => ExtReal::PosInf,
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.to_f64().partial_cmp(&other.to_f64())
    }
}

impl Serialize for ExtReal {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            ExtReal::Finite(v) => s.serialize_f64(*v),
            ExtReal::PosInf => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => ExtReal::new(v).map_err(D::Error::custom),
            Raw::Str(s) if s == "inf" => Ok(ExtReal::PosInf),
            Raw::Str(s) => Err(D::Error::custom(format!("invalid extended real: {s:?}"))),
        }
    }
}

/// Uniform grid on the box `[-R, R]^dim`, with an odd number of points per
/// axis so that the origin is a node.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawBoxGrid")]
pub struct BoxGrid {
    dim: usize,
    radius: f64,
    #[serde(rename = "m")]
    points_per_axis: usize,
}

#[derive(Deserialize)]
struct RawBoxGrid {
    dim: usize,
    radius: f64,
    m: usize,
}

impl TryFrom<RawBoxGrid> for BoxGrid {
    type Error = Error;
    fn try_from(raw: RawBoxGrid) -> Result<Self> {
        BoxGrid::new(raw.dim, raw.radius, raw.m)
    }
}

impl BoxGrid {
    pub fn new(dim: usize, radius: f64, points_per_axis: usize) -> Result<Self> {
        if dim < 1 {
            return Err(Error::InvalidGrid("dim must be >= 1".into()));
        }
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidGrid(format!("radius must be positive, got {radius}")));
        }
        if points_per_axis < 3 || points_per_axis % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "points_per_axis must be an odd integer >= 3, got {points_per_axis}"
            )));
        }
        Ok(BoxGrid {
            dim,
            radius,
            points_per_axis,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    /// Node spacing `2R/(m-1)`, exposed for tolerance derivation.
    pub fn spacing(&self) -> f64 {
        2.0 * self.radius / (self.points_per_axis - 1) as f64
    }

    pub fn node_count(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Coordinate of axis index `i` on one axis; the center index maps to 0
    /// exactly.
    pub fn axis_coord(&self, i: usize) -> f64 {
        debug_assert!(i < self.points_per_axis);
        let half = (self.points_per_axis - 1) / 2;
        (i as f64 - half as f64) * self.spacing()
    }

    /// All axis coordinates, ascending.
    pub fn axis_coords(&self) -> Vec<f64> {
        (0..self.points_per_axis).map(|i| self.axis_coord(i)).collect()
    }

    /// Writes the coordinates of flat node `idx` (row-major, axis 0 most
    /// significant) into `out`.
    pub fn node_into(&self, idx: usize, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        let m = self.points_per_axis;
        let mut rem = idx;
        for k in (0..self.dim).rev() {
            out[k] = self.axis_coord(rem % m);
            rem /= m;
        }
        debug_assert_eq!(rem, 0);
    }

    pub fn node(&self, idx: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        self.node_into(idx, &mut out);
        out
    }

    /// Deterministic enumeration of every node in row-major order.
    pub fn nodes(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.node_count()).map(|i| self.node(i))
    }

    /// Per-axis index digits of flat node `idx`.
    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        let m = self.points_per_axis;
        let mut digits = vec![0usize; self.dim];
        let mut rem = idx;
        for k in (0..self.dim).rev() {
            digits[k] = rem % m;
            rem /= m;
        }
        digits
    }

    /// Flat index from per-axis digits.
    pub fn flat_index(&self, digits: &[usize]) -> usize {
        let m = self.points_per_axis;
        digits.iter().fold(0usize, |acc, &d| {
            debug_assert!(d < m);
            acc * m + d
        })
    }

    /// Axis index of a coordinate that is supposed to lie on the lattice;
    /// `None` if it is off-lattice (beyond `tol`) or outside the box.
    pub fn axis_index_of(&self, coord: f64, tol: f64) -> Option<usize> {
        let half = (self.points_per_axis - 1) / 2;
        let i = (coord / self.spacing() + half as f64).round();
        if i < 0.0 || i >= self.points_per_axis as f64 {
            return None;
        }
        let i = i as usize;
        if (self.axis_coord(i) - coord).abs() <= tol {
            Some(i)
        } else {
            None
        }
    }

    /// Flat index of an on-grid point, or `None` when off-grid.
    pub fn index_of(&self, point: &[f64], tol: f64) -> Option<usize> {
        if point.len() != self.dim {
            return None;
        }
        let mut digits = Vec::with_capacity(self.dim);
        for &c in point {
            digits.push(self.axis_index_of(c, tol)?);
        }
        Some(self.flat_index(&digits))
    }
}

/// Extended-real-valued table on a [`BoxGrid`]. At least one value must be
/// finite (properness).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGridFunction")]
pub struct GridFunction {
    grid: BoxGrid,
    values: Vec<ExtReal>,
}

#[derive(Deserialize)]
struct RawGridFunction {
    grid: BoxGrid,
    values: Vec<ExtReal>,
}

impl TryFrom<RawGridFunction> for GridFunction {
    type Error = Error;
    fn try_from(raw: RawGridFunction) -> Result<Self> {
        GridFunction::new(raw.grid, raw.values)
    }
}

impl GridFunction {
    pub fn new(grid: BoxGrid, values: Vec<ExtReal>) -> Result<Self> {
        if values.len() != grid.node_count() {
            return Err(Error::InvalidGrid(format!(
                "value count {} does not match node count {}",
                values.len(),
                grid.node_count()
            )));
        }
        if !values.iter().any(|v| v.is_finite()) {
            return Err(Error::ImproperFunction);
        }
        Ok(GridFunction { grid, values })
    }

    /// Tabulates `f` at every node.
    pub fn from_fn(grid: BoxGrid, f: impl Fn(&[f64]) -> ExtReal) -> Result<Self> {
        let mut buf = vec![0.0; grid.dim()];
        let values = (0..grid.node_count())
            .map(|i| {
                grid.node_into(i, &mut buf);
                f(&buf)
            })
            .collect();
        GridFunction::new(grid, values)
    }

    pub fn grid(&self) -> &BoxGrid {
        &self.grid
    }

    pub fn values(&self) -> &[ExtReal] {
        &self.values
    }

    pub fn value(&self, idx: usize) -> ExtReal {
        self.values[idx]
    }

    /// Raw `f64` copy of the table (`PosInf` as `f64::INFINITY`).
    pub fn values_f64(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.to_f64()).collect()
    }

    /// Table value at an on-grid point.
    pub fn value_at(&self, point: &[f64], tol: f64) -> Result<ExtReal> {
        let idx = self
            .grid
            .index_of(point, tol)
            .ok_or_else(|| Error::OffGrid(format!("{point:?}")))?;
        Ok(self.values[idx])
    }
}

/// Outcome of [`min_over_grid`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MinResult {
    pub value: f64,
    pub index: usize,
    pub node: Vec<f64>,
}

/// Exact minimum over the tabulated nodes. Ties go to the lexicographically
/// smallest node index, so the result is deterministic. The table is proper
/// by construction, hence the minimum is finite.
pub fn min_over_grid(f: &GridFunction) -> MinResult {
    let mut best = f64::INFINITY;
    let mut best_idx = 0usize;
    for (i, v) in f.values().iter().enumerate() {
        let v = v.to_f64();
        if v < best {
            best = v;
            best_idx = i;
        }
    }
    MinResult {
        value: best,
        index: best_idx,
        node: f.grid().node(best_idx),
    }
}
