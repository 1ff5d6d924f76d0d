//! Core domain types: frequency index sets, nonequispaced point sets, and
//! the value containers paired with them.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// The set of d-dimensional integer frequencies with `-N_t/2 <= k_t < N_t/2`
/// in every dimension, enumerated lexicographically.
///
/// Every bandwidth component `N_t` is even and at least 2. The flat storage
/// order used by [`CoefficientArray`] is row-major over the shifted index
/// `k_t + N_t/2`, i.e. dimension 0 varies slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyIndexSet {
    dims: Vec<usize>,
    len: usize,
}

impl FrequencyIndexSet {
    /// Builds the index set for the given per-dimension bandwidths.
    pub fn new(dims: &[usize]) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Shape("index set needs at least one dimension".into()));
        }
        let mut len: usize = 1;
        for &n in dims {
            if n < 2 || n % 2 != 0 {
                return Err(Error::InvalidBandwidth(n));
            }
            len = len
                .checked_mul(n)
                .ok_or_else(|| Error::Resource(format!("index set cardinality overflows: {dims:?}")))?;
        }
        Ok(Self { dims: dims.to_vec(), len })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Cardinality `|I_N|`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Flat position of a signed index in enumeration order, or `None` if any
    /// component is out of range.
    pub fn offset_of(&self, k: &[i64]) -> Option<usize> {
        if k.len() != self.dims.len() {
            return None;
        }
        let mut flat = 0usize;
        for (&kt, &n) in k.iter().zip(&self.dims) {
            let half = (n / 2) as i64;
            if kt < -half || kt >= half {
                return None;
            }
            flat = flat * n + (kt + half) as usize;
        }
        Some(flat)
    }

    /// Writes the signed index at flat position `flat` into `out`.
    pub fn index_at(&self, flat: usize, out: &mut [i64]) {
        debug_assert!(flat < self.len && out.len() == self.dims.len());
        let mut rem = flat;
        for t in (0..self.dims.len()).rev() {
            let n = self.dims[t];
            out[t] = (rem % n) as i64 - (n / 2) as i64;
            rem /= n;
        }
    }

    /// Calls `f(flat, k)` for every index in enumeration order. The index
    /// buffer is reused between calls.
    pub fn for_each_index(&self, mut f: impl FnMut(usize, &[i64])) {
        let d = self.dims.len();
        let mut k: Vec<i64> = self.dims.iter().map(|&n| -((n / 2) as i64)).collect();
        for flat in 0..self.len {
            f(flat, &k);
            for t in (0..d).rev() {
                k[t] += 1;
                if k[t] < (self.dims[t] / 2) as i64 {
                    break;
                }
                k[t] = -((self.dims[t] / 2) as i64);
            }
        }
    }
}

/// Wraps a coordinate into `[-0.5, 0.5)` by subtracting the nearest integer.
/// Exact under the 1-periodicity of the complex exponential.
pub fn wrap_unit(x: f64) -> f64 {
    let w = x - (x + 0.5).floor();
    // floor(x + 0.5) can land exactly on x - 0.5 when x + 0.5 rounds up.
    if w >= 0.5 {
        w - 1.0
    } else if w < -0.5 {
        w + 1.0
    } else {
        w
    }
}

/// M nonequispaced sample locations in the torus `[-0.5, 0.5)^d`, stored as a
/// flat row-major coordinate array.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    dim: usize,
    coords: Vec<f64>,
}

impl PointSet {
    /// Builds a point set from flat coordinates (`len = M * dim`). Components
    /// outside `[-0.5, 0.5)` are wrapped periodically; non-finite components
    /// are rejected.
    pub fn new(dim: usize, mut coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Shape("point set needs at least one dimension".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::Shape(format!(
                "coordinate count {} is not a multiple of dim {}",
                coords.len(),
                dim
            )));
        }
        for c in &mut coords {
            if !c.is_finite() {
                return Err(Error::InvalidPoint(format!("non-finite coordinate {c}")));
            }
            *c = wrap_unit(*c);
        }
        Ok(Self { dim, coords })
    }

    pub fn empty(dim: usize) -> Self {
        Self { dim, coords: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of points M.
    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    /// Coordinates of point `j`.
    pub fn point(&self, j: usize) -> &[f64] {
        &self.coords[j * self.dim..(j + 1) * self.dim]
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

/// Complex sample values paired with a [`PointSet`] of the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleValues(Vec<Complex64>);

impl SampleValues {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.0
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.0
    }
}

impl From<Vec<Complex64>> for SampleValues {
    fn from(v: Vec<Complex64>) -> Self {
        Self(v)
    }
}

/// One complex value per frequency of a [`FrequencyIndexSet`], stored in the
/// set's enumeration order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientArray {
    index_set: FrequencyIndexSet,
    values: Vec<Complex64>,
}

impl CoefficientArray {
    pub fn zeros(index_set: FrequencyIndexSet) -> Self {
        let len = index_set.len();
        Self { index_set, values: vec![Complex64::new(0.0, 0.0); len] }
    }

    pub fn from_values(index_set: FrequencyIndexSet, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != index_set.len() {
            return Err(Error::Shape(format!(
                "coefficient count {} does not match |I_N| = {}",
                values.len(),
                index_set.len()
            )));
        }
        debug_assert!(values.iter().all(|v| v.re.is_finite() && v.im.is_finite()));
        Ok(Self { index_set, values })
    }

    pub fn index_set(&self) -> &FrequencyIndexSet {
        &self.index_set
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    /// Value at a signed frequency index.
    pub fn get(&self, k: &[i64]) -> Option<Complex64> {
        self.index_set.offset_of(k).map(|o| self.values[o])
    }
}
