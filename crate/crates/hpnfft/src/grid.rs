//! Equispaced oversampled grids shared by the fast transform and the direct
//! DFT oracle.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Whether grid values currently live in the spatial or the frequency domain.
/// The tag flips only through the FFT operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridLayout {
    Spatial,
    Frequency,
}

/// A complex grid over the signed lattice `I_n` (component `l_t` in
/// `[-n_t/2, n_t/2)`).
///
/// Storage is row-major over array offsets, with the signed index mapped to
/// its offset by `(l_t + n_t) mod n_t` in every dimension. That is the
/// natural unshifted DFT layout, so the FFT operates on the buffer directly.
#[derive(Debug, Clone, PartialEq)]
pub struct OversampledGrid {
    dims: Vec<usize>,
    strides: Vec<usize>,
    layout: GridLayout,
    values: Vec<Complex64>,
}

fn row_major_strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for t in (0..dims.len().saturating_sub(1)).rev() {
        strides[t] = strides[t + 1] * dims[t + 1];
    }
    strides
}

impl OversampledGrid {
    pub fn zeros(dims: &[usize], layout: GridLayout) -> Result<Self> {
        Self::validate_dims(dims)?;
        let len = dims.iter().product();
        Ok(Self {
            strides: row_major_strides(dims),
            dims: dims.to_vec(),
            layout,
            values: vec![Complex64::new(0.0, 0.0); len],
        })
    }

    pub fn from_values(dims: &[usize], layout: GridLayout, values: Vec<Complex64>) -> Result<Self> {
        Self::validate_dims(dims)?;
        if values.len() != dims.iter().product::<usize>() {
            return Err(Error::Shape(format!(
                "grid value count {} does not match dims {:?}",
                values.len(),
                dims
            )));
        }
        Ok(Self {
            strides: row_major_strides(dims),
            dims: dims.to_vec(),
            layout,
            values,
        })
    }

    fn validate_dims(dims: &[usize]) -> Result<()> {
        if dims.is_empty() {
            return Err(Error::Shape("grid needs at least one dimension".into()));
        }
        for &n in dims {
            if n < 2 || n % 2 != 0 {
                return Err(Error::Shape(format!("grid size {n} must be even and >= 2")));
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub(crate) fn set_layout(&mut self, layout: GridLayout) {
        self.layout = layout;
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

    pub fn stride(&self, axis: usize) -> usize {
        self.strides[axis]
    }

    /// Array offset of a signed lattice index; components may be arbitrarily
    /// far outside `[-n_t/2, n_t/2)` and are wrapped periodically.
    pub fn offset_of(&self, signed: &[i64]) -> usize {
        debug_assert_eq!(signed.len(), self.dims.len());
        let mut off = 0usize;
        for (&l, (&n, &s)) in signed.iter().zip(self.dims.iter().zip(&self.strides)) {
            off += wrap_offset(l, n) * s;
        }
        off
    }

    pub fn get(&self, signed: &[i64]) -> Complex64 {
        self.values[self.offset_of(signed)]
    }

    pub fn set(&mut self, signed: &[i64], v: Complex64) {
        let off = self.offset_of(signed);
        self.values[off] = v;
    }

    /// Calls `f(offset, l)` for every signed lattice index in lexicographic
    /// order (`offset` is the storage offset of `l`).
    pub fn for_each_signed(&self, mut f: impl FnMut(usize, &[i64])) {
        let d = self.dims.len();
        let mut l: Vec<i64> = self.dims.iter().map(|&n| -((n / 2) as i64)).collect();
        loop {
            f(self.offset_of(&l), &l);
            let mut t = d;
            while t > 0 {
                t -= 1;
                l[t] += 1;
                if l[t] < (self.dims[t] / 2) as i64 {
                    break;
                }
                l[t] = -((self.dims[t] / 2) as i64);
                if t == 0 {
                    return;
                }
            }
        }
    }
}

/// `(l mod n + n) mod n` for a signed index, as a usize offset.
pub(crate) fn wrap_offset(l: i64, n: usize) -> usize {
    let n = n as i64;
    (((l % n) + n) % n) as usize
}
