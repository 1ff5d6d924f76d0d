//! Equispaced FFT over an [`OversampledGrid`].
//!
//! The transform matches the direct DFT oracle: forward is the unnormalized
//! sum with negative exponent, inverse carries the `1/|I_n|` factor. The
//! signed-index ↔ array-offset mapping is owned by the grid storage
//! convention (`(l + n) mod n` per dimension), so no shifting pass is needed
//! around the backend transform.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{GridLayout, OversampledGrid};
use crate::parallel::for_each_range;

/// Transform direction. Forward maps spatial → frequency, inverse maps
/// frequency → spatial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Fast multidimensional transform of the grid, axis by axis.
///
/// `workers` bounds the number of threads used for independent grid lines;
/// results do not depend on it (every line is transformed in isolation).
pub fn fft_oversampled(mut grid: OversampledGrid, direction: Direction, workers: usize) -> Result<OversampledGrid> {
    match (direction, grid.layout()) {
        (Direction::Forward, GridLayout::Spatial) | (Direction::Inverse, GridLayout::Frequency) => {}
        (Direction::Forward, GridLayout::Frequency) => {
            return Err(Error::Shape("forward FFT expects a spatial-layout grid".into()));
        }
        (Direction::Inverse, GridLayout::Spatial) => {
            return Err(Error::Shape("inverse FFT expects a frequency-layout grid".into()));
        }
    }

    let dims = grid.dims().to_vec();
    let mut planner = FftPlanner::new();
    for axis in 0..dims.len() {
        let fft = match direction {
            Direction::Forward => planner.plan_fft_forward(dims[axis]),
            Direction::Inverse => planner.plan_fft_inverse(dims[axis]),
        };
        transform_axis(grid.values_mut(), &dims, axis, &fft, workers);
    }

    match direction {
        Direction::Forward => grid.set_layout(GridLayout::Frequency),
        Direction::Inverse => {
            let scale = 1.0 / grid.len() as f64;
            for v in grid.values_mut() {
                *v *= scale;
            }
            grid.set_layout(GridLayout::Spatial);
        }
    }
    Ok(grid)
}

fn transform_axis(values: &mut [Complex64], dims: &[usize], axis: usize, fft: &Arc<dyn Fft<f64>>, workers: usize) {
    let n = dims[axis];
    let inner: usize = dims[axis + 1..].iter().product();
    let outer: usize = dims[..axis].iter().product();
    let lines = outer * inner;

    // Each line is disjoint from every other, so sharing the raw buffer
    // across workers is safe; assert it in the indexing below.
    let base = SendPtr(values.as_mut_ptr());
    let total_len = values.len();
    for_each_range(workers, lines, |_, range| {
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for id in range {
            let o = id / inner;
            let i = id % inner;
            let start = o * n * inner + i;
            let ptr = base.get();
            if inner == 1 {
                // Contiguous line: transform in place.
                let slice = unsafe { std::slice::from_raw_parts_mut(ptr.add(start), n) };
                fft.process_with_scratch(slice, &mut scratch);
            } else {
                for j in 0..n {
                    let idx = start + j * inner;
                    debug_assert!(idx < total_len);
                    line[j] = unsafe { *ptr.add(idx) };
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for j in 0..n {
                    unsafe { *ptr.add(start + j * inner) = line[j] };
                }
            }
        }
    });
}

struct SendPtr(*mut Complex64);

impl SendPtr {
    fn get(&self) -> *mut Complex64 {
        self.0
    }
}

unsafe impl Send for SendPtr {}
unsafe impl Sync for SendPtr {}
