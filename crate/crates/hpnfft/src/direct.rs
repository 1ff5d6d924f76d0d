//! Direct O(M·|I_N|) reference transforms and the relative l2 error metric.
//!
//! Nothing here is fast; these are the oracles the gridding transform is
//! validated against.

use num_complex::Complex64;
use std::f64::consts::TAU;

use crate::domain::{CoefficientArray, FrequencyIndexSet, PointSet, SampleValues};
use crate::error::{Error, Result};
use crate::fft::Direction;
use crate::grid::{GridLayout, OversampledGrid};

fn dot(k: &[i64], x: &[f64]) -> f64 {
    k.iter().zip(x).map(|(&kt, &xt)| kt as f64 * xt).sum()
}

/// Evaluates `f̂(k) = Σ_j f(x_j) · e^{-2πi k·x_j}` for every `k` in the index
/// set by direct summation. An empty point set yields all-zero coefficients.
pub fn ndft_direct_forward(
    points: &PointSet,
    values: &SampleValues,
    index_set: &FrequencyIndexSet,
) -> Result<CoefficientArray> {
    if values.len() != points.len() {
        return Err(Error::Shape(format!(
            "{} values for {} points",
            values.len(),
            points.len()
        )));
    }
    if points.dim() != index_set.dim() {
        return Err(Error::Shape(format!(
            "point dim {} does not match index-set dim {}",
            points.dim(),
            index_set.dim()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); index_set.len()];
    let vals = values.values();
    index_set.for_each_index(|flat, k| {
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, v) in vals.iter().enumerate() {
            acc += v * Complex64::cis(-TAU * dot(k, points.point(j)));
        }
        out[flat] = acc;
    });
    CoefficientArray::from_values(index_set.clone(), out)
}

/// Evaluates `f(x_j) = Σ_k f̂(k) · e^{2πi k·x_j}` for every point by direct
/// summation over the coefficient index set.
pub fn ndft_direct_adjoint(coeffs: &CoefficientArray, points: &PointSet) -> Result<SampleValues> {
    if points.dim() != coeffs.index_set().dim() {
        return Err(Error::Shape(format!(
            "point dim {} does not match index-set dim {}",
            points.dim(),
            coeffs.index_set().dim()
        )));
    }
    let mut out = vec![Complex64::new(0.0, 0.0); points.len()];
    let vals = coeffs.values();
    coeffs.index_set().for_each_index(|flat, k| {
        let c = vals[flat];
        for (j, o) in out.iter_mut().enumerate() {
            *o += c * Complex64::cis(TAU * dot(k, points.point(j)));
        }
    });
    Ok(SampleValues::new(out))
}

/// Direct O(|I_n|²) equispaced DFT used solely as the FFT oracle. Forward is
/// the unnormalized sum with negative exponent; inverse includes the
/// `1/|I_n|` factor.
pub fn dft_direct_equispaced(grid: &OversampledGrid, direction: Direction) -> Result<OversampledGrid> {
    let (expected, out_layout, sign) = match direction {
        Direction::Forward => (GridLayout::Spatial, GridLayout::Frequency, -1.0),
        Direction::Inverse => (GridLayout::Frequency, GridLayout::Spatial, 1.0),
    };
    if grid.layout() != expected {
        return Err(Error::Shape("grid layout does not match DFT direction".into()));
    }

    // Cache (offset, fractional coordinate) pairs once; the double loop below
    // visits |I_n|^2 combinations.
    let d = grid.dim();
    let mut offsets = Vec::with_capacity(grid.len());
    let mut fracs = Vec::with_capacity(grid.len() * d);
    grid.for_each_signed(|off, l| {
        offsets.push(off);
        for (t, &lt) in l.iter().enumerate() {
            fracs.push(lt as f64 / grid.dims()[t] as f64);
        }
    });

    let input = grid.values();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (a, &out_off) in offsets.iter().enumerate() {
        let kfrac = &fracs[a * d..(a + 1) * d];
        let mut acc = Complex64::new(0.0, 0.0);
        for (b, &in_off) in offsets.iter().enumerate() {
            let lfrac = &fracs[b * d..(b + 1) * d];
            let mut phase = 0.0;
            for t in 0..d {
                // k_t · l_t / n_t with the 1/n_t already folded into one side.
                phase += kfrac[t] * lfrac[t] * grid.dims()[t] as f64;
            }
            acc += input[in_off] * Complex64::cis(sign * TAU * phase);
        }
        out[out_off] = acc;
    }
    if direction == Direction::Inverse {
        let scale = 1.0 / grid.len() as f64;
        for v in &mut out {
            *v *= scale;
        }
    }
    OversampledGrid::from_values(grid.dims(), out_layout, out)
}

/// Relative l2 error `‖f - s‖₂ / ‖s‖₂` over all entries, with `s` the
/// reference. Errors out when the reference has zero norm.
pub fn relative_l2_error(f: &[Complex64], s: &[Complex64]) -> Result<f64> {
    if f.len() != s.len() {
        return Err(Error::Shape(format!(
            "error metric inputs have lengths {} and {}",
            f.len(),
            s.len()
        )));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, b) in f.iter().zip(s) {
        num += (a - b).norm_sqr();
        den += b.norm_sqr();
    }
    if den == 0.0 {
        return Err(Error::UndefinedReference);
    }
    Ok((num / den).sqrt())
}
