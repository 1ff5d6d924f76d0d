//! The fast gridding transform.
//!
//! Forward: [`spread`] nonequispaced samples onto an oversampled spatial grid
//! through the truncated window, run the FFT, then [`scale`] the bandwidth
//! frequencies by the window weights. Adjoint: [`subdivide`] coefficients
//! onto the oversampled frequency grid (zero-padded), run the inverse FFT,
//! then [`interpolate`] at the points through the same window.
//!
//! Work is organized per nonequispaced point, not per lattice site: each
//! point spreads into (or gathers from) the `(2m+1)^d` stencil around it.
//! Parallel spreading accumulates into per-worker private grids that are
//! reduced in worker order, so a fixed worker count is bit-reproducible.

use num_complex::Complex64;

use crate::domain::{CoefficientArray, FrequencyIndexSet, PointSet, SampleValues};
use crate::error::{Error, Result};
use crate::fft::{fft_oversampled, Direction};
use crate::grid::{wrap_offset, GridLayout, OversampledGrid};
use crate::parallel::map_workers;
use crate::window::{stencil_center, WindowKind, WindowSpec};

/// Configuration of one fast transform: bandwidth, window, and tuning knobs.
#[derive(Debug, Clone)]
pub struct NfftConfig {
    index_set: FrequencyIndexSet,
    window: WindowSpec,
    worker_count_hint: usize,
    chunk_size: usize,
}

impl NfftConfig {
    pub fn new(dims: &[usize], kind: WindowKind, sigma: f64, m: usize) -> Result<Self> {
        let index_set = FrequencyIndexSet::new(dims)?;
        let window = WindowSpec::new(kind, sigma, m, dims)?;
        Ok(Self { index_set, window, worker_count_hint: 1, chunk_size: 1024 })
    }

    /// Number of workers used inside a transform. Tuning only: results for a
    /// fixed hint are bit-reproducible, different hints agree to rounding.
    pub fn with_workers(mut self, workers: usize) -> Self {
        self.worker_count_hint = workers.max(1);
        self
    }

    /// Contiguous point-chunk size used to assign work to workers. Tuning
    /// only, never semantic.
    pub fn with_chunk_size(mut self, chunk: usize) -> Self {
        self.chunk_size = chunk.max(1);
        self
    }

    pub fn index_set(&self) -> &FrequencyIndexSet {
        &self.index_set
    }

    pub fn window(&self) -> &WindowSpec {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.index_set.dim()
    }

    pub fn workers(&self) -> usize {
        self.worker_count_hint
    }

    pub fn chunk_size(&self) -> usize {
        self.chunk_size
    }

    /// Per-dimension weight used by the scaling and subdividing steps:
    /// `n_t · c_{k_t}`, indexed by `k_t + N_t/2`.
    fn scaling_weights(&self) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(self.dim());
        for t in 0..self.dim() {
            let big_n = self.index_set.dims()[t];
            let n = self.window.grid_dims()[t] as f64;
            let half = (big_n / 2) as i64;
            let mut per_dim = Vec::with_capacity(big_n);
            for k in -half..half {
                per_dim.push(n * self.window.fourier_weight(t, k)?);
            }
            out.push(per_dim);
        }
        Ok(out)
    }
}

/// Per-point stencil scratch: wrapped stride-premultiplied offsets and window
/// weights, one row of `2m+1` per dimension, plus the odometer state.
struct StencilScratch {
    width: usize,
    offsets: Vec<usize>,
    weights: Vec<f64>,
    digits: Vec<usize>,
    prefix_off: Vec<usize>,
    prefix_w: Vec<f64>,
}

impl StencilScratch {
    fn new(dim: usize, m: usize) -> Self {
        let width = 2 * m + 1;
        Self {
            width,
            offsets: vec![0; dim * width],
            weights: vec![0.0; dim * width],
            digits: vec![0; dim],
            prefix_off: vec![0; dim + 1],
            prefix_w: vec![1.0; dim + 1],
        }
    }

    fn fill(&mut self, window: &WindowSpec, grid: &GridShape, point: &[f64]) {
        let m = window.m() as i64;
        for (t, &x) in point.iter().enumerate() {
            let n = grid.dims[t];
            let c = stencil_center(n, x);
            let row = t * self.width;
            for (d, l) in (c - m..=c + m).enumerate() {
                self.offsets[row + d] = wrap_offset(l, n) * grid.strides[t];
                self.weights[row + d] = window.spatial(t, x - l as f64 / n as f64);
            }
        }
    }

    /// Visits every stencil site as `(flat_offset, weight)` in lexicographic
    /// order of the per-dimension taps.
    fn for_each_site(&mut self, mut f: impl FnMut(usize, f64)) {
        let d = self.digits.len();
        self.digits.iter_mut().for_each(|v| *v = 0);
        let mut dirty = 0usize;
        'outer: loop {
            for t in dirty..d {
                let i = t * self.width + self.digits[t];
                self.prefix_off[t + 1] = self.prefix_off[t] + self.offsets[i];
                self.prefix_w[t + 1] = self.prefix_w[t] * self.weights[i];
            }
            f(self.prefix_off[d], self.prefix_w[d]);
            let mut t = d;
            loop {
                if t == 0 {
                    break 'outer;
                }
                t -= 1;
                self.digits[t] += 1;
                if self.digits[t] < self.width {
                    dirty = t;
                    continue 'outer;
                }
                self.digits[t] = 0;
            }
        }
    }
}

struct GridShape {
    dims: Vec<usize>,
    strides: Vec<usize>,
}

impl GridShape {
    fn of(dims: &[usize]) -> Self {
        let mut strides = vec![1usize; dims.len()];
        for t in (0..dims.len().saturating_sub(1)).rev() {
            strides[t] = strides[t + 1] * dims[t + 1];
        }
        Self { dims: dims.to_vec(), strides }
    }
}

fn check_point_shapes(points: &PointSet, cfg: &NfftConfig) -> Result<()> {
    if points.dim() != cfg.dim() {
        return Err(Error::Shape(format!(
            "point dim {} does not match transform dim {}",
            points.dim(),
            cfg.dim()
        )));
    }
    Ok(())
}

/// Spreads sample values onto the oversampled spatial grid:
/// `g(l) = Σ_j f(x_j) · Π_t φ_t(x_{j,t} - l_t/n_t)` over each point's
/// `2m+1`-wide per-dimension stencil, wrapped periodically.
pub fn spread(points: &PointSet, values: &SampleValues, cfg: &NfftConfig) -> Result<OversampledGrid> {
    check_point_shapes(points, cfg)?;
    if values.len() != points.len() {
        return Err(Error::Shape(format!(
            "{} values for {} points",
            values.len(),
            points.len()
        )));
    }

    let grid_dims = cfg.window().grid_dims().to_vec();
    let mut out = OversampledGrid::zeros(&grid_dims, GridLayout::Spatial)?;
    let m_points = points.len();
    if m_points == 0 {
        return Ok(out);
    }

    let shape = GridShape::of(&grid_dims);
    let chunk = cfg.chunk_size();
    let num_chunks = m_points.div_ceil(chunk);
    let workers = cfg.workers().min(num_chunks).max(1);

    if workers == 1 {
        let mut scratch = StencilScratch::new(cfg.dim(), cfg.window().m());
        let grid = out.values_mut();
        for j in 0..m_points {
            let v = values.values()[j];
            scratch.fill(cfg.window(), &shape, points.point(j));
            scratch.for_each_site(|off, w| grid[off] += v * w);
        }
        return Ok(out);
    }

    // Chunks go to workers round-robin; each worker owns a private grid and
    // the private grids are reduced in worker order afterwards.
    let grid_len = out.len();
    let partials = map_workers(workers, |w| {
        let mut local = vec![Complex64::new(0.0, 0.0); grid_len];
        let mut scratch = StencilScratch::new(cfg.dim(), cfg.window().m());
        let mut c = w;
        while c < num_chunks {
            let lo = c * chunk;
            let hi = (lo + chunk).min(m_points);
            for j in lo..hi {
                let v = values.values()[j];
                scratch.fill(cfg.window(), &shape, points.point(j));
                scratch.for_each_site(|off, wt| local[off] += v * wt);
            }
            c += workers;
        }
        local
    });

    let grid = out.values_mut();
    for local in partials {
        for (g, l) in grid.iter_mut().zip(local) {
            *g += l;
        }
    }
    Ok(out)
}

/// Divides the bandwidth frequencies of the transformed grid by the scaling
/// weight `Π_t n_t·c_{k_t}` and discards the outer frequencies.
pub fn scale(grid: &OversampledGrid, cfg: &NfftConfig) -> Result<CoefficientArray> {
    if grid.layout() != GridLayout::Frequency {
        return Err(Error::Shape("scaling expects a frequency-layout grid".into()));
    }
    if grid.dims() != cfg.window().grid_dims() {
        return Err(Error::Shape(format!(
            "grid dims {:?} do not match transform grid {:?}",
            grid.dims(),
            cfg.window().grid_dims()
        )));
    }
    let weights = cfg.scaling_weights()?;
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.index_set().len()];
    cfg.index_set().for_each_index(|flat, k| {
        let mut w = 1.0;
        for (t, &kt) in k.iter().enumerate() {
            let half = (cfg.index_set().dims()[t] / 2) as i64;
            w *= weights[t][(kt + half) as usize];
        }
        out[flat] = grid.get(k) / w;
    });
    CoefficientArray::from_values(cfg.index_set().clone(), out)
}

/// Maps coefficients onto the oversampled frequency grid: bandwidth
/// frequencies are divided by the scaling weight and boosted by `|I_n|` (to
/// cancel the inverse FFT's normalization), the rest is zero padding.
pub fn subdivide(coeffs: &CoefficientArray, cfg: &NfftConfig) -> Result<OversampledGrid> {
    if coeffs.index_set() != cfg.index_set() {
        return Err(Error::Shape("coefficient index set does not match transform".into()));
    }
    let weights = cfg.scaling_weights()?;
    let mut grid = OversampledGrid::zeros(cfg.window().grid_dims(), GridLayout::Frequency)?;
    let boost = grid.len() as f64;
    let values = coeffs.values();
    let dims = cfg.index_set().dims().to_vec();
    cfg.index_set().for_each_index(|flat, k| {
        let mut w = 1.0;
        for (t, &kt) in k.iter().enumerate() {
            let half = (dims[t] / 2) as i64;
            w *= weights[t][(kt + half) as usize];
        }
        grid.set(k, values[flat] * (boost / w));
    });
    Ok(grid)
}

/// Gathers each point's value from the spatial grid through the window
/// stencil: `f(x_j) = Σ_{l ∈ support(x_j)} g(l) · Π_t φ_t(x_{j,t} - l_t/n_t)`.
/// Each point accumulates independently; no shared writes.
pub fn interpolate(grid: &OversampledGrid, points: &PointSet, cfg: &NfftConfig) -> Result<SampleValues> {
    check_point_shapes(points, cfg)?;
    if grid.layout() != GridLayout::Spatial {
        return Err(Error::Shape("interpolation expects a spatial-layout grid".into()));
    }
    if grid.dims() != cfg.window().grid_dims() {
        return Err(Error::Shape(format!(
            "grid dims {:?} do not match transform grid {:?}",
            grid.dims(),
            cfg.window().grid_dims()
        )));
    }

    let m_points = points.len();
    let mut out = vec![Complex64::new(0.0, 0.0); m_points];
    if m_points == 0 {
        return Ok(SampleValues::new(out));
    }
    let shape = GridShape::of(grid.dims());
    let chunk = cfg.chunk_size();
    let num_chunks = m_points.div_ceil(chunk);
    let workers = cfg.workers().min(num_chunks).max(1);
    let gv = grid.values();

    if workers == 1 {
        let mut scratch = StencilScratch::new(cfg.dim(), cfg.window().m());
        for (j, o) in out.iter_mut().enumerate() {
            scratch.fill(cfg.window(), &shape, points.point(j));
            let mut acc = Complex64::new(0.0, 0.0);
            scratch.for_each_site(|off, w| acc += gv[off] * w);
            *o = acc;
        }
        return Ok(SampleValues::new(out));
    }

    let mut per_worker: Vec<Vec<(usize, &mut [Complex64])>> = (0..workers).map(|_| Vec::new()).collect();
    for (ci, slice) in out.chunks_mut(chunk).enumerate() {
        per_worker[ci % workers].push((ci, slice));
    }
    std::thread::scope(|scope| {
        for assignment in per_worker {
            scope.spawn(|| {
                let mut list = assignment;
                let mut scratch = StencilScratch::new(cfg.dim(), cfg.window().m());
                for (ci, slice) in list.iter_mut() {
                    let base = *ci * chunk;
                    for (i, o) in slice.iter_mut().enumerate() {
                        scratch.fill(cfg.window(), &shape, points.point(base + i));
                        let mut acc = Complex64::new(0.0, 0.0);
                        scratch.for_each_site(|off, w| acc += gv[off] * w);
                        *o = acc;
                    }
                }
            });
        }
    });
    Ok(SampleValues::new(out))
}

/// Fast approximate forward transform: spread → forward FFT → scale.
pub fn nfft_forward(points: &PointSet, values: &SampleValues, cfg: &NfftConfig) -> Result<CoefficientArray> {
    let grid = spread(points, values, cfg)?;
    let grid = fft_oversampled(grid, Direction::Forward, cfg.workers())?;
    scale(&grid, cfg)
}

/// Fast approximate adjoint transform: subdivide → inverse FFT → interpolate.
pub fn nfft_adjoint(coeffs: &CoefficientArray, points: &PointSet, cfg: &NfftConfig) -> Result<SampleValues> {
    let grid = subdivide(coeffs, cfg)?;
    let grid = fft_oversampled(grid, Direction::Inverse, cfg.workers())?;
    interpolate(&grid, points, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::direct::{dft_direct_equispaced, ndft_direct_adjoint, ndft_direct_forward, relative_l2_error};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn random_points(rng: &mut ChaCha12Rng, dim: usize, m: usize) -> PointSet {
        PointSet::new(dim, (0..m * dim).map(|_| rng.gen_range(-0.5..0.5)).collect()).unwrap()
    }

    fn random_values(rng: &mut ChaCha12Rng, m: usize) -> SampleValues {
        SampleValues::new(
            (0..m)
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
    }

    fn random_coeffs(rng: &mut ChaCha12Rng, set: &FrequencyIndexSet) -> CoefficientArray {
        CoefficientArray::from_values(
            set.clone(),
            (0..set.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn spread_of_nothing_is_zero() {
        let cfg = NfftConfig::new(&[8, 8], WindowKind::Gaussian, 2.0, 3).unwrap();
        let grid = spread(&PointSet::empty(2), &SampleValues::zeros(0), &cfg).unwrap();
        assert!(grid.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn spread_single_point_is_window_stencil() {
        let cfg = NfftConfig::new(&[8, 8], WindowKind::Gaussian, 2.0, 2).unwrap();
        let n = cfg.window().grid_dims()[0] as f64;
        // Point exactly on lattice site (3, -2).
        let x = PointSet::new(2, vec![3.0 / n, -2.0 / n]).unwrap();
        let v = SampleValues::new(vec![Complex64::new(1.0, 0.0)]);
        let grid = spread(&x, &v, &cfg).unwrap();
        let w = cfg.window();
        for dl0 in -2i64..=2 {
            for dl1 in -2i64..=2 {
                let expected = w.spatial(0, -dl0 as f64 / n) * w.spatial(1, -dl1 as f64 / n);
                let got = grid.get(&[3 + dl0, -2 + dl1]);
                assert!((got.re - expected).abs() < 1e-15 && got.im == 0.0);
            }
        }
        assert!((grid.get(&[3, -2]).re - w.spatial(0, 0.0) * w.spatial(1, 0.0)).abs() < 1e-15);
        assert_eq!(grid.get(&[6, -2]), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn spread_matches_per_lattice_gather_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(31);
        let cfg = NfftConfig::new(&[8, 6], WindowKind::KaiserBessel, 2.0, 3).unwrap();
        let points = random_points(&mut rng, 2, 64);
        let values = random_values(&mut rng, 64);
        let grid = spread(&points, &values, &cfg).unwrap();

        // Serial per-lattice double loop, accumulating every unwrapped
        // preimage of each lattice site.
        let w = cfg.window();
        let dims = w.grid_dims();
        let oracle = OversampledGrid::zeros(dims, GridLayout::Spatial).unwrap();
        let mut max_rel: f64 = 0.0;
        oracle.for_each_signed(|_, l| {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..points.len() {
                let p = points.point(j);
                let mut weight = 1.0;
                for t in 0..2 {
                    let n = dims[t] as i64;
                    let mut wt = 0.0;
                    for s in -2..=2i64 {
                        let ll = l[t] + s * n;
                        wt += w.spatial(t, p[t] - ll as f64 / n as f64);
                    }
                    weight *= wt;
                }
                acc += values.values()[j] * weight;
            }
            let got = grid.get(l);
            let denom = acc.norm().max(1e-3);
            max_rel = max_rel.max((got - acc).norm() / denom);
        });
        assert!(max_rel < 1e-13, "max relative deviation {max_rel}");
    }

    #[test]
    fn scale_divides_by_scaling_weight() {
        let cfg = NfftConfig::new(&[4, 4], WindowKind::BSpline, 2.0, 2).unwrap();
        let mut grid = OversampledGrid::zeros(cfg.window().grid_dims(), GridLayout::Frequency).unwrap();
        let weights = cfg.scaling_weights().unwrap();
        cfg.index_set().for_each_index(|_, k| {
            let w = weights[0][(k[0] + 2) as usize] * weights[1][(k[1] + 2) as usize];
            grid.set(k, Complex64::new(w, 0.0));
        });
        let out = scale(&grid, &cfg).unwrap();
        for v in out.values() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        }
        // Zero grid scales to zero coefficients.
        let zero = OversampledGrid::zeros(cfg.window().grid_dims(), GridLayout::Frequency).unwrap();
        assert!(scale(&zero, &cfg).unwrap().values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn subdivide_pads_with_exact_zeros() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        let cfg = NfftConfig::new(&[4, 4], WindowKind::Gaussian, 2.0, 2).unwrap();
        let coeffs = random_coeffs(&mut rng, cfg.index_set());
        let grid = subdivide(&coeffs, &cfg).unwrap();
        assert_eq!(grid.layout(), GridLayout::Frequency);

        let weights = cfg.scaling_weights().unwrap();
        let boost = grid.len() as f64;
        grid.for_each_signed(|_, l| {
            let in_band = l.iter().zip(cfg.index_set().dims()).all(|(&lt, &n)| {
                let half = (n / 2) as i64;
                lt >= -half && lt < half
            });
            if in_band {
                let w = weights[0][(l[0] + 2) as usize] * weights[1][(l[1] + 2) as usize];
                let expected = coeffs.get(l).unwrap() * (boost / w);
                assert!((grid.get(l) - expected).norm() <= 1e-12 * expected.norm().max(1e-12));
            } else {
                assert_eq!(grid.get(l), Complex64::new(0.0, 0.0));
            }
        });
    }

    #[test]
    fn fft_step_matches_direct_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(12);
        let vals: Vec<Complex64> = (0..8 * 8)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let grid = OversampledGrid::from_values(&[8, 8], GridLayout::Spatial, vals).unwrap();
        let fast = fft_oversampled(grid.clone(), Direction::Forward, 1).unwrap();
        let direct = dft_direct_equispaced(&grid, Direction::Forward).unwrap();
        assert!(relative_l2_error(fast.values(), direct.values()).unwrap() < 1e-12);
    }

    #[test]
    fn forward_zero_input_gives_zero_output() {
        let cfg = NfftConfig::new(&[8, 8], WindowKind::Gaussian, 2.0, 4).unwrap();
        let points = PointSet::new(2, vec![0.1, -0.2]).unwrap();
        let out = nfft_forward(&points, &SampleValues::zeros(1), &cfg).unwrap();
        assert!(out.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn forward_approximates_direct_transform() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let points = random_points(&mut rng, 2, 50);
        let values = random_values(&mut rng, 50);
        for kind in WindowKind::ALL {
            let cfg = NfftConfig::new(&[8, 8], kind, 2.0, 8).unwrap();
            let fast = nfft_forward(&points, &values, &cfg).unwrap();
            let direct = ndft_direct_forward(&points, &values, cfg.index_set()).unwrap();
            let err = relative_l2_error(fast.values(), direct.values()).unwrap();
            assert!(err < 1e-6, "{kind}: error {err}");
        }
    }

    #[test]
    fn error_decays_with_cutoff() {
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let points = random_points(&mut rng, 2, 40);
        let values = random_values(&mut rng, 40);
        let set = FrequencyIndexSet::new(&[8, 8]).unwrap();
        let direct = ndft_direct_forward(&points, &values, &set).unwrap();
        for kind in WindowKind::ALL {
            let err_at = |m: usize| {
                let cfg = NfftConfig::new(&[8, 8], kind, 2.0, m).unwrap();
                let fast = nfft_forward(&points, &values, &cfg).unwrap();
                relative_l2_error(fast.values(), direct.values()).unwrap()
            };
            let coarse = err_at(2);
            let fine = err_at(8);
            assert!(fine < coarse, "{kind}: m=8 error {fine} not below m=2 error {coarse}");
        }
    }

    #[test]
    fn adjoint_zero_coefficients_give_zero_values() {
        let cfg = NfftConfig::new(&[8, 8], WindowKind::Gaussian, 2.0, 4).unwrap();
        let coeffs = CoefficientArray::zeros(cfg.index_set().clone());
        let points = PointSet::new(2, vec![0.3, 0.3, -0.1, 0.2]).unwrap();
        let out = nfft_adjoint(&coeffs, &points, &cfg).unwrap();
        assert!(out.values().iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn adjoint_of_flat_zero_frequency_is_all_ones() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let cfg = NfftConfig::new(&[8, 8], WindowKind::Gaussian, 2.0, 8).unwrap();
        let mut coeffs = CoefficientArray::zeros(cfg.index_set().clone());
        let zero_off = cfg.index_set().offset_of(&[0, 0]).unwrap();
        coeffs.values_mut()[zero_off] = Complex64::new(1.0, 0.0);
        let points = random_points(&mut rng, 2, 20);
        let out = nfft_adjoint(&coeffs, &points, &cfg).unwrap();
        for v in out.values() {
            assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-6, "{v}");
        }
    }

    #[test]
    fn adjoint_approximates_direct_adjoint() {
        let mut rng = ChaCha12Rng::seed_from_u64(13);
        let cfg = NfftConfig::new(&[8, 8], WindowKind::KaiserBessel, 2.0, 8).unwrap();
        let coeffs = random_coeffs(&mut rng, cfg.index_set());
        let points = random_points(&mut rng, 2, 30);
        let fast = nfft_adjoint(&coeffs, &points, &cfg).unwrap();
        let direct = ndft_direct_adjoint(&coeffs, &points).unwrap();
        let err = relative_l2_error(fast.values(), direct.values()).unwrap();
        assert!(err < 1e-6, "error {err}");
    }

    #[test]
    fn fixed_worker_count_is_bit_reproducible() {
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let points = random_points(&mut rng, 2, 300);
        let values = random_values(&mut rng, 300);
        let cfg = NfftConfig::new(&[8, 8], WindowKind::Gaussian, 2.0, 4)
            .unwrap()
            .with_workers(3)
            .with_chunk_size(32);
        let a = nfft_forward(&points, &values, &cfg).unwrap();
        let b = nfft_forward(&points, &values, &cfg).unwrap();
        for (x, y) in a.values().iter().zip(b.values()) {
            assert_eq!(x.re.to_bits(), y.re.to_bits());
            assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn worker_counts_agree_to_rounding() {
        let mut rng = ChaCha12Rng::seed_from_u64(22);
        let points = random_points(&mut rng, 2, 300);
        let values = random_values(&mut rng, 300);
        let base = NfftConfig::new(&[8, 8], WindowKind::Gaussian, 2.0, 4).unwrap().with_chunk_size(16);
        let one = nfft_forward(&points, &values, &base).unwrap();
        let four = nfft_forward(&points, &values, &base.clone().with_workers(4)).unwrap();
        assert!(relative_l2_error(four.values(), one.values()).unwrap() < 1e-12);

        let coeffs = random_coeffs(&mut rng, base.index_set());
        let adj_one = nfft_adjoint(&coeffs, &points, &base).unwrap();
        let adj_four = nfft_adjoint(&coeffs, &points, &base.clone().with_workers(4)).unwrap();
        assert!(relative_l2_error(adj_four.values(), adj_one.values()).unwrap() < 1e-12);
    }

    #[test]
    fn spread_interpolate_are_transposes() {
        let mut rng = ChaCha12Rng::seed_from_u64(40);
        for trial in 0..5 {
            let cfg = NfftConfig::new(&[8, 6], WindowKind::Gaussian, 2.0, 3)
                .unwrap()
                .with_workers(1 + trial % 3);
            let points = random_points(&mut rng, 2, 25);
            let f = random_values(&mut rng, 25);
            let grid_len: usize = cfg.window().grid_dims().iter().product();
            let g = OversampledGrid::from_values(
                cfg.window().grid_dims(),
                GridLayout::Spatial,
                (0..grid_len)
                    .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect(),
            )
            .unwrap();

            let spread_f = spread(&points, &f, &cfg).unwrap();
            let interp_g = interpolate(&g, &points, &cfg).unwrap();
            let lhs: Complex64 = spread_f.values().iter().zip(g.values()).map(|(a, b)| a * b.conj()).sum();
            let rhs: Complex64 = f.values().iter().zip(interp_g.values()).map(|(a, b)| a * b.conj()).sum();
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0), "trial {trial}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn forward_and_adjoint_are_transposes() {
        let mut rng = ChaCha12Rng::seed_from_u64(41);
        let cfg = NfftConfig::new(&[6, 4], WindowKind::KaiserBessel, 2.0, 5).unwrap();
        let points = random_points(&mut rng, 2, 17);
        let f = random_values(&mut rng, 17);
        let ghat = random_coeffs(&mut rng, cfg.index_set());
        let forward = nfft_forward(&points, &f, &cfg).unwrap();
        let adjoint = nfft_adjoint(&ghat, &points, &cfg).unwrap();
        let lhs: Complex64 = forward.values().iter().zip(ghat.values()).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = f.values().iter().zip(adjoint.values()).map(|(a, b)| a * b.conj()).sum();
        assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm().max(1.0), "{lhs} vs {rhs}");
    }

    #[test]
    fn pipelines_are_linear() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        let cfg = NfftConfig::new(&[8, 8], WindowKind::BSpline, 2.0, 4).unwrap();
        let points = random_points(&mut rng, 2, 20);
        let f = random_values(&mut rng, 20);
        let g = random_values(&mut rng, 20);
        let a = Complex64::new(1.3, -0.4);
        let b = Complex64::new(-0.2, 2.1);
        let combo = SampleValues::new(f.values().iter().zip(g.values()).map(|(x, y)| a * x + b * y).collect());
        let lhs = nfft_forward(&points, &combo, &cfg).unwrap();
        let ff = nfft_forward(&points, &f, &cfg).unwrap();
        let fg = nfft_forward(&points, &g, &cfg).unwrap();
        let rhs: Vec<Complex64> = ff.values().iter().zip(fg.values()).map(|(x, y)| a * x + b * y).collect();
        assert!(relative_l2_error(lhs.values(), &rhs).unwrap() < 1e-12);
    }

    #[test]
    fn shape_mismatches_are_rejected() {
        let cfg = NfftConfig::new(&[8, 8], WindowKind::Gaussian, 2.0, 4).unwrap();
        let points3 = PointSet::new(3, vec![0.0, 0.0, 0.0]).unwrap();
        assert!(spread(&points3, &SampleValues::zeros(1), &cfg).is_err());
        let points = PointSet::new(2, vec![0.0, 0.0]).unwrap();
        assert!(spread(&points, &SampleValues::zeros(2), &cfg).is_err());
        let other_set = FrequencyIndexSet::new(&[4, 4]).unwrap();
        assert!(subdivide(&CoefficientArray::zeros(other_set), &cfg).is_err());
        let spatial = OversampledGrid::zeros(&[4, 4], GridLayout::Spatial).unwrap();
        assert!(scale(&spatial, &cfg).is_err());
    }
}
