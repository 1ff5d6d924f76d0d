//! Truncated window kernels and their Fourier-domain weights.
//!
//! Four families are supported: Gaussian, centered cardinal B-spline,
//! sinc-power, and Kaiser-Bessel. Each pairs a spatial profile `φ` (evaluated
//! on the truncated support `|n_t·x| <= m`) with the analytic Fourier
//! coefficient `c_k` of its 1-periodization; the weights over the bandwidth
//! are precomputed per spec and read concurrently afterwards.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Smallest Fourier weight we are willing to divide by.
const MIN_WEIGHT: f64 = 1e-300;

/// Window family selector. The string forms accepted by [`FromStr`] are
/// `gaussian`, `b_spline`, `sinc_power` and `kaiser_bessel`
/// (case-insensitive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WindowKind {
    Gaussian,
    BSpline,
    SincPower,
    KaiserBessel,
}

impl WindowKind {
    pub const ALL: [WindowKind; 4] = [
        WindowKind::Gaussian,
        WindowKind::BSpline,
        WindowKind::SincPower,
        WindowKind::KaiserBessel,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            WindowKind::Gaussian => "gaussian",
            WindowKind::BSpline => "b_spline",
            WindowKind::SincPower => "sinc_power",
            WindowKind::KaiserBessel => "kaiser_bessel",
        }
    }

    /// Stable single-byte code used by the wire protocol.
    pub fn wire_code(&self) -> u8 {
        match self {
            WindowKind::Gaussian => 0,
            WindowKind::BSpline => 1,
            WindowKind::SincPower => 2,
            WindowKind::KaiserBessel => 3,
        }
    }

    pub fn from_wire_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(WindowKind::Gaussian),
            1 => Some(WindowKind::BSpline),
            2 => Some(WindowKind::SincPower),
            3 => Some(WindowKind::KaiserBessel),
            _ => None,
        }
    }
}

impl fmt::Display for WindowKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WindowKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gaussian" => Ok(WindowKind::Gaussian),
            "b_spline" => Ok(WindowKind::BSpline),
            "sinc_power" => Ok(WindowKind::SincPower),
            "kaiser_bessel" => Ok(WindowKind::KaiserBessel),
            other => Err(Error::InvalidWindow(format!("unknown window kind {other:?}"))),
        }
    }
}

/// A window family bound to an oversampling factor, cut-off, and bandwidth.
///
/// `n_t = σ·N_t` rounded to the nearest even integer (never below `N_t`);
/// the multidimensional window is the tensor product of the 1-D windows.
#[derive(Debug, Clone)]
pub struct WindowSpec {
    kind: WindowKind,
    sigma: f64,
    m: usize,
    bandwidth: Vec<usize>,
    grid: Vec<usize>,
    /// Per-dimension Fourier weights, indexed by `k_t + N_t/2`.
    weights: Vec<Vec<f64>>,
}

impl WindowSpec {
    pub fn new(kind: WindowKind, sigma: f64, m: usize, bandwidth: &[usize]) -> Result<Self> {
        if !sigma.is_finite() || sigma <= 1.0 {
            return Err(Error::InvalidWindow(format!("oversampling factor {sigma} must be > 1")));
        }
        if !(1..=15).contains(&m) {
            return Err(Error::InvalidWindow(format!("cut-off {m} outside 1..=15")));
        }
        if bandwidth.is_empty() {
            return Err(Error::InvalidWindow("empty bandwidth".into()));
        }
        for &n in bandwidth {
            if n < 2 || n % 2 != 0 {
                return Err(Error::InvalidBandwidth(n));
            }
        }
        let grid: Vec<usize> = bandwidth
            .iter()
            .map(|&big_n| {
                let rounded = 2 * ((sigma * big_n as f64) / 2.0).round() as usize;
                rounded.max(big_n)
            })
            .collect();

        let mut weights = Vec::with_capacity(bandwidth.len());
        for t in 0..bandwidth.len() {
            let big_n = bandwidth[t];
            let n = grid[t];
            let half = (big_n / 2) as i64;
            let mut per_dim = Vec::with_capacity(big_n);
            for k in -half..half {
                let w = fourier_coefficient(kind, sigma, m, big_n, n, k);
                per_dim.push(checked_weight(w)?);
            }
            weights.push(per_dim);
        }

        Ok(Self { kind, sigma, m, bandwidth: bandwidth.to_vec(), grid, weights })
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn bandwidth(&self) -> &[usize] {
        &self.bandwidth
    }

    /// Oversampled grid sizes `n_t`.
    pub fn grid_dims(&self) -> &[usize] {
        &self.grid
    }

    /// 1-D window value at offset `x` in dimension `t`; exactly 0 outside the
    /// truncated support `|n_t·x| <= m`.
    pub fn spatial(&self, t: usize, x: f64) -> f64 {
        let n = self.grid[t] as f64;
        let u = n * x;
        if u.abs() > self.m as f64 {
            return 0.0;
        }
        let m = self.m as f64;
        match self.kind {
            WindowKind::Gaussian => {
                let b = gaussian_shape(self.sigma, self.m);
                (-u * u / b).exp() / (PI * b).sqrt()
            }
            WindowKind::BSpline => centered_bspline(2 * self.m, u),
            WindowKind::SincPower => {
                let big_n = self.bandwidth[t] as f64;
                let scale = big_n * (2.0 * self.sigma - 1.0) / (2.0 * m);
                scale * sinc(PI * scale * x).powi(2 * self.m as i32)
            }
            WindowKind::KaiserBessel => {
                let b = kaiser_shape(self.sigma);
                let s = (m * m - u * u).max(0.0).sqrt();
                let z = b * s;
                if z < 1e-6 {
                    (b / PI) * (1.0 + z * z / 6.0)
                } else {
                    (b / PI) * z.sinh() / z
                }
            }
        }
    }

    /// `k`-th Fourier coefficient of the 1-periodization of the dimension-`t`
    /// window. Strictly positive over the bandwidth for every family.
    pub fn fourier_weight(&self, t: usize, k: i64) -> Result<f64> {
        let half = (self.bandwidth[t] / 2) as i64;
        if k < -half || k >= half {
            return Err(Error::Shape(format!(
                "fourier weight index {k} outside [-{half}, {half})"
            )));
        }
        Ok(self.weights[t][(k + half) as usize])
    }

    /// Grid indices within the truncated support of a point component,
    /// wrapped periodically: always the 2m+1 indices centered at
    /// `round(n_t·x)` (boundary taps may evaluate to zero).
    pub fn support(&self, t: usize, x: f64) -> Vec<usize> {
        let n = self.grid[t];
        let c = stencil_center(n, x);
        let m = self.m as i64;
        (c - m..=c + m).map(|l| crate::grid::wrap_offset(l, n)).collect()
    }
}

/// Center lattice index of the spreading stencil for a point component.
pub(crate) fn stencil_center(n: usize, x: f64) -> i64 {
    (n as f64 * x).round() as i64
}

/// Rejects weights too small to divide by.
fn checked_weight(w: f64) -> Result<f64> {
    if !w.is_finite() {
        return Err(Error::InvalidWindow(format!("non-finite fourier weight {w}")));
    }
    if w < MIN_WEIGHT {
        return Err(Error::DegenerateWindow(w));
    }
    Ok(w)
}

/// Gaussian shape parameter `b = (2σ/(2σ-1))·(m/π)`.
fn gaussian_shape(sigma: f64, m: usize) -> f64 {
    (2.0 * sigma / (2.0 * sigma - 1.0)) * (m as f64 / PI)
}

/// Kaiser-Bessel shape parameter `b = π(2 - 1/σ)`.
fn kaiser_shape(sigma: f64) -> f64 {
    PI * (2.0 - 1.0 / sigma)
}

/// Analytic Fourier coefficient of the 1-periodized (untruncated) window.
fn fourier_coefficient(kind: WindowKind, sigma: f64, m: usize, big_n: usize, n: usize, k: i64) -> f64 {
    let nf = n as f64;
    let kf = k as f64;
    let mf = m as f64;
    match kind {
        WindowKind::Gaussian => {
            let b = gaussian_shape(sigma, m);
            let arg = PI * kf / nf;
            (-b * arg * arg).exp() / nf
        }
        WindowKind::BSpline => sinc(PI * kf / nf).powi(2 * m as i32) / nf,
        WindowKind::SincPower => {
            centered_bspline(2 * m, 2.0 * mf * kf / ((2.0 * sigma - 1.0) * big_n as f64))
        }
        WindowKind::KaiserBessel => {
            let b = kaiser_shape(sigma);
            let w = 2.0 * PI * kf / nf;
            bessel_i0(mf * (b * b - w * w).max(0.0).sqrt()) / nf
        }
    }
}

/// `sin(x)/x` with the removable singularity filled in.
pub(crate) fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Centered cardinal B-spline `M_p` of order `p` (support `[-p/2, p/2]`),
/// evaluated by the Cox-de Boor recurrence. `p <= 30` here.
pub(crate) fn centered_bspline(p: usize, x: f64) -> f64 {
    debug_assert!(p >= 1 && p <= 30);
    let t = x + p as f64 / 2.0;
    if t <= 0.0 || t >= p as f64 {
        return 0.0;
    }
    // v[j] holds N_q(t - j), built up from the order-1 indicator.
    let mut v = [0.0f64; 31];
    let j0 = t.floor() as usize;
    v[j0.min(p - 1)] = 1.0;
    for q in 2..=p {
        for j in 0..=(p - q) {
            let u = t - j as f64;
            v[j] = (u * v[j] + (q as f64 - u) * v[j + 1]) / (q as f64 - 1.0);
        }
    }
    v[0]
}

/// Modified Bessel function `I_0` via its power series. Every term is
/// positive, so there is no cancellation; arguments here stay below ~100.
pub(crate) fn bessel_i0(x: f64) -> f64 {
    let q = x * x / 4.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    for j in 1..500 {
        term *= q / ((j * j) as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(kind: WindowKind, sigma: f64, m: usize, bandwidth: &[usize]) -> WindowSpec {
        WindowSpec::new(kind, sigma, m, bandwidth).unwrap()
    }

    /// Composite Simpson quadrature with `panels` even intervals.
    fn simpson(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        assert!(panels % 2 == 0);
        let h = (b - a) / panels as f64;
        let mut acc = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(a + i as f64 * h);
        }
        acc * h / 3.0
    }

    /// Untruncated spatial profile, re-derived independently of
    /// `WindowSpec::spatial` for the quadrature oracles.
    fn untruncated(kind: WindowKind, sigma: f64, m: usize, big_n: usize, n: usize, x: f64) -> f64 {
        let u = n as f64 * x;
        let mf = m as f64;
        match kind {
            WindowKind::Gaussian => {
                let b = (2.0 * sigma / (2.0 * sigma - 1.0)) * (mf / PI);
                (-u * u / b).exp() / (PI * b).sqrt()
            }
            WindowKind::BSpline => centered_bspline(2 * m, u),
            WindowKind::SincPower => {
                let scale = big_n as f64 * (2.0 * sigma - 1.0) / (2.0 * mf);
                scale * sinc(PI * scale * x).powi(2 * m as i32)
            }
            WindowKind::KaiserBessel => {
                let b = PI * (2.0 - 1.0 / sigma);
                if u.abs() > mf {
                    return 0.0;
                }
                let s = (mf * mf - u * u).max(0.0).sqrt();
                let z = b * s;
                if z < 1e-6 {
                    (b / PI) * (1.0 + z * z / 6.0)
                } else {
                    (b / PI) * z.sinh() / z
                }
            }
        }
    }

    #[test]
    fn spatial_is_zero_outside_truncated_support() {
        for kind in WindowKind::ALL {
            let w = spec(kind, 2.0, 4, &[16]);
            let n = w.grid_dims()[0] as f64;
            assert_eq!(w.spatial(0, (4.0 + 0.001) / n), 0.0, "{kind}");
            assert_eq!(w.spatial(0, 0.49), 0.0, "{kind}");
            assert!(w.spatial(0, 3.9 / n) != 0.0, "{kind}");
        }
    }

    #[test]
    fn spatial_is_even() {
        for kind in WindowKind::ALL {
            let w = spec(kind, 2.0, 5, &[16]);
            let n = w.grid_dims()[0] as f64;
            for i in 0..20 {
                let x = (i as f64 / 20.0) * 5.0 / n;
                let diff = (w.spatial(0, x) - w.spatial(0, -x)).abs();
                assert!(diff <= 1e-12 * w.spatial(0, x).abs().max(1e-12), "{kind} at {x}");
            }
        }
    }

    #[test]
    fn gaussian_peak_value() {
        let w = spec(WindowKind::Gaussian, 2.0, 4, &[16]);
        assert_eq!(w.grid_dims(), &[32]);
        let b = (2.0 * 2.0 / (2.0 * 2.0 - 1.0)) * (4.0 / PI);
        assert!((w.spatial(0, 0.0) - 1.0 / (PI * b).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weights_are_symmetric() {
        for kind in WindowKind::ALL {
            let w = spec(kind, 2.0, 6, &[16]);
            for k in 1..8i64 {
                let plus = w.fourier_weight(0, k).unwrap();
                let minus = w.fourier_weight(0, -k).unwrap();
                assert!((plus - minus).abs() <= 1e-15 * plus.abs(), "{kind} k={k}");
            }
        }
    }

    #[test]
    fn weight_index_bounds_checked() {
        let w = spec(WindowKind::Gaussian, 2.0, 4, &[16]);
        assert!(w.fourier_weight(0, 8).is_err());
        assert!(w.fourier_weight(0, -9).is_err());
        assert!(w.fourier_weight(0, -8).is_ok());
        assert!(w.fourier_weight(0, 7).is_ok());
    }

    #[test]
    fn zeroth_weight_is_window_integral() {
        // The B-spline support is exactly the truncation interval, so the
        // integral of the truncated window over it equals c_0 with no tail.
        let w = spec(WindowKind::BSpline, 2.0, 3, &[16]);
        let n = w.grid_dims()[0] as f64;
        let half_support = 3.0 / n;
        let integral = simpson(|x| w.spatial(0, x), -half_support, half_support, 20_000);
        let c0 = w.fourier_weight(0, 0).unwrap();
        assert!((integral - c0).abs() <= 1e-10 * c0);
    }

    #[test]
    fn weights_match_quadrature_of_untruncated_window() {
        // Independent oracle: numerically integrate φ(x)·e^{-2πikx} and
        // compare against the analytic coefficient.
        let cases: &[(WindowKind, f64, usize, f64)] = &[
            (WindowKind::Gaussian, 2.0, 1, 0.5),
            (WindowKind::Gaussian, 2.0, 8, 0.5),
            (WindowKind::Gaussian, 1.5, 4, 0.5),
            (WindowKind::Gaussian, 2.5, 15, 0.5),
            (WindowKind::BSpline, 2.0, 2, 0.5),
            (WindowKind::BSpline, 2.0, 9, 0.5),
            (WindowKind::KaiserBessel, 2.0, 4, 0.5),
            (WindowKind::KaiserBessel, 1.5, 8, 0.5),
            // Polynomially decaying tails: widen the quadrature interval.
            (WindowKind::SincPower, 2.0, 4, 4.0),
            (WindowKind::SincPower, 2.0, 8, 2.0),
        ];
        for &(kind, sigma, m, half_range) in cases {
            let big_n = 16;
            let w = spec(kind, sigma, m, &[big_n]);
            let n = w.grid_dims()[0];
            for k in [-8i64, -3, 0, 1, 5, 7] {
                let theta = -2.0 * PI * k as f64;
                let re = simpson(
                    |x| untruncated(kind, sigma, m, big_n, n, x) * (theta * x).cos(),
                    -half_range,
                    half_range,
                    40_000,
                );
                let weight = w.fourier_weight(0, k).unwrap();
                assert!(
                    (re - weight).abs() <= 1e-8 * weight.abs(),
                    "{kind} sigma={sigma} m={m} k={k}: quadrature {re} vs analytic {weight}"
                );
                // The imaginary part vanishes by symmetry.
                let im = simpson(
                    |x| untruncated(kind, sigma, m, big_n, n, x) * (theta * x).sin(),
                    -half_range,
                    half_range,
                    40_000,
                );
                assert!(im.abs() <= 1e-10 * weight.abs().max(1e-30));
            }
        }
    }

    #[test]
    fn support_is_centered_and_wrapped() {
        let w = spec(WindowKind::Gaussian, 2.0, 2, &[16]);
        assert_eq!(w.grid_dims(), &[32]);
        assert_eq!(w.support(0, 0.0), vec![30, 31, 0, 1, 2]);

        let w1 = spec(WindowKind::Gaussian, 2.0, 1, &[16]);
        // round(32·0.49) = 16 maps onto the negative half of the grid.
        assert_eq!(w1.support(0, 0.49), vec![15, 16, 17]);
        let wb = spec(WindowKind::Gaussian, 2.0, 1, &[16]);
        assert_eq!(wb.support(0, -0.5), vec![15, 16, 17]);
    }

    #[test]
    fn support_size_is_always_full_stencil() {
        let w = spec(WindowKind::BSpline, 2.0, 5, &[16]);
        for i in 0..50 {
            let x = -0.5 + i as f64 / 50.0;
            assert_eq!(w.support(0, x).len(), 11);
        }
    }

    #[test]
    fn stencil_covers_all_nonzero_window_values() {
        // Any lattice index outside the returned support has |n·x - l| > m
        // (possibly after unwrapping), where the window vanishes.
        let w = spec(WindowKind::KaiserBessel, 2.0, 3, &[8]);
        let n = w.grid_dims()[0];
        for i in 0..40 {
            let x = -0.5 + i as f64 / 40.0 + 0.003;
            let support = w.support(0, x);
            for l in 0..n as i64 {
                if support.contains(&(l as usize)) {
                    continue;
                }
                // Check every unwrapped representative of l near x.
                for rep in [-1i64, 0, 1] {
                    let ll = l + rep * n as i64;
                    let offset = x - ll as f64 / n as f64;
                    assert_eq!(w.spatial(0, offset), 0.0, "x={x} l={ll}");
                }
            }
        }
    }

    #[test]
    fn weights_positive_and_bounded_away_from_zero() {
        for kind in WindowKind::ALL {
            for m in 1..=15 {
                let w = spec(kind, 2.0, m, &[16]);
                for k in -8i64..8 {
                    let c = w.fourier_weight(0, k).unwrap();
                    assert!(c.is_finite() && c > 1e-300, "{kind} m={m} k={k}: {c}");
                }
            }
        }
    }

    #[test]
    fn gaussian_truncation_tail_decreases_in_cutoff() {
        let big_n = 16;
        let mut last = f64::INFINITY;
        for m in 1..=15 {
            let w = spec(WindowKind::Gaussian, 2.0, m, &[big_n]);
            let n = w.grid_dims()[0];
            let lo = m as f64 / n as f64;
            let tail = 2.0 * simpson(|x| untruncated(WindowKind::Gaussian, 2.0, m, big_n, n, x), lo, 1.0, 20_000);
            assert!(tail < last, "m={m}: tail {tail} vs previous {last}");
            last = tail;
        }
    }

    #[test]
    fn degenerate_weight_guard() {
        assert!(matches!(checked_weight(1e-301), Err(Error::DegenerateWindow(_))));
        assert!(matches!(checked_weight(f64::NAN), Err(Error::InvalidWindow(_))));
        assert_eq!(checked_weight(0.25).unwrap(), 0.25);
    }

    #[test]
    fn kind_parsing_is_case_insensitive() {
        assert_eq!("GAUSSIAN".parse::<WindowKind>().unwrap(), WindowKind::Gaussian);
        assert_eq!("b_spline".parse::<WindowKind>().unwrap(), WindowKind::BSpline);
        assert_eq!("Sinc_Power".parse::<WindowKind>().unwrap(), WindowKind::SincPower);
        assert_eq!("kaiser_bessel".parse::<WindowKind>().unwrap(), WindowKind::KaiserBessel);
        assert!("hann".parse::<WindowKind>().is_err());
        for kind in WindowKind::ALL {
            assert_eq!(kind.name().parse::<WindowKind>().unwrap(), kind);
            assert_eq!(WindowKind::from_wire_code(kind.wire_code()), Some(kind));
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(WindowSpec::new(WindowKind::Gaussian, 1.0, 4, &[16]).is_err());
        assert!(WindowSpec::new(WindowKind::Gaussian, 2.0, 0, &[16]).is_err());
        assert!(WindowSpec::new(WindowKind::Gaussian, 2.0, 16, &[16]).is_err());
        assert!(WindowSpec::new(WindowKind::Gaussian, 2.0, 4, &[15]).is_err());
    }

    #[test]
    fn grid_rounding_is_even_and_at_least_bandwidth() {
        let w = spec(WindowKind::Gaussian, 1.1, 2, &[16, 6]);
        // 1.1·16 = 17.6 → 18; 1.1·6 = 6.6 → 6.
        assert_eq!(w.grid_dims(), &[18, 6]);
        let w2 = spec(WindowKind::Gaussian, 2.0, 2, &[16]);
        assert_eq!(w2.grid_dims(), &[32]);
    }

    #[test]
    fn bspline_partition_of_unity() {
        for p in [2usize, 7, 16, 30] {
            for i in 0..10 {
                let x = -0.4 + i as f64 * 0.631;
                let total: f64 = (-20..=20).map(|j| centered_bspline(p, x - j as f64)).sum();
                assert!((total - 1.0).abs() < 1e-12, "p={p} x={x}");
            }
        }
    }

    #[test]
    fn bessel_i0_reference_values() {
        // Abramowitz & Stegun 9.8: I_0(1) and I_0(2).
        assert!((bessel_i0(0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_i0(1.0) - 1.2660658777520084).abs() < 1e-13);
        assert!((bessel_i0(2.0) - 2.2795853023360673).abs() < 1e-12);
    }
}
