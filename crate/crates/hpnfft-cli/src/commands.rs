//! Subcommand implementations.

use std::path::Path;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use hpnfft::decomp::{hp_adjoint, hp_forward, serve, Topology};
use hpnfft::direct::{ndft_direct_adjoint, ndft_direct_forward, relative_l2_error};
use hpnfft::engine::{nfft_adjoint, nfft_forward, NfftConfig};
use hpnfft::ewald::{build_fluorite, ewald_energy, madelung_constant, EwaldParams, SfMethod};
use hpnfft::transport::tcp_join;
use hpnfft::{CoefficientArray, Error, FrequencyIndexSet, PointSet, Result, SampleValues, WindowKind};

use crate::cluster::{with_cluster, TransportChoice};
use crate::pointfile;
use crate::report::{metric, SweepReport};

/// Oracle cost guard: the direct reference transform runs M·|I_N| complex
/// exponentials per direction.
const ORACLE_COST_LIMIT: u128 = 1_000_000_000;
/// Rough allocation ceiling for the perf sweep.
const PERF_MEMORY_LIMIT: u128 = 4 << 30;

pub fn generate_points(rng: &mut ChaCha12Rng, dim: usize, count: usize) -> PointSet {
    let coords: Vec<f64> = (0..count * dim).map(|_| rng.gen_range(-0.5..0.5)).collect();
    PointSet::new(dim, coords).expect("generated coordinates are in range")
}

/// Uniform complex values over the unit square.
pub fn generate_values(rng: &mut ChaCha12Rng, count: usize) -> SampleValues {
    SampleValues::new(
        (0..count)
            .map(|_| Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect(),
    )
}

fn generate_coefficients(rng: &mut ChaCha12Rng, set: &FrequencyIndexSet) -> CoefficientArray {
    CoefficientArray::from_values(
        set.clone(),
        (0..set.len())
            .map(|_| Complex64::new(rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)))
            .collect(),
    )
    .expect("generated coefficients match the index set")
}

pub fn parse_windows(spec: &str) -> std::result::Result<Vec<WindowKind>, String> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(WindowKind::ALL.to_vec());
    }
    spec.split(',')
        .map(|s| s.trim().parse::<WindowKind>().map_err(|e| e.to_string()))
        .collect()
}

/// Inclusive `lo:hi` integer range; a single value means `v:v`.
pub fn parse_index_range(spec: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| s.trim().parse::<usize>().map_err(|e| format!("bad integer {s:?}: {e}"));
    match parts.as_slice() {
        [v] => {
            let v = parse(v)?;
            Ok((v, v))
        }
        [lo, hi] => {
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            if lo > hi {
                return Err(format!("empty range {spec:?}"));
            }
            Ok((lo, hi))
        }
        _ => Err(format!("expected LO:HI, got {spec:?}")),
    }
}

/// `start:end:step` (step defaults to 0.1 for `start:end`), or one value.
pub fn parse_alpha_range(spec: &str) -> std::result::Result<Vec<f64>, String> {
    let parts: Vec<&str> = spec.split(':').collect();
    let parse = |s: &str| s.trim().parse::<f64>().map_err(|e| format!("bad number {s:?}: {e}"));
    let (start, end, step) = match parts.as_slice() {
        [v] => return Ok(vec![parse(v)?]),
        [a, b] => (parse(a)?, parse(b)?, 0.1),
        [a, b, s] => (parse(a)?, parse(b)?, parse(s)?),
        _ => return Err(format!("expected START:END[:STEP], got {spec:?}")),
    };
    if step <= 0.0 || end < start {
        return Err(format!("bad range {spec:?}"));
    }
    let n = ((end - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

#[allow(clippy::too_many_arguments)]
pub fn run_precision(
    dims: &[usize],
    points_count: usize,
    sigma: f64,
    m_range: (usize, usize),
    windows: &[WindowKind],
    seed: u64,
    workers: usize,
    force: bool,
    out: Option<&Path>,
) -> Result<()> {
    let index_set = FrequencyIndexSet::new(dims)?;
    let cost = points_count as u128 * index_set.len() as u128;
    if cost > ORACLE_COST_LIMIT && !force {
        return Err(Error::Resource(format!(
            "direct reference cost M·|I_N| = {cost} exceeds {ORACLE_COST_LIMIT}; pass --force to run anyway"
        )));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let points = generate_points(&mut rng, dims.len(), points_count);
    let values = generate_values(&mut rng, points_count);
    let coeffs = generate_coefficients(&mut rng, &index_set);

    let forward_ref = ndft_direct_forward(&points, &values, &index_set)?;
    let adjoint_ref = ndft_direct_adjoint(&coeffs, &points)?;

    let mut report = SweepReport::new(&["window", "m", "error_forward", "error_adjoint"]);
    report.meta("dims", join(dims));
    report.meta("points", points_count);
    report.meta("sigma", sigma);
    report.meta("m_range", format!("{}:{}", m_range.0, m_range.1));
    report.meta("seed", seed);
    report.meta("workers", workers);

    for &window in windows {
        for m in m_range.0..=m_range.1 {
            let cfg = NfftConfig::new(dims, window, sigma, m)?.with_workers(workers);
            let fast_forward = nfft_forward(&points, &values, &cfg)?;
            let err_forward = relative_l2_error(fast_forward.values(), forward_ref.values())?;
            let fast_adjoint = nfft_adjoint(&coeffs, &points, &cfg)?;
            let err_adjoint = relative_l2_error(fast_adjoint.values(), adjoint_ref.values())?;
            report.push(vec![
                window.to_string(),
                m.to_string(),
                metric(err_forward),
                metric(err_adjoint),
            ]);
        }
    }
    report.save(out)?;
    eprintln!("precision sweep: {} rows", report.rows());
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn run_perf(
    sides: &[usize],
    workers_list: &[usize],
    repetitions: usize,
    dims: &[usize],
    sigma: f64,
    m: usize,
    window: WindowKind,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    if repetitions < 1 {
        return Err(Error::Resource("at least one repetition required".into()));
    }
    let d = dims.len();
    let max_points = sides.iter().map(|s| s.pow(3)).max().unwrap_or(0) as u128;
    let grid_len: u128 = dims.iter().map(|&n| 2 * n as u128).product();
    let max_workers = workers_list.iter().copied().max().unwrap_or(1) as u128;
    let estimated = max_points * ((d as u128 + 2) * 8) * 3 + (max_workers + 1) * grid_len * 16 * 2;
    if estimated > PERF_MEMORY_LIMIT {
        return Err(Error::Resource(format!(
            "estimated working set {estimated} bytes exceeds {PERF_MEMORY_LIMIT}"
        )));
    }

    let mut report = SweepReport::new(&["points", "workers", "seconds", "speedup", "raw_seconds"]);
    report.meta("dims", join(dims));
    report.meta("sigma", sigma);
    report.meta("m", m);
    report.meta("window", window);
    report.meta("seed", seed);
    report.meta("repetitions", repetitions);

    for &side in sides {
        let count = side.pow(3);
        let mut rng = ChaCha12Rng::seed_from_u64(seed ^ (side as u64));
        let points = generate_points(&mut rng, d, count);
        let values = generate_values(&mut rng, count);
        let cfg = NfftConfig::new(dims, window, sigma, m)?;

        let mut baseline: Option<f64> = None;
        for &workers in workers_list {
            let timings = with_cluster(TransportChoice::InProc, "", workers.max(1), |root| {
                let mut timings = Vec::with_capacity(repetitions);
                for _ in 0..repetitions {
                    let start = Instant::now();
                    let result = hp_forward(Some((&points, &values)), &cfg, root)?;
                    debug_assert!(result.is_some());
                    timings.push(start.elapsed().as_secs_f64());
                }
                Ok(timings)
            })?;
            let median = median_of(&timings);
            let baseline_value = *baseline.get_or_insert(median);
            report.push(vec![
                count.to_string(),
                workers.to_string(),
                format!("{median:.6}"),
                format!("{:.3}", baseline_value / median),
                timings.iter().map(|t| format!("{t:.6}")).collect::<Vec<_>>().join(";"),
            ]);
        }
    }
    report.save(out)?;
    eprintln!("perf sweep: {} rows", report.rows());
    Ok(())
}

fn median_of(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[sorted.len() / 2]
}

#[allow(clippy::too_many_arguments)]
pub fn run_madelung(
    cells: usize,
    alphas: &[f64],
    direct: bool,
    window: WindowKind,
    sigma: f64,
    m: usize,
    real_cutoff: Option<f64>,
    kmax: Option<usize>,
    workers: usize,
    out: Option<&Path>,
) -> Result<()> {
    let sys = build_fluorite(cells)?;
    let method = if direct {
        SfMethod::Direct
    } else {
        SfMethod::Nfft { window, sigma, m, bandwidth: None }
    };
    let mode_name = if direct { "direct" } else { "nfft" };

    let mut report = SweepReport::new(&[
        "cells",
        "alpha",
        "mode",
        "u_real",
        "u_reciprocal",
        "u_total",
        "madelung",
    ]);
    report.meta("cells", cells);
    report.meta("ions", sys.len());
    report.meta("box_length", metric(sys.box_length()));
    report.meta("mode", mode_name);
    report.meta("window", window);
    report.meta("workers", workers);

    for &alpha in alphas {
        let mut params = EwaldParams::converged(alpha, &sys)?;
        if let Some(rc) = real_cutoff {
            params.real_cutoff = rc;
        }
        if let Some(k) = kmax {
            params.kmax = k;
        }
        let energy = ewald_energy(&sys, &params, &method, workers)?;
        let constant = madelung_constant(&sys, &params, &method, workers)?;
        report.push(vec![
            cells.to_string(),
            format!("{alpha}"),
            mode_name.to_string(),
            metric(energy.real_space),
            metric(energy.reciprocal),
            metric(energy.total),
            metric(constant),
        ]);
    }
    report.save(out)?;
    eprintln!("madelung sweep: {} rows", report.rows());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransformDirection {
    Forward,
    Adjoint,
}

impl std::str::FromStr for TransformDirection {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "forward" => Ok(TransformDirection::Forward),
            "adjoint" => Ok(TransformDirection::Adjoint),
            other => Err(format!("unknown direction {other:?} (expected forward or adjoint)")),
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn run_transform(
    input: &Path,
    direction: TransformDirection,
    dims: &[usize],
    sigma: f64,
    m: usize,
    window: WindowKind,
    workers: usize,
    transport: TransportChoice,
    listen: &str,
    coeffs_path: Option<&Path>,
    out: Option<&Path>,
) -> Result<()> {
    let (points, values) = pointfile::read_points(input)?;
    if points.dim() != dims.len() {
        return Err(Error::Shape(format!(
            "point file is {}-dimensional but --dims names {} dimensions",
            points.dim(),
            dims.len()
        )));
    }
    let cfg = NfftConfig::new(dims, window, sigma, m)?;

    match direction {
        TransformDirection::Forward => {
            let coeffs = with_cluster(transport, listen, workers.max(1), |root| {
                Ok(hp_forward(Some((&points, &values)), &cfg, root)?
                    .expect("rank 0 holds the reduced result"))
            })?;
            write_coeffs_csv(&coeffs, out)?;
            eprintln!("transform: {} coefficients", coeffs.len());
        }
        TransformDirection::Adjoint => {
            let coeffs_path = coeffs_path
                .ok_or_else(|| Error::Resource("adjoint transform needs --coeffs".into()))?;
            let out = out.ok_or_else(|| Error::Resource("adjoint transform needs --out".into()))?;
            let coeffs = read_coeffs_csv(coeffs_path, cfg.index_set())?;
            let result = with_cluster(transport, listen, workers.max(1), |root| {
                Ok(hp_adjoint(Some((&coeffs, &points)), &cfg, root)?
                    .expect("rank 0 holds the gathered result"))
            })?;
            pointfile::write_points(out, &points, &result)?;
            eprintln!("transform: {} point values", result.len());
        }
    }
    Ok(())
}

pub fn run_worker(connect: &str) -> Result<()> {
    let (transport, rank, num_nodes) = tcp_join(connect)?;
    let mut topo = Topology::new(num_nodes, rank, Box::new(transport))?;
    serve(&mut topo)
}

fn write_coeffs_csv(coeffs: &CoefficientArray, out: Option<&Path>) -> Result<()> {
    let d = coeffs.index_set().dim();
    let mut header: Vec<String> = (0..d).map(|t| format!("k_{t}")).collect();
    header.push("re".into());
    header.push("im".into());
    let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    let mut report = SweepReport::new(&header_refs);
    report.meta("dims", join(coeffs.index_set().dims()));
    coeffs.index_set().for_each_index(|flat, k| {
        let mut row: Vec<String> = k.iter().map(|kt| kt.to_string()).collect();
        let v = coeffs.values()[flat];
        row.push(metric(v.re));
        row.push(metric(v.im));
        report.push(row);
    });
    report.save(out)
}

fn read_coeffs_csv(path: &Path, index_set: &FrequencyIndexSet) -> Result<CoefficientArray> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Resource(format!("reading {}: {e}", path.display())))?;
    let d = index_set.dim();
    let mut values = vec![Complex64::new(0.0, 0.0); index_set.len()];
    let mut filled = vec![false; index_set.len()];
    let mut count = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("k_") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 2 {
            return Err(Error::Format {
                offset: lineno as u64,
                reason: format!("line {}: expected {} fields, got {}", lineno + 1, d + 2, fields.len()),
            });
        }
        let mut k = Vec::with_capacity(d);
        for f in &fields[..d] {
            k.push(f.trim().parse::<i64>().map_err(|e| Error::Format {
                offset: lineno as u64,
                reason: format!("line {}: bad index {f:?}: {e}", lineno + 1),
            })?);
        }
        let parse_float = |f: &str| {
            f.trim().parse::<f64>().map_err(|e| Error::Format {
                offset: lineno as u64,
                reason: format!("line {}: bad value {f:?}: {e}", lineno + 1),
            })
        };
        let re = parse_float(fields[d])?;
        let im = parse_float(fields[d + 1])?;
        let flat = index_set.offset_of(&k).ok_or_else(|| Error::Format {
            offset: lineno as u64,
            reason: format!("line {}: index {k:?} outside the bandwidth", lineno + 1),
        })?;
        if filled[flat] {
            return Err(Error::Format {
                offset: lineno as u64,
                reason: format!("line {}: duplicate index {k:?}", lineno + 1),
            });
        }
        filled[flat] = true;
        values[flat] = Complex64::new(re, im);
        count += 1;
    }
    if count != index_set.len() {
        return Err(Error::Format {
            offset: 0,
            reason: format!("coefficient file has {count} entries, bandwidth needs {}", index_set.len()),
        });
    }
    CoefficientArray::from_values(index_set.clone(), values)
}

fn join(dims: &[usize]) -> String {
    dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",")
}
