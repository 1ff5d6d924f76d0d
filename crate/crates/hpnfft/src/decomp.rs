//! Spatial decomposition of a point set across ranks, with per-rank fast
//! transforms combined collectively.
//!
//! The forward collective scatters subcells from rank 0, runs the transform
//! per rank, and sums the partial coefficient arrays with a recursive-halving
//! tree reduction (log-depth, exactly P−1 sends). The adjoint collective
//! broadcasts the coefficients, shards the points, and gathers per-point
//! results back to rank 0 in the original point order. All operations are
//! SPMD: every rank of the topology must invoke the same operation in the
//! same order.

use num_complex::Complex64;

use crate::domain::{CoefficientArray, FrequencyIndexSet, PointSet, SampleValues};
use crate::engine::{nfft_adjoint, nfft_forward, NfftConfig};
use crate::error::{Error, Result};
use crate::transport::{in_process_mesh, ClusterStats, Message, Transport};

/// A participant's view of the cluster: its rank, the cluster size, and the
/// transport used to reach the peers. Rank 0 is the major node.
pub struct Topology {
    num_nodes: usize,
    rank: usize,
    transport: Box<dyn Transport>,
}

impl Topology {
    pub fn new(num_nodes: usize, rank: usize, transport: Box<dyn Transport>) -> Result<Self> {
        if num_nodes < 1 {
            return Err(Error::InvalidTopology("at least one node required".into()));
        }
        if rank >= num_nodes {
            return Err(Error::InvalidTopology(format!("rank {rank} outside 0..{num_nodes}")));
        }
        Ok(Self { num_nodes, rank, transport })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn send(&mut self, to: usize, msg: Message) -> Result<()> {
        self.transport.send(to, msg)
    }

    pub fn recv(&mut self, from: usize) -> Result<Message> {
        self.transport.recv(from)
    }
}

/// Builds `p` in-process topologies connected by a queue mesh, ready to be
/// driven from one thread per rank.
pub fn in_process_topologies(p: usize) -> Result<(Vec<Topology>, ClusterStats)> {
    if p < 1 {
        return Err(Error::InvalidTopology("at least one node required".into()));
    }
    let (endpoints, stats) = in_process_mesh(p);
    let topos = endpoints
        .into_iter()
        .enumerate()
        .map(|(rank, ep)| Topology::new(p, rank, Box::new(ep)))
        .collect::<Result<Vec<_>>>()?;
    Ok((topos, stats))
}

/// One cell of the spatial decomposition: which global points it holds and
/// their coordinates.
#[derive(Debug, Clone)]
pub struct Subcell {
    pub id: usize,
    /// Indices into the global point set, in ascending order.
    pub indices: Vec<usize>,
    pub points: PointSet,
}

impl Subcell {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Selects this cell's sample values out of the global array.
    pub fn select_values(&self, all: &SampleValues) -> SampleValues {
        SampleValues::new(self.indices.iter().map(|&i| all.values()[i]).collect())
    }
}

/// Splits the unit box into `p` equal axis-aligned slabs and assigns every
/// point by coordinate. The split runs along the dimension of largest box
/// extent; the box is the unit cube, so ties resolve to dimension 0. Empty
/// subcells are allowed.
pub fn partition_points(points: &PointSet, p: usize) -> Result<Vec<Subcell>> {
    if p < 1 {
        return Err(Error::InvalidTopology(format!("cannot partition into {p} subcells")));
    }
    let extents = vec![1.0f64; points.dim()];
    let split_dim = extents
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
        .map(|(t, _)| t)
        .unwrap_or(0);

    let mut indices: Vec<Vec<usize>> = vec![Vec::new(); p];
    let mut coords: Vec<Vec<f64>> = vec![Vec::new(); p];
    for j in 0..points.len() {
        let x = points.point(j);
        let slab = (((x[split_dim] + 0.5) * p as f64).floor() as usize).min(p - 1);
        indices[slab].push(j);
        coords[slab].extend_from_slice(x);
    }
    indices
        .into_iter()
        .zip(coords)
        .enumerate()
        .map(|(id, (idx, c))| {
            Ok(Subcell { id, indices: idx, points: PointSet::new(points.dim(), c)? })
        })
        .collect()
}

fn coeff_to_message(coeffs: &CoefficientArray) -> Message {
    Message::CoeffArray {
        dims: coeffs.index_set().dims().iter().map(|&n| n as u32).collect(),
        values: coeffs.values().to_vec(),
    }
}

fn coeff_from_message(msg: Message, expected: &FrequencyIndexSet) -> Result<CoefficientArray> {
    match msg {
        Message::CoeffArray { dims, values } => {
            let dims_usize: Vec<usize> = dims.iter().map(|&n| n as usize).collect();
            if dims_usize != expected.dims() {
                return Err(Error::Protocol(format!(
                    "coefficient dims {dims_usize:?} do not match local {:?}",
                    expected.dims()
                )));
            }
            CoefficientArray::from_values(expected.clone(), values)
                .map_err(|e| Error::Protocol(format!("bad coefficient payload: {e}")))
        }
        other => Err(Error::Protocol(format!("expected coefficient array, got {}", message_name(&other)))),
    }
}

fn config_message(cfg: &NfftConfig) -> Message {
    Message::Config {
        kind: cfg.window().kind(),
        sigma: cfg.window().sigma(),
        m: cfg.window().m() as u32,
        dims: cfg.index_set().dims().iter().map(|&n| n as u32).collect(),
    }
}

fn check_config(msg: Message, cfg: &NfftConfig) -> Result<()> {
    match msg {
        Message::Config { kind, sigma, m, dims } => {
            let dims_usize: Vec<usize> = dims.iter().map(|&n| n as usize).collect();
            let matches = kind == cfg.window().kind()
                && sigma == cfg.window().sigma()
                && m as usize == cfg.window().m()
                && dims_usize == cfg.index_set().dims();
            if !matches {
                return Err(Error::Protocol(format!(
                    "configuration mismatch: rank 0 sent {kind}/σ={sigma}/m={m}/{dims_usize:?}, \
                     local is {}/σ={}/m={}/{:?}",
                    cfg.window().kind(),
                    cfg.window().sigma(),
                    cfg.window().m(),
                    cfg.index_set().dims()
                )));
            }
            Ok(())
        }
        other => Err(Error::Protocol(format!("expected configuration, got {}", message_name(&other)))),
    }
}

fn message_name(msg: &Message) -> &'static str {
    match msg {
        Message::SubcellAssign { .. } => "subcell assignment",
        Message::CoeffArray { .. } => "coefficient array",
        Message::PointResults { .. } => "point results",
        Message::Config { .. } => "configuration",
        Message::Shutdown => "shutdown",
    }
}

/// Recursive-halving sum of per-rank coefficient arrays. Rank 0 returns the
/// total; every other rank sends its partial exactly once and returns `None`.
///
/// Per round, ranks with a set bit under the mask send to `rank - offset` and
/// retire; the rest receive from `rank + offset` (skipped when that peer does
/// not exist, which generalizes the scheme to cluster sizes that are not
/// powers of two) and accumulate. P−1 sends in ⌈log₂P⌉ rounds.
pub fn tree_reduce_sum(local: CoefficientArray, topo: &mut Topology) -> Result<Option<CoefficientArray>> {
    let p = topo.num_nodes();
    let rank = topo.rank();
    let mut acc = local;
    let mut offset = 1usize;
    let mut mask = 1usize;
    while offset < p {
        if rank & mask != 0 {
            topo.send(rank - offset, coeff_to_message(&acc))?;
            return Ok(None);
        }
        if rank + offset < p {
            let other = coeff_from_message(topo.recv(rank + offset)?, acc.index_set())?;
            for (a, b) in acc.values_mut().iter_mut().zip(other.values()) {
                *a += b;
            }
        }
        offset += offset;
        mask = offset + mask;
    }
    debug_assert_eq!(rank, 0);
    Ok(Some(acc))
}

fn subcell_assign_forward(cell: &Subcell, all_values: &SampleValues) -> Message {
    Message::SubcellAssign {
        dim: cell.points.dim() as u32,
        coords: cell.points.coords().to_vec(),
        values: cell.indices.iter().map(|&i| all_values.values()[i]).collect(),
    }
}

/// The adjoint scatter has no sample values, so the value slot carries each
/// point's global index (exactly representable as f64 below 2^53).
fn subcell_assign_adjoint(cell: &Subcell) -> Message {
    Message::SubcellAssign {
        dim: cell.points.dim() as u32,
        coords: cell.points.coords().to_vec(),
        values: cell.indices.iter().map(|&i| Complex64::new(i as f64, 0.0)).collect(),
    }
}

fn subcell_from_message(msg: Message, cfg: &NfftConfig) -> Result<(PointSet, Vec<Complex64>)> {
    match msg {
        Message::SubcellAssign { dim, coords, values } => {
            if dim as usize != cfg.dim() {
                return Err(Error::Protocol(format!(
                    "subcell dim {dim} does not match transform dim {}",
                    cfg.dim()
                )));
            }
            let points = PointSet::new(dim as usize, coords)
                .map_err(|e| Error::Protocol(format!("bad subcell payload: {e}")))?;
            if points.len() != values.len() {
                return Err(Error::Protocol(format!(
                    "subcell carries {} points but {} values",
                    points.len(),
                    values.len()
                )));
            }
            Ok((points, values))
        }
        other => Err(Error::Protocol(format!("expected subcell assignment, got {}", message_name(&other)))),
    }
}

fn decode_global_indices(values: &[Complex64], total: usize) -> Result<Vec<usize>> {
    values
        .iter()
        .map(|v| {
            let idx = v.re;
            if v.im != 0.0 || idx < 0.0 || idx.fract() != 0.0 || idx >= total as f64 {
                return Err(Error::Protocol(format!("bad global point index {v}")));
            }
            Ok(idx as usize)
        })
        .collect()
}

/// Collective forward transform. Rank 0 supplies the input, partitions it,
/// scatters config + subcells, and returns the reduced coefficients; the
/// other ranks pass their own `cfg` (checked against the broadcast) and
/// return `None`.
pub fn hp_forward(
    input: Option<(&PointSet, &SampleValues)>,
    cfg: &NfftConfig,
    topo: &mut Topology,
) -> Result<Option<CoefficientArray>> {
    if topo.rank() == 0 {
        let (points, values) =
            input.ok_or_else(|| Error::Protocol("rank 0 must supply the transform input".into()))?;
        if values.len() != points.len() {
            return Err(Error::Shape(format!("{} values for {} points", values.len(), points.len())));
        }
        let subcells = partition_points(points, topo.num_nodes())?;
        for i in 1..topo.num_nodes() {
            topo.send(i, config_message(cfg))?;
            topo.send(i, subcell_assign_forward(&subcells[i], values))?;
        }
        let local_values = subcells[0].select_values(values);
        let partial = nfft_forward(&subcells[0].points, &local_values, cfg)?;
        tree_reduce_sum(partial, topo)
    } else {
        check_config(topo.recv(0)?, cfg)?;
        let (points, values) = subcell_from_message(topo.recv(0)?, cfg)?;
        let partial = nfft_forward(&points, &SampleValues::new(values), cfg)?;
        tree_reduce_sum(partial, topo)
    }
}

/// Collective adjoint transform. Rank 0 supplies coefficients and points,
/// broadcasts the coefficients, shards the points, and reassembles per-point
/// results in the original global order.
pub fn hp_adjoint(
    input: Option<(&CoefficientArray, &PointSet)>,
    cfg: &NfftConfig,
    topo: &mut Topology,
) -> Result<Option<SampleValues>> {
    if topo.rank() == 0 {
        let (coeffs, points) =
            input.ok_or_else(|| Error::Protocol("rank 0 must supply the transform input".into()))?;
        if coeffs.index_set() != cfg.index_set() {
            return Err(Error::Shape("coefficient index set does not match transform".into()));
        }
        let subcells = partition_points(points, topo.num_nodes())?;
        for i in 1..topo.num_nodes() {
            topo.send(i, config_message(cfg))?;
            topo.send(i, coeff_to_message(coeffs))?;
            topo.send(i, subcell_assign_adjoint(&subcells[i]))?;
        }

        let mut out = vec![Complex64::new(0.0, 0.0); points.len()];
        let mut filled = vec![false; points.len()];
        let mine = nfft_adjoint(coeffs, &subcells[0].points, cfg)?;
        for (&gi, v) in subcells[0].indices.iter().zip(mine.values()) {
            out[gi] = *v;
            filled[gi] = true;
        }
        for i in 1..topo.num_nodes() {
            match topo.recv(i)? {
                Message::PointResults { entries } => {
                    if entries.len() != subcells[i].len() {
                        return Err(Error::Protocol(format!(
                            "rank {i} returned {} results for {} points",
                            entries.len(),
                            subcells[i].len()
                        )));
                    }
                    for (idx, v) in entries {
                        let gi = idx as usize;
                        if gi >= out.len() || filled[gi] {
                            return Err(Error::Protocol(format!("duplicate or out-of-range result index {idx}")));
                        }
                        out[gi] = v;
                        filled[gi] = true;
                    }
                }
                other => {
                    return Err(Error::Protocol(format!(
                        "expected point results, got {}",
                        message_name(&other)
                    )))
                }
            }
        }
        debug_assert!(filled.iter().all(|&f| f));
        Ok(Some(SampleValues::new(out)))
    } else {
        check_config(topo.recv(0)?, cfg)?;
        let coeffs = coeff_from_message(topo.recv(0)?, cfg.index_set())?;
        let (points, index_values) = subcell_from_message(topo.recv(0)?, cfg)?;
        let indices = decode_global_indices(&index_values, usize::MAX)?;
        let values = nfft_adjoint(&coeffs, &points, cfg)?;
        let entries = indices
            .into_iter()
            .map(|i| i as u64)
            .zip(values.into_values())
            .collect();
        topo.send(0, Message::PointResults { entries })?;
        Ok(None)
    }
}

/// Worker loop for externally launched ranks: serves forward/adjoint
/// collectives initiated by rank 0 (adopting the broadcast configuration)
/// until a shutdown message arrives.
pub fn serve(topo: &mut Topology) -> Result<()> {
    if topo.rank() == 0 {
        return Err(Error::InvalidTopology("rank 0 initiates collectives, it does not serve".into()));
    }
    loop {
        let cfg = match topo.recv(0)? {
            Message::Shutdown => return Ok(()),
            Message::Config { kind, sigma, m, dims } => {
                let dims_usize: Vec<usize> = dims.iter().map(|&n| n as usize).collect();
                NfftConfig::new(&dims_usize, kind, sigma, m as usize)
                    .map_err(|e| Error::Protocol(format!("bad broadcast configuration: {e}")))?
            }
            other => return Err(Error::Protocol(format!("expected configuration, got {}", message_name(&other)))),
        };
        // The message after the configuration tells the direction apart:
        // forward scatters the subcell next, adjoint broadcasts coefficients.
        match topo.recv(0)? {
            msg @ Message::SubcellAssign { .. } => {
                let (points, values) = subcell_from_message(msg, &cfg)?;
                let partial = nfft_forward(&points, &SampleValues::new(values), &cfg)?;
                tree_reduce_sum(partial, topo)?;
            }
            msg @ Message::CoeffArray { .. } => {
                let coeffs = coeff_from_message(msg, cfg.index_set())?;
                let (points, index_values) = subcell_from_message(topo.recv(0)?, &cfg)?;
                let indices = decode_global_indices(&index_values, usize::MAX)?;
                let values = nfft_adjoint(&coeffs, &points, &cfg)?;
                let entries = indices
                    .into_iter()
                    .map(|i| i as u64)
                    .zip(values.into_values())
                    .collect();
                topo.send(0, Message::PointResults { entries })?;
            }
            other => {
                return Err(Error::Protocol(format!(
                    "expected subcell or coefficients, got {}",
                    message_name(&other)
                )))
            }
        }
    }
}

/// Sent by rank 0 to terminate every serving worker.
pub fn shutdown_workers(topo: &mut Topology) -> Result<()> {
    if topo.rank() != 0 {
        return Err(Error::InvalidTopology("only rank 0 shuts the cluster down".into()));
    }
    for i in 1..topo.num_nodes() {
        topo.send(i, Message::Shutdown)?;
    }
    Ok(())
}
