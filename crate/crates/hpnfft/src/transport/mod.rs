//! Rank-addressed message transport used by the decomposition layer.
//!
//! Two implementations are provided: an in-process mesh of queue pairs (the
//! default for tests and the in-process runner) and a TCP mesh speaking the
//! binary wire format from [`wire`]. Messages between a fixed (sender,
//! receiver) pair are delivered in order; an endpoint is driven by one rank
//! at a time.

pub mod inproc;
pub mod tcp;
pub mod wire;

use num_complex::Complex64;

use crate::error::Result;
use crate::window::WindowKind;

pub use inproc::{in_process_mesh, ClusterStats, InProcessTransport};
pub use tcp::{tcp_join, TcpHostBinding, TcpTransport};

/// Data-plane messages exchanged by the decomposition protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum Message {
    /// A subcell of the global point set: flat row-major coordinates plus one
    /// complex value per point. The forward scatter carries sample values;
    /// the adjoint scatter reuses the value slot for each point's global
    /// index (stored in the real part).
    SubcellAssign { dim: u32, coords: Vec<f64>, values: Vec<Complex64> },
    /// A coefficient array over a frequency index set, in enumeration order.
    CoeffArray { dims: Vec<u32>, values: Vec<Complex64> },
    /// Per-point transform results keyed by global point index.
    PointResults { entries: Vec<(u64, Complex64)> },
    /// Transform configuration broadcast by rank 0.
    Config { kind: WindowKind, sigma: f64, m: u32, dims: Vec<u32> },
    /// Ends a worker's serve loop.
    Shutdown,
}

/// A rank-addressed, in-order, blocking message channel.
pub trait Transport: Send {
    fn send(&mut self, to: usize, msg: Message) -> Result<()>;
    fn recv(&mut self, from: usize) -> Result<Message>;
}
