//! In-process transport: P logical ranks exchanging typed messages through
//! queue pairs, one pair per ordered (sender, receiver) combination.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{channel, Receiver, Sender};
use std::sync::Arc;
use std::time::Duration;

use crate::error::{Error, Result};
use crate::transport::{Message, Transport};

/// How long a blocking receive waits before reporting the peer dead. The
/// collectives exchange messages promptly; a minute means a wedged peer.
const RECV_TIMEOUT: Duration = Duration::from_secs(60);

/// Shared counters for one mesh, used by tests to assert message complexity.
#[derive(Debug, Clone)]
pub struct ClusterStats {
    sends: Arc<AtomicUsize>,
    recvs: Arc<Vec<AtomicUsize>>,
}

impl ClusterStats {
    pub fn total_sends(&self) -> usize {
        self.sends.load(Ordering::SeqCst)
    }

    /// Messages received so far by `rank`.
    pub fn recv_count(&self, rank: usize) -> usize {
        self.recvs[rank].load(Ordering::SeqCst)
    }

    pub fn reset(&self) {
        self.sends.store(0, Ordering::SeqCst);
        for r in self.recvs.iter() {
            r.store(0, Ordering::SeqCst);
        }
    }
}

/// One rank's endpoint of an in-process mesh.
pub struct InProcessTransport {
    rank: usize,
    senders: Vec<Option<Sender<Message>>>,
    receivers: Vec<Option<Receiver<Message>>>,
    stats: ClusterStats,
}

/// Builds a fully connected mesh of `num_nodes` endpoints.
pub fn in_process_mesh(num_nodes: usize) -> (Vec<InProcessTransport>, ClusterStats) {
    assert!(num_nodes >= 1);
    let stats = ClusterStats {
        sends: Arc::new(AtomicUsize::new(0)),
        recvs: Arc::new((0..num_nodes).map(|_| AtomicUsize::new(0)).collect()),
    };

    // channels[s][r] carries messages s → r.
    let mut tx: Vec<Vec<Option<Sender<Message>>>> = (0..num_nodes)
        .map(|_| (0..num_nodes).map(|_| None).collect())
        .collect();
    let mut rx: Vec<Vec<Option<Receiver<Message>>>> = (0..num_nodes)
        .map(|_| (0..num_nodes).map(|_| None).collect())
        .collect();
    for s in 0..num_nodes {
        for r in 0..num_nodes {
            if s == r {
                continue;
            }
            let (send, recv) = channel();
            tx[s][r] = Some(send);
            rx[s][r] = Some(recv);
        }
    }

    let mut endpoints = Vec::with_capacity(num_nodes);
    // Receivers for rank r are the r-th column of rx.
    let mut rx_cols: Vec<Vec<Option<Receiver<Message>>>> =
        (0..num_nodes).map(|_| Vec::with_capacity(num_nodes)).collect();
    for row in rx {
        for (r, cell) in row.into_iter().enumerate() {
            rx_cols[r].push(cell);
        }
    }
    for (rank, (senders, receivers)) in tx.into_iter().zip(rx_cols).enumerate() {
        endpoints.push(InProcessTransport { rank, senders, receivers, stats: stats.clone() });
    }
    (endpoints, stats)
}

impl Transport for InProcessTransport {
    fn send(&mut self, to: usize, msg: Message) -> Result<()> {
        if to == self.rank || to >= self.senders.len() {
            return Err(Error::Protocol(format!("rank {} cannot send to rank {to}", self.rank)));
        }
        let sender = self.senders[to].as_ref().expect("mesh channel exists");
        sender.send(msg).map_err(|_| Error::Communication {
            peer: to,
            reason: "peer endpoint dropped".into(),
        })?;
        self.stats.sends.fetch_add(1, Ordering::SeqCst);
        Ok(())
    }

    fn recv(&mut self, from: usize) -> Result<Message> {
        if from == self.rank || from >= self.receivers.len() {
            return Err(Error::Protocol(format!("rank {} cannot receive from rank {from}", self.rank)));
        }
        let receiver = self.receivers[from].as_ref().expect("mesh channel exists");
        let msg = receiver.recv_timeout(RECV_TIMEOUT).map_err(|e| Error::Communication {
            peer: from,
            reason: format!("receive failed: {e}"),
        })?;
        self.stats.recvs[self.rank].fetch_add(1, Ordering::SeqCst);
        Ok(msg)
    }
}
