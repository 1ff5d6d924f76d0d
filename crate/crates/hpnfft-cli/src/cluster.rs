//! Runs a closure at rank 0 of a P-rank cluster, with the other ranks
//! serving collectives: either threads over the in-process transport or
//! spawned worker processes over TCP.

use std::process::{Child, Command, Stdio};

use hpnfft::decomp::{in_process_topologies, serve, shutdown_workers, Topology};
use hpnfft::transport::TcpHostBinding;
use hpnfft::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransportChoice {
    InProc,
    Tcp,
}

impl std::str::FromStr for TransportChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "inproc" => Ok(TransportChoice::InProc),
            "tcp" => Ok(TransportChoice::Tcp),
            other => Err(format!("unknown transport {other:?} (expected inproc or tcp)")),
        }
    }
}

/// Drives `f` at rank 0 with `num_nodes - 1` in-process serving ranks.
pub fn with_inproc_cluster<T: Send>(
    num_nodes: usize,
    f: impl FnOnce(&mut Topology) -> Result<T> + Send,
) -> Result<T> {
    let (mut topos, _) = in_process_topologies(num_nodes)?;
    let workers: Vec<Topology> = topos.drain(1..).collect();
    let mut root = topos.pop().expect("rank 0 exists");

    std::thread::scope(|scope| {
        let handles: Vec<_> = workers
            .into_iter()
            .map(|mut topo| scope.spawn(move || serve(&mut topo)))
            .collect();
        let result = f(&mut root);
        // Release the workers even if rank 0 failed mid-collective; a dead
        // mesh just surfaces as worker errors we ignore on the error path.
        let _ = shutdown_workers(&mut root);
        for h in handles {
            match h.join() {
                Ok(Ok(())) => {}
                Ok(Err(e)) => {
                    if result.is_ok() {
                        return Err(e);
                    }
                }
                Err(_) => {
                    return Err(Error::Protocol("worker thread panicked".into()));
                }
            }
        }
        result
    })
}

/// Drives `f` at rank 0 of a TCP mesh, spawning `num_nodes - 1` copies of
/// this executable in worker mode.
pub fn with_tcp_cluster<T: Send>(
    listen: &str,
    num_nodes: usize,
    f: impl FnOnce(&mut Topology) -> Result<T> + Send,
) -> Result<T> {
    let binding = TcpHostBinding::bind(listen)?;
    let addr = binding.local_addr()?.to_string();

    let exe = std::env::current_exe()
        .map_err(|e| Error::Resource(format!("locating worker executable: {e}")))?;
    let mut children: Vec<Child> = Vec::new();
    for _ in 1..num_nodes {
        let child = Command::new(&exe)
            .args(["worker", "--connect", &addr])
            .stdin(Stdio::null())
            .spawn()
            .map_err(|e| Error::Resource(format!("spawning worker: {e}")))?;
        children.push(child);
    }

    let run = || -> Result<T> {
        let transport = binding.establish(num_nodes)?;
        let mut root = Topology::new(num_nodes, 0, Box::new(transport))?;
        let result = f(&mut root);
        let _ = shutdown_workers(&mut root);
        result
    };
    let result = run();

    for mut child in children {
        if result.is_err() {
            let _ = child.kill();
        }
        let _ = child.wait();
    }
    result
}

pub fn with_cluster<T: Send>(
    transport: TransportChoice,
    listen: &str,
    num_nodes: usize,
    f: impl FnOnce(&mut Topology) -> Result<T> + Send,
) -> Result<T> {
    match transport {
        TransportChoice::InProc => with_inproc_cluster(num_nodes, f),
        TransportChoice::Tcp => with_tcp_cluster(listen, num_nodes, f),
    }
}
