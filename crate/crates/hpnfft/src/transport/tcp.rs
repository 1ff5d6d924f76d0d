//! Multi-process transport over stream sockets.
//!
//! The mesh is bootstrapped through rank 0: every worker binds its own
//! listener, dials rank 0 and announces its address (`JOIN`), rank 0 assigns
//! ranks in arrival order and broadcasts the roster, and then each pair of
//! workers connects directly (the higher rank dials the lower one and
//! identifies itself with `PEER_HELLO`). After establishment every rank holds
//! one socket per peer and frames flow as defined in [`wire`].

use std::io::{Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::time::Duration;

use crate::error::{Error, Result};
use crate::transport::{wire, Message, Transport};

/// Read timeout on established data sockets; a silent peer past this is
/// reported dead rather than hanging the collective forever.
const DATA_TIMEOUT: Duration = Duration::from_secs(300);

fn comm(peer: usize, err: impl std::fmt::Display) -> Error {
    Error::Communication { peer, reason: err.to_string() }
}

/// One rank's endpoint of an established TCP mesh.
pub struct TcpTransport {
    rank: usize,
    num_nodes: usize,
    streams: Vec<Option<TcpStream>>,
}

impl TcpTransport {
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    fn stream_mut(&mut self, peer: usize) -> Result<&mut TcpStream> {
        if peer == self.rank || peer >= self.num_nodes {
            return Err(Error::Protocol(format!(
                "rank {} has no channel to rank {peer}",
                self.rank
            )));
        }
        self.streams[peer]
            .as_mut()
            .ok_or_else(|| comm(peer, "connection not established"))
    }
}

impl Transport for TcpTransport {
    fn send(&mut self, to: usize, msg: Message) -> Result<()> {
        let stream = self.stream_mut(to)?;
        let (msg_type, payload) = wire::encode_payload(&msg);
        wire::write_frame(stream, msg_type, &payload).map_err(|e| comm(to, e))
    }

    fn recv(&mut self, from: usize) -> Result<Message> {
        let stream = self.stream_mut(from)?;
        let (msg_type, payload) = wire::read_frame(stream).map_err(|e| comm(from, e))??;
        wire::decode_payload(msg_type, &payload)
    }
}

fn write_join<W: Write>(w: &mut W, addr: &str) -> std::io::Result<()> {
    let mut p = wire::PayloadWriter::new();
    push_string(&mut p, addr);
    wire::write_frame(w, wire::MSG_JOIN, &p.finish())
}

fn write_roster<W: Write>(w: &mut W, your_rank: usize, addrs: &[String]) -> std::io::Result<()> {
    let mut p = wire::PayloadWriter::new();
    p.u32(addrs.len() as u32);
    p.u32(your_rank as u32);
    for a in addrs {
        push_string(&mut p, a);
    }
    wire::write_frame(w, wire::MSG_ROSTER, &p.finish())
}

fn write_peer_hello<W: Write>(w: &mut W, rank: usize) -> std::io::Result<()> {
    let mut p = wire::PayloadWriter::new();
    p.u32(rank as u32);
    wire::write_frame(w, wire::MSG_PEER_HELLO, &p.finish())
}

fn push_string(p: &mut wire::PayloadWriter, s: &str) {
    let bytes = s.as_bytes();
    p.u32(bytes.len() as u32);
    p.bytes(bytes);
}

fn read_string(r: &mut wire::PayloadReader<'_>) -> Result<String> {
    let len = r.u32("string length")? as usize;
    if len > 4096 {
        return Err(Error::Format { offset: r.offset(), reason: format!("implausible string length {len}") });
    }
    let mut bytes = Vec::with_capacity(len);
    for _ in 0..len {
        bytes.push(r.u8("string byte")?);
    }
    String::from_utf8(bytes).map_err(|e| Error::Format { offset: 0, reason: format!("bad utf-8: {e}") })
}

fn expect_frame<R: Read>(stream: &mut R, expected: u16, peer: usize) -> Result<Vec<u8>> {
    let (msg_type, payload) = wire::read_frame(stream).map_err(|e| comm(peer, e))??;
    if msg_type != expected {
        return Err(Error::Protocol(format!(
            "expected bootstrap frame {expected}, got {msg_type}"
        )));
    }
    Ok(payload)
}

/// Rank 0's side of mesh establishment: bind first (so workers can be
/// launched against the bound address), then accept the joins.
pub struct TcpHostBinding {
    listener: TcpListener,
}

impl TcpHostBinding {
    pub fn bind(addr: &str) -> Result<Self> {
        let listener = TcpListener::bind(addr)
            .map_err(|e| comm(0, format!("bind {addr}: {e}")))?;
        Ok(Self { listener })
    }

    pub fn local_addr(&self) -> Result<SocketAddr> {
        self.listener.local_addr().map_err(|e| comm(0, e))
    }

    /// Accepts `num_nodes - 1` joining workers, assigns ranks in arrival
    /// order, and broadcasts the roster. Returns rank 0's endpoint.
    pub fn establish(self, num_nodes: usize) -> Result<TcpTransport> {
        if num_nodes < 1 {
            return Err(Error::InvalidTopology("at least one node required".into()));
        }
        let mut streams: Vec<Option<TcpStream>> = (0..num_nodes).map(|_| None).collect();
        let mut addrs = vec![String::new(); num_nodes];
        addrs[0] = self.local_addr()?.to_string();

        for rank in 1..num_nodes {
            let (mut stream, _) = self.listener.accept().map_err(|e| comm(rank, e))?;
            stream.set_nodelay(true).ok();
            let payload = expect_frame(&mut stream, wire::MSG_JOIN, rank)?;
            let mut r = wire::PayloadReader::new(&payload);
            addrs[rank] = read_string(&mut r)?;
            r.expect_end()?;
            streams[rank] = Some(stream);
        }
        for rank in 1..num_nodes {
            let stream = streams[rank].as_mut().unwrap();
            write_roster(stream, rank, &addrs).map_err(|e| comm(rank, e))?;
            stream.set_read_timeout(Some(DATA_TIMEOUT)).ok();
        }
        Ok(TcpTransport { rank: 0, num_nodes, streams })
    }
}

/// A worker's side of mesh establishment. Dials the host, announces its own
/// listener, then connects with every lower-ranked worker and waits for the
/// higher-ranked ones. Returns the endpoint together with the assigned rank
/// and the cluster size.
pub fn tcp_join(host_addr: &str) -> Result<(TcpTransport, usize, usize)> {
    let listener = TcpListener::bind(("0.0.0.0", 0)).map_err(|e| comm(0, e))?;
    let mut host = TcpStream::connect(host_addr)
        .map_err(|e| comm(0, format!("connect {host_addr}: {e}")))?;
    host.set_nodelay(true).ok();

    let advertised = format!(
        "{}:{}",
        host.local_addr().map_err(|e| comm(0, e))?.ip(),
        listener.local_addr().map_err(|e| comm(0, e))?.port()
    );
    write_join(&mut host, &advertised).map_err(|e| comm(0, e))?;

    let payload = expect_frame(&mut host, wire::MSG_ROSTER, 0)?;
    let mut r = wire::PayloadReader::new(&payload);
    let num_nodes = r.u32("roster size")? as usize;
    let my_rank = r.u32("assigned rank")? as usize;
    if my_rank == 0 || my_rank >= num_nodes {
        return Err(Error::Protocol(format!("implausible assigned rank {my_rank}/{num_nodes}")));
    }
    let mut addrs = Vec::with_capacity(num_nodes);
    for _ in 0..num_nodes {
        addrs.push(read_string(&mut r)?);
    }
    r.expect_end()?;

    let mut streams: Vec<Option<TcpStream>> = (0..num_nodes).map(|_| None).collect();
    host.set_read_timeout(Some(DATA_TIMEOUT)).ok();
    streams[0] = Some(host);

    // Dial every lower-ranked worker.
    for peer in 1..my_rank {
        let mut s = TcpStream::connect(&addrs[peer]).map_err(|e| comm(peer, e))?;
        s.set_nodelay(true).ok();
        write_peer_hello(&mut s, my_rank).map_err(|e| comm(peer, e))?;
        s.set_read_timeout(Some(DATA_TIMEOUT)).ok();
        streams[peer] = Some(s);
    }
    // Accept every higher-ranked worker.
    for _ in my_rank + 1..num_nodes {
        let (mut s, _) = listener.accept().map_err(|e| comm(0, e))?;
        s.set_nodelay(true).ok();
        let payload = expect_frame(&mut s, wire::MSG_PEER_HELLO, 0)?;
        let mut pr = wire::PayloadReader::new(&payload);
        let peer = pr.u32("peer rank")? as usize;
        pr.expect_end()?;
        if peer <= my_rank || peer >= num_nodes || streams[peer].is_some() {
            return Err(Error::Protocol(format!("unexpected peer hello from rank {peer}")));
        }
        s.set_read_timeout(Some(DATA_TIMEOUT)).ok();
        streams[peer] = Some(s);
    }

    Ok((TcpTransport { rank: my_rank, num_nodes, streams }, my_rank, num_nodes))
}
