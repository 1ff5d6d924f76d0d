//! Binary wire format for the multi-process transport.
//!
//! Every frame is `magic "HPNF" | version u16 | msg_type u16 | payload_len
//! u64 | payload`, all integers little-endian. Data-plane payloads:
//!
//! * 1 `SUBCELL_ASSIGN` — u32 dim d, u64 count C, then C records of d×f64
//!   coordinates + 2×f64 value;
//! * 2 `COEFF_ARRAY` — u32 d, d×u32 dims, then ∏dims × 2×f64 in index-set
//!   enumeration order;
//! * 3 `POINT_RESULTS` — u64 count, then count × (u64 global index + 2×f64);
//! * 4 `CONFIG` — u8 window kind, f64 sigma, u32 m, u32 d, d×u32 dims;
//! * 5 `SHUTDOWN` — empty.
//!
//! Types 6–8 are connection-bootstrap frames used only while the TCP mesh is
//! being established (join, roster, peer hello).

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::transport::Message;
use crate::window::WindowKind;

pub const MAGIC: [u8; 4] = *b"HPNF";
pub const VERSION: u16 = 1;

pub const MSG_SUBCELL_ASSIGN: u16 = 1;
pub const MSG_COEFF_ARRAY: u16 = 2;
pub const MSG_POINT_RESULTS: u16 = 3;
pub const MSG_CONFIG: u16 = 4;
pub const MSG_SHUTDOWN: u16 = 5;
pub const MSG_JOIN: u16 = 6;
pub const MSG_ROSTER: u16 = 7;
pub const MSG_PEER_HELLO: u16 = 8;

const HEADER_LEN: usize = 4 + 2 + 2 + 8;
/// Upper bound on a single payload; anything larger is a corrupt length.
const MAX_PAYLOAD: u64 = 1 << 34;

/// Little-endian payload writer.
#[derive(Default)]
pub struct PayloadWriter(Vec<u8>);

impl PayloadWriter {
    pub fn new() -> Self {
        Self(Vec::new())
    }

    pub fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    pub fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    pub fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    pub fn f64(&mut self, v: f64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    pub fn bytes(&mut self, v: &[u8]) {
        self.0.extend_from_slice(v);
    }

    pub fn finish(self) -> Vec<u8> {
        self.0
    }
}

/// Little-endian payload reader tracking its byte offset for error reports.
pub struct PayloadReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> PayloadReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Format {
                offset: self.pos as u64,
                reason: format!("payload truncated while reading {what}"),
            });
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    pub fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    pub fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    pub fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    pub fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    pub fn offset(&self) -> u64 {
        self.pos as u64
    }

    pub fn expect_end(&self) -> Result<()> {
        if self.pos != self.buf.len() {
            return Err(Error::Format {
                offset: self.pos as u64,
                reason: format!("{} unexpected trailing bytes", self.buf.len() - self.pos),
            });
        }
        Ok(())
    }
}

/// Serializes a data-plane message into `(msg_type, payload)`.
pub fn encode_payload(msg: &Message) -> (u16, Vec<u8>) {
    let mut w = PayloadWriter::new();
    match msg {
        Message::SubcellAssign { dim, coords, values } => {
            w.u32(*dim);
            w.u64(values.len() as u64);
            let d = *dim as usize;
            for (j, v) in values.iter().enumerate() {
                for t in 0..d {
                    w.f64(coords[j * d + t]);
                }
                w.f64(v.re);
                w.f64(v.im);
            }
            (MSG_SUBCELL_ASSIGN, w.finish())
        }
        Message::CoeffArray { dims, values } => {
            w.u32(dims.len() as u32);
            for &n in dims {
                w.u32(n);
            }
            for v in values {
                w.f64(v.re);
                w.f64(v.im);
            }
            (MSG_COEFF_ARRAY, w.finish())
        }
        Message::PointResults { entries } => {
            w.u64(entries.len() as u64);
            for (idx, v) in entries {
                w.u64(*idx);
                w.f64(v.re);
                w.f64(v.im);
            }
            (MSG_POINT_RESULTS, w.finish())
        }
        Message::Config { kind, sigma, m, dims } => {
            w.u8(kind.wire_code());
            w.f64(*sigma);
            w.u32(*m);
            w.u32(dims.len() as u32);
            for &n in dims {
                w.u32(n);
            }
            (MSG_CONFIG, w.finish())
        }
        Message::Shutdown => (MSG_SHUTDOWN, Vec::new()),
    }
}

/// Parses a data-plane payload. Bootstrap frame types are rejected here;
/// they never cross the `Transport` API.
pub fn decode_payload(msg_type: u16, payload: &[u8]) -> Result<Message> {
    let mut r = PayloadReader::new(payload);
    let msg = match msg_type {
        MSG_SUBCELL_ASSIGN => {
            let dim = r.u32("subcell dim")?;
            if dim == 0 || dim > 16 {
                return Err(Error::Format { offset: 0, reason: format!("implausible subcell dim {dim}") });
            }
            let count = r.u64("subcell count")? as usize;
            let d = dim as usize;
            let mut coords = Vec::with_capacity(count * d);
            let mut values = Vec::with_capacity(count);
            for _ in 0..count {
                for _ in 0..d {
                    coords.push(r.f64("subcell coordinate")?);
                }
                let re = r.f64("subcell value re")?;
                let im = r.f64("subcell value im")?;
                values.push(Complex64::new(re, im));
            }
            Message::SubcellAssign { dim, coords, values }
        }
        MSG_COEFF_ARRAY => {
            let d = r.u32("coeff dim count")? as usize;
            if d == 0 || d > 16 {
                return Err(Error::Format { offset: 0, reason: format!("implausible coeff dim count {d}") });
            }
            let mut dims = Vec::with_capacity(d);
            for _ in 0..d {
                dims.push(r.u32("coeff dim")?);
            }
            let mut total = 1usize;
            for &n in &dims {
                total = total.checked_mul(n as usize).ok_or(Error::Format {
                    offset: r.offset(),
                    reason: "coefficient count overflows".into(),
                })?;
            }
            let mut values = Vec::with_capacity(total);
            for _ in 0..total {
                let re = r.f64("coefficient re")?;
                let im = r.f64("coefficient im")?;
                values.push(Complex64::new(re, im));
            }
            Message::CoeffArray { dims, values }
        }
        MSG_POINT_RESULTS => {
            let count = r.u64("result count")? as usize;
            let mut entries = Vec::with_capacity(count);
            for _ in 0..count {
                let idx = r.u64("result index")?;
                let re = r.f64("result re")?;
                let im = r.f64("result im")?;
                entries.push((idx, Complex64::new(re, im)));
            }
            Message::PointResults { entries }
        }
        MSG_CONFIG => {
            let code = r.u8("window kind")?;
            let kind = WindowKind::from_wire_code(code).ok_or(Error::Format {
                offset: 0,
                reason: format!("unknown window kind code {code}"),
            })?;
            let sigma = r.f64("sigma")?;
            let m = r.u32("cut-off")?;
            let d = r.u32("dim count")? as usize;
            if d == 0 || d > 16 {
                return Err(Error::Format { offset: r.offset(), reason: format!("implausible dim count {d}") });
            }
            let mut dims = Vec::with_capacity(d);
            for _ in 0..d {
                dims.push(r.u32("bandwidth dim")?);
            }
            Message::Config { kind, sigma, m, dims }
        }
        MSG_SHUTDOWN => Message::Shutdown,
        other => {
            return Err(Error::Protocol(format!("unknown message type {other}")));
        }
    };
    r.expect_end()?;
    Ok(msg)
}

/// Writes one frame (header + payload).
pub fn write_frame<W: Write>(w: &mut W, msg_type: u16, payload: &[u8]) -> std::io::Result<()> {
    let mut header = [0u8; HEADER_LEN];
    header[..4].copy_from_slice(&MAGIC);
    header[4..6].copy_from_slice(&VERSION.to_le_bytes());
    header[6..8].copy_from_slice(&msg_type.to_le_bytes());
    header[8..16].copy_from_slice(&(payload.len() as u64).to_le_bytes());
    w.write_all(&header)?;
    w.write_all(payload)?;
    w.flush()
}

/// Reads one frame header + payload. Unknown magic or version is a protocol
/// error, transport failures surface as `io::Error`.
pub fn read_frame<R: Read>(r: &mut R) -> std::io::Result<Result<(u16, Vec<u8>)>> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Ok(Err(Error::Protocol(format!(
            "bad frame magic {:02x?}, expected {:02x?}",
            &header[..4],
            MAGIC
        ))));
    }
    let version = u16::from_le_bytes(header[4..6].try_into().unwrap());
    if version != VERSION {
        return Ok(Err(Error::Protocol(format!("unsupported protocol version {version}"))));
    }
    let msg_type = u16::from_le_bytes(header[6..8].try_into().unwrap());
    let payload_len = u64::from_le_bytes(header[8..16].try_into().unwrap());
    if payload_len > MAX_PAYLOAD {
        return Ok(Err(Error::Format {
            offset: 8,
            reason: format!("payload length {payload_len} exceeds limit"),
        }));
    }
    let mut payload = vec![0u8; payload_len as usize];
    r.read_exact(&mut payload)?;
    Ok(Ok((msg_type, payload)))
}

/// Serializes a full data-plane frame.
pub fn encode_message(msg: &Message) -> Vec<u8> {
    let (msg_type, payload) = encode_payload(msg);
    let mut out = Vec::with_capacity(HEADER_LEN + payload.len());
    write_frame(&mut out, msg_type, &payload).expect("writing to a Vec cannot fail");
    out
}

/// Parses a full data-plane frame from a byte slice.
pub fn decode_message(buf: &[u8]) -> Result<Message> {
    let mut cursor = std::io::Cursor::new(buf);
    let (msg_type, payload) = read_frame(&mut cursor).map_err(|e| Error::Format {
        offset: cursor_position_or_zero(&cursor),
        reason: format!("frame truncated: {e}"),
    })??;
    decode_payload(msg_type, &payload)
}

fn cursor_position_or_zero(cursor: &std::io::Cursor<&[u8]>) -> u64 {
    cursor.position()
}
