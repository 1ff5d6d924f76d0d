//! Binary point file format: magic `NDPT` | version u16 | dim u32 |
//! count u64 | records of dim×f64 coordinates + 2×f64 value, little-endian.
//! Coordinates are validated into `[-0.5, 0.5)` on read.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use hpnfft::{Error, PointSet, Result, SampleValues};

pub const MAGIC: [u8; 4] = *b"NDPT";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: u64 = 18;

fn io_err(what: &str, e: std::io::Error) -> Error {
    Error::Resource(format!("{what}: {e}"))
}

pub fn write_points(path: &Path, points: &PointSet, values: &SampleValues) -> Result<()> {
    if points.len() != values.len() {
        return Err(Error::Shape(format!(
            "{} values for {} points",
            values.len(),
            points.len()
        )));
    }
    let file = File::create(path).map_err(|e| io_err("creating point file", e))?;
    let mut w = BufWriter::new(file);
    let mut out = Vec::with_capacity(HEADER_LEN as usize + points.len() * (points.dim() + 2) * 8);
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(points.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(points.len() as u64).to_le_bytes());
    for j in 0..points.len() {
        for &c in points.point(j) {
            out.extend_from_slice(&c.to_le_bytes());
        }
        let v = values.values()[j];
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&out).map_err(|e| io_err("writing point file", e))?;
    w.flush().map_err(|e| io_err("writing point file", e))
}

pub fn read_points(path: &Path) -> Result<(PointSet, SampleValues)> {
    let file = File::open(path).map_err(|e| io_err("opening point file", e))?;
    let mut r = BufReader::new(file);

    let mut header = [0u8; HEADER_LEN as usize];
    r.read_exact(&mut header).map_err(|_| Error::Format {
        offset: 0,
        reason: "file shorter than the 18-byte header".into(),
    })?;
    if header[..4] != MAGIC {
        return Err(Error::Format {
            offset: 0,
            reason: format!("bad magic {:02x?}, expected {:02x?}", &header[..4], MAGIC),
        });
    }
    let version = u16::from_le_bytes(header[4..6].try_into().unwrap());
    if version != VERSION {
        return Err(Error::Format { offset: 4, reason: format!("unsupported version {version}") });
    }
    let dim = u32::from_le_bytes(header[6..10].try_into().unwrap()) as usize;
    if dim == 0 || dim > 16 {
        return Err(Error::Format { offset: 6, reason: format!("implausible dimension {dim}") });
    }
    let count = u64::from_le_bytes(header[10..18].try_into().unwrap()) as usize;

    let record_len = (dim + 2) * 8;
    let mut coords = Vec::with_capacity(count * dim);
    let mut values = Vec::with_capacity(count);
    let mut record = vec![0u8; record_len];
    for j in 0..count {
        let record_offset = HEADER_LEN + (j as u64) * record_len as u64;
        r.read_exact(&mut record).map_err(|_| Error::Format {
            offset: record_offset,
            reason: format!("file truncated inside record {j}"),
        })?;
        for t in 0..dim {
            let c = f64::from_le_bytes(record[t * 8..(t + 1) * 8].try_into().unwrap());
            if !c.is_finite() || !(-0.5..0.5).contains(&c) {
                return Err(Error::Format {
                    offset: record_offset + (t as u64) * 8,
                    reason: format!("record {j} component {t} is {c}, outside [-0.5, 0.5)"),
                });
            }
            coords.push(c);
        }
        let re = f64::from_le_bytes(record[dim * 8..(dim + 1) * 8].try_into().unwrap());
        let im = f64::from_le_bytes(record[(dim + 1) * 8..(dim + 2) * 8].try_into().unwrap());
        values.push(Complex64::new(re, im));
    }
    let mut trailing = [0u8; 1];
    match r.read(&mut trailing) {
        Ok(0) => {}
        Ok(_) => {
            return Err(Error::Format {
                offset: HEADER_LEN + (count * record_len) as u64,
                reason: "trailing bytes after the last record".into(),
            })
        }
        Err(e) => return Err(io_err("reading point file", e)),
    }

    Ok((PointSet::new(dim, coords)?, SampleValues::new(values)))
}
