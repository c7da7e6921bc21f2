//! TFG binary grid files.
//!
//! Layout: magic bytes `TFG1`; a little-endian u32 header length; a UTF-8
//! JSON header `{"nx","ny","origin_x","origin_y","dx","dy","kind"}` with
//! `kind` one of `"complex" | "real" | "bool"`; then the payload.
//! Complex and real payloads are little-endian f64, row-major, complex
//! interleaved re,im; bool payloads are one byte per cell (0/1).

use crate::error::{Error, Result};
use crate::grid::{DomainMask, Lattice, RealGrid, TFGrid};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"TFG1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    nx: usize,
    ny: usize,
    origin_x: f64,
    origin_y: f64,
    dx: f64,
    dy: f64,
    kind: String,
}

impl Header {
    fn from_lattice(l: &Lattice, kind: &str) -> Self {
        Header {
            nx: l.nx,
            ny: l.ny,
            origin_x: l.origin_x,
            origin_y: l.origin_y,
            dx: l.dx,
            dy: l.dy,
            kind: kind.to_string(),
        }
    }
    fn lattice(&self) -> Result<Lattice> {
        Lattice::new(self.origin_x, self.origin_y, self.dx, self.dy, self.nx, self.ny)
    }
}

fn write_preamble<W: Write>(w: &mut W, l: &Lattice, kind: &str) -> Result<()> {
    let header = serde_json::to_vec(&Header::from_lattice(l, kind))
        .map_err(|e| Error::format(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    Ok(())
}

fn read_preamble<R: Read>(r: &mut R) -> Result<Header> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::format("bad magic bytes, not a TFG file"));
    }
    let mut lenb = [0u8; 4];
    r.read_exact(&mut lenb)?;
    let len = u32::from_le_bytes(lenb) as usize;
    if len > 1 << 20 {
        return Err(Error::format("unreasonable header length"));
    }
    let mut hb = vec![0u8; len];
    r.read_exact(&mut hb)?;
    serde_json::from_slice(&hb).map_err(|e| Error::format(format!("bad header: {e}")))
}

pub fn write_complex<W: Write>(w: &mut W, g: &TFGrid) -> Result<()> {
    write_preamble(w, g.lattice(), "complex")?;
    let mut buf = Vec::with_capacity(g.values().len() * 16);
    for v in g.values() {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_real<W: Write>(w: &mut W, g: &RealGrid) -> Result<()> {
    write_preamble(w, g.lattice(), "real")?;
    let mut buf = Vec::with_capacity(g.values().len() * 8);
    for v in g.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_mask<W: Write>(w: &mut W, m: &DomainMask) -> Result<()> {
    write_preamble(w, m.lattice(), "bool")?;
    let buf: Vec<u8> = m.cells().iter().map(|&c| c as u8).collect();
    w.write_all(&buf)?;
    Ok(())
}

fn read_f64s<R: Read>(r: &mut R, n: usize) -> Result<Vec<f64>> {
    let mut buf = vec![0u8; n * 8];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

pub fn read_complex<R: Read>(r: &mut R) -> Result<TFGrid> {
    let h = read_preamble(r)?;
    if h.kind != "complex" {
        return Err(Error::format(format!("expected complex grid, found {}", h.kind)));
    }
    let l = h.lattice()?;
    let raw = read_f64s(r, l.len() * 2)?;
    let values = raw
        .chunks_exact(2)
        .map(|c| Complex64::new(c[0], c[1]))
        .collect();
    TFGrid::new(l, values)
}

pub fn read_real<R: Read>(r: &mut R) -> Result<RealGrid> {
    let h = read_preamble(r)?;
    if h.kind != "real" {
        return Err(Error::format(format!("expected real grid, found {}", h.kind)));
    }
    let l = h.lattice()?;
    let values = read_f64s(r, l.len())?;
    RealGrid::new(l, values)
}

pub fn read_mask<R: Read>(r: &mut R) -> Result<DomainMask> {
    let h = read_preamble(r)?;
    if h.kind != "bool" {
        return Err(Error::format(format!("expected bool grid, found {}", h.kind)));
    }
    let l = h.lattice()?;
    let mut buf = vec![0u8; l.len()];
    r.read_exact(&mut buf)?;
    let cells = buf.iter().map(|&b| b != 0).collect();
    DomainMask::new(l, cells)
}

pub fn save_complex(path: impl AsRef<Path>, g: &TFGrid) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_complex(&mut f, g)
}
pub fn save_real(path: impl AsRef<Path>, g: &RealGrid) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_real(&mut f, g)
}
pub fn save_mask(path: impl AsRef<Path>, m: &DomainMask) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_mask(&mut f, m)
}
pub fn load_complex(path: impl AsRef<Path>) -> Result<TFGrid> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_complex(&mut f)
}
pub fn load_real(path: impl AsRef<Path>) -> Result<RealGrid> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_real(&mut f)
}
pub fn load_mask(path: impl AsRef<Path>) -> Result<DomainMask> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_mask(&mut f)
}

/// Sniff the kind of a TFG file without reading the payload.
pub fn peek_kind(path: impl AsRef<Path>) -> Result<String> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    Ok(read_preamble(&mut f)?.kind)
}
