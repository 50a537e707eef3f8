//! Binary snapshot files.
//!
//! Layout, all little-endian: the magic `MHDSNAP1`; `n` and `N` as `i32`;
//! `L`, `t` and `delta` as `f64`; then `2n` coefficient arrays (u components
//! then B components), each `N^n` complex values stored as `(re, im)` pairs
//! of `f64`. Arrays are row-major with axis 0 slowest, in FFT storage order
//! (index `i` holds mode `i` for `i < N/2` and `i - N` otherwise).

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{MhdError, Result};
use crate::field::SpectralVectorField;
use crate::grid::Grid;
use crate::solver::MhdState;

pub const MAGIC: &[u8; 8] = b"MHDSNAP1";

pub fn write_snapshot(mut w: impl Write, grid: &Grid, state: &MhdState) -> Result<()> {
    state.u.check(grid)?;
    state.b.check(grid)?;
    w.write_all(MAGIC)?;
    w.write_all(&(grid.dim() as i32).to_le_bytes())?;
    w.write_all(&(grid.points() as i32).to_le_bytes())?;
    for v in [grid.length(), state.t, state.delta] {
        w.write_all(&v.to_le_bytes())?;
    }
    for field in [&state.u, &state.b] {
        for comp in field.components() {
            for c in comp {
                w.write_all(&c.re.to_le_bytes())?;
                w.write_all(&c.im.to_le_bytes())?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn read_array<const K: usize>(r: &mut (impl Read + ?Sized)) -> Result<[u8; K]> {
    let mut buf = [0u8; K];
    r.read_exact(&mut buf).map_err(|e| match e.kind() {
        std::io::ErrorKind::UnexpectedEof => MhdError::Snapshot("truncated file".into()),
        _ => MhdError::Io(e),
    })?;
    Ok(buf)
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    Ok(f64::from_le_bytes(read_array::<8>(r)?))
}

pub fn read_snapshot(mut r: impl Read) -> Result<(Grid, MhdState)> {
    let magic = read_array::<8>(&mut r)?;
    if &magic != MAGIC {
        return Err(MhdError::Snapshot("bad magic".into()));
    }
    let dim = i32::from_le_bytes(read_array::<4>(&mut r)?);
    let points = i32::from_le_bytes(read_array::<4>(&mut r)?);
    let length = read_f64(&mut r)?;
    let t = read_f64(&mut r)?;
    let delta = read_f64(&mut r)?;
    if dim < 0 || points < 0 {
        return Err(MhdError::Snapshot(format!("negative header values n = {dim}, N = {points}")));
    }
    let grid = Grid::new(dim as usize, points as usize, length)
        .map_err(|e| MhdError::Snapshot(format!("invalid grid header: {e}")))?;
    let read_field = |r: &mut dyn Read| -> Result<SpectralVectorField> {
        let mut comps = Vec::with_capacity(grid.dim());
        for _ in 0..grid.dim() {
            let mut c = Vec::with_capacity(grid.len());
            for _ in 0..grid.len() {
                let re = f64::from_le_bytes(read_array::<8>(r)?);
                let im = f64::from_le_bytes(read_array::<8>(r)?);
                c.push(Complex64::new(re, im));
            }
            comps.push(c);
        }
        Ok(SpectralVectorField::from_components(comps))
    };
    let u = read_field(&mut r)?;
    let b = read_field(&mut r)?;
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(MhdError::Snapshot("trailing bytes after coefficient arrays".into()));
    }
    Ok((grid, MhdState { t, u, b, delta }))
}

pub fn save_snapshot(path: &Path, grid: &Grid, state: &MhdState) -> Result<()> {
    write_snapshot(BufWriter::new(File::create(path)?), grid, state)
}

pub fn load_snapshot(path: &Path) -> Result<(Grid, MhdState)> {
    read_snapshot(BufReader::new(File::open(path)?))
}
