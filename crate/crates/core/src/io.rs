//! Field snapshot serialization.
//!
//! Binary layout (all little-endian): `u32 dim`, `u32 cells[dim]`,
//! `f64 extents[dim]`, `u32 topology[dim]` (0 = periodic, 1 = neumann),
//! then the row-major `f64` payload. The CSV form lists the per-axis cell
//! indices followed by the value.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::grid::{GridSpec, ScalarField, Topology};
use crate::report::fmt_float;
use crate::{Error, Result};

pub fn write_field_binary(path: &Path, field: &ScalarField) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let grid = field.grid();
    let dim = grid.dim() as u32;
    w.write_all(&dim.to_le_bytes())?;
    for &n in grid.cells() {
        w.write_all(&(n as u32).to_le_bytes())?;
    }
    for &l in grid.extents() {
        w.write_all(&l.to_le_bytes())?;
    }
    for &t in grid.topology() {
        let flag: u32 = match t {
            Topology::Periodic => 0,
            Topology::Neumann => 1,
        };
        w.write_all(&flag.to_le_bytes())?;
    }
    for &v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_field_binary(path: &Path) -> Result<ScalarField> {
    let mut r = BufReader::new(File::open(path)?);
    let dim = read_u32(&mut r)? as usize;
    if !(1..=3).contains(&dim) {
        return Err(Error::Format(format!("dim {dim} out of range")));
    }
    let mut cells = Vec::with_capacity(dim);
    for _ in 0..dim {
        cells.push(read_u32(&mut r)? as usize);
    }
    let mut extents = Vec::with_capacity(dim);
    for _ in 0..dim {
        extents.push(read_f64(&mut r)?);
    }
    let mut topology = Vec::with_capacity(dim);
    for _ in 0..dim {
        topology.push(match read_u32(&mut r)? {
            0 => Topology::Periodic,
            1 => Topology::Neumann,
            other => return Err(Error::Format(format!("topology flag {other}"))),
        });
    }
    let grid = GridSpec::new(&extents, &cells, &topology)?;
    let total = grid.total_cells();
    let mut values = Vec::with_capacity(total);
    for _ in 0..total {
        values.push(read_f64(&mut r)?);
    }
    let mut probe = [0u8; 1];
    if r.read(&mut probe)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    ScalarField::from_values(&grid, values)
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut buf = [0u8; 8];
    r.read_exact(&mut buf)?;
    Ok(f64::from_le_bytes(buf))
}

/// Index columns then value, one row per cell.
pub fn field_to_csv(field: &ScalarField) -> String {
    let grid = field.grid();
    let dim = grid.dim();
    let mut out = String::new();
    for a in 0..dim {
        out.push_str(&format!("i{a},"));
    }
    out.push_str("value\n");
    for (idx, v) in field.values().iter().enumerate() {
        let c = grid.coords_of(idx);
        for cc in c.iter().take(dim) {
            out.push_str(&format!("{cc},"));
        }
        out.push_str(&fmt_float(*v));
        out.push('\n');
    }
    out
}
