//! Binary and CSV containers for sampled fields.
//!
//! Binary layout (all little-endian): magic `LPF1`, `u32` dimension, `u32`
//! points per axis, `f64` half extent, then `(re, im)` pairs of `f64` in flat
//! index order.

use std::io::{Read, Write};

use num_complex::Complex64;

use super::{Grid, SampledField};
use crate::{LabError, Result};

pub(crate) const FIELD_MAGIC: &[u8; 4] = b"LPF1";

pub(crate) fn write_grid_header(w: &mut impl Write, grid: &Grid) -> Result<()> {
    w.write_all(&(grid.dimension() as u32).to_le_bytes())?;
    w.write_all(&(grid.points_per_axis() as u32).to_le_bytes())?;
    w.write_all(&grid.half_extent().to_le_bytes())?;
    Ok(())
}

pub(crate) fn read_grid_header(r: &mut impl Read) -> Result<Grid> {
    let dim = read_u32(r)? as usize;
    let n = read_u32(r)? as usize;
    let half = read_f64(r)?;
    Grid::new(dim, n, half).map_err(|e| LabError::Format(e.to_string()))
}

pub(crate) fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub(crate) fn read_f64(r: &mut impl Read) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}

pub(crate) fn write_values(w: &mut impl Write, values: &[Complex64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 16);
    for v in values {
        buf.extend_from_slice(&v.re.to_le_bytes());
        buf.extend_from_slice(&v.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub(crate) fn read_values(r: &mut impl Read, count: usize) -> Result<Vec<Complex64>> {
    let mut buf = vec![0u8; count * 16];
    r.read_exact(&mut buf)?;
    Ok(buf
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect())
}

pub(crate) fn expect_magic(r: &mut impl Read, magic: &[u8; 4]) -> Result<()> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    if &b != magic {
        return Err(LabError::Format(format!(
            "bad magic {:?}, expected {:?}",
            String::from_utf8_lossy(&b),
            String::from_utf8_lossy(magic)
        )));
    }
    Ok(())
}

pub fn write_field(w: &mut impl Write, f: &SampledField) -> Result<()> {
    w.write_all(FIELD_MAGIC)?;
    write_grid_header(w, f.grid())?;
    write_values(w, f.values())
}

pub fn read_field(r: &mut impl Read) -> Result<SampledField> {
    expect_magic(r, FIELD_MAGIC)?;
    let grid = read_grid_header(r)?;
    let values = read_values(r, grid.cell_count())?;
    SampledField::new(grid, values)
}

/// CSV with header `index,x,re,im` (1-D) or `index,x,y,re,im` (2-D).
pub fn write_field_csv(w: &mut impl Write, f: &SampledField) -> Result<()> {
    let g = f.grid();
    if g.dimension() == 1 {
        writeln!(w, "index,x,re,im")?;
    } else {
        writeln!(w, "index,x,y,re,im")?;
    }
    for (i, v) in f.values().iter().enumerate() {
        let p = g.point(i);
        if g.dimension() == 1 {
            writeln!(w, "{i},{},{},{}", p[0], v.re, v.im)?;
        } else {
            writeln!(w, "{i},{},{},{},{}", p[0], p[1], v.re, v.im)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = Grid::plane(8, 2.5).unwrap();
        let f = SampledField::from_fn(g, |x| Complex64::new(x[0], -x[1] * 3.0));
        let mut buf = Vec::new();
        write_field(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 4 + 4 + 4 + 8 + 64 * 16);
        let back = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn rejects_bad_magic_and_truncation() {
        let g = Grid::line(4, 1.0).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &SampledField::zeros(g)).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_field(&mut bad.as_slice()), Err(LabError::Format(_))));
        buf.truncate(buf.len() - 3);
        assert!(read_field(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::line(4, 1.0).unwrap();
        let f = SampledField::from_real(g, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &f).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "index,x,re,im");
        assert_eq!(lines[1], "0,-1,1,0");
        assert_eq!(lines.len(), 5);
    }
}
