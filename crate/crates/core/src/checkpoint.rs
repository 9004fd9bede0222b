//! NSCF1 binary checkpoints.
//!
//! Layout (little endian): magic `NSCF1\0\0\0`; `u32 nx, ny, nz`; `f64 L, t, Ω`;
//! `u32 ncomponents`; then each component's coefficients as interleaved
//! `(re, im)` `f64` pairs in row-major FFT order.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{NscError, Result};
use crate::field::SpectralField;
use crate::grid::Grid;

pub const MAGIC: &[u8; 8] = b"NSCF1\0\0\0";
const HEADER_LEN: usize = 8 + 3 * 4 + 3 * 8 + 4;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub grid: Grid,
    pub t: f64,
    pub omega: f64,
    pub comps: Vec<SpectralField>,
}

pub fn encode(grid: &Grid, t: f64, omega: f64, comps: &[&SpectralField]) -> Result<Vec<u8>> {
    for c in comps {
        if c.grid() != grid {
            return Err(NscError::GridMismatch);
        }
    }
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| NscError::Format(format!("size {v} exceeds u32")))
    };
    let mut out = Vec::with_capacity(HEADER_LEN + comps.len() * grid.len() * 16);
    out.extend_from_slice(MAGIC);
    for n in [grid.nx, grid.ny, grid.nz] {
        out.extend_from_slice(&to_u32(n)?.to_le_bytes());
    }
    for v in [grid.box_len, t, omega] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&to_u32(comps.len())?.to_le_bytes());
    for c in comps {
        for z in c.coeffs() {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode(bytes: &[u8]) -> Result<Checkpoint> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(NscError::Format("missing NSCF1 magic".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()) as usize;
    let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let (nx, ny, nz) = (u32_at(8), u32_at(12), u32_at(16));
    let (l, t, omega) = (f64_at(20), f64_at(28), f64_at(36));
    let ncomp = u32_at(44);
    let grid = Grid::new(nx, ny, nz, l)?;
    let need = HEADER_LEN + ncomp * grid.len() * 16;
    if bytes.len() != need {
        return Err(NscError::Format(format!(
            "expected {need} bytes for {ncomp} components, found {}",
            bytes.len()
        )));
    }
    let mut comps = Vec::with_capacity(ncomp);
    let mut o = HEADER_LEN;
    for _ in 0..ncomp {
        let mut c = Vec::with_capacity(grid.len());
        for _ in 0..grid.len() {
            c.push(Complex64::new(f64_at(o), f64_at(o + 8)));
            o += 16;
        }
        comps.push(SpectralField::from_coeffs(grid, c)?);
    }
    Ok(Checkpoint {
        grid,
        t,
        omega,
        comps,
    })
}

/// Write `bytes` to a temporary sibling and rename it over `path`.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| NscError::Format(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

pub fn write_checkpoint(
    path: &Path,
    grid: &Grid,
    t: f64,
    omega: f64,
    comps: &[&SpectralField],
) -> Result<()> {
    atomic_write(path, &encode(grid, t, omega, comps)?)
}

pub fn read_checkpoint(path: &Path) -> Result<Checkpoint> {
    decode(&fs::read(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid::new(4, 6, 8, 2.5).unwrap();
        let f = SpectralField::single_mode(g, 1, 2, 3, Complex64::new(1.0, -2.0));
        let b = encode(&g, 0.75, -3.0, &[&f]).unwrap();
        assert_eq!(&b[..8], b"NSCF1\0\0\0");
        assert_eq!(u32::from_le_bytes(b[8..12].try_into().unwrap()), 4);
        assert_eq!(u32::from_le_bytes(b[16..20].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(b[20..28].try_into().unwrap()), 2.5);
        assert_eq!(f64::from_le_bytes(b[36..44].try_into().unwrap()), -3.0);
        assert_eq!(b.len(), 48 + g.len() * 16);
        let idx = g.index(1, 2, 3);
        let o = 48 + idx * 16;
        assert_eq!(f64::from_le_bytes(b[o..o + 8].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(b[o + 8..o + 16].try_into().unwrap()), -2.0);
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode(b"NSCF2\0\0\0").is_err());
        let g = Grid::new(4, 4, 4, 1.0).unwrap();
        let f = SpectralField::zeros(g);
        let mut b = encode(&g, 0.0, 0.0, &[&f]).unwrap();
        b.pop();
        assert!(decode(&b).is_err());
    }
}
