//! Flat binary and CSV serialization of fields and trajectory diagnostics.
//!
//! Binary layout, little-endian:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4     | magic `WFLD` |
//! | 4     | version (`u32`, currently 1) |
//! | 8     | `α` (`f64`) |
//! | 4     | `d` (`u32`) |
//! | 4 + 8 + 4 + 8 | `axial_n`, half width, `radial_n`, radial extent |
//! | 1     | space tag, 0 physical, 1 frequency |
//! | rest  | interleaved `re, im` (`f64`), row-major, radial index fastest |

use std::io::{Read, Write};
use std::sync::Arc;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::{Field, Space};
use crate::grid::{Grid, GridSpec, WeinsteinParams};
use crate::scalar::Real;
use crate::trajectory::StepDiagnostics;

pub const MAGIC: &[u8; 4] = b"WFLD";
pub const VERSION: u32 = 1;

/// Header of a serialized field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldHeader {
    pub alpha: f64,
    pub d: usize,
    pub grid: GridSpec,
    pub space: Space,
}

impl FieldHeader {
    pub fn len(&self) -> usize {
        self.grid.axial_n.pow(self.d as u32) * self.grid.radial_n
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn count(n: usize, what: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Format(format!("{what} = {n} does not fit in u32")))
}

pub fn write_field<T: Real, W: Write>(field: &Field<T>, mut w: W) -> Result<()> {
    let g = field.grid();
    let spec = g.spec();
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    w.write_f64::<LittleEndian>(g.params().alpha().as_f64())?;
    w.write_u32::<LittleEndian>(count(g.d(), "d")?)?;
    w.write_u32::<LittleEndian>(count(spec.axial_n, "axial_n")?)?;
    w.write_f64::<LittleEndian>(spec.half_width)?;
    w.write_u32::<LittleEndian>(count(spec.radial_n, "radial_n")?)?;
    w.write_f64::<LittleEndian>(spec.radial_extent)?;
    w.write_u8(match field.space() {
        Space::Physical => 0,
        Space::Frequency => 1,
    })?;
    for v in field.values() {
        w.write_f64::<LittleEndian>(v.re.as_f64())?;
        w.write_f64::<LittleEndian>(v.im.as_f64())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_header<R: Read>(mut r: R) -> Result<FieldHeader> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}")));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let alpha = r.read_f64::<LittleEndian>()?;
    let d = r.read_u32::<LittleEndian>()? as usize;
    let grid = GridSpec {
        axial_n: r.read_u32::<LittleEndian>()? as usize,
        half_width: r.read_f64::<LittleEndian>()?,
        radial_n: r.read_u32::<LittleEndian>()? as usize,
        radial_extent: r.read_f64::<LittleEndian>()?,
    };
    let space = match r.read_u8()? {
        0 => Space::Physical,
        1 => Space::Frequency,
        t => return Err(Error::Format(format!("unknown space tag {t}"))),
    };
    Ok(FieldHeader { alpha, d, grid, space })
}

fn read_payload<T: Real, R: Read>(mut r: R, n: usize) -> Result<Vec<Complex<T>>> {
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        let re = r.read_f64::<LittleEndian>()?;
        let im = r.read_f64::<LittleEndian>()?;
        values.push(Complex::new(T::lit(re), T::lit(im)));
    }
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after payload".into()));
    }
    Ok(values)
}

/// Reads a field, rebuilding its grid from the header.
pub fn read_field<T: Real, R: Read>(mut r: R) -> Result<Field<T>> {
    let h = read_header(&mut r)?;
    let grid = Grid::from_spec(WeinsteinParams::new(T::lit(h.alpha), h.d)?, &h.grid)?;
    let values = read_payload(r, grid.len())?;
    Field::from_values(&grid, values, h.space)
}

/// Reads a field onto an existing grid, which must match the header.
pub fn read_field_on<T: Real, R: Read>(grid: &Arc<Grid<T>>, mut r: R) -> Result<Field<T>> {
    let h = read_header(&mut r)?;
    let same = h.d == grid.d() && h.alpha == grid.params().alpha().as_f64() && h.grid == grid.spec();
    if !same {
        return Err(Error::Format(format!("header {h:?} does not match the target grid")));
    }
    let values = read_payload(r, grid.len())?;
    Field::from_values(grid, values, h.space)
}

/// One row per node: coordinates, then `re, im`.
pub fn write_field_csv<T: Real, W: Write>(field: &Field<T>, mut w: W) -> Result<()> {
    let g = field.grid();
    let (prefix, last) = match field.space() {
        Space::Physical => ("x", "r"),
        Space::Frequency => ("lambda", "rho"),
    };
    let mut cols: Vec<String> = (1..=g.d()).map(|i| format!("{prefix}{i}")).collect();
    cols.push(last.into());
    cols.extend(["re".into(), "im".into()]);
    writeln!(w, "{}", cols.join(","))?;
    for (i, v) in field.values().iter().enumerate() {
        let pt = match field.space() {
            Space::Physical => g.point(i),
            Space::Frequency => g.freq_point(i),
        };
        for c in pt {
            write!(w, "{:e},", c.as_f64())?;
        }
        writeln!(w, "{:e},{:e}", v.re.as_f64(), v.im.as_f64())?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t, mass, sup_norm, LqLr_accum, contraction_ratio`; the last is
/// empty outside Picard runs.
pub fn write_diagnostics_csv<W: Write>(diag: &[StepDiagnostics], mut w: W) -> Result<()> {
    writeln!(w, "t,mass,sup_norm,LqLr_accum,contraction_ratio")?;
    for d in diag {
        write!(w, "{:e},{:e},{:e},{:e},", d.t, d.mass, d.sup_norm, d.lqlr_accum)?;
        match d.contraction_ratio {
            Some(r) => writeln!(w, "{r:e}")?,
            None => writeln!(w)?,
        }
    }
    w.flush()?;
    Ok(())
}
