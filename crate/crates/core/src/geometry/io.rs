//! Field export: CSV (coordinates + value) and a compact little-endian binary layout.
//!
//! Binary layout:
//!
//! | bytes | content |
//! |-------|---------|
//! | 4 | magic `DLFD` |
//! | 4 | format version (u32) |
//! | 4 | grid kind (u32): 0 lattice, 1 radial |
//! | 4 | dimension (u32) |
//! | lattice: 24 + 8 + 24 | shape (3 × u64), h (f64), origin (3 × f64) |
//! | radial: 8 + 4 + 24 + 8n | node count (u64), metric (u32), center (3 × f64), nodes (n × f64) |
//! | n | mask bytes: 0 inside, 1 boundary, 2 outside |
//! | 8n | values (f64), x index fastest |

use std::io::{Read, Write};

use super::field::{CartesianGrid, Grid, NodeKind, RadialGrid, RadialMetric, ScalarField};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"DLFD";
const VERSION: u32 = 1;

pub fn write_field_csv<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    let dim = field.grid.dim();
    match &field.grid {
        Grid::Radial(_) => writeln!(out, "r,value,mask")?,
        Grid::Cartesian(_) => {
            let axes = ["x", "y", "z"];
            writeln!(out, "{},value,mask", axes[..dim].join(","))?
        }
    }
    for i in 0..field.len() {
        let mask = mask_name(field.mask[i]);
        match &field.grid {
            Grid::Radial(g) => writeln!(out, "{},{},{}", g.nodes[i], field.values[i], mask)?,
            Grid::Cartesian(g) => {
                let p = g.point(i);
                let coords: Vec<String> = p[..dim].iter().map(|c| c.to_string()).collect();
                writeln!(out, "{},{},{}", coords.join(","), field.values[i], mask)?
            }
        }
    }
    Ok(())
}

fn mask_name(m: NodeKind) -> &'static str {
    match m {
        NodeKind::Inside => "inside",
        NodeKind::Boundary => "boundary",
        NodeKind::Outside => "outside",
    }
}

fn mask_code(m: NodeKind) -> u8 {
    match m {
        NodeKind::Inside => 0,
        NodeKind::Boundary => 1,
        NodeKind::Outside => 2,
    }
}

fn metric_code(m: RadialMetric) -> u32 {
    match m {
        RadialMetric::Euclidean => 0,
        RadialMetric::Sphere => 1,
        RadialMetric::Hyperbolic => 2,
    }
}

pub fn write_field_binary<W: Write>(field: &ScalarField, mut out: W) -> Result<()> {
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    match &field.grid {
        Grid::Cartesian(g) => {
            out.write_all(&0u32.to_le_bytes())?;
            out.write_all(&(g.dim as u32).to_le_bytes())?;
            for s in g.shape {
                out.write_all(&(s as u64).to_le_bytes())?;
            }
            out.write_all(&g.h.to_le_bytes())?;
            for o in g.origin {
                out.write_all(&o.to_le_bytes())?;
            }
        }
        Grid::Radial(g) => {
            out.write_all(&1u32.to_le_bytes())?;
            out.write_all(&(g.dim as u32).to_le_bytes())?;
            out.write_all(&(g.nodes.len() as u64).to_le_bytes())?;
            out.write_all(&metric_code(g.metric).to_le_bytes())?;
            for c in g.center {
                out.write_all(&c.to_le_bytes())?;
            }
            for r in &g.nodes {
                out.write_all(&r.to_le_bytes())?;
            }
        }
    }
    let mask: Vec<u8> = field.mask.iter().map(|m| mask_code(*m)).collect();
    out.write_all(&mask)?;
    for v in &field.values {
        out.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

struct Cursor<R> {
    inner: R,
}

impl<R: Read> Cursor<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.inner.read_exact(&mut b)?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
}

pub fn read_field_binary<R: Read>(input: R) -> Result<ScalarField> {
    let mut c = Cursor { inner: input };
    if &c.bytes::<4>()? != MAGIC {
        return Err(Error::Shape("not a field file (bad magic)".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(Error::Shape(format!("unsupported field format version {version}")));
    }
    let kind = c.u32()?;
    let dim = c.u32()? as usize;
    let grid = match kind {
        0 => {
            let shape = [c.u64()? as usize, c.u64()? as usize, c.u64()? as usize];
            let h = c.f64()?;
            let origin = [c.f64()?, c.f64()?, c.f64()?];
            Grid::Cartesian(CartesianGrid { dim, origin, h, shape })
        }
        1 => {
            let n = c.u64()? as usize;
            let metric = match c.u32()? {
                0 => RadialMetric::Euclidean,
                1 => RadialMetric::Sphere,
                2 => RadialMetric::Hyperbolic,
                m => return Err(Error::Shape(format!("unknown metric code {m}"))),
            };
            let center = [c.f64()?, c.f64()?, c.f64()?];
            let nodes = (0..n).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
            Grid::Radial(RadialGrid { dim, center, metric, nodes })
        }
        k => return Err(Error::Shape(format!("unknown grid kind {k}"))),
    };
    let n = grid.len();
    let mut mask_bytes = vec![0u8; n];
    c.inner.read_exact(&mut mask_bytes)?;
    let mask = mask_bytes
        .iter()
        .map(|b| match b {
            0 => Ok(NodeKind::Inside),
            1 => Ok(NodeKind::Boundary),
            2 => Ok(NodeKind::Outside),
            m => Err(Error::Shape(format!("unknown mask code {m}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let values = (0..n).map(|_| c.f64()).collect::<Result<Vec<_>>>()?;
    ScalarField::new(grid, values, mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip() {
        let g = CartesianGrid::covering(&[[0.0, 1.0], [0.0, 0.5]], 0.25).unwrap();
        let n = g.len();
        let f = ScalarField::new(
            Grid::Cartesian(g),
            (0..n).map(|i| i as f64 * 0.5 - 1.0).collect(),
            (0..n).map(|i| if i % 3 == 0 { NodeKind::Outside } else { NodeKind::Inside }).collect(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_field_binary(&f, &mut buf).unwrap();
        assert_eq!(read_field_binary(buf.as_slice()).unwrap(), f);

        let r = ScalarField::new(
            Grid::Radial(RadialGrid {
                dim: 3,
                center: [0.0; 3],
                metric: RadialMetric::Hyperbolic,
                nodes: vec![0.0, 0.1, 0.3],
            }),
            vec![1.0, 2.0, 3.0],
            vec![NodeKind::Inside; 3],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_field_binary(&r, &mut buf).unwrap();
        assert_eq!(read_field_binary(buf.as_slice()).unwrap(), r);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let f = ScalarField::new(
            Grid::Radial(RadialGrid { dim: 2, center: [0.0; 3], metric: RadialMetric::Euclidean, nodes: vec![1.0, 2.0] }),
            vec![0.5, 0.25],
            vec![NodeKind::Boundary, NodeKind::Inside],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_field_csv(&f, &mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "r,value,mask\n1,0.5,boundary\n2,0.25,inside\n");
    }
}
