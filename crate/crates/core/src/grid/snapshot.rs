//! Field snapshot files.
//!
//! ```text
//! NSCH-FIELD v1
//! nx ny dx dy time bc-tag
//! text | f64le
//! <values, row-major>
//! ```
//!
//! Text values are written one per line in shortest round-trip form, so a
//! text snapshot reloads bit for bit. Vector fields store the x-face block
//! followed by the y-face block.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{Bc, Grid, NodeField, ScalarField, VectorField};
use crate::error::{Error, Result};

pub const MAGIC: &str = "NSCH-FIELD v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Cell,
    XFace,
    YFace,
    /// Full staggered vector field.
    Faces,
    Node,
}

impl Layout {
    pub fn len(self, g: &Grid) -> usize {
        match self {
            Layout::Cell => g.n_cells(),
            Layout::XFace => g.n_xfaces(),
            Layout::YFace => g.n_yfaces(),
            Layout::Faces => g.n_xfaces() + g.n_yfaces(),
            Layout::Node => g.node_dims().0 * g.node_dims().1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Encoding {
    #[default]
    Text,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: Grid,
    pub time: f64,
    pub values: Vec<f64>,
}

fn snap_err(path: &Path, message: impl Into<String>) -> Error {
    Error::Snapshot { path: path.to_path_buf(), message: message.into() }
}

pub fn write_snapshot(path: &Path, grid: &Grid, time: f64, values: &[f64], enc: Encoding) -> Result<()> {
    let mut buf: Vec<u8> = Vec::with_capacity(values.len() * 24 + 64);
    let tag = match enc {
        Encoding::Text => "text",
        Encoding::Binary => "f64le",
    };
    let _ = writeln!(
        buf,
        "{MAGIC}\n{} {} {} {} {} {}\n{tag}",
        grid.nx,
        grid.ny,
        grid.dx,
        grid.dy,
        time,
        grid.bc.tag()
    );
    match enc {
        Encoding::Text => {
            for v in values {
                let _ = writeln!(buf, "{v}");
            }
        }
        Encoding::Binary => {
            for v in values {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    fs::write(path, buf).map_err(|e| Error::io(path, e))
}

/// Reads a snapshot and checks the value count against `layout`.
pub fn read_snapshot(path: &Path, layout: Layout) -> Result<Snapshot> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let mut pos = 0;
    let next_line = |pos: &mut usize| -> Result<String> {
        let rest = &bytes[*pos..];
        let end = rest
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| snap_err(path, "truncated header"))?;
        *pos += end + 1;
        String::from_utf8(rest[..end].to_vec()).map_err(|_| snap_err(path, "header is not UTF-8"))
    };
    let magic = next_line(&mut pos)?;
    if magic.trim_end() != MAGIC {
        return Err(snap_err(path, format!("bad magic line {magic:?}")));
    }
    let meta = next_line(&mut pos)?;
    let toks: Vec<&str> = meta.split_whitespace().collect();
    if toks.len() != 6 {
        return Err(snap_err(path, format!("expected 6 header fields, found {}", toks.len())));
    }
    let parse_u = |s: &str, what: &str| -> Result<usize> {
        s.parse().map_err(|_| snap_err(path, format!("bad {what}: {s:?}")))
    };
    let parse_f = |s: &str, what: &str| -> Result<f64> {
        s.parse().map_err(|_| snap_err(path, format!("bad {what}: {s:?}")))
    };
    let nx = parse_u(toks[0], "nx")?;
    let ny = parse_u(toks[1], "ny")?;
    let dx = parse_f(toks[2], "dx")?;
    let dy = parse_f(toks[3], "dy")?;
    let time = parse_f(toks[4], "time")?;
    let bc = Bc::from_tag(toks[5]).ok_or_else(|| snap_err(path, format!("unknown bc tag {:?}", toks[5])))?;
    if nx < 8 || ny < 8 || !(dx > 0.0) || !(dy > 0.0) {
        return Err(snap_err(path, "invalid grid in header"));
    }
    let grid = Grid { nx, ny, dx, dy, bc };
    let count = layout.len(&grid);
    let enc = next_line(&mut pos)?;
    let values = match enc.trim_end() {
        "text" => {
            let body = std::str::from_utf8(&bytes[pos..]).map_err(|_| snap_err(path, "body is not UTF-8"))?;
            let vals: Vec<f64> = body
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| snap_err(path, format!("bad value {t:?}"))))
                .collect::<Result<_>>()?;
            vals
        }
        "f64le" => {
            let body = &bytes[pos..];
            if body.len() % 8 != 0 {
                return Err(snap_err(path, "binary body is not a whole number of f64"));
            }
            body.chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
                .collect()
        }
        other => return Err(snap_err(path, format!("unknown encoding {other:?}"))),
    };
    if values.len() != count {
        return Err(snap_err(path, format!("expected {count} values for {layout:?}, found {}", values.len())));
    }
    Ok(Snapshot { grid, time, values })
}

pub fn write_scalar(path: &Path, f: &ScalarField, time: f64, enc: Encoding) -> Result<()> {
    write_snapshot(path, f.grid(), time, f.data(), enc)
}

pub fn read_scalar(path: &Path) -> Result<(ScalarField, f64)> {
    let s = read_snapshot(path, Layout::Cell)?;
    Ok((ScalarField::from_vec(&s.grid, s.values), s.time))
}

pub fn write_vector(path: &Path, v: &VectorField, time: f64, enc: Encoding) -> Result<()> {
    write_snapshot(path, v.grid(), time, v.data(), enc)
}

pub fn read_vector(path: &Path) -> Result<(VectorField, f64)> {
    let s = read_snapshot(path, Layout::Faces)?;
    let nu = s.grid.n_xfaces();
    let (u, v) = s.values.split_at(nu);
    Ok((VectorField::from_parts(&s.grid, u.to_vec(), v.to_vec()), s.time))
}

pub fn write_node(path: &Path, f: &NodeField, time: f64, enc: Encoding) -> Result<()> {
    write_snapshot(path, f.grid(), time, f.data(), enc)
}

pub fn read_node(path: &Path) -> Result<(NodeField, f64)> {
    let s = read_snapshot(path, Layout::Node)?;
    Ok((NodeField::from_vec(&s.grid, s.values), s.time))
}
