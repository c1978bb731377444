//! Plain-text mesh format, version 1.
//!
//! ```text
//! steklov-mesh v1 <dim>
//! # h <h> grading <grading>
//! <node count>
//! <rho> <z>                 (one line per node)
//! <triangle count>
//! <i> <j> <k>               (one line per triangle, counter-clockwise)
//! <boundary edge count>
//! <i> <j> <steklov|axis> <piece id>
//! ```
//!
//! Reals are written with 17 significant digits, so files round-trip
//! bit-exactly. Lines starting with `#` carry metadata or comments.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use super::{BoundaryEdge, Mesh};
use crate::domain::BoundaryTag;
use crate::error::{Error, Result};

pub fn write_mesh(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "steklov-mesh v1 {}", mesh.dim);
    let _ = writeln!(s, "# h {:.16e} grading {:.16e}", mesh.h, mesh.grading);
    let _ = writeln!(s, "{}", mesh.nodes.len());
    for p in &mesh.nodes {
        let _ = writeln!(s, "{:.16e} {:.16e}", p[0], p[1]);
    }
    let _ = writeln!(s, "{}", mesh.triangles.len());
    for t in &mesh.triangles {
        let _ = writeln!(s, "{} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "{}", mesh.boundary_edges.len());
    for e in &mesh.boundary_edges {
        let _ = writeln!(s, "{} {} {} {}", e.a, e.b, e.tag.as_str(), e.piece);
    }
    s
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(write_mesh(mesh).as_bytes())?;
    Ok(())
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("mesh line {line}: {msg}"))
}

/// Parses a v1 mesh. The result carries no exact geometry, so refining it
/// keeps new boundary nodes on the polygon.
pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut h = f64::NAN;
    let mut grading = f64::NAN;
    let mut body: Vec<(usize, &str)> = Vec::new();
    for (i, l) in text.lines().enumerate() {
        let t = l.trim();
        if let Some(rest) = t.strip_prefix('#') {
            let w: Vec<&str> = rest.split_whitespace().collect();
            if w.len() == 4 && w[0] == "h" && w[2] == "grading" {
                h = w[1].parse().map_err(|e| parse_err(i + 1, e))?;
                grading = w[3].parse().map_err(|e| parse_err(i + 1, e))?;
            }
        } else if !t.is_empty() {
            body.push((i + 1, t));
        }
    }
    let mut cur = Cursor { body: &body, pos: 0 };
    let (ln, head) = cur.fields(3)?;
    if head[0] != "steklov-mesh" || head[1] != "v1" {
        return Err(parse_err(ln, "expected header `steklov-mesh v1 <dim>`"));
    }
    let dim: usize = parse(ln, head[2])?;
    let nn: usize = cur.count()?;
    let mut nodes = Vec::with_capacity(nn);
    for _ in 0..nn {
        let (ln, w) = cur.fields(2)?;
        nodes.push([parse(ln, w[0])?, parse(ln, w[1])?]);
    }
    let nt: usize = cur.count()?;
    let mut triangles = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (ln, w) = cur.fields(3)?;
        let t = [parse(ln, w[0])?, parse(ln, w[1])?, parse(ln, w[2])?];
        if t.iter().any(|&v: &usize| v >= nn) {
            return Err(parse_err(ln, "node index out of range"));
        }
        triangles.push(t);
    }
    let nb: usize = cur.count()?;
    let mut boundary_edges = Vec::with_capacity(nb);
    for _ in 0..nb {
        let (ln, w) = cur.fields(4)?;
        let tag = match w[2] {
            "steklov" => BoundaryTag::Steklov,
            "axis" => BoundaryTag::Axis,
            other => return Err(parse_err(ln, format!("unknown tag `{other}`"))),
        };
        let e = BoundaryEdge { a: parse(ln, w[0])?, b: parse(ln, w[1])?, tag, piece: parse(ln, w[3])? };
        if e.a >= nn || e.b >= nn {
            return Err(parse_err(ln, "node index out of range"));
        }
        boundary_edges.push(e);
    }
    if let Some((ln, _)) = body.get(cur.pos) {
        return Err(parse_err(*ln, "trailing content"));
    }
    let quality = Mesh::compute_quality(&nodes, &triangles);
    Ok(Mesh { dim, nodes, triangles, boundary_edges, h, grading, quality, geometry: None })
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    read_mesh(&std::fs::read_to_string(path)?)
}

fn parse<T: std::str::FromStr>(ln: usize, s: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    s.parse().map_err(|e| parse_err(ln, format!("`{s}`: {e}")))
}

struct Cursor<'a> {
    body: &'a [(usize, &'a str)],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn fields(&mut self, width: usize) -> Result<(usize, Vec<&'a str>)> {
        let (ln, line) = *self
            .body
            .get(self.pos)
            .ok_or_else(|| Error::Parse("mesh: unexpected end of file".into()))?;
        self.pos += 1;
        let w: Vec<&str> = line.split_whitespace().collect();
        if w.len() != width {
            return Err(parse_err(ln, format!("expected {width} fields, found {}", w.len())));
        }
        Ok((ln, w))
    }

    fn count(&mut self) -> Result<usize> {
        let (ln, w) = self.fields(1)?;
        parse(ln, w[0])
    }
}
