//! OFF / OBJ mesh readers and writers, plus headerless CSV point clouds.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{PointCloud, TriMesh};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "off" => Some(MeshFormat::Off),
            "obj" => Some(MeshFormat::Obj),
            _ => None,
        }
    }
}

impl FromStr for MeshFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "off" => Ok(MeshFormat::Off),
            "obj" => Ok(MeshFormat::Obj),
            _ => Err(Error::UnknownStrategy {
                kind: "mesh format",
                name: s.to_string(),
            }),
        }
    }
}

pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<TriMesh> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        MeshFormat::Off => parse_off(&text),
        MeshFormat::Obj => parse_obj(&text),
    }
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid number '{tok}'")))
}

/// Significant lines with 1-based line numbers; `#` starts a comment.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("");
        let toks: Vec<&str> = l.split_whitespace().collect();
        (!toks.is_empty()).then_some((i + 1, toks))
    })
}

pub fn parse_off(text: &str) -> Result<TriMesh> {
    let mut lines = content_lines(text);
    let (ln, header) = lines.next().ok_or(Error::EmptyMesh)?;
    if header[0] != "OFF" {
        return Err(parse_err(ln, "missing OFF header"));
    }
    // Counts may share the header line.
    let (ln, counts) = if header.len() > 1 {
        (ln, header[1..].to_vec())
    } else {
        lines
            .next()
            .ok_or_else(|| parse_err(ln, "missing counts line"))?
    };
    if counts.len() < 2 {
        return Err(parse_err(ln, "counts line needs vertex and face counts"));
    }
    let nv: usize = parse_num(counts[0], ln)?;
    let nf: usize = parse_num(counts[1], ln)?;

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (ln, toks) = lines
            .next()
            .ok_or_else(|| parse_err(ln, "unexpected end of file in vertex list"))?;
        if toks.len() < 3 {
            return Err(parse_err(ln, "vertex line needs 3 coordinates"));
        }
        vertices.push([
            parse_num(toks[0], ln)?,
            parse_num(toks[1], ln)?,
            parse_num(toks[2], ln)?,
        ]);
    }
    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (ln, toks) = lines
            .next()
            .ok_or_else(|| parse_err(ln, "unexpected end of file in face list"))?;
        let k: usize = parse_num(toks[0], ln)?;
        if k != 3 || toks.len() < 4 {
            return Err(parse_err(ln, "only triangular faces are supported"));
        }
        let mut f = [0usize; 3];
        for (slot, tok) in f.iter_mut().zip(&toks[1..4]) {
            *slot = parse_num(tok, ln)?;
            if *slot >= nv {
                return Err(parse_err(ln, format!("face index {slot} out of range")));
            }
        }
        faces.push(f);
    }
    TriMesh::new(vertices, faces)
}

pub fn parse_obj(text: &str) -> Result<TriMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, toks) in content_lines(text) {
        match toks[0] {
            "v" => {
                if toks.len() < 4 {
                    return Err(parse_err(ln, "vertex line needs 3 coordinates"));
                }
                vertices.push([
                    parse_num(toks[1], ln)?,
                    parse_num(toks[2], ln)?,
                    parse_num(toks[3], ln)?,
                ]);
            }
            "f" => {
                if toks.len() != 4 {
                    return Err(parse_err(ln, "only triangular faces are supported"));
                }
                let mut f = [0usize; 3];
                for (slot, tok) in f.iter_mut().zip(&toks[1..]) {
                    let head = tok.split('/').next().unwrap_or("");
                    let idx: i64 = parse_num(head, ln)?;
                    // OBJ is 1-based; negative indices count back from the latest vertex.
                    let resolved = match idx {
                        0 => return Err(parse_err(ln, "face index 0 is invalid in OBJ")),
                        i if i > 0 => i - 1,
                        i => vertices.len() as i64 + i,
                    };
                    if resolved < 0 || resolved as usize >= vertices.len() {
                        return Err(parse_err(ln, format!("face index {idx} out of range")));
                    }
                    *slot = resolved as usize;
                }
                faces.push(f);
            }
            _ => {}
        }
    }
    TriMesh::new(vertices, faces)
}

pub fn write_off(mesh: &TriMesh) -> String {
    let mut out = String::new();
    out.push_str("OFF\n");
    let _ = writeln!(out, "{} {} 0", mesh.num_vertices(), mesh.num_faces());
    for v in mesh.vertices() {
        let _ = writeln!(out, "{} {} {}", v[0], v[1], v[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "3 {} {} {}", f[0], f[1], f[2]);
    }
    out
}

pub fn write_obj(mesh: &TriMesh) -> String {
    let mut out = String::new();
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v[0], v[1], v[2]);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn parse_cloud_csv(text: &str) -> Result<PointCloud> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| parse_err(i + 1, e.to_string()))?;
        let row = rec
            .iter()
            .map(|t| parse_num::<f64>(t, i + 1))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    PointCloud::from_rows(&rows)
}

pub fn load_cloud(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_cloud_csv(&text)
}

pub fn write_cloud_csv(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for p in cloud.points() {
        let row: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}
