//! Plain-text mesh and tag files.
//!
//! Mesh files are a subset of Wavefront OBJ: `v x y z` records (meters) and
//! `f i j k` records with **1-based** vertex indices, counter-clockwise seen
//! from outside. Blank lines and `#` comments are ignored; OBJ extras such as
//! `v/vt/vn` slash syntax are accepted on face records but only the vertex
//! index is kept.
//!
//! Tag sidecar files hold one `label faceIndex` pair per line, with **0-based**
//! face indices in the order of the `f` records.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::TriangleMesh;
use crate::error::{Error, Result};
use crate::geometry::Vec3;

pub fn load_mesh(path: &Path, tag_path: Option<&Path>) -> Result<TriangleMesh> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut mesh = read_mesh(&text)?;
    if let Some(tp) = tag_path {
        let tags = fs::read_to_string(tp).map_err(|e| Error::io(tp, e))?;
        for (label, faces) in read_tags(&tags)? {
            mesh.tag_faces(&label, &faces)?;
        }
    }
    Ok(mesh)
}

pub fn read_mesh(text: &str) -> Result<TriangleMesh> {
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let kind = parts.next().unwrap_or_default();
        let fields: Vec<&str> = parts.collect();
        match kind {
            "v" => {
                if fields.len() != 3 {
                    return Err(parse_err(line_no, "vertex record needs 3 coordinates"));
                }
                let mut c = [0.0; 3];
                for (dst, s) in c.iter_mut().zip(&fields) {
                    *dst = s
                        .parse::<f64>()
                        .map_err(|_| parse_err(line_no, &format!("bad coordinate '{s}'")))?;
                    if !dst.is_finite() {
                        return Err(parse_err(line_no, "non-finite coordinate"));
                    }
                }
                vertices.push(Vec3::new(c[0], c[1], c[2]));
            }
            "f" => {
                if fields.len() != 3 {
                    return Err(parse_err(line_no, "only triangular faces are supported"));
                }
                let mut idx = [0u32; 3];
                for (dst, s) in idx.iter_mut().zip(&fields) {
                    let head = s.split('/').next().unwrap_or("");
                    let one_based = head
                        .parse::<u32>()
                        .map_err(|_| parse_err(line_no, &format!("bad vertex index '{s}'")))?;
                    if one_based == 0 {
                        return Err(parse_err(line_no, "vertex indices are 1-based"));
                    }
                    *dst = one_based - 1;
                }
                faces.push(idx);
            }
            "vn" | "vt" | "o" | "g" | "s" | "mtllib" | "usemtl" => {}
            other => return Err(parse_err(line_no, &format!("unknown record '{other}'"))),
        }
    }
    TriangleMesh::new(vertices, faces)
}

/// Parses a tag sidecar into `(label, faces)` groups in first-seen label order.
pub fn read_tags(text: &str) -> Result<Vec<(String, Vec<usize>)>> {
    let mut groups: Vec<(String, Vec<usize>)> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(parse_err(ln + 1, "expected 'label faceIndex'"));
        }
        let face = fields[1]
            .parse::<usize>()
            .map_err(|_| parse_err(ln + 1, &format!("bad face index '{}'", fields[1])))?;
        match groups.iter_mut().find(|(l, _)| l == fields[0]) {
            Some((_, faces)) => faces.push(face),
            None => groups.push((fields[0].to_string(), vec![face])),
        }
    }
    Ok(groups)
}

pub fn write_mesh(mesh: &TriangleMesh) -> String {
    let mut out = String::with_capacity(mesh.num_vertices() * 60 + mesh.num_faces() * 24);
    // f64 Display is shortest round-trip, so save/load is bit-exact.
    for v in mesh.vertices() {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}

pub fn write_tags(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for (f, tag) in mesh.face_tags().iter().enumerate() {
        if let Some(t) = tag {
            let _ = writeln!(out, "{} {}", mesh.labels()[*t as usize], f);
        }
    }
    out
}

pub fn save_mesh(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    fs::write(path, write_mesh(mesh)).map_err(|e| Error::io(path, e))
}

pub fn save_tags(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    fs::write(path, write_tags(mesh)).map_err(|e| Error::io(path, e))
}

fn parse_err(line: usize, message: &str) -> Error {
    Error::Parse { line, message: message.to_string() }
}
