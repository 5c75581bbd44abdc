//! The PMESH ASCII format.
//!
//! ```text
//! PMESH 1
//! nv nf nc
//! x y z            (nv lines)
//! k v1 ... vk      (nf lines, 1-based vertex ids)
//! m ±f1 ... ±fm    (nc lines, 1-based face ids, sign = orientation)
//! POINT_DATA name  (optional, followed by nv values)
//! ```
//!
//! Lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{build_mesh, MeshError, PolyMesh};
use crate::point::Point3;

/// A named per-vertex scalar field stored after the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PointData {
    pub name: String,
    pub values: Vec<f64>,
}

pub fn write_pmesh(mesh: &PolyMesh, path: &Path) -> Result<(), MeshError> {
    write_pmesh_with_data(mesh, None, path)
}

pub fn write_pmesh_with_data(
    mesh: &PolyMesh,
    data: Option<&PointData>,
    path: &Path,
) -> Result<(), MeshError> {
    fs::write(path, to_pmesh_string(mesh, data))?;
    Ok(())
}

pub(crate) fn to_pmesh_string(mesh: &PolyMesh, data: Option<&PointData>) -> String {
    let mut s = String::new();
    s.push_str("PMESH 1\n");
    let _ = writeln!(s, "{} {} {}", mesh.num_vertices(), mesh.num_faces(), mesh.num_cells());
    for v in &mesh.vertices {
        let _ = writeln!(s, "{:.16e} {:.16e} {:.16e}", v.x, v.y, v.z);
    }
    for f in &mesh.faces {
        let _ = write!(s, "{}", f.vertices.len());
        for &v in &f.vertices {
            let _ = write!(s, " {}", v + 1);
        }
        s.push('\n');
    }
    for c in &mesh.cells {
        let _ = write!(s, "{}", c.faces.len());
        for cf in &c.faces {
            let id = cf.face as i64 + 1;
            let _ = write!(s, " {}", if cf.outward { id } else { -id });
        }
        s.push('\n');
    }
    if let Some(d) = data {
        let _ = writeln!(s, "POINT_DATA {}", d.name);
        for v in &d.values {
            let _ = writeln!(s, "{v:.16e}");
        }
    }
    s
}

pub fn read_pmesh(path: &Path) -> Result<PolyMesh, MeshError> {
    read_pmesh_with_data(path).map(|(m, _)| m)
}

pub fn read_pmesh_with_data(path: &Path) -> Result<(PolyMesh, Option<PointData>), MeshError> {
    parse_pmesh(&fs::read_to_string(path)?)
}

struct Lines<'a> {
    inner: std::iter::Peekable<Box<dyn Iterator<Item = (usize, &'a str)> + 'a>>,
    last: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let it: Box<dyn Iterator<Item = (usize, &'a str)>> = Box::new(
            text.lines()
                .enumerate()
                .map(|(i, l)| (i + 1, l.trim()))
                .filter(|(_, l)| !l.is_empty() && !l.starts_with('#')),
        );
        Lines { inner: it.peekable(), last: 0 }
    }

    fn next(&mut self, what: &str) -> Result<(usize, &'a str), MeshError> {
        match self.inner.next() {
            Some((n, l)) => {
                self.last = n;
                Ok((n, l))
            }
            None => Err(MeshError::ParseError {
                line: self.last + 1,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }
}

fn perr(line: usize, message: impl Into<String>) -> MeshError {
    MeshError::ParseError { line, message: message.into() }
}

fn ints(line: usize, s: &str) -> Result<Vec<i64>, MeshError> {
    s.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| perr(line, format!("invalid integer `{t}`"))))
        .collect()
}

pub(crate) fn parse_pmesh(text: &str) -> Result<(PolyMesh, Option<PointData>), MeshError> {
    let mut lines = Lines::new(text);
    let (n, header) = lines.next("header")?;
    let mut hp = header.split_whitespace();
    if hp.next() != Some("PMESH") {
        return Err(MeshError::UnsupportedFormat(header.to_string()));
    }
    if hp.next() != Some("1") {
        return Err(perr(n, "unsupported PMESH version"));
    }

    let (n, counts) = lines.next("counts")?;
    let c = ints(n, counts)?;
    if c.len() != 3 || c.iter().any(|&x| x < 0) {
        return Err(perr(n, "expected `nv nf nc`"));
    }
    let (nv, nf, nc) = (c[0] as usize, c[1] as usize, c[2] as usize);

    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, l) = lines.next("vertex")?;
        let xs: Vec<f64> = l
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| perr(n, format!("invalid number `{t}`"))))
            .collect::<Result<_, _>>()?;
        if xs.len() != 3 {
            return Err(perr(n, "expected 3 coordinates"));
        }
        vertices.push(Point3::new(xs[0], xs[1], xs[2]));
    }

    let mut faces = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (n, l) = lines.next("face")?;
        let v = ints(n, l)?;
        if v.is_empty() || v[0] < 0 || v.len() != v[0] as usize + 1 {
            return Err(perr(n, "face vertex count mismatch"));
        }
        let lp = v[1..]
            .iter()
            .map(|&i| {
                if i >= 1 && (i as usize) <= nv {
                    Ok(i as usize - 1)
                } else {
                    Err(perr(n, format!("vertex id {i} out of range")))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        faces.push(lp);
    }

    let mut cells = Vec::with_capacity(nc);
    let mut flags = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (n, l) = lines.next("cell")?;
        let v = ints(n, l)?;
        if v.is_empty() || v[0] < 0 || v.len() != v[0] as usize + 1 {
            return Err(perr(n, "cell face count mismatch"));
        }
        let mut fl = Vec::with_capacity(v.len() - 1);
        let mut fg = Vec::with_capacity(v.len() - 1);
        for &i in &v[1..] {
            let a = i.unsigned_abs() as usize;
            if a == 0 || a > nf {
                return Err(perr(n, format!("face id {i} out of range")));
            }
            fl.push(a - 1);
            fg.push(i > 0);
        }
        cells.push(fl);
        flags.push(fg);
    }

    let data = match lines.inner.peek().copied() {
        Some((_, l)) if l.starts_with("POINT_DATA") => {
            lines.next("POINT_DATA")?;
            let name = l["POINT_DATA".len()..].trim().to_string();
            let mut values = Vec::with_capacity(nv);
            for _ in 0..nv {
                let (m, l) = lines.next("point value")?;
                values.push(l.parse::<f64>().map_err(|_| perr(m, format!("invalid number `{l}`")))?);
            }
            Some(PointData { name, values })
        }
        Some((n, _)) => return Err(perr(n, "trailing content")),
        None => None,
    };

    let mesh = build_mesh(vertices, faces, cells)?;
    // Orientation flags are recomputed by build_mesh; a file whose signs
    // disagree with the geometry is inconsistent.
    for (ci, fg) in flags.iter().enumerate() {
        for (cf, &want) in mesh.cells[ci].faces.iter().zip(fg) {
            if cf.outward != want {
                return Err(perr(0, format!("orientation sign of cell {} is inconsistent", ci + 1)));
            }
        }
    }
    Ok((mesh, data))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::unit_cube_mesh;

    #[test]
    fn round_trip_unit_cube() {
        let m = unit_cube_mesh();
        let s = to_pmesh_string(&m, None);
        let (back, data) = parse_pmesh(&s).unwrap();
        assert!(data.is_none());
        assert_eq!(back.topology(), m.topology());
        assert_eq!(back.vertices, m.vertices);
        assert_eq!(to_pmesh_string(&back, None), s);
    }

    #[test]
    fn round_trip_inexact_coordinates() {
        let m = unit_cube_mesh().map_vertices(|p| p * (1.0 / 3.0) + Point3::new(0.1, 0.2, 0.7)).unwrap();
        let (back, _) = parse_pmesh(&to_pmesh_string(&m, None)).unwrap();
        assert_eq!(back.vertices, m.vertices);
    }

    #[test]
    fn point_data_round_trip() {
        let m = unit_cube_mesh();
        let d = PointData { name: "u".into(), values: (0..8).map(|i| i as f64 / 7.0).collect() };
        let (_, back) = parse_pmesh(&to_pmesh_string(&m, Some(&d))).unwrap();
        assert_eq!(back.unwrap(), d);
    }

    #[test]
    fn truncated_file_reports_line() {
        let s = to_pmesh_string(&unit_cube_mesh(), None);
        let cut: String = s.lines().take(12).collect::<Vec<_>>().join("\n");
        match parse_pmesh(&cut) {
            Err(MeshError::ParseError { line, .. }) => assert_eq!(line, 13),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_are_skipped() {
        let s = to_pmesh_string(&unit_cube_mesh(), None);
        let commented = format!("# generated\n{}", s.replacen('\n', "\n# counts follow\n", 1));
        assert!(parse_pmesh(&commented).is_ok());
    }

    #[test]
    fn wrong_header() {
        assert!(matches!(parse_pmesh("OFF\n"), Err(MeshError::UnsupportedFormat(_))));
    }
}
