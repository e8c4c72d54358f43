//! Plain-text mesh interchange and VTK legacy export.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use super::{build_mesh, Mesh, MeshError};

/// Reads `V T`, then `V` lines `x y z`, then `T` lines `v0 v1 v2 v3 tag`.
/// Blank lines and `#` comments are ignored.
pub fn read_mesh<R: BufRead>(reader: R) -> Result<Mesh, MeshError> {
    let mut tokens: Vec<String> = Vec::new();
    for line in reader.lines() {
        let line = line?;
        let line = line.split('#').next().unwrap_or("");
        tokens.extend(line.split_whitespace().map(str::to_owned));
    }
    let mut it = tokens.into_iter();
    let mut next = |what: &str| it.next().ok_or_else(|| MeshError::Parse(format!("unexpected end of input reading {what}")));
    let parse_usize = |s: String| s.parse::<usize>().map_err(|e| MeshError::Parse(format!("{s}: {e}")));
    let nv = parse_usize(next("vertex count")?)?;
    let nt = parse_usize(next("tet count")?)?;
    let mut verts = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut p = [0.0; 3];
        for c in &mut p {
            let s = next("coordinate")?;
            *c = s.parse().map_err(|e| MeshError::Parse(format!("{s}: {e}")))?;
        }
        verts.push(p);
    }
    let mut tets = Vec::with_capacity(nt);
    let mut tags = Vec::with_capacity(nt);
    for _ in 0..nt {
        let mut t = [0usize; 4];
        for v in &mut t {
            *v = parse_usize(next("tet vertex")?)?;
        }
        let s = next("tag")?;
        tags.push(s.parse::<i32>().map_err(|e| MeshError::Parse(format!("{s}: {e}")))?);
        tets.push(t);
    }
    build_mesh(verts, tets, Some(tags))
}

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", mesh.n_vertices(), mesh.n_tets())?;
    for p in mesh.vertices() {
        writeln!(w, "{:?} {:?} {:?}", p[0], p[1], p[2])?;
    }
    for (t, tet) in mesh.tets().iter().enumerate() {
        writeln!(w, "{} {} {} {} {}", tet[0], tet[1], tet[2], tet[3], mesh.tag(t))?;
    }
    Ok(())
}

/// VTK legacy ASCII unstructured grid with optional per-tet scalar fields.
pub fn write_vtk<W: Write>(mesh: &Mesh, cell_data: &[(&str, &[f64])], mut w: W) -> std::io::Result<()> {
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0\nhcurl mesh\nASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.n_vertices());
    for p in mesh.vertices() {
        let _ = writeln!(s, "{} {} {}", p[0], p[1], p[2]);
    }
    let nt = mesh.n_tets();
    let _ = writeln!(s, "CELLS {} {}", nt, 5 * nt);
    for t in mesh.tets() {
        let _ = writeln!(s, "4 {} {} {} {}", t[0], t[1], t[2], t[3]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        let _ = writeln!(s, "10");
    }
    let _ = writeln!(s, "CELL_DATA {nt}\nSCALARS subdomain int 1\nLOOKUP_TABLE default");
    for t in 0..nt {
        let _ = writeln!(s, "{}", mesh.tag(t));
    }
    for (name, values) in cell_data {
        assert_eq!(values.len(), nt, "cell field {name} has the wrong length");
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in *values {
            let _ = writeln!(s, "{v:e}");
        }
    }
    w.write_all(s.as_bytes())
}
