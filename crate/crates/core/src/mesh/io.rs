use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, VemError};
use crate::Vec3;

use super::generate::from_tetrahedra;
use super::PolyMesh;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    /// JSON document with vertices, face loops and signed 1-based face ids per cell.
    JsonPoly,
    /// `<base>.node` (x y z per line) and `<base>.ele` (four 0-based ids per line).
    TetraList,
}

#[derive(Serialize, Deserialize)]
struct MeshFile {
    vertices: Vec<[f64; 3]>,
    faces: Vec<Vec<usize>>,
    cells: Vec<Vec<i64>>,
}

pub fn mesh_from_json_str(text: &str) -> Result<PolyMesh> {
    let file: MeshFile =
        serde_json::from_str(text).map_err(|e| VemError::Parse(format!("mesh JSON: {e}")))?;
    let vertices = file
        .vertices
        .iter()
        .map(|v| Vec3::new(v[0], v[1], v[2]))
        .collect();
    let nf = file.faces.len();
    let mut cells = Vec::with_capacity(file.cells.len());
    for cell in &file.cells {
        let mut cf = Vec::with_capacity(cell.len());
        for &id in cell {
            if id == 0 {
                return Err(VemError::Parse(
                    "face id 0 in cell list (ids are 1-based)".into(),
                ));
            }
            let f = id.unsigned_abs() as usize - 1;
            if f >= nf {
                return Err(VemError::IndexOutOfRange {
                    what: "face",
                    index: f,
                    count: nf,
                });
            }
            cf.push((f, if id > 0 { 1 } else { -1 }));
        }
        cells.push(cf);
    }
    PolyMesh::from_raw(vertices, file.faces, cells)
}

pub fn mesh_to_json_string(mesh: &PolyMesh) -> String {
    let file = MeshFile {
        vertices: mesh.vertices.iter().map(|v| [v.x, v.y, v.z]).collect(),
        faces: mesh.faces.iter().map(|f| f.vertices.clone()).collect(),
        cells: mesh
            .cells
            .iter()
            .map(|c| {
                c.faces
                    .iter()
                    .zip(&c.orientations)
                    .map(|(&f, &s)| s as i64 * (f as i64 + 1))
                    .collect()
            })
            .collect(),
    };
    serde_json::to_string(&file).expect("mesh serialization cannot fail")
}

pub fn save_json(mesh: &PolyMesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_json_string(mesh))?;
    Ok(())
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_fields<T: std::str::FromStr>(
    line: &str,
    n: usize,
    what: &str,
    lineno: usize,
) -> Result<Vec<T>> {
    let vals: Vec<T> = line
        .split_whitespace()
        .map(|t| t.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| VemError::Parse(format!("{what} line {lineno}: cannot parse '{line}'")))?;
    if vals.len() != n {
        return Err(VemError::Parse(format!(
            "{what} line {lineno}: expected {n} values, found {}",
            vals.len()
        )));
    }
    Ok(vals)
}

pub fn load_tetra_list(node_path: &Path, element_path: &Path) -> Result<PolyMesh> {
    let nodes = std::fs::read_to_string(node_path)?;
    let elems = std::fs::read_to_string(element_path)?;
    let mut vertices = Vec::new();
    for (no, line) in data_lines(&nodes) {
        let v: Vec<f64> = parse_fields(line, 3, "node", no)?;
        vertices.push(Vec3::new(v[0], v[1], v[2]));
    }
    let mut tets = Vec::new();
    for (no, line) in data_lines(&elems) {
        let t: Vec<usize> = parse_fields(line, 4, "element", no)?;
        tets.push([t[0], t[1], t[2], t[3]]);
    }
    from_tetrahedra(vertices, &tets)
}

/// Loads a mesh. For [`MeshFormat::TetraList`], `path` may name either of the
/// two files or their common stem.
pub fn load_mesh(path: &Path, format: MeshFormat) -> Result<PolyMesh> {
    match format {
        MeshFormat::JsonPoly => mesh_from_json_str(&std::fs::read_to_string(path)?),
        MeshFormat::TetraList => {
            let stem: PathBuf = match path.extension().and_then(|e| e.to_str()) {
                Some("node") | Some("ele") => path.with_extension(""),
                _ => path.to_path_buf(),
            };
            let mut node = stem.clone().into_os_string();
            node.push(".node");
            let mut ele = stem.into_os_string();
            ele.push(".ele");
            load_tetra_list(Path::new(&node), Path::new(&ele))
        }
    }
}
