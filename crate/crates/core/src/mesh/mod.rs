//! Polyhedral meshes: topology, geometric caches, file formats, generators
//! and shape-regularity diagnostics.
//!
//! A mesh is built once from vertex coordinates, face loops and signed
//! cell-face incidences, validated, and is immutable afterwards. Edges are
//! derived from the face loops; the canonical edge direction runs from the
//! lower to the higher vertex index.

mod generate;
mod geometry;
mod io;
mod quality;

use std::collections::HashMap;

pub use generate::{
    affine_image, convex_cell, from_tetrahedra, hexahedron, kuhn_tetrahedra, structured_box,
    structured_cubes, tetrahedron, truncated_octahedron,
};
pub use geometry::{CellGeom, EdgeGeom, FaceGeom, GeomCache};
pub use io::{
    load_mesh, load_tetra_list, mesh_from_json_str, mesh_to_json_string, save_json, MeshFormat,
};
pub use quality::{quality_check, QualityReport};

use crate::error::{Result, VemError};
use crate::Vec3;

/// Relative planarity tolerance (fraction of the face diameter).
pub const PLANARITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct Face {
    /// Vertex loop; its right-hand normal is the face's reference normal.
    pub vertices: Vec<usize>,
    /// `edges[i]` joins `vertices[i]` and `vertices[i + 1]` (cyclically).
    pub edges: Vec<usize>,
    /// Incident cells with the orientation sign of this face in each cell.
    pub cells: Vec<(usize, i8)>,
}

#[derive(Clone, Debug)]
pub struct Cell {
    pub faces: Vec<usize>,
    /// `+1` when the face loop is counterclockwise seen from outside the cell.
    pub orientations: Vec<i8>,
    /// Sorted, deduplicated vertices of the cell.
    pub vertices: Vec<usize>,
    /// Sorted, deduplicated edges of the cell.
    pub edges: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct PolyMesh {
    pub vertices: Vec<Vec3>,
    pub edges: Vec<[usize; 2]>,
    pub faces: Vec<Face>,
    pub cells: Vec<Cell>,
    pub boundary_vertex: Vec<bool>,
    pub boundary_edge: Vec<bool>,
    pub boundary_face: Vec<bool>,
    pub geom: GeomCache,
}

/// Entity counts `(L_V, L_e, L_f, L_P)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EntityCounts {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub cells: usize,
}

impl EntityCounts {
    /// `L_V - L_e + L_f - L_P`.
    pub fn euler(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64 - self.cells as i64
    }
}

impl PolyMesh {
    /// Builds and validates a mesh from raw face loops and signed cell-face
    /// incidences (`(face, sign)` pairs).
    pub fn from_raw(
        vertices: Vec<Vec3>,
        face_loops: Vec<Vec<usize>>,
        cell_faces: Vec<Vec<(usize, i8)>>,
    ) -> Result<Self> {
        let nv = vertices.len();
        let nf = face_loops.len();
        for face in &face_loops {
            for &v in face {
                if v >= nv {
                    return Err(VemError::IndexOutOfRange {
                        what: "vertex",
                        index: v,
                        count: nv,
                    });
                }
            }
        }
        for cell in &cell_faces {
            for &(f, s) in cell {
                if f >= nf {
                    return Err(VemError::IndexOutOfRange {
                        what: "face",
                        index: f,
                        count: nf,
                    });
                }
                if s != 1 && s != -1 {
                    return Err(VemError::InvalidMesh(format!("orientation sign {s}")));
                }
            }
        }

        // edges
        let mut edge_index: HashMap<[usize; 2], usize> = HashMap::new();
        let mut edges: Vec<[usize; 2]> = Vec::new();
        let mut faces: Vec<Face> = Vec::with_capacity(nf);
        for (fi, lp) in face_loops.into_iter().enumerate() {
            let mut distinct = lp.clone();
            distinct.sort_unstable();
            distinct.dedup();
            if lp.len() < 3 || distinct.len() != lp.len() {
                return Err(VemError::InvalidMesh(format!(
                    "face {fi} needs at least 3 distinct vertices"
                )));
            }
            let n = lp.len();
            let mut fe = Vec::with_capacity(n);
            for i in 0..n {
                let (a, b) = (lp[i], lp[(i + 1) % n]);
                let key = if a < b { [a, b] } else { [b, a] };
                let id = *edge_index.entry(key).or_insert_with(|| {
                    edges.push(key);
                    edges.len() - 1
                });
                fe.push(id);
            }
            faces.push(Face {
                vertices: lp,
                edges: fe,
                cells: Vec::new(),
            });
        }

        let mut cells = Vec::with_capacity(cell_faces.len());
        for (ci, cf) in cell_faces.into_iter().enumerate() {
            if cf.len() < 4 {
                return Err(VemError::InvalidMesh(format!(
                    "cell {ci} has {} faces (at least 4 required)",
                    cf.len()
                )));
            }
            let mut vs = Vec::new();
            let mut es = Vec::new();
            let mut fs = Vec::with_capacity(cf.len());
            let mut os = Vec::with_capacity(cf.len());
            for &(f, s) in &cf {
                faces[f].cells.push((ci, s));
                vs.extend_from_slice(&faces[f].vertices);
                es.extend_from_slice(&faces[f].edges);
                fs.push(f);
                os.push(s);
            }
            vs.sort_unstable();
            vs.dedup();
            es.sort_unstable();
            es.dedup();
            cells.push(Cell {
                faces: fs,
                orientations: os,
                vertices: vs,
                edges: es,
            });
        }

        for (fi, face) in faces.iter().enumerate() {
            match face.cells.len() {
                1 => {}
                2 => {
                    if face.cells[0].1 == face.cells[1].1 {
                        return Err(VemError::InvalidMesh(format!(
                            "face {fi} has the same orientation in both incident cells"
                        )));
                    }
                }
                n => {
                    return Err(VemError::NonManifoldFace {
                        face: fi,
                        incident: n,
                    })
                }
            }
        }

        // every cell surface is closed: each directed edge use cancels
        for (ci, cell) in cells.iter().enumerate() {
            let mut uses: HashMap<usize, i32> = HashMap::new();
            for (&f, &s) in cell.faces.iter().zip(&cell.orientations) {
                let face = &faces[f];
                let n = face.vertices.len();
                for i in 0..n {
                    let a = face.vertices[i];
                    let b = face.vertices[(i + 1) % n];
                    let dir = if a < b { 1 } else { -1 };
                    *uses.entry(face.edges[i]).or_insert(0) += dir * s as i32;
                }
            }
            if uses.values().any(|&u| u != 0) {
                return Err(VemError::InvalidMesh(format!(
                    "cell {ci} surface is not closed or inconsistently oriented"
                )));
            }
        }

        let boundary_face: Vec<bool> = faces.iter().map(|f| f.cells.len() == 1).collect();
        let mut boundary_vertex = vec![false; nv];
        let mut boundary_edge = vec![false; edges.len()];
        for (face, &b) in faces.iter().zip(&boundary_face) {
            if b {
                for &v in &face.vertices {
                    boundary_vertex[v] = true;
                }
                for &e in &face.edges {
                    boundary_edge[e] = true;
                }
            }
        }

        let geom = GeomCache::build(&vertices, &edges, &faces, &cells)?;
        Ok(Self {
            vertices,
            edges,
            faces,
            cells,
            boundary_vertex,
            boundary_edge,
            boundary_face,
            geom,
        })
    }

    /// Builds a mesh from per-cell face loops that are each oriented
    /// counterclockwise seen from outside the cell. Shared faces are matched by
    /// vertex set; the first occurrence fixes the stored loop.
    pub fn from_cell_loops(vertices: Vec<Vec3>, cells: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let mut index: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut loops: Vec<Vec<usize>> = Vec::new();
        let mut cell_faces = Vec::with_capacity(cells.len());
        for cell in cells {
            let mut cf = Vec::with_capacity(cell.len());
            for lp in cell {
                let mut key = lp.clone();
                key.sort_unstable();
                match index.get(&key) {
                    Some(&f) => {
                        let s = loop_relative_orientation(&loops[f], &lp).ok_or_else(|| {
                            VemError::InvalidMesh(format!(
                                "face loops {:?} and {:?} share vertices but not their cyclic order",
                                loops[f], lp
                            ))
                        })?;
                        cf.push((f, s));
                    }
                    None => {
                        index.insert(key, loops.len());
                        cf.push((loops.len(), 1));
                        loops.push(lp);
                    }
                }
            }
            cell_faces.push(cf);
        }
        Self::from_raw(vertices, loops, cell_faces)
    }

    pub fn counts(&self) -> EntityCounts {
        EntityCounts {
            vertices: self.vertices.len(),
            edges: self.edges.len(),
            faces: self.faces.len(),
            cells: self.cells.len(),
        }
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    /// Unit outward normal of `face` with respect to a cell using it with `sign`.
    pub fn outward_normal(&self, face: usize, sign: i8) -> Vec3 {
        self.geom.faces[face].normal * sign as f64
    }

    /// Mesh size: arithmetic mean of the cell diameters.
    pub fn mesh_size(&self) -> f64 {
        let sum: f64 = self.geom.cells.iter().map(|c| c.diameter).sum();
        sum / self.cells.len() as f64
    }

    /// Total measure of the domain.
    pub fn volume(&self) -> f64 {
        self.geom.cells.iter().map(|c| c.volume).sum()
    }

    /// Applies `map` to every vertex and rebuilds the geometry.
    pub fn mapped(&self, map: impl Fn(&Vec3) -> Vec3) -> Result<Self> {
        let vertices = self.vertices.iter().map(map).collect();
        let loops = self.faces.iter().map(|f| f.vertices.clone()).collect();
        let cf = self
            .cells
            .iter()
            .map(|c| {
                c.faces
                    .iter()
                    .copied()
                    .zip(c.orientations.iter().copied())
                    .collect()
            })
            .collect();
        Self::from_raw(vertices, loops, cf)
    }
}

/// `Some(1)` if `b` is a cyclic rotation of `a`, `Some(-1)` if it is a
/// rotation of the reversed loop, `None` otherwise.
fn loop_relative_orientation(a: &[usize], b: &[usize]) -> Option<i8> {
    if a.len() != b.len() {
        return None;
    }
    let n = a.len();
    let start = b.iter().position(|&v| v == a[0])?;
    if (0..n).all(|i| a[i] == b[(start + i) % n]) {
        return Some(1);
    }
    if (0..n).all(|i| a[i] == b[(start + n - i) % n]) {
        return Some(-1);
    }
    None
}
