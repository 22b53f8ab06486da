//! Degree-of-freedom layouts for the velocity/pressure pair, dimension
//! formulas for the discrete Stokes complex and interpolation of analytic
//! fields.
//!
//! Velocity DoFs per entity, all scaled to be O(1) for O(1) fields:
//!
//! * vertices: the three components of the value;
//! * edges: the three components at the `k - 1` interior Gauss–Lobatto nodes,
//!   ordered along the canonical edge direction;
//! * faces: `(1/|f|) ∫_f (v·t) m^f_a` for `t = n_f, τ1, τ2` (in that block
//!   order) and `|a| <= k - 2`, using the face's own normal and frame;
//! * cells: `(1/|P|) ∫_P v·X_j` for the cross basis of `ξ ∧ [P_{k-3}]^3`, then
//!   `(h_P/|P|) ∫_P div(v) m_a` for `1 <= |a| <= k - 1`.
//!
//! Global numbering lists all vertex DoFs, then edges, faces and cells.

mod interp;

pub use interp::{interpolate_trace, interpolate_velocity, project_scalar};

use serde::Serialize;

use crate::error::{Result, VemError};
use crate::mesh::{EntityCounts, PolyMesh};
use crate::poly::{cross_basis, lobatto_interior_01, pi2, pi3};

pub const MIN_DEGREE: usize = 2;
pub const MAX_DEGREE: usize = 4;

pub fn check_degree(k: usize) -> Result<()> {
    if (MIN_DEGREE..=MAX_DEGREE).contains(&k) {
        Ok(())
    } else {
        Err(VemError::UnsupportedDegree(k))
    }
}

/// Number of `D4` moments per cell: `3 pi3(k-2) - pi3(k-1) + 1`.
pub fn num_d4(k: usize) -> usize {
    let k = k as i64;
    3 * pi3(k - 2) + 1 - pi3(k - 1)
}

/// Number of `D5` moments per cell: `pi3(k-1) - 1`.
pub fn num_d5(k: usize) -> usize {
    pi3(k as i64 - 1) - 1
}

#[derive(Clone, Debug)]
pub struct DofMapV {
    pub k: usize,
    pub counts: EntityCounts,
    /// `3 pi2(k-2)`: normal, first and second tangential moment blocks.
    pub per_face: usize,
    pub n_d4: usize,
    pub n_d5: usize,
    pub edge_offset: usize,
    pub face_offset: usize,
    pub cell_offset: usize,
    pub total: usize,
    /// Interior edge nodes on `[0, 1]` along the canonical direction.
    pub edge_points: Vec<f64>,
}

impl DofMapV {
    pub fn new(mesh: &PolyMesh, k: usize) -> Result<Self> {
        check_degree(k)?;
        let counts = mesh.counts();
        let per_face = 3 * pi2(k as i64 - 2);
        let (n_d4, n_d5) = (num_d4(k), num_d5(k));
        debug_assert_eq!(n_d4, cross_basis(k - 2).polys.len());
        let edge_offset = 3 * counts.vertices;
        let face_offset = edge_offset + 3 * (k - 1) * counts.edges;
        let cell_offset = face_offset + per_face * counts.faces;
        let total = cell_offset + (n_d4 + n_d5) * counts.cells;
        Ok(Self {
            k,
            counts,
            per_face,
            n_d4,
            n_d5,
            edge_offset,
            face_offset,
            cell_offset,
            total,
            edge_points: lobatto_interior_01(k),
        })
    }

    pub fn face_moments(&self) -> usize {
        self.per_face / 3
    }

    pub fn vertex(&self, v: usize, c: usize) -> usize {
        3 * v + c
    }

    pub fn edge(&self, e: usize, j: usize, c: usize) -> usize {
        self.edge_offset + 3 * ((self.k - 1) * e + j) + c
    }

    /// `block` 0 is the normal moment set, 1 and 2 the tangential ones.
    pub fn face(&self, f: usize, block: usize, a: usize) -> usize {
        self.face_offset + self.per_face * f + block * self.face_moments() + a
    }

    pub fn d4(&self, cell: usize, j: usize) -> usize {
        self.cell_offset + (self.n_d4 + self.n_d5) * cell + j
    }

    /// `a` is the monomial index, `1 <= a < pi3(k-1)`.
    pub fn d5(&self, cell: usize, a: usize) -> usize {
        self.cell_offset + (self.n_d4 + self.n_d5) * cell + self.n_d4 + a - 1
    }

    /// DoFs fixed by Dirichlet data on the faces flagged in `dirichlet_face`:
    /// values at vertices and edge nodes of those faces and their moments.
    pub fn dirichlet_mask(&self, mesh: &PolyMesh, dirichlet_face: &[bool]) -> Vec<bool> {
        let mut mask = vec![false; self.total];
        for (f, face) in mesh.faces.iter().enumerate() {
            if !dirichlet_face[f] {
                continue;
            }
            for &v in &face.vertices {
                for c in 0..3 {
                    mask[self.vertex(v, c)] = true;
                }
            }
            for &e in &face.edges {
                for j in 0..self.k - 1 {
                    for c in 0..3 {
                        mask[self.edge(e, j, c)] = true;
                    }
                }
            }
            for b in 0..3 {
                for a in 0..self.face_moments() {
                    mask[self.face(f, b, a)] = true;
                }
            }
        }
        mask
    }

    pub fn summary(&self) -> DofSummary {
        let c = self.counts;
        DofSummary {
            k: self.k,
            entities: c,
            per_vertex: 3,
            per_edge: 3 * (self.k - 1),
            per_face: self.per_face,
            per_cell_d4: self.n_d4,
            per_cell_d5: self.n_d5,
            d1: 3 * c.vertices,
            d2: 3 * (self.k - 1) * c.edges,
            d3: self.per_face * c.faces,
            d4: self.n_d4 * c.cells,
            d5: self.n_d5 * c.cells,
            velocity_total: self.total,
            pressure_total: pi3(self.k as i64 - 1) * c.cells,
        }
    }
}

/// Counts per DoF family and per entity.
#[derive(Clone, Debug, Serialize)]
pub struct DofSummary {
    pub k: usize,
    pub entities: EntityCounts,
    pub per_vertex: usize,
    pub per_edge: usize,
    pub per_face: usize,
    pub per_cell_d4: usize,
    pub per_cell_d5: usize,
    pub d1: usize,
    pub d2: usize,
    pub d3: usize,
    pub d4: usize,
    pub d5: usize,
    pub velocity_total: usize,
    pub pressure_total: usize,
}

/// Pressure unknowns: coefficients in the scaled monomials of degree
/// `<= k - 1` of each cell.
#[derive(Clone, Debug)]
pub struct DofMapQ {
    pub k: usize,
    pub n_cells: usize,
    pub per_cell: usize,
}

impl DofMapQ {
    pub fn new(mesh: &PolyMesh, k: usize) -> Result<Self> {
        check_degree(k)?;
        Ok(Self {
            k,
            n_cells: mesh.num_cells(),
            per_cell: pi3(k as i64 - 1),
        })
    }

    pub fn index(&self, cell: usize, a: usize) -> usize {
        cell * self.per_cell + a
    }

    pub fn total(&self) -> usize {
        self.n_cells * self.per_cell
    }
}

pub fn build_dof_maps(mesh: &PolyMesh, k: usize) -> Result<(DofMapV, DofMapQ)> {
    Ok((DofMapV::new(mesh, k)?, DofMapQ::new(mesh, k)?))
}

/// Local layout of the velocity DoFs of one cell.
#[derive(Clone, Debug)]
pub struct CellLayout {
    pub cell: usize,
    pub k: usize,
    /// Sorted global vertex ids.
    pub vertices: Vec<usize>,
    /// Sorted global edge ids.
    pub edges: Vec<usize>,
    pub faces: Vec<usize>,
    pub orientations: Vec<i8>,
    pub per_face: usize,
    pub edge_offset: usize,
    pub face_offset: usize,
    pub d4_offset: usize,
    pub d5_offset: usize,
    pub len: usize,
    /// Local-to-global DoF map.
    pub l2g: Vec<usize>,
}

impl CellLayout {
    pub fn new(mesh: &PolyMesh, dmap: &DofMapV, cell: usize) -> Self {
        let c = &mesh.cells[cell];
        let k = dmap.k;
        let edge_offset = 3 * c.vertices.len();
        let face_offset = edge_offset + 3 * (k - 1) * c.edges.len();
        let d4_offset = face_offset + dmap.per_face * c.faces.len();
        let d5_offset = d4_offset + dmap.n_d4;
        let len = d5_offset + dmap.n_d5;
        let mut l2g = Vec::with_capacity(len);
        for &v in &c.vertices {
            for comp in 0..3 {
                l2g.push(dmap.vertex(v, comp));
            }
        }
        for &e in &c.edges {
            for j in 0..k - 1 {
                for comp in 0..3 {
                    l2g.push(dmap.edge(e, j, comp));
                }
            }
        }
        for &f in &c.faces {
            for b in 0..3 {
                for a in 0..dmap.face_moments() {
                    l2g.push(dmap.face(f, b, a));
                }
            }
        }
        for j in 0..dmap.n_d4 {
            l2g.push(dmap.d4(cell, j));
        }
        for a in 1..=dmap.n_d5 {
            l2g.push(dmap.d5(cell, a));
        }
        debug_assert_eq!(l2g.len(), len);
        Self {
            cell,
            k,
            vertices: c.vertices.clone(),
            edges: c.edges.clone(),
            faces: c.faces.clone(),
            orientations: c.orientations.clone(),
            per_face: dmap.per_face,
            edge_offset,
            face_offset,
            d4_offset,
            d5_offset,
            len,
            l2g,
        }
    }

    pub fn vertex_slot(&self, v: usize) -> usize {
        self.vertices
            .binary_search(&v)
            .expect("vertex belongs to cell")
    }

    pub fn edge_slot(&self, e: usize) -> usize {
        self.edges.binary_search(&e).expect("edge belongs to cell")
    }

    pub fn vertex(&self, slot: usize, c: usize) -> usize {
        3 * slot + c
    }

    pub fn edge(&self, slot: usize, j: usize, c: usize) -> usize {
        self.edge_offset + 3 * ((self.k - 1) * slot + j) + c
    }

    pub fn face(&self, slot: usize, block: usize, a: usize) -> usize {
        self.face_offset + self.per_face * slot + block * (self.per_face / 3) + a
    }

    pub fn d4(&self, j: usize) -> usize {
        self.d4_offset + j
    }

    pub fn d5(&self, a: usize) -> usize {
        self.d5_offset + a - 1
    }

    /// Gathers the local DoF vector from a global one.
    pub fn gather(&self, global: &[f64]) -> Vec<f64> {
        self.l2g.iter().map(|&g| global[g]).collect()
    }
}

/// One scalar face DoF expressed as a combination of velocity DoFs.
pub type FaceDofRef = Vec<(usize, f64)>;

/// Scalar DoFs of the `c`-th Cartesian velocity component restricted to
/// `face`: loop vertex values, edge-node values (per loop edge, in loop
/// direction) and the `pi2(k-2)` scaled moments. `index(kind)` maps each
/// velocity DoF reference to a caller-chosen numbering (global or local).
pub fn face_scalar_dofs(
    mesh: &PolyMesh,
    k: usize,
    face: usize,
    c: usize,
    vertex: impl Fn(usize, usize) -> usize,
    edge: impl Fn(usize, usize, usize) -> usize,
    moment: impl Fn(usize, usize) -> usize,
) -> Vec<FaceDofRef> {
    let f = &mesh.faces[face];
    let fg = &mesh.geom.faces[face];
    let n = f.vertices.len();
    let mut out = Vec::with_capacity(n * k + pi2(k as i64 - 2));
    for &v in &f.vertices {
        out.push(vec![(vertex(v, c), 1.0)]);
    }
    for i in 0..n {
        let e = f.edges[i];
        let forward = mesh.edges[e][0] == f.vertices[i];
        for j in 0..k - 1 {
            let jc = if forward { j } else { k - 2 - j };
            out.push(vec![(edge(e, jc, c), 1.0)]);
        }
    }
    let frame = [fg.normal, fg.tau1, fg.tau2];
    for a in 0..pi2(k as i64 - 2) {
        out.push(
            (0..3)
                .filter(|&b| frame[b][c] != 0.0)
                .map(|b| (moment(b, a), frame[b][c]))
                .collect(),
        );
    }
    out
}

/// Dimensions of the discrete spaces of the Stokes complex
/// `R -> W_h -> Σ_h -> V_h -> Q_h -> 0` and of the discrete kernel `Z_h`.
#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub struct ComplexDims {
    pub k: usize,
    pub entities: EntityCounts,
    pub w: usize,
    pub sigma: usize,
    pub v: usize,
    pub q: usize,
    pub z: usize,
}

impl ComplexDims {
    /// `1 - dim W + dim Σ - dim V + dim Q`.
    pub fn alternating_sum(&self) -> i64 {
        1 - self.w as i64 + self.sigma as i64 - self.v as i64 + self.q as i64
    }

    /// `1 - L_V + L_e - L_f + L_P`, the value the alternating sum must take.
    pub fn topological_sum(&self) -> i64 {
        1 - self.entities.euler()
    }
}

pub fn complex_dims(mesh: &PolyMesh, k: usize) -> Result<ComplexDims> {
    check_degree(k)?;
    let c = mesh.counts();
    let ki = k as i64;
    let (lv, le, lf, lp) = (c.vertices, c.edges, c.faces, c.cells);
    let p2 = pi2(ki - 2);
    let p3 = pi3(ki - 2);
    let p3m = pi3(ki - 1);
    Ok(ComplexDims {
        k,
        entities: c,
        w: lv,
        sigma: 3 * lv + (3 * k - 2) * le + (3 * p2 - 1) * lf + (3 * p3 + 1 - p3m) * lp,
        v: 3 * lv + 3 * (k - 1) * le + 3 * p2 * lf + 3 * p3 * lp,
        q: p3m * lp,
        z: 3 * lv + 3 * (k - 1) * le + 3 * p2 * lf + 3 * p3 * lp - p3m * lp,
    })
}

/// Sizes of the reduced pair (no `D5` moments, piecewise constant pressure).
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ReducedCounts {
    pub velocity: usize,
    pub pressure: usize,
    /// Unknowns saved with respect to the full pair: `(2 pi3(k-1) - 2) L_P`.
    pub saving: usize,
}

pub fn reduced_counts(dmap: &DofMapV) -> ReducedCounts {
    let lp = dmap.counts.cells;
    let full = dmap.total + pi3(dmap.k as i64 - 1) * lp;
    let velocity = dmap.total - dmap.n_d5 * lp;
    let pressure = lp;
    ReducedCounts {
        velocity,
        pressure,
        saving: full - velocity - pressure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{structured_cubes, tetrahedron};
    use crate::Vec3;

    fn unit_tet() -> PolyMesh {
        tetrahedron([
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn local_dimensions() {
        let cube = structured_cubes(1);
        assert_eq!(DofMapV::new(&cube, 2).unwrap().total, 81);
        assert_eq!(DofMapQ::new(&cube, 2).unwrap().total(), 4);
        let m3 = DofMapV::new(&cube, 3).unwrap();
        assert_eq!(m3.total, 24 + 72 + 54 + 12);
        assert_eq!((m3.n_d4, m3.n_d5), (3, 9));
        assert_eq!(DofMapV::new(&unit_tet(), 2).unwrap().total, 45);
        assert!(matches!(
            DofMapV::new(&cube, 1),
            Err(VemError::UnsupportedDegree(1))
        ));
        assert!(DofMapV::new(&cube, 5).is_err());
    }

    #[test]
    fn cell_dofs_split_as_cross_plus_divergence() {
        for k in 2..=4 {
            assert_eq!(num_d4(k) + num_d5(k), 3 * pi3(k as i64 - 2));
        }
    }

    #[test]
    fn complex_dimensions() {
        let cube = structured_cubes(1);
        let d = complex_dims(&cube, 2).unwrap();
        assert_eq!((d.w, d.sigma, d.v, d.q), (8, 84, 81, 4));
        assert_eq!(d.alternating_sum(), 0);
        assert_eq!(complex_dims(&unit_tet(), 2).unwrap().z, 41);
        for n in 1..=3 {
            for k in 2..=4 {
                let d = complex_dims(&structured_cubes(n), k).unwrap();
                assert_eq!(d.alternating_sum(), d.topological_sum());
                assert_eq!(d.alternating_sum(), 0);
                assert_eq!(d.v - d.z, d.q);
            }
        }
    }

    #[test]
    fn global_count_matches_formula() {
        for k in 2..=4 {
            let m = structured_cubes(2);
            let dm = DofMapV::new(&m, k).unwrap();
            assert_eq!(dm.total, complex_dims(&m, k).unwrap().v);
            let r = reduced_counts(&dm);
            assert_eq!(r.saving, (2 * pi3(k as i64 - 1) - 2) * 8);
        }
    }

    #[test]
    fn cell_layouts_cover_global_dofs() {
        let m = structured_cubes(2);
        let dm = DofMapV::new(&m, 3).unwrap();
        let mut seen = vec![false; dm.total];
        for c in 0..m.num_cells() {
            let l = CellLayout::new(&m, &dm, c);
            assert_eq!(l.len, 3 * 8 + 3 * 2 * 12 + 3 * 3 * 6 + 12);
            for &g in &l.l2g {
                seen[g] = true;
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn dirichlet_mask_counts() {
        let m = structured_cubes(2);
        let dm = DofMapV::new(&m, 2).unwrap();
        let mask = dm.dirichlet_mask(&m, &m.boundary_face);
        let nb_v = m.boundary_vertex.iter().filter(|&&b| b).count();
        let nb_e = m.boundary_edge.iter().filter(|&&b| b).count();
        let nb_f = m.boundary_face.iter().filter(|&&b| b).count();
        assert_eq!(
            mask.iter().filter(|&&b| b).count(),
            3 * nb_v + 3 * nb_e + 3 * nb_f
        );
    }
}
