use crate::error::{Result, VemError};
use crate::Vec3;

use super::{Cell, Face, PLANARITY_TOL};

#[derive(Clone, Debug)]
pub struct EdgeGeom {
    pub length: f64,
    /// Unit tangent along the canonical direction (lower to higher vertex).
    pub tangent: Vec3,
    pub midpoint: Vec3,
}

#[derive(Clone, Debug)]
pub struct FaceGeom {
    pub area: f64,
    pub centroid: Vec3,
    /// Unit normal given by the right-hand rule on the stored loop.
    pub normal: Vec3,
    /// In-plane frame: `tau1` along the first loop edge, `tau2 = normal x tau1`.
    pub tau1: Vec3,
    pub tau2: Vec3,
    pub diameter: f64,
    /// Largest distance of a vertex from the best-fit plane.
    pub planarity: f64,
    /// In-plane unit normal of each loop edge pointing out of the face.
    pub edge_normals: Vec<Vec3>,
}

impl FaceGeom {
    /// Scaled local coordinates `((x - x_f)·tau1, (x - x_f)·tau2) / h_f`.
    pub fn local(&self, x: &Vec3) -> [f64; 2] {
        let d = x - self.centroid;
        [
            d.dot(&self.tau1) / self.diameter,
            d.dot(&self.tau2) / self.diameter,
        ]
    }
}

#[derive(Clone, Debug)]
pub struct CellGeom {
    pub volume: f64,
    /// Same volume computed by summing the signed tetrahedra of the fan
    /// subdivision; used as a consistency check.
    pub volume_by_subdivision: f64,
    pub barycenter: Vec3,
    pub diameter: f64,
}

impl CellGeom {
    /// Scaled coordinates `(x - x_B) / h_P`.
    pub fn local(&self, x: &Vec3) -> Vec3 {
        (x - self.barycenter) / self.diameter
    }
}

#[derive(Clone, Debug, Default)]
pub struct GeomCache {
    pub edges: Vec<EdgeGeom>,
    pub faces: Vec<FaceGeom>,
    pub cells: Vec<CellGeom>,
}

fn diameter(points: impl Iterator<Item = Vec3> + Clone) -> f64 {
    let pts: Vec<Vec3> = points.collect();
    let mut d = 0.0f64;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max((pts[i] - pts[j]).norm());
        }
    }
    d
}

fn face_geom(fi: usize, verts: &[Vec3], face: &Face) -> Result<FaceGeom> {
    let pts: Vec<Vec3> = face.vertices.iter().map(|&v| verts[v]).collect();
    let n = pts.len();
    let avg = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / n as f64;
    // Newell area vector
    let mut area_vec = Vec3::zeros();
    for i in 0..n {
        area_vec += (pts[i] - avg).cross(&(pts[(i + 1) % n] - avg));
    }
    area_vec *= 0.5;
    let area = area_vec.norm();
    let h = diameter(pts.iter().copied());
    if !(area > 1e-14 * h * h) {
        return Err(VemError::DegenerateFace(fi));
    }
    let normal = area_vec / area;
    let mut centroid = Vec3::zeros();
    let mut total = 0.0;
    for i in 0..n {
        let a = pts[i];
        let b = pts[(i + 1) % n];
        let w = 0.5 * (a - avg).cross(&(b - avg)).dot(&normal);
        centroid += w * (avg + a + b) / 3.0;
        total += w;
    }
    centroid /= total;
    let planarity = pts
        .iter()
        .map(|p| (p - centroid).dot(&normal).abs())
        .fold(0.0, f64::max);
    if planarity > PLANARITY_TOL * h {
        return Err(VemError::NonPlanarFace {
            face: fi,
            deviation: planarity,
            tolerance: PLANARITY_TOL * h,
        });
    }
    let d = pts[1] - pts[0];
    let t = d - normal * d.dot(&normal);
    let tau1 = t.normalize();
    let tau2 = normal.cross(&tau1);
    let edge_normals = (0..n)
        .map(|i| (pts[(i + 1) % n] - pts[i]).normalize().cross(&normal))
        .collect();
    Ok(FaceGeom {
        area,
        centroid,
        normal,
        tau1,
        tau2,
        diameter: h,
        planarity,
        edge_normals,
    })
}

impl GeomCache {
    pub(super) fn build(
        verts: &[Vec3],
        edges: &[[usize; 2]],
        faces: &[Face],
        cells: &[Cell],
    ) -> Result<Self> {
        let edges_g = edges
            .iter()
            .map(|&[a, b]| {
                let d = verts[b] - verts[a];
                let length = d.norm();
                EdgeGeom {
                    length,
                    tangent: d / length,
                    midpoint: (verts[a] + verts[b]) * 0.5,
                }
            })
            .collect();
        let faces_g = faces
            .iter()
            .enumerate()
            .map(|(i, f)| face_geom(i, verts, f))
            .collect::<Result<Vec<_>>>()?;

        let mut cells_g = Vec::with_capacity(cells.len());
        for (ci, cell) in cells.iter().enumerate() {
            let mut volume = 0.0;
            for (&f, &s) in cell.faces.iter().zip(&cell.orientations) {
                let fg = &faces_g[f];
                volume += s as f64 * fg.area * fg.normal.dot(&fg.centroid);
            }
            volume /= 3.0;
            let o = cell
                .vertices
                .iter()
                .fold(Vec3::zeros(), |a, &v| a + verts[v])
                / cell.vertices.len() as f64;
            let mut sub = 0.0;
            let mut moment = Vec3::zeros();
            for (&f, &s) in cell.faces.iter().zip(&cell.orientations) {
                let fv = &faces[f].vertices;
                let c = faces_g[f].centroid;
                let n = fv.len();
                for i in 0..n {
                    let (mut a, mut b) = (verts[fv[i]], verts[fv[(i + 1) % n]]);
                    if s < 0 {
                        std::mem::swap(&mut a, &mut b);
                    }
                    let vol = (a - c).cross(&(b - c)).dot(&(c - o)) / 6.0;
                    sub += vol;
                    moment += vol * (o + c + a + b) / 4.0;
                }
            }
            if !(volume > 0.0) {
                return Err(VemError::InvertedCell { cell: ci, volume });
            }
            cells_g.push(CellGeom {
                volume,
                volume_by_subdivision: sub,
                barycenter: moment / sub,
                diameter: diameter(cell.vertices.iter().map(|&v| verts[v])),
            });
        }
        Ok(Self {
            edges: edges_g,
            faces: faces_g,
            cells: cells_g,
        })
    }
}
