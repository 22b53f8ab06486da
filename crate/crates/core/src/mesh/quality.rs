use serde::Serialize;

use super::PolyMesh;

#[derive(Clone, Debug, Serialize)]
pub struct CellQuality {
    pub cell: usize,
    /// Shortest edge over cell diameter.
    pub edge_ratio: f64,
    /// Smallest face diameter over cell diameter.
    pub face_ratio: f64,
    /// Diameter of the largest ball centred at the barycenter that stays
    /// inside every face plane, over the cell diameter. A proxy for the
    /// star-shapedness radius, exact only for convex cells.
    pub ball_ratio: f64,
}

impl CellQuality {
    pub fn min_ratio(&self) -> f64 {
        self.edge_ratio.min(self.face_ratio).min(self.ball_ratio)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct QualityReport {
    pub cells: Vec<CellQuality>,
    /// Minimum of all ratios over all cells.
    pub rho_hat: f64,
    pub rho: f64,
    pub pass: bool,
    /// Cells with some ratio below `rho`.
    pub violations: Vec<usize>,
}

/// Shape-regularity diagnostics against threshold `rho`.
pub fn quality_check(mesh: &PolyMesh, rho: f64) -> QualityReport {
    let g = &mesh.geom;
    let cells: Vec<CellQuality> = mesh
        .cells
        .iter()
        .enumerate()
        .map(|(ci, cell)| {
            let cg = &g.cells[ci];
            let h = cg.diameter;
            let edge = cell
                .edges
                .iter()
                .map(|&e| g.edges[e].length)
                .fold(f64::INFINITY, f64::min);
            let face = cell
                .faces
                .iter()
                .map(|&f| g.faces[f].diameter)
                .fold(f64::INFINITY, f64::min);
            let radius = cell
                .faces
                .iter()
                .zip(&cell.orientations)
                .map(|(&f, &s)| {
                    let fg = &g.faces[f];
                    (fg.centroid - cg.barycenter).dot(&fg.normal) * s as f64
                })
                .fold(f64::INFINITY, f64::min)
                .max(0.0);
            CellQuality {
                cell: ci,
                edge_ratio: edge / h,
                face_ratio: face / h,
                ball_ratio: 2.0 * radius / h,
            }
        })
        .collect();
    let rho_hat = cells
        .iter()
        .map(CellQuality::min_ratio)
        .fold(f64::INFINITY, f64::min);
    let violations: Vec<usize> = cells
        .iter()
        .filter(|c| c.min_ratio() < rho)
        .map(|c| c.cell)
        .collect();
    QualityReport {
        pass: violations.is_empty(),
        cells,
        rho_hat,
        rho,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::super::{hexahedron, structured_cubes};
    use super::*;
    use crate::Vec3;

    #[test]
    fn unit_cube_thresholds() {
        let m = structured_cubes(1);
        let r = quality_check(&m, 0.5);
        assert!((r.cells[0].edge_ratio - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!((r.rho_hat - 1.0 / 3f64.sqrt()).abs() < 1e-14);
        assert!(r.pass);
        let r = quality_check(&m, 0.9);
        assert!(!r.pass);
        assert_eq!(r.violations, vec![0]);
    }

    #[test]
    fn sliver_edge_fails() {
        // a unit cube whose x=1 face is squeezed into a thin strip near y=0
        let eps = 1e-6;
        let mut p = [Vec3::zeros(); 8];
        for (c, q) in p.iter_mut().enumerate() {
            let (i, j, k) = ((c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64);
            let y = if i == 1.0 { j * eps } else { j };
            *q = Vec3::new(i, y, k);
        }
        let m = hexahedron(p).unwrap();
        let r = quality_check(&m, 0.1);
        let h = m.geom.cells[0].diameter;
        assert!((r.cells[0].edge_ratio - eps / h).abs() < 1e-12);
        assert!(!r.pass);
    }
}
