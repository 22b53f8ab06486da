use crate::error::{Result, VemError};
use crate::{Mat3, Vec3};

use super::PolyMesh;

/// Face loops of a hexahedron with vertices indexed `v[i + 2j + 4k]`, each
/// counterclockwise seen from outside.
const HEX_LOOPS: [[usize; 4]; 6] = [
    [0, 2, 3, 1],
    [4, 5, 7, 6],
    [0, 1, 5, 4],
    [2, 6, 7, 3],
    [0, 4, 6, 2],
    [1, 3, 7, 5],
];

/// Outward face loops of a positively oriented tetrahedron `(a, b, c, d)`.
fn tet_loops(t: [usize; 4]) -> Vec<Vec<usize>> {
    let [a, b, c, d] = t;
    vec![vec![a, c, b], vec![a, b, d], vec![b, c, d], vec![a, d, c]]
}

fn tet_signed_volume(p: &[Vec3], t: [usize; 4]) -> f64 {
    let [a, b, c, d] = t;
    (p[b] - p[a]).cross(&(p[c] - p[a])).dot(&(p[d] - p[a])) / 6.0
}

/// Uniform partition of `[0,1]^3` into `n^3` cubes.
pub fn structured_cubes(n: usize) -> PolyMesh {
    assert!(n >= 1, "structured_cubes needs n >= 1");
    structured_box([n, n, n], [1.0, 1.0, 1.0], |_, _, _| true)
        .expect("structured cube mesh is valid")
}

/// Box `[0,lx]x[0,ly]x[0,lz]` split into `nx*ny*nz` bricks, keeping only the
/// bricks for which `keep(i, j, k)` holds. Unused vertices are dropped.
pub fn structured_box(
    n: [usize; 3],
    extent: [f64; 3],
    keep: impl Fn(usize, usize, usize) -> bool,
) -> Result<PolyMesh> {
    let [nx, ny, nz] = n;
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(VemError::InvalidMesh(
            "box subdivision must be positive".into(),
        ));
    }
    let vid = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut used = vec![usize::MAX; (nx + 1) * (ny + 1) * (nz + 1)];
    let mut vertices = Vec::new();
    let mut cells = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if !keep(i, j, k) {
                    continue;
                }
                let mut local = [0usize; 8];
                for (c, slot) in local.iter_mut().enumerate() {
                    let (a, b, d) = (i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                    let g = vid(a, b, d);
                    if used[g] == usize::MAX {
                        used[g] = vertices.len();
                        vertices.push(Vec3::new(
                            extent[0] * a as f64 / nx as f64,
                            extent[1] * b as f64 / ny as f64,
                            extent[2] * d as f64 / nz as f64,
                        ));
                    }
                    *slot = used[g];
                }
                cells.push(
                    HEX_LOOPS
                        .iter()
                        .map(|lp| lp.iter().map(|&c| local[c]).collect())
                        .collect(),
                );
            }
        }
    }
    if cells.is_empty() {
        return Err(VemError::InvalidMesh("no cells kept".into()));
    }
    PolyMesh::from_cell_loops(vertices, cells)
}

/// Each cube of the `n^3` structured mesh split into six tetrahedra around
/// its main diagonal.
pub fn kuhn_tetrahedra(n: usize) -> PolyMesh {
    assert!(n >= 1, "kuhn_tetrahedra needs n >= 1");
    let vid = |i: usize, j: usize, k: usize| i + (n + 1) * (j + (n + 1) * k);
    let mut vertices = Vec::with_capacity((n + 1).pow(3));
    for k in 0..=n {
        for j in 0..=n {
            for i in 0..=n {
                vertices.push(Vec3::new(
                    i as f64 / n as f64,
                    j as f64 / n as f64,
                    k as f64 / n as f64,
                ));
            }
        }
    }
    const PATHS: [[usize; 4]; 6] = [
        [0, 1, 3, 7],
        [0, 1, 5, 7],
        [0, 2, 3, 7],
        [0, 2, 6, 7],
        [0, 4, 5, 7],
        [0, 4, 6, 7],
    ];
    let mut tets = Vec::with_capacity(6 * n.pow(3));
    for k in 0..n {
        for j in 0..n {
            for i in 0..n {
                let corner = |c: usize| vid(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
                for p in PATHS {
                    tets.push(p.map(corner));
                }
            }
        }
    }
    from_tetrahedra(vertices, &tets).expect("Kuhn mesh is valid")
}

/// Mesh from a tetrahedron list; each tetrahedron may be given in either
/// orientation.
pub fn from_tetrahedra(vertices: Vec<Vec3>, tets: &[[usize; 4]]) -> Result<PolyMesh> {
    let mut cells = Vec::with_capacity(tets.len());
    for (ti, &t) in tets.iter().enumerate() {
        for &v in &t {
            if v >= vertices.len() {
                return Err(VemError::IndexOutOfRange {
                    what: "vertex",
                    index: v,
                    count: vertices.len(),
                });
            }
        }
        let vol = tet_signed_volume(&vertices, t);
        let t = if vol > 0.0 {
            t
        } else if vol < 0.0 {
            [t[0], t[2], t[1], t[3]]
        } else {
            return Err(VemError::InvertedCell {
                cell: ti,
                volume: vol,
            });
        };
        cells.push(tet_loops(t));
    }
    PolyMesh::from_cell_loops(vertices, cells)
}

pub fn tetrahedron(p: [Vec3; 4]) -> Result<PolyMesh> {
    from_tetrahedra(p.to_vec(), &[[0, 1, 2, 3]])
}

/// Single hexahedral cell from its corners `v[i + 2j + 4k]`. Faces must be planar.
pub fn hexahedron(p: [Vec3; 8]) -> Result<PolyMesh> {
    let cells = vec![HEX_LOOPS.iter().map(|l| l.to_vec()).collect()];
    PolyMesh::from_cell_loops(p.to_vec(), cells)
}

/// Single convex cell `{x : n_i·x <= d_i}`. Vertices are the feasible triple
/// intersections of the planes; each plane contributing at least three
/// vertices becomes a face. Planes must be in general position.
pub fn convex_cell(planes: &[(Vec3, f64)]) -> Result<PolyMesh> {
    let m = planes.len();
    let scale = planes.iter().map(|p| p.1.abs()).fold(1.0, f64::max);
    let tol = 1e-10 * scale;
    let mut vertices: Vec<Vec3> = Vec::new();
    for a in 0..m {
        for b in a + 1..m {
            for c in b + 1..m {
                let mat = Mat3::from_rows(&[
                    planes[a].0.transpose(),
                    planes[b].0.transpose(),
                    planes[c].0.transpose(),
                ]);
                let Some(inv) = mat.try_inverse() else {
                    continue;
                };
                let x = inv * Vec3::new(planes[a].1, planes[b].1, planes[c].1);
                if planes.iter().all(|(n, d)| n.dot(&x) <= d + tol)
                    && !vertices.iter().any(|v| (v - x).norm() <= 1e-9 * scale)
                {
                    vertices.push(x);
                }
            }
        }
    }
    let mut loops = Vec::new();
    for (n, d) in planes {
        let on: Vec<usize> = (0..vertices.len())
            .filter(|&i| (n.dot(&vertices[i]) - d).abs() <= tol)
            .collect();
        if on.len() < 3 {
            continue;
        }
        loops.push(sort_around(&vertices, on, &n.normalize()));
    }
    PolyMesh::from_cell_loops(vertices, vec![loops])
}

/// Orders coplanar points counterclockwise around `normal`.
fn sort_around(points: &[Vec3], mut ids: Vec<usize>, normal: &Vec3) -> Vec<usize> {
    let c = ids.iter().fold(Vec3::zeros(), |a, &i| a + points[i]) / ids.len() as f64;
    let e1 = (points[ids[0]] - c).normalize();
    let e2 = normal.cross(&e1);
    let angle = |i: usize| {
        let d = points[i] - c;
        d.dot(&e2).atan2(d.dot(&e1))
    };
    ids.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)));
    ids
}

/// The truncated octahedron (Voronoi cell of the body-centred cubic lattice),
/// scaled to fit `[0,1]^3`.
pub fn truncated_octahedron() -> PolyMesh {
    let mut planes = Vec::new();
    for axis in 0..3 {
        for s in [-1.0, 1.0] {
            let mut n = Vec3::zeros();
            n[axis] = s;
            planes.push((n, 2.0));
        }
    }
    for sx in [-1.0, 1.0] {
        for sy in [-1.0, 1.0] {
            for sz in [-1.0, 1.0] {
                planes.push((Vec3::new(sx, sy, sz), 3.0));
            }
        }
    }
    let cell = convex_cell(&planes).expect("truncated octahedron is valid");
    cell.mapped(|x| (x + Vec3::new(2.0, 2.0, 2.0)) / 4.0)
        .expect("scaling keeps validity")
}

/// Image of `mesh` under `x -> a x + b`; an orientation-reversing map is
/// rejected through the inverted-cell check.
pub fn affine_image(mesh: &PolyMesh, a: &Mat3, b: &Vec3) -> Result<PolyMesh> {
    mesh.mapped(|x| a * x + b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kuhn_counts() {
        let m = kuhn_tetrahedra(2);
        assert_eq!(m.num_cells(), 48);
        assert_eq!(m.counts().euler(), 1);
        assert!((m.volume() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn truncated_octahedron_shape() {
        let m = truncated_octahedron();
        let c = m.counts();
        assert_eq!((c.vertices, c.edges, c.faces), (24, 36, 14));
        // volume of the truncated octahedron with edge sqrt(2) is 8 sqrt(2) a^3 = 32, scaled by 1/64
        assert!((m.volume() - 0.5).abs() < 1e-13);
        assert!((m.geom.cells[0].barycenter - Vec3::new(0.5, 0.5, 0.5)).norm() < 1e-13);
    }

    #[test]
    fn torus_has_euler_zero() {
        let m = structured_box([3, 3, 1], [1.0, 1.0, 1.0], |i, j, _| !(i == 1 && j == 1)).unwrap();
        assert_eq!(m.num_cells(), 8);
        assert_eq!(m.counts().euler(), 0);
    }

    #[test]
    fn frustum_hexahedron() {
        let mut p = [Vec3::zeros(); 8];
        for (c, q) in p.iter_mut().enumerate() {
            let (i, j, k) = ((c & 1) as f64, ((c >> 1) & 1) as f64, ((c >> 2) & 1) as f64);
            let s = 1.0 - 0.4 * k;
            *q = Vec3::new(0.2 * k + s * i, 0.1 * k + s * j, k);
        }
        let m = hexahedron(p).unwrap();
        // frustum volume (A1 + A2 + sqrt(A1 A2)) / 3 with A1 = 1, A2 = 0.36
        let expected = (1.0 + 0.36 + 0.6) / 3.0;
        assert!((m.volume() - expected).abs() < 1e-14);
    }

    #[test]
    fn inverted_tetrahedron_is_reoriented() {
        let p = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let m = from_tetrahedra(p, &[[0, 1, 2, 3]]).unwrap();
        assert!((m.volume() - 1.0 / 6.0).abs() < 1e-15);
    }
}
