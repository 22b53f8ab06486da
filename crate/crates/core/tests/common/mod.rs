#![allow(clippy::needless_range_loop)]
#![allow(dead_code)]

use dfvem::fields::{FnScalarField, FnVectorField, PolyVectorField};
use dfvem::poly::{pi3, VecPoly};
use dfvem::{Mat3, Vec3};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Gauss-Legendre nodes and weights on `[0, 1]` by Newton iteration on the
/// Legendre polynomial (independent of the library quadrature).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for i in 0..n {
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, t);
            for j in 2..=n {
                let p2 = ((2 * j - 1) as f64 * t * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { t } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (t * pn - pm) / (t * t - 1.0);
            let dt = pn / dp;
            t -= dt;
            if dt.abs() < 1e-16 {
                break;
            }
        }
        x.push(0.5 * (1.0 - t));
        w.push(1.0 / ((1.0 - t * t) * dp * dp));
    }
    (x, w)
}

/// Tensor Gauss-Legendre integral over the box `[lo, hi]`.
pub fn box_integral(lo: Vec3, hi: Vec3, n: usize, f: impl Fn(&Vec3) -> f64) -> f64 {
    let (x, w) = gauss_legendre(n);
    let d = hi - lo;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let p = Vec3::new(lo.x + d.x * x[i], lo.y + d.y * x[j], lo.z + d.z * x[k]);
                s += w[i] * w[j] * w[k] * f(&p);
            }
        }
    }
    s * d.x * d.y * d.z
}

pub fn unit_box_integral(n: usize, f: impl Fn(&Vec3) -> f64) -> f64 {
    box_integral(Vec3::zeros(), Vec3::new(1.0, 1.0, 1.0), n, f)
}

pub fn random_poly(rng: &mut ChaCha8Rng, degree: usize) -> VecPoly {
    VecPoly {
        degree,
        coef: (0..3 * pi3(degree as i64))
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect(),
    }
}

pub fn random_field(
    rng: &mut ChaCha8Rng,
    degree: usize,
    center: Vec3,
    scale: f64,
) -> PolyVectorField {
    PolyVectorField {
        center,
        scale,
        poly: random_poly(rng, degree),
    }
}

/// Projective map `x -> (A x + b) / (c·x + d)`; maps planes to planes.
pub fn projective(a: Mat3, b: Vec3, c: Vec3, d: f64) -> impl Fn(&Vec3) -> Vec3 {
    move |x| (a * x + b) / (c.dot(x) + d)
}

/// A divergence-free polynomial velocity of degree `k` (2 or 3), its
/// Laplacian, and an affine pressure with zero mean on the unit cube.
pub type VecFn = Box<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;

pub fn patch_fields(k: usize) -> (FnVectorField, VecFn, FnScalarField) {
    let cubic = if k >= 3 { 1.0 } else { 0.0 };
    let u = FnVectorField::new(
        move |x| {
            Vec3::new(
                x.y * x.z + x.x * x.x + cubic * x.y.powi(3),
                -2.0 * x.x * x.y + x.z * x.z + cubic * x.z.powi(3),
                x.y * x.y + cubic * x.x.powi(3),
            )
        },
        move |x| {
            Mat3::new(
                2.0 * x.x,
                x.z + 3.0 * cubic * x.y * x.y,
                x.y,
                -2.0 * x.y,
                -2.0 * x.x,
                2.0 * x.z + 3.0 * cubic * x.z * x.z,
                3.0 * cubic * x.x * x.x,
                2.0 * x.y,
                0.0,
            )
        },
    );
    let lap = Box::new(move |x: &Vec3| {
        Vec3::new(
            2.0 + 6.0 * cubic * x.y,
            2.0 + 6.0 * cubic * x.z,
            2.0 + 6.0 * cubic * x.x,
        )
    });
    let p = FnScalarField::new(
        |x| (x.x - 0.5) + 2.0 * (x.y - 0.5) - 3.0 * (x.z - 0.5),
        |_| Vec3::new(1.0, 2.0, -3.0),
    );
    (u, lap, p)
}

/// Worst polynomial-reproduction error over every projector of every cell
/// and face of `mesh` at degree `k`, and the worst `Π^D` idempotency defect.
pub fn projector_errors(
    mesh: &dfvem::mesh::PolyMesh,
    k: usize,
    rng: &mut ChaCha8Rng,
) -> (f64, f64) {
    use dfvem::dofs::{interpolate_velocity, DofMapV};
    use dfvem::poly::{diff3, eval2, pi2};
    use dfvem::projectors::Projections;
    use nalgebra::DVector;

    let dmap = DofMapV::new(mesh, k).unwrap();
    let proj = Projections::build(mesh, &dmap).unwrap();
    let mut err = 0.0f64;
    let mut idem = 0.0f64;
    for fp in &proj.faces {
        let c = DVector::from_fn(pi2(k as i64), |_, _| rng.gen_range(-1.0..1.0));
        // vertex rows of the DoF matrix are plain point values
        let fg = &mesh.geom.faces[fp.face];
        for (i, &v) in mesh.faces[fp.face].vertices.iter().enumerate() {
            let m = eval2(k, fg.local(&mesh.vertices[v]));
            for a in 0..c.len() {
                err = err.max((fp.dmat[(i, a)] - m[a]).abs());
            }
        }
        let v = &fp.dmat * &c;
        err = err.max((&fp.pi_nabla * &v - &c).amax());
        err = err.max((&fp.pi_d * &v - &c).amax());
        let mut c1 = DVector::zeros(pi2(k as i64 + 1));
        c1.rows_mut(0, c.len()).copy_from(&c);
        err = err.max((&fp.pi0 * &v - c1).amax());
        let p = &fp.dmat * &fp.pi_d;
        idem = idem.max((&p * &p - &p).amax());
    }
    for lp in &proj.cells {
        let field = random_field(rng, k, lp.barycenter, lp.diameter);
        let global = interpolate_velocity(mesh, &dmap, &field).unwrap();
        let v = DVector::from_vec(lp.layout.gather(&global));
        let q = DVector::from_vec(field.poly.coef.clone());
        for p in [&lp.pi_d, &lp.pi0, &lp.pi_nabla] {
            err = err.max((p * &v - &q).amax());
        }
        let pk = pi3(k as i64);
        let pkm = pi3(k as i64 - 1);
        let mut g = DVector::zeros(9 * pkm);
        for i in 0..3 {
            for j in 0..3 {
                for b in 0..pk {
                    if let Some((f, d)) = diff3(b, j) {
                        g[(3 * i + j) * pkm + d] += q[i * pk + b] * f / lp.diameter;
                    }
                }
            }
        }
        // gradient coefficients carry a 1/h factor; compare in scaled form
        err = err.max((&lp.grad * &v - g).amax() * lp.diameter);
        let p = &lp.dmat * &lp.pi_d;
        idem = idem.max((&p * &p - &p).amax());
    }
    (err, idem)
}

/// Random test cells: affine cubes, projective hexahedra and tetrahedra near
/// the regular one, `n` of each kind.
pub fn random_cells(rng: &mut ChaCha8Rng, n: usize) -> Vec<dfvem::mesh::PolyMesh> {
    use dfvem::mesh::{hexahedron, tetrahedron};
    let mut out = Vec::new();
    let jitter = |rng: &mut ChaCha8Rng, s: f64| Vec3::from_fn(|_, _| rng.gen_range(-s..s));
    let cube: [Vec3; 8] =
        std::array::from_fn(|i| Vec3::new((i & 1) as f64, ((i >> 1) & 1) as f64, (i >> 2) as f64));
    for _ in 0..n {
        let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
        let a = (Mat3::identity() + Mat3::from_fn(|_, _| rng.gen_range(-0.3..0.3))) * scale;
        let b = jitter(rng, 5.0);
        out.push(hexahedron(cube.map(|x| a * x + b)).unwrap());
    }
    for _ in 0..n {
        let a = Mat3::identity() + Mat3::from_fn(|_, _| rng.gen_range(-0.2..0.2));
        let c = jitter(rng, 0.25);
        let map = projective(a, jitter(rng, 1.0), c, 1.0);
        out.push(hexahedron(cube.map(|x| map(&x))).unwrap());
    }
    let regular = [
        Vec3::new(1.0, 1.0, 1.0),
        Vec3::new(1.0, -1.0, -1.0),
        Vec3::new(-1.0, 1.0, -1.0),
        Vec3::new(-1.0, -1.0, 1.0),
    ];
    for _ in 0..n {
        let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
        let b = jitter(rng, 3.0);
        let p = regular.map(|v| (v + jitter(rng, 0.3)) * scale + b);
        out.push(tetrahedron(p).unwrap());
    }
    out
}
