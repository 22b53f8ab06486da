//! Analytic fields evaluated pointwise: exact solutions, loads, boundary data.

use crate::{Mat3, Vec3};

pub trait VectorField: Sync {
    fn value(&self, x: &Vec3) -> Vec3;

    /// Jacobian `J[(i, j)] = ∂u_i/∂x_j`.
    fn gradient(&self, x: &Vec3) -> Mat3;

    fn divergence(&self, x: &Vec3) -> f64 {
        self.gradient(x).trace()
    }
}

pub trait ScalarField: Sync {
    fn value(&self, x: &Vec3) -> f64;
    fn gradient(&self, x: &Vec3) -> Vec3;
}

type VecFn = Box<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;
type MatFn = Box<dyn Fn(&Vec3) -> Mat3 + Send + Sync>;

/// Vector field given by closures for the value and the Jacobian.
pub struct FnVectorField {
    value: VecFn,
    gradient: MatFn,
}

impl FnVectorField {
    pub fn new(
        value: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
        gradient: impl Fn(&Vec3) -> Mat3 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Box::new(value),
            gradient: Box::new(gradient),
        }
    }

    pub fn constant(c: Vec3) -> Self {
        Self::new(move |_| c, |_| Mat3::zeros())
    }

    /// `x -> a x + b`.
    pub fn affine(a: Mat3, b: Vec3) -> Self {
        Self::new(move |x| a * x + b, move |_| a)
    }

    /// Field with no meaningful derivative; only usable as a load or
    /// boundary datum.
    pub fn value_only(value: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        Self::new(value, |_| Mat3::from_element(f64::NAN))
    }
}

impl VectorField for FnVectorField {
    fn value(&self, x: &Vec3) -> Vec3 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vec3) -> Mat3 {
        (self.gradient)(x)
    }
}

pub struct FnScalarField {
    value: Box<dyn Fn(&Vec3) -> f64 + Send + Sync>,
    gradient: VecFn,
}

impl FnScalarField {
    pub fn new(
        value: impl Fn(&Vec3) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Box::new(value),
            gradient: Box::new(gradient),
        }
    }

    pub fn zero() -> Self {
        Self::new(|_| 0.0, |_| Vec3::zeros())
    }
}

impl ScalarField for FnScalarField {
    fn value(&self, x: &Vec3) -> f64 {
        (self.value)(x)
    }

    fn gradient(&self, x: &Vec3) -> Vec3 {
        (self.gradient)(x)
    }
}

/// Vector polynomial in the scaled monomials `((x - center) / scale)^b`.
#[derive(Clone, Debug)]
pub struct PolyVectorField {
    pub center: Vec3,
    pub scale: f64,
    pub poly: crate::poly::VecPoly,
}

impl VectorField for PolyVectorField {
    fn value(&self, x: &Vec3) -> Vec3 {
        let d = (x - self.center) / self.scale;
        let m = crate::poly::eval3(self.poly.degree, [d.x, d.y, d.z]);
        let s = self.poly.stride();
        Vec3::from_fn(|c, _| (0..s).map(|b| self.poly.coef[c * s + b] * m[b]).sum())
    }

    fn gradient(&self, x: &Vec3) -> Mat3 {
        let d = (x - self.center) / self.scale;
        let m = crate::poly::eval3(self.poly.degree, [d.x, d.y, d.z]);
        let s = self.poly.stride();
        let mut g = Mat3::zeros();
        for c in 0..3 {
            for b in 0..s {
                let coef = self.poly.coef[c * s + b];
                if coef == 0.0 {
                    continue;
                }
                for j in 0..3 {
                    if let Some((f, db)) = crate::poly::diff3(b, j) {
                        g[(c, j)] += coef * f * m[db];
                    }
                }
            }
        }
        g / self.scale
    }
}
