//! Closed-form conformal immersions whose jets are exact, obtained by
//! forward-mode second-order dual numbers.

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::SVector;
use num_dual::{hessian, Dual2Vec64, DualNum};
use serde::{Deserialize, Serialize};

use crate::qla::QMat2;
use crate::quat::Quaternion;
use crate::surface::Jet2;

type Q = Quaternion;

/// Quaternion over a generic dual number type.
#[derive(Clone, Debug)]
pub struct DQ<D> {
    pub w: D,
    pub x: D,
    pub y: D,
    pub z: D,
}

impl<D: DualNum<Primitive = f64>> DQ<D> {
    pub fn new(w: D, x: D, y: D, z: D) -> Self {
        DQ { w, x, y, z }
    }

    pub fn constant(q: Q) -> Self {
        DQ::new(D::from(q.w), D::from(q.x), D::from(q.y), D::from(q.z))
    }

    pub fn zero() -> Self {
        DQ::constant(Q::ZERO)
    }

    pub fn conj(&self) -> Self {
        DQ::new(self.w.clone(), -self.x.clone(), -self.y.clone(), -self.z.clone())
    }

    pub fn scale(&self, s: D) -> Self {
        DQ::new(self.w.clone() * s.clone(), self.x.clone() * s.clone(), self.y.clone() * s.clone(), self.z.clone() * s)
    }

    pub fn inv(&self) -> Self {
        let n2 = self.w.clone() * self.w.clone()
            + self.x.clone() * self.x.clone()
            + self.y.clone() * self.y.clone()
            + self.z.clone() * self.z.clone();
        self.conj().scale(n2.recip())
    }

    fn parts(self) -> [D; 4] {
        [self.w, self.x, self.y, self.z]
    }
}

impl<D: DualNum<Primitive = f64>> Add for DQ<D> {
    type Output = DQ<D>;
    fn add(self, o: DQ<D>) -> DQ<D> {
        DQ::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<D: DualNum<Primitive = f64>> Sub for DQ<D> {
    type Output = DQ<D>;
    fn sub(self, o: DQ<D>) -> DQ<D> {
        DQ::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<D: DualNum<Primitive = f64>> Neg for DQ<D> {
    type Output = DQ<D>;
    fn neg(self) -> DQ<D> {
        DQ::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl<D: DualNum<Primitive = f64>> Mul for DQ<D> {
    type Output = DQ<D>;
    fn mul(self, b: DQ<D>) -> DQ<D> {
        let a = self;
        let (aw, ax, ay, az) = (a.w, a.x, a.y, a.z);
        let (bw, bx, by, bz) = (b.w, b.x, b.y, b.z);
        DQ::new(
            aw.clone() * bw.clone() - ax.clone() * bx.clone() - ay.clone() * by.clone() - az.clone() * bz.clone(),
            aw.clone() * bx.clone() + ax.clone() * bw.clone() + ay.clone() * bz.clone() - az.clone() * by.clone(),
            aw.clone() * by.clone() - ax.clone() * bz.clone() + ay.clone() * bw.clone() + az.clone() * bx.clone(),
            aw * bz + ax * by - ay * bx + az * bw,
        )
    }
}

/// Closed-form catalog surfaces, plus Möbius images and conjugates of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnalyticSurface {
    /// `u + v i`
    Plane,
    /// Inverse stereographic chart of the sphere of the given radius in Im H.
    Sphere {
        radius: f64,
    },
    /// Mercator chart `((cos u i + sin u j)/cosh v + tanh v k)·radius`.
    SphereMercator {
        radius: f64,
    },
    /// `scale·(cosh v cos u i + cosh v sin u j + v k)`
    Catenoid {
        scale: f64,
    },
    Enneper,
    /// `z + g(z) j` with `z = u + v i`, `g(z) = Σ c_k z^k`, `c_k = [re, im]`.
    ComplexGraph {
        coeffs: Vec<[f64; 2]>,
    },
    /// Stereographic image of `(cos u, sin u, cos v, sin v)/√2` in Im H.
    CliffordTorus,
    /// `radius·(cos(u/radius) i + sin(u/radius) j) + v`
    CircularCylinder {
        radius: f64,
    },
    /// `(a f + b)(c f + d)⁻¹`
    Moebius {
        g: QMat2,
        inner: Box<AnalyticSurface>,
    },
    /// `f̄`
    Conjugate {
        inner: Box<AnalyticSurface>,
    },
}

fn c<D: DualNum<Primitive = f64>>(x: f64) -> D {
    D::from(x)
}

impl AnalyticSurface {
    pub fn eval<D: DualNum<Primitive = f64>>(&self, u: D, v: D) -> DQ<D> {
        use AnalyticSurface::*;
        match self {
            Plane => DQ::new(u, v, c(0.0), c(0.0)),
            Sphere { radius } => {
                let r2 = u.clone() * u.clone() + v.clone() * v.clone();
                let s = (r2.clone() + 1.0).recip() * *radius;
                DQ::new(c(0.0), u * 2.0, v * 2.0, -r2 + 1.0).scale(s)
            }
            SphereMercator { radius } => {
                let sech = v.cosh().recip();
                DQ::new(c(0.0), u.cos() * sech.clone(), u.sin() * sech, v.tanh()).scale(c(*radius))
            }
            Catenoid { scale } => {
                let ch = v.cosh();
                DQ::new(c(0.0), ch.clone() * u.cos(), ch * u.sin(), v).scale(c(*scale))
            }
            Enneper => {
                let u2 = u.clone() * u.clone();
                let v2 = v.clone() * v.clone();
                DQ::new(
                    c(0.0),
                    u.clone() - u.clone() * u2.clone() / 3.0 + u.clone() * v2.clone(),
                    -v.clone() - u2.clone() * v.clone() + v.clone() * v2.clone() / 3.0,
                    u2 - v2,
                )
            }
            ComplexGraph { coeffs } => {
                // Horner in complex arithmetic on (re, im) pairs
                let (mut gr, mut gi) = (c::<D>(0.0), c::<D>(0.0));
                for k in coeffs.iter().rev() {
                    let nr = gr.clone() * u.clone() - gi.clone() * v.clone() + k[0];
                    let ni = gr * v.clone() + gi * u.clone() + k[1];
                    gr = nr;
                    gi = ni;
                }
                DQ::new(u, v, gr, gi)
            }
            CliffordTorus => {
                let den = (-v.sin() + std::f64::consts::SQRT_2).recip();
                DQ::new(c(0.0), u.cos(), u.sin(), v.cos()).scale(den)
            }
            CircularCylinder { radius } => {
                let t = u / *radius;
                DQ::new(v, t.cos() * *radius, t.sin() * *radius, c(0.0))
            }
            Moebius { g, inner } => {
                let f = inner.eval(u, v);
                let [a, b, cc, d] = g.entries();
                let num = DQ::constant(a) * f.clone() + DQ::constant(b);
                let den = DQ::constant(cc) * f + DQ::constant(d);
                num * den.inv()
            }
            Conjugate { inner } => inner.eval(u, v).conj(),
        }
    }

    pub fn value(&self, u: f64, v: f64) -> Q {
        let q = self.eval(u, v);
        Q::new(q.w, q.x, q.y, q.z)
    }

    /// Exact value, gradient and Hessian at `(u, v)`.
    pub fn jet(&self, u: f64, v: f64) -> Jet2 {
        let x = SVector::<f64, 2>::new(u, v);
        let parts = hessian(|p: SVector<Dual2Vec64<nalgebra::Const<2>>, 2>| self.eval(p[0], p[1]).parts(), &x);
        let pick = |sel: &dyn Fn(&(f64, SVector<f64, 2>, nalgebra::Matrix2<f64>)) -> f64| {
            Q::new(sel(&parts[0]), sel(&parts[1]), sel(&parts[2]), sel(&parts[3]))
        };
        Jet2 {
            f: pick(&|p| p.0),
            fu: pick(&|p| p.1[0]),
            fv: pick(&|p| p.1[1]),
            fuu: pick(&|p| p.2[(0, 0)]),
            fuv: pick(&|p| p.2[(0, 1)]),
            fvv: pick(&|p| p.2[(1, 1)]),
        }
    }

    pub fn moebius(self, g: QMat2) -> AnalyticSurface {
        AnalyticSurface::Moebius { g, inner: Box::new(self) }
    }

    pub fn conjugate(self) -> AnalyticSurface {
        match self {
            AnalyticSurface::Conjugate { inner } => *inner,
            s => AnalyticSurface::Conjugate { inner: Box::new(s) },
        }
    }

    /// Does the image lie in Im H by construction?
    pub fn in_im_h(&self) -> bool {
        use AnalyticSurface::*;
        match self {
            Sphere { .. } | SphereMercator { .. } | Catenoid { .. } | Enneper | CliffordTorus => true,
            Conjugate { inner } => inner.in_im_h(),
            _ => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_jet(s: &AnalyticSurface, u: f64, v: f64) -> Jet2 {
        let h = 1e-4;
        let f = |a: f64, b: f64| s.value(a, b);
        Jet2 {
            f: f(u, v),
            fu: (f(u + h, v) - f(u - h, v)) / (2.0 * h),
            fv: (f(u, v + h) - f(u, v - h)) / (2.0 * h),
            fuu: (f(u + h, v) - f(u, v) * 2.0 + f(u - h, v)) / (h * h),
            fuv: (f(u + h, v + h) - f(u + h, v - h) - f(u - h, v + h) + f(u - h, v - h)) / (4.0 * h * h),
            fvv: (f(u, v + h) - f(u, v) * 2.0 + f(u, v - h)) / (h * h),
        }
    }

    #[test]
    fn dual_jets_match_finite_differences() {
        let surfaces = [
            AnalyticSurface::Plane,
            AnalyticSurface::Sphere { radius: 1.5 },
            AnalyticSurface::SphereMercator { radius: 1.0 },
            AnalyticSurface::Catenoid { scale: 1.0 },
            AnalyticSurface::Enneper,
            AnalyticSurface::ComplexGraph { coeffs: vec![[0.1, 0.2], [0.0, 0.0], [0.5, -0.3], [0.2, 0.0]] },
            AnalyticSurface::CliffordTorus,
            AnalyticSurface::CircularCylinder { radius: 2.0 },
            AnalyticSurface::Catenoid { scale: 1.0 }.moebius(QMat2::new(
                Q::ONE,
                Q::J,
                Q::new(0.1, 0.2, 0.0, 0.3),
                Q::new(2.0, 0.0, 0.5, 0.0),
            )),
            AnalyticSurface::Enneper.conjugate(),
        ];
        for s in &surfaces {
            let (u, v) = (0.37, -0.21);
            let a = s.jet(u, v);
            let b = fd_jet(s, u, v);
            let pairs = [(a.f, b.f), (a.fu, b.fu), (a.fv, b.fv), (a.fuu, b.fuu), (a.fuv, b.fuv), (a.fvv, b.fvv)];
            for (k, (x, y)) in pairs.into_iter().enumerate() {
                assert!((x - y).norm() < 1e-5 * (1.0 + x.norm()), "{s:?} component {k}: {x} vs {y}");
            }
        }
    }

    #[test]
    fn clifford_torus_is_conformal_with_flat_factor() {
        let s = AnalyticSurface::CliffordTorus;
        let j = s.jet(0.3, 1.1);
        assert!(j.fu.dot(j.fv).abs() < 1e-14);
        assert!((j.fu.norm() - j.fv.norm()).abs() < 1e-14);
    }
}
