//! HP¹ in the affine chart `x ↦ (x, 1)ᵀ H`: Möbius action, round 2-spheres,
//! and the induced metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qla::{m2_inverse, QMat2};
use crate::quat::Quaternion;

type Q = Quaternion;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum AffinePoint {
    Finite(Q),
    Infinity,
}

impl AffinePoint {
    pub fn finite(self) -> Option<Q> {
        match self {
            AffinePoint::Finite(q) => Some(q),
            AffinePoint::Infinity => None,
        }
    }
}

/// Oriented round 2-sphere, stored as an endomorphism with `S² = −I`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sphere2 {
    pub s: QMat2,
}

pub const SPHERE_TOL: f64 = 1e-9;

impl Sphere2 {
    pub fn new(s: QMat2) -> Result<Sphere2> {
        let defect = (s * s + QMat2::IDENTITY).max_abs();
        if defect > SPHERE_TOL * s.max_abs().powi(2).max(1.0) {
            return Err(Error::Constraint { what: "S^2 = -I", defect });
        }
        Ok(Sphere2 { s })
    }

    /// Same point set, opposite orientation.
    pub fn reversed(&self) -> Sphere2 {
        Sphere2 { s: -self.s }
    }
}

/// `(a p + b)(c p + d)⁻¹` with the usual conventions at ∞.
pub fn moebius_apply(g: &QMat2, p: AffinePoint) -> Result<AffinePoint> {
    m2_inverse(g)?;
    let scale = g.max_abs();
    let [a, b, c, d] = g.entries();
    Ok(match p {
        AffinePoint::Finite(x) => {
            let den = c * x + d;
            if den.norm() <= 1e-14 * scale * (1.0 + x.norm()) {
                AffinePoint::Infinity
            } else {
                AffinePoint::Finite((a * x + b) * den.inv())
            }
        }
        AffinePoint::Infinity => {
            if c.norm() <= 1e-14 * scale {
                AffinePoint::Infinity
            } else {
                AffinePoint::Finite(a * c.inv())
            }
        }
    })
}

/// The affine 2-plane `{x : N x + x R = H}` together with ∞, as
/// `S = [[N, −H], [0, −R]]`. Needs `N² = R² = −1` and `N H = H R`.
pub fn sphere_encode(n: Q, r: Q, h: Q) -> Result<Sphere2> {
    let tol = SPHERE_TOL * (1.0 + h.norm());
    for (what, defect) in [
        ("N^2 = -1", (n * n + Q::ONE).norm()),
        ("R^2 = -1", (r * r + Q::ONE).norm()),
        ("N H = H R", (n * h - h * r).norm()),
    ] {
        if defect > tol {
            return Err(Error::Constraint { what, defect });
        }
    }
    Sphere2::new(QMat2::new(n, -h, Q::ZERO, -r))
}

/// Incidence of `p` with the fixed-line set of `S`.
/// `tol` is relative; the residual is compared against `tol (1 + |p|²)`.
pub fn sphere_contains(s: &Sphere2, p: AffinePoint, tol: f64) -> (bool, f64) {
    let [a, b, c, d] = s.s.entries();
    match p {
        AffinePoint::Finite(x) => {
            let residual = (a * x + b - x * (c * x + d)).norm();
            let scale = s.s.max_abs().max(1.0) * (1.0 + x.norm_sqr());
            (residual <= tol * scale, residual)
        }
        AffinePoint::Infinity => {
            let residual = c.norm();
            (residual <= tol * s.s.max_abs().max(1.0), residual)
        }
    }
}

/// Default relative incidence tolerance.
pub const INCIDENCE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    FubiniStudy,
    Hyperbolic,
}

pub fn induced_metric(kind: MetricKind, x: Q, v: Q, w: Q) -> Result<f64> {
    let vw = v.dot(w);
    match kind {
        MetricKind::FubiniStudy => Ok(vw / (1.0 + x.norm_sqr()).powi(2)),
        MetricKind::Hyperbolic => {
            if x.w == 0.0 {
                return Err(Error::Boundary);
            }
            Ok(vw / (2.0 * x.w).powi(2))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Q = Q::I;
    const J: Q = Q::J;
    const K: Q = Q::K;

    #[test]
    fn moebius_examples() {
        let p = AffinePoint::Finite(Q::new(0.2, 1.0, -0.5, 0.3));
        assert_eq!(moebius_apply(&QMat2::IDENTITY, p).unwrap(), p);
        let b = Q::new(1.0, 2.0, 3.0, 4.0);
        let t = moebius_apply(&QMat2::affine_frame(b), p).unwrap().finite().unwrap();
        assert!((t - (p.finite().unwrap() + b)).norm() < 1e-15);
        let inv = QMat2::new(Q::ZERO, Q::ONE, Q::ONE, Q::ZERO);
        assert_eq!(moebius_apply(&inv, AffinePoint::Finite(Q::ZERO)).unwrap(), AffinePoint::Infinity);
        assert_eq!(moebius_apply(&inv, AffinePoint::Infinity).unwrap(), AffinePoint::Finite(Q::ZERO));
        assert!(moebius_apply(&QMat2::ZERO, p).is_err());
    }

    #[test]
    fn encode_examples() {
        let s = sphere_encode(I, -I, Q::ZERO).unwrap();
        assert!(sphere_contains(&s, AffinePoint::Finite(Q::new(0.3, -2.0, 0.0, 0.0)), INCIDENCE_TOL).0);
        assert!(sphere_contains(&s, AffinePoint::Infinity, INCIDENCE_TOL).0);
        let (inc, res) = sphere_contains(&s, AffinePoint::Finite(J), INCIDENCE_TOL);
        assert!(!inc);
        assert!((res - 2.0).abs() < 1e-15);
        let s = sphere_encode(K, K, Q::ZERO).unwrap();
        assert!(sphere_contains(&s, AffinePoint::Finite(I * 0.4 + J * 1.5), INCIDENCE_TOL).0);
        assert!(!sphere_contains(&s, AffinePoint::Finite(Q::ONE), INCIDENCE_TOL).0);
        // reversed orientation, same point set
        let r = s.reversed();
        assert!(sphere_contains(&r, AffinePoint::Finite(I * 0.4 + J * 1.5), INCIDENCE_TOL).0);
        // a plane off the origin: N x + x R = H with N = i, R = -i, H = 2k
        let s = sphere_encode(I, -I, K * 2.0).unwrap();
        assert!(sphere_contains(&s, AffinePoint::Finite(Q::new(0.7, 0.1, 1.0, 0.0)), INCIDENCE_TOL).0);
        assert!(matches!(sphere_encode(I, -I, Q::ONE), Err(Error::Constraint { .. })));
        assert!(matches!(sphere_encode(Q::ONE, I, Q::ZERO), Err(Error::Constraint { .. })));
    }

    #[test]
    fn diag_sphere_is_complex_line() {
        let s = Sphere2::new(QMat2::diag(I, I)).unwrap();
        assert!(sphere_contains(&s, AffinePoint::Finite(Q::new(1.5, -0.2, 0.0, 0.0)), INCIDENCE_TOL).0);
        assert!(!sphere_contains(&s, AffinePoint::Finite(J), INCIDENCE_TOL).0);
    }

    #[test]
    fn metric_examples() {
        let (v, w) = (Q::new(1.0, 2.0, 0.0, 0.5), Q::new(0.5, -1.0, 3.0, 2.0));
        let vw = v.dot(w);
        assert_eq!(induced_metric(MetricKind::FubiniStudy, Q::ZERO, v, w).unwrap(), vw);
        assert!((induced_metric(MetricKind::FubiniStudy, J, v, w).unwrap() - vw / 4.0).abs() < 1e-15);
        assert_eq!(induced_metric(MetricKind::Hyperbolic, Q::real(0.5), v, w).unwrap(), vw);
        assert_eq!(induced_metric(MetricKind::Hyperbolic, I, v, w), Err(Error::Boundary));
    }
}
