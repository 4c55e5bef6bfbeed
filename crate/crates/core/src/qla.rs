//! Linear algebra on the right H-module H².

use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;

type Q = Quaternion;

/// Column vector of H². Scalars act from the right.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QVec2(pub Q, pub Q);

impl QVec2 {
    pub fn scale_right(self, lambda: Q) -> QVec2 {
        QVec2(self.0 * lambda, self.1 * lambda)
    }

    pub fn norm(self) -> f64 {
        (self.0.norm_sqr() + self.1.norm_sqr()).sqrt()
    }
}

impl Add for QVec2 {
    type Output = QVec2;
    fn add(self, o: QVec2) -> QVec2 {
        QVec2(self.0 + o.0, self.1 + o.1)
    }
}

impl Sub for QVec2 {
    type Output = QVec2;
    fn sub(self, o: QVec2) -> QVec2 {
        QVec2(self.0 - o.0, self.1 - o.1)
    }
}

/// 2×2 quaternionic matrix acting on [`QVec2`] from the left. Row-major.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QMat2(pub [[Q; 2]; 2]);

impl QMat2 {
    pub const IDENTITY: QMat2 = QMat2([[Q::ONE, Q::ZERO], [Q::ZERO, Q::ONE]]);
    pub const ZERO: QMat2 = QMat2([[Q::ZERO; 2]; 2]);

    pub fn new(a: Q, b: Q, c: Q, d: Q) -> QMat2 {
        QMat2([[a, b], [c, d]])
    }

    pub fn diag(a: Q, d: Q) -> QMat2 {
        QMat2::new(a, Q::ZERO, Q::ZERO, d)
    }

    /// `[[1, f], [0, 1]]`, the affine frame at `f`.
    pub fn affine_frame(f: Q) -> QMat2 {
        QMat2::new(Q::ONE, f, Q::ZERO, Q::ONE)
    }

    pub fn a(&self) -> Q {
        self.0[0][0]
    }
    pub fn b(&self) -> Q {
        self.0[0][1]
    }
    pub fn c(&self) -> Q {
        self.0[1][0]
    }
    pub fn d(&self) -> Q {
        self.0[1][1]
    }

    pub fn apply(&self, v: QVec2) -> QVec2 {
        let m = &self.0;
        QVec2(m[0][0] * v.0 + m[0][1] * v.1, m[1][0] * v.0 + m[1][1] * v.1)
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> QMat2 {
        let m = &self.0;
        QMat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    /// Largest entry norm.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// Frobenius norm over all 16 real coordinates.
    pub fn frobenius(&self) -> f64 {
        self.0.iter().flatten().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn entries(&self) -> [Q; 4] {
        [self.0[0][0], self.0[0][1], self.0[1][0], self.0[1][1]]
    }

    pub fn inverse(&self) -> Result<QMat2> {
        m2_inverse(self)
    }
}

impl Add for QMat2 {
    type Output = QMat2;
    fn add(self, o: QMat2) -> QMat2 {
        let (m, n) = (self.0, o.0);
        QMat2::new(m[0][0] + n[0][0], m[0][1] + n[0][1], m[1][0] + n[1][0], m[1][1] + n[1][1])
    }
}

impl Sub for QMat2 {
    type Output = QMat2;
    fn sub(self, o: QMat2) -> QMat2 {
        self + (-o)
    }
}

impl Neg for QMat2 {
    type Output = QMat2;
    fn neg(self) -> QMat2 {
        self * -1.0
    }
}

impl Mul for QMat2 {
    type Output = QMat2;
    fn mul(self, o: QMat2) -> QMat2 {
        let (m, n) = (self.0, o.0);
        let e = |i: usize, j: usize| m[i][0] * n[0][j] + m[i][1] * n[1][j];
        QMat2::new(e(0, 0), e(0, 1), e(1, 0), e(1, 1))
    }
}

impl Mul<f64> for QMat2 {
    type Output = QMat2;
    fn mul(self, s: f64) -> QMat2 {
        let m = self.0;
        QMat2::new(m[0][0] * s, m[0][1] * s, m[1][0] * s, m[1][1] * s)
    }
}

impl Mul<QVec2> for QMat2 {
    type Output = QVec2;
    fn mul(self, v: QVec2) -> QVec2 {
        self.apply(v)
    }
}

/// Pivots smaller than this times the matrix scale count as zero.
pub const PIVOT_FLOOR: f64 = 1e-12;

/// Inverse by quaternionic Gauss–Jordan elimination with largest-norm row pivoting.
pub fn m2_inverse(m: &QMat2) -> Result<QMat2> {
    let scale = m.max_abs();
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Singular { pivot: 0.0 });
    }
    let mut rows = [[m.0[0][0], m.0[0][1], Q::ONE, Q::ZERO], [m.0[1][0], m.0[1][1], Q::ZERO, Q::ONE]];
    if rows[1][0].norm() > rows[0][0].norm() {
        rows.swap(0, 1);
    }
    let p0 = rows[0][0];
    if p0.norm() <= PIVOT_FLOOR * scale {
        return Err(Error::Singular { pivot: p0.norm() });
    }
    let p0i = p0.inv();
    let r0: [Q; 4] = rows[0].map(|x| p0i * x);
    let c = rows[1][0];
    let r1: [Q; 4] = std::array::from_fn(|k| rows[1][k] - c * r0[k]);
    let p1 = r1[1];
    if p1.norm() <= PIVOT_FLOOR * scale {
        return Err(Error::Singular { pivot: p1.norm() });
    }
    let p1i = p1.inv();
    let r1: [Q; 4] = r1.map(|x| p1i * x);
    let b = r0[1];
    let r0: [Q; 4] = std::array::from_fn(|k| r0[k] - b * r1[k]);
    Ok(QMat2::new(r0[2], r0[3], r1[2], r1[3]))
}

/// `⟨A B⟩`: one eighth of the real trace of `A B` acting on H² ≅ R⁸.
pub fn trace_pair(a: &QMat2, b: &QMat2) -> f64 {
    let ab = *a * *b;
    0.5 * (ab.0[0][0].w + ab.0[1][1].w)
}

/// Non-degenerate quaternionic hermitian form `⟨v, w⟩ = v̄ᵀ F w`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HermitianForm {
    f: QMat2,
    f_inv: QMat2,
}

impl HermitianForm {
    pub fn new(f: QMat2) -> Result<HermitianForm> {
        let defect = (f - f.dagger()).max_abs();
        if defect > 1e-12 * f.max_abs().max(1.0) {
            return Err(Error::Constraint { what: "form is not hermitian", defect });
        }
        let f_inv = m2_inverse(&f).map_err(|_| Error::Constraint { what: "degenerate form", defect: 0.0 })?;
        Ok(HermitianForm { f, f_inv })
    }

    /// `⟨v, w⟩ = v̄₁ w₂ + v̄₂ w₁`, whose null lines form the 3-sphere Re x = 0.
    pub fn s3() -> HermitianForm {
        let f = QMat2::new(Q::ZERO, Q::ONE, Q::ONE, Q::ZERO);
        HermitianForm { f, f_inv: f }
    }

    pub fn matrix(&self) -> QMat2 {
        self.f
    }

    pub fn eval(&self, v: QVec2, w: QVec2) -> Q {
        let fw = self.f.apply(w);
        v.0.conj() * fw.0 + v.1.conj() * fw.1
    }
}

/// Adjoint `M*` characterized by `⟨M v, w⟩ = ⟨v, M* w⟩`.
pub fn adjoint_wrt(form: &HermitianForm, m: &QMat2) -> QMat2 {
    form.f_inv * m.dagger() * form.f
}

/// Left and right normals of the real 2-plane spanned by `u1, u2`:
/// `N² = R² = −1` and `N x R = x` on the plane, with `N u1` pointing to the
/// side of `u2` when `oriented` is set.
pub fn plane_normals(u1: Q, u2: Q, oriented: bool) -> Result<(Q, Q)> {
    let n1 = u1.norm();
    let n2 = u2.norm();
    if n1 == 0.0 || n2 == 0.0 {
        return Err(Error::DegeneratePlane { sine: 0.0 });
    }
    // u1⁻¹ u2 = r + s a with a a unit imaginary, s > 0
    let t = u1.inv() * u2;
    let im = t.im();
    let sine = im.norm() / t.norm();
    if sine <= 1e-12 {
        return Err(Error::DegeneratePlane { sine });
    }
    let a = im / im.norm();
    let n = u1 * a * u1.inv();
    let r = -a;
    Ok(if oriented { (n, r) } else { (-n, -r) })
}

fn left_mul(q: Q) -> Matrix4<f64> {
    Matrix4::new(
        q.w, -q.x, -q.y, -q.z, //
        q.x, q.w, -q.z, q.y, //
        q.y, q.z, q.w, -q.x, //
        q.z, -q.y, q.x, q.w,
    )
}

fn right_mul(q: Q) -> Matrix4<f64> {
    Matrix4::new(
        q.w, -q.x, -q.y, -q.z, //
        q.x, q.w, q.z, -q.y, //
        q.y, -q.z, q.w, q.x, //
        q.z, q.y, -q.x, q.w,
    )
}

fn vec4(q: Q) -> Vector4<f64> {
    Vector4::new(q.w, q.x, q.y, q.z)
}

fn quat4(v: &Vector4<f64>) -> Q {
    Q::new(v[0], v[1], v[2], v[3])
}

/// Solve `N x + x R = H` as a real 4×4 least-squares problem.
/// Returns a particular solution and a basis of the 2-dimensional kernel.
pub fn solve_nxr(n: Q, r: Q, h: Q) -> Result<(Q, [Q; 2])> {
    for (what, q) in [("N^2 = -1", n), ("R^2 = -1", r)] {
        let defect = (q * q + Q::ONE).norm();
        if defect > 1e-9 {
            return Err(Error::Constraint { what, defect });
        }
    }
    let l = left_mul(n) + right_mul(r);
    let svd = l.svd(true, true);
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    let mut order = [0usize, 1, 2, 3];
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let b = vec4(h);
    let mut x = Vector4::zeros();
    for &k in &order[..2] {
        let s = svd.singular_values[k];
        x += vt.row(k).transpose() * (u.column(k).dot(&b) / s);
    }
    let residual = (l * x - b).norm();
    if residual > 1e-8 * h.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Inconsistent { residual });
    }
    let k0 = vt.row(order[2]).transpose();
    let k1 = vt.row(order[3]).transpose();
    Ok((quat4(&x), [quat4(&k0), quat4(&k1)]))
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Q = Q::I;
    const J: Q = Q::J;
    const K: Q = Q::K;

    fn mclose(a: &QMat2, b: &QMat2, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    #[test]
    fn realified_multiplication_matches() {
        let a = Q::new(0.2, -1.0, 0.5, 2.0);
        let b = Q::new(1.5, 0.3, -0.7, 0.1);
        assert!((quat4(&(left_mul(a) * vec4(b))) - a * b).norm() < 1e-14);
        assert!((quat4(&(right_mul(b) * vec4(a))) - a * b).norm() < 1e-14);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(m2_inverse(&QMat2::IDENTITY).unwrap(), QMat2::IDENTITY);
        let f = Q::new(0.3, 1.1, -2.0, 0.4);
        let g = QMat2::affine_frame(f);
        let gi = m2_inverse(&g).unwrap();
        assert!(mclose(&gi, &QMat2::affine_frame(-f), 1e-14));
        assert!(mclose(&(g * gi), &QMat2::IDENTITY, 1e-14));
        let d = m2_inverse(&QMat2::diag(I, J)).unwrap();
        assert!(mclose(&d, &QMat2::diag(-I, -J), 1e-15));
        let sing = QMat2::new(I, J, I * 2.0, J * 2.0);
        assert!(matches!(m2_inverse(&sing), Err(Error::Singular { .. })));
        // zero top-left entry needs the row swap
        let m = QMat2::new(Q::ZERO, K, J, Q::ONE);
        assert!(mclose(&(m * m2_inverse(&m).unwrap()), &QMat2::IDENTITY, 1e-14));
    }

    #[test]
    fn trace_pair_examples() {
        assert_eq!(trace_pair(&QMat2::IDENTITY, &QMat2::IDENTITY), 1.0);
        let s = QMat2::diag(I, -J);
        assert_eq!(trace_pair(&s, &s), -1.0);
        let a = QMat2::diag(Q::new(0.7, 1.0, 2.0, 3.0), Q::ZERO);
        assert_eq!(trace_pair(&a, &QMat2::IDENTITY), 0.35);
    }

    #[test]
    fn adjoint_examples() {
        let form = HermitianForm::s3();
        assert_eq!(adjoint_wrt(&form, &QMat2::IDENTITY), QMat2::IDENTITY);
        let (a, b, c, d) = (Q::new(1.0, 2.0, 0.0, 0.0), J, Q::new(0.0, 0.0, 3.0, 1.0), Q::new(2.0, 0.0, 0.0, -1.0));
        let m = QMat2::new(a, b, c, d);
        assert_eq!(adjoint_wrt(&form, &m), QMat2::new(d.conj(), b.conj(), c.conj(), a.conj()));
        assert!(HermitianForm::new(QMat2::new(Q::ZERO, I, I, Q::ZERO)).is_err());
        assert!(HermitianForm::new(QMat2::ZERO).is_err());
    }

    #[test]
    fn plane_normal_examples() {
        assert_eq!(plane_normals(Q::ONE, I, true).unwrap(), (I, -I));
        let (n, r) = plane_normals(I, J, true).unwrap();
        assert!((n - K).norm() < 1e-15 && (r - K).norm() < 1e-15);
        let (n2, r2) = plane_normals(I, J, false).unwrap();
        assert_eq!((n2, r2), (-n, -r));
        assert!(matches!(plane_normals(I, I * 3.0, true), Err(Error::DegeneratePlane { .. })));
    }

    #[test]
    fn solve_examples() {
        let (p, ker) = solve_nxr(I, -I, Q::ZERO).unwrap();
        assert_eq!(p, Q::ZERO);
        for k in ker {
            assert!(k.y.abs() < 1e-14 && k.z.abs() < 1e-14);
            assert!((k.norm() - 1.0).abs() < 1e-14);
        }
        assert!(ker[0].dot(ker[1]).abs() < 1e-14);
        let (_, ker) = solve_nxr(K, K, Q::ZERO).unwrap();
        for k in ker {
            assert!(k.w.abs() < 1e-14 && k.z.abs() < 1e-14);
        }
        assert!(matches!(solve_nxr(I, -I, Q::ONE), Err(Error::Inconsistent { .. })));
        let h = K * 2.0;
        let (p, _) = solve_nxr(I, -I, h).unwrap();
        assert!((I * p - p * I - h).norm() < 1e-13);
        assert!(matches!(solve_nxr(Q::ONE, I, Q::ZERO), Err(Error::Constraint { .. })));
    }
}
