//! Real quaternions and the classical maps S³ → SO(3), S³ → SU(2).

use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `w + x i + y j + z k`. Serializes as `[w, x, y, z]`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Unit quaternions are accepted when `| |mu| - 1 |` stays below this.
pub const UNIT_TOL: f64 = 1e-9;

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion::new(w, 0.0, 0.0, 0.0)
    }

    pub const fn imag(x: f64, y: f64, z: f64) -> Self {
        Quaternion::new(0.0, x, y, z)
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn re(self) -> f64 {
        self.w
    }

    pub fn im(self) -> Quaternion {
        Quaternion::imag(self.x, self.y, self.z)
    }

    pub fn conj(self) -> Quaternion {
        Quaternion::new(self.w, -self.x, -self.y, -self.z)
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        // hypot-style scaling keeps tiny and huge entries finite
        let m = self.w.abs().max(self.x.abs()).max(self.y.abs()).max(self.z.abs());
        if m == 0.0 || !m.is_finite() {
            return m;
        }
        (self / m).norm_sqr().sqrt() * m
    }

    pub fn try_inv(self) -> Result<Quaternion> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.conj() / n2)
    }

    /// Inverse; panics on zero. Use [`Quaternion::try_inv`] for untrusted input.
    pub fn inv(self) -> Quaternion {
        self.try_inv().expect("inverse of zero quaternion")
    }

    /// Real inner product `Re(ā b)`.
    pub fn dot(self, other: Quaternion) -> f64 {
        self.w * other.w + self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Vector cross product of the imaginary parts.
    pub fn cross_im(self, o: Quaternion) -> Quaternion {
        Quaternion::imag(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn is_imaginary(self, tol: f64) -> bool {
        self.w.abs() <= tol * self.norm().max(1.0)
    }

    pub fn normalize(self) -> Result<Quaternion> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self / n)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Complex number `w + x i` viewed as a quaternion.
    pub fn from_complex(c: Complex64) -> Quaternion {
        Quaternion::new(c.re, c.im, 0.0, 0.0)
    }
}

impl From<[f64; 4]> for Quaternion {
    fn from(a: [f64; 4]) -> Self {
        Quaternion::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Quaternion> for [f64; 4] {
    fn from(q: Quaternion) -> Self {
        q.to_array()
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Quaternion::real(w)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {:+}i {:+}j {:+}k", self.w, self.x, self.y, self.z)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        let (a, b) = (self, o);
        Quaternion::new(
            a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
            a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
            a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
            a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Quaternion> for f64 {
    type Output = Quaternion;
    fn mul(self, q: Quaternion) -> Quaternion {
        q * self
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        Quaternion::new(self.w / s, self.x / s, self.y / s, self.z / s)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl MulAssign<f64> for Quaternion {
    fn mul_assign(&mut self, s: f64) {
        *self = *self * s;
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

pub fn q_mul(a: Quaternion, b: Quaternion) -> Quaternion {
    a * b
}

/// `(ā, |a|, a⁻¹)`.
pub fn q_conj_norm_inv(a: Quaternion) -> Result<(Quaternion, f64, Quaternion)> {
    Ok((a.conj(), a.norm(), a.try_inv()?))
}

/// Real inner product, plus the cross product when both inputs are imaginary
/// (then `a b = cross - dot`).
pub fn q_dot_cross(a: Quaternion, b: Quaternion) -> (f64, Option<Quaternion>) {
    let dot = a.dot(b);
    let tol = 1e-12;
    let cross = (a.is_imaginary(tol) && b.is_imaginary(tol)).then(|| a.cross_im(b));
    (dot, cross)
}

fn check_unit(mu: Quaternion) -> Result<()> {
    let n = mu.norm();
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Error::NonUnit { norm: n });
    }
    Ok(())
}

/// Matrix of `a ↦ μ a μ⁻¹` on Im H in the basis (i, j, k).
pub fn rotation_of(mu: Quaternion) -> Result<[[f64; 3]; 3]> {
    check_unit(mu)?;
    let inv = mu.conj() / mu.norm_sqr();
    let mut m = [[0.0; 3]; 3];
    for (col, e) in [Quaternion::I, Quaternion::J, Quaternion::K].into_iter().enumerate() {
        let r = mu * e * inv;
        m[0][col] = r.x;
        m[1][col] = r.y;
        m[2][col] = r.z;
    }
    Ok(m)
}

/// Matrix of `x ↦ μ x` on `H = C ⊕ jC` in the basis `1, j`: with `μ = μ₀ + μ₁ j`
/// its columns are `(μ₀, μ̄₁)` and `(−μ₁, μ̄₀)`.
pub fn su2_of(mu: Quaternion) -> Result<[[Complex64; 2]; 2]> {
    check_unit(mu)?;
    let m0 = Complex64::new(mu.w, mu.x);
    let m1 = Complex64::new(mu.y, mu.z);
    Ok([[m0, -m1], [m1.conj(), m0.conj()]])
}

/// Do `a` and `b` commute (to relative tolerance `tol`)?
pub fn commutes(a: Quaternion, b: Quaternion, tol: f64) -> bool {
    (a * b - b * a).norm() <= tol * (a.norm() * b.norm()).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;

    const I: Quaternion = Quaternion::I;
    const J: Quaternion = Quaternion::J;
    const K: Quaternion = Quaternion::K;

    fn close(a: Quaternion, b: Quaternion) -> bool {
        (a - b).norm() <= 1e-12 * (1.0 + a.norm().max(b.norm()))
    }

    #[test]
    fn multiplication_table() {
        assert_eq!(I * J, K);
        assert_eq!(J * I, -K);
        assert_eq!(J * K, I);
        assert_eq!(K * I, J);
        for u in [I, J, K] {
            assert_eq!(u * u, -Quaternion::ONE);
        }
        let a = Quaternion::new(0.3, -1.2, 2.0, 0.7);
        assert_eq!(Quaternion::ONE * a, a);
        assert_eq!(q_mul(Quaternion::ONE + I, Quaternion::ONE + J), Quaternion::new(1.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn conj_norm_inv() {
        let (_, n, _) = q_conj_norm_inv(Quaternion::new(3.0, 4.0, 0.0, 0.0)).unwrap();
        assert_eq!(n, 5.0);
        assert_eq!((I * J).conj(), -K);
        assert_eq!(J.conj() * I.conj(), -K);
        assert_eq!(q_conj_norm_inv(Quaternion::ZERO), Err(Error::ZeroInverse));
        let a = Quaternion::new(0.5, -2.0, 1.0, 3.0);
        assert!(close(a * a.inv(), Quaternion::ONE));
    }

    #[test]
    fn dot_cross() {
        assert_eq!(q_dot_cross(I, J), (0.0, Some(K)));
        assert_eq!(q_dot_cross(I, I), (1.0, Some(Quaternion::ZERO)));
        let (d, c) = q_dot_cross(Quaternion::ONE + I, Quaternion::ONE + J);
        assert_eq!(d, 1.0);
        assert!(c.is_none());
    }

    #[test]
    fn rotation_examples() {
        let id = rotation_of(Quaternion::ONE).unwrap();
        assert_eq!(id, [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);
        let mu = (Quaternion::ONE + I) / 2f64.sqrt();
        let m = rotation_of(mu).unwrap();
        // column of j is the image of j, expected k
        assert!((m[0][1]).abs() < 1e-15 && (m[1][1]).abs() < 1e-15 && (m[2][1] - 1.0).abs() < 1e-15);
        assert_eq!(rotation_of(mu).unwrap(), rotation_of(-mu).unwrap());
        assert!(matches!(rotation_of(Quaternion::new(2.0, 0.0, 0.0, 0.0)), Err(Error::NonUnit { .. })));
    }

    #[test]
    fn su2_examples() {
        let m = su2_of(Quaternion::ONE).unwrap();
        assert_eq!(m[0][0], Complex64::new(1.0, 0.0));
        assert_eq!(m[0][1], Complex64::new(0.0, 0.0));
        let mu = Quaternion::new(0.5, 0.5, 0.5, 0.5);
        let m = su2_of(mu).unwrap();
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        assert!((det - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(su2_of(Quaternion::ZERO).is_err());
        // columns are the images of 1 and j
        let mu = Quaternion::new(0.6, 0.0, 0.8, 0.0);
        let m = su2_of(mu).unwrap();
        assert_eq!(m[1][0], Complex64::new(0.8, 0.0));
        assert_eq!(m[0][1], Complex64::new(-0.8, 0.0));
    }
}
