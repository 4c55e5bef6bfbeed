//! Per-point geometry of a conformal immersion `f` with `J∂u = ∂v`:
//! `*df = N df = −df R`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hp1::Sphere2;
use crate::qla::{trace_pair, QMat2};
use crate::quat::Quaternion;

type Q = Quaternion;

/// Value and first/second partials of `f` at one point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub f: Q,
    pub fu: Q,
    pub fv: Q,
    pub fuu: Q,
    pub fuv: Q,
    pub fvv: Q,
}

/// Partials of the left and right normals.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NormalDerivs {
    pub nu: Q,
    pub nv: Q,
    pub ru: Q,
    pub rv: Q,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PointFrame {
    pub n: Q,
    pub r: Q,
    /// The `H` entry of the sphere matrix, projected so that `R H = H N`.
    pub hq: Q,
    /// Mean curvature vector.
    pub hvec: Q,
    pub lambda: f64,
    pub conformal_defect: f64,
    /// `|R H − H N|` before projection, relative to `(|dN| + |dR|)/λ`.
    pub normal_defect: f64,
    /// Same quantity from the `dN` formula, for cross-checking.
    pub hq_dn: Q,
}

/// Left and right normals `N = f_v f_u⁻¹`, `R = −f_u⁻¹ f_v`, plus `|f_u|` and
/// the conformal defect `max(|⟨f_u,f_v⟩|, ||f_u|²−|f_v|²|) / |f_u|²`.
pub fn normals(jet: &Jet2) -> Result<(Q, Q, f64, f64)> {
    let lambda = jet.fu.norm();
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::NotImmersed { iu: 0, iv: 0, norm: lambda });
    }
    let l2 = lambda * lambda;
    let defect = (jet.fu.dot(jet.fv).abs()).max((l2 - jet.fv.norm_sqr()).abs()) / l2;
    let fui = jet.fu.inv();
    Ok((jet.fv * fui, -(fui * jet.fv), lambda, defect))
}

/// `dN`, `dR` from the second derivatives of `f`.
pub fn normal_derivs_from_jet(jet: &Jet2, n: Q, r: Q) -> NormalDerivs {
    let fui = jet.fu.inv();
    NormalDerivs {
        nu: (jet.fuv - n * jet.fuu) * fui,
        nv: (jet.fvv - n * jet.fuv) * fui,
        ru: -(fui * (jet.fuv + jet.fuu * r)),
        rv: -(fui * (jet.fvv + jet.fuv * r)),
    }
}

/// Frame from a jet and the normal derivatives.
pub fn frame_from(jet: &Jet2, n: Q, r: Q, lambda: f64, conformal_defect: f64, d: &NormalDerivs) -> PointFrame {
    let fui = jet.fu.inv();
    let raw = (d.ru - r * d.rv) * fui * 0.5;
    let hq_dn = fui * (d.nu - n * d.nv) * 0.5;
    let hq = (raw - r * raw * n) * 0.5;
    // relative to the size of the normal derivatives over λ, the natural curvature scale
    let curv = (d.ru.norm() + d.rv.norm() + d.nu.norm() + d.nv.norm()) / lambda;
    let normal_defect = (r * raw - raw * n).norm() / curv.max(f64::MIN_POSITIVE);
    PointFrame { n, r, hq, hvec: (hq * n).conj(), lambda, conformal_defect, normal_defect, hq_dn }
}

/// Frame at a jet, differentiating the normals through the jet's second derivatives.
pub fn frame_at(jet: &Jet2, conformal_tol: f64) -> Result<(PointFrame, NormalDerivs)> {
    let (n, r, lambda, defect) = normals(jet)?;
    if defect > conformal_tol {
        return Err(Error::NonConformal { iu: 0, iv: 0, defect, tol: conformal_tol });
    }
    let d = normal_derivs_from_jet(jet, n, r);
    Ok((frame_from(jet, n, r, lambda, defect, &d), d))
}

/// `II(X,X)`, `II(X,JX)`, `II(JX,JX)` for `X = ∂u`.
pub fn second_fundamental(jet: &Jet2, d: &NormalDerivs) -> [Q; 3] {
    [
        (jet.fv * d.ru - d.nu * jet.fv) * 0.5,
        (d.nu * jet.fu - jet.fu * d.ru) * 0.5,
        (d.nv * jet.fu - jet.fu * d.rv) * 0.5,
    ]
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Curvatures {
    pub k: f64,
    pub kperp: f64,
    /// `⟨A∧*A⟩(∂u, ∂v)`, the Willmore integrand per unit parameter area.
    pub density_w: f64,
    /// `|density_w − ¼(|𝓗|² − K − K⊥)λ²|`
    pub identity_defect: f64,
}

pub fn curvatures_at(frame: &PointFrame, d: &NormalDerivs) -> Curvatures {
    let l2 = frame.lambda * frame.lambda;
    let r_term = d.rv.dot(frame.r * d.ru);
    let n_term = d.nv.dot(frame.n * d.nu);
    let k = (r_term + n_term) / (2.0 * l2);
    let kperp = (r_term - n_term) / (2.0 * l2);
    let density_w = (frame.r * d.ru - d.rv).norm_sqr() / 16.0;
    let alt = 0.25 * (frame.hvec.norm_sqr() - k - kperp) * l2;
    Curvatures { k, kperp, density_w, identity_defect: (density_w - alt).abs() }
}

/// `S = G [[N, 0], [−H, −R]] G⁻¹` with `G = [[1, f], [0, 1]]`.
pub fn mean_curvature_sphere_at(frame: &PointFrame, f: Q) -> Sphere2 {
    let m = QMat2::new(frame.n, Q::ZERO, -frame.hq, -frame.r);
    Sphere2 { s: conj_affine(f, &m) }
}

/// `G M G⁻¹` with `G = [[1, f], [0, 1]]`.
pub fn conj_affine(f: Q, m: &QMat2) -> QMat2 {
    QMat2::affine_frame(f) * *m * QMat2::affine_frame(-f)
}

/// Hopf fields and the associated 1-forms at one point, from the affine formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HopfEval {
    /// Mean curvature sphere.
    pub sm: QMat2,
    /// `A(∂u)`, `Q(∂u)`
    pub a_op: QMat2,
    pub q_op: QMat2,
    /// `A(∂v)`, `Q(∂v)`
    pub a_op_jx: QMat2,
    pub q_op_jx: QMat2,
    pub w_x: Q,
    pub w_jx: Q,
    /// `v = dR + R *dR`
    pub v_x: Q,
    pub v_jx: Q,
    /// `a = dN + N *dN`
    pub a_x: Q,
    pub a_jx: Q,
    /// `b = w − 2 dH`
    pub b_x: Q,
    pub b_jx: Q,
}

pub fn hopf_affine_at(f: Q, frame: &PointFrame, d: &NormalDerivs, dh: [Q; 2]) -> HopfEval {
    let (n, r, h) = (frame.n, frame.r, frame.hq);
    let [hu, hv] = dh;
    let w_x = hu + r * hv + h * (n * d.nu - d.nv) * 0.5;
    let w_jx = hv - r * hu + h * (n * d.nv + d.nu) * 0.5;
    let v_x = d.ru + r * d.rv;
    let v_jx = d.rv - r * d.ru;
    let a_x = d.nu + n * d.nv;
    let a_jx = d.nv - n * d.nu;
    let b_x = w_x - hu * 2.0;
    let b_jx = w_jx - hv * 2.0;
    let z = Q::ZERO;
    let lower = |p: Q, q: Q| conj_affine(f, &QMat2::new(z, z, p, q)) * 0.25;
    let left = |p: Q, q: Q| conj_affine(f, &QMat2::new(p, z, q, z)) * 0.25;
    HopfEval {
        sm: mean_curvature_sphere_at(frame, f).s,
        a_op: -lower(w_jx, v_jx),
        a_op_jx: lower(w_x, v_x),
        q_op: -left(a_jx, b_jx),
        q_op_jx: left(a_x, b_x),
        w_x,
        w_jx,
        v_x,
        v_jx,
        a_x,
        a_jx,
        b_x,
        b_jx,
    }
}

/// `A`, `Q` on `∂u` and `∂v`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HopfPair {
    pub a_x: QMat2,
    pub a_jx: QMat2,
    pub q_x: QMat2,
    pub q_jx: QMat2,
}

/// `A = ¼(S dS + *dS)`, `Q = ¼(S dS − *dS)` from a sphere and its partials.
pub fn hopf_invariant_at(s: &QMat2, ds: [QMat2; 2]) -> HopfPair {
    let [su, sv] = ds;
    HopfPair {
        a_x: (*s * su + sv) * 0.25,
        a_jx: (*s * sv - su) * 0.25,
        q_x: (*s * su - sv) * 0.25,
        q_jx: (*s * sv + su) * 0.25,
    }
}

/// `⟨ω∧*ω⟩(∂u, ∂v) = −⟨ω(∂u)²⟩ − ⟨ω(∂v)²⟩` for an operator-valued 1-form of type `*ω = ±Sω`.
pub fn wedge_star(x: &QMat2, jx: &QMat2) -> f64 {
    -trace_pair(x, x) - trace_pair(jx, jx)
}

/// Residual of `image(M) ⊂ (f, 1)ᵀ H`.
pub fn image_in_line_residual(m: &QMat2, f: Q) -> f64 {
    let [a, b, c, d] = m.entries();
    (a - f * c).norm().max((b - f * d).norm())
}

/// `|M (f, 1)ᵀ|`
pub fn kills_line_residual(m: &QMat2, f: Q) -> f64 {
    let [a, b, c, d] = m.entries();
    (a * f + b).norm().max((c * f + d).norm())
}
