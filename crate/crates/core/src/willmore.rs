//! Integrated functionals, the Euler–Lagrange residual `dw`, degrees of the
//! normals and the super-conformality classifier.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qla::{trace_pair, QMat2};
use crate::quat::Quaternion;
use crate::surface::{
    analyze_chart, conj_affine, pairwise_sum, wedge_star, AnalysisOptions, ChartAnalysis, SurfaceChart,
};
use crate::tolerances;

type Q = Quaternion;

/// `⟨Q∧*Q⟩(∂u, ∂v) = |a|²/16` with `a = dN + N *dN`.
fn q_density(an: &ChartAnalysis, k: usize) -> f64 {
    let d = &an.derivs[k];
    (d.nu + an.frames[k].n * d.nv).norm_sqr() / 16.0
}

fn sum_over(an: &ChartAnalysis, valid: &[bool], f: impl Fn(usize) -> f64) -> f64 {
    let terms: Vec<f64> = (0..an.len()).filter(|&k| valid[k]).map(f).collect();
    pairwise_sum(&terms) * an.geom.du * an.geom.dv
}

/// Is the chart closed in the sense needed for degrees?
pub fn is_closed(chart: &SurfaceChart) -> bool {
    chart.closed || (chart.geom.periodic_u && chart.geom.periodic_v)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub nu: usize,
    pub nv: usize,
    pub du: f64,
    pub dv: f64,
    pub periodic_u: bool,
    pub periodic_v: bool,
    pub exact_jets: bool,
    pub fd_tol: f64,
    pub conformal_tol: f64,
    pub tolerances: tolerances::Ledger,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FunctionalsReport {
    /// Willmore functional `(1/π)∫⟨A∧*A⟩`.
    pub w: f64,
    /// Energy `∫⟨dS∧*dS⟩ = 4∫(⟨A∧*A⟩ + ⟨Q∧*Q⟩)`.
    pub e: f64,
    pub deg_s: f64,
    pub deg_n: f64,
    pub deg_r: f64,
    /// False when the chart is an open patch: the integrals above are then
    /// raw patch integrals, not topological invariants.
    pub topological: bool,
    /// `(1/4π)∫K dA − ½(deg R + deg N)`
    pub gauss_bonnet_defect: f64,
    pub residual_max: f64,
    pub residual_l2: f64,
    pub superconformal_defect_r: f64,
    pub superconformal_defect_n: f64,
    /// Largest pointwise violation of `⟨dS,dS⟩ = ⟨*dS,*dS⟩`, `⟨dS,*dS⟩ = 0`.
    pub gauss_check_max: f64,
    /// Largest `|densityW − ¼(|𝓗|² − K − K⊥)λ²|`.
    pub density_identity_max: f64,
    pub metadata: Metadata,
}

pub fn metadata(an: &ChartAnalysis) -> Metadata {
    let g = an.geom;
    Metadata {
        nu: g.nu,
        nv: g.nv,
        du: g.du,
        dv: g.dv,
        periodic_u: g.periodic_u,
        periodic_v: g.periodic_v,
        exact_jets: an.exact_jets,
        fd_tol: an.fd_tol(),
        conformal_tol: an.conformal_tol,
        tolerances: tolerances::Ledger::default(),
    }
}

/// Raw integrals `(W, E, degS)` over the valid samples (midpoint rule).
pub fn integrals(an: &ChartAnalysis) -> (f64, f64, f64) {
    let v = &an.frame_valid;
    let a = sum_over(an, v, |k| an.curv[k].density_w);
    let q = sum_over(an, v, |k| q_density(an, k));
    (a / PI, 4.0 * (a + q), (a - q) / PI)
}

fn degree_raw(an: &ChartAnalysis, use_n: bool) -> f64 {
    sum_over(an, &an.frame_valid, |k| {
        let (fr, d) = (&an.frames[k], &an.derivs[k]);
        if use_n {
            d.nv.dot(fr.n * d.nu)
        } else {
            d.rv.dot(fr.r * d.ru)
        }
    }) / (4.0 * PI)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Normal {
    N,
    R,
}

/// `(1/4π)∫⟨*dR, R dR⟩` (or the `N` analog) over a closed chart.
pub fn degree_of_normal(chart: &SurfaceChart, which: Normal) -> Result<f64> {
    if !is_closed(chart) {
        return Err(Error::NotClosed);
    }
    let an = analyze_chart(chart, &AnalysisOptions::default())?;
    Ok(degree_raw(&an, which == Normal::N))
}

/// Pointwise residual field `dw(∂u, ∂v)` with its norms over the samples
/// where it is defined, at least [`tolerances::NESTED_MARGIN`] samples from open edges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualField {
    pub dw: Vec<Q>,
    pub valid: Vec<bool>,
    pub max: f64,
    pub l2: f64,
    /// Largest `|df∧w|`, `|df∧v|`, `|(2dH − w)∧df|` on `(∂u, ∂v)`.
    pub wedge_w: f64,
    pub wedge_v: f64,
    pub wedge_dh: f64,
}

pub fn residual_field(an: &ChartAnalysis) -> ResidualField {
    let dw = an.dw_field();
    let valid = an.interior_valid(&an.second_level_valid(), tolerances::NESTED_MARGIN);
    let norms: Vec<f64> = (0..an.len()).filter(|&k| valid[k]).map(|k| dw[k].norm()).collect();
    let sq: Vec<f64> = norms.iter().map(|x| x * x).collect();
    let mut wedge = [0.0f64; 3];
    for k in (0..an.len()).filter(|&k| an.hopf_valid[k]) {
        let (j, h, [hu, hv]) = (&an.jets[k], &an.hopf[k], an.dh[k]);
        wedge[0] = wedge[0].max((j.fu * h.w_jx - j.fv * h.w_x).norm());
        wedge[1] = wedge[1].max((j.fu * h.v_jx - j.fv * h.v_x).norm());
        wedge[2] = wedge[2].max(((hu * 2.0 - h.w_x) * j.fv - (hv * 2.0 - h.w_jx) * j.fu).norm());
    }
    ResidualField {
        max: norms.iter().copied().fold(0.0, f64::max),
        l2: (pairwise_sum(&sq) * an.geom.du * an.geom.dv).sqrt(),
        dw,
        valid,
        wedge_w: wedge[0],
        wedge_v: wedge[1],
        wedge_dh: wedge[2],
    }
}

pub fn willmore_residual_field(chart: &SurfaceChart) -> Result<ResidualField> {
    Ok(residual_field(&analyze_chart(chart, &AnalysisOptions::default())?))
}

/// `(defectR, defectN)`: largest `|*dR − R dR|/(|dR(∂u)| + |dR(∂v)|)` and the `N` analog.
pub fn superconformal_defects(an: &ChartAnalysis) -> (f64, f64) {
    let mut out = (0.0f64, 0.0f64);
    for k in (0..an.len()).filter(|&k| an.frame_valid[k]) {
        let (fr, d) = (&an.frames[k], &an.derivs[k]);
        // normalized by the larger normal derivative: when one normal is constant
        // its derivative is pure truncation noise and must not be divided by itself
        let den = (d.ru.norm() + d.rv.norm()).max(d.nu.norm() + d.nv.norm());
        if den <= 1e-8 * fr.lambda {
            continue;
        }
        out.0 = out.0.max((d.rv - fr.r * d.ru).norm() / den);
        out.1 = out.1.max((d.nv - fr.n * d.nu).norm() / den);
    }
    out
}

/// Verdict threshold for the defects above.
pub fn superconformal_tol(an: &ChartAnalysis) -> f64 {
    if an.exact_jets {
        tolerances::SUPERCONFORMAL_ANALYTIC
    } else {
        tolerances::verdict_tol(tolerances::SUPERCONFORMAL_FD_FACTOR, an.geom.h(), an.curvature_scale)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Branch {
    /// `*dR = R dR`
    R,
    /// `*dN = N dN`
    N,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuperConformal {
    pub defect_r: f64,
    pub defect_n: f64,
    pub tol: f64,
    pub verdict: bool,
    pub branch: Option<Branch>,
}

pub fn superconformal_classify(chart: &SurfaceChart) -> Result<SuperConformal> {
    Ok(classify(&analyze_chart(chart, &AnalysisOptions::default())?))
}

pub fn classify(an: &ChartAnalysis) -> SuperConformal {
    let (defect_r, defect_n) = superconformal_defects(an);
    let tol = superconformal_tol(an);
    let branch = if defect_r <= tol {
        Some(Branch::R)
    } else if defect_n <= tol {
        Some(Branch::N)
    } else {
        None
    };
    SuperConformal { defect_r, defect_n, tol, verdict: branch.is_some(), branch }
}

/// Pointwise conformal Gauss map defects `(|⟨dS,dS⟩ − ⟨*dS,*dS⟩|, |⟨dS,*dS⟩|)` with
/// `dS` by differences of the sphere field.
pub fn conformal_gauss_defects(an: &ChartAnalysis) -> Vec<Option<(f64, f64)>> {
    let ds = an.ds_fd();
    let ok = an.second_level_valid();
    (0..an.len())
        .map(|k| {
            ok[k].then(|| {
                let [su, sv] = ds[k];
                ((trace_pair(&su, &su) - trace_pair(&sv, &sv)).abs(), trace_pair(&su, &sv).abs())
            })
        })
        .collect()
}

/// `⟨dS∧*dS⟩ − 4(⟨A∧*A⟩ + ⟨Q∧*Q⟩)` at one sample, with
/// `dS = 2(*Q − *A)` assembled from the affine Hopf fields.
pub fn type_identity_defect(an: &ChartAnalysis, k: usize) -> f64 {
    let h = &an.hopf[k];
    // *A(∂u) = A(∂v), *A(∂v) = −A(∂u)
    let su = (h.q_op_jx - h.a_op_jx) * 2.0;
    let sv = (h.a_op - h.q_op) * 2.0;
    let lhs = wedge_star(&su, &sv);
    let rhs = 4.0 * (wedge_star(&h.a_op, &h.a_op_jx) + wedge_star(&h.q_op, &h.q_op_jx));
    (lhs - rhs).abs()
}

/// `|⟨A∧*A⟩ − |v|²/16|`, checking the affine Hopf field against the density.
pub fn density_pairing_defect(an: &ChartAnalysis, k: usize) -> f64 {
    let h = &an.hopf[k];
    (wedge_star(&h.a_op, &h.a_op_jx) - an.curv[k].density_w).abs()
}

/// `(−∂u A(∂u) − ∂v A(∂v), ¼ G [[0,0],[dw,0]] G⁻¹)` at every second-level sample,
/// the first from differences of the invariant Hopf field.
pub fn harmonicity_pairs(an: &ChartAnalysis) -> Vec<Option<(QMat2, QMat2)>> {
    let g = an.geom;
    let inv = an.hopf_invariant();
    let ok2 = an.second_level_valid();
    let ok3: Vec<bool> = (0..an.len())
        .map(|k| {
            let (iu, iv) = g.coords(k);
            ok2[k] && g.stencil_valid(&ok2, iu, iv) && g.edge_distance(iu, iv) >= tolerances::NESTED_MARGIN
        })
        .collect();
    let ax: Vec<QMat2> = inv.iter().map(|p| p.a_x).collect();
    let ajx: Vec<QMat2> = inv.iter().map(|p| p.a_jx).collect();
    let dw = an.dw_field();
    (0..an.len())
        .map(|k| {
            ok3[k].then(|| {
                let (iu, iv) = g.coords(k);
                let lhs = -(g.d_du(&ax, iu, iv) + g.d_dv(&ajx, iu, iv));
                let z = Q::ZERO;
                let rhs = conj_affine(an.jets[k].f, &QMat2::new(z, z, dw[k], z)) * 0.25;
                (lhs, rhs)
            })
        })
        .collect()
}

pub fn willmore_energy(chart: &SurfaceChart) -> Result<FunctionalsReport> {
    let an = analyze_chart(chart, &AnalysisOptions::default())?;
    Ok(functionals(chart, &an))
}

pub fn functionals(chart: &SurfaceChart, an: &ChartAnalysis) -> FunctionalsReport {
    let (w, e, deg_s) = integrals(an);
    let deg_n = degree_raw(an, true);
    let deg_r = degree_raw(an, false);
    let k_int = sum_over(an, &an.frame_valid, |k| an.curv[k].k * an.frames[k].lambda.powi(2)) / (4.0 * PI);
    let res = residual_field(an);
    let (defect_r, defect_n) = superconformal_defects(an);
    let gauss = conformal_gauss_defects(an).into_iter().flatten().fold(0.0f64, |m, (a, b)| m.max(a).max(b));
    let ident = (0..an.len()).filter(|&k| an.frame_valid[k]).map(|k| an.curv[k].identity_defect).fold(0.0, f64::max);
    FunctionalsReport {
        w,
        e,
        deg_s,
        deg_n,
        deg_r,
        topological: is_closed(chart),
        gauss_bonnet_defect: k_int - 0.5 * (deg_r + deg_n),
        residual_max: res.max,
        residual_l2: res.l2,
        superconformal_defect_r: defect_r,
        superconformal_defect_n: defect_n,
        gauss_check_max: gauss,
        density_identity_max: ident,
        metadata: metadata(an),
    }
}

/// `r1 = ½κ³ + κ'' − κτ²`, `r2 = (κ²τ)'` by second-order differences.
pub fn elastica_residual(kappa: &[f64], tau: &[f64], ds: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = kappa.len();
    if n < 5 || tau.len() != n {
        return Err(Error::TooFewSamples { needed: 5, got: n.min(tau.len()) });
    }
    let geom = crate::surface::GridGeom { nu: n, nv: 1, du: ds, dv: 1.0, periodic_u: false, periodic_v: false };
    let c: Vec<f64> = (0..n).map(|i| kappa[i] * kappa[i] * tau[i]).collect();
    let r1 = (0..n).map(|i| 0.5 * kappa[i].powi(3) + geom.d_uu(kappa, i, 0) - kappa[i] * tau[i] * tau[i]).collect();
    let r2 = (0..n).map(|i| geom.d_du(&c, i, 0)).collect();
    Ok((r1, r2))
}

/// Largest pointwise change of the Willmore density under `x ↦ G·x`,
/// relative to the density scale `max (|R_u|² + |R_v|²)/16` of the original.
/// Samples near points sent to ∞ are skipped.
pub fn moebius_density_invariance(chart: &SurfaceChart, g: &QMat2) -> Result<f64> {
    let opts = AnalysisOptions::default();
    let a = analyze_chart(chart, &opts)?;
    let moved = chart.moebius(g)?;
    let b = analyze_chart(&moved, &AnalysisOptions { mask_failures: true, ..opts })?;
    let scale = (0..a.len())
        .filter(|&k| a.frame_valid[k])
        .map(|k| (a.derivs[k].ru.norm_sqr() + a.derivs[k].rv.norm_sqr()) / 16.0)
        .fold(0.0, f64::max);
    let dev = (0..a.len())
        .filter(|&k| a.frame_valid[k] && b.frame_valid[k])
        .map(|k| (a.curv[k].density_w - b.curv[k].density_w).abs())
        .fold(0.0, f64::max);
    Ok(if scale > 0.0 { dev / scale } else { dev })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elastica_residual_examples() {
        let (r1, r2) = elastica_residual(&[0.0; 8], &[0.0; 8], 0.1).unwrap();
        assert!(r1.iter().chain(&r2).all(|&x| x == 0.0));
        let (r1, _) = elastica_residual(&[1.0; 8], &[0.0; 8], 0.1).unwrap();
        assert!(r1.iter().all(|&x| (x - 0.5).abs() < 1e-12));
        assert!(elastica_residual(&[1.0; 4], &[0.0; 4], 0.1).is_err());
    }
}
