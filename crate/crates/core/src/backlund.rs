//! Bäcklund transforms: path integration of `w/2` (forward) and `w/2 − dH`
//! (backward), the pointwise two-step transforms, and the duality between
//! Willmore surfaces in S³ and minimal surfaces in hyperbolic space.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qla::{adjoint_wrt, HermitianForm, QMat2};
use crate::quat::Quaternion;
use crate::surface::{
    analyze_chart, image_in_line_residual, kills_line_residual, AnalysisOptions, ChartAnalysis, GridGeom, Lin,
    SurfaceChart,
};
use crate::tolerances;

type Q = Quaternion;

/// Output grid of a transform. Masked samples hold zero and are never read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformResult {
    pub geom: GridGeom,
    pub u0: f64,
    pub v0: f64,
    pub values: Vec<Q>,
    pub mask: Vec<bool>,
    /// Largest `|∂u ω(∂v) − ∂v ω(∂u)|` of the integrated 1-form (zero for pointwise transforms).
    pub closedness_defect: f64,
    /// Largest difference between the two sweep orders.
    pub path_dependence: f64,
    /// Holonomy along the periodic directions `(u, v)`.
    pub periods: [Option<Q>; 2],
    pub basepoint: (usize, usize),
    pub constant: Q,
}

impl TransformResult {
    pub fn valid_count(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }

    /// The transform as a sampled chart. A periodic direction with a
    /// non-zero period is opened up (integration happened on the cover).
    pub fn to_chart(&self) -> Result<SurfaceChart> {
        let scale = self.values.iter().map(|q| q.norm()).fold(1.0, f64::max);
        let closes = |p: Option<Q>| p.is_some_and(|p| p.norm() <= tolerances::PERIOD * scale);
        let geom = GridGeom {
            periodic_u: self.geom.periodic_u && (self.periods[0].is_none() || closes(self.periods[0])),
            periodic_v: self.geom.periodic_v && (self.periods[1].is_none() || closes(self.periods[1])),
            ..self.geom
        };
        let mut chart = SurfaceChart::sampled(geom, self.values.clone())?;
        chart.u0 = self.u0;
        chart.v0 = self.v0;
        if self.mask.iter().any(|&m| !m) {
            chart.mask = Some(self.mask.clone());
        }
        Ok(chart)
    }
}

/// Trapezoid integration of the 1-form `(ω(∂u), ω(∂v))` from sample `(0, 0)`.
/// `u_first` integrates along the first row and then up every column;
/// otherwise along the first column and then across every row.
fn sweep<T: Lin>(g: &GridGeom, wu: &[T], wv: &[T], ok: &[bool], start: T, u_first: bool) -> (Vec<T>, Vec<bool>) {
    let n = g.len();
    let mut out = vec![T::default(); n];
    let mut valid = vec![false; n];
    let k0 = g.idx(0, 0);
    out[k0] = start;
    valid[k0] = ok[k0];
    let step_u = |out: &mut Vec<T>, valid: &mut Vec<bool>, iv: usize| {
        for iu in 1..g.nu {
            let (a, b) = (g.idx(iu - 1, iv), g.idx(iu, iv));
            valid[b] = valid[a] && ok[b];
            if valid[b] {
                out[b] = out[a] + (wu[a] + wu[b]) * (0.5 * g.du);
            }
        }
    };
    let step_v = |out: &mut Vec<T>, valid: &mut Vec<bool>, iu: usize| {
        for iv in 1..g.nv {
            let (a, b) = (g.idx(iu, iv - 1), g.idx(iu, iv));
            valid[b] = valid[a] && ok[b];
            if valid[b] {
                out[b] = out[a] + (wv[a] + wv[b]) * (0.5 * g.dv);
            }
        }
    };
    if u_first {
        step_u(&mut out, &mut valid, 0);
        for iu in 0..g.nu {
            step_v(&mut out, &mut valid, iu);
        }
    } else {
        step_v(&mut out, &mut valid, 0);
        for iv in 0..g.nv {
            step_u(&mut out, &mut valid, iv);
        }
    }
    (out, valid)
}

/// Integral of a 1-form around the closing loop of each periodic direction
/// through the base point.
fn periods<T: Lin>(g: &GridGeom, wu: &[T], wv: &[T]) -> [Option<T>; 2] {
    let pu = g.periodic_u.then(|| {
        (0..g.nu).fold(T::default(), |acc, iu| {
            let (a, b) = (g.idx(iu, 0), g.idx((iu + 1) % g.nu, 0));
            acc + (wu[a] + wu[b]) * (0.5 * g.du)
        })
    });
    let pv = g.periodic_v.then(|| {
        (0..g.nv).fold(T::default(), |acc, iv| {
            let (a, b) = (g.idx(0, iv), g.idx(0, (iv + 1) % g.nv));
            acc + (wv[a] + wv[b]) * (0.5 * g.dv)
        })
    });
    [pu, pv]
}

/// Result of integrating a 1-form over the grid.
pub struct Integrated<T> {
    pub values: Vec<T>,
    pub valid: Vec<bool>,
    pub closedness_defect: f64,
    pub path_dependence: f64,
    pub periods: [Option<T>; 2],
}

/// Integrates `ω` with both sweep orders and measures closedness; `norm` sizes values of `T`.
pub fn integrate_form<T: Lin>(
    g: &GridGeom,
    wu: &[T],
    wv: &[T],
    ok: &[bool],
    start: T,
    norm: impl Fn(&T) -> f64,
) -> Integrated<T> {
    let (a, va) = sweep(g, wu, wv, ok, start, true);
    let (b, vb) = sweep(g, wu, wv, ok, start, false);
    let path_dependence =
        (0..g.len()).filter(|&k| va[k] && vb[k]).map(|k| norm(&(a[k] + b[k] * -1.0))).fold(0.0, f64::max);
    let mut closedness_defect = 0.0f64;
    for k in 0..g.len() {
        let (iu, iv) = g.coords(k);
        if g.edge_distance(iu, iv) < tolerances::NESTED_MARGIN || !g.stencil_valid(ok, iu, iv) {
            continue;
        }
        let d = g.d_du(wv, iu, iv) + g.d_dv(wu, iu, iv) * -1.0;
        closedness_defect = closedness_defect.max(norm(&d));
    }
    Integrated { values: a, valid: va, closedness_defect, path_dependence, periods: periods(g, wu, wv) }
}

fn chart_analysis(chart: &SurfaceChart) -> Result<ChartAnalysis> {
    analyze_chart(chart, &AnalysisOptions::default())
}

fn one_step(chart: &SurfaceChart, start: Q, backward: bool) -> Result<TransformResult> {
    let an = chart_analysis(chart)?;
    let g = an.geom;
    let (wu, wv): (Vec<Q>, Vec<Q>) = (0..g.len())
        .map(|k| {
            let h = &an.hopf[k];
            let [hu, hv] = an.dh[k];
            if backward {
                (h.w_x * 0.5 - hu, h.w_jx * 0.5 - hv)
            } else {
                (h.w_x * 0.5, h.w_jx * 0.5)
            }
        })
        .unzip();
    let res = integrate_form(&g, &wu, &wv, &an.hopf_valid, start, |q| q.norm());
    Ok(TransformResult {
        geom: g,
        u0: chart.u0,
        v0: chart.v0,
        values: res.values,
        mask: res.valid,
        closedness_defect: res.closedness_defect,
        path_dependence: res.path_dependence,
        periods: res.periods,
        basepoint: (0, 0),
        constant: start,
    })
}

/// `g` with `dg = w/2` and `g(p₀) = g0`.
pub fn one_step_forward(chart: &SurfaceChart, g0: Q) -> Result<TransformResult> {
    one_step(chart, g0, false)
}

/// `h` with `dh = w/2 − dH` and `h(p₀) = h0`.
pub fn one_step_backward(chart: &SurfaceChart, h0: Q) -> Result<TransformResult> {
    one_step(chart, h0, true)
}

fn median(mut x: Vec<f64>) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.sort_by(f64::total_cmp);
    x[x.len() / 2]
}

/// Masks samples whose denominator is below the singularity floor: relative
/// to the chart median, and absolutely against the curvature-squared scale
/// `(|R_u|² + |R_v|²)/λ` so that an identically vanishing field masks everything.
fn pointwise(chart: &SurfaceChart, an: &ChartAnalysis, f: impl Fn(usize) -> (Q, Q)) -> TransformResult {
    let g = an.geom;
    let ok = &an.hopf_valid;
    let pairs: Vec<(Q, Q)> = (0..g.len()).map(|k| if ok[k] { f(k) } else { (Q::ZERO, Q::ZERO) }).collect();
    let med = median((0..g.len()).filter(|&k| ok[k]).map(|k| pairs[k].1.norm()).collect());
    let reference = median(
        (0..g.len())
            .filter(|&k| ok[k])
            .map(|k| (an.derivs[k].ru.norm_sqr() + an.derivs[k].rv.norm_sqr()) / an.frames[k].lambda)
            .collect(),
    );
    let floor = tolerances::SINGULARITY_FLOOR * med.max(reference);
    let mut values = vec![Q::ZERO; g.len()];
    let mut mask = vec![false; g.len()];
    for k in (0..g.len()).filter(|&k| ok[k]) {
        let (val, den) = pairs[k];
        if den.norm() > floor && med > 0.0 {
            values[k] = val;
            mask[k] = true;
        }
    }
    TransformResult {
        geom: g,
        u0: chart.u0,
        v0: chart.v0,
        values,
        mask,
        closedness_defect: 0.0,
        path_dependence: 0.0,
        periods: [None, None],
        basepoint: (0, 0),
        constant: Q::ZERO,
    }
}

/// `f̃ = f − w(∂u)⁻¹ v(∂u)`, spanning the kernel of `A`.
pub fn two_step_forward(chart: &SurfaceChart) -> Result<TransformResult> {
    let an = chart_analysis(chart)?;
    Ok(two_step_forward_from(chart, &an))
}

pub fn two_step_forward_from(chart: &SurfaceChart, an: &ChartAnalysis) -> TransformResult {
    pointwise(chart, an, |k| {
        let h = &an.hopf[k];
        let w = h.w_x;
        let val = if w.norm() > 0.0 { an.jets[k].f - w.inv() * h.v_x } else { Q::ZERO };
        (val, w)
    })
}

/// `f̂ = f + a(∂u) b(∂u)⁻¹`, spanning the image of `Q`.
pub fn two_step_backward(chart: &SurfaceChart) -> Result<TransformResult> {
    let an = chart_analysis(chart)?;
    Ok(two_step_backward_from(chart, &an))
}

pub fn two_step_backward_from(chart: &SurfaceChart, an: &ChartAnalysis) -> TransformResult {
    pointwise(chart, an, |k| {
        let h = &an.hopf[k];
        let b = h.b_x;
        let val = if b.norm() > 0.0 { an.jets[k].f + h.a_x * b.inv() } else { Q::ZERO };
        (val, b)
    })
}

/// Checks of the duality between Willmore surfaces in S³ and minimal
/// surfaces in the hyperbolic 4-balls bounded by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S3Diagnostics {
    /// `max |S − S*|`
    pub s_self_adjoint: f64,
    /// `max |F + F* + S|`
    pub f_normalization: f64,
    /// `max |g + ḡ − H|`
    pub g_real_part: f64,
    /// `max |S_g + S_g*|` over samples where `g` is an immersion.
    pub sg_anti_self_adjoint: f64,
    /// Fraction of samples where `g` was analyzed.
    pub g_immersed_fraction: f64,
    pub periods: [Option<QMat2>; 2],
    /// `A` or `w` vanishes identically, so `g` is constant.
    pub degenerate: bool,
    pub exact_jets: bool,
    pub fd_tol: f64,
    /// The forward transform `g` (lower-left entry of `F`).
    pub g: TransformResult,
}

pub fn s3_duality_check(chart: &SurfaceChart, form: &HermitianForm) -> Result<S3Diagnostics> {
    let scale = chart.values.iter().map(|q| q.norm()).fold(1.0, f64::max);
    let re = chart.max_real_part();
    if re > 1e-9 * scale {
        return Err(Error::NotImaginary(re));
    }
    let an = chart_analysis(chart)?;
    let g = an.geom;
    let n = g.len();
    let ok = &an.hopf_valid;
    let s_self_adjoint = (0..n)
        .filter(|&k| ok[k])
        .map(|k| {
            let s = an.hopf[k].sm;
            (s - adjoint_wrt(form, &s)).max_abs()
        })
        .fold(0.0, f64::max);
    let a_scale = (0..n).filter(|&k| ok[k]).map(|k| an.hopf[k].a_op.max_abs()).fold(0.0, f64::max);
    // dF = 2 *A: dF(∂u) = 2 A(∂v), dF(∂v) = −2 A(∂u)
    let fu: Vec<QMat2> = an.hopf.iter().map(|h| h.a_op_jx * 2.0).collect();
    let fv: Vec<QMat2> = an.hopf.iter().map(|h| h.a_op * -2.0).collect();
    let k0 = g.idx(0, 0);
    let f0 = an.hopf[k0].sm * -0.5;
    let res = integrate_form(&g, &fu, &fv, ok, f0, |m| m.max_abs());
    let mut f_normalization = 0.0f64;
    let mut g_real_part = 0.0f64;
    for k in (0..n).filter(|&k| res.valid[k]) {
        let f = res.values[k];
        f_normalization = f_normalization.max((f + adjoint_wrt(form, &f) + an.hopf[k].sm).max_abs());
        let gk = f.c();
        g_real_part = g_real_part.max((gk + gk.conj() - an.frames[k].hq).norm());
    }
    let gres = TransformResult {
        geom: g,
        u0: chart.u0,
        v0: chart.v0,
        values: res.values.iter().map(|m| m.c()).collect(),
        mask: res.valid.clone(),
        closedness_defect: res.closedness_defect,
        path_dependence: res.path_dependence,
        periods: [res.periods[0].map(|m| m.c()), res.periods[1].map(|m| m.c())],
        basepoint: (0, 0),
        constant: f0.c(),
    };
    // A (or just w, which makes g constant) at roundoff or truncation level counts as zero
    let floor = if an.exact_jets { 1e-8 } else { an.fd_tol() } * an.curvature_scale.max(1.0).powi(2);
    let w_scale =
        (0..n).filter(|&k| ok[k]).map(|k| an.hopf[k].w_x.norm().max(an.hopf[k].w_jx.norm())).fold(0.0, f64::max);
    let degenerate = a_scale <= floor || w_scale <= floor;
    let (mut sg, mut frac) = (0.0f64, 0.0);
    if !degenerate {
        let gchart = gres.to_chart()?;
        let gan = analyze_chart(&gchart, &AnalysisOptions { mask_failures: true, ..Default::default() })?;
        let mut count = 0usize;
        for k in (0..n).filter(|&k| gan.hopf_valid[k]) {
            let s = gan.hopf[k].sm;
            sg = sg.max((s + adjoint_wrt(form, &s)).max_abs());
            count += 1;
        }
        frac = count as f64 / n as f64;
    }
    Ok(S3Diagnostics {
        s_self_adjoint,
        f_normalization,
        g_real_part,
        sg_anti_self_adjoint: sg,
        g_immersed_fraction: frac,
        periods: res.periods,
        degenerate,
        exact_jets: an.exact_jets,
        fd_tol: an.fd_tol(),
        g: gres,
    })
}

fn masked_analysis(t: &TransformResult) -> Result<ChartAnalysis> {
    analyze_chart(&t.to_chart()?, &AnalysisOptions { mask_failures: true, ..Default::default() })
}

fn interior(an: &ChartAnalysis) -> Vec<bool> {
    an.interior_valid(&an.hopf_valid, tolerances::NESTED_MARGIN)
}

/// A pointwise comparison over the samples where both sides are trusted.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub max: f64,
    /// Size of the reference quantity, for relative statements.
    pub scale: f64,
    pub samples: usize,
}

impl Comparison {
    fn push(&mut self, diff: f64, reference: f64) {
        self.max = self.max.max(diff);
        self.scale = self.scale.max(reference);
        self.samples += 1;
    }

    pub fn relative(&self) -> f64 {
        if self.scale > 0.0 {
            self.max / self.scale
        } else {
            self.max
        }
    }
}

/// `df ∧ dg = ½(f_u w(∂v) − f_v w(∂u))` for `dg = w/2`.
pub fn wedge_defect(an: &ChartAnalysis) -> Comparison {
    let mut c = Comparison::default();
    for k in (0..an.len()).filter(|&k| an.hopf_valid[k]) {
        let (j, h) = (&an.jets[k], &an.hopf[k]);
        let d = (j.fu * h.w_jx - j.fv * h.w_x) * 0.5;
        c.push(d.norm(), j.fu.norm() * h.w_x.norm().max(h.w_jx.norm()));
    }
    c
}

/// Left normal of the forward transform against `−R` of the input.
pub fn forward_normal_defect(an: &ChartAnalysis, g: &TransformResult) -> Result<Comparison> {
    let gan = masked_analysis(g)?;
    let (a, b) = (interior(an), interior(&gan));
    let mut c = Comparison::default();
    for k in (0..an.len()).filter(|&k| a[k] && b[k]) {
        c.push((gan.frames[k].n + an.frames[k].r).norm(), 1.0);
    }
    Ok(c)
}

/// `w_h − 2 df` for the backward transform `h`.
pub fn backward_w_defect(an: &ChartAnalysis, h: &TransformResult) -> Result<Comparison> {
    let han = masked_analysis(h)?;
    let (a, b) = (interior(an), interior(&han));
    let mut c = Comparison::default();
    for k in (0..an.len()).filter(|&k| a[k] && b[k]) {
        let (j, w) = (&an.jets[k], &han.hopf[k]);
        let d = (w.w_x - j.fu * 2.0).norm().max((w.w_jx - j.fv * 2.0).norm());
        c.push(d, 2.0 * j.fu.norm());
    }
    Ok(c)
}

/// `|A(∂v) (f̃, 1)ᵀ|` against `|A|·(1 + |f̃|)`. `f̃` is built from the `∂u`
/// coefficients, which sit in `A(∂v)`, so this vanishes to rounding.
pub fn kernel_residual(an: &ChartAnalysis, tilde: &TransformResult) -> Comparison {
    let mut c = Comparison::default();
    for k in (0..an.len()).filter(|&k| tilde.mask[k]) {
        let (h, ft) = (&an.hopf[k], tilde.values[k]);
        c.push(kills_line_residual(&h.a_op_jx, ft), h.a_op_jx.max_abs() * (1.0 + ft.norm()));
    }
    c
}

/// `A(∂u) (f̃, 1)ᵀ`: both directions share a kernel only up to discretization error.
pub fn kernel_cross_residual(an: &ChartAnalysis, tilde: &TransformResult) -> Comparison {
    let mut c = Comparison::default();
    let inner = interior(an);
    for k in (0..an.len()).filter(|&k| tilde.mask[k] && inner[k]) {
        let (h, ft) = (&an.hopf[k], tilde.values[k]);
        c.push(kills_line_residual(&h.a_op, ft), h.a_op.max_abs() * (1.0 + ft.norm()));
    }
    c
}

/// `(f̂, 1)` spans the image of `Q(∂v)`.
pub fn image_residual(an: &ChartAnalysis, hat: &TransformResult) -> Comparison {
    let mut c = Comparison::default();
    for k in (0..an.len()).filter(|&k| hat.mask[k]) {
        let (h, fh) = (&an.hopf[k], hat.values[k]);
        c.push(image_in_line_residual(&h.q_op_jx, fh), h.q_op_jx.max_abs() * (1.0 + fh.norm()));
    }
    c
}

/// Entrywise `Q̃ − A`, with `Q̃` the Hopf field of `f̃`.
pub fn q_tilde_defect(an: &ChartAnalysis, tilde: &TransformResult) -> Result<Comparison> {
    let tan = masked_analysis(tilde)?;
    let (a, b) = (interior(an), interior(&tan));
    let mut c = Comparison::default();
    for k in (0..an.len()).filter(|&k| a[k] && b[k]) {
        let (h, t) = (&an.hopf[k], &tan.hopf[k]);
        let d = (t.q_op - h.a_op).max_abs().max((t.q_op_jx - h.a_op_jx).max_abs());
        c.push(d, h.a_op.max_abs().max(h.a_op_jx.max_abs()));
    }
    Ok(c)
}

/// `f̂` of `f̃` against `f`.
pub fn hat_tilde_defect(an: &ChartAnalysis, tilde: &TransformResult) -> Result<Comparison> {
    let tan = masked_analysis(tilde)?;
    let hat = two_step_backward_from(&tilde.to_chart()?, &tan);
    let a = interior(an);
    let b = interior(&tan);
    let mut c = Comparison::default();
    for k in (0..an.len()).filter(|&k| a[k] && b[k] && hat.mask[k]) {
        c.push((hat.values[k] - an.jets[k].f).norm(), an.jets[k].f.norm().max(1.0));
    }
    Ok(c)
}

/// `f̃ − (f + H_g)`, which should be the constant fixed by `g(p₀)`.
pub fn chain_defect(an: &ChartAnalysis, g: &TransformResult, tilde: &TransformResult) -> Result<Comparison> {
    let gan = masked_analysis(g)?;
    let (a, b) = (interior(an), interior(&gan));
    let mut c = Comparison::default();
    for k in (0..an.len()).filter(|&k| a[k] && b[k] && tilde.mask[k]) {
        let d = tilde.values[k] - an.jets[k].f - gan.frames[k].hq;
        c.push(d.norm(), tilde.values[k].norm().max(1.0));
    }
    Ok(c)
}
