//! The analysis report: functionals, classifications, optional transforms,
//! and pass/fail of every invariant suite, as one deterministic JSON document.

use serde::{Deserialize, Serialize};

use crate::backlund::{
    one_step_backward, one_step_forward, s3_duality_check, two_step_backward_from, two_step_forward_from,
    TransformResult,
};
use crate::error::Error;
use crate::qla::{HermitianForm, QMat2};
use crate::quat::Quaternion;
use crate::surface::{
    analyze_chart, image_in_line_residual, kills_line_residual, AnalysisOptions, ChartAnalysis, SurfaceChart,
};
use crate::tolerances::{self, Ledger};
use crate::twistor::{lift_holomorphicity_defect, lift_tol, twistor_lift_from, LiftVerdict};
use crate::willmore::{
    classify, functionals, harmonicity_pairs, type_identity_defect, Branch, FunctionalsReport, SuperConformal,
};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    /// Conformal tolerance override for the input chart.
    pub conformal_tol: Option<f64>,
    pub lift: bool,
    pub transforms: bool,
    pub duality: bool,
}

/// One invariant check: `value ≤ tol` passes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
    /// Not applicable to this chart (for example degrees of an open patch).
    pub skipped: bool,
}

impl Suite {
    fn check(name: &str, value: f64, tol: f64) -> Suite {
        Suite { name: name.into(), value, tol, pass: value <= tol, skipped: false }
    }

    fn skip(name: &str) -> Suite {
        Suite { name: name.into(), value: 0.0, tol: 0.0, pass: true, skipped: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransformSummary {
    pub kind: String,
    pub valid_fraction: f64,
    pub closedness_defect: f64,
    pub path_dependence: f64,
    pub periods: [Option<Quaternion>; 2],
}

impl TransformSummary {
    fn of(kind: &str, t: &TransformResult) -> TransformSummary {
        TransformSummary {
            kind: kind.into(),
            valid_fraction: t.valid_count() as f64 / t.mask.len() as f64,
            closedness_defect: t.closedness_defect,
            path_dependence: t.path_dependence,
            periods: t.periods,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualitySummary {
    pub s_self_adjoint: f64,
    pub f_normalization: f64,
    pub g_real_part: f64,
    pub sg_anti_self_adjoint: f64,
    pub g_immersed_fraction: f64,
    pub degenerate: bool,
    pub fd_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportError {
    pub stage: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub source: String,
    pub functionals: Option<FunctionalsReport>,
    /// `dw` vanishes to FD order.
    pub willmore: Option<bool>,
    pub willmore_tol: f64,
    pub superconformal: Option<SuperConformal>,
    pub lift: Option<LiftVerdict>,
    pub transforms: Vec<TransformSummary>,
    pub duality: Option<DualitySummary>,
    pub suites: Vec<Suite>,
    pub errors: Vec<ReportError>,
    pub tolerances: Ledger,
    pub pass: bool,
}

impl Report {
    fn empty(source: &str) -> Report {
        Report {
            tool: "quatsurf".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            source: source.into(),
            functionals: None,
            willmore: None,
            willmore_tol: 0.0,
            superconformal: None,
            lift: None,
            transforms: vec![],
            duality: None,
            suites: vec![],
            errors: vec![],
            tolerances: Ledger::default(),
            pass: false,
        }
    }

    pub fn failed_suites(&self) -> impl Iterator<Item = &Suite> {
        self.suites.iter().filter(|s| !s.pass)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    fn error(&mut self, stage: &str, e: &Error) {
        self.errors.push(ReportError { stage: stage.into(), message: e.to_string() });
    }
}

fn max_over(an: &ChartAnalysis, valid: &[bool], f: impl Fn(usize) -> f64) -> f64 {
    (0..an.len()).filter(|&k| valid[k]).map(f).fold(0.0, f64::max)
}

/// Invariant suites of the surface engine.
pub fn surface_suites(an: &ChartAnalysis, fr: &FunctionalsReport) -> Vec<Suite> {
    let ok = &an.frame_valid;
    let hv = &an.hopf_valid;
    let fd = an.fd_tol();
    let mut out = vec![];

    let conf = max_over(an, ok, |k| an.frames[k].conformal_defect);
    out.push(Suite::check("conformality", conf, an.conformal_tol));

    // the two mean curvature formulas
    let hscale = max_over(an, ok, |k| an.frames[k].hq.norm()).max(1.0);
    let hq = max_over(an, ok, |k| (an.frames[k].hq - an.frames[k].hq_dn).norm()) / hscale;
    out.push(Suite::check("mean-curvature-consistency", hq, if an.exact_jets { 1e-8 } else { fd }));

    let dscale = max_over(an, ok, |k| {
        (an.derivs[k].ru.norm_sqr()
            + an.derivs[k].rv.norm_sqr()
            + an.derivs[k].nu.norm_sqr()
            + an.derivs[k].nv.norm_sqr())
            / 16.0
    })
    .max(1.0);
    out.push(Suite::check("density-identity", fr.density_identity_max / dscale, fd));

    let ds = an.ds_fd();
    let ok2 = an.second_level_valid();
    let sscale = max_over(an, &ok2, |k| ds[k][0].max_abs().powi(2) + ds[k][1].max_abs().powi(2)).max(1.0);
    out.push(Suite::check("conformal-gauss-map", fr.gauss_check_max / sscale, fd));

    let hopf_scale = max_over(an, hv, |k| {
        let h = &an.hopf[k];
        let m = [h.a_op, h.a_op_jx, h.q_op, h.q_op_jx].iter().map(QMat2::max_abs).fold(0.0, f64::max);
        m * (1.0 + an.jets[k].f.norm())
    })
    .max(1.0);
    let ident = max_over(an, hv, |k| type_identity_defect(an, k)) / hopf_scale.powi(2);
    out.push(Suite::check("type-identity", ident, 1e-8));
    let kills = max_over(an, hv, |k| {
        let (h, f) = (&an.hopf[k], an.jets[k].f);
        kills_line_residual(&h.q_op, f).max(kills_line_residual(&h.q_op_jx, f))
    }) / hopf_scale;
    out.push(Suite::check("q-kills-line", kills, 1e-8));
    let image = max_over(an, hv, |k| {
        let (h, f) = (&an.hopf[k], an.jets[k].f);
        image_in_line_residual(&h.a_op, f).max(image_in_line_residual(&h.a_op_jx, f))
    }) / hopf_scale;
    out.push(Suite::check("a-image-in-line", image, 1e-8));

    let inv = an.hopf_invariant();
    let inner = an.interior_valid(&ok2, tolerances::NESTED_MARGIN);
    let cross = max_over(an, &inner, |k| {
        let (h, p) = (&an.hopf[k], &inv[k]);
        [(h.a_op - p.a_x), (h.a_op_jx - p.a_jx), (h.q_op - p.q_x), (h.q_op_jx - p.q_jx)]
            .iter()
            .map(QMat2::max_abs)
            .fold(0.0, f64::max)
    }) / hopf_scale;
    out.push(Suite::check("hopf-cross-validation", cross, fd));

    let harm = harmonicity_pairs(an);
    let hm = harm.iter().flatten().map(|(l, r)| (*l - *r).max_abs()).fold(0.0, f64::max) / hopf_scale;
    out.push(Suite::check("harmonicity", hm, fd));

    out.push(Suite::check("willmore-positivity", (-fr.w).max(0.0), tolerances::ALGEBRA));
    let e_id = (fr.e - (8.0 * std::f64::consts::PI * fr.w - 4.0 * std::f64::consts::PI * fr.deg_s)).abs();
    out.push(Suite::check("energy-identity", e_id / fr.e.abs().max(1.0), 1e-12));
    out.push(Suite::check("gauss-bonnet", fr.gauss_bonnet_defect.abs(), 1e-10));
    if fr.topological {
        let tol = if an.exact_jets { 1e-2 } else { fd };
        out.push(Suite::check("degree-integrality", (fr.deg_s - fr.deg_s.round()).abs(), tol));
        out.push(Suite::check("degree-consistency", (fr.deg_s - (fr.deg_n - fr.deg_r)).abs(), tol));
    } else {
        out.push(Suite::skip("degree-integrality"));
        out.push(Suite::skip("degree-consistency"));
    }
    out
}

/// Lift verdict from an analysis of `f` and one of `f̄`.
pub fn lift_verdict(an: &ChartAnalysis, conj: &ChartAnalysis) -> crate::error::Result<LiftVerdict> {
    let defect_f = lift_holomorphicity_defect(&twistor_lift_from(an))?;
    let defect_conj = lift_holomorphicity_defect(&twistor_lift_from(conj))?;
    let tol = lift_tol(an);
    let branch = if defect_f <= tol {
        Some(Branch::R)
    } else if defect_conj <= tol {
        Some(Branch::N)
    } else {
        None
    };
    Ok(LiftVerdict { defect_f, defect_conj, tol, super_conformal: branch.is_some(), branch })
}

/// Runs the engine over a chart. Module errors become report entries.
pub fn analyze(chart: &SurfaceChart, source: &str, opts: &ReportOptions) -> Report {
    let mut rep = Report::empty(source);
    let aopts = AnalysisOptions { conformal_tol: opts.conformal_tol, ..Default::default() };
    let an = match analyze_chart(chart, &aopts) {
        Ok(an) => an,
        Err(e) => {
            rep.error("analysis", &e);
            return rep;
        }
    };
    let fr = functionals(chart, &an);
    let sc = classify(&an);
    rep.willmore_tol = an.fd_tol();
    rep.willmore = Some(fr.residual_max <= rep.willmore_tol);
    rep.suites = surface_suites(&an, &fr);

    if opts.lift {
        let conj = analyze_chart(&chart.conjugate(), &aopts);
        match conj.and_then(|c| lift_verdict(&an, &c)) {
            Ok(lv) => {
                rep.suites.push(Suite::check(
                    "lift-verdict-agreement",
                    if lv.branch == sc.branch { 0.0 } else { 1.0 },
                    0.0,
                ));
                rep.lift = Some(lv);
            }
            Err(e) => rep.error("lift", &e),
        }
    }

    if opts.transforms {
        match one_step_forward(chart, Quaternion::ZERO) {
            Ok(t) => rep.transforms.push(TransformSummary::of("forward", &t)),
            Err(e) => rep.error("forward", &e),
        }
        match one_step_backward(chart, Quaternion::ZERO) {
            Ok(t) => rep.transforms.push(TransformSummary::of("backward", &t)),
            Err(e) => rep.error("backward", &e),
        }
        rep.transforms.push(TransformSummary::of("two-forward", &two_step_forward_from(chart, &an)));
        rep.transforms.push(TransformSummary::of("two-backward", &two_step_backward_from(chart, &an)));
    }

    if opts.duality {
        let scale = chart.values.iter().map(|q| q.norm()).fold(1.0, f64::max);
        let names = ["isotropy", "dual-real-part", "dual-hyperbolic-minimal"];
        if chart.max_real_part() > 1e-9 * scale {
            rep.suites.extend(names.iter().map(|n| Suite::skip(n)));
        } else {
            match s3_duality_check(chart, &HermitianForm::s3()) {
                Ok(d) => {
                    let iso_tol = if d.exact_jets { 1e-9 } else { d.fd_tol };
                    rep.suites.push(Suite::check(names[0], d.s_self_adjoint, iso_tol));
                    rep.suites.push(Suite::check(names[1], d.g_real_part, d.fd_tol));
                    // the dual surface is only defined for Willmore input with A ≠ 0
                    if !d.degenerate && rep.willmore == Some(true) {
                        rep.suites.push(Suite::check(names[2], d.sg_anti_self_adjoint, 10.0 * d.fd_tol));
                    } else {
                        rep.suites.push(Suite::skip(names[2]));
                    }
                    rep.duality = Some(DualitySummary {
                        s_self_adjoint: d.s_self_adjoint,
                        f_normalization: d.f_normalization,
                        g_real_part: d.g_real_part,
                        sg_anti_self_adjoint: d.sg_anti_self_adjoint,
                        g_immersed_fraction: d.g_immersed_fraction,
                        degenerate: d.degenerate,
                        fd_tol: d.fd_tol,
                    });
                }
                Err(e) => rep.error("duality", &e),
            }
        }
    }

    rep.functionals = Some(fr);
    rep.superconformal = Some(sc);
    rep.pass = rep.errors.is_empty() && rep.suites.iter().all(|s| s.pass);
    rep
}

/// Per-sample frame fields. Column order is fixed:
/// `iu, iv, u, v, f(4), N(4), R(4), H(4), lambda, K, Kperp, density_w, valid`.
pub fn frame_csv(chart: &SurfaceChart, an: &ChartAnalysis) -> crate::io::Csv {
    let mut header = vec!["iu", "iv", "u", "v"];
    let quats = [
        ["f_w", "f_x", "f_y", "f_z"],
        ["n_w", "n_x", "n_y", "n_z"],
        ["r_w", "r_x", "r_y", "r_z"],
        ["h_w", "h_x", "h_y", "h_z"],
    ];
    header.extend(quats.iter().flatten());
    header.extend(["lambda", "k", "kperp", "density_w", "valid"]);
    let mut csv = crate::io::Csv::new(&header);
    for k in 0..an.len() {
        let (iu, iv) = an.geom.coords(k);
        let (u, v) = chart.uv(iu, iv);
        let (fr, c) = (&an.frames[k], &an.curv[k]);
        let mut row = vec![iu as f64, iv as f64, u, v];
        for q in [an.jets[k].f, fr.n, fr.r, fr.hq] {
            row.extend(q.to_array());
        }
        row.extend([fr.lambda, c.k, c.kperp, c.density_w, if an.frame_valid[k] { 1.0 } else { 0.0 }]);
        csv.push(row);
    }
    csv
}
