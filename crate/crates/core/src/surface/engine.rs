//! Whole-chart evaluation: frames, curvatures, Hopf fields and their derivatives.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::GridGeom;
use super::point::*;
use super::{jet_at, SurfaceChart};
use crate::error::{Error, Result};
use crate::qla::QMat2;
use crate::quat::Quaternion;
use crate::tolerances;

type Q = Quaternion;

/// How `dN` and `dR` are obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DerivativeMode {
    /// Through the second derivatives of `f` in each jet.
    #[default]
    Jet,
    /// Central differences of the sampled `N`, `R` fields.
    FieldFd,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AnalysisOptions {
    pub mode: DerivativeMode,
    /// Overrides the default conformal tolerance.
    pub conformal_tol: Option<f64>,
    /// Turn degenerate or non-conformal samples into holes instead of errors.
    pub mask_failures: bool,
}

/// Every per-sample field of a chart. Fields at invalid samples hold zeros.
#[derive(Clone, Debug)]
pub struct ChartAnalysis {
    pub geom: GridGeom,
    pub exact_jets: bool,
    pub jets: Vec<Jet2>,
    pub frames: Vec<PointFrame>,
    pub derivs: Vec<NormalDerivs>,
    pub curv: Vec<Curvatures>,
    pub dh: Vec<[Q; 2]>,
    pub hopf: Vec<HopfEval>,
    /// Frames, normal derivatives and curvatures are meaningful.
    pub frame_valid: Vec<bool>,
    /// Additionally `dH`, `w` and the Hopf fields are meaningful.
    pub hopf_valid: Vec<bool>,
    pub conformal_tol: f64,
    /// Largest `(|f_uu| + |f_uv| + |f_vv|) / |f_u|` over the chart.
    pub curvature_scale: f64,
}

fn par_map<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    (0..n).into_par_iter().map(f).collect()
}

fn locate(e: Error, iu: usize, iv: usize) -> Error {
    match e {
        Error::NotImmersed { norm, .. } => Error::NotImmersed { iu, iv, norm },
        Error::NonConformal { defect, tol, .. } => Error::NonConformal { iu, iv, defect, tol },
        e => e,
    }
}

fn median(mut x: Vec<f64>) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    x.sort_by(f64::total_cmp);
    x[x.len() / 2]
}

pub fn analyze_chart(chart: &SurfaceChart, opts: &AnalysisOptions) -> Result<ChartAnalysis> {
    let g = chart.geom;
    g.validate()?;
    let n = g.len();
    let exact = chart.analytic.is_some() || chart.jets.is_some();
    let base: Vec<bool> = (0..n).map(|k| chart.is_valid(k)).collect();

    let jet_valid: Vec<bool> = par_map(n, |k| {
        let (iu, iv) = g.coords(k);
        base[k] && (exact || g.stencil_valid(&base, iu, iv))
    });
    let jets: Vec<Jet2> = par_map(n, |k| {
        let (iu, iv) = g.coords(k);
        if jet_valid[k] {
            jet_at(chart, iu, iv).unwrap_or_default()
        } else {
            Jet2::default()
        }
    });

    let lam_med = median((0..n).filter(|&k| jet_valid[k]).map(|k| jets[k].fu.norm()).collect());
    let floor = tolerances::IMMERSION_FLOOR * lam_med;
    let h = g.h();
    // chart-wide curvature scale: the local one vanishes at inflection points
    let curv_scale = (0..n)
        .filter(|&k| jet_valid[k])
        .map(|k| {
            let j = &jets[k];
            (j.fuu.norm() + j.fuv.norm() + j.fvv.norm()) / j.fu.norm().max(f64::MIN_POSITIVE)
        })
        .fold(0.0, f64::max);
    let fd_conformal = tolerances::ANALYTIC_CONFORMAL + tolerances::FD_FACTOR * h * h * curv_scale * curv_scale;
    let conformal_tol = opts.conformal_tol.unwrap_or(if exact { tolerances::ANALYTIC_CONFORMAL } else { fd_conformal });
    let conformal_tol_at = |_: &Jet2| conformal_tol;

    // N, R, λ per sample
    let basic: Vec<Result<Option<(Q, Q, f64, f64)>>> = par_map(n, |k| {
        if !jet_valid[k] {
            return Ok(None);
        }
        let (iu, iv) = g.coords(k);
        let jet = &jets[k];
        let lambda = jet.fu.norm();
        if !(lambda > floor) {
            return Err(Error::NotImmersed { iu, iv, norm: lambda });
        }
        let (nn, rr, lambda, defect) = normals(jet).map_err(|e| locate(e, iu, iv))?;
        let tol = conformal_tol_at(jet);
        if defect > tol {
            return Err(Error::NonConformal { iu, iv, defect, tol });
        }
        Ok(Some((nn, rr, lambda, defect)))
    });
    let mut basic_ok = Vec::with_capacity(n);
    for b in basic {
        match b {
            Ok(x) => basic_ok.push(x),
            Err(e) if opts.mask_failures => {
                let _ = e;
                basic_ok.push(None)
            }
            Err(e) => return Err(e),
        }
    }
    let nr_valid: Vec<bool> = basic_ok.iter().map(|b| b.is_some()).collect();
    let n_field: Vec<Q> = basic_ok.iter().map(|b| b.map_or(Q::ZERO, |x| x.0)).collect();
    let r_field: Vec<Q> = basic_ok.iter().map(|b| b.map_or(Q::ZERO, |x| x.1)).collect();

    let frame_valid: Vec<bool> = match opts.mode {
        DerivativeMode::Jet => nr_valid.clone(),
        DerivativeMode::FieldFd => par_map(n, |k| {
            let (iu, iv) = g.coords(k);
            nr_valid[k] && g.stencil_valid(&nr_valid, iu, iv)
        }),
    };
    let derivs: Vec<NormalDerivs> = par_map(n, |k| {
        if !frame_valid[k] {
            return NormalDerivs::default();
        }
        let (iu, iv) = g.coords(k);
        match opts.mode {
            DerivativeMode::Jet => normal_derivs_from_jet(&jets[k], n_field[k], r_field[k]),
            DerivativeMode::FieldFd => NormalDerivs {
                nu: g.d_du(&n_field, iu, iv),
                nv: g.d_dv(&n_field, iu, iv),
                ru: g.d_du(&r_field, iu, iv),
                rv: g.d_dv(&r_field, iu, iv),
            },
        }
    });
    let frames: Vec<PointFrame> = par_map(n, |k| match basic_ok[k] {
        Some((nn, rr, lambda, defect)) if frame_valid[k] => frame_from(&jets[k], nn, rr, lambda, defect, &derivs[k]),
        _ => PointFrame::default(),
    });
    let curv: Vec<Curvatures> =
        par_map(n, |k| if frame_valid[k] { curvatures_at(&frames[k], &derivs[k]) } else { Curvatures::default() });

    let hq: Vec<Q> = frames.iter().map(|f| f.hq).collect();
    let hopf_valid: Vec<bool> = par_map(n, |k| {
        let (iu, iv) = g.coords(k);
        frame_valid[k] && g.stencil_valid(&frame_valid, iu, iv)
    });
    let dh: Vec<[Q; 2]> = par_map(n, |k| {
        let (iu, iv) = g.coords(k);
        if hopf_valid[k] {
            [g.d_du(&hq, iu, iv), g.d_dv(&hq, iu, iv)]
        } else {
            [Q::ZERO; 2]
        }
    });
    let hopf: Vec<HopfEval> = par_map(n, |k| {
        if hopf_valid[k] {
            hopf_affine_at(jets[k].f, &frames[k], &derivs[k], dh[k])
        } else {
            HopfEval::default()
        }
    });

    Ok(ChartAnalysis {
        geom: g,
        exact_jets: exact,
        curvature_scale: curv_scale,
        jets,
        frames,
        derivs,
        curv,
        dh,
        hopf,
        frame_valid,
        hopf_valid,
        conformal_tol,
    })
}

impl ChartAnalysis {
    pub fn len(&self) -> usize {
        self.geom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.geom.is_empty()
    }

    pub fn f(&self) -> Vec<Q> {
        self.jets.iter().map(|j| j.f).collect()
    }

    pub fn s_field(&self) -> Vec<QMat2> {
        self.hopf.iter().map(|h| h.sm).collect()
    }

    /// Samples where fields built by one more difference of the Hopf-level
    /// fields (`S`, `w`) are meaningful.
    pub fn second_level_valid(&self) -> Vec<bool> {
        let g = self.geom;
        par_map(self.len(), |k| {
            let (iu, iv) = g.coords(k);
            self.hopf_valid[k] && g.stencil_valid(&self.hopf_valid, iu, iv)
        })
    }

    /// `dS(∂u)`, `dS(∂v)` by differences of the mean curvature sphere field.
    pub fn ds_fd(&self) -> Vec<[QMat2; 2]> {
        let g = self.geom;
        let s = self.s_field();
        let ok = self.second_level_valid();
        par_map(self.len(), |k| {
            let (iu, iv) = g.coords(k);
            if ok[k] {
                [g.d_du(&s, iu, iv), g.d_dv(&s, iu, iv)]
            } else {
                [QMat2::ZERO; 2]
            }
        })
    }

    /// `A`, `Q` from `S` and its differences.
    pub fn hopf_invariant(&self) -> Vec<HopfPair> {
        let ds = self.ds_fd();
        let ok = self.second_level_valid();
        par_map(self.len(), |k| if ok[k] { hopf_invariant_at(&self.hopf[k].sm, ds[k]) } else { HopfPair::default() })
    }

    /// `dw(∂u, ∂v) = ∂u[w(∂v)] − ∂v[w(∂u)]`.
    pub fn dw_field(&self) -> Vec<Q> {
        let g = self.geom;
        let wx: Vec<Q> = self.hopf.iter().map(|h| h.w_x).collect();
        let wjx: Vec<Q> = self.hopf.iter().map(|h| h.w_jx).collect();
        let ok = self.second_level_valid();
        par_map(self.len(), |k| {
            let (iu, iv) = g.coords(k);
            if ok[k] {
                g.d_du(&wjx, iu, iv) - g.d_dv(&wx, iu, iv)
            } else {
                Q::ZERO
            }
        })
    }

    /// `valid` restricted to samples at least `margin` samples from an open edge.
    pub fn interior_valid(&self, valid: &[bool], margin: usize) -> Vec<bool> {
        (0..self.len())
            .map(|k| {
                let (iu, iv) = self.geom.coords(k);
                valid[k] && self.geom.edge_distance(iu, iv) >= margin
            })
            .collect()
    }

    /// Finite-difference tolerance for this chart: `FD_FACTOR · h² · max(1, curvature scale)`.
    pub fn fd_tol(&self) -> f64 {
        tolerances::fd_tol(self.geom.h(), self.curvature_scale)
    }

    pub fn median_lambda(&self) -> f64 {
        median((0..self.len()).filter(|&k| self.frame_valid[k]).map(|k| self.frames[k].lambda).collect())
    }
}
