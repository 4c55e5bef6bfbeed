//! Conformal surface charts and the per-point engine.

mod engine;
mod grid;
mod point;

pub use engine::{analyze_chart, AnalysisOptions, ChartAnalysis, DerivativeMode};
pub use grid::{pairwise_sum, GridGeom, Lin, Stencil};
pub use point::{
    conj_affine, curvatures_at, frame_at, frame_from, hopf_affine_at, hopf_invariant_at, image_in_line_residual,
    kills_line_residual, mean_curvature_sphere_at, normal_derivs_from_jet, normals, second_fundamental, wedge_star,
    Curvatures, HopfEval, HopfPair, Jet2, NormalDerivs, PointFrame,
};

use crate::analytic::AnalyticSurface;
use crate::error::{Error, Result};
use crate::hp1::{moebius_apply, AffinePoint};
use crate::qla::QMat2;
use crate::quat::Quaternion;

type Q = Quaternion;

/// A sampled conformal chart `f(u, v)`, optionally backed by a closed form
/// that supplies exact jets.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceChart {
    pub geom: GridGeom,
    pub u0: f64,
    pub v0: f64,
    /// Caller's assertion that the chart covers a closed surface (needed for degrees
    /// when the grid is not doubly periodic).
    pub closed: bool,
    pub values: Vec<Q>,
    /// `false` marks holes (for example zeros of a transform's denominator).
    pub mask: Option<Vec<bool>>,
    pub analytic: Option<AnalyticSurface>,
    /// Exact jets supplied by the generator (for example an ODE state), used
    /// when there is no closed form.
    pub jets: Option<Vec<Jet2>>,
}

impl SurfaceChart {
    pub fn sampled(geom: GridGeom, values: Vec<Q>) -> Result<SurfaceChart> {
        geom.validate()?;
        if values.len() != geom.len() {
            return Err(Error::Input(format!("expected {} samples, got {}", geom.len(), values.len())));
        }
        if let Some(k) = values.iter().position(|q| !q.is_finite()) {
            let (iu, iv) = geom.coords(k);
            return Err(Error::Input(format!("non-finite sample at ({iu}, {iv})")));
        }
        Ok(SurfaceChart { geom, u0: 0.0, v0: 0.0, closed: false, values, mask: None, analytic: None, jets: None })
    }

    /// Samples a closed form at `(u0 + iu du, v0 + iv dv)`.
    pub fn from_analytic(surface: AnalyticSurface, geom: GridGeom, u0: f64, v0: f64) -> Result<SurfaceChart> {
        geom.validate()?;
        let values = (0..geom.len())
            .map(|k| {
                let (iu, iv) = geom.coords(k);
                surface.value(u0 + iu as f64 * geom.du, v0 + iv as f64 * geom.dv)
            })
            .collect();
        Ok(SurfaceChart { geom, u0, v0, closed: false, values, mask: None, analytic: Some(surface), jets: None })
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> SurfaceChart {
        self.mask = Some(mask);
        self
    }

    pub fn uv(&self, iu: usize, iv: usize) -> (f64, f64) {
        (self.u0 + iu as f64 * self.geom.du, self.v0 + iv as f64 * self.geom.dv)
    }

    pub fn is_valid(&self, k: usize) -> bool {
        self.mask.as_ref().is_none_or(|m| m[k])
    }

    pub fn sample(&self, iu: usize, iv: usize) -> Q {
        self.values[self.geom.idx(iu, iv)]
    }

    /// Copy without the closed form, so every derivative comes from the samples.
    pub fn sampled_only(&self) -> SurfaceChart {
        SurfaceChart { analytic: None, jets: None, ..self.clone() }
    }

    /// `f̄`, which swaps the roles of `N` and `R`.
    pub fn conjugate(&self) -> SurfaceChart {
        SurfaceChart {
            values: self.values.iter().map(|q| q.conj()).collect(),
            analytic: self.analytic.clone().map(AnalyticSurface::conjugate),
            jets: self.jets.as_ref().map(|js| {
                js.iter()
                    .map(|j| Jet2 {
                        f: j.f.conj(),
                        fu: j.fu.conj(),
                        fv: j.fv.conj(),
                        fuu: j.fuu.conj(),
                        fuv: j.fuv.conj(),
                        fvv: j.fvv.conj(),
                    })
                    .collect()
            }),
            ..self.clone()
        }
    }

    /// Image under `x ↦ (a x + b)(c x + d)⁻¹`. Samples sent to ∞ are masked.
    pub fn moebius(&self, g: &QMat2) -> Result<SurfaceChart> {
        let mut mask = self.mask.clone().unwrap_or_else(|| vec![true; self.values.len()]);
        let mut values = Vec::with_capacity(self.values.len());
        for (k, &x) in self.values.iter().enumerate() {
            match moebius_apply(g, AffinePoint::Finite(x))? {
                AffinePoint::Finite(y) => values.push(y),
                AffinePoint::Infinity => {
                    values.push(Q::ZERO);
                    mask[k] = false;
                }
            }
        }
        let all = mask.iter().all(|&m| m);
        Ok(SurfaceChart {
            values,
            mask: if all && self.mask.is_none() { None } else { Some(mask) },
            analytic: self.analytic.clone().map(|s| s.moebius(*g)),
            jets: None,
            ..self.clone()
        })
    }

    /// Is every sample in Im H?
    pub fn max_real_part(&self) -> f64 {
        self.values.iter().enumerate().filter(|&(k, _)| self.is_valid(k)).map(|(_, q)| q.w.abs()).fold(0.0, f64::max)
    }
}

/// Jet at a sample: exact when the chart has a closed form or supplied jets, otherwise central
/// differences (wrapping in periodic directions, one-sided second order at open edges).
pub fn jet_at(chart: &SurfaceChart, iu: usize, iv: usize) -> Result<Jet2> {
    chart.geom.check_index(iu, iv)?;
    if let Some(s) = &chart.analytic {
        let (u, v) = chart.uv(iu, iv);
        return Ok(s.jet(u, v));
    }
    if let Some(js) = &chart.jets {
        return Ok(js[chart.geom.idx(iu, iv)]);
    }
    let g = &chart.geom;
    let f = &chart.values;
    Ok(Jet2 {
        f: f[g.idx(iu, iv)],
        fu: g.d_du(f, iu, iv),
        fv: g.d_dv(f, iu, iv),
        fuu: g.d_uu(f, iu, iv),
        fuv: g.d_uv(f, iu, iv),
        fvv: g.d_vv(f, iu, iv),
    })
}
