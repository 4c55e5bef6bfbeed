//! Twistor lifts. `H² = C⁴` as a right complex vector space, and a conformal
//! immersion lifts to the line `{ψ ∈ L : Jψ = ψ i}` in CP³, where `J` acts on
//! `L = (f, 1)ᵀ H` by right multiplication with `−R` (so `R q = −q i`).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::Csv;
use crate::quat::Quaternion;
use crate::surface::{analyze_chart, AnalysisOptions, ChartAnalysis, GridGeom, SurfaceChart};
use crate::tolerances;
use crate::willmore::Branch;

type Q = Quaternion;
type C = Complex64;

/// `a = z1 + z2 j` with `z1 = a₀ + a₁ i`, `z2 = a₂ + a₃ i`.
pub fn quat_to_c2(a: Q) -> (C, C) {
    (C::new(a.w, a.x), C::new(a.y, a.z))
}

pub fn c2_to_quat(z1: C, z2: C) -> Q {
    Q::new(z1.re, z1.im, z2.re, z2.im)
}

/// Coordinates `(z1, z̄2)`, in which right multiplication by `i` is
/// multiplication by `i` (because `z2 j i = −z2 i j`).
pub fn right_coords(a: Q) -> [C; 2] {
    let (z1, z2) = quat_to_c2(a);
    [z1, z2.conj()]
}

fn from_right_coords(c: [C; 2]) -> Q {
    c2_to_quat(c[0], c[1].conj())
}

/// A point of C⁴, normally of unit length.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct C4Point(pub [C; 4]);

impl C4Point {
    /// Right-linear coordinates of `(x, y)ᵀ ∈ H²`.
    pub fn from_pair(x: Q, y: Q) -> C4Point {
        let [a, b] = right_coords(x);
        let [c, d] = right_coords(y);
        C4Point([a, b, c, d])
    }

    pub fn to_pair(&self) -> (Q, Q) {
        let z = self.0;
        (from_right_coords([z[0], z[1]]), from_right_coords([z[2], z[3]]))
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, s: C) -> C4Point {
        C4Point(self.0.map(|z| z * s))
    }

    /// Hermitian product `Σ z̄ᵢ wᵢ`.
    pub fn hdot(&self, other: &C4Point) -> C {
        self.0.iter().zip(other.0.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// Unit `q` with `R q = −q i`. Of the two candidates `y + R y i`, `y ∈ {1, j}`,
/// the larger has norm at least `√2` (their squares add to 4 for unit imaginary `R`).
/// `R` is first projected to the unit imaginary sphere: otherwise the two
/// candidates span different lines and switching between them shows up as a kink.
pub fn twistor_vector(r: Q) -> Q {
    let r = r.im() / r.im().norm();
    let cand = |y: Q| y + r * y * Q::I;
    let (a, b) = (cand(Q::ONE), cand(Q::J));
    let q = if a.norm_sqr() >= b.norm_sqr() { a } else { b };
    q / q.norm()
}

/// The lift sampled on the chart's grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwistorLift {
    pub geom: GridGeom,
    pub points: Vec<C4Point>,
    pub mask: Vec<bool>,
    /// Phase mismatch (radians) after going once around each periodic direction.
    pub holonomy: [Option<f64>; 2],
    /// Samples this close to an open edge are left out of the residual. Nonzero
    /// when `R` itself came from differences.
    pub edge_margin: usize,
}

fn align(prev: &C4Point, p: &C4Point) -> C4Point {
    let s = p.hdot(prev);
    if s.norm() == 0.0 {
        *p
    } else {
        p.scale(s / s.norm())
    }
}

/// Lift of the `R`-branch; run on `chart.conjugate()` for the `N`-branch.
pub fn twistor_lift(chart: &SurfaceChart) -> Result<TwistorLift> {
    let an = analyze_chart(chart, &AnalysisOptions { mask_failures: true, ..Default::default() })?;
    Ok(twistor_lift_from(&an))
}

pub fn twistor_lift_from(an: &ChartAnalysis) -> TwistorLift {
    let g = an.geom;
    let mut points: Vec<C4Point> = (0..g.len())
        .map(|k| {
            if !an.frame_valid[k] {
                return C4Point::default();
            }
            let q = twistor_vector(an.frames[k].r);
            let p = C4Point::from_pair(an.jets[k].f * q, q);
            p.scale(C::new(1.0 / p.norm(), 0.0))
        })
        .collect();
    let mask = an.frame_valid.clone();
    // greedy phase continuity: along the first column, then along every row
    for iv in 1..g.nv {
        let (a, b) = (g.idx(0, iv - 1), g.idx(0, iv));
        if mask[a] && mask[b] {
            points[b] = align(&points[a], &points[b]);
        }
    }
    for iv in 0..g.nv {
        for iu in 1..g.nu {
            let (a, b) = (g.idx(iu - 1, iv), g.idx(iu, iv));
            if mask[a] && mask[b] {
                points[b] = align(&points[a], &points[b]);
            }
        }
    }
    let phase = |a: usize, b: usize| (mask[a] && mask[b]).then(|| points[a].hdot(&points[b]).arg());
    let holonomy = [
        if g.periodic_u { phase(g.idx(g.nu - 1, 0), g.idx(0, 0)) } else { None },
        if g.periodic_v { phase(g.idx(0, g.nv - 1), g.idx(0, 0)) } else { None },
    ];
    let edge_margin = if an.exact_jets { 0 } else { tolerances::NESTED_MARGIN };
    TwistorLift { geom: g, points, mask, holonomy, edge_margin }
}

/// Multiplies the lift by unit complex scalars; the CP³ curve is unchanged.
pub fn apply_gauge(lift: &TwistorLift, phases: &[f64]) -> TwistorLift {
    let points = lift.points.iter().zip(phases).map(|(p, &t)| p.scale(C::from_polar(1.0, t))).collect();
    TwistorLift { points, ..lift.clone() }
}

/// Largest discrete Cauchy–Riemann residual `|(∂u + i ∂v) φ| / |∂u φ|` of the
/// lift, with `φ` the affine CP³ coordinates obtained by dividing by the
/// coordinate that is largest at the centre sample (the same divisor is used
/// across the stencil).
pub fn lift_holomorphicity_defect(lift: &TwistorLift) -> Result<f64> {
    let g = &lift.geom;
    let per_sample: Vec<Option<f64>> = (0..g.len())
        .into_par_iter()
        .map(|k| {
            let (iu, iv) = g.coords(k);
            if !g.stencil_valid(&lift.mask, iu, iv) || g.edge_distance(iu, iv) < lift.edge_margin {
                return None;
            }
            let p = &lift.points[k];
            let c = (0..4).max_by(|&a, &b| p.0[a].norm().total_cmp(&p.0[b].norm())).expect("four coordinates");
            let affine = |j: usize| lift.points[j].0.map(|z| z / lift.points[j].0[c]);
            let diff = |s: crate::surface::Stencil, at: &dyn Fn(usize) -> usize| {
                s.iter().fold([C::default(); 4], |mut acc, (i, w)| {
                    let a = affine(at(i));
                    for m in 0..4 {
                        acc[m] += a[m] * w;
                    }
                    acc
                })
            };
            let du = diff(g.su(iu), &|i| g.idx(i, iv));
            let dv = diff(g.sv(iv), &|j| g.idx(iu, j));
            let (mut num, mut den) = (0.0, 0.0);
            for m in (0..4).filter(|&m| m != c) {
                num += (du[m] + C::i() * dv[m]).norm_sqr();
                den += du[m].norm_sqr();
            }
            Some(if den > 0.0 { (num / den).sqrt() } else { 0.0 })
        })
        .collect();
    per_sample.into_iter().flatten().reduce(f64::max).ok_or(Error::AllMasked)
}

/// Verdict threshold for the lift residual.
pub fn lift_tol(an: &ChartAnalysis) -> f64 {
    tolerances::verdict_tol(tolerances::LIFT_FD_FACTOR, an.geom.h(), an.curvature_scale)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LiftVerdict {
    /// Residual of the lift of `f` (the `R`-branch).
    pub defect_f: f64,
    /// Residual of the lift of `f̄` (the `N`-branch).
    pub defect_conj: f64,
    pub tol: f64,
    pub super_conformal: bool,
    pub branch: Option<Branch>,
}

pub fn lift_classify(chart: &SurfaceChart) -> Result<LiftVerdict> {
    let opts = AnalysisOptions { mask_failures: true, ..Default::default() };
    let an = analyze_chart(chart, &opts)?;
    let defect_f = lift_holomorphicity_defect(&twistor_lift_from(&an))?;
    let defect_conj = lift_holomorphicity_defect(&twistor_lift_from(&analyze_chart(&chart.conjugate(), &opts)?))?;
    let tol = lift_tol(&an);
    let branch = if defect_f <= tol {
        Some(Branch::R)
    } else if defect_conj <= tol {
        Some(Branch::N)
    } else {
        None
    };
    Ok(LiftVerdict { defect_f, defect_conj, tol, super_conformal: branch.is_some(), branch })
}

/// Eight reals per sample; masked samples are skipped.
pub fn lift_csv(lift: &TwistorLift) -> Csv {
    let mut csv = Csv::new(&["iu", "iv", "re0", "im0", "re1", "im1", "re2", "im2", "re3", "im3"]);
    for k in (0..lift.geom.len()).filter(|&k| lift.mask[k]) {
        let (iu, iv) = lift.geom.coords(k);
        let mut row = vec![iu as f64, iv as f64];
        row.extend(lift.points[k].0.iter().flat_map(|z| [z.re, z.im]));
        csv.push(row);
    }
    csv
}
