//! The surface catalog: parameterized families that produce conformal charts.

use std::f64::consts::TAU;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::analytic::AnalyticSurface;
use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::surface::{GridGeom, Jet2, SurfaceChart};

type Q = Quaternion;

/// Initial data for an elastic curve with `κ'' = −½κ³ + c²/κ³`, `τ = c/κ²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElasticaParams {
    pub kappa0: f64,
    pub dkappa0: f64,
    /// The conserved `κ² τ`; zero gives a planar free elastica.
    pub c: f64,
    pub length: f64,
}

impl Default for ElasticaParams {
    fn default() -> Self {
        ElasticaParams { kappa0: 1.0, dkappa0: 0.3, c: 0.0, length: 4.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Plane,
    Sphere {
        radius: f64,
        /// Use the Mercator chart (periodic in u, asserted closed) instead of the stereographic one.
        #[serde(default)]
        mercator: bool,
    },
    Catenoid {
        scale: f64,
    },
    Enneper,
    ComplexGraph {
        coeffs: Vec<[f64; 2]>,
    },
    CliffordTorus,
    CircularCylinder {
        radius: f64,
    },
    ElasticaCylinder(ElasticaParams),
    JsonFile {
        path: PathBuf,
    },
}

pub const FAMILY_NAMES: [&str; 9] = [
    "plane",
    "sphere",
    "catenoid",
    "enneper",
    "complex-graph",
    "clifford-torus",
    "circular-cylinder",
    "elastica-cylinder",
    "json-file",
];

/// Default coefficients of `g(z)` for the complex graph.
pub fn default_graph_coeffs() -> Vec<[f64; 2]> {
    vec![[0.0, 0.0], [0.3, 0.1], [0.5, 0.0], [0.2, -0.1]]
}

impl Family {
    pub fn by_name(name: &str) -> Result<Family> {
        Ok(match name {
            "plane" => Family::Plane,
            "sphere" => Family::Sphere { radius: 1.0, mercator: false },
            "catenoid" => Family::Catenoid { scale: 1.0 },
            "enneper" => Family::Enneper,
            "complex-graph" => Family::ComplexGraph { coeffs: default_graph_coeffs() },
            "clifford-torus" => Family::CliffordTorus,
            "circular-cylinder" => Family::CircularCylinder { radius: 1.0 },
            "elastica-cylinder" => Family::ElasticaCylinder(ElasticaParams::default()),
            "json-file" => return Err(Error::Input("json-file needs a path".into())),
            other => return Err(Error::Input(format!("unknown family '{other}'"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Plane => "plane",
            Family::Sphere { .. } => "sphere",
            Family::Catenoid { .. } => "catenoid",
            Family::Enneper => "enneper",
            Family::ComplexGraph { .. } => "complex-graph",
            Family::CliffordTorus => "clifford-torus",
            Family::CircularCylinder { .. } => "circular-cylinder",
            Family::ElasticaCylinder(_) => "elastica-cylinder",
            Family::JsonFile { .. } => "json-file",
        }
    }

    /// Default patch `[u_min, u_max, v_min, v_max]` and periodic flags.
    pub fn default_patch(&self) -> ([f64; 4], bool, bool) {
        match self {
            Family::Sphere { mercator: true, .. } => ([0.0, TAU, -4.0, 4.0], true, false),
            Family::Catenoid { .. } => ([0.0, TAU, -1.0, 1.0], true, false),
            Family::CliffordTorus => ([0.0, TAU, 0.0, TAU], true, true),
            Family::CircularCylinder { radius } => ([0.0, TAU * radius, -1.0, 1.0], true, false),
            Family::ElasticaCylinder(p) => ([0.0, p.length, -0.5, 0.5], false, false),
            _ => ([-1.0, 1.0, -1.0, 1.0], false, false),
        }
    }

    pub fn analytic(&self) -> Option<AnalyticSurface> {
        Some(match self {
            Family::Plane => AnalyticSurface::Plane,
            Family::Sphere { radius, mercator: false } => AnalyticSurface::Sphere { radius: *radius },
            Family::Sphere { radius, mercator: true } => AnalyticSurface::SphereMercator { radius: *radius },
            Family::Catenoid { scale } => AnalyticSurface::Catenoid { scale: *scale },
            Family::Enneper => AnalyticSurface::Enneper,
            Family::ComplexGraph { coeffs } => AnalyticSurface::ComplexGraph { coeffs: coeffs.clone() },
            Family::CliffordTorus => AnalyticSurface::CliffordTorus,
            Family::CircularCylinder { radius } => AnalyticSurface::CircularCylinder { radius: *radius },
            Family::ElasticaCylinder(_) | Family::JsonFile { .. } => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogSpec {
    pub family: Family,
    pub nu: usize,
    pub nv: usize,
    /// `[u_min, u_max, v_min, v_max]`; family default when absent.
    pub bounds: Option<[f64; 4]>,
}

impl CatalogSpec {
    pub fn new(family: Family, nu: usize, nv: usize) -> CatalogSpec {
        CatalogSpec { family, nu, nv, bounds: None }
    }

    pub fn named(name: &str, nu: usize, nv: usize) -> Result<CatalogSpec> {
        Ok(CatalogSpec::new(Family::by_name(name)?, nu, nv))
    }
}

/// Samples along `[a, b]`: cell centers when open, left endpoints when periodic.
fn axis(a: f64, b: f64, n: usize, periodic: bool) -> (f64, f64) {
    let h = (b - a) / n as f64;
    (if periodic { a } else { a + 0.5 * h }, h)
}

pub fn catalog_build(spec: &CatalogSpec) -> Result<SurfaceChart> {
    if let Family::JsonFile { path } = &spec.family {
        return crate::io::read_surface_json(path);
    }
    let (default_bounds, pu, pv) = spec.family.default_patch();
    let b = spec.bounds.unwrap_or(default_bounds);
    if !(b[1] > b[0] && b[3] > b[2]) {
        return Err(Error::Input(format!("empty patch {b:?}")));
    }
    let (u0, du) = axis(b[0], b[1], spec.nu, pu);
    let (v0, dv) = axis(b[2], b[3], spec.nv, pv);
    let geom = GridGeom { nu: spec.nu, nv: spec.nv, du, dv, periodic_u: pu, periodic_v: pv };
    match &spec.family {
        Family::ElasticaCylinder(p) => {
            let curve = elastica_curve(p, spec.nu, b[0], b[1])?;
            Ok(curve.extrude(geom, v0))
        }
        fam => {
            validate_params(fam)?;
            let mut chart = SurfaceChart::from_analytic(fam.analytic().expect("closed form"), geom, u0, v0)?;
            chart.closed = (pu && pv) || matches!(fam, Family::Sphere { mercator: true, .. });
            Ok(chart)
        }
    }
}

fn validate_params(f: &Family) -> Result<()> {
    let bad = |what: &str| Err(Error::Input(format!("{what} must be positive and finite")));
    match f {
        Family::Sphere { radius, .. } | Family::CircularCylinder { radius }
            if !(*radius > 0.0 && radius.is_finite()) =>
        {
            bad("radius")
        }
        Family::Catenoid { scale } if !(*scale > 0.0 && scale.is_finite()) => bad("scale"),
        Family::ComplexGraph { coeffs } if coeffs.iter().flatten().any(|c| !c.is_finite()) => {
            Err(Error::Input("graph coefficients must be finite".into()))
        }
        _ => Ok(()),
    }
}

/// An arc-length parameterized space curve with its Frenet data, sampled at
/// the chart's `u` positions.
#[derive(Clone, Debug, PartialEq)]
pub struct ElasticaCurve {
    pub s: Vec<f64>,
    pub ds: f64,
    pub kappa: Vec<f64>,
    pub tau: Vec<f64>,
    pub gamma: Vec<Q>,
    pub tangent: Vec<Q>,
    pub normal: Vec<Q>,
    pub binormal: Vec<Q>,
}

impl ElasticaCurve {
    /// `f(u, v) = γ(u) + v`.
    pub fn extrude(&self, geom: GridGeom, v0: f64) -> SurfaceChart {
        let values = (0..geom.len())
            .map(|k| {
                let (iu, iv) = geom.coords(k);
                self.gamma[iu] + Q::real(v0 + iv as f64 * geom.dv)
            })
            .collect();
        let mut chart = SurfaceChart::sampled(geom, values).expect("valid extrusion grid");
        let jets = (0..geom.len())
            .map(|k| {
                let (iu, _) = geom.coords(k);
                Jet2 {
                    f: chart.values[k],
                    fu: self.tangent[iu],
                    fv: Q::ONE,
                    fuu: self.normal[iu] * self.kappa[iu],
                    ..Jet2::default()
                }
            })
            .collect();
        chart.jets = Some(jets);
        chart.u0 = self.s[0];
        chart.v0 = v0;
        chart
    }
}

type State = [f64; 14];

fn elastica_rhs(c: f64, y: &State) -> State {
    let (k, dk) = (y[0], y[1]);
    let tau = if c == 0.0 { 0.0 } else { c / (k * k) };
    let ddk = -0.5 * k * k * k + if c == 0.0 { 0.0 } else { c * c / (k * k * k) };
    let t = [y[2], y[3], y[4]];
    let n = [y[5], y[6], y[7]];
    let b = [y[8], y[9], y[10]];
    let mut out = [0.0; 14];
    out[0] = dk;
    out[1] = ddk;
    for a in 0..3 {
        out[2 + a] = k * n[a];
        out[5 + a] = -k * t[a] + tau * b[a];
        out[8 + a] = -tau * n[a];
        out[11 + a] = t[a];
    }
    out
}

fn rk4_step(c: f64, y: &State, h: f64) -> State {
    let add = |a: &State, b: &State, s: f64| -> State { std::array::from_fn(|i| a[i] + s * b[i]) };
    let k1 = elastica_rhs(c, y);
    let k2 = elastica_rhs(c, &add(y, &k1, h / 2.0));
    let k3 = elastica_rhs(c, &add(y, &k2, h / 2.0));
    let k4 = elastica_rhs(c, &add(y, &k3, h));
    std::array::from_fn(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

/// Largest RK4 step; the global error then sits near 1e-12 for unit-scale data.
const ODE_MAX_STEP: f64 = 1e-3;

fn advance(c: f64, y: &mut State, span: f64) {
    if span <= 0.0 {
        return;
    }
    let m = (span / ODE_MAX_STEP).ceil().max(1.0) as usize;
    let h = span / m as f64;
    for _ in 0..m {
        *y = rk4_step(c, y, h);
    }
}

/// Integrate the elastica ODE with fixed-step RK4 and sample the curve at
/// the cell centers of `[s_min, s_max]` split into `n` cells. Arc length is
/// measured from `s_min`, where `κ = κ₀`, `κ' = κ'₀` and the Frenet frame is `(i, j, k)`.
pub fn elastica_curve(p: &ElasticaParams, n: usize, s_min: f64, s_max: f64) -> Result<ElasticaCurve> {
    if n < 5 {
        return Err(Error::TooFewSamples { needed: 5, got: n });
    }
    if p.c != 0.0 && p.kappa0 == 0.0 {
        return Err(Error::Input("torsion needs non-zero curvature".into()));
    }
    let ds = (s_max - s_min) / n as f64;
    let mut y: State = [0.0; 14];
    y[0] = p.kappa0;
    y[1] = p.dkappa0;
    y[2] = 1.0; // T = i
    y[6] = 1.0; // n = j
    y[10] = 1.0; // b = k
    let mut out = ElasticaCurve {
        s: vec![],
        ds,
        kappa: vec![],
        tau: vec![],
        gamma: vec![],
        tangent: vec![],
        normal: vec![],
        binormal: vec![],
    };
    let mut s_prev = 0.0;
    for i in 0..n {
        let s = (i as f64 + 0.5) * ds;
        advance(p.c, &mut y, s - s_prev);
        s_prev = s;
        if !y.iter().all(|x| x.is_finite()) {
            return Err(Error::Input("elastica integration diverged".into()));
        }
        out.s.push(s_min + s);
        out.kappa.push(y[0]);
        out.tau.push(if p.c == 0.0 { 0.0 } else { p.c / (y[0] * y[0]) });
        out.tangent.push(Q::imag(y[2], y[3], y[4]));
        out.normal.push(Q::imag(y[5], y[6], y[7]));
        out.binormal.push(Q::imag(y[8], y[9], y[10]));
        out.gamma.push(Q::imag(y[11], y[12], y[13]));
    }
    Ok(out)
}

/// The unit circle as an elastic-curve record, for the cylinder dictionary.
pub fn circle_curve(n: usize) -> ElasticaCurve {
    let ds = TAU / n as f64;
    let s: Vec<f64> = (0..n).map(|i| i as f64 * ds).collect();
    ElasticaCurve {
        gamma: s.iter().map(|&t| Q::imag(t.cos(), t.sin(), 0.0)).collect(),
        tangent: s.iter().map(|&t| Q::imag(-t.sin(), t.cos(), 0.0)).collect(),
        normal: s.iter().map(|&t| Q::imag(-t.cos(), -t.sin(), 0.0)).collect(),
        binormal: vec![Q::K; n],
        kappa: vec![1.0; n],
        tau: vec![0.0; n],
        s,
        ds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::{analyze_chart, AnalysisOptions};

    #[test]
    fn every_family_builds_a_conformal_chart() {
        for name in FAMILY_NAMES.iter().filter(|&&n| n != "json-file") {
            let chart = catalog_build(&CatalogSpec::named(name, 24, 20).unwrap()).unwrap();
            analyze_chart(&chart, &AnalysisOptions::default()).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
    }

    #[test]
    fn unknown_family_rejected() {
        assert!(Family::by_name("torus-knot").is_err());
        assert!(catalog_build(&CatalogSpec::new(Family::Sphere { radius: -1.0, mercator: false }, 8, 8)).is_err());
    }

    #[test]
    fn constant_curvature_solution_is_a_helix() {
        // κ'' = 0 needs c² = κ⁶/2; the axis is the Darboux vector τT + κb
        let c = 0.5f64.sqrt();
        let p = ElasticaParams { kappa0: 1.0, dkappa0: 0.0, c, length: 5.0 };
        let curve = elastica_curve(&p, 50, 0.0, 5.0).unwrap();
        let omega = (1.0 + c * c).sqrt();
        let axis = (Q::I * c + Q::K) / omega;
        for i in 0..50 {
            assert!((curve.kappa[i] - 1.0).abs() < 1e-12);
            assert!((curve.gamma[i].dot(axis) - curve.s[i] * c / omega).abs() < 1e-11);
        }
    }

    #[test]
    fn frame_stays_orthonormal_with_torsion() {
        let p = ElasticaParams { kappa0: 1.0, dkappa0: 0.2, c: 0.4, length: 3.0 };
        let c = elastica_curve(&p, 40, 0.0, 3.0).unwrap();
        for i in 0..40 {
            let (t, n, b) = (c.tangent[i], c.normal[i], c.binormal[i]);
            assert!((t.norm() - 1.0).abs() < 1e-10 && t.dot(n).abs() < 1e-10 && (t * n - b).norm() < 1e-10);
        }
    }
}
