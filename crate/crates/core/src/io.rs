//! File formats: surface JSON, OBJ quad meshes and CSV tables. Every writer
//! goes through a temporary file in the target directory and a rename.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quat::Quaternion;
use crate::surface::{GridGeom, SurfaceChart};

type Q = Quaternion;

/// On-disk chart. Quaternion components are ordered `(1, i, j, k)` and samples
/// are row-major (`index = iv * nu + iu`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceJson {
    #[serde(rename = "type")]
    pub kind: String,
    pub nu: usize,
    pub nv: usize,
    pub du: f64,
    pub dv: f64,
    pub periodic_u: bool,
    pub periodic_v: bool,
    pub values: Vec<[f64; 4]>,
    /// Parameter of the first sample; defaults to zero.
    #[serde(default, skip_serializing_if = "is_zero")]
    pub u0: f64,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub v0: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub closed: bool,
    /// `false` marks holes; absent means every sample is valid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<Vec<bool>>,
    /// Free-form producer diagnostics (transform defects, periods, ...).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostics: Option<serde_json::Value>,
}

fn is_zero(x: &f64) -> bool {
    *x == 0.0
}

impl SurfaceJson {
    pub fn from_chart(chart: &SurfaceChart) -> SurfaceJson {
        let g = chart.geom;
        SurfaceJson {
            kind: "grid".into(),
            nu: g.nu,
            nv: g.nv,
            du: g.du,
            dv: g.dv,
            periodic_u: g.periodic_u,
            periodic_v: g.periodic_v,
            values: chart.values.iter().map(|q| q.to_array()).collect(),
            u0: chart.u0,
            v0: chart.v0,
            closed: chart.closed,
            mask: chart.mask.clone(),
            diagnostics: None,
        }
    }

    pub fn into_chart(self) -> Result<SurfaceChart> {
        if self.kind != "grid" {
            return Err(Error::Input(format!("unsupported surface type '{}'", self.kind)));
        }
        let geom = GridGeom {
            nu: self.nu,
            nv: self.nv,
            du: self.du,
            dv: self.dv,
            periodic_u: self.periodic_u,
            periodic_v: self.periodic_v,
        };
        if let Some(m) = &self.mask {
            if m.len() != geom.len() {
                return Err(Error::Input(format!("mask has {} entries, expected {}", m.len(), geom.len())));
            }
        }
        let mut chart = SurfaceChart::sampled(geom, self.values.into_iter().map(Q::from).collect())?;
        chart.u0 = self.u0;
        chart.v0 = self.v0;
        chart.closed = self.closed;
        chart.mask = self.mask;
        Ok(chart)
    }
}

/// Write `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

pub fn surface_json_string(doc: &SurfaceJson) -> String {
    serde_json::to_string_pretty(doc).expect("surface JSON is always serializable")
}

pub fn write_surface_json(path: &Path, chart: &SurfaceChart) -> Result<()> {
    write_atomic(path, surface_json_string(&SurfaceJson::from_chart(chart)).as_bytes())
}

pub fn parse_surface_json(text: &str) -> Result<SurfaceChart> {
    let doc: SurfaceJson = serde_json::from_str(text).map_err(|e| Error::Input(format!("surface JSON: {e}")))?;
    doc.into_chart()
}

pub fn read_surface_json(path: &Path) -> Result<SurfaceChart> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_surface_json(&text)
}

/// ASCII OBJ with one vertex per sample and quad faces between neighbors
/// (wrapping across periodic directions). `axes` picks the three quaternion
/// components used as coordinates; the remaining one follows each vertex as
/// a `# attr` comment. Faces touching masked samples are dropped.
pub fn obj_string(chart: &SurfaceChart, axes: [usize; 3]) -> Result<String> {
    use std::fmt::Write as _;
    let mut seen = [false; 4];
    for &a in &axes {
        if a > 3 || seen[a] {
            return Err(Error::Input(format!("OBJ axes {axes:?} must be three distinct components of 0..=3")));
        }
        seen[a] = true;
    }
    let fourth = (0..4).find(|&a| !seen[a]).unwrap();
    let g = chart.geom;
    let masked = (0..g.len()).filter(|&k| !chart.is_valid(k)).count();
    if 2 * masked > g.len() {
        return Err(Error::Input(format!("{masked} of {} samples are masked; refusing OBJ export", g.len())));
    }
    let mut out = String::new();
    writeln!(out, "# quatsurf grid {}x{}", g.nu, g.nv).unwrap();
    for q in &chart.values {
        let c = q.to_array();
        writeln!(out, "v {} {} {}", c[axes[0]], c[axes[1]], c[axes[2]]).unwrap();
        writeln!(out, "# attr {}", c[fourth]).unwrap();
    }
    let cu = if g.periodic_u { g.nu } else { g.nu - 1 };
    let cv = if g.periodic_v { g.nv } else { g.nv - 1 };
    for iv in 0..cv {
        for iu in 0..cu {
            let (iu1, iv1) = ((iu + 1) % g.nu, (iv + 1) % g.nv);
            let quad = [g.idx(iu, iv), g.idx(iu1, iv), g.idx(iu1, iv1), g.idx(iu, iv1)];
            if quad.iter().all(|&k| chart.is_valid(k)) {
                writeln!(out, "f {} {} {} {}", quad[0] + 1, quad[1] + 1, quad[2] + 1, quad[3] + 1).unwrap();
            }
        }
    }
    Ok(out)
}

/// Minimal CSV table with a header row.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Csv {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Csv {
    pub fn new(header: &[&str]) -> Csv {
        Csv { header: header.iter().map(|s| s.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }
}

impl std::fmt::Display for Csv {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "{}", self.header.join(","))?;
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| format!("{x}")).collect();
            writeln!(f, "{}", cells.join(","))?;
        }
        Ok(())
    }
}
