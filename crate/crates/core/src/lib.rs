//! Conformal surfaces in the 4-sphere HP¹ through quaternionic function theory.

pub mod error;
pub mod hp1;
pub mod qla;
pub mod quat;

pub use error::{Error, Result};
pub use qla::{HermitianForm, QMat2, QVec2};
pub use quat::Quaternion;
pub mod analytic;
pub mod surface;
pub mod tolerances;

pub use analytic::AnalyticSurface;
pub use surface::{analyze_chart, jet_at, AnalysisOptions, ChartAnalysis, GridGeom, Jet2, SurfaceChart};
pub mod catalog;
pub mod io;

pub use catalog::{catalog_build, CatalogSpec, Family};
pub mod backlund;
pub mod report;
pub mod twistor;
pub mod willmore;
