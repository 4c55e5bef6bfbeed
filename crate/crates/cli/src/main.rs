use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use quatsurf::backlund::{
    one_step_backward, one_step_forward, s3_duality_check, two_step_backward, two_step_forward, TransformResult,
};
use quatsurf::catalog::{catalog_build, CatalogSpec, Family, FAMILY_NAMES};
use quatsurf::io::{obj_string, surface_json_string, write_atomic, SurfaceJson};
use quatsurf::qla::HermitianForm;
use quatsurf::report::{analyze, frame_csv, lift_verdict, ReportOptions};
use quatsurf::surface::{analyze_chart, AnalysisOptions, SurfaceChart};
use quatsurf::twistor::{lift_csv, twistor_lift_from};
use quatsurf::willmore::classify;
use quatsurf::Quaternion;

const EXIT_INVARIANT: u8 = 2;
const EXIT_INPUT: u8 = 3;

#[derive(Parser)]
#[command(name = "quatsurf", version, about = "Quaternionic analysis of conformal surface charts")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Grid resolution for catalog families, e.g. 64x64.
    #[arg(long, global = true, default_value = "64x64", value_parser = parse_grid)]
    grid: (usize, usize),
    /// Conformal tolerance override for the input chart.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Output file (stdout when absent). Written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a catalog surface and write it as surface JSON.
    Catalog { family: String },
    /// Analyze a catalog family or a surface JSON file and print the report.
    Analyze {
        source: String,
        /// Also compute the twistor lift verdict.
        #[arg(long)]
        lift: bool,
        /// Also summarize the four Bäcklund transforms.
        #[arg(long)]
        transforms: bool,
        /// Also run the S³ duality checks (charts in Im H only).
        #[arg(long)]
        duality: bool,
        /// Shorthand for --lift --transforms --duality.
        #[arg(long)]
        all: bool,
    },
    /// Bäcklund transform of a surface, written as surface JSON with diagnostics.
    Transform { kind: TransformKind, source: String },
    /// Twistor lift: CSV of C⁴ coordinates, verdict on stderr.
    Lift { source: String },
    /// S³ duality diagnostics as JSON.
    Duality { source: String },
    /// Export a surface as OBJ, per-sample frame CSV or surface JSON.
    Export {
        source: String,
        /// Which three quaternion components become x, y, z (0 = real part).
        #[arg(long, default_value = "1,2,3", value_parser = parse_axes)]
        axes: [usize; 3],
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformKind {
    Forward,
    Backward,
    TwoForward,
    TwoBackward,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Obj,
    Csv,
    Json,
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected NUxNV")?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("bad grid size '{t}': {e}"));
    Ok((n(a)?, n(b)?))
}

fn parse_axes(s: &str) -> Result<[usize; 3], String> {
    let v: Vec<usize> =
        s.split(',').map(|t| t.trim().parse::<usize>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    match v[..] {
        [a, b, c] if a < 4 && b < 4 && c < 4 => Ok([a, b, c]),
        _ => Err("expected three component indices in 0..4".into()),
    }
}

/// Failure with its exit code.
struct Fail(u8, String);

impl From<quatsurf::Error> for Fail {
    fn from(e: quatsurf::Error) -> Fail {
        Fail(EXIT_INPUT, e.to_string())
    }
}

fn load(source: &str, cli: &Cli) -> Result<SurfaceChart, Fail> {
    let (nu, nv) = cli.grid;
    let family = if source != "json-file" && FAMILY_NAMES.contains(&source) {
        Family::by_name(source)?
    } else if Path::new(source).exists() {
        Family::JsonFile { path: source.into() }
    } else {
        return Err(Fail(
            EXIT_INPUT,
            format!(
                "'{source}' is neither a family ({}) nor a readable file",
                FAMILY_NAMES.iter().filter(|&&n| n != "json-file").copied().collect::<Vec<_>>().join(", ")
            ),
        ));
    };
    Ok(catalog_build(&CatalogSpec::new(family, nu, nv))?)
}

fn emit(cli: &Cli, text: &str) -> Result<(), Fail> {
    match &cli.out {
        Some(p) => Ok(write_atomic(p, text.as_bytes())?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn transform_json(t: &TransformResult, kind: &str) -> Result<String, Fail> {
    let mut doc = SurfaceJson::from_chart(&t.to_chart()?);
    doc.diagnostics = Some(serde_json::json!({
        "transform": kind,
        "closedness_defect": t.closedness_defect,
        "path_dependence": t.path_dependence,
        "periods": t.periods,
        "basepoint": t.basepoint,
        "constant": t.constant,
        "valid_fraction": t.valid_count() as f64 / t.mask.len() as f64,
    }));
    Ok(surface_json_string(&doc))
}

fn run(cli: &Cli) -> Result<(), Fail> {
    let aopts = AnalysisOptions { conformal_tol: cli.tol, ..Default::default() };
    match &cli.cmd {
        Cmd::Catalog { family } => {
            let chart = load(family, cli)?;
            emit(cli, &surface_json_string(&SurfaceJson::from_chart(&chart)))
        }
        Cmd::Analyze { source, lift, transforms, duality, all } => {
            let chart = load(source, cli)?;
            let opts = ReportOptions {
                conformal_tol: cli.tol,
                lift: *lift || *all,
                transforms: *transforms || *all,
                duality: *duality || *all,
            };
            let rep = analyze(&chart, source, &opts);
            emit(cli, &rep.to_json())?;
            if let Some(e) = rep.errors.first() {
                return Err(Fail(EXIT_INPUT, format!("{}: {}", e.stage, e.message)));
            }
            let failed: Vec<&str> = rep.failed_suites().map(|s| s.name.as_str()).collect();
            if !failed.is_empty() {
                return Err(Fail(EXIT_INVARIANT, format!("invariant suites failed: {}", failed.join(", "))));
            }
            Ok(())
        }
        Cmd::Transform { kind, source } => {
            let chart = load(source, cli)?;
            let (t, name) = match kind {
                TransformKind::Forward => (one_step_forward(&chart, Quaternion::ZERO)?, "forward"),
                TransformKind::Backward => (one_step_backward(&chart, Quaternion::ZERO)?, "backward"),
                TransformKind::TwoForward => (two_step_forward(&chart)?, "two-forward"),
                TransformKind::TwoBackward => (two_step_backward(&chart)?, "two-backward"),
            };
            if t.valid_count() == 0 {
                return Err(Fail(EXIT_INVARIANT, format!("{name} transform is masked everywhere")));
            }
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => emit(cli, &transform_json(&t, name)?),
                Format::Obj => emit(cli, &obj_string(&t.to_chart()?, [1, 2, 3])?),
                Format::Csv => {
                    let tc = t.to_chart()?;
                    let an = analyze_chart(&tc, &AnalysisOptions { mask_failures: true, ..aopts })?;
                    emit(cli, &frame_csv(&tc, &an).to_string())
                }
            }
        }
        Cmd::Lift { source } => {
            let chart = load(source, cli)?;
            let masked = AnalysisOptions { mask_failures: true, ..aopts };
            let an = analyze_chart(&chart, &masked)?;
            let conj = analyze_chart(&chart.conjugate(), &masked)?;
            let lv = lift_verdict(&an, &conj)?;
            let sc = classify(&an);
            let lift = twistor_lift_from(&an);
            match cli.format.unwrap_or(Format::Csv) {
                Format::Json => emit(cli, &to_json(&lift))?,
                Format::Csv => emit(cli, &lift_csv(&lift).to_string())?,
                Format::Obj => return Err(Fail(EXIT_INPUT, "lift exports as csv or json".into())),
            }
            eprintln!(
                "lift residual {:.3e} (conjugate {:.3e}, tol {:.3e}); super-conformal: {}",
                lv.defect_f, lv.defect_conj, lv.tol, lv.super_conformal
            );
            if lv.branch != sc.branch {
                return Err(Fail(
                    EXIT_INVARIANT,
                    "lift verdict disagrees with the normal-derivative classifier".into(),
                ));
            }
            Ok(())
        }
        Cmd::Duality { source } => {
            let chart = load(source, cli)?;
            let d = s3_duality_check(&chart, &HermitianForm::s3())?;
            let iso_tol = if d.exact_jets { 1e-9 } else { d.fd_tol };
            let body = serde_json::json!({
                "s_self_adjoint": d.s_self_adjoint,
                "f_normalization": d.f_normalization,
                "g_real_part": d.g_real_part,
                "sg_anti_self_adjoint": d.sg_anti_self_adjoint,
                "g_immersed_fraction": d.g_immersed_fraction,
                "degenerate": d.degenerate,
                "fd_tol": d.fd_tol,
                "periods": d.periods,
            });
            emit(cli, &to_json(&body))?;
            let ok = d.s_self_adjoint <= iso_tol
                && d.g_real_part <= d.fd_tol
                && (d.degenerate || d.sg_anti_self_adjoint <= 10.0 * d.fd_tol);
            if ok {
                Ok(())
            } else {
                Err(Fail(EXIT_INVARIANT, "duality checks failed".into()))
            }
        }
        Cmd::Export { source, axes } => {
            let chart = load(source, cli)?;
            match cli.format.unwrap_or(Format::Json) {
                Format::Json => emit(cli, &surface_json_string(&SurfaceJson::from_chart(&chart))),
                Format::Obj => emit(cli, &obj_string(&chart, *axes)?),
                Format::Csv => {
                    let an = analyze_chart(&chart, &AnalysisOptions { mask_failures: true, ..aopts })?;
                    emit(cli, &frame_csv(&chart, &an).to_string())
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Fail(code, msg)) => {
            eprintln!("quatsurf: {msg}");
            ExitCode::from(code)
        }
    }
}
