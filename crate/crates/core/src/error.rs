use thiserror::Error;

/// Every failure the library reports. Magnitudes are carried along so callers
/// can log how far off an input was.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("inverse of the zero quaternion")]
    ZeroInverse,
    #[error("expected a unit quaternion, got norm {norm}")]
    NonUnit { norm: f64 },
    #[error("singular quaternionic matrix (pivot magnitude {pivot:e})")]
    Singular { pivot: f64 },
    #[error("degenerate plane: spanning vectors are real-linearly dependent (sine {sine:e})")]
    DegeneratePlane { sine: f64 },
    #[error("N x + x R = H has no solution (residual {residual:e})")]
    Inconsistent { residual: f64 },
    #[error("constraint violated: {what} (defect {defect:e})")]
    Constraint { what: &'static str, defect: f64 },
    #[error("point on the isotropic boundary: Re x = 0")]
    Boundary,
    #[error("not an immersion at sample ({iu}, {iv}): |f_u| = {norm:e}")]
    NotImmersed { iu: usize, iv: usize, norm: f64 },
    #[error("not conformal at sample ({iu}, {iv}): defect {defect:e} exceeds {tol:e}")]
    NonConformal { iu: usize, iv: usize, defect: f64, tol: f64 },
    #[error("sample index ({iu}, {iv}) outside a {nu}x{nv} grid")]
    IndexOutOfRange { iu: usize, iv: usize, nu: usize, nv: usize },
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("chart is not closed; degree integrals need a doubly periodic or asserted-closed chart")]
    NotClosed,
    #[error("chart does not lie in Im H (max |Re f| = {0:e})")]
    NotImaginary(f64),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("every sample of the neighborhood is masked")]
    AllMasked,
    #[error("invalid input: {0}")]
    Input(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
