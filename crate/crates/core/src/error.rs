use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("chart mismatch: {0}")]
    ChartMismatch(String),
    #[error("matrix rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("invalid multi-index {0:?}: entries must be strictly increasing and below the chart dimension")]
    InvalidMultiIndex(Vec<usize>),
    #[error("invalid chart: {0}")]
    InvalidChart(String),
    #[error("axis {axis} has {samples} samples; at least {required} are needed to differentiate")]
    InsufficientSamples {
        axis: usize,
        samples: usize,
        required: usize,
    },
    #[error("power series input must only contain even grades >= 2, found grade {0}")]
    SeriesInput(usize),
    #[error("Simpson quadrature needs an odd number of samples >= 3, got {0}")]
    SimpsonParity(usize),
    #[error("parameter {s} outside the family interval [{a}, {b}]")]
    ParameterOutOfRange { s: f64, a: f64, b: f64 },
    #[error("reparametrization is not monotone near t = {0}")]
    NonMonotone(f64),
    #[error("Maurer-Cartan structural equation violated: |d omega + omega^omega| = {residual:e} > {tol:e}")]
    StructuralEquation { residual: f64, tol: f64 },
    #[error("connection 1-form is not skew-Hermitian (deviation {0:e})")]
    NotSkewHermitian(f64),
    #[error("chart dimension {0} needs Pontryagin classes beyond p1")]
    AHatDimension(usize),
    #[error("geometric side has imaginary residue {0:e}")]
    ImaginaryResidue(f64),
    #[error("spectral window {window} exceeds the trust region {trust}")]
    WindowExceedsTrust { window: f64, trust: f64 },
    #[error("assembled operator is not Hermitian (deviation {0:e})")]
    NonHermitian(f64),
    #[error("zero tolerance {tol:e} is ambiguous: eigenvalue {lambda:e} lies in (tol, 2 tol]")]
    ToleranceAmbiguity { tol: f64, lambda: f64 },
    #[error("no certifiable spectral gap on [{s_start}, {s_end}] after maximal bisection")]
    NoCertifiableGap { s_start: f64, s_end: f64 },
    #[error("operation requires a diagonal family")]
    NotDiagonal,
    #[error("tail of the spectrum is not asymptotically affine (residual {0:e})")]
    NonAffineTail(f64),
    #[error("matrix is not symmetric positive semidefinite (min eigenvalue {0:e})")]
    NotPositiveSemidefinite(f64),
    #[error("endpoint operators are not isospectral in the probe window (deviation {0:e})")]
    NotIsospectral(f64),
    #[error("calibration failed: {0}")]
    Calibration(String),
    #[error("unknown scenario or family {0:?}")]
    Unknown(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
