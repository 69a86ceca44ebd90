use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} exceeds the supported cap {cap}")]
    OutOfRange {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("power series has zero constant term")]
    ZeroConstantTerm,

    #[error("kernel series is not normalized: constant coefficient {c0}")]
    NotNormalized { c0: f64 },

    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("axis {axis} out of range for {n} variables")]
    AxisOutOfRange { axis: usize, n: usize },

    #[error("point is not interior to the domain (size {size})")]
    NotInterior { size: f64 },

    #[error("operator is not bounded below at tolerance: sigma_min = {sigma_min:e}")]
    NotBoundedBelow { sigma_min: f64 },

    #[error("projections are not a commuting family: residual {residual:e}")]
    NonCommuting { residual: f64 },

    #[error("not an orthogonal projection: residual {residual:e}")]
    NotProjection { residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("operator is not a contraction: norm {norm}")]
    NonContractive { norm: f64 },

    #[error("kernel is not complete Nevanlinna-Pick to the tested order: coefficient {index} = {value:e}")]
    NotCnp { index: usize, value: f64 },

    #[error("space family mismatch: {0}")]
    FamilyMismatch(String),

    #[error("not unitary: residual {residual:e}")]
    NotUnitary { residual: f64 },

    #[error("unitary/pure split could not be certified near eigenvalue {re}+{im}i: {reason}")]
    CertificationFailed { re: f64, im: f64, reason: String },

    #[error("graph map is not isometric: residual {residual:e}")]
    GraphNotIsometric { residual: f64 },

    #[error("no unitary extension at this truncation: complements have dimensions {left} and {right}")]
    NoUnitaryExtension { left: usize, right: usize },

    #[error("exactness budget too small: need degree {needed}, have {available}")]
    ExactnessBudget { needed: usize, available: usize },

    #[error("numerical routine failed: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, used in machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::OutOfRange { .. } => "out_of_range",
            Error::InvalidInput(_) => "invalid_input",
            Error::ZeroConstantTerm => "zero_constant_term",
            Error::NotNormalized { .. } => "not_normalized",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::AxisOutOfRange { .. } => "axis_out_of_range",
            Error::NotInterior { .. } => "not_interior",
            Error::NotBoundedBelow { .. } => "not_bounded_below",
            Error::NonCommuting { .. } => "non_commuting",
            Error::NotProjection { .. } => "not_projection",
            Error::Precondition(_) => "precondition",
            Error::NonContractive { .. } => "non_contractive",
            Error::NotCnp { .. } => "not_cnp",
            Error::FamilyMismatch(_) => "family_mismatch",
            Error::NotUnitary { .. } => "not_unitary",
            Error::CertificationFailed { .. } => "certification_failed",
            Error::GraphNotIsometric { .. } => "graph_not_isometric",
            Error::NoUnitaryExtension { .. } => "no_unitary_extension",
            Error::ExactnessBudget { .. } => "exactness_budget",
            Error::Numerical(_) => "numerical",
        }
    }
}
