use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the library. Basis indices in messages are 1-based.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("structure constants violate antisymmetry: c[{i}][{j}][{k}] != -c[{j}][{i}][{k}]")]
    Antisymmetry { i: usize, j: usize, k: usize },

    #[error("Jacobi identity fails on basis triple (e{i}, e{j}, e{k})")]
    Jacobi { i: usize, j: usize, k: usize },

    #[error("algebra is not nilpotent")]
    NotNilpotent,

    #[error("nilpotency class {0} exceeds the supported maximum of 6")]
    KappaTooLarge(usize),

    #[error("declared nilpotency class {declared} but the lower central series gives {computed}")]
    KappaMismatch { declared: usize, computed: usize },

    #[error("declared abelian dimension {declared} but dim - dim[g,g] = {computed}")]
    AbelianDimMismatch { declared: usize, computed: usize },

    #[error("basis is not adapted to the lower central series: {0}")]
    NotAdapted(String),

    #[error("integer points do not form a lattice: {0}")]
    NotALattice(String),

    #[error("panel count must be positive")]
    NonPositivePanels,

    #[error("character must be nontrivial")]
    TrivialCharacter,

    #[error("undecidable for this measure specification: {0}")]
    Undecidable(String),

    #[error("curve is not analytic: {0}")]
    NotAnalytic(String),

    #[error("curve has no derivative information: {0}")]
    NoDerivative(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("invalid dilation family: {0}")]
    InvalidDilation(String),

    #[error("invalid parameter grid: {0}")]
    InvalidGrid(String),

    #[error("depth {depth} is too shallow for m = {m} (need depth >= m + 8)")]
    DepthTooShallow { depth: u32, m: u32 },

    #[error("{0} is not a ternary rational in the required range")]
    NotTernaryRational(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid config at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("estimated work {estimated} exceeds the budget of {budget} evaluations")]
    BudgetExceeded { estimated: u64, budget: u64 },
}
