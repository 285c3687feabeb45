use thiserror::Error;

/// Errors shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("signature mismatch: Cl_{0} vs Cl_{1}")]
    SignatureMismatch(usize, usize),

    #[error("ambient dimension {0} out of range (1..=8)")]
    DimensionOutOfRange(usize),

    #[error("expected a grade-1 element")]
    NotAVector,

    #[error("zero vector has no inverse")]
    ZeroVector,

    #[error("element is not invertible: {0}")]
    NotInvertible(String),

    #[error("polynomial is not harmonic (splitting residual {residual:.3e})")]
    NotHarmonic { residual: f64 },

    #[error("evaluation at the origin is singular")]
    EvalAtOrigin,

    #[error("kernel evaluated at coincident points")]
    CoincidentPoints,

    #[error("unsupported sphere dimension n={0} (quadrature supports 1..=4)")]
    UnsupportedSphere(usize),

    #[error("quadrature exactness degree {requested} exceeds cap {cap}")]
    ExactnessTooHigh { requested: usize, cap: usize },

    #[error("band limit {band} exceeds rule exactness (d_exact {d_exact})")]
    BandExceedsRule { band: usize, d_exact: usize },

    #[error("operator has a zero mode: n={n}, k={k}, degree m={m}")]
    ZeroMode { n: usize, k: usize, m: usize },

    #[error("spectral parameter alpha={0} collides with the spectrum")]
    AlphaInSpectrum(f64),

    #[error("Moebius map has a pole at the requested point")]
    MobiusPole,

    #[error("inverse Cayley transform undefined at the north pole")]
    NorthPole,

    #[error("non-integrable weighted integrand: radial exponent {0} >= -n")]
    NonIntegrable(i64),

    #[error("Riesz kernel degenerates: k={k} with n={n} even (valid range 1 <= k < n)")]
    KernelDegenerate { n: usize, k: usize },

    #[error("{0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
