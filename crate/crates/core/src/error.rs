use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("Raman reduction invalid: |Δ|/max(γ, |Ω1|) = {ratio:.3} is below the threshold {threshold}")]
    ReductionInvalid { ratio: f64, threshold: f64 },

    #[error("mean spin vanishes; the rotation into the mean-spin frame is undefined")]
    ZeroMeanSpin,

    #[error("degenerate spin: λ1 = λ2 gives a vanishing mean spin")]
    DegenerateSpin,

    #[error("drift matrix is unstable; eigenvalues with Re ≤ 0: {offending:?}")]
    Unstable { offending: Vec<Complex64> },

    #[error("Lyapunov operator is singular (smallest eigenvalue-pair sum {pair_sum:.3e}); operating point sits on a turning point")]
    Singular { pair_sum: f64 },

    #[error("solver did not converge (best residual {residual:.3e})")]
    NoConvergence { residual: f64 },

    #[error("unphysical steady state: {0}")]
    Unphysical(String),

    #[error("no stable operating point found")]
    NoStablePoint,
}

impl Error {
    /// True for failures of the numerics (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            Error::InvalidParams(_) | Error::ReductionInvalid { .. } | Error::DegenerateSpin
        )
    }
}
