use std::fmt;

/// Analytic hypotheses a computation may depend on. Refusals name the one
/// that failed so callers can report it verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Hypothesis {
    /// a0 + Re ã(iω) ≥ 0 on the imaginary axis.
    PositiveDefinite,
    /// A is regularly varying with an index the estimator can resolve.
    RegularVariation,
    /// Regular-variation index inside (-1, 1].
    BetaRange,
    /// Sobolev exponent admissible for the chosen branch.
    SobolevRange,
    /// A_inf = a0 + ∫a finite and positive.
    FiniteLimit,
    /// Laplace transform extends to a half-plane Re s > -ε.
    LaplaceExtension,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::PositiveDefinite => "positive-definiteness of the kernel",
            Hypothesis::RegularVariation => "regular variation of A",
            Hypothesis::BetaRange => "beta in (-1, 1]",
            Hypothesis::SobolevRange => "admissible Sobolev exponent s",
            Hypothesis::FiniteLimit => "finite positive limit A_inf = a0 + int a",
            Hypothesis::LaplaceExtension => "Laplace transform analytic on Re s > -eps",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("implicit step not solvable ({0}); refine the time step")]
    StepSize(String),
    #[error("A(t) is not eventually positive: {0}")]
    NotEventuallyPositive(String),
    #[error("time {t} is not a node of the time grid (dt = {dt})")]
    OffGrid { t: f64, dt: f64 },
    #[error("Hermitian symmetry violated by {0:e}")]
    Symmetry(f64),
    #[error("refused: {hypothesis} fails ({detail})")]
    Refused { hypothesis: Hypothesis, detail: String },
}

impl Error {
    pub fn refused(hypothesis: Hypothesis, detail: impl Into<String>) -> Self {
        Error::Refused {
            hypothesis,
            detail: detail.into(),
        }
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
