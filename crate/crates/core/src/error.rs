use core::fmt;

/// Failure modes of the numerical kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside its admissible domain.
    Domain {
        /// Name of the offending quantity.
        what: &'static str,
        /// The rejected value.
        value: f64,
    },
    /// Evaluation at a source focus, where the field is singular.
    Singularity,
    /// Time formula that divides by the motion constant was given `eta_a = 0`.
    SingularConstant,
    /// Wave-vector slope requested for a purely axial wave vector.
    DegenerateDirection,
    /// An iterative solve failed; carries the last good point.
    Convergence {
        /// Which solve failed.
        stage: &'static str,
        /// Prolate `xi` of the last accepted point.
        xi: f64,
        /// Prolate `eta` of the last accepted point.
        eta: f64,
    },
}

/// Crate result alias.
pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain { what, value } => write!(f, "{what} out of domain: {value}"),
            Error::Singularity => f.write_str("evaluation at a source focus"),
            Error::SingularConstant => {
                f.write_str("motion constant eta_a = 0 is singular for this time formula")
            }
            Error::DegenerateDirection => f.write_str("wave vector has no radial component"),
            Error::Convergence { stage, xi, eta } => {
                write!(
                    f,
                    "{stage} did not converge; last good point xi={xi}, eta={eta}"
                )
            }
        }
    }
}

impl core::error::Error for Error {}

pub(crate) fn domain(what: &'static str, value: f64) -> Error {
    Error::Domain { what, value }
}
