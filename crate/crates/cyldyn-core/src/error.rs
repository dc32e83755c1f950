use alloc::vec::Vec;
use core::fmt;

use crate::newton::Violation;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// Root finding on a constant polynomial.
    InvalidDegree,
    /// A rational map with the zero polynomial as denominator.
    ZeroDenominator,
    /// `|2π Im z|` above the overflow guard.
    ExpOverflow,
    /// Evaluation of `g` at (or within the proximity radius of) a point of `E(g)`.
    AtEssentialSingularity,
    /// λ at one of the excluded parameters ±πi.
    ParamSingularity,
    InvalidSpec(Vec<Violation>),
    NotSinglePole,
    NotPeriodic,
    NonIntegerSigma {
        residual: f64,
    },
    NotCirclePreserving,
    NonMonotoneBracket,
    ZeroSigma,
    DegenerateRay,
    InvalidArgument(&'static str),
    NoConvergence,
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDegree => "InvalidDegree",
            Error::ZeroDenominator => "ZeroDenominator",
            Error::ExpOverflow => "ExpOverflow",
            Error::AtEssentialSingularity => "AtEssentialSingularity",
            Error::ParamSingularity => "ParamSingularity",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::NotSinglePole => "NotSinglePole",
            Error::NotPeriodic => "NotPeriodic",
            Error::NonIntegerSigma { .. } => "NonIntegerSigma",
            Error::NotCirclePreserving => "NotCirclePreserving",
            Error::NonMonotoneBracket => "NonMonotoneBracket",
            Error::ZeroSigma => "ZeroSigma",
            Error::DegenerateRay => "DegenerateRay",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::NoConvergence => "NoConvergence",
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidDegree => f.write_str("polynomial has degree 0"),
            Error::ZeroDenominator => f.write_str("denominator is the zero polynomial"),
            Error::ExpOverflow => f.write_str("|2π Im z| exceeds the exponent guard"),
            Error::AtEssentialSingularity => f.write_str("point lies on an essential singularity"),
            Error::ParamSingularity => f.write_str("parameter is one of ±πi"),
            Error::InvalidSpec(v) => {
                f.write_str("invalid Newton spec:")?;
                for x in v {
                    write!(f, " {x};")?;
                }
                Ok(())
            }
            Error::NotSinglePole => f.write_str("map does not have exactly one simple pole"),
            Error::NotPeriodic => f.write_str("point is not periodic of the requested period"),
            Error::NonIntegerSigma { residual } => {
                write!(f, "translation is not an integer (residual {residual:e})")
            }
            Error::NotCirclePreserving => f.write_str("map does not preserve the unit circle"),
            Error::NonMonotoneBracket => {
                f.write_str("bracket endpoints do not straddle the target")
            }
            Error::ZeroSigma => f.write_str("sigma must be nonzero"),
            Error::DegenerateRay => f.write_str("ray lands at infinity"),
            Error::InvalidArgument(s) => write!(f, "invalid argument: {s}"),
            Error::NoConvergence => f.write_str("iteration did not converge"),
        }
    }
}

impl core::error::Error for Error {}
