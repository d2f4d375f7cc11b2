use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("point {re} + {im}i is not inside the open unit disc")]
    OutsideDisc { re: f64, im: f64 },

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: String,
    },

    #[error("duplicate points at indices {first} and {second}")]
    Duplicate { first: usize, second: usize },

    #[error("{0}")]
    Degenerate(String),

    #[error("jet order {requested} exceeds the supported maximum {max}")]
    JetOrder { requested: usize, max: usize },

    #[error("{quantity} is too close to zero at {re} + {im}i (modulus {modulus:e})")]
    NearZero {
        quantity: &'static str,
        re: f64,
        im: f64,
        modulus: f64,
    },

    #[error("step size underflow at {re} + {im}i (h = {h:e})")]
    StepUnderflow { re: f64, im: f64, h: f64 },

    #[error("step budget of {0} exhausted")]
    StepBudget(usize),

    #[error("exclusion discs {first} and {second} overlap")]
    OverlappingExclusions { first: usize, second: usize },

    #[error("no admissible path: {0}")]
    PathBlocked(String),

    #[error("{re} + {im}i lies within the branch-cut guard of the principal logarithm")]
    BranchCut { re: f64, im: f64 },

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("unknown {kind} `{name}`")]
    Unknown { kind: &'static str, name: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
}

impl Error {
    pub fn outside(z: Complex64) -> Self {
        Error::OutsideDisc { re: z.re, im: z.im }
    }

    pub fn near_zero(quantity: &'static str, z: Complex64, modulus: f64) -> Self {
        Error::NearZero {
            quantity,
            re: z.re,
            im: z.im,
            modulus,
        }
    }

    pub fn param(name: &'static str, value: f64, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            value,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NearZero { .. }
                | Error::StepUnderflow { .. }
                | Error::StepBudget(_)
                | Error::NonFinite(_)
        )
    }
}
