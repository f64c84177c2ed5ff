use std::fmt;

use thiserror::Error;

/// Standing assumption that a kernel/potential pair can violate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Condition {
    /// Two-sided power bounds on the kernel for small jumps.
    SmallJumpBounds,
    /// The kernel is strictly positive at every distance.
    StrictPositivity,
    /// The kernel mass outside the split radius is finite.
    TailIntegrability,
    /// Every sub-level set of the potential has finite volume.
    FiniteSublevelSets,
    /// The potential tends to infinity (regular route).
    PotentialGrowth,
    /// The potential off the exceptional set grows without bound above the threshold.
    GrowthOffExceptionalSet,
    /// The dimension exceeds the lower small-jump order.
    Dimension,
}

impl Condition {
    pub const ALL: [Condition; 7] = [
        Condition::SmallJumpBounds,
        Condition::StrictPositivity,
        Condition::TailIntegrability,
        Condition::FiniteSublevelSets,
        Condition::PotentialGrowth,
        Condition::GrowthOffExceptionalSet,
        Condition::Dimension,
    ];

    /// Stable short identifier used in CSV output.
    pub fn id(self) -> &'static str {
        match self {
            Condition::SmallJumpBounds => "small-jump-bounds",
            Condition::StrictPositivity => "strict-positivity",
            Condition::TailIntegrability => "tail-integrability",
            Condition::FiniteSublevelSets => "finite-sublevel-sets",
            Condition::PotentialGrowth => "potential-growth",
            Condition::GrowthOffExceptionalSet => "growth-off-exceptional-set",
            Condition::Dimension => "dimension",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Condition::SmallJumpBounds => {
                "c1|z|^(-d-alpha1) <= rho(z) <= c2|z|^(-d-alpha2) for 0 < |z| <= kappa"
            }
            Condition::StrictPositivity => "rho(z) > 0 for every z != 0",
            Condition::TailIntegrability => "integral of rho over |z| > kappa is finite",
            Condition::FiniteSublevelSets => "|{V <= r}| < infinity for every r",
            Condition::PotentialGrowth => "V(x) -> infinity as |x| -> infinity",
            Condition::GrowthOffExceptionalSet => {
                "inf of V over {|x| >= R, V > K} -> infinity as R -> infinity"
            }
            Condition::Dimension => "d > alpha1",
        }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.id(), self.description())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("assumption violated: {condition}: {detail}")]
    Assumption { condition: Condition, detail: String },

    #[error("generalized inverse unbounded: target {target:e} exceeds the supremum on the evaluation domain")]
    UnboundedInverse { target: f64 },

    #[error("no feasible radius for alpha(r = {r:e}, s = {s:e})")]
    Infeasible { r: f64, s: f64 },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("not available: {0}")]
    NotAvailable(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("refused: {0}")]
    Refused(String),

    #[error("line {line}: {message}: `{content}`")]
    Parse {
        line: usize,
        content: String,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn assumption(condition: Condition, detail: impl Into<String>) -> Self {
        Error::Assumption {
            condition,
            detail: detail.into(),
        }
    }

    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
