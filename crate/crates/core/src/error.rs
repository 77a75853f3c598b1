use crate::spectrum::ModeIndex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("mode indices must be positive, got ({nx},{ny},{nz})")]
    InvalidMode { nx: u32, ny: u32, nz: u32 },

    #[error("cannot parse mode index from {0:?}")]
    ParseMode(alloc::string::String),

    #[error("invalid {name} = {value}: must be {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },

    #[error("cavity wall moves at {speed} c, must stay below the speed of light")]
    Superluminal { speed: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("mode {0} is not in the basis")]
    ModeNotInBasis(ModeIndex),

    #[error(
        "slow coupling between {m} and {k} is undefined: modes must differ along exactly one of x, y and share n_z"
    )]
    UnsupportedCoupling { m: ModeIndex, k: ModeIndex },

    #[error("pair {lo}-{hi} is a difference-frequency match; only sum matches have a slow-time reduction")]
    UnsupportedMatch { lo: ModeIndex, hi: ModeIndex },

    #[error("drive frequency {omega} is not the three-mode frequency {expected}")]
    NotThreeModeDrive { omega: f64, expected: f64 },

    #[error("time step {dt} exceeds the stability bound {bound}")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("no run recorded for pump mode {0}")]
    MissingPump(ModeIndex),

    #[error("runs for different pumps were sampled at different times")]
    MisalignedRuns,

    #[error("fit window holds {found} samples, need at least 3")]
    TooFewSamples { found: usize },

    #[error("particle number {0} is negative")]
    NegativeCount(f64),
}
