use thiserror::Error;

/// Failures raised while building schedules, synthesizing pulses or integrating dynamics.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("constraint matrix is singular (pivot {pivot:e} at column {column})")]
    SingularSystem { column: usize, pivot: f64 },

    #[error("expected {expected} conditions for degree {degree}, got {got}")]
    ConditionCount {
        degree: usize,
        expected: usize,
        got: usize,
    },

    #[error("unphysical schedule: {0}")]
    UnphysicalSchedule(String),

    #[error("gamma derivative has no interior sign change")]
    NoCrossing,

    #[error("pulse diverges at s = {s}")]
    DivergentPulse { s: f64 },

    #[error("generalized Rabi frequency vanishes at s = {s}")]
    DegeneratePoint { s: f64 },

    #[error("integration step too coarse: drift {drift:e} exceeds 1e-8")]
    StepTooCoarse { drift: f64 },

    #[error("no feasible point in sweep")]
    NoFeasiblePoint,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
