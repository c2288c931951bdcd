use crate::mdp::Diagnostic;
use crate::rat::Rat;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    MalformedDocument(String),
    #[error("probabilities of action {action} at {state} sum to {sum}, not 1")]
    ProbabilitySumNotOne { state: String, action: String, sum: Rat },
    #[error("unknown state reference {0:?}")]
    UnknownStateReference(String),
    #[error("state {0:?} is not reachable from the initial state")]
    UnreachableState(String),
    #[error("invalid model: {}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("; "))]
    InvalidModel(Vec<Diagnostic>),
    #[error("scheduler undefined at state {state:?} in mode {mode}")]
    SchedulerPartial { state: String, mode: String },
    #[error("negative weight on action {action} at {state}")]
    NegativeWeight { state: String, action: String },
    #[error("{to:?} is not almost surely reachable from {from:?}")]
    TargetNotAlmostSurelyReachable { from: String, to: String },
    #[error("goal is not reachable from state {0:?}")]
    GoalNotReachable(String),
    #[error("end component containing {0:?} has a positive-weight action; the expectation is unbounded")]
    UnboundedExpectation(String),
    #[error("model is not strongly connected")]
    NotStronglyConnected,
    #[error("model has an end component other than the goal (at {0:?}); preprocess first")]
    PreprocessNotApplied(String),
    #[error("model is not acyclic; cycle through {}", .0.join(" -> "))]
    NotAcyclic(Vec<String>),
    #[error("goal is unreachable under every scheduler")]
    GoalUnreachable,
    #[error("goal is reached with probability 0 under the scheduler")]
    GoalProbabilityZero,
    #[error("end component containing {0:?} avoids Goal and Fail")]
    SpecMecViolation(String),
    #[error("the optimum {supremum} is a supremum that no finite-memory scheduler attains (stalling end component at {state:?})")]
    UnattainedSupremum { supremum: Rat, state: String },
    #[error("induced chain has {0} bottom components reachable from the initial state")]
    MultipleBsccs(usize),
    #[error("bottom component of the induced chain avoids Goal and Fail")]
    BsccAvoidsGoalFail,
    #[error("automaton acceptance is not resolved with probability 1 from {0:?}")]
    AcceptanceUnresolved(String),
    #[error("goal is not reached almost surely under the scheduler")]
    GoalNotAlmostSure,
    #[error("accumulated weight has infinite support under the scheduler")]
    InfiniteSupport,
    #[error("scheduler space is infinite for this model")]
    SpaceInfinite,
    #[error("enumeration exceeds the budget of {0} items")]
    SpaceTooLarge(usize),
    #[error("initial value beta_{0} is negative")]
    NegativeInitialValue(usize),
    #[error("rescaled sequence violates gadget constraint: {0}")]
    RescaleConstraintViolated(String),
    #[error("horizon must be positive")]
    HorizonNonpositive,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("singular linear system")]
    SingularMatrix,
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    /// Whether the error blames the input (exit code 2) rather than the program (exit code 1).
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::SingularMatrix | Error::Internal(_))
    }
}

impl From<crate::matrix::SingularMatrix> for Error {
    fn from(_: crate::matrix::SingularMatrix) -> Self {
        Error::SingularMatrix
    }
}

pub type Result<T> = std::result::Result<T, Error>;
