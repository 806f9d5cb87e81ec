use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("statistic `{name}` is undefined with {count} sample(s)")]
    UndefinedStatistic { name: &'static str, count: u64 },

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid strategy parameter: {0}")]
    InvalidParameter(String),

    #[error("budget exhausted: round {t} with budget {n}")]
    BudgetExhausted { t: u64, n: u64 },

    #[error("infeasible budget: n = {n} but {kind} needs at least {min} pulls for K = {k}")]
    InfeasibleBudget {
        n: u64,
        k: usize,
        min: u64,
        kind: &'static str,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}
