use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("{what} exceeds capacity: {size} > {cap}")]
    Capacity {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    #[error("query on edge {0} outside the committed query set")]
    ModelViolation(usize),
    #[error("query budget of {0} exhausted")]
    BudgetExceeded(u64),
    #[error("contract violated: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn capacity(what: &'static str, size: usize, cap: usize) -> Self {
        Error::Capacity { what, size, cap }
    }
}
