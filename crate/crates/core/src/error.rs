use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient sequence: needed {needed} terms, generator provides {available}")]
    InsufficientSequence { needed: usize, available: usize },

    #[error("anchor spacing violated: {0}")]
    AnchorSpacing(String),

    #[error("non-monotone reversal at m = {index}")]
    NonMonotoneReversal { index: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("schedule degeneracy: e_{stage} = {value} < 2")]
    ScheduleDegeneracy { stage: usize, value: String },

    #[error("enumeration infeasible ({what}: {size} > budget {budget}); use sampling mode")]
    EnumerationInfeasible {
        what: &'static str,
        size: String,
        budget: u64,
    },

    #[error("sumset collision in F_{block} blocks")]
    SumsetCollision { block: usize },

    #[error("spacer pool overdrawn: need {needed}, available {available}")]
    SpacerPoolOverdrawn { needed: String, available: String },

    #[error("tower too shallow: max offset {max_offset} >= height {height}")]
    TowerTooShallow { max_offset: u64, height: u64 },

    #[error("invalid column or level: {0}")]
    InvalidLineage(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = core::result::Result<T, Error>;
