use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller broke an operation's precondition (wrong shape, unsupported order, ...).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("invalid hyperparameter: {0}")]
    Hyperparameter(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),

    #[error("boundary undercoverage: {points} points for {components} boundary components")]
    Undercoverage { points: usize, components: usize },

    /// Problem and boundary regime do not fit together.
    #[error("problem specification error: {0}")]
    Specification(String),

    #[error("non-finite data: {0}")]
    Data(String),

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("unknown {kind} `{name}`")]
    Lookup { kind: &'static str, name: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, with stage tags peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code for the error class.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Config(_) | Error::Lookup { .. } | Error::Hyperparameter(_) => 2,
            Error::Io(_) => 3,
            Error::Geometry(_) | Error::UnsupportedGeometry(_) | Error::Undercoverage { .. } => 4,
            Error::Data(_) | Error::Degenerate(_) | Error::UndefinedMetric(_) => 5,
            Error::Contract(_) | Error::Specification(_) => 6,
            Error::Stage { .. } => unreachable!(),
        }
    }
}
