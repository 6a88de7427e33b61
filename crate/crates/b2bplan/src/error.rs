use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {msg}")]
    ProfileParse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("invalid time series: {0}")]
    InvalidSeries(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("profiles not aligned: {0}")]
    MisalignedProfiles(String),

    #[error("invalid size grid: {0}")]
    InvalidGrid(String),

    #[error("no exchangeable energy; feeders gain nothing from connection")]
    NoExchangeableEnergy,

    #[error("connection uneconomic for feeder {feeder}: maximum net revenue is {nr_max:.2} $")]
    Uneconomic { feeder: u8, nr_max: f64 },

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("network is not radial: {0}")]
    NotRadial(String),

    #[error("unknown bus id {0}")]
    UnknownBus(usize),

    #[error("power flow did not converge{}", match .bus { Some(b) => format!(" (perturbation at bus {b})"), None => String::new() })]
    PowerFlowDiverged { bus: Option<usize> },

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
