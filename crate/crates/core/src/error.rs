use std::path::PathBuf;

use thiserror::Error;

/// Problems found while turning a raw network description into a [`crate::model::Network`].
///
/// Every variant names the offending entity so config typos can be located quickly.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("zero schedule missing")]
    MissingZeroSchedule,
    #[error("schedule set is empty")]
    NoSchedules,
    #[error("schedule #{index} has {found} components, expected {expected} (one per link)")]
    ScheduleDimension {
        index: usize,
        found: usize,
        expected: usize,
    },
    #[error("schedule #{index} has negative component {value} on link {link}")]
    NegativeScheduleComponent {
        index: usize,
        link: String,
        value: i64,
    },
    #[error("link {link} is never served by any schedule")]
    LinkNeverServed { link: String },
    #[error("duplicate {kind} id `{id}`")]
    DuplicateId { kind: &'static str, id: String },
    #[error("link {link} references unknown node `{node}`")]
    UnknownNode { link: String, node: String },
    #[error("link {link} is a self-loop on node `{node}`")]
    SelfLoop { link: String, node: String },
    #[error("route {route} references unknown link `{link}`")]
    UnknownLink { route: String, link: String },
    #[error("route {route} is empty")]
    EmptyRoute { route: String },
    #[error("route {route} is not chained: link `{from}` ends at `{head}` but link `{to}` starts at `{tail}`")]
    NotChained {
        route: String,
        from: String,
        to: String,
        head: String,
        tail: String,
    },
    #[error("route {route} visits link `{link}` more than once")]
    RouteRevisitsLink { route: String, link: String },
    #[error("route {route} has negative rate {rate}")]
    NegativeRate { route: String, rate: f64 },
    #[error("route {route} has non-finite rate")]
    NonFiniteRate { route: String },
    #[error("network has no links")]
    NoLinks,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Validation(#[from] ValidationError),

    #[error("no strictly positive feasible start: link #{link} has positive weight but no schedule serves it")]
    NoPositiveStart { link: usize },

    #[error("invalid objective: {0}")]
    InvalidObjective(String),

    #[error("point is not in the schedule hull (reconstruction error {error:.3e})")]
    NotInHull { error: f64 },

    #[error("invalid decomposition: {0}")]
    InvalidDecomposition(String),

    #[error("link #{link} has positive load but is never served")]
    NeverServed { link: usize },

    #[error("linear program failed: {0}")]
    Lp(String),

    #[error("invalid arrival process: {0}")]
    Arrivals(String),

    #[error("policy bug at slot {slot}: {detail}")]
    PolicyBug { slot: u64, detail: String },

    #[error("conservation violated at slot {slot}: {detail}")]
    Conservation { slot: u64, detail: String },

    #[error("horizon must be at least one slot")]
    EmptyHorizon,

    #[error("policy `{policy}` cannot drive this network: {reason}")]
    PolicyMismatch {
        policy: &'static str,
        reason: String,
    },

    #[error("solver failure at t={t}: {source}")]
    FluidSolver {
        t: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("entropy function undefined: route {route} has zero rate but positive mass")]
    ZeroRouteRate { route: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
