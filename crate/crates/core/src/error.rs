use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("polygon `{polygon}` is not simple")]
    SelfIntersecting { polygon: String },

    #[error("polygon `{polygon}` has the wrong orientation (outer must be counter-clockwise, holes clockwise)")]
    Orientation { polygon: String },

    #[error("hole `{polygon}` is not strictly inside the outer boundary")]
    HoleNotContained { polygon: String },

    #[error("holes `{first}` and `{second}` are not disjoint")]
    HolesOverlap { first: String, second: String },

    #[error("region is disconnected: {components} components at h = {h}")]
    Disconnected { components: usize, h: f64 },

    #[error("unknown corpus domain `{0}`")]
    UnknownCorpus(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: String, reason: String },

    #[error("discretization at h = {h} produced no nodes")]
    EmptyGraph { h: f64 },

    #[error("node {to} is unreachable from node {from}")]
    Unreachable { from: usize, to: usize },

    #[error("no boundary-proximal nodes (d < 2h); grid too coarse")]
    NoBoundaryNodes,

    #[error("four-point estimate needs at least 4 landmarks, got {0}")]
    TooFewLandmarks(usize),

    #[error("node {0} does not lie on the supplied geodesic")]
    NotOnGeodesic(usize),

    #[error("eps = {0} outside (0, {1}]")]
    EpsOutOfRange(f64, f64),

    #[error("ball radius {r} is below the measure resolution {min}")]
    RadiusTooSmall { r: f64, min: f64 },

    #[error("no sample satisfied the hypothesis")]
    NoAdmissibleSample,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("unknown command `{0}`")]
    UnknownCommand(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable short code, used in reports and by callers that match on
    /// error kinds without caring about the payload.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::SelfIntersecting { .. } => "self-intersecting",
            Error::Orientation { .. } => "orientation",
            Error::HoleNotContained { .. } => "hole-not-contained",
            Error::HolesOverlap { .. } => "holes-overlap",
            Error::Disconnected { .. } => "disconnected",
            Error::UnknownCorpus(_) => "unknown-corpus",
            Error::InvalidParam { .. } => "invalid-param",
            Error::EmptyGraph { .. } => "empty-graph",
            Error::Unreachable { .. } => "unreachable",
            Error::NoBoundaryNodes => "no-boundary-nodes",
            Error::TooFewLandmarks(_) => "too-few-landmarks",
            Error::NotOnGeodesic(_) => "not-on-geodesic",
            Error::EpsOutOfRange(..) => "eps-out-of-range",
            Error::RadiusTooSmall { .. } => "radius-too-small",
            Error::NoAdmissibleSample => "no-admissible-sample",
            Error::EmptyInput(_) => "empty-input",
            Error::UnknownCommand(_) => "unknown-command",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
