use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{what}: value {value} is outside the admissible domain")]
    Domain { what: &'static str, value: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("under-resolved interface: eps/h = {ratio:.4} < 2 (eps = {eps}, h = {h})")]
    UnderResolved { eps: f64, h: f64, ratio: f64 },

    #[error("interface lies {distance:.4} from the domain boundary, need at least {required:.4}")]
    BoundaryProximity { distance: f64, required: f64 },

    #[error("composite shape has touching components near ({x:.4}, {y:.4}, {z:.4})")]
    TouchingComponents { x: f64, y: f64, z: f64 },

    #[error("time step {dt:e} exceeds the stability limit {limit:e}")]
    UnstableStep { dt: f64, limit: f64 },

    #[error("non-finite phase value after step {step} (t = {time:e})")]
    NonFiniteState { step: usize, time: f64 },

    #[error("radius {radius:e} is below the resolution floor {min:e}")]
    RadiusTooSmall { radius: f64, min: f64 },

    #[error("ball of radius {radius} leaves the domain")]
    BallOutsideDomain { radius: f64 },

    #[error("test function support leaves the domain")]
    SupportOutsideDomain,

    #[error("time {time} is not a snapshot time")]
    NotSnapshotTime { time: f64 },

    #[error("snapshot cadence {cadence:e} too coarse for window, need at most {required:e}")]
    CadenceTooCoarse { cadence: f64, required: f64 },

    #[error("need at least {need} snapshots, have {have}")]
    TooFewSnapshots { have: usize, need: usize },

    #[error("need at least {need} epsilon levels, have {have}")]
    SweepTooShort { have: usize, need: usize },

    #[error("time {time} is at or beyond the extinction time {extinction}")]
    Extinct { time: f64, extinction: f64 },

    #[error("second moments are not uniformly bounded: {0}")]
    UnboundedMoments(String),

    #[error("mismatched inputs: {0}")]
    Mismatch(String),
}
