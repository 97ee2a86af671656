use std::fmt;

use thiserror::Error;

use crate::arena::PointId;

/// A single structural problem found while validating an arena or a cluster.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Diagnostic {
    MissingOrigin,
    DuplicateOrigin { point: PointId },
    UnknownParent { point: PointId },
    SelfReference { point: PointId },
    IllegalProximity { point: PointId, second: PointId },
    DuplicateSatellite { point: PointId, existing: PointId },
    NotDownwardClosed { point: PointId, missing: PointId },
    NonPositiveWeight { point: PointId },
    NegativeExcess { point: PointId, excess: String },
    Document { message: String },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::MissingOrigin => write!(f, "no origin point"),
            Diagnostic::DuplicateOrigin { point } => {
                write!(f, "point {point} has no parent but an origin already exists")
            }
            Diagnostic::UnknownParent { point } => {
                write!(f, "point {point} refers to a point that does not precede it")
            }
            Diagnostic::SelfReference { point } => {
                write!(f, "point {point} uses its parent as second proximity")
            }
            Diagnostic::IllegalProximity { point, second } => write!(
                f,
                "point {point} cannot be proximate to {second}: not a proximity of its parent"
            ),
            Diagnostic::DuplicateSatellite { point, existing } => write!(
                f,
                "point {point} has the same parent and second proximity as {existing}"
            ),
            Diagnostic::NotDownwardClosed { point, missing } => write!(
                f,
                "weighted point {point} has unweighted predecessor {missing}"
            ),
            Diagnostic::NonPositiveWeight { point } => {
                write!(f, "point {point} has a non-positive weight")
            }
            Diagnostic::NegativeExcess { point, excess } => {
                write!(f, "proximity inequality fails at {point} (excess {excess})")
            }
            Diagnostic::Document { message } => f.write_str(message),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("invalid input: {}", join(.0))]
    Validation(Vec<Diagnostic>),
    #[error("unknown point {0}")]
    UnknownPoint(PointId),
    #[error("unknown parent {0}")]
    UnknownParent(PointId),
    #[error("the arena already has an origin")]
    DuplicateOrigin,
    #[error("{second} is not a proximity of {parent}")]
    IllegalProximity { parent: PointId, second: PointId },
    #[error("{parent} already has a satellite {existing} proximate to {second}")]
    DuplicateSatellite { parent: PointId, second: PointId, existing: PointId },
    #[error("second proximity equals the parent {0}")]
    SelfReference(PointId),
    #[error("objects belong to different arenas")]
    ArenaMismatch,
    #[error("point {0} is not in the cluster")]
    NotInCluster(PointId),
    #[error("expected a {expected} cluster, found {found}")]
    WrongKind { expected: &'static str, found: &'static str },
    #[error("cluster is not consistent at {point}")]
    InconsistentCluster { point: PointId },
    #[error("non-positive multiplicity at {point}")]
    NonPositiveMultiplicity { point: PointId },
    #[error("the origin has no defining free point")]
    OriginHasNoFreePoint,
    #[error("the origin has no satellites")]
    OriginHasNoSatellite,
    #[error("a free point has no second satellite")]
    SecondSatelliteOfFreePoint,
    #[error("empty set")]
    EmptySet,
    #[error("points {0} and {1} are not comparable")]
    NotComparable(PointId, PointId),
    #[error("cluster is not unibranch")]
    NotUnibranch,
    #[error("origin multiplicity must be positive")]
    DegenerateOrigin,
    #[error("point {0} is not a dicritical point")]
    NotDicritical(PointId),
    #[error("no base free point for dicritical {0}")]
    NoQualifyingPair(PointId),
    #[error("satellite walk from {start} did not reach {target}")]
    WalkDiverged { start: PointId, target: String },
    #[error("no rupture point among the satellites of {0}")]
    EmptyRuptureSet(PointId),
    #[error("value at {0} is not an integer")]
    NonIntegralValue(PointId),
    #[error("rupture point {point} has quotient {found}, expected {expected}")]
    QuotientMismatch { point: PointId, expected: String, found: String },
    #[error("recovered cluster is not consistent at {point}")]
    InconsistentResult { point: PointId },
    #[error("{point} is {} a rupture point of the recovered curve", if *.expected { "not" } else { "also" })]
    RuptureMismatch { point: PointId, expected: bool },
    #[error("cluster is not saturated at {0}")]
    NotSaturated(PointId),
    #[error("cluster is not singular")]
    NotSingular,
    #[error("{0}")]
    Document(String),
}

fn join(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
