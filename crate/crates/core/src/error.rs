use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("polynomial is not homogeneous: terms of degree {0} and {1}")]
    NotHomogeneous(u32, u32),
    #[error("unknown variable {0:?}")]
    UnknownVariable(String),
    #[error("scalar or object belongs to a different field")]
    FieldMismatch,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("point is not a singular point of the polynomial")]
    NotSingular,
    #[error("field characteristic {0} is too small for this computation")]
    CharTooSmall(u64),
    #[error("characteristic {p} divides the degree {degree}")]
    CharDividesDegree { p: u64, degree: u32 },
    #[error("chart variable has zero coefficient in the linear form")]
    BadChart,
    #[error("zero vector is not a projective point")]
    ZeroVector,
    #[error("duplicate point {0} in point set")]
    DuplicatePoint(String),
    #[error("scan of {size} points exceeds the cap of {cap}")]
    TooLarge { size: u128, cap: u64 },
    #[error("point lies in the projection center")]
    CenterHit,
    #[error("field too small to find independent generators")]
    FieldTooSmall,
    #[error("operation needs a prime field")]
    NeedsPrimeField,
    #[error("point is not a member of the set")]
    NotInSet,
    #[error("point sets overlap")]
    Overlap,
    #[error("auxiliary form vanishes at a point of the second set")]
    GVanishesOnDelta,
    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),
    #[error("need at least {0} points")]
    TooFew(usize),
    #[error("expected points in P^{expected}, got P^{got}")]
    WrongAmbient { expected: usize, got: usize },
    #[error("common zero locus differs from the point set in {} point(s)", .0.len())]
    LocusMismatch(Vec<String>),
    #[error("xi = {0} is below the minimum of 3")]
    XiTooSmall(u32),
    #[error("bad parameters: {0}")]
    BadParams(String),
    #[error("no acceptable draw after {} seed(s); observed node counts {:?}", .observed.len(), .observed)]
    DegenerateDraw { observed: Vec<(u64, usize)> },
}
