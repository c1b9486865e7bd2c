use thiserror::Error;

use crate::rational::Rational;

/// Errors raised by validation and by the constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("an algebra needs at least one atom")]
    EmptyAlgebra,

    #[error("atom {index} has non-positive mass {mass}")]
    ZeroAtom { index: usize, mass: Rational },

    #[error("atom masses sum to {sum}, not 1")]
    MassNotOne { sum: Rational },

    #[error("atom index {index} out of range for an algebra with {atoms} atoms")]
    AtomOutOfRange { index: usize, atoms: usize },

    #[error("objects live on different algebras")]
    AlgebraMismatch,

    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },

    #[error("tuple arity {0} is too large for explicit cell indexing")]
    ArityTooLarge(usize),

    #[error("parts sum to {got}, atom has mass {expected}")]
    PartMassMismatch { expected: Rational, got: Rational },

    #[error("refinement factor must be at least 1")]
    ZeroRefinement,

    #[error("generator {generator} is not a bijection on the atoms")]
    NotBijective { generator: usize },

    #[error("generator {generator} maps atom {atom} to an atom of different mass")]
    NotMeasurePreserving { generator: usize, atom: usize },

    #[error("letter {letter} out of range for {k} generators")]
    LetterOutOfRange { letter: i64, k: usize },

    #[error("expected {expected} generators, got {got}")]
    GeneratorCountMismatch { expected: usize, got: usize },

    #[error("delta must be positive, got {0}")]
    NonpositiveDelta(Rational),

    #[error("eps must be positive, got {0}")]
    NonpositiveEps(Rational),

    #[error("the blocks do not form a partition of the atoms")]
    NotAPartition,

    #[error("tuples do not have the same cell-mass vector")]
    TypeMismatch,

    #[error("current defect {defect} does not lie strictly below bound {bound}")]
    BoundViolated { defect: Rational, bound: Rational },

    #[error("partial map {partial} pairs blocks of different mass")]
    NotMassPreserving { partial: usize },

    #[error("invalid partial isomorphism: {0}")]
    InvalidPartial(String),

    #[error("the fixed algebra has a nontrivial invariant element {element:?}")]
    PreconditionInvariantElement { element: Vec<usize> },

    #[error("atoms do not all have equal mass")]
    UnequalAtoms,

    #[error("the action is not transitive on atoms")]
    NotTransitive,

    #[error("invalid group table: {0}")]
    InvalidGroup(String),

    #[error("generator images do not generate the group")]
    NotGenerating,

    #[error("embedding does not intertwine the generators")]
    EmbeddingNotEquivariant,

    #[error("expected {expected} tuples, got {got}")]
    WrongTupleCount { expected: usize, got: usize },

    #[error("instance too large: {0}")]
    InstanceTooLarge(String),

    #[error("grid must be positive")]
    InvalidGrid,

    #[error("linear program solver failure: {0}")]
    LpInternal(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyAlgebra => "EmptyAlgebra",
            Error::ZeroAtom { .. } => "ZeroAtom",
            Error::MassNotOne { .. } => "MassNotOne",
            Error::AtomOutOfRange { .. } => "AtomOutOfRange",
            Error::AlgebraMismatch => "AlgebraMismatch",
            Error::ArityMismatch { .. } => "ArityMismatch",
            Error::ArityTooLarge(_) => "ArityTooLarge",
            Error::PartMassMismatch { .. } => "PartMassMismatch",
            Error::ZeroRefinement => "ZeroRefinement",
            Error::NotBijective { .. } => "NotBijective",
            Error::NotMeasurePreserving { .. } => "NotMeasurePreserving",
            Error::LetterOutOfRange { .. } => "LetterOutOfRange",
            Error::GeneratorCountMismatch { .. } => "GeneratorCountMismatch",
            Error::NonpositiveDelta(_) => "NonpositiveDelta",
            Error::NonpositiveEps(_) => "NonpositiveEps",
            Error::NotAPartition => "NotAPartition",
            Error::TypeMismatch => "TypeMismatch",
            Error::BoundViolated { .. } => "BoundViolated",
            Error::NotMassPreserving { .. } => "NotMassPreserving",
            Error::InvalidPartial(_) => "InvalidPartial",
            Error::PreconditionInvariantElement { .. } => "PreconditionInvariantElement",
            Error::UnequalAtoms => "UnequalAtoms",
            Error::NotTransitive => "NotTransitive",
            Error::InvalidGroup(_) => "InvalidGroup",
            Error::NotGenerating => "NotGenerating",
            Error::EmbeddingNotEquivariant => "EmbeddingNotEquivariant",
            Error::WrongTupleCount { .. } => "WrongTupleCount",
            Error::InstanceTooLarge(_) => "InstanceTooLarge",
            Error::InvalidGrid => "InvalidGrid",
            Error::LpInternal(_) => "LPInternal",
            Error::Parse(_) => "Parse",
            Error::InvalidArgument(_) => "InvalidArgument",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
