//! Error types, one enum per module plus an umbrella [`Error`].

use thiserror::Error;

use crate::alphabet::{Letter, LetterInterval, Word};
use crate::decompose::Structure;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("alphabet stride must be at least 1, got {0}")]
    InvalidStride(i64),
    #[error("letter {letter} is not covered by any rule or exception")]
    UncoveredLetter { letter: Letter },
    #[error("letter {letter} is covered by rules {first} and {second}")]
    OverlappingRegions {
        letter: Letter,
        first: usize,
        second: usize,
    },
    #[error("letter {letter} has an image of length {len}; every image needs at least 2 letters")]
    ImageTooShort { letter: Letter, len: usize },
    #[error("letter {letter} is not in the alphabet {stride}Z+{residue}")]
    OffAlphabet {
        letter: Letter,
        stride: i64,
        residue: i64,
    },
    #[error("size {size} exceeds the configured band cap {cap}")]
    SizeUnbounded { size: i64, cap: i64 },
    #[error("letters {a} and {b} have the same image")]
    InjectivityViolation { a: Letter, b: Letter },
    #[error("iterate would produce {len} letters, above the cap of {cap}")]
    LengthCapExceeded { len: u128, cap: usize },
    #[error("language on {window} did not stabilize (last margin {margin})")]
    NonStabilizing { window: LetterInterval, margin: i64 },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DecomposeError {
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error("window {window} is too narrow: width {width} < required {required}")]
    WindowTooNarrow {
        window: LetterInterval,
        width: i64,
        required: i64,
    },
    #[error("word of length {len} is shorter than the cut length N_sigma = {n_sigma}")]
    WordTooShort { len: usize, n_sigma: usize },
    #[error("letter {letter} lies outside the decomposer window {window}")]
    LetterOutsideWindow {
        letter: Letter,
        window: LetterInterval,
    },
    #[error("word of length {len} exceeds the decomposer bound {max}")]
    WordTooLong { len: usize, max: usize },
    #[error("word {word:?} has no sigma-decomposition")]
    NoDecomposition { word: Word },
    #[error("word {word:?} has {} distinct sigma-decompositions", structures.len())]
    AmbiguousDecomposition {
        word: Word,
        structures: Vec<Structure>,
    },
    #[error("window of length {len} cannot determine the block at the anchor (need {required})")]
    InsufficientWindow { len: usize, required: usize },
    #[error("arithmetic overflow")]
    Overflow,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TowerError {
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error("window {window} leaves no interior tower for n = {n}")]
    WindowTooNarrow { window: LetterInterval, n: usize },
    #[error("level must be at least 1")]
    ZeroLevel,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagramError {
    #[error("height or count overflow")]
    Overflow,
    #[error("position {position} at level {level} exceeds image length {len} of {vertex}")]
    InconsistentPrefix {
        level: usize,
        vertex: Letter,
        position: usize,
        len: usize,
    },
    #[error("height h({level}, {letter}) is not in the table")]
    MissingHeight { level: usize, letter: Letter },
    #[error("telescoping levels must be strictly increasing")]
    BadLevels,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not irreducible on the window [-{k}, {k}]")]
    NotIrreducibleOnWindow { k: i64 },
    #[error("no convergence over the window schedule (lambda history {history:?})")]
    NoConvergence { history: Vec<(i64, f64)> },
    #[error("window {window} is too narrow for depth {depth}")]
    WindowTooNarrowForDepth {
        window: LetterInterval,
        depth: usize,
    },
    #[error("window schedule must be non-empty and strictly increasing")]
    BadSchedule,
    #[error("row {row} has an entry at {col}, outside the band of width {bandwidth}")]
    BandViolation {
        row: Letter,
        col: Letter,
        bandwidth: i64,
    },
    #[error("window matrix is degenerate")]
    Degenerate,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error("vertex {v} (or part of its band) is outside the eigenvector window")]
    BoundaryVertex { v: Letter },
    #[error("window {window} is too narrow for depth {depth}")]
    WindowTooNarrowForDepth {
        window: LetterInterval,
        depth: usize,
    },
    #[error("no convergence up to depth {depth}: last change {last_change:e}")]
    NoConvergence { depth: usize, last_change: f64 },
    #[error(
        "seed of length {seed} cannot host an orbit of {orbit} steps for a word of length {word}"
    )]
    SeedTooShort {
        seed: usize,
        orbit: usize,
        word: usize,
    },
    #[error("the total mass is not finite, frequencies have no probability normalization")]
    InfiniteMass,
    #[error("occurrence count overflow")]
    Overflow,
    #[error("the empty word has no one-letter extensions to compare against")]
    EmptyWord,
}

/// Umbrella error for callers that drive the whole pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Subst(#[from] SubstError),
    #[error(transparent)]
    Decompose(#[from] DecomposeError),
    #[error(transparent)]
    Tower(#[from] TowerError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}
