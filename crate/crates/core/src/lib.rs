//! Substitutions on countably infinite alphabets.
//!
//! The crate turns a finitely described substitution σ on ℤ (or on a stride-s
//! sublattice sℤ + r) into computable objects:
//!
//! * [`subst`] — region-rule substitutions, validation, iteration, abelianization;
//! * [`language`] — the factor language ℒ_σ restricted to a letter window;
//! * [`decompose`] — unique σ-decompositions, the cut length N_σ, recognizability;
//! * [`towers`] — Kakutani–Rokhlin tower addresses, the greedy 𝒫_n construction
//!   and the nested complete sections A_n, B_n;
//! * [`diagram`] — the stationary generalized Bratteli diagram, path prefixes and
//!   the Vershik successor;
//! * [`spectral`] — Perron–Frobenius data of the banded substitution matrix and
//!   recurrence evidence;
//! * [`measure`] — the tail-invariant path measure and the shift-invariant measure
//!   on X_σ evaluated by occurrence counting.
//!
//! Every semi-decision (left-determinedness, recurrence class, divergence of the
//! total mass) is reported together with the window and tolerances that back it.

pub mod alphabet;
pub mod banded;
pub mod decompose;
pub mod definition;
pub mod diagram;
pub mod error;
pub mod fixtures;
pub mod language;
pub mod measure;
pub mod scalar;
pub mod spectral;
pub mod subst;
pub mod towers;

pub use alphabet::{Alphabet, Letter, LetterInterval, WindowedSequence, Word};
pub use banded::{BandedMatrix, SparseRow, WindowMatrix};
pub use decompose::{
    find_n_sigma, power_injectivity_bound, power_n_sigma_bound, recognize, sigma_decompose,
    Decomposer, Decomposition, LeftDeterminedReport, Structure, Verdict,
};
pub use definition::{ExceptionDef, RegionDef, RuleDef, SubstitutionDef};
pub use diagram::{
    build_diagram, enumerate_prefixes, export_dot, heights, path_index, path_table_csv,
    prefix_from_index, telescope, vershik_successor, HeightTable, PathPrefix, StationaryDiagram,
    Successor,
};
pub use error::{
    DecomposeError, DiagramError, Error, MeasureError, SpectralError, SubstError, TowerError,
};
pub use fixtures::Fixture;
pub use language::{generate_language, Language};
pub use measure::{
    birkhoff_check, birkhoff_seed, consistency_check, cylinder_measure_path,
    cylinder_measure_shift, shift_invariance_check, shift_measure_at_depth, total_mass,
    BirkhoffReport, MassVerdict, OccurrenceCounter, ShiftInvarianceReport, ShiftMeasureEstimate,
    TotalMass,
};
pub use scalar::{Eigenpair, Scalar};
pub use spectral::{
    classify_recurrence, pf_eigen, series_verdict, verify_eigen, LeftNormalization, PfOptions,
    PositivityClass, RecurrenceClass, RecurrenceOptions, RecurrenceVerdict, Regime, ResidualReport,
    SeriesVerdict, SpectralData,
};
pub use subst::{Region, RegionRule, Substitution, ValidateOptions};
pub use towers::{
    build_pn, coverage, locate_in_pn, locate_in_tower, locate_path, section_membership, Pn,
    PnTower, SectionSpec, TowerAddress,
};
