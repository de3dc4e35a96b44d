//! Command-line surface, job configuration and substitution lookup.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use substrat_core::{Fixture, Letter, Substitution, SubstitutionDef, Word};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "substrat",
    version,
    about = "Substitutions on countably infinite alphabets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a substitution definition and print its summary.
    Validate { subst: String },
    /// List the factor language restricted to a letter window.
    Language { subst: String },
    /// The unique σ-decomposition of a word (letters separated by commas or spaces).
    Decompose {
        subst: String,
        #[arg(allow_hyphen_values = true)]
        word: String,
    },
    /// Check left-determinedness on a window and report the cut length N_σ.
    Nsigma { subst: String },
    /// The greedy tower family 𝒫_n.
    Towers { subst: String, n: usize },
    /// Export the stationary Bratteli diagram as DOT (and path tables as CSV).
    Diagram { subst: String },
    /// Perron–Frobenius data of the substitution matrix.
    Spectral { subst: String },
    /// Recurrence evidence for the substitution matrix.
    Classify { subst: String },
    /// The shift-invariant measure of a cylinder [w].
    Measure {
        subst: String,
        #[arg(allow_hyphen_values = true)]
        word: String,
    },
    /// Orbit frequency of a word against its predicted measure.
    Simulate {
        subst: String,
        #[arg(allow_hyphen_values = true)]
        word: Option<String>,
    },
    /// The full pipeline: summary, N_σ, spectral data, recurrence, measures.
    Report { subst: String },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::Language { .. } => "language",
            Command::Decompose { .. } => "decompose",
            Command::Nsigma { .. } => "nsigma",
            Command::Towers { .. } => "towers",
            Command::Diagram { .. } => "diagram",
            Command::Spectral { .. } => "spectral",
            Command::Classify { .. } => "classify",
            Command::Measure { .. } => "measure",
            Command::Simulate { .. } => "simulate",
            Command::Report { .. } => "report",
        }
    }

    pub fn subst(&self) -> &str {
        match self {
            Command::Validate { subst }
            | Command::Language { subst }
            | Command::Decompose { subst, .. }
            | Command::Nsigma { subst }
            | Command::Towers { subst, .. }
            | Command::Diagram { subst }
            | Command::Spectral { subst }
            | Command::Classify { subst }
            | Command::Measure { subst, .. }
            | Command::Simulate { subst, .. }
            | Command::Report { subst } => subst,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Rational,
    Float,
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Half-width K of the letter window [−K, K].
    #[arg(long, global = true, value_name = "K")]
    pub window: Option<i64>,
    /// Window half-widths for the Perron–Frobenius schedule.
    #[arg(long, global = true, value_delimiter = ',', value_name = "K1,K2,…")]
    pub schedule: Option<Vec<i64>>,
    /// Numerical tolerance.
    #[arg(long, global = true, default_value_t = 1e-8, value_name = "X")]
    pub tol: f64,
    /// Longest word length considered.
    #[arg(long, global = true, value_name = "L")]
    pub max_len: Option<usize>,
    /// Iteration depth (diagram levels, recurrence terms, measure depth).
    #[arg(long, global = true, value_name = "N")]
    pub depth: Option<usize>,
    /// Arithmetic mode; rational needs closed-form eigendata (built-in fixtures).
    #[arg(long, global = true, value_enum)]
    pub mode: Option<Mode>,
    /// Directory for the report document and CSV side-files.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// File for the DOT rendering of the diagram.
    #[arg(long, global = true, value_name = "FILE")]
    pub dot: Option<PathBuf>,
    /// Letter whose iterate seeds the simulated orbit.
    #[arg(
        long,
        global = true,
        default_value_t = 0,
        allow_hyphen_values = true,
        value_name = "A"
    )]
    pub seed_letter: Letter,
    /// Orbit length for `simulate`.
    #[arg(long, global = true, default_value_t = 1_000_000, value_name = "N")]
    pub orbit: usize,
}

impl Options {
    /// Rejects non-positive numeric parameters and malformed schedules.
    pub fn check(&self) -> Result<(), CliError> {
        let bad = |what: &str| Err(CliError::Config(what.to_string()));
        if self.window.is_some_and(|k| k < 1) {
            return bad("--window must be at least 1");
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad("--tol must be positive");
        }
        if self.max_len == Some(0) {
            return bad("--max-len must be at least 1");
        }
        if self.depth == Some(0) {
            return bad("--depth must be at least 1");
        }
        if self.orbit == 0 {
            return bad("--orbit must be at least 1");
        }
        if let Some(s) = &self.schedule {
            if s.is_empty() || s[0] < 1 || s.windows(2).any(|p| p[0] >= p[1]) {
                return bad(
                    "--schedule must be a strictly increasing list of positive half-widths",
                );
            }
        }
        Ok(())
    }
}

/// A substitution together with where it came from and, when its rules
/// coincide with a built-in fixture, that fixture's closed-form data.
pub struct Source {
    pub sigma: Substitution,
    pub origin: String,
    pub fixture: Option<Fixture>,
}

/// Resolves SUBST as a file path, then `$SUBSTRAT_FIXTURES/<SUBST>.toml`, then
/// a built-in fixture name.
pub fn load_substitution(arg: &str) -> Result<Source, CliError> {
    let path = Path::new(arg);
    let (text, origin) = if path.is_file() {
        (read(path)?, path.display().to_string())
    } else if let Some(p) = std::env::var_os("SUBSTRAT_FIXTURES")
        .map(|dir| PathBuf::from(dir).join(format!("{arg}.toml")))
        .filter(|p| p.is_file())
    {
        (read(&p)?, p.display().to_string())
    } else if let Some(fx) = Fixture::from_name(arg) {
        (fx.source().to_string(), format!("built-in:{arg}"))
    } else {
        return Err(CliError::NotFound(arg.to_string()));
    };
    let def = SubstitutionDef::from_toml(&text)?;
    let sigma = Substitution::validate(&def)?;
    let fixture = Fixture::ALL
        .into_iter()
        .find(|fx| same_rules(&def, &fx.substitution().to_def()));
    Ok(Source {
        sigma,
        origin,
        fixture,
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn same_rules(a: &SubstitutionDef, b: &SubstitutionDef) -> bool {
    let s = |d: &SubstitutionDef| Substitution::validate(d).map(|s| s.to_def());
    match (s(a), s(b)) {
        (Ok(a), Ok(b)) => {
            a.alphabet == b.alphabet && a.rules == b.rules && a.exceptions == b.exceptions
        }
        _ => false,
    }
}

/// Parses `0,-1,1`, `0 -1 1` or `(0,-1,1)`.
pub fn parse_word(input: &str) -> Result<Word, CliError> {
    let err = |reason: String| CliError::Word {
        input: input.to_string(),
        reason,
    };
    let inner = input.trim().trim_start_matches('(').trim_end_matches(')');
    let w: Word = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Letter>().map_err(|e| err(format!("{s:?}: {e}"))))
        .collect::<Result<_, _>>()?;
    if w.is_empty() {
        return Err(err("empty word".into()));
    }
    Ok(w)
}
