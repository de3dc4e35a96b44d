//! The report document (TOML) and its CSV side-files.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::PathBuf;

use serde::Serialize;
use substrat_core::{Eigenpair, Letter, Scalar};

use crate::config::{Options, Source};
use crate::error::CliError;

#[derive(Debug, Serialize)]
pub struct Summary {
    pub name: String,
    pub origin: String,
    pub stride: i64,
    pub residue: i64,
    /// Size t: the band half-width of the substitution matrix.
    pub size: i64,
    /// Length C: the longest image.
    pub max_len: usize,
    pub min_len: usize,
    pub constant_length: Option<usize>,
    pub rules: usize,
    pub exceptions: usize,
    /// Injectivity on letters is checked exactly on the whole alphabet.
    pub injective: bool,
    /// Built-in fixture whose closed-form eigendata apply, if any.
    pub closed_form: Option<String>,
}

impl Summary {
    pub fn of(src: &Source) -> Self {
        let s = &src.sigma;
        Summary {
            name: s.name().to_string(),
            origin: src.origin.clone(),
            stride: s.alphabet().stride,
            residue: s.alphabet().residue,
            size: s.size(),
            max_len: s.max_len(),
            min_len: s.min_len(),
            constant_length: s.constant_length(),
            rules: s.rules().len(),
            exceptions: s.exceptions().len(),
            injective: true,
            closed_form: src.fixture.map(|f| f.name().to_string()),
        }
    }
}

#[derive(Debug, Serialize)]
struct Provenance {
    tool: &'static str,
    version: &'static str,
    command: String,
    parameters: BTreeMap<String, String>,
}

fn provenance(command: &str, opts: &Options) -> Provenance {
    let mut p = BTreeMap::new();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            p.insert(k.to_string(), v);
        }
    };
    put("window", opts.window.map(|k| k.to_string()));
    put(
        "schedule",
        opts.schedule.as_ref().map(|s| {
            s.iter()
                .map(|k| k.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }),
    );
    put("tol", Some(format!("{:e}", opts.tol)));
    put("max_len", opts.max_len.map(|v| v.to_string()));
    put("depth", opts.depth.map(|v| v.to_string()));
    put("mode", opts.mode.map(|m| format!("{m:?}").to_lowercase()));
    put("seed_letter", Some(opts.seed_letter.to_string()));
    put("orbit", Some(opts.orbit.to_string()));
    Provenance {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: command.to_string(),
        parameters: p,
    }
}

/// Collects the sections of one report document and its side-files.
pub struct Document {
    command: String,
    table: toml::Table,
    side_files: Vec<(String, String)>,
}

impl Document {
    pub fn new(command: &str, src: &Source) -> Self {
        let mut d = Document {
            command: command.to_string(),
            table: toml::Table::new(),
            side_files: Vec::new(),
        };
        d.section("substitution", &Summary::of(src));
        d
    }

    pub fn section<S: Serialize>(&mut self, name: &str, value: &S) {
        let v = toml::Value::try_from(value).expect("report sections serialize to TOML");
        self.table.insert(name.to_string(), v);
    }

    pub fn side_file(&mut self, name: &str, contents: String) {
        self.side_files.push((name.to_string(), contents));
    }

    /// Prints the document and, with `--out`, writes it and its side-files.
    pub fn emit(mut self, opts: &Options) -> Result<(), CliError> {
        self.section("provenance", &provenance(&self.command, opts));
        let text = toml::to_string(&self.table).expect("report tables serialize");
        print!("{text}");
        if let Some(dir) = &opts.out {
            std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
            let mut files = vec![(format!("{}.toml", self.command), text)];
            files.append(&mut self.side_files);
            for (name, contents) in files {
                let path: PathBuf = dir.join(name);
                std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
            }
        }
        Ok(())
    }
}

/// `letter,left,right` rows in letter order.
pub fn eigen_csv<T: Scalar + Display>(e: &Eigenpair<T>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["letter", "left", "right"])
        .expect("writing to memory");
    for (a, l) in &e.left {
        let r = e.right.get(a).map(|r| fmt_scalar(r)).unwrap_or_default();
        w.write_record([a.to_string(), fmt_scalar(l), r])
            .expect("writing to memory");
    }
    into_string(w)
}

#[derive(Debug, Serialize)]
pub struct MeasureRow {
    pub word: String,
    pub estimate: f64,
    /// Exact value in rational mode.
    pub exact: Option<String>,
    pub tolerance: f64,
    pub depth: usize,
    pub mode: String,
    pub status: String,
}

/// `word,estimate,tolerance,depth,mode` rows.
pub fn measure_csv(rows: &[MeasureRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["word", "estimate", "tolerance", "depth", "mode"])
        .expect("writing to memory");
    for r in rows {
        let est = r
            .exact
            .clone()
            .unwrap_or_else(|| format!("{:e}", r.estimate));
        w.write_record([
            r.word.clone(),
            est,
            format!("{:e}", r.tolerance),
            r.depth.to_string(),
            r.mode.clone(),
        ])
        .expect("writing to memory");
    }
    into_string(w)
}

pub fn words_csv<'a>(words: impl Iterator<Item = &'a Vec<Letter>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["length", "word"])
        .expect("writing to memory");
    for word in words {
        w.write_record([
            word.len().to_string(),
            substrat_core::alphabet::fmt_word(word),
        ])
        .expect("writing to memory");
    }
    into_string(w)
}

/// Rationals print exactly (`p/q`), floats in shortest round-trip form.
pub fn fmt_scalar<T: Display>(v: &T) -> String {
    v.to_string()
}

fn into_string(w: csv::Writer<Vec<u8>>) -> String {
    String::from_utf8(w.into_inner().expect("flushing memory writer")).expect("csv output is utf-8")
}
