//! One function per subcommand. Each returns the exit code on success paths
//! that still carry a negative finding (a refuted semi-decision).

use std::fmt::Display;

use num_rational::BigRational;
use serde::Serialize;
use substrat_core::alphabet::fmt_word;
use substrat_core::{
    birkhoff_check, birkhoff_seed, build_diagram, build_pn, classify_recurrence,
    cylinder_measure_shift, enumerate_prefixes, export_dot, find_n_sigma, generate_language,
    heights, path_table_csv, pf_eigen, shift_invariance_check, sigma_decompose, total_mass,
    verify_eigen, BandedMatrix, Eigenpair, LeftDeterminedReport, Letter, LetterInterval,
    MassVerdict, MeasureError, PfOptions, RecurrenceOptions, RecurrenceVerdict, Scalar,
    SpectralData, Structure, Verdict, Word,
};

use crate::config::{parse_word, Command, Mode, Options, Source};
use crate::error::{exit, CliError};
use crate::report::{eigen_csv, fmt_scalar, measure_csv, words_csv, Document, MeasureRow};

pub fn run(cmd: &Command, src: &Source, opts: &Options) -> Result<u8, CliError> {
    let mut doc = Document::new(cmd.name(), src);
    let code = match cmd {
        Command::Validate { .. } => exit::OK,
        Command::Language { .. } => language(src, opts, &mut doc)?,
        Command::Decompose { word, .. } => decompose(src, opts, &parse_word(word)?, &mut doc)?,
        Command::Nsigma { .. } => nsigma(src, opts, &mut doc)?.1,
        Command::Towers { n, .. } => towers(src, opts, *n, &mut doc)?,
        Command::Diagram { .. } => return diagram(src, opts, doc),
        Command::Spectral { .. } => spectral(src, opts, &mut doc)?,
        Command::Classify { .. } => classify(src, opts, &mut doc)?,
        Command::Measure { word, .. } => measure(src, opts, &parse_word(word)?, &mut doc)?,
        Command::Simulate { word, .. } => {
            let w = match word {
                Some(w) => parse_word(w)?,
                None => vec![opts.seed_letter],
            };
            simulate(src, opts, &w, &mut doc)?
        }
        Command::Report { .. } => report(src, opts, &mut doc)?,
    };
    doc.emit(opts)?;
    Ok(code)
}

/// Band growth per iteration, in integers.
fn band(src: &Source) -> i64 {
    src.sigma.size().max(src.sigma.alphabet().stride)
}

fn ceil_log2(n: usize) -> i64 {
    (usize::BITS - n.saturating_sub(1).leading_zeros()) as i64
}

fn symmetric_or(opts: &Options, default: i64) -> LetterInterval {
    LetterInterval::symmetric(opts.window.unwrap_or(default))
}

fn language(src: &Source, opts: &Options, doc: &mut Document) -> Result<u8, CliError> {
    let max_len = opts.max_len.unwrap_or(3);
    let window = symmetric_or(opts, 10 * src.sigma.alphabet().stride);
    let lang = generate_language(&src.sigma, max_len, window)?;
    #[derive(Serialize)]
    struct Section {
        window: LetterInterval,
        max_len: usize,
        stabilization_margin: i64,
        count: usize,
        words: Vec<String>,
    }
    doc.section(
        "language",
        &Section {
            window,
            max_len,
            stabilization_margin: lang.margin(),
            count: lang.len(),
            words: lang.iter().map(|w| fmt_word(w)).collect(),
        },
    );
    doc.side_file("language.csv", words_csv(lang.iter()));
    Ok(exit::OK)
}

#[derive(Serialize)]
struct NsigmaSection {
    /// Window evidence only: uniqueness is verified for words up to `max_len_checked`.
    verdict: Verdict,
    n_sigma: Option<usize>,
    window: LetterInterval,
    max_len_checked: usize,
    bad_lengths: Vec<usize>,
    words_checked: usize,
    counterexample: Option<String>,
    counterexample_parses: Vec<String>,
}

impl From<&LeftDeterminedReport> for NsigmaSection {
    fn from(r: &LeftDeterminedReport) -> Self {
        NsigmaSection {
            verdict: r.verdict,
            n_sigma: r.n_sigma,
            window: r.window,
            max_len_checked: r.max_len_checked,
            bad_lengths: r.bad_lengths.clone(),
            words_checked: r.words_checked,
            counterexample: r.counterexample.as_ref().map(|(w, _)| fmt_word(w)),
            counterexample_parses: r
                .counterexample
                .iter()
                .flat_map(|(w, s)| s.iter().map(|s| fmt_structure(w, s)))
                .collect(),
        }
    }
}

fn fmt_structure(w: &[Letter], s: &Structure) -> String {
    match s {
        Structure::Interior { witnesses } => {
            format!("inside one image, witnesses {witnesses:?}")
        }
        Structure::Cut {
            head_len,
            core,
            tail_len,
            ..
        } => format!(
            "{} | σ{} | {}",
            fmt_word(&w[..*head_len]),
            fmt_word(core),
            fmt_word(&w[w.len() - tail_len..])
        ),
    }
}

fn nsigma(
    src: &Source,
    opts: &Options,
    doc: &mut Document,
) -> Result<(LeftDeterminedReport, u8), CliError> {
    let max_len = opts.max_len.unwrap_or(8);
    let t = band(src);
    let window = symmetric_or(opts, 20.max(t * (ceil_log2(max_len) + 1)));
    let r = find_n_sigma(&src.sigma, window, max_len)?;
    doc.section("left_determined", &NsigmaSection::from(&r));
    let code = match r.verdict {
        Verdict::ConfirmedOnWindow => exit::OK,
        Verdict::Refuted => {
            eprintln!(
                "left-determinedness refuted on {window}: {} has several decompositions",
                r.counterexample
                    .as_ref()
                    .map(|(w, _)| fmt_word(w))
                    .unwrap_or_default()
            );
            exit::REFUTED
        }
    };
    Ok((r, code))
}

fn decompose(
    src: &Source,
    opts: &Options,
    w: &[Letter],
    doc: &mut Document,
) -> Result<u8, CliError> {
    let (r, code) = nsigma(src, opts, doc)?;
    let Some(n_sigma) = r.n_sigma else {
        return Ok(code);
    };
    let d = sigma_decompose(&src.sigma, w, n_sigma)?;
    #[derive(Serialize)]
    struct Section {
        word: String,
        head: String,
        core: String,
        tail: String,
        head_witnesses: Vec<Letter>,
        tail_witnesses: Vec<Letter>,
    }
    doc.section(
        "decomposition",
        &Section {
            word: fmt_word(w),
            head: fmt_word(&d.head),
            core: fmt_word(&d.core),
            tail: fmt_word(&d.tail),
            head_witnesses: d.head_witnesses.into_iter().collect(),
            tail_witnesses: d.tail_witnesses.into_iter().collect(),
        },
    );
    Ok(exit::OK)
}

fn towers(src: &Source, opts: &Options, n: usize, doc: &mut Document) -> Result<u8, CliError> {
    let window = symmetric_or(opts, 10 * band(src));
    let pn = build_pn(&src.sigma, n, window)?;
    #[derive(Serialize)]
    struct Section {
        n: usize,
        window: LetterInterval,
        order: &'static str,
        kept: usize,
        kept_interior: usize,
        removed: usize,
        kept_words: Vec<String>,
        removed_words: Vec<String>,
    }
    doc.section(
        "towers",
        &Section {
            n,
            window,
            order: "spiral 0, -1, 1, -2, 2, ... on alphabet indices, lexicographic on words",
            kept: pn.kept.len(),
            kept_interior: pn.kept.iter().filter(|t| !t.boundary).count(),
            removed: pn.removed.len(),
            kept_words: pn.kept.iter().map(|t| fmt_word(&t.word)).collect(),
            removed_words: pn.removed.iter().map(|w| fmt_word(w)).collect(),
        },
    );
    doc.side_file("towers.csv", pn.to_csv());
    Ok(exit::OK)
}

fn diagram(src: &Source, opts: &Options, mut doc: Document) -> Result<u8, CliError> {
    let levels = opts.depth.unwrap_or(3);
    let window = symmetric_or(opts, 5 * src.sigma.alphabet().stride);
    let d = build_diagram(&src.sigma);
    let dot = export_dot(&d, levels, window);
    let Some(path) = &opts.dot else {
        print!("{dot}");
        return Ok(exit::OK);
    };
    std::fs::write(path, &dot).map_err(|e| CliError::io(path, e))?;
    let h = heights(&src.sigma, levels, window)?;
    let prefixes: Vec<_> = src
        .sigma
        .alphabet()
        .letters_in(window)
        .flat_map(|a| enumerate_prefixes(&d, a, levels))
        .collect();
    #[derive(Serialize)]
    struct Section {
        levels: usize,
        window: LetterInterval,
        dot: String,
        paths: usize,
    }
    doc.section(
        "diagram",
        &Section {
            levels,
            window,
            dot: path.display().to_string(),
            paths: prefixes.len(),
        },
    );
    doc.side_file("paths.csv", path_table_csv(&d, &h, &prefixes)?);
    doc.emit(opts)?;
    Ok(exit::OK)
}

fn pf_options(opts: &Options) -> PfOptions {
    let mut o = PfOptions {
        tol: opts.tol,
        ..PfOptions::default()
    };
    if let Some(s) = &opts.schedule {
        o.schedule = s.clone();
    }
    o
}

#[derive(Serialize)]
struct SpectralSection {
    mode: &'static str,
    lambda: f64,
    lambda_exact: Option<String>,
    lambda_error: f64,
    tol: f64,
    vector_tol: f64,
    regime: Option<substrat_core::Regime>,
    monotone: Option<bool>,
    normalization: String,
    interior: LetterInterval,
    residual_left: String,
    residual_right: String,
    /// `(max − min) / max` of ℓ, resp. r, on the interior.
    left_spread: f64,
    right_spread: f64,
    history: Vec<(i64, f64)>,
    /// `[letter, ℓ, r]` for the letters nearest 0.
    central: Vec<(Letter, String, String)>,
}

fn spread<T: Scalar>(v: impl Iterator<Item = T>) -> f64 {
    let (lo, hi) = v.fold((f64::INFINITY, 0.0f64), |(lo, hi), x| {
        let x = x.as_f64();
        (lo.min(x), hi.max(x))
    });
    if hi > 0.0 {
        (hi - lo) / hi
    } else {
        0.0
    }
}

fn central<T: Scalar + Display>(e: &Eigenpair<T>, k: i64) -> Vec<(Letter, String, String)> {
    e.left
        .range(-k..=k)
        .map(|(a, l)| {
            (
                *a,
                fmt_scalar(l),
                e.right.get(a).map(fmt_scalar).unwrap_or_default(),
            )
        })
        .collect()
}

fn float_spectral(src: &Source, opts: &Options) -> Result<SpectralData, CliError> {
    let f = BandedMatrix::from_substitution(&src.sigma);
    Ok(pf_eigen(&f, &pf_options(opts))?)
}

fn spectral_section(src: &Source, d: &SpectralData) -> SpectralSection {
    let k = 4 * src.sigma.alphabet().stride;
    SpectralSection {
        mode: "float",
        lambda: d.lambda(),
        lambda_exact: None,
        lambda_error: d.lambda_error,
        tol: d.tol,
        vector_tol: d.vector_tol,
        regime: Some(d.regime),
        monotone: Some(d.monotone),
        normalization: format!("{:?}", d.normalization),
        interior: d.interior,
        residual_left: format!("{:e}", d.residual_left),
        residual_right: format!("{:e}", d.residual_right),
        left_spread: spread(d.eigen.left.values().copied()),
        right_spread: spread(d.eigen.right.values().copied()),
        history: d.history.clone(),
        central: central(&d.eigen, k),
    }
}

fn spectral(src: &Source, opts: &Options, doc: &mut Document) -> Result<u8, CliError> {
    if opts.mode != Some(Mode::Rational) {
        let d = float_spectral(src, opts)?;
        doc.section("spectral", &spectral_section(src, &d));
        doc.side_file("eigenvectors.csv", eigen_csv(&d.eigen));
        return Ok(exit::OK);
    }
    let fx = closed_form(src)?;
    let window = symmetric_or(opts, 40 * src.sigma.alphabet().stride);
    let e = fx.normalized_eigenpair::<BigRational>(window);
    let f = BandedMatrix::from_substitution(&src.sigma);
    let res = verify_eigen(&f, &e, window)?;
    doc.section(
        "spectral",
        &SpectralSection {
            mode: "rational",
            lambda: e.lambda.as_f64(),
            lambda_exact: Some(e.lambda.to_string()),
            lambda_error: 0.0,
            tol: 0.0,
            vector_tol: 0.0,
            regime: None,
            monotone: None,
            normalization: if fx.left_total().is_some() {
                "SumOne"
            } else {
                "closed form"
            }
            .into(),
            interior: window,
            residual_left: res.left.to_string(),
            residual_right: res.right.to_string(),
            left_spread: spread(e.left.values().cloned()),
            right_spread: spread(e.right.values().cloned()),
            history: Vec::new(),
            central: central(&e, 4 * src.sigma.alphabet().stride),
        },
    );
    doc.side_file("eigenvectors.csv", eigen_csv(&e));
    Ok(exit::OK)
}

fn closed_form(src: &Source) -> Result<substrat_core::Fixture, CliError> {
    src.fixture.ok_or_else(|| {
        CliError::Config(
            "rational mode needs closed-form eigendata, available for the built-in fixtures only"
                .into(),
        )
    })
}

#[derive(Serialize)]
struct RecurrenceSection {
    class: substrat_core::RecurrenceClass,
    positivity: substrat_core::PositivityClass,
    period: u64,
    irreducible_on_window: bool,
    reference: Letter,
    window: LetterInterval,
    terms: usize,
    slope: f64,
    last_partial_sum: f64,
    last_taboo_sum: f64,
    lr_series: String,
    basis: String,
}

fn recurrence_section(v: &RecurrenceVerdict, o: &RecurrenceOptions) -> RecurrenceSection {
    RecurrenceSection {
        class: v.class,
        positivity: v.positive_vs_null,
        period: v.period,
        irreducible_on_window: v.irreducible_on_window,
        reference: v.reference,
        window: v.window,
        terms: o.n_max,
        slope: v.slope,
        last_partial_sum: v.partial_sums.last().copied().unwrap_or(0.0),
        last_taboo_sum: v.taboo_sums.last().copied().unwrap_or(0.0),
        lr_series: mass_label(&v.lr_series).into(),
        basis: format!(
            "evidence: log-log slope of the last {} terms of Σ f⁽ⁿ⁾ λ⁻ⁿ (recurrent above {}, transient below {}), partial-sum cap {:e}, tail ratio margin {}",
            o.slope_window, o.recurrent_slope, o.transient_slope, o.cap, o.tail_delta
        ),
    }
}

fn recurrence(
    src: &Source,
    opts: &Options,
    d: &SpectralData,
) -> Result<(RecurrenceVerdict, RecurrenceOptions), CliError> {
    let o = RecurrenceOptions {
        n_max: opts.depth.unwrap_or(40),
        ..RecurrenceOptions::default()
    };
    let window = symmetric_or(opts, (o.n_max as i64 + 1) * band(src));
    let f = BandedMatrix::from_substitution(&src.sigma);
    let v = classify_recurrence(&f, d, &o, window)?;
    Ok((v, o))
}

fn classify(src: &Source, opts: &Options, doc: &mut Document) -> Result<u8, CliError> {
    let d = float_spectral(src, opts)?;
    let (v, o) = recurrence(src, opts, &d)?;
    doc.section("recurrence", &recurrence_section(&v, &o));
    Ok(exit::OK)
}

fn mass_label(v: &MassVerdict) -> &'static str {
    match v {
        MassVerdict::Finite { .. } => "finite",
        MassVerdict::DivergentEvidence { .. } => "divergent-evidence",
        MassVerdict::Inconclusive { .. } => "inconclusive",
    }
}

#[derive(Serialize)]
struct MassSection {
    verdict: &'static str,
    value: Option<f64>,
    partial: Option<f64>,
    basis: &'static str,
}

fn mass_section(v: &MassVerdict) -> MassSection {
    let (value, partial) = match v {
        MassVerdict::Finite { value, .. } => (Some(*value), None),
        MassVerdict::DivergentEvidence { partial } | MassVerdict::Inconclusive { partial } => {
            (None, Some(*partial))
        }
    };
    MassSection {
        verdict: mass_label(v),
        value,
        partial,
        basis: "evidence: tail ratios of ℓ at the edges of the reported interior",
    }
}

/// Measure of one cylinder, rational with closed-form data when available.
fn measure_row(
    src: &Source,
    opts: &Options,
    w: &[Letter],
    float: Option<&SpectralData>,
) -> Result<MeasureRow, CliError> {
    let t = band(src);
    let hull = LetterInterval::hull(w);
    let rational = match opts.mode {
        Some(Mode::Rational) => {
            closed_form(src)?;
            true
        }
        Some(Mode::Float) => false,
        None => src.fixture.is_some(),
    };
    if rational {
        let depth = opts.depth.unwrap_or(30);
        let window = hull.widen(depth as i64 * t);
        let e = closed_form(src)?.normalized_eigenpair::<BigRational>(window);
        let m = cylinder_measure_shift(&src.sigma, &e, w, depth, window, opts.tol)?;
        return Ok(row(w, &m.value, m.achieved_tol, m.depth));
    }
    let owned;
    let d = match float {
        Some(d) => d,
        None => {
            owned = float_spectral(src, opts)?;
            &owned
        }
    };
    let room = (hull.lo - d.interior.lo).min(d.interior.hi - hull.hi) / t;
    let depth = opts.depth.unwrap_or(room.clamp(0, 30) as usize);
    let m = cylinder_measure_shift(&src.sigma, &d.eigen, w, depth, d.interior, opts.tol)?;
    Ok(row(w, &m.value, m.achieved_tol, m.depth))
}

fn row<T: Scalar + Display>(w: &[Letter], v: &T, tol: f64, depth: usize) -> MeasureRow {
    MeasureRow {
        word: fmt_word(w),
        estimate: v.as_f64(),
        exact: T::EXACT.then(|| fmt_scalar(v)),
        tolerance: tol,
        depth,
        mode: T::mode_name().into(),
        status: "converged".into(),
    }
}

fn measure(src: &Source, opts: &Options, w: &[Letter], doc: &mut Document) -> Result<u8, CliError> {
    let r = measure_row(src, opts, w, None)?;
    #[derive(Serialize)]
    struct Invariance {
        status: String,
        depth: usize,
        preimage_sum: Option<f64>,
        relative_residual: Option<f64>,
        prefixes: Vec<Letter>,
    }
    // ν([w]) against Σ_b ν([bw]); the prefixes b reach 2·depth·t beyond w
    // and each of their blocks another depth·t.
    let depth = r.depth.max(10);
    let inv = if r.mode == "rational" {
        let window = LetterInterval::hull(w).widen(3 * depth as i64 * band(src));
        let e = closed_form(src)?.normalized_eigenpair::<BigRational>(window);
        shift_invariance_check(&src.sigma, &e, w, depth)
    } else {
        let d = float_spectral(src, opts)?;
        shift_invariance_check(&src.sigma, &d.eigen, w, depth)
    };
    let inv = match inv {
        Ok(inv) => Invariance {
            status: "checked".into(),
            depth,
            preimage_sum: Some(inv.preimage_sum),
            relative_residual: Some(inv.relative),
            prefixes: inv.prefixes,
        },
        Err(
            e
            @ (MeasureError::WindowTooNarrowForDepth { .. } | MeasureError::BoundaryVertex { .. }),
        ) => Invariance {
            status: format!("skipped: {e}"),
            depth,
            preimage_sum: None,
            relative_residual: None,
            prefixes: Vec::new(),
        },
        Err(e) => return Err(e.into()),
    };
    doc.side_file("measure.csv", measure_csv(std::slice::from_ref(&r)));
    doc.section("measure", &r);
    doc.section("shift_invariance", &inv);
    Ok(exit::OK)
}

fn simulate(
    src: &Source,
    opts: &Options,
    w: &[Letter],
    doc: &mut Document,
) -> Result<u8, CliError> {
    let d = float_spectral(src, opts)?;
    let seed = birkhoff_seed(&src.sigma, opts.seed_letter, opts.orbit, w.len())?;
    let r = birkhoff_check(&src.sigma, &d.eigen, w, opts.orbit, &seed)?;
    #[derive(Serialize)]
    struct Section {
        word: String,
        seed_letter: Letter,
        seed_len: usize,
        orbit: usize,
        occurrences: u64,
        frequency: f64,
        predicted: f64,
        relative_error: f64,
    }
    doc.section(
        "simulation",
        &Section {
            word: fmt_word(w),
            seed_letter: opts.seed_letter,
            seed_len: seed.len(),
            orbit: r.orbit_len,
            occurrences: r.occurrences,
            frequency: r.frequency,
            predicted: r.predicted,
            relative_error: r.relative_error,
        },
    );
    Ok(exit::OK)
}

fn report(src: &Source, opts: &Options, doc: &mut Document) -> Result<u8, CliError> {
    let (_, code) = nsigma(src, opts, doc)?;
    let d = float_spectral(src, opts)?;
    doc.section("spectral", &spectral_section(src, &d));
    doc.side_file("eigenvectors.csv", eigen_csv(&d.eigen));
    let (v, o) = recurrence(
        src,
        &Options {
            window: None,
            ..opts.clone()
        },
        &d,
    )?;
    doc.section("recurrence", &recurrence_section(&v, &o));
    doc.section(
        "total_mass",
        &mass_section(&total_mass(&d.eigen, &[]).verdict),
    );

    let stride = src.sigma.alphabet().stride;
    let near = LetterInterval::symmetric(2 * stride);
    let lang = generate_language(&src.sigma, 2, LetterInterval::symmetric(10 * stride))?;
    let words: Vec<Word> = lang
        .iter()
        .filter(|w| !w.is_empty() && near.contains_word(w))
        .cloned()
        .collect();
    let mut rows = Vec::new();
    for w in &words {
        match measure_row(
            src,
            &Options {
                depth: None,
                ..opts.clone()
            },
            w,
            Some(&d),
        ) {
            Ok(r) => rows.push(r),
            Err(CliError::Core(e)) => rows.push(MeasureRow {
                word: fmt_word(w),
                estimate: f64::NAN,
                exact: None,
                tolerance: opts.tol,
                depth: 0,
                mode: String::new(),
                status: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    doc.side_file("measure.csv", measure_csv(&rows));
    #[derive(Serialize)]
    struct Measures {
        rows: Vec<MeasureRow>,
    }
    doc.section("measures", &Measures { rows });
    Ok(code)
}
