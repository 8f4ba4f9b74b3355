use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use prosody_core::aems::{
    aems as run_aems, calibrate_with, detect_zones, spectrum_shape, zscore, AemsParams, FrequencyZone,
    PolyFit, Spectrum, ZoneParams,
};
use prosody_core::annot::{
    default_pause_labels, durations, parse_csv_annotation, parse_textgrid_bytes, parse_value_csv,
    AnnotationDoc, DurationSequence,
};
use prosody_core::audio::{read_wav, synthesize_am, Waveform};
use prosody_core::contour::{
    estimate_f0_autocorr, fit_contour, segment_ipus, F0Params, F0Track, Ipu, IpuParams, PolyContourModel,
};
use prosody_core::fsm::{
    build_pierrehumbert, build_terracing, realize_pitch, synthesize_contour, transduce_tones,
    TerracingParams, ToneSequence,
};
use prosody_core::rhythm::{metric_report, quadrant_analysis};
use prosody_core::timetree::{induce_items, induce_spectral_hierarchy, Arity, Polarity, Relation, TreeParams};

use crate::{svg, CliError, Format, OutFile, Outcome};

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("result types serialize")
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn file(name: impl Into<String>, format: Format, content: String) -> OutFile {
    OutFile {
        name: name.into(),
        format,
        content,
    }
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

/// File stems of the inputs, suffixed with their position when two collide.
fn stems(paths: &[PathBuf]) -> Vec<String> {
    let raw: Vec<String> = paths
        .iter()
        .map(|p| {
            p.file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "input".into())
        })
        .collect();
    let mut seen: HashMap<&str, usize> = HashMap::new();
    for s in &raw {
        *seen.entry(s.as_str()).or_default() += 1;
    }
    raw.iter()
        .enumerate()
        .map(|(i, s)| if seen[s.as_str()] > 1 { format!("{s}-{}", i + 1) } else { s.clone() })
        .collect()
}

/// Run `f` over every input in parallel, keeping input order. Failures are
/// collected as messages instead of aborting the batch.
fn batch<R: Send>(
    paths: &[PathBuf],
    f: impl Fn(&Path, &str) -> Result<R, CliError> + Sync,
) -> (Vec<R>, Vec<String>) {
    let stems = stems(paths);
    let results: Vec<Result<R, CliError>> = paths
        .par_iter()
        .zip(stems.par_iter())
        .map(|(p, s)| f(p, s))
        .collect();
    let mut ok = Vec::new();
    let mut failed = Vec::new();
    for (r, p) in results.into_iter().zip(paths) {
        match r {
            Ok(v) => ok.push(v),
            Err(e) => failed.push(format!("{}: {e}", display(p))),
        }
    }
    (ok, failed)
}

fn read_audio(path: &Path) -> Result<Waveform, CliError> {
    read_wav(path).map_err(CliError::from)
}

// --- AEMS ------------------------------------------------------------------

#[derive(Debug, Args, Clone)]
pub struct AemsOptions {
    /// Upper edge of the reported spectrum (5, 20 and 1 Hz are the usual regimes).
    #[arg(long, default_value_t = 5.0)]
    pub cutoff_hz: f64,
    /// Peak-picking window.
    #[arg(long, default_value_t = 20.0)]
    pub window_ms: f64,
    /// Sampling rate of the envelope.
    #[arg(long, default_value_t = 100.0)]
    pub envelope_rate: f64,
    /// Moving-average smoothing window.
    #[arg(long, default_value_t = 50.0)]
    pub smoothing_ms: f64,
    /// Keep the envelope mean (DC) in the spectrum.
    #[arg(long)]
    pub keep_mean: bool,
}

impl AemsOptions {
    fn params(&self) -> AemsParams {
        AemsParams {
            peak_window_ms: self.window_ms,
            envelope_rate_hz: self.envelope_rate,
            smoothing_ms: self.smoothing_ms,
            cutoff_hz: self.cutoff_hz,
            zero_mean: !self.keep_mean,
        }
    }
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Spectrum cutoff; must exceed 10 Hz for the harmonic check.
    #[arg(long, default_value_t = 50.0)]
    pub cutoff_hz: f64,
}

pub fn calibrate(a: &CalibrateArgs) -> Result<Outcome, CliError> {
    if !(a.cutoff_hz > 10.0) {
        return Err(CliError::Usage(format!(
            "--cutoff-hz {} leaves the 10 Hz harmonic outside the spectrum",
            a.cutoff_hz
        )));
    }
    let params = AemsParams::with_cutoff(a.cutoff_hz);
    let report = calibrate_with(200.0, 5.0, 2.0, 16000, &params)?;
    let spec = run_aems(&synthesize_am(200.0, 5.0, 1.0, 2.0, 16000)?, &params)?;
    let shape = spectrum_shape(&spec, ZoneParams::default().degree).ok();
    let value = to_json(&report);
    let mut text = format!(
        "peak {} Hz (magnitude {:.4}), resolution {} Hz\n",
        report.peak_hz, report.peak_magnitude, report.resolution_hz
    );
    match (report.harmonic_hz, report.harmonic_magnitude) {
        (Some(h), Some(m)) => {
            let _ = writeln!(text, "harmonic {h} Hz (magnitude {m:.4})");
        }
        _ => text.push_str("harmonic not found\n"),
    }
    let _ = writeln!(text, "{}", if report.pass { "PASS" } else { "FAIL" });
    let files = vec![
        file("calibrate", Format::Json, pretty(&value)),
        file("calibrate", Format::Csv, spec.to_csv()),
        file(
            "calibrate",
            Format::Svg,
            svg::spectrum_plot(&spec, shape.as_ref(), &report.zones, "calibration: 200 Hz carrier, 5 Hz modulation"),
        ),
    ];
    let failures = if report.pass {
        Vec::new()
    } else {
        vec!["calibration check failed".into()]
    };
    Ok(Outcome {
        json: value,
        text,
        files,
        failures,
    })
}

#[derive(Debug, Args)]
pub struct AemsArgs {
    /// WAV files (mono or stereo PCM / float).
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub opts: AemsOptions,
    /// Zone prominence threshold as a fraction of the largest magnitude.
    #[arg(long, default_value_t = 0.1)]
    pub min_prominence: f64,
    /// Merge zones whose centres are closer than this.
    #[arg(long, default_value_t = 0.0)]
    pub min_separation_hz: f64,
    /// Degree of the spectrum shape polynomial.
    #[arg(long, default_value_t = 9)]
    pub degree: usize,
}

#[derive(Serialize)]
struct AemsResult {
    file: String,
    rate: u32,
    duration_s: f64,
    spectrum: Spectrum,
    shape: PolyFit,
    zones: Vec<FrequencyZone>,
}

fn z_row(spec: &Spectrum) -> Vec<f64> {
    zscore(&spec.magnitudes).unwrap_or_else(|_| vec![0.0; spec.len()])
}

pub fn aems(a: &AemsArgs) -> Result<Outcome, CliError> {
    let params = a.opts.params();
    let zp = ZoneParams {
        min_prominence: a.min_prominence,
        min_separation_hz: a.min_separation_hz,
        degree: a.degree,
    };
    let (results, failures) = batch(&a.inputs, |path, stem| {
        let wave = read_audio(path)?;
        let spectrum = run_aems(&wave, &params)?;
        let shape = spectrum_shape(&spectrum, zp.degree)?;
        let zones = detect_zones(&spectrum, &zp)?;
        let r = AemsResult {
            file: display(path),
            rate: wave.rate(),
            duration_s: wave.duration_s(),
            spectrum,
            shape,
            zones,
        };
        Ok((stem.to_string(), r))
    });

    let mut files = Vec::new();
    let mut text = String::new();
    for (stem, r) in &results {
        let value = to_json(r);
        let name = format!("{stem}.aems");
        files.push(file(&name, Format::Json, pretty(&value)));
        files.push(file(&name, Format::Csv, r.spectrum.to_csv()));
        files.push(file(
            &name,
            Format::Svg,
            svg::spectrum_plot(&r.spectrum, Some(&r.shape), &r.zones, &format!("AEMS {stem}")),
        ));
        files.push(file(
            format!("{stem}.aems-heatmap"),
            Format::Svg,
            svg::heatmap(&[(stem.clone(), z_row(&r.spectrum))], &r.spectrum.freqs(), &format!("AEMS {stem}")),
        ));
        let peak = r.spectrum.argmax().map(|k| r.spectrum.freq(k)).unwrap_or(0.0);
        let zones: Vec<String> = r.zones.iter().map(|z| format!("{} Hz", z.center_hz)).collect();
        let _ = writeln!(
            text,
            "{}: resolution {} Hz, peak {} Hz, zones [{}]",
            r.file,
            r.spectrum.resolution_hz,
            peak,
            zones.join(", ")
        );
    }
    if results.len() > 1 {
        let rows: Vec<(String, Vec<f64>)> = results.iter().map(|(s, r)| (s.clone(), z_row(&r.spectrum))).collect();
        let widest = results
            .iter()
            .map(|(_, r)| &r.spectrum)
            .max_by_key(|s| s.len())
            .expect("non-empty");
        files.push(file("aems-heatmap", Format::Svg, svg::heatmap(&rows, &widest.freqs(), "AEMS")));
    }
    let value = json!({ "files": results.iter().map(|(_, r)| to_json(r)).collect::<Vec<_>>() });
    Ok(Outcome {
        json: value,
        text,
        files,
        failures,
    })
}

// --- durations ---------------------------------------------------------------

#[derive(Debug, Args, Clone)]
pub struct TierOptions {
    /// Tier to read; optional when the annotation has a single tier.
    #[arg(long)]
    pub tier: Option<String>,
    /// Keep pause intervals instead of dropping them.
    #[arg(long)]
    pub keep_pauses: bool,
    /// Pause label (repeatable); replaces the default set "", sil, #, <p>.
    #[arg(long = "pause-label")]
    pub pause_labels: Vec<String>,
}

impl TierOptions {
    fn pauses(&self) -> BTreeSet<String> {
        if self.keep_pauses {
            BTreeSet::new()
        } else if self.pause_labels.is_empty() {
            default_pause_labels()
        } else {
            self.pause_labels.iter().map(|s| s.trim().to_string()).collect()
        }
    }
}

/// Labelled values from a TextGrid, an annotation CSV or a `label,value` CSV.
/// Returns the tier used (if any) and the items.
fn load_items(path: &Path, opts: &TierOptions) -> Result<(Option<String>, Vec<(String, f64)>), CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let fail = |e: prosody_core::Error| CliError::Analysis(format!("{}: {e}", display(path)));
    let utf16 = bytes.starts_with(&[0xff, 0xfe]) || bytes.starts_with(&[0xfe, 0xff]);
    let text = if utf16 { String::new() } else { String::from_utf8_lossy(&bytes).into_owned() };
    let first = text
        .trim_start_matches('\u{feff}')
        .lines()
        .find(|l| !l.trim().is_empty())
        .unwrap_or("")
        .replace(' ', "");
    if first == "label,value" {
        if opts.tier.is_some() {
            return Err(CliError::Usage("--tier does not apply to a label,value table".into()));
        }
        return Ok((None, parse_value_csv(&text).map_err(fail)?));
    }
    let doc: AnnotationDoc = if utf16 || text.contains("ooTextFile") {
        parse_textgrid_bytes(&bytes).map_err(fail)?
    } else if first == "tier,label,start_s,end_s" {
        parse_csv_annotation(&text).map_err(fail)?
    } else {
        return Err(CliError::Analysis(format!(
            "{}: not a TextGrid, annotation CSV (tier,label,start_s,end_s) or label,value table",
            display(path)
        )));
    };
    for w in &doc.warnings {
        eprintln!("warning: {}: {w}", display(path));
    }
    let names: Vec<&str> = doc.tiers.iter().map(|t| t.name.as_str()).collect();
    let tier = match &opts.tier {
        Some(name) => doc.tier(name).ok_or_else(|| {
            CliError::Usage(format!("no tier `{name}` in {} (tiers: {})", display(path), names.join(", ")))
        })?,
        None if doc.tiers.len() == 1 => &doc.tiers[0],
        None => {
            return Err(CliError::Usage(format!(
                "{} has {} tiers; choose one with --tier ({})",
                display(path),
                doc.tiers.len(),
                names.join(", ")
            )))
        }
    };
    Ok((Some(tier.name.clone()), durations(tier, &opts.pauses()).items))
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// TextGrid, annotation CSV or label,value CSV.
    pub input: PathBuf,
    #[command(flatten)]
    pub tier: TierOptions,
}

pub fn metrics(a: &MetricsArgs) -> Result<Outcome, CliError> {
    let (tier, items) = load_items(&a.input, &a.tier)?;
    let seq = DurationSequence::new(items)?;
    let xs = seq.values();
    let report = metric_report(&xs)?;
    let (quadrants, note) = match quadrant_analysis(&xs) {
        Ok(q) => (Some(q), None),
        Err(prosody_core::Error::Degenerate(m)) => (None, Some(m)),
        Err(e) => return Err(e.into()),
    };
    let value = json!({
        "file": display(&a.input),
        "tier": tier,
        "metrics": to_json(&report),
        "quadrants": quadrants.as_ref().map(to_json),
        "quadrant_note": note,
    });
    let mut text = format!(
        "n {}\nvariance {}\npim {}\npfd {}\nrpvi {}\nnpvi {}\n",
        report.n, report.variance, report.pim, report.pfd, report.rpvi, report.npvi
    );
    match &quadrants {
        Some(q) => {
            let c = &q.counts;
            let _ = writeln!(
                text,
                "quadrants LL {} SS {} LS {} SL {} origin {}, index {}",
                c.ll,
                c.ss,
                c.ls,
                c.sl,
                c.origin,
                q.index.map_or("undefined".to_string(), |v| v.to_string())
            );
        }
        None => {
            let _ = writeln!(text, "quadrants unavailable: {}", note.as_deref().unwrap_or(""));
        }
    }
    let stem = format!("{}.metrics", stems(std::slice::from_ref(&a.input))[0]);
    let mut files = vec![file(&stem, Format::Json, pretty(&value))];
    if let Some(q) = &quadrants {
        files.push(file(&stem, Format::Csv, q.to_csv()));
        files.push(file(&stem, Format::Svg, svg::quadrant_plot(q, "successive duration pairs (z-scores)")));
    }
    Ok(Outcome {
        json: value,
        text,
        files,
        failures: Vec::new(),
    })
}

// --- trees -------------------------------------------------------------------

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RelationArg {
    Iambic,
    Trochaic,
}

impl From<RelationArg> for Relation {
    fn from(r: RelationArg) -> Self {
        match r {
            RelationArg::Iambic => Relation::Iambic,
            RelationArg::Trochaic => Relation::Trochaic,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PolarityArg {
    /// Larger values are strong.
    #[value(alias = "higher-is-stronger")]
    Higher,
    /// Smaller values are strong.
    #[value(alias = "lower-is-stronger")]
    Lower,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Higher => Polarity::HigherIsStronger,
            PolarityArg::Lower => Polarity::LowerIsStronger,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ArityArg {
    Binary,
    Nary,
}

impl From<ArityArg> for Arity {
    fn from(a: ArityArg) -> Self {
        match a {
            ArityArg::Binary => Arity::Binary,
            ArityArg::Nary => Arity::Nary,
        }
    }
}

#[derive(Debug, Args)]
pub struct TimetreeArgs {
    /// TextGrid, annotation CSV or label,value CSV.
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub relation: RelationArg,
    #[arg(long, value_enum)]
    pub polarity: PolarityArg,
    #[arg(long, value_enum, default_value = "binary")]
    pub arity: ArityArg,
    #[command(flatten)]
    pub tier: TierOptions,
}

pub fn timetree(a: &TimetreeArgs) -> Result<Outcome, CliError> {
    let (tier, items) = load_items(&a.input, &a.tier)?;
    let params = TreeParams {
        relation: a.relation.into(),
        polarity: a.polarity.into(),
        arity: a.arity.into(),
    };
    let ind = induce_items(&items, &params)?;
    let sexpr = ind.tree.to_sexpr();
    let value = json!({
        "file": display(&a.input),
        "tier": tier,
        "params": to_json(&params),
        "passes": ind.passes,
        "sexpr": sexpr,
        "tree": to_json(&ind.tree.to_json_tree()),
    });
    let stem = format!("{}.timetree", stems(std::slice::from_ref(&a.input))[0]);
    let files = vec![
        file(&stem, Format::Json, pretty(&value)),
        file(&stem, Format::Svg, svg::tree_plot(&ind.tree, "time tree")),
    ];
    Ok(Outcome {
        json: value,
        text: format!("{sexpr}\n"),
        files,
        failures: Vec::new(),
    })
}

#[derive(Debug, Args)]
pub struct SpectreeArgs {
    /// WAV files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[command(flatten)]
    pub opts: AemsOptions,
    #[arg(long, value_enum, default_value = "trochaic")]
    pub relation: RelationArg,
    #[arg(long, value_enum, default_value = "binary")]
    pub arity: ArityArg,
}

pub fn spectree(a: &SpectreeArgs) -> Result<Outcome, CliError> {
    let params = a.opts.params();
    let relation: Relation = a.relation.into();
    let arity: Arity = a.arity.into();
    let (results, failures) = batch(&a.inputs, |path, stem| {
        let spec = run_aems(&read_audio(path)?, &params)?;
        let tree = induce_spectral_hierarchy(&spec, relation, arity)?;
        let value = json!({
            "file": display(path),
            "cutoff_hz": spec.cutoff_hz,
            "resolution_hz": spec.resolution_hz,
            "relation": to_json(&relation),
            "arity": to_json(&arity),
            "sexpr": tree.to_sexpr(),
            "tree": to_json(&tree.to_json_tree()),
        });
        Ok((stem.to_string(), tree, value))
    });
    let mut files = Vec::new();
    let mut text = String::new();
    for (stem, tree, value) in &results {
        let name = format!("{stem}.spectree");
        files.push(file(&name, Format::Json, pretty(value)));
        files.push(file(&name, Format::Svg, svg::tree_plot(tree, &format!("spectral hierarchy {stem}"))));
        let _ = writeln!(text, "{}: {}", value["file"].as_str().unwrap_or(""), tree.to_sexpr());
    }
    let value = json!({ "files": results.iter().map(|r| r.2.clone()).collect::<Vec<_>>() });
    Ok(Outcome {
        json: value,
        text,
        files,
        failures,
    })
}

// --- tones -------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct ToneGenArgs {
    /// Lexical tones, e.g. HLHLH or "H L H".
    pub tones: String,
    /// Duration of each tone in the synthesized contour.
    #[arg(long, default_value_t = 150.0)]
    pub tone_ms: f64,
    #[arg(long, default_value_t = 170.0)]
    pub p_h0: f64,
    #[arg(long, default_value_t = 110.0)]
    pub p_l0: f64,
    #[arg(long, default_value_t = 1.02)]
    pub k_usw: f64,
    #[arg(long, default_value_t = 0.98)]
    pub k_dd: f64,
    #[arg(long, default_value_t = 0.70)]
    pub k_dst: f64,
    #[arg(long, default_value_t = 0.90)]
    pub k_ter: f64,
    #[arg(long, default_value_t = 60.0)]
    pub floor_hz: f64,
    #[arg(long, default_value_t = 400.0)]
    pub ceiling_hz: f64,
}

pub fn tone_gen(a: &ToneGenArgs) -> Result<Outcome, CliError> {
    let lexical: ToneSequence = a
        .tones
        .parse()
        .map_err(|e: prosody_core::Error| CliError::Usage(format!("tone string `{}`: {e}", a.tones)))?;
    if lexical.0.is_empty() {
        return Err(CliError::Usage("tone string is empty".into()));
    }
    let params = TerracingParams {
        p_h0: a.p_h0,
        p_l0: a.p_l0,
        k_usw: a.k_usw,
        k_dd: a.k_dd,
        k_dst: a.k_dst,
        k_ter: a.k_ter,
        floor_hz: a.floor_hz,
        ceiling_hz: a.ceiling_hz,
    };
    params.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let phonetic = transduce_tones(&lexical);
    let targets = realize_pitch(&phonetic, &params)?;
    let contour = synthesize_contour(&targets, a.tone_ms)?;
    let value = json!({
        "lexical": lexical.to_string(),
        "phonetic": phonetic.iter().map(|p| p.as_str()).collect::<Vec<_>>(),
        "targets": to_json(&targets),
        "params": to_json(&params),
        "tone_ms": a.tone_ms,
        "contour": to_json(&contour),
    });
    let mut text = String::new();
    for t in &targets {
        let _ = writeln!(text, "{}\t{:.3}", t.label.as_str(), t.target_hz);
    }
    let trend = fit_contour(&contour, 1, None).ok();
    let files = vec![
        file("tone-gen", Format::Json, pretty(&value)),
        file("tone-gen", Format::Csv, contour.to_csv()),
        file(
            "tone-gen",
            Format::Svg,
            svg::f0_plot(&contour, trend.as_slice(), &format!("terracing {lexical}")),
        ),
    ];
    Ok(Outcome {
        json: value,
        text,
        files,
        failures: Vec::new(),
    })
}

#[derive(Debug, Subcommand)]
pub enum IntonationCommand {
    /// Whether a tone string is accepted by the intonation grammar.
    Check {
        /// Symbols, e.g. %H H* L- L% (a single quoted string also works).
        #[arg(required = true, allow_hyphen_values = true)]
        symbols: Vec<String>,
    },
    /// All accepted strings up to a length.
    Enum {
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
    /// Print a bundled machine as JSON.
    Machine {
        #[arg(value_enum, default_value = "pierrehumbert")]
        which: MachineArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MachineArg {
    Pierrehumbert,
    Terracing,
}

pub fn intonation(c: &IntonationCommand) -> Result<Outcome, CliError> {
    match c {
        IntonationCommand::Check { symbols } => {
            let symbols: Vec<&str> = symbols.iter().flat_map(|s| s.split_whitespace()).collect();
            let accepted = build_pierrehumbert().recognize(&symbols, 0)?;
            let value = json!({ "input": symbols, "accepted": accepted });
            Ok(Outcome {
                text: format!("{}\n", if accepted { "accepted" } else { "rejected" }),
                files: vec![file("intonation-check", Format::Json, pretty(&value))],
                json: value,
                failures: Vec::new(),
            })
        }
        IntonationCommand::Enum { max_len } => {
            if *max_len > 8 {
                return Err(CliError::Usage(format!("--max-len {max_len} is too large (at most 8)")));
            }
            let strings: Vec<String> = build_pierrehumbert()
                .enumerate_strings(*max_len, 0)
                .into_iter()
                .map(|s| s.join(" "))
                .collect();
            let value = json!({ "max_len": max_len, "count": strings.len(), "strings": strings });
            let mut text = String::new();
            for s in &strings {
                let _ = writeln!(text, "{s}");
            }
            Ok(Outcome {
                text,
                files: vec![file("intonation-enum", Format::Json, pretty(&value))],
                json: value,
                failures: Vec::new(),
            })
        }
        IntonationCommand::Machine { which } => {
            let (name, fsm) = match which {
                MachineArg::Pierrehumbert => ("pierrehumbert", build_pierrehumbert()),
                MachineArg::Terracing => ("terracing", build_terracing()),
            };
            let value = to_json(&fsm);
            Ok(Outcome {
                text: pretty(&value),
                files: vec![file(format!("{name}.fsm"), Format::Json, pretty(&value))],
                json: value,
                failures: Vec::new(),
            })
        }
    }
}

// --- F0 ----------------------------------------------------------------------

#[derive(Debug, Args)]
pub struct F0Args {
    /// WAV files.
    #[arg(required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 60.0)]
    pub fmin: f64,
    #[arg(long, default_value_t = 500.0)]
    pub fmax: f64,
    #[arg(long, default_value_t = 40.0)]
    pub frame_ms: f64,
    #[arg(long, default_value_t = 10.0)]
    pub hop_ms: f64,
    /// Minimum normalized autocorrelation for a voiced frame.
    #[arg(long, default_value_t = 0.3)]
    pub voicing: f64,
    /// Silence threshold relative to the loudest frame.
    #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
    pub silence_db: f64,
    #[arg(long, default_value_t = 200.0)]
    pub min_pause_ms: f64,
    #[arg(long, default_value_t = 100.0)]
    pub min_ipu_ms: f64,
}

pub fn f0(a: &F0Args) -> Result<Outcome, CliError> {
    let params = F0Params {
        fmin_hz: a.fmin,
        fmax_hz: a.fmax,
        frame_ms: a.frame_ms,
        hop_ms: a.hop_ms,
        voicing_ratio: a.voicing,
    };
    let ipu_params = IpuParams {
        silence_db: a.silence_db,
        min_pause_ms: a.min_pause_ms,
        min_ipu_ms: a.min_ipu_ms,
    };
    let (results, failures) = batch(&a.inputs, |path, stem| {
        let wave = read_audio(path)?;
        let track = estimate_f0_autocorr(&wave, &params)?;
        let ipus = segment_ipus(&wave, &ipu_params);
        let value = json!({
            "file": display(path),
            "frames": track.frames().len(),
            "voiced": track.voiced_count(),
            "median_f0_hz": track.median_f0(),
            "ipus": to_json(&ipus),
            "track": to_json(&track),
        });
        Ok((stem.to_string(), track, value))
    });
    let mut files = Vec::new();
    let mut text = String::new();
    for (stem, track, value) in &results {
        let name = format!("{stem}.f0");
        files.push(file(&name, Format::Json, pretty(value)));
        files.push(file(&name, Format::Csv, track.to_csv()));
        files.push(file(&name, Format::Svg, svg::f0_plot(track, &[], &format!("F0 {stem}"))));
        let _ = writeln!(
            text,
            "{}: {} frames, {} voiced, median {}, {} IPUs",
            value["file"].as_str().unwrap_or(""),
            track.frames().len(),
            track.voiced_count(),
            track.median_f0().map_or("-".to_string(), |m| format!("{m:.2} Hz")),
            value["ipus"].as_array().map_or(0, |v| v.len())
        );
    }
    let value = json!({ "files": results.iter().map(|r| r.2.clone()).collect::<Vec<_>>() });
    Ok(Outcome {
        json: value,
        text,
        files,
        failures,
    })
}

#[derive(Debug, Args)]
pub struct ContourFitArgs {
    /// F0 track CSV with header time_s,f0_hz (empty f0 = unvoiced).
    pub input: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub degree: usize,
    /// Fit only inside START:END seconds (repeatable, one model each).
    #[arg(long = "domain", value_name = "START:END")]
    pub domains: Vec<String>,
    /// Fit one model per inter-pausal unit of this recording.
    #[arg(long, value_name = "WAV", conflicts_with = "domains")]
    pub ipus_from: Option<PathBuf>,
}

fn parse_domain(s: &str) -> Result<Ipu, CliError> {
    let bad = || CliError::Usage(format!("--domain `{s}` must be START:END in seconds with END > START"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let a: f64 = a.trim().parse().map_err(|_| bad())?;
    let b: f64 = b.trim().parse().map_err(|_| bad())?;
    Ipu::new(a, b).map_err(|_| bad())
}

#[derive(Serialize)]
struct ModelJson<'a> {
    degree: usize,
    coeffs: &'a [f64],
    domain: &'a prosody_core::contour::ContourDomain,
    rmse: f64,
    voiced_frame_count: usize,
}

pub fn contour_fit(a: &ContourFitArgs) -> Result<Outcome, CliError> {
    let text_in = std::fs::read_to_string(&a.input).map_err(|e| CliError::io(&a.input, e))?;
    let track = F0Track::from_csv(&text_in).map_err(|e| CliError::Analysis(format!("{}: {e}", display(&a.input))))?;
    let domains: Vec<Option<Ipu>> = if let Some(wav) = &a.ipus_from {
        let ipus = segment_ipus(&read_audio(wav)?, &IpuParams::default());
        if ipus.is_empty() {
            return Err(CliError::Analysis(format!("{}: no inter-pausal units found", display(wav))));
        }
        ipus.into_iter().map(Some).collect()
    } else if a.domains.is_empty() {
        vec![None]
    } else {
        a.domains.iter().map(|d| parse_domain(d).map(Some)).collect::<Result<_, _>>()?
    };
    let models: Vec<PolyContourModel> = domains
        .par_iter()
        .map(|d| fit_contour(&track, a.degree, *d))
        .collect::<Result<_, _>>()?;
    let model_json: Vec<Value> = models
        .iter()
        .map(|m| {
            to_json(&ModelJson {
                degree: m.fit.degree,
                coeffs: &m.fit.coeffs,
                domain: &m.domain,
                rmse: m.fit.rmse,
                voiced_frame_count: m.voiced_frame_count,
            })
        })
        .collect();
    let value = json!({
        "file": display(&a.input),
        "degree": a.degree,
        "models": model_json,
    });
    let mut text = String::new();
    for m in &models {
        let dom = match m.domain {
            prosody_core::contour::ContourDomain::WholeTrack => "whole track".to_string(),
            prosody_core::contour::ContourDomain::Ipu { start_s, end_s } => format!("{start_s}-{end_s} s"),
        };
        let coeffs: Vec<String> = m.fit.coeffs.iter().map(|c| format!("{c:.6}")).collect();
        let _ = writeln!(
            text,
            "{dom}: {} voiced frames, rmse {:.4} Hz, coeffs [{}]",
            m.voiced_frame_count,
            m.fit.rmse,
            coeffs.join(", ")
        );
    }
    let stem = format!("{}.contour", stems(std::slice::from_ref(&a.input))[0]);
    let files = vec![
        file(&stem, Format::Json, pretty(&value)),
        file(&stem, Format::Svg, svg::f0_plot(&track, &models, "F0 contour model")),
    ];
    Ok(Outcome {
        json: value,
        text,
        files,
        failures: Vec::new(),
    })
}
