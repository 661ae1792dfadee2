//! `modframe gen|analyze|optimize|verify`.
//!
//! Exit codes: 0 success, 1 a bound or invariant failed (a bug canary for
//! bounds, which hold unconditionally), 2 usage or precondition error,
//! 3 I/O or format error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::algebra::{AlgebraElement, Spectrum, DEFAULT_POSITIVITY_TOL};
use crate::bounds::{generalized_welch_check, verify_frame, BoundReport, GeneralizedCheck};
use crate::construct;
use crate::error::Error;
use crate::io::{to_pretty_json, trajectory_csv, write_text, FrameFile, Metadata, SearchResultFile, FORMAT_VERSION};
use crate::module::{
    frame_potential, gram_table, is_equiangular, is_frame, is_tight, mrms, Equiangularity, Frame, FrameBounds,
    Tightness, UNIT_TOL,
};
use crate::optimize::{certify_equality, grassmannian_search, sic_search, Certification, SearchConfig, CERTIFY_TOL};
use crate::rng::SeededRng;
use crate::symtensor::{sym_spectrum_check, SymSpectrumReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_FORMAT: i32 = 3;

/// Tolerance for predicate flags in reports.
const REPORT_TOL: f64 = 1e-9;
/// Largest allowed `|<tau_j,tau_k> - <tau_k,tau_j>^*|` in `verify`.
const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Parser)]
#[command(name = "modframe", version, about = "Frames and Welch bounds over C^K-valued Hilbert modules")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a frame file.
    Gen(GenArgs),
    /// Check a frame against every bound and print a report.
    Analyze(AnalyzeArgs),
    /// Search for a low-coherence frame.
    Optimize(OptimizeArgs),
    /// Validate a frame file.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Random,
    Onb,
    Mercedes,
    SicD2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, clap::Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = Kind::Random, value_enum)]
    pub kind: Kind,
    /// Number of spectrum points K.
    #[arg(long, default_value_t = 1)]
    pub spectrum: usize,
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub max_order: u32,
    #[arg(long, default_value_t = Format::Json, value_enum)]
    pub format: Format,
    /// Also check the eigenvalues of the symmetric-power frame operators.
    #[arg(long)]
    pub sym_check: bool,
    /// Accept frames without unit inner products; only the generalized bound runs.
    #[arg(long)]
    pub allow_nonunit: bool,
}

#[derive(Debug, clap::Args)]
pub struct OptimizeArgs {
    #[arg(long, default_value_t = 1)]
    pub spectrum: usize,
    #[arg(long)]
    pub dim: usize,
    /// Number of vectors; defaults to dim^2 with --sic.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long, default_value_t = 10)]
    pub restarts: usize,
    #[arg(long, default_value_t = 5000)]
    pub iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Equiangular search for dim^2 vectors at 1/(dim+1).
    #[arg(long)]
    pub sic: bool,
    /// Squared-coherence target.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Result JSON path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the best frame as a frame file.
    #[arg(long)]
    pub frame_out: Option<PathBuf>,
    /// Write per-iteration coherence as CSV.
    #[arg(long)]
    pub trajectory: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct VerifyArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_USAGE;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(&a, out),
        Command::Analyze(a) => cmd_analyze(&a, out),
        Command::Optimize(a) => cmd_optimize(&a, out),
        Command::Verify(a) => cmd_verify(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "modframe: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Format(_) => EXIT_FORMAT,
        _ => EXIT_USAGE,
    }
}

fn usage(msg: String) -> Error {
    Error::Config(msg)
}

fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => write_text(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| Error::Io(e.to_string())),
    }
}

fn shape_for(kind: Kind, dim: Option<usize>, count: Option<usize>) -> Result<(usize, usize), Error> {
    let fixed = |d0: usize, n0: usize, name: &str| {
        if dim.is_some_and(|d| d != d0) || count.is_some_and(|n| n != n0) {
            Err(usage(format!("--kind {name} requires --dim {d0} --count {n0}")))
        } else {
            Ok((d0, n0))
        }
    };
    match kind {
        Kind::Random => match (dim, count) {
            (Some(d), Some(n)) if d >= 1 && n >= 1 => Ok((d, n)),
            (Some(_), Some(_)) => Err(usage("--dim and --count must be at least 1".into())),
            _ => Err(usage("--kind random needs --dim and --count".into())),
        },
        Kind::Onb => {
            let d = dim.or(count).ok_or_else(|| usage("--kind onb needs --dim".into()))?;
            if d == 0 || count.is_some_and(|n| n != d) {
                return Err(usage("--kind onb requires --count equal to --dim >= 1".into()));
            }
            Ok((d, d))
        }
        Kind::Mercedes => fixed(2, 3, "mercedes"),
        Kind::SicD2 => fixed(2, 4, "sic-d2"),
    }
}

pub fn cmd_gen(a: &GenArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let (d, n) = shape_for(a.kind, a.dim, a.count)?;
    let sp = Spectrum::new(a.spectrum).map_err(|_| usage("--spectrum must be at least 1".into()))?;
    let (frame, seed, name) = match a.kind {
        Kind::Random => (construct::random_unit_frame(&mut SeededRng::new(a.seed), sp, d, n)?, Some(a.seed), "random"),
        Kind::Onb => (construct::orthonormal_basis(sp, d), None, "onb"),
        Kind::Mercedes => (construct::mercedes_benz(sp), None, "mercedes"),
        Kind::SicD2 => {
            let f = construct::sic_d2(sp);
            let e = is_equiangular(&f, 1e-12)?;
            if !e.equiangular || e.gamma.max_abs_diff(&AlgebraElement::real_constant(sp, 1.0 / 3.0))? > 1e-12 {
                return Ok(EXIT_VIOLATION);
            }
            (f, None, "sic-d2")
        }
    };
    let meta = Metadata { seed, provenance: Some(format!("modframe gen --kind {name}")), labels: None };
    emit(out, a.out.as_ref(), &FrameFile::from_frame(&frame, Some(meta)).to_json())?;
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
pub struct PotentialSummary {
    pub value: AlgebraElement,
    pub norm: f64,
    /// `n^2 / d`
    pub lower: f64,
    /// `(n^2/d) 1 <= MFP` and `||MFP|| <= n^2`.
    pub holds: bool,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub version: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub bounds: BoundReport,
    pub frame_potential: PotentialSummary,
    pub mrms: AlgebraElement,
    pub frame_bounds: FrameBounds,
    pub tightness: Tightness,
    pub equiangularity: Equiangularity,
    pub certification: Certification,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sym_check: Option<Vec<SymSpectrumReport>>,
    pub violations: usize,
}

#[derive(Debug, Serialize)]
pub struct NonUnitReport {
    pub version: String,
    #[serde(rename = "K")]
    pub k: usize,
    pub d: usize,
    pub n: usize,
    pub unit: bool,
    pub generalized: Vec<GeneralizedCheck>,
    pub violations: usize,
}

fn potential_summary(f: &Frame) -> Result<PotentialSummary, Error> {
    let value = frame_potential(f);
    let (n, d) = (f.n() as f64, f.dim() as f64);
    let lower = n * n / d;
    let norm = value.norm();
    let lower_el = AlgebraElement::real_constant(f.spectrum(), lower);
    let holds = lower_el.leq(&value, REPORT_TOL * lower.max(1.0))? && norm <= n * n + REPORT_TOL;
    Ok(PotentialSummary { value, norm, lower, holds })
}

pub fn analyze_frame(f: &Frame, max_order: u32, sym_check: bool) -> Result<AnalyzeReport, Error> {
    if max_order == 0 {
        return Err(usage("--max-order must be at least 1".into()));
    }
    let bounds = verify_frame(f, max_order)?;
    let frame_potential = potential_summary(f)?;
    let certification = certify_equality(f, CERTIFY_TOL)?;
    let sym = if sym_check {
        Some((1..=max_order).map(|m| sym_spectrum_check(f, m)).collect::<Result<Vec<_>, _>>()?)
    } else {
        None
    };
    let violations = bounds.violations()
        + usize::from(!frame_potential.holds)
        + usize::from(!certification.implication_holds)
        + sym.as_ref().map_or(0, |v| v.iter().filter(|r| !r.inequality_holds).count());
    Ok(AnalyzeReport {
        version: FORMAT_VERSION.to_string(),
        k: f.spectrum().size(),
        d: f.dim(),
        n: f.n(),
        bounds,
        frame_potential,
        mrms: mrms(f)?,
        frame_bounds: is_frame(f, REPORT_TOL)?,
        tightness: is_tight(f, REPORT_TOL),
        equiangularity: is_equiangular(f, REPORT_TOL)?,
        certification,
        sym_check: sym,
        violations,
    })
}

fn fmt_el(a: &AlgebraElement) -> String {
    let parts: Vec<String> = a
        .values()
        .iter()
        .map(|z| if z.im == 0.0 { format!("{:.12}", z.re) } else { format!("{:.12}{:+.3e}i", z.re, z.im) })
        .collect();
    format!("[{}]", parts.join(", "))
}

fn text_report(r: &AnalyzeReport) -> String {
    let b = &r.bounds;
    let mut s = format!("frame: K={} d={} n={}\n", r.k, r.d, r.n);
    s +=
        &format!("coherence: {:.12} (coherence^2 {:.12}) at {:?}\n", b.coherence, b.coherence * b.coherence, b.witness);
    for o in &b.orders {
        s += &format!(
            "order {}: max |<tj,tk>|^{} = {:.12} >= {:.12}  {}{}{}\n",
            o.m,
            2 * o.m,
            o.max_lhs,
            o.max_bound,
            if o.holds { "holds" } else { "VIOLATED" },
            if o.equality { ", equality" } else { "" },
            if o.vacuous { ", vacuous" } else { "" },
        );
    }
    for c in &b.sums {
        s += &format!(
            "order {} sum: {:.12} >= {:.12}  {}{}, middle in [{:.12}, {:.12}] {}\n",
            c.m,
            c.sum_lhs,
            c.sum_bound,
            if c.holds { "holds" } else { "VIOLATED" },
            if c.equality { ", equality" } else { "" },
            c.middle_min,
            c.middle_max,
            if c.middle_holds { "holds" } else { "VIOLATED" },
        );
    }
    let p = &r.frame_potential;
    s += &format!(
        "frame potential: {} (norm {:.12}, lower {:.12}) {}\n",
        fmt_el(&p.value),
        p.norm,
        p.lower,
        if p.holds { "holds" } else { "VIOLATED" }
    );
    s += &format!("mrms: {}\n", fmt_el(&r.mrms));
    s += &format!("frame bounds: [{:.12}, {:.12}]\n", r.frame_bounds.lower, r.frame_bounds.upper);
    s +=
        &format!("tight: {} (bound {:.12}, parseval {})\n", r.tightness.tight, r.tightness.bound, r.tightness.parseval);
    s += &format!("equiangular: {} (gamma {})\n", r.equiangularity.equiangular, fmt_el(&r.equiangularity.gamma));
    let c = &r.certification;
    s += &format!(
        "certification: gamma^2 {:.12}, equality {}, gamma-equiangular {}, implication {}\n",
        c.gamma_squared,
        c.equality,
        c.gamma_equiangular,
        if c.implication_holds { "holds" } else { "VIOLATED" }
    );
    if let Some(sym) = &r.sym_check {
        for m in sym {
            s += &format!(
                "sym order {}: rank {}, eigenvalue inequality {}\n",
                m.m,
                m.rank,
                if m.inequality_holds { "holds" } else { "VIOLATED" }
            );
        }
    }
    let cmp = &b.comparators;
    s += &format!("gerzon: {}\n", cmp.gerzon);
    s += &format!("violations: {}\n", r.violations);
    s
}

pub fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let f = FrameFile::read(&a.input)?.to_frame()?;
    if a.max_order == 0 {
        return Err(usage("--max-order must be at least 1".into()));
    }
    let unit = f.is_unit(UNIT_TOL);
    if !unit {
        if !a.allow_nonunit {
            f.check_unit(UNIT_TOL)?;
        }
        let generalized = (1..=a.max_order)
            .map(|m| generalized_welch_check(&f, m, f.n() >= 2, REPORT_TOL))
            .collect::<Result<Vec<_>, _>>()?;
        let violations = generalized.iter().filter(|g| !g.holds || g.max_form.is_some_and(|x| !x.holds)).count();
        let report = NonUnitReport {
            version: FORMAT_VERSION.to_string(),
            k: f.spectrum().size(),
            d: f.dim(),
            n: f.n(),
            unit,
            generalized,
            violations,
        };
        let text = match a.format {
            Format::Json => to_pretty_json(&report),
            Format::Text => {
                let mut s = format!("frame: K={} d={} n={} (not unit)\n", report.k, report.d, report.n);
                for g in &report.generalized {
                    s += &format!("generalized order {}: {}\n", g.m, if g.holds { "holds" } else { "VIOLATED" });
                }
                s + &format!("violations: {}\n", report.violations)
            }
        };
        emit(out, None, &text)?;
        return Ok(if violations == 0 { EXIT_OK } else { EXIT_VIOLATION });
    }
    if f.n() < 2 {
        return Err(usage("analysis needs at least two vectors".into()));
    }
    let report = analyze_frame(&f, a.max_order, a.sym_check)?;
    let text = match a.format {
        Format::Json => to_pretty_json(&report),
        Format::Text => text_report(&report),
    };
    emit(out, None, &text)?;
    Ok(if report.violations == 0 { EXIT_OK } else { EXIT_VIOLATION })
}

pub fn cmd_optimize(a: &OptimizeArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let n = match (a.count, a.sic) {
        (Some(n), _) => n,
        (None, true) => a.dim * a.dim,
        (None, false) => return Err(usage("--count is required without --sic".into())),
    };
    let mut cfg = SearchConfig::new(a.spectrum, a.dim, n);
    cfg.restarts = a.restarts;
    cfg.max_iters = a.iters;
    cfg.seed = a.seed;
    cfg.target = a.target;
    if let Some(t) = a.tolerance {
        cfg.tolerance = t;
    }
    let r = if a.sic { sic_search(&cfg)? } else { grassmannian_search(&cfg)? };
    let meta = Metadata {
        seed: Some(a.seed),
        provenance: Some(format!("modframe optimize{}", if a.sic { " --sic" } else { "" })),
        labels: None,
    };
    if let Some(p) = &a.frame_out {
        FrameFile::from_frame(&r.best_frame, Some(meta.clone())).write(p)?;
    }
    if let Some(p) = &a.trajectory {
        write_text(p, &trajectory_csv(&r))?;
    }
    let json = to_pretty_json(&SearchResultFile::new(&r, Some(meta)));
    let summary = format!(
        "coherence^2 {:.12} bound {:.12} target {:.12} attained {} restart {}{}\n",
        r.best_coherence * r.best_coherence,
        r.welch_bound,
        r.target,
        r.attained,
        r.best_restart,
        r.conjecture_witness
            .map_or(String::new(), |w| format!(" equiangularity {:.3e} witness {w}", r.equiangularity_residual)),
    );
    match &a.out {
        Some(p) => {
            write_text(p, &json)?;
            emit(out, None, &summary)?;
        }
        None => emit(out, None, &(json + &summary))?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Result<i32, Error> {
    let f = FrameFile::read(&a.input)?.to_frame()?;
    let fail = |out: &mut dyn Write, name: &str, detail: String, code: i32| -> Result<i32, Error> {
        writeln!(out, "FAIL {name}: {detail}").map_err(|e| Error::Io(e.to_string()))?;
        Ok(code)
    };
    let g = gram_table(&f);
    let h = g.hermitian_residual();
    if !(h <= HERMITIAN_TOL) {
        return fail(out, "gram-hermitian", format!("residual {h:e}"), EXIT_VIOLATION);
    }
    if let Err(e) = f.check_unit(UNIT_TOL) {
        return fail(out, "unit-diagonal", e.to_string(), EXIT_USAGE);
    }
    let p = frame_potential(&f);
    let pos = p.is_positive(DEFAULT_POSITIVITY_TOL);
    if !pos.positive {
        return fail(
            out,
            "frame-potential-positive",
            format!("value {} at point {}", pos.value, pos.point),
            EXIT_VIOLATION,
        );
    }
    writeln!(out, "ok: K={} d={} n={}", f.spectrum().size(), f.dim(), f.n()).map_err(|e| Error::Io(e.to_string()))?;
    Ok(EXIT_OK)
}
