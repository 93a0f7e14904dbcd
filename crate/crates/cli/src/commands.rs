//! The six commands. Each returns an [`Output`]; `main` does the writing.

use std::fmt::Write;
use std::path::{Path, PathBuf};

use anyhow::bail;
use rayon::prelude::*;
use serde::Serialize;
use theta_maslov::harness::{check_morse_index, check_rescaled_count, morse_hypothesis, run_suite, CheckReport, MorseCase, Suite, SuiteContext};
use theta_maslov::maslov::{rectangle_theta, Backend, CrossingRecord, MaslovEngine, Pairing, ParamPoint, PathSpec, Segment, Variable};
use theta_maslov::oracle::{bands, eigencurve, floquet_spectrum, lambda_infinity, EigencurvePoint, SpectrumMethod};
use theta_maslov::{Error, Potential64};

use crate::svg::Chart;
use crate::{fmt_f64, InputError, Output, RunConfig};

/// Which Maslov backends a command runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BackendChoice {
    CrossingForm,
    SpectralFlow,
    #[default]
    Both,
}

impl BackendChoice {
    fn backends(self) -> Vec<Backend> {
        match self {
            BackendChoice::CrossingForm => vec![Backend::CrossingForm],
            BackendChoice::SpectralFlow => vec![Backend::SpectralFlow],
            BackendChoice::Both => vec![Backend::CrossingForm, Backend::SpectralFlow],
        }
    }
}

/// Validated inputs shared by all commands.
pub struct Settings {
    pub config: RunConfig,
    /// Whether the configuration came from a file (for `verify`, only then
    /// is the potential added to the built-in catalog).
    pub configured: bool,
    pub out: Option<PathBuf>,
    pub backend: BackendChoice,
    potential: Potential64,
}

impl Settings {
    pub fn new(config: RunConfig, configured: bool, out: Option<PathBuf>, backend: BackendChoice) -> anyhow::Result<Self> {
        let potential = config.validate()?;
        Ok(Self { config, configured, out, backend, potential })
    }

    pub fn potential(&self) -> &Potential64 {
        &self.potential
    }

    fn svg_path(&self) -> Option<PathBuf> {
        self.out.as_ref().map(|p| p.with_extension("svg"))
    }

    fn with_svg(&self, mut out: Output, chart: &Chart) -> Output {
        if let Some(p) = self.svg_path() {
            out.files.push((p, chart.render()));
        }
        out
    }
}

fn require(ok: bool, msg: impl Into<String>) -> anyhow::Result<()> {
    if !ok {
        bail!(InputError(msg.into()));
    }
    Ok(())
}

fn json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------------------

/// Eigenvalues of `H_θ(t)` up to `cutoff`, one CSV row per distinct value.
///
/// The monodromy roots are cross-checked against finite-difference inertia
/// counts inside the oracle; a disagreement surfaces as an error (exit 1).
pub fn spectrum(s: &Settings, theta: f64, t: f64, cutoff: f64) -> anyhow::Result<Output> {
    let pot = s.potential();
    let lo = lambda_infinity(pot);
    require(theta.is_finite(), "theta must be finite")?;
    require(t > 0.0 && t <= 1.0, format!("t = {t} must lie in (0, 1]"))?;
    require(cutoff.is_finite() && cutoff > lo, format!("cutoff must exceed {lo}, which lies below the whole spectrum"))?;
    let spec = floquet_spectrum(pot, theta, t, (lo, cutoff), &s.config.harness_options().oracle)?;
    let method = match spec.method {
        SpectrumMethod::MonodromyRoots => "monodromy-roots",
        SpectrumMethod::FiniteDifference => "finite-difference",
    };
    let mut csv = String::from("index,lambda,multiplicity,method\n");
    let mut index = 0;
    for e in spec.eigenvalues.iter().filter(|e| e.lambda <= cutoff) {
        let _ = writeln!(csv, "{index},{},{},{method}", fmt_f64(e.lambda), e.multiplicity);
        index += e.multiplicity;
    }
    Ok(Output::data(s.out.as_deref(), csv))
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SegmentIndex {
    label: String,
    index: i64,
}

#[derive(Serialize)]
struct BackendReport {
    backend: Backend,
    index: i64,
    segments: Vec<SegmentIndex>,
}

#[derive(Serialize)]
struct MaslovReport {
    theta1: f64,
    theta2: f64,
    r: f64,
    closed: bool,
    /// Index of the first backend run (crossing forms when both run).
    index: i64,
    /// `½` of the index of the θ-edge: the predicted change of the count.
    half_index: f64,
    agree: bool,
    backends: Vec<BackendReport>,
    crossings: Vec<CrossingRecord>,
}

/// Maslov index of the boundary planes for `θ ∈ [θ₁, θ₂]` against the
/// solution plane at `λ = r`, or of the whole θ-rectangle with `closed`.
pub fn maslov(s: &Settings, theta1: f64, theta2: f64, r: f64, closed: bool) -> anyhow::Result<Output> {
    let pot = s.potential();
    let two_pi = 2.0 * std::f64::consts::PI;
    require(0.0 <= theta1 && theta1 < theta2 && theta2 < two_pi, format!("need 0 <= theta1 < theta2 < 2π, got {theta1}, {theta2}"))?;
    require(r.is_finite(), "r must be finite")?;
    let floor = lambda_infinity(pot);
    let path = if closed {
        rectangle_theta(pot, theta1, theta2, r, floor)?
    } else {
        let seg = Segment::between("Γ2", Variable::Theta, ParamPoint { lambda: r, theta: theta1, t: 1.0 }, theta2, 0.0)?;
        PathSpec::single(seg)
    };
    let engine = MaslovEngine::new(pot, &path, Pairing::Doubled, s.config.harness_options().engine)?;
    let mut reports = Vec::new();
    let mut crossings = None;
    for backend in s.backend.backends() {
        let results = engine.path_indices(&path, backend)?;
        let segments: Vec<SegmentIndex> =
            path.segments.iter().zip(&results).map(|(seg, res)| SegmentIndex { label: seg.label.clone(), index: res.index }).collect();
        if crossings.is_none() {
            crossings = Some(results.into_iter().flat_map(|r| r.crossings).collect::<Vec<_>>());
        }
        reports.push(BackendReport { backend, index: segments.iter().map(|x| x.index).sum(), segments });
    }
    let edge = |b: &BackendReport| b.segments.iter().find(|x| x.label == "Γ2").map_or(0, |x| x.index);
    let agree = reports.windows(2).all(|w| w[0].segments.iter().zip(&w[1].segments).all(|(a, b)| a.index == b.index));
    let crossings = crossings.unwrap_or_default();

    let mut chart = Chart::new("Crossings on the (θ, λ) rectangle", "θ", "λ");
    chart.outline((theta1, theta2), (floor, r));
    for c in &crossings {
        chart.dot((c.params.theta, c.params.lambda), format!("{:+}", c.contribution));
    }
    let report = MaslovReport {
        theta1,
        theta2,
        r,
        closed,
        index: reports[0].index,
        half_index: edge(&reports[0]) as f64 / 2.0,
        agree,
        backends: reports,
        crossings,
    };
    let mut out = s.with_svg(Output::data(s.out.as_deref(), json(&report)?), &chart);
    out.code = if agree { 0 } else { 1 };
    Ok(out)
}

// ---------------------------------------------------------------------------

/// Runs a verification suite; prints one line per check and writes the full
/// JSON report to `--out`.
pub fn verify(s: &Settings, suite: &str) -> anyhow::Result<Output> {
    let Some(suite) = Suite::parse(suite) else {
        bail!(InputError(format!("unknown suite {suite:?}; expected one of {}", Suite::NAMES.join(", "))));
    };
    let ctx = SuiteContext {
        potential: s.configured.then(|| s.config.potential.clone()),
        seed: s.config.seed,
        opts: s.config.harness_options(),
        ..SuiteContext::default()
    };
    let report = run_suite(suite, &ctx);
    let mut text = String::new();
    for r in &report.reports {
        let _ = write!(text, "{} {:?}: {} (lhs {} vs rhs {})", if r.pass { "PASS" } else { "FAIL" }, r.claim, r.inputs, r.lhs, r.rhs);
        if !r.pass {
            let _ = write!(text, " {}", r.notes.join("; "));
        }
        text.push('\n');
    }
    for r in &report.rejected {
        let _ = writeln!(text, "REJECTED {}: {}", r.inputs, r.reason);
    }
    let _ = writeln!(text, "{} passed, {} failed, {} rejected", report.passed(), report.failed(), report.rejected.len());
    let mut out = Output { stdout: text, code: report.exit_code(), ..Output::default() };
    if let Some(p) = &s.out {
        out.files.push((p.clone(), json(&report)?));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------

/// Band edges `[α_k, β_k]` of the first `k_max` bands.
pub fn bands_cmd(s: &Settings, k_max: usize) -> anyhow::Result<Output> {
    require(k_max >= 1, "k_max must be at least 1")?;
    let list = bands(s.potential(), k_max, &s.config.harness_options().oracle)?;
    let mut csv = String::from("k,alpha,beta\n");
    let mut chart = Chart::new("Spectral bands", "band k", "λ");
    for b in &list {
        let _ = writeln!(csv, "{},{},{}", b.k, fmt_f64(b.alpha), fmt_f64(b.beta));
        chart.bar((b.k as f64 - 0.35, b.k as f64 + 0.35), (b.alpha, b.beta), 0);
    }
    Ok(s.with_svg(Output::data(s.out.as_deref(), csv), &chart))
}

// ---------------------------------------------------------------------------

/// Eigenvalue branches `λ_k(θ)` with slopes `2 Im(u'(a), u(a))`.
pub fn curves(s: &Settings, ks: &[usize], steps: usize, theta_range: (f64, f64)) -> anyhow::Result<Output> {
    require(!ks.is_empty(), "at least one branch is needed")?;
    require(steps >= 1, "theta_steps must be at least 1")?;
    require(theta_range.0.is_finite() && theta_range.0 < theta_range.1 && theta_range.1.is_finite(), "theta range must be a finite interval")?;
    let pot = s.potential();
    let opts = s.config.harness_options().oracle;
    let branches: Vec<Vec<EigencurvePoint>> =
        ks.par_iter().map(|&k| eigencurve(pot, k, theta_range, steps, &opts)).collect::<Result<_, Error>>()?;
    let mut csv = String::from("theta,k,lambda,dlambda_dtheta\n");
    let mut chart = Chart::new("Eigenvalue branches", "θ", "λ");
    for (series, (&k, branch)) in ks.iter().zip(&branches).enumerate() {
        for p in branch {
            let slope = 2.0 * p.boundary_pairing().im;
            let _ = writeln!(csv, "{},{k},{},{}", fmt_f64(p.theta), fmt_f64(p.lambda), fmt_f64(slope));
        }
        chart.polyline(branch.iter().map(|p| (p.theta, p.lambda)).collect(), series);
    }
    Ok(s.with_svg(Output::data(s.out.as_deref(), csv), &chart))
}

// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ConjugatePoint {
    t: f64,
    complex_dim: usize,
    form_eigenvalues: Vec<f64>,
}

#[derive(Serialize)]
struct MorseSummary {
    hypothesis: MorseCase,
    /// `Mor(H) - Mor(H(τ))` under negative forms, the reverse under positive.
    mor_diff: f64,
    conjugate_points: Vec<ConjugatePoint>,
    report: CheckReport,
}

#[derive(Serialize)]
struct RescaleReport {
    tau: f64,
    theta: f64,
    r: f64,
    /// `N(r, τ) - N(r, 1)`.
    count_difference: f64,
    /// `½ Mas` of the `t`-edge at `λ = r`.
    half_maslov: f64,
    count_report: CheckReport,
    /// Absent when the sign hypotheses fail; the reason is given instead.
    morse: Option<MorseSummary>,
    morse_rejected: Option<String>,
}

/// Count and Morse-index identities along the rescaling `t ∈ [τ, 1]`.
pub fn rescale(s: &Settings, tau: f64, theta: f64, r: f64) -> anyhow::Result<Output> {
    let pot = s.potential();
    require(tau > 0.0 && tau <= 1.0, format!("tau = {tau} must lie in (0, 1]"))?;
    require(pot.is_symmetric_interval(), "the rescaling needs a symmetric interval [-L, L]")?;
    let opts = s.config.harness_options();
    let count_report = check_rescaled_count(pot, tau, theta, r, &opts)?;
    let (morse, morse_rejected) = match morse_hypothesis(pot, tau) {
        Ok(hypothesis) => {
            let report = check_morse_index(pot, tau, theta, &opts)?;
            let conjugate_points = report
                .crossings
                .iter()
                .map(|c| ConjugatePoint { t: c.params.t, complex_dim: c.complex_kernel_dim, form_eigenvalues: c.form_eigenvalues.clone() })
                .collect();
            (Some(MorseSummary { hypothesis, mor_diff: report.lhs, conjugate_points, report }), None)
        }
        Err(e @ Error::Hypothesis(_)) => (None, Some(e.to_string())),
        Err(e) => return Err(e.into()),
    };
    let pass = count_report.pass && morse.as_ref().is_none_or(|m| m.report.pass);
    let report = RescaleReport {
        tau,
        theta,
        r,
        count_difference: count_report.lhs,
        half_maslov: count_report.rhs,
        count_report,
        morse,
        morse_rejected,
    };
    let mut out = Output::data(s.out.as_deref(), json(&report)?);
    out.code = if pass { 0 } else { 1 };
    Ok(out)
}

/// Parses `"0,1,3"` into branch indices.
pub fn parse_branches(list: &str) -> anyhow::Result<Vec<usize>> {
    list.split(',')
        .map(|k| k.trim().parse::<usize>().map_err(|_| InputError(format!("bad branch index {k:?}")).into()))
        .collect()
}

/// Loads the configuration named by `--config` (or the default) and applies
/// flag overrides.
pub fn settings(config: Option<&Path>, out: Option<PathBuf>, seed: Option<u64>, tol: Option<f64>, backend: BackendChoice) -> anyhow::Result<Settings> {
    let mut cfg = match config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    if let Some(tol) = tol {
        cfg.integrator_tol = tol;
    }
    Settings::new(cfg, config.is_some(), out, backend)
}
