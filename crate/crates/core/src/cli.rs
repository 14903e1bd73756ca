//! Scenario files and the pipelines behind the command-line tool.
//!
//! A scenario is a JSON document with `"schema": 1`. It is parsed and every
//! object it describes is built before any computation starts, so malformed
//! input exits with code 1 and leaves nothing on disk. Numerical failures
//! exit with code 2 and leave `error.json` in the output directory.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::compactline::{CompactMap, ExtReal, Grid, Interval};
use crate::cone::{
    certify_window, find_solution_windows, index_one_threshold, verify_cone_hypotheses, CertificateReport, IndexWindow,
    Pattern, RhoScan, Status, VerifyOptions, WindowSearch,
};
use crate::error::Error;
use crate::hammerstein::{apply_t, c3_bound_profile, EnvelopeFn, Nonlinearity};
use crate::problems::{gravity, projectile_family, registered_nonlinearity, ProjectileSetup, ProjectileWeights, REGISTERED};
use crate::quadrature::QuadConfig;
use crate::solver::{
    asymptotic_slope, energy_drift, escape_constants, ode_oracle, picard_solve, relative_sup_difference, EscapeConstants,
    OdeOptions, PicardOptions, SlopeEstimate, Solution,
};
use crate::weighted_space::{classify_asymptotic, AsymptoticRelation};
use crate::weights::WeightSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: u32,
    pub interval: Interval,
    /// map scale `L`
    #[serde(default = "unit")]
    pub scale: f64,
    /// number of grid nodes `m`
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default)]
    pub weights: WeightsSpec,
    pub problem: ProblemSpec,
    #[serde(default)]
    pub envelopes: EnvelopesSpec,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub rho_scan: RhoScan,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub classify: Option<ClassifySpec>,
}

fn unit() -> f64 {
    1.0
}

fn default_grid_size() -> usize {
    65
}

/// `φ` weights the space, `φ₂` the integral part of `α`, `φ₃` the functionals
/// `β`, `γ` and the sup part of `α`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSpec {
    pub phi: WeightSpec,
    pub phi2: WeightSpec,
    pub phi3: WeightSpec,
}

impl Default for WeightsSpec {
    fn default() -> Self {
        WeightsSpec {
            phi: WeightSpec::Affine { b: 1.0 },
            phi2: WeightSpec::Exponential { c: 2.0 },
            phi3: WeightSpec::Exponential { c: 1.0 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// radial motion `u'' = −gR²/(u+R)²`, `u(0) = 0`, `u'(0) = v₀`
    Projectile {
        g: f64,
        #[serde(rename = "R")]
        r: f64,
        v0: f64,
        /// integration horizon, default `1e4`
        #[serde(default)]
        t_max: Option<f64>,
    },
    /// `u'' = max(u, 0)e^{-t}`, `u(0) = 0`, `u'(0) = v₀`
    ModifiedProjectile { v0: f64 },
    /// `u'' = f(t, u)` with `f` taken from the registry by name
    Custom { name: String, v0: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EnvelopeSpec {
    /// `ρ φ₃(t) e^{-t}`
    Damped,
    Zero,
    /// no envelope: the corresponding index test cannot hold
    None,
}

/// Overrides for the envelopes carried by the nonlinearity.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopesSpec {
    pub upper: Option<EnvelopeSpec>,
    pub lower: Option<EnvelopeSpec>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// absolute tolerance of every quadrature
    pub quad: f64,
    pub picard: f64,
    pub max_iters: usize,
    pub theta: f64,
    pub ode_rtol: f64,
    /// random cone elements for the sampled certificates
    pub samples: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { quad: 1e-10, picard: 1e-10, max_iters: 200, theta: 1.0, ode_rtol: 1e-12, samples: 6 }
    }
}

/// Two positive functions to compare at the upper end.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySpec {
    pub f: WeightSpec,
    pub g: WeightSpec,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Solve,
    Verify,
    Windows,
    Classify,
    DemoProjectile,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Verify => "verify",
            Command::Windows => "windows",
            Command::Classify => "classify",
            Command::DemoProjectile => "demo-projectile",
        }
    }
}

/// Command-line values that take precedence over the scenario.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub grid_size: Option<usize>,
    /// Picard tolerance
    pub tol: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("numerical: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Validation(_) => "validation",
            CliError::Numerical(_) => "numerical",
        }
    }

    /// Machine-readable record of the failure.
    pub fn record(&self) -> ErrorRecord {
        let message = match self {
            CliError::Validation(m) | CliError::Numerical(m) => m.clone(),
        };
        ErrorRecord { kind: self.kind().into(), exit_code: self.exit_code(), message }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Invalid(_) | Error::Unsupported(_) => CliError::Validation(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> CliError {
    CliError::Validation(format!("{}: {e}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub kind: String,
    pub exit_code: i32,
    pub message: String,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| CliError::Validation(format!("scenario: {e}")))?;
        if s.schema != SCHEMA_VERSION {
            return Err(CliError::Validation(format!("unsupported schema {}, expected {SCHEMA_VERSION}", s.schema)));
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
        Self::from_json(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(d) = &o.out {
            self.output_dir = Some(d.clone());
        }
        if let Some(m) = o.grid_size {
            self.grid_size = m;
        }
        if let Some(t) = o.tol {
            self.tolerances.picard = t;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
    }

    fn quad(&self) -> QuadConfig {
        QuadConfig::with_abs_tol(self.tolerances.quad)
    }
}

/// Everything a command needs, built and validated up front.
#[allow(clippy::large_enum_variant)]
enum Prepared {
    Hammerstein { setup: ProjectileSetup, upper: Option<EnvelopeFn>, lower: Option<EnvelopeFn> },
    Gravity { g: f64, r: f64, v0: f64, t_max: f64 },
}

fn envelope(spec: Option<EnvelopeSpec>, own: Option<&EnvelopeFn>, weights: &ProjectileWeights) -> Option<EnvelopeFn> {
    match spec {
        None => own.cloned(),
        Some(EnvelopeSpec::None) => None,
        Some(EnvelopeSpec::Zero) => Some(Arc::new(|_, _| 0.0)),
        Some(EnvelopeSpec::Damped) => {
            let phi3 = weights.phi3.clone();
            Some(Arc::new(move |t, rho| rho * (phi3.ln_eval(t) - t).exp()))
        }
    }
}

fn prepare(s: &Scenario) -> Result<Prepared, CliError> {
    let t = &s.tolerances;
    if !(t.quad > 0.0 && t.picard > 0.0 && t.ode_rtol > 0.0) {
        return Err(CliError::Validation("tolerances must be positive".into()));
    }
    if !(t.theta > 0.0 && t.theta <= 1.0) {
        return Err(CliError::Validation(format!("theta must lie in (0, 1], got {}", t.theta)));
    }
    s.rho_scan.radii()?;
    let map = CompactMap::new(s.interval, s.scale)?;
    let weights = ProjectileWeights { phi: s.weights.phi.build()?, phi2: s.weights.phi2.build()?, phi3: s.weights.phi3.build()? };
    let (v0, nl): (f64, Nonlinearity) = match &s.problem {
        ProblemSpec::Projectile { g, r, v0, t_max } => {
            let _ = gravity(*g, *r)?;
            let t_max = t_max.unwrap_or(1e4);
            if !(t_max > 0.0 && t_max.is_finite() && v0.is_finite()) {
                return Err(CliError::Validation("need finite v0 and a positive finite t_max".into()));
            }
            return Ok(Prepared::Gravity { g: *g, r: *r, v0: *v0, t_max });
        }
        ProblemSpec::ModifiedProjectile { v0 } => {
            (*v0, registered_nonlinearity("damped-linear", weights.phi.clone(), weights.phi3.clone()).unwrap())
        }
        ProblemSpec::Custom { name, v0 } => {
            let nl = registered_nonlinearity(name, weights.phi.clone(), weights.phi3.clone()).ok_or_else(|| {
                CliError::Validation(format!("unknown problem {name:?}, registered: {}", REGISTERED.join(", ")))
            })?;
            (*v0, nl)
        }
    };
    let grid = Arc::new(Grid::new(map, s.grid_size)?);
    weights.phi.check_positive(&grid)?;
    let upper = envelope(s.envelopes.upper, nl.upper_envelope(), &weights);
    let lower = envelope(s.envelopes.lower, nl.lower_envelope(), &weights);
    let setup = projectile_family(v0, grid, weights, nl)?;
    Ok(Prepared::Hammerstein { setup, upper, lower })
}

/// `%.17g`: shortest of fixed or exponent notation with 17 significant
/// digits and trailing zeros removed.
pub fn fmt_g17(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{v:.16e}");
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-4..17).contains(&exp) {
        trim(&format!("{:.*}", (16 - exp) as usize, v))
    } else {
        format!("{}e{}{:02}", trim(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// CSV with a header row, `%.17g` numbers and `\n` line ends.
pub fn csv(header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.iter().map(|&v| fmt_g17(v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

struct Artifacts {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Artifacts {
    fn new(dir: PathBuf) -> Self {
        Artifacts { dir, written: Vec::new() }
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        fs::create_dir_all(&self.dir).map_err(|e| io_error(&self.dir, e))?;
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(|e| io_error(&path, e))?;
        self.written.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Numerical(e.to_string()))?;
        text.push('\n');
        self.write(name, &text)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSummary {
    pub converged: bool,
    pub iterations: usize,
    pub residual: f64,
    /// `ũ(+∞)`
    pub slope: f64,
    pub theta: f64,
    pub trace: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySummary {
    pub constants: EscapeConstants,
    pub t_max: f64,
    pub u_end: f64,
    pub v_end: f64,
    /// `lim u/t`, when the tail settles
    pub slope: Option<SlopeEstimate>,
    /// `u(t_max)/t_max^{2/3}`
    pub two_thirds_ratio: f64,
    pub energy_drift: f64,
    pub error_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowsReport {
    /// final bisection bracket `(fails, holds)` of the index-one test
    pub threshold: Option<(f64, f64)>,
    pub search: WindowSearch,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassifyReport {
    pub f: WeightSpec,
    pub g: WeightSpec,
    pub relation: AsymptoticRelation,
    pub symbol: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoldenRow {
    pub quantity: String,
    pub computed: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DemoReport {
    pub v0: f64,
    pub c: f64,
    pub rows: Vec<GoldenRow>,
    pub hypotheses_pass: bool,
    pub window: Option<IndexWindow>,
    pub solution: SolveSummary,
    pub oracle_difference: f64,
}

/// Result of one invocation.
#[derive(Debug)]
pub struct RunOutcome {
    pub artifacts: Vec<PathBuf>,
}

/// Load, validate and run. On error nothing is written for validation
/// failures; numerical failures leave `error.json` behind.
pub fn run_scenario(path: &Path, command: Command, overrides: &Overrides, log: &mut dyn Write) -> Result<RunOutcome, CliError> {
    let mut scenario = Scenario::load(path)?;
    scenario.apply(overrides);
    run_loaded(&scenario, command, log)
}

pub fn run_loaded(scenario: &Scenario, command: Command, log: &mut dyn Write) -> Result<RunOutcome, CliError> {
    let prepared = prepare(scenario)?;
    if command == Command::Classify && scenario.classify.is_none() {
        return Err(CliError::Validation("classify needs a \"classify\" section".into()));
    }
    let dir = scenario.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut art = Artifacts::new(dir);
    let result = dispatch(scenario, &prepared, command, &mut art, log);
    if let Err(e @ CliError::Numerical(_)) = &result {
        let _ = art.json("error.json", &e.record());
    }
    result.map(|_| RunOutcome { artifacts: art.written })
}

fn dispatch(s: &Scenario, p: &Prepared, command: Command, art: &mut Artifacts, log: &mut dyn Write) -> Result<(), CliError> {
    match (command, p) {
        (Command::Classify, _) => classify(s, art, log),
        (Command::Solve, Prepared::Gravity { g, r, v0, t_max }) => solve_gravity(s, *g, *r, *v0, *t_max, art, log),
        (Command::Solve, Prepared::Hammerstein { setup, .. }) => solve_hammerstein(s, setup, art, log).map(|_| ()),
        (Command::Verify, Prepared::Hammerstein { setup, .. }) => verify(s, setup, art, log).map(|_| ()),
        (Command::Windows, Prepared::Hammerstein { setup, upper, lower }) => {
            let report = verify(s, setup, art, log)?;
            windows(s, setup, &report, upper.as_ref(), lower.as_ref(), art, log).map(|_| ())
        }
        (Command::DemoProjectile, Prepared::Hammerstein { setup, upper, lower }) => {
            demo(s, setup, upper.as_ref(), lower.as_ref(), art, log)
        }
        (_, Prepared::Gravity { .. }) => {
            Err(CliError::Validation(format!("{} needs an integral-equation problem, not the gravity projectile", command.name())))
        }
    }
}

fn say(log: &mut dyn Write, text: &str) {
    let _ = writeln!(log, "{text}");
}

fn verify_options(s: &Scenario) -> VerifyOptions {
    VerifyOptions { quad: s.quad(), samples: s.tolerances.samples, seed: s.seed, ..VerifyOptions::default() }
}

fn verify(s: &Scenario, setup: &ProjectileSetup, art: &mut Artifacts, log: &mut dyn Write) -> Result<CertificateReport, CliError> {
    let report = verify_cone_hypotheses(&setup.problem, &setup.functionals, &verify_options(s))?;
    for e in &report.entries {
        say(log, &format!("{:<3} {:<11} {}", e.id, format!("{:?}", e.status), e.detail));
    }
    art.json("certificate.json", &report)?;
    Ok(report)
}

fn windows(
    s: &Scenario,
    setup: &ProjectileSetup,
    report: &CertificateReport,
    upper: Option<&EnvelopeFn>,
    lower: Option<&EnvelopeFn>,
    art: &mut Artifacts,
    log: &mut dyn Write,
) -> Result<WindowsReport, CliError> {
    let map = *setup.problem.map();
    let threshold = index_one_threshold(report, upper, &map, &s.rho_scan, 1e-10)?;
    let search = find_solution_windows(report, upper, lower, &map, &s.rho_scan)?;
    if let Some((lo, hi)) = threshold {
        say(log, &format!("index-one test flips in [{lo:.10}, {hi:.10}]"));
    }
    if search.blocked_by.is_empty() {
        say(log, &format!("{} windows", search.windows.len()));
    } else {
        say(log, &format!("window search blocked by {}", search.blocked_by.join(", ")));
    }
    let out = WindowsReport { threshold, search };
    art.json("windows.json", &out)?;
    Ok(out)
}

fn summary(sol: &Solution) -> SolveSummary {
    SolveSummary {
        converged: sol.converged,
        iterations: sol.iterations,
        residual: sol.residual,
        slope: sol.slope,
        theta: sol.theta,
        trace: sol.trace.clone(),
    }
}

fn solve_hammerstein(s: &Scenario, setup: &ProjectileSetup, art: &mut Artifacts, log: &mut dyn Write) -> Result<Solution, CliError> {
    let problem = &setup.problem;
    let t = &s.tolerances;
    let opts = PicardOptions { tol: t.picard, max_iters: t.max_iters, theta: t.theta, quad: s.quad() };
    let sol = picard_solve(problem, problem.forcing(), &opts)?;
    let tu = apply_t(problem, &sol.u, &opts.quad)?;
    let rows = problem.grid().t().iter().enumerate().filter_map(|(i, t)| {
        let tv = t.finite()?;
        let ut = sol.u.tilde_row(0)[i];
        Some(vec![tv, ut, sol.u.raw_at(tv), (ut - tu.tilde_row(0)[i]).abs()])
    });
    art.write("solution.csv", &csv(&["t", "u_tilde", "u", "residual"], rows))?;
    art.write("trace.csv", &csv(&["iteration", "update"], sol.trace.iter().enumerate().map(|(i, &d)| vec![(i + 1) as f64, d])))?;
    art.json("summary.json", &summary(&sol))?;
    art.write("solution.gp", &gnuplot_solution())?;
    say(
        log,
        &format!(
            "converged = {} after {} updates, residual {:.3e}, ũ(+∞) = {:.12}",
            sol.converged, sol.iterations, sol.residual, sol.slope
        ),
    );
    if !sol.converged {
        return Err(CliError::Numerical(format!("Picard iteration did not converge, best residual {:e}", sol.residual)));
    }
    Ok(sol)
}

fn gnuplot_solution() -> String {
    "set datafile separator ','\n\
     set key autotitle columnhead\n\
     set multiplot layout 1,2\n\
     set xlabel 't'\n\
     set logscale x\n\
     plot 'solution.csv' using 1:3 with linespoints title 'u'\n\
     plot 'solution.csv' using 1:2 with linespoints title 'u/phi'\n\
     unset multiplot\n"
        .into()
}

fn solve_gravity(s: &Scenario, g: f64, r: f64, v0: f64, t_max: f64, art: &mut Artifacts, log: &mut dyn Write) -> Result<(), CliError> {
    let constants = escape_constants(g, r, v0)?;
    let f = gravity(g, r)?;
    let opts = OdeOptions { rtol: s.tolerances.ode_rtol, atol: s.tolerances.ode_rtol * 0.1, ..OdeOptions::default() };
    let sol = ode_oracle(&f, v0, t_max, &opts)?;
    let (u_end, v_end) = (*sol.u.last().unwrap(), *sol.v.last().unwrap());
    let slope = asymptotic_slope(&|t| sol.eval(t).map_or(f64::NAN, |(u, _)| u / t), t_max).ok();
    let drift = energy_drift(&sol, g, r, v0);
    let stride = sol.t.len().div_ceil(2000).max(1);
    let rows = (0..sol.t.len()).step_by(stride).chain(std::iter::once(sol.t.len() - 1)).map(|i| {
        let (u, v) = (sol.u[i], sol.v[i]);
        let e = 0.5 * (v * v - v0 * v0) - g * r * r * (1.0 / (r + u) - 1.0 / r);
        vec![sol.t[i], u, v, e]
    });
    art.write("trajectory.csv", &csv(&["t", "u", "v", "energy_error"], rows))?;
    art.write(
        "trajectory.gp",
        "set datafile separator ','\nset key autotitle columnhead\nset logscale xy\nset xlabel 't'\nplot 'trajectory.csv' using 1:2 with lines title 'u'\n",
    )?;
    let out = TrajectorySummary {
        constants,
        t_max,
        u_end,
        v_end,
        slope,
        two_thirds_ratio: u_end / t_max.powf(2.0 / 3.0),
        energy_drift: drift,
        error_estimate: sol.error_estimate,
    };
    art.json("summary.json", &out)?;
    say(log, &format!("v_s = {:.12}, v_inf = {:?}", constants.v_s, constants.v_inf));
    match slope {
        Some(sl) => say(log, &format!("u/t -> {:.10} ± {:.1e}", sl.value, sl.error)),
        None => say(log, "u/t does not settle"),
    }
    say(log, &format!("u/t^(2/3) at t_max = {:.10} (C = {:.10}), energy drift {drift:.2e}", out.two_thirds_ratio, constants.two_thirds));
    Ok(())
}

fn classify(s: &Scenario, art: &mut Artifacts, log: &mut dyn Write) -> Result<(), CliError> {
    let spec = s.classify.as_ref().expect("checked before dispatch");
    let map = CompactMap::new(s.interval, s.scale)?;
    let (f, g) = (spec.f.build()?, spec.g.build()?);
    let relation = classify_asymptotic(|t| f.eval(t), |t| g.eval(t), &map)?;
    let report = ClassifyReport { f: spec.f.clone(), g: spec.g.clone(), relation, symbol: relation.tag.symbol().into() };
    say(log, &format!("f = {}, g = {}: {relation}", f.label(), g.label()));
    art.json("classify.json", &report)
}

fn standard_c(w: &WeightsSpec) -> Option<f64> {
    match (&w.phi, &w.phi2, &w.phi3) {
        (WeightSpec::Affine { b }, WeightSpec::Exponential { c }, WeightSpec::Exponential { c: c3 }) if *b == 1.0 && *c3 == 1.0 => {
            Some(*c)
        }
        _ => None,
    }
}

fn demo(
    s: &Scenario,
    setup: &ProjectileSetup,
    upper: Option<&EnvelopeFn>,
    lower: Option<&EnvelopeFn>,
    art: &mut Artifacts,
    log: &mut dyn Write,
) -> Result<(), CliError> {
    let c = standard_c(&s.weights).ok_or_else(|| {
        CliError::Validation("demo-projectile needs φ = t + 1, φ₂ = c eᵗ, φ₃ = eᵗ".into())
    })?;
    if !matches!(s.problem, ProblemSpec::ModifiedProjectile { .. }) || s.interval != (Interval::HalfLine { a: 0.0 }) {
        return Err(CliError::Validation("demo-projectile needs the modified-projectile problem on [0, ∞)".into()));
    }
    let v0 = setup.v0;
    let quad = s.quad();
    let e1 = (-1f64).exp();

    let report = verify(s, setup, art, log)?;
    let hypotheses_pass = report.entries.iter().all(|e| e.status == Status::Pass);
    let win = windows(s, setup, &report, upper, lower, art, log)?;
    let c3 = c3_bound_profile(&setup.problem, 1.0, &quad)?;
    art.write(
        "c3_profile.csv",
        &csv(&["t", "profile"], c3.t.iter().zip(&c3.profile).filter_map(|(t, &p)| Some(vec![t.finite()?, p]))),
    )?;
    let map = *setup.problem.map();
    let window = certify_window(&report, Pattern::S1, &[0.9 * v0, 0.7 * v0], upper, lower, &map)?;
    let sol = solve_hammerstein(s, setup, art, log)?;

    let nl = setup.problem.nonlinearity().clone();
    let oracle = ode_oracle(&|t, y| nl.eval(t, y), v0, 20.0, &OdeOptions::default())?;
    let probe: Vec<f64> = (0..=400).map(|i| 0.05 * i as f64).collect();
    let oracle_difference = relative_sup_difference(&|t| sol.u.raw_at(t), &|t| oracle.eval(t).map_or(f64::NAN, |p| p.0), &probe);

    let sc = &report.scalars;
    let threshold = win.threshold.map_or(f64::NAN, |(lo, hi)| 0.5 * (lo + hi));
    let c3_end = c3.t.iter().zip(&c3.profile).find(|(t, _)| **t == ExtReal::PosInf).map_or(f64::NAN, |(_, &p)| p);
    let mut rows = Vec::new();
    let mut row = |q: &str, computed: f64, expected: f64, tolerance: f64| {
        let pass = (computed - expected).abs() <= tolerance;
        rows.push(GoldenRow { quantity: q.into(), computed, expected, tolerance, pass });
    };
    row("∫γ(k(·,s))ds", sc.gamma_kernel_integral, 1.0, 1e-8);
    row("∫β(k(·,s))ds", sc.beta_kernel_integral, e1, 1e-8);
    row("γ(p)", sc.gamma_p, v0, 1e-8);
    row("β(p)", sc.beta_p, v0 * e1, 1e-8);
    row("α(p)", sc.alpha_p, v0 / c - v0 * e1, 1e-8);
    row("bound profile at +∞", c3_end, 2.0, 1e-7);
    row("∫ω₀φ_R (R = 1)", c3.omega_integral.unwrap_or(f64::NAN), 5.0, 1e-6);
    row("index-one threshold", threshold, v0 * e1 / (1.0 - e1), 1e-6);
    row("oracle difference on [0, 20]", oracle_difference, 0.0, 1e-4);

    let mut table = String::new();
    let _ = writeln!(table, "{:<30} {:>18} {:>18} {:>10}  ok", "quantity", "computed", "expected", "|diff|");
    for r in &rows {
        let _ = writeln!(
            table,
            "{:<30} {:>18.12} {:>18.12} {:>10.2e}  {}",
            r.quantity,
            r.computed,
            r.expected,
            (r.computed - r.expected).abs(),
            if r.pass { "yes" } else { "NO" }
        );
    }
    let _ = writeln!(
        table,
        "window S1 ({:.2}, {:.2}): {}",
        0.9 * v0,
        0.7 * v0,
        if window.is_some() { "certified" } else { "not certified" }
    );
    let _ = write!(table, "hypotheses: {}", if hypotheses_pass { "all pass" } else { "some fail" });
    say(log, &table);

    let out = DemoReport { v0, c, rows, hypotheses_pass, window, solution: summary(&sol), oracle_difference };
    art.json("demo.json", &out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn g17_matches_printf() {
        let cases = [
            (0.1, "0.10000000000000001"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (1e17, "1e+17"),
            (1.2345e-5, "1.2345e-05"),
            (123456789.0, "123456789"),
            (1e-4, "0.0001"),
            (f64::INFINITY, "inf"),
            (0.0, "0"),
            (1.0 / 3.0, "0.33333333333333331"),
        ];
        for (v, want) in cases {
            assert_eq!(fmt_g17(v), want, "{v}");
        }
    }

    #[test]
    fn scenario_rejects_unknown_keys_and_schema() {
        let ok = r#"{"schema":1,"interval":{"kind":"half-line","a":0},"problem":{"kind":"modified-projectile","v0":1}}"#;
        assert!(Scenario::from_json(ok).is_ok());
        let extra = r#"{"schema":1,"interval":{"kind":"half-line","a":0},"problem":{"kind":"modified-projectile","v0":1},"colour":3}"#;
        assert!(matches!(Scenario::from_json(extra), Err(CliError::Validation(_))));
        let v2 = ok.replace("\"schema\":1", "\"schema\":2");
        assert!(Scenario::from_json(&v2).is_err());
        let missing = r#"{"schema":1,"interval":{"kind":"half-line","a":0},"problem":{"kind":"modified-projectile"}}"#;
        assert!(Scenario::from_json(missing).unwrap_err().to_string().contains("v0"));
    }

    #[test]
    fn error_codes() {
        assert_eq!(CliError::from(Error::Invalid("x".into())).exit_code(), 1);
        assert_eq!(CliError::from(Error::BlowUp { t: 1.0 }).exit_code(), 2);
    }
}
