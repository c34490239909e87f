//! Command-line front end: `integrate`, `experiment` and `setintegrate`.

pub mod config;
pub mod expr;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use gauge_measure::lab::{self, ReportFormat, Theorem, Verdict};
use gauge_measure::{
    hk_integrate, Error, HkOptions, Integrand, KlMode, MeasurableSet, SetValuedMeasure, SupportSet,
};

use config::{build_set_measure, integrand_of, parse_expr, parse_norm, parse_set, Config, ConfigError, SetMeasureSpec};

/// Stable exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const INTEGRABILITY: i32 = 2;
    pub const CONVERGENCE: i32 = 3;
    pub const GENERATOR: i32 = 4;
}

#[derive(Debug, Parser)]
#[command(name = "gauge-measure", version, about = "Gauge integrals against scalar, vector and set-valued measures")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate against a scalar or vector measure.
    Integrate(IntegrateArgs),
    /// Run a convergence experiment and write its report.
    Experiment(ExperimentArgs),
    /// Integrate against a set-valued measure.
    Setintegrate(SetIntegrateArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with named measures, integrands and experiments.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Integrand expression in `t`.
    #[arg(long = "f", conflicts_with = "integrand", allow_hyphen_values = true)]
    f: Option<String>,
    /// Named integrand from the config.
    #[arg(long)]
    integrand: Option<String>,
    /// Integration set, e.g. "[0,1]" or "[0,1) U (2,3]".
    #[arg(long)]
    set: Option<String>,
    #[arg(long)]
    tol: Option<f64>,
    /// Points where the integrand is treated as undefined (value ignored).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    exempt: Vec<f64>,
    /// Value of the integrand at +inf.
    #[arg(long, allow_hyphen_values = true)]
    at_infinity: Option<f64>,
    /// Number of grid directions.
    #[arg(long)]
    grid: Option<usize>,
    /// euclidean, sup or one.
    #[arg(long)]
    norm: Option<String>,
}

#[derive(Debug, Args)]
struct IntegrateArgs {
    #[command(flatten)]
    common: Common,
    /// Scalar measure name ("lebesgue" is built in) or vector measure name.
    #[arg(long, default_value = "lebesgue")]
    measure: String,
    /// signed or variation (vector measures).
    #[arg(long, default_value = "signed")]
    mode: String,
    /// Keep one direction of each antipodal pair.
    #[arg(long)]
    hemisphere: bool,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment name from the config.
    #[arg(long)]
    name: Option<String>,
    /// dct, bct, vitali-sv or dct-sv (built-in instances).
    #[arg(long, conflicts_with = "name")]
    theorem: Option<String>,
    #[arg(long, requires = "theorem")]
    instance: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    #[arg(long)]
    tol: Option<f64>,
    /// csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Report path; the report goes to stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SetIntegrateArgs {
    #[command(flatten)]
    common: Common,
    /// Set-valued measure name from the config.
    #[arg(long, conflicts_with = "shape")]
    measure: Option<String>,
    /// ball, box or zonotope (inline set-valued density).
    #[arg(long)]
    shape: Option<String>,
    /// Comma-separated center expressions.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    center: Vec<String>,
    #[arg(long, allow_hyphen_values = true)]
    radius: Option<String>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    radii: Vec<String>,
    /// Zonotope generator, comma-separated; repeat for each generator.
    #[arg(long, allow_hyphen_values = true)]
    generator: Vec<String>,
    /// Base measure name.
    #[arg(long, default_value = "lebesgue")]
    base: String,
    /// Interval carrying the density, "lo,hi".
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    support: Vec<f64>,
}

enum Failure {
    Config(String),
    Lib(Error),
    Io(std::io::Error),
    Verdict,
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.0)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::NoConvergence { .. } | Error::RefinementBudgetExceeded { .. } | Error::TailNotControlled { .. } => exit::CONVERGENCE,
        Error::GeneratorViolatesDomination(_) => exit::GENERATOR,
        Error::NotHklIntegrable { .. }
        | Error::AntipodalDegeneracy
        | Error::NotConvexlyIntegrable { .. }
        | Error::MissingValueAtInfinity
        | Error::NonFiniteSum { .. }
        | Error::SignChangeResolutionFailure(_) => exit::INTEGRABILITY,
        _ => exit::CONFIG,
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::OK };
            let text = e.render().to_string();
            let _ = if code == exit::OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Integrate(a) => integrate(a, out),
        Command::Experiment(a) => experiment(a, out),
        Command::Setintegrate(a) => setintegrate(a, out),
    };
    match result {
        Ok(()) => exit::OK,
        Err(Failure::Config(m)) => {
            let _ = writeln!(err, "error: {m}");
            exit::CONFIG
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit::CONFIG
        }
        Err(Failure::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
        Err(Failure::Verdict) => exit::CONVERGENCE,
    }
}

fn load(path: &Option<PathBuf>) -> Result<Config, ConfigError> {
    match path {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn resolve_integrand(cfg: &Config, c: &Common) -> Result<Integrand, Failure> {
    let mut f = match (&c.f, &c.integrand) {
        (Some(src), _) => integrand_of(&parse_expr("--f", src)?),
        (None, Some(name)) => cfg.integrand(name)?,
        (None, None) => Integrand::constant(1.0),
    };
    if !c.exempt.is_empty() {
        f = f.with_exempt(c.exempt.iter().copied());
    }
    if let Some(v) = c.at_infinity {
        f = f.with_value_at_infinity(v);
    }
    Ok(f)
}

fn resolve_set(cfg: &Config, c: &Common) -> Result<MeasurableSet, Failure> {
    Ok(match &c.set {
        Some(s) => parse_set(s)?,
        None => cfg.default_set()?,
    })
}

fn options(cfg: &Config, c: &Common) -> Result<HkOptions<f64>, Failure> {
    let tol = c.tol.unwrap_or(cfg.tol());
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Failure::Config(format!("tolerance must be positive, got {tol}")));
    }
    Ok(HkOptions::new(tol))
}

fn fmt_vec(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

fn integrate(a: IntegrateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = load(&a.common.config)?;
    let f = resolve_integrand(&cfg, &a.common)?;
    let set = resolve_set(&cfg, &a.common)?;
    let opts = options(&cfg, &a.common)?;
    if cfg.vector_measures.contains_key(&a.measure) {
        let mu = cfg.vector_measure(&a.measure)?;
        let norm = match &a.common.norm {
            Some(n) => parse_norm(n)?,
            None => mu.norm(),
        };
        let grid = cfg.grid(mu.dim(), norm, a.common.grid, a.hemisphere)?;
        let mode = match a.mode.as_str() {
            "signed" => KlMode::Signed,
            "variation" => KlMode::Variation,
            m => return Err(Failure::Config(format!("unknown mode '{m}', expected signed or variation"))),
        };
        let r = mu.kl_henstock_integral(&f, &set, &grid, &opts, mode)?;
        writeln!(out, "x = {}", fmt_vec(&r.x))?;
        writeln!(out, "residual = {}", r.residual)?;
        writeln!(out, "directions = {}", grid.len())?;
    } else {
        let m = cfg.scalar_measure(&a.measure)?;
        let r = hk_integrate(&f, &set, &m, &opts)?;
        writeln!(out, "value = {}", r.value)?;
        writeln!(out, "error_estimate = {}", r.error_estimate)?;
        writeln!(out, "levels = {}", r.levels_used)?;
    }
    Ok(())
}

fn experiment(a: ExperimentArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = load(&a.config)?;
    let (exp, spec_format, spec_output) = match (&a.name, &a.theorem) {
        (Some(name), _) => {
            let (exp, spec) = cfg.experiment(name)?;
            (exp, spec.format.clone(), spec.output.clone())
        }
        (None, Some(th)) => {
            let theorem: Theorem = th.parse().map_err(|e: Error| Failure::Config(format!("{e}\nusage: gauge-measure experiment --theorem <dct|bct|vitali-sv|dct-sv> [--instance NAME]")))?;
            let inst = a.instance.as_deref().unwrap_or(theorem.instances()[0]);
            let seed = a.seed.or(cfg.seed).unwrap_or(0);
            let exp = lab::builtin(theorem, inst, seed, a.n.clone(), a.tol).map_err(|e| Failure::Config(e.to_string()))?;
            (exp, None, None)
        }
        (None, None) => match cfg.experiments.keys().next() {
            Some(name) => {
                let (exp, spec) = cfg.experiment(name)?;
                (exp, spec.format.clone(), spec.output.clone())
            }
            None => return Err(Failure::Config("no experiment given: use --theorem or --name".into())),
        },
    };
    let exp = override_run(exp, &a);
    let format: ReportFormat = a.format.clone().or(spec_format).as_deref().unwrap_or("csv").parse().map_err(|e: Error| Failure::Config(e.to_string()))?;
    let report = exp.run()?;
    let bytes = lab::render_report(&report, format)?;
    match a.output.clone().or(spec_output.map(PathBuf::from)) {
        Some(path) => {
            write_file(&path, &bytes)?;
            writeln!(out, "theorem = {}", report.theorem_id)?;
            writeln!(out, "seed = {}", report.seed)?;
            writeln!(out, "final_discrepancy = {}", report.discrepancies.last().copied().unwrap_or(f64::NAN))?;
            writeln!(out, "verdict = {}", report.verdict)?;
            writeln!(out, "report = {}", path.display())?;
        }
        None => out.write_all(&bytes)?,
    }
    if report.verdict == Verdict::Pass {
        Ok(())
    } else {
        Err(Failure::Verdict)
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    std::fs::write(path, bytes)
}

/// Command-line `--seed`, `--n` and `--tol` take precedence over the config entry.
fn override_run(exp: lab::Experiment, a: &ExperimentArgs) -> lab::Experiment {
    use lab::Experiment as E;
    macro_rules! patch {
        ($c:ident) => {{
            if let Some(s) = a.seed {
                $c.seed = s;
            }
            if let Some(n) = &a.n {
                $c.n_values = n.clone();
            }
            if let Some(t) = a.tol {
                $c.tol = t;
                $c.hk_tol = t * lab::HK_TOL_FRACTION;
            }
        }};
    }
    match exp {
        E::Dct(mut c) => {
            patch!(c);
            E::Dct(c)
        }
        E::Bct(mut c) => {
            patch!(c);
            E::Bct(c)
        }
        E::VitaliSv(mut c) => {
            patch!(c);
            E::VitaliSv(c)
        }
        E::DctSv(mut c) => {
            patch!(c);
            E::DctSv(c)
        }
    }
}

fn inline_set_measure(cfg: &Config, a: &SetIntegrateArgs) -> Result<SetValuedMeasure, Failure> {
    let shape = a.shape.clone().ok_or_else(|| Failure::Config("give --measure NAME or an inline --shape".into()))?;
    let support = match a.support.as_slice() {
        [] => None,
        [lo, hi] => Some([*lo, *hi]),
        _ => return Err(Failure::Config("--support takes lo,hi".into())),
    };
    let spec = SetMeasureSpec {
        shape,
        center: a.center.clone(),
        radius: a.radius.clone(),
        radii: (!a.radii.is_empty()).then(|| a.radii.clone()),
        generators: (!a.generator.is_empty())
            .then(|| a.generator.iter().map(|g| g.split(',').map(|s| s.trim().to_string()).collect()).collect()),
        base: None,
        support,
    };
    Ok(build_set_measure("inline", &spec, cfg.scalar_measure(&a.base)?)?)
}

fn setintegrate(a: SetIntegrateArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let cfg = load(&a.common.config)?;
    let m = match &a.measure {
        Some(name) => cfg.set_measure(name)?,
        None => inline_set_measure(&cfg, &a)?,
    };
    let f = resolve_integrand(&cfg, &a.common)?;
    let set = resolve_set(&cfg, &a.common)?;
    let opts = options(&cfg, &a.common)?;
    let norm = match &a.common.norm {
        Some(n) => parse_norm(n)?,
        None => cfg.norm()?,
    };
    let grid = Arc::new(cfg.grid(m.dim(), norm, a.common.grid, false)?);
    let w = m.kl_henstock_integral(&f, &set, &grid, &opts)?;
    print_support_set(&w, out)?;
    Ok(())
}

fn print_support_set(w: &SupportSet, out: &mut dyn Write) -> std::io::Result<()> {
    let check = w.check_convexity();
    writeln!(out, "norm_of_set = {}", w.norm_of_set())?;
    writeln!(out, "convex = {} (worst slack {})", check.convex, check.worst)?;
    if let Some(g) = w.generator() {
        writeln!(out, "generator = {g:?}")?;
    }
    writeln!(out, "direction,support")?;
    for (u, h) in w.grid().iter().zip(w.values()) {
        writeln!(out, "{},{}", fmt_vec(u), h)?;
    }
    Ok(())
}
