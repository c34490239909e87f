//! Convergence experiments: sequences `f_n -> f` integrated against vector
//! and set-valued measures, with the gap recorded for each `n` and a
//! pass/fail verdict.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex::Generator;
use crate::domain::{Interval, MeasurableSet};
use crate::error::{Error, Result};
use crate::hk::{hk_integrate, HkOptions};
use crate::integrand::Integrand;
use crate::measure::{Density, Poly, ScalarMeasure};
use crate::par::try_map_ordered;
use crate::set_valued::{check_nonnegative, SetValuedDensity, SetValuedMeasure};
use crate::vector::{dyadic_family, DirectionGrid, KlMode, SpaceNorm, VectorMeasure};

pub const DEFAULT_N_VALUES: [usize; 7] = [50, 100, 200, 400, 600, 800, 1000];
pub const DEFAULT_TOL: f64 = 1e-3;
/// Integration tolerance as a fraction of the report tolerance.
pub const HK_TOL_FRACTION: f64 = 1e-2;
/// Directions on the planar grid used by the experiments.
pub const LAB_GRID_SIZE: usize = 16;

const DYADIC_SETS: usize = 50;
const RANDOM_SETS: usize = 50;
const PRECHECK_SAMPLES: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        })
    }
}

/// Pass when the last gap is below `tol` and no gap in the last half of the run reaches `2 tol`.
pub fn verdict(discrepancies: &[f64], tol: f64) -> Verdict {
    let Some(last) = discrepancies.last() else { return Verdict::Fail };
    let tail = &discrepancies[discrepancies.len() / 2..];
    let worst = tail.iter().copied().fold(0.0, f64::max);
    if *last < tol && worst < 2.0 * tol && tail.iter().all(|d| d.is_finite()) {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub theorem_id: String,
    pub seed: u64,
    pub n_values: Vec<usize>,
    /// Gap at each `n`, taken as a sup over the set family.
    pub discrepancies: Vec<f64>,
    /// `max_u int_T |f_n - f| d|u mu|` at each `n`, for the vector experiments.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub secondary: Option<Vec<f64>>,
    pub tolerance: f64,
    pub verdict: Verdict,
    #[serde(skip)]
    pub runtime: Duration,
}

impl PartialEq for ConvergenceReport {
    fn eq(&self, o: &Self) -> bool {
        self.theorem_id == o.theorem_id
            && self.seed == o.seed
            && self.n_values == o.n_values
            && self.discrepancies == o.discrepancies
            && self.secondary == o.secondary
            && self.tolerance == o.tolerance
            && self.verdict == o.verdict
    }
}

impl ConvergenceReport {
    fn new(theorem_id: &str, seed: u64, n_values: Vec<usize>, discrepancies: Vec<f64>, tolerance: f64) -> Self {
        let verdict = verdict(&discrepancies, tolerance);
        Self {
            theorem_id: theorem_id.to_string(),
            seed,
            n_values,
            discrepancies,
            secondary: None,
            tolerance,
            verdict,
            runtime: Duration::ZERO,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::InvalidArgument(format!("unknown report format '{s}'"))),
        }
    }
}

pub const CSV_HEADER: [&str; 7] = ["theorem_id", "seed", "n", "discrepancy", "tolerance", "verdict", "secondary"];

/// The report as CSV (one row per `n`) or pretty JSON.
pub fn render_report(report: &ConvergenceReport, format: ReportFormat) -> std::io::Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_vec_pretty(report)?;
            s.push(b'\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(CSV_HEADER)?;
            for (i, (n, d)) in report.n_values.iter().zip(&report.discrepancies).enumerate() {
                let secondary = report.secondary.as_ref().map_or(String::new(), |s| s[i].to_string());
                w.write_record([
                    report.theorem_id.clone(),
                    report.seed.to_string(),
                    n.to_string(),
                    d.to_string(),
                    report.tolerance.to_string(),
                    report.verdict.to_string(),
                    secondary,
                ])?;
            }
            w.into_inner().map_err(|e| e.into_error())
        }
    }
}

pub fn emit_report(report: &ConvergenceReport, format: ReportFormat, path: &Path) -> std::io::Result<()> {
    let bytes = render_report(report, format)?;
    let mut f = std::fs::File::create(path)?;
    f.write_all(&bytes)?;
    f.flush()
}

/// `n -> f_n` together with the limit `f`.
#[derive(Clone)]
pub struct Sequence {
    terms: Arc<dyn Fn(usize) -> Integrand + Send + Sync>,
    pub limit: Integrand,
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sequence").field("limit", &self.limit).finish_non_exhaustive()
    }
}

impl Sequence {
    pub fn new(terms: impl Fn(usize) -> Integrand + Send + Sync + 'static, limit: Integrand) -> Self {
        Self { terms: Arc::new(terms), limit }
    }

    pub fn term(&self, n: usize) -> Integrand {
        (self.terms)(n)
    }
}

/// Vector dominated convergence: `int_E f_n dmu -> int_E f dmu` uniformly over `family`.
#[derive(Debug, Clone)]
pub struct DctConfig {
    pub theorem_id: String,
    pub seed: u64,
    pub measure: VectorMeasure,
    pub domain: MeasurableSet,
    pub sequence: Sequence,
    pub dominator: Integrand,
    pub n_values: Vec<usize>,
    pub tol: f64,
    pub hk_tol: f64,
    pub grid: DirectionGrid,
    /// Sets over which the convergence must be uniform; empty means [`default_family`].
    pub family: Vec<MeasurableSet>,
}

/// [`DctConfig`] with a constant bound `|f_n| <= bound`.
#[derive(Debug, Clone)]
pub struct BctConfig {
    pub theorem_id: String,
    pub seed: u64,
    pub measure: VectorMeasure,
    pub domain: MeasurableSet,
    pub sequence: Sequence,
    pub bound: f64,
    pub n_values: Vec<usize>,
    pub tol: f64,
    pub hk_tol: f64,
    pub grid: DirectionGrid,
    pub family: Vec<MeasurableSet>,
}

/// Set-valued convergence `(HKL) int_T f_n dM -> (HKL) int_T f dM` in the Hausdorff metric.
#[derive(Debug, Clone)]
pub struct SvConfig {
    pub theorem_id: String,
    pub seed: u64,
    pub measure: SetValuedMeasure,
    pub domain: MeasurableSet,
    pub sequence: Sequence,
    /// `g` with `|f_n| <= g`.
    pub dominator: Option<Integrand>,
    /// `(eps, delta)`: `|M|(A) <= delta` must give `int_A |f_n| d|M| <= eps` for every `n`.
    pub uniform_integrability: Vec<(f64, f64)>,
    pub n_values: Vec<usize>,
    pub tol: f64,
    pub hk_tol: f64,
    pub grid: Arc<DirectionGrid>,
}

/// 50 dyadic subintervals of the hull of `domain` and 50 seeded random unions of up to three intervals.
pub fn default_family(domain: &MeasurableSet, seed: u64) -> Result<Vec<MeasurableSet>> {
    let hull = domain.hull().ok_or_else(|| Error::InvalidArgument("empty domain".into()))?;
    if !hull.is_bounded() {
        return Err(Error::InvalidArgument("the default set family needs a bounded domain".into()));
    }
    let (lo, hi) = (hull.lo, hull.hi);
    let mut out: Vec<MeasurableSet> =
        dyadic_family(lo, hi, 5)?.into_iter().take(DYADIC_SETS).map(|s| s.intersect(domain)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_SETS {
        let k = rng.gen_range(1..=3);
        let parts = (0..k)
            .map(|_| {
                let (a, b): (f64, f64) = (rng.gen_range(lo..hi), rng.gen_range(lo..hi));
                Interval::closed(a.min(b), a.max(b))
            })
            .collect::<Result<Vec<_>>>()?;
        out.push(MeasurableSet::from_intervals(parts).intersect(domain));
    }
    Ok(out)
}

fn sample_points(domain: &MeasurableSet, extra: &[f64]) -> Vec<f64> {
    let mut pts = Vec::new();
    for p in domain.parts() {
        if p.is_bounded() {
            let n = PRECHECK_SAMPLES as f64;
            pts.extend((0..=PRECHECK_SAMPLES).map(|k| p.lo + (p.hi - p.lo) * k as f64 / n).filter(|t| p.contains(*t)));
        } else {
            pts.extend((0..PRECHECK_SAMPLES).map(|k| p.lo + k as f64 / (PRECHECK_SAMPLES - k) as f64).filter(|t| p.contains(*t)));
        }
    }
    pts.extend(extra.iter().copied().filter(|t| domain.contains(*t)));
    pts
}

fn check_domination(seq: &Sequence, g: &Integrand, domain: &MeasurableSet, null: &MeasurableSet, ns: &[usize]) -> Result<()> {
    let live = domain.difference(null);
    for &n in ns {
        let f = seq.term(n);
        let mut extra: Vec<f64> = f.breakpoints().to_vec();
        extra.extend_from_slice(g.breakpoints());
        for t in sample_points(&live, &extra) {
            let (v, b) = (f.eval(t).abs(), g.eval(t).abs());
            if !(v <= b + 1e-12 * (1.0 + b)) {
                return Err(Error::GeneratorViolatesDomination(format!("|f_{n}({t})| = {v} exceeds g({t}) = {b}")));
            }
        }
    }
    Ok(())
}

fn validate_common(ns: &[usize], tol: f64, hk_tol: f64) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::InvalidArgument("no n values".into()));
    }
    for t in [tol, hk_tol] {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidTolerance(t));
        }
    }
    Ok(())
}

/// Dominated convergence against a vector measure.
pub fn run_dct(cfg: &DctConfig) -> Result<ConvergenceReport> {
    let start = Instant::now();
    validate_common(&cfg.n_values, cfg.tol, cfg.hk_tol)?;
    let null = cfg.measure.null_sets().iter().fold(MeasurableSet::empty(), |acc, s| acc.union(s));
    check_domination(&cfg.sequence, &cfg.dominator, &cfg.domain, &null, &cfg.n_values)?;
    let family = if cfg.family.is_empty() { default_family(&cfg.domain, cfg.seed)? } else { cfg.family.clone() };
    let opts = HkOptions::new(cfg.hk_tol);
    let mu = &cfg.measure;
    let limit = mu.indefinite_integral(&cfg.sequence.limit, &family, &cfg.grid, &opts, KlMode::Signed)?;
    let rows = cfg.grid.to_rows();
    let variations = rows
        .iter()
        .map(|u| mu.apply_functional(u)?.total_variation())
        .collect::<Result<Vec<ScalarMeasure>>>()?;
    let per_n = try_map_ordered(&cfg.n_values, |&n| {
        let f_n = cfg.sequence.term(n);
        let mut sup = 0.0f64;
        for (a, x) in family.iter().zip(&limit) {
            let y = mu.kl_henstock_integral(&f_n, a, &cfg.grid, &opts, KlMode::Signed)?;
            let diff: Vec<f64> = y.x.iter().zip(&x.x).map(|(p, q)| p - q).collect();
            sup = sup.max(mu.norm().norm(&diff));
        }
        let gap = f_n.linear_combination(1.0, &cfg.sequence.limit, -1.0).abs();
        let mut l1 = 0.0f64;
        for v in &variations {
            l1 = l1.max(hk_integrate(&gap, &cfg.domain, v, &opts)?.value);
        }
        Ok::<_, Error>((sup, l1))
    })?;
    let mut report =
        ConvergenceReport::new(&cfg.theorem_id, cfg.seed, cfg.n_values.clone(), per_n.iter().map(|p| p.0).collect(), cfg.tol);
    report.secondary = Some(per_n.iter().map(|p| p.1).collect());
    report.runtime = start.elapsed();
    Ok(report)
}

/// Bounded convergence: [`run_dct`] with `g` the constant bound.
pub fn run_bct(cfg: &BctConfig) -> Result<ConvergenceReport> {
    if !(cfg.bound >= 0.0 && cfg.bound.is_finite()) {
        return Err(Error::GeneratorViolatesDomination(format!("bound {} is not a finite nonnegative number", cfg.bound)));
    }
    run_dct(&DctConfig {
        theorem_id: cfg.theorem_id.clone(),
        seed: cfg.seed,
        measure: cfg.measure.clone(),
        domain: cfg.domain.clone(),
        sequence: cfg.sequence.clone(),
        dominator: Integrand::constant(cfg.bound),
        n_values: cfg.n_values.clone(),
        tol: cfg.tol,
        hk_tol: cfg.hk_tol,
        grid: cfg.grid.clone(),
        family: cfg.family.clone(),
    })
}

fn sv_gaps(cfg: &SvConfig) -> Result<ConvergenceReport> {
    let start = Instant::now();
    let opts = HkOptions::new(cfg.hk_tol);
    let m = &cfg.measure;
    let limit = m.kl_henstock_integral(&cfg.sequence.limit, &cfg.domain, &cfg.grid, &opts)?;
    let gaps = try_map_ordered(&cfg.n_values, |&n| {
        m.kl_henstock_integral(&cfg.sequence.term(n), &cfg.domain, &cfg.grid, &opts)?.hausdorff(&limit)
    })?;
    let mut report = ConvergenceReport::new(&cfg.theorem_id, cfg.seed, cfg.n_values.clone(), gaps, cfg.tol);
    report.runtime = start.elapsed();
    Ok(report)
}

fn check_sv_common(cfg: &SvConfig) -> Result<()> {
    validate_common(&cfg.n_values, cfg.tol, cfg.hk_tol)?;
    for &n in &cfg.n_values {
        check_nonnegative(&cfg.sequence.term(n), &cfg.domain)
            .map_err(|e| Error::GeneratorViolatesDomination(format!("f_{n}: {e}")))?;
    }
    Ok(())
}

fn set_norm_fn(m: &SetValuedMeasure, grid: &Arc<DirectionGrid>) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
    let (density, grid) = (m.density().clone(), grid.clone());
    move |t| {
        let g = density.at(t);
        grid.iter().map(|u| g.support(u, grid.norm()).abs()).fold(0.0, f64::max)
    }
}

/// `t -> H(Gamma(t), {0})`, the density of `|M|` with respect to the base.
fn set_norm_integrand(m: &SetValuedMeasure, grid: &Arc<DirectionGrid>) -> Integrand {
    Integrand::new(set_norm_fn(m, grid)).with_breakpoints(m.density().breakpoints())
}

/// Uniform integrability checked on intervals short enough that their `|M|`-mass is at most `delta`.
fn check_uniform_integrability(cfg: &SvConfig) -> Result<()> {
    if cfg.uniform_integrability.is_empty() {
        return Err(Error::GeneratorViolatesDomination("no uniform integrability table".into()));
    }
    let m = &cfg.measure;
    let hull = cfg.domain.hull().filter(Interval::is_bounded).ok_or_else(|| {
        Error::GeneratorViolatesDomination("uniform integrability is sampled on bounded domains only".into())
    })?;
    let set_norm = set_norm_fn(m, &cfg.grid);
    let bp = m.density().breakpoints();
    let base_density = m.base().density.clone();
    // upper bound of the |M| density, atoms excluded
    let peak = sample_points(&cfg.domain, &bp).into_iter().map(|t| set_norm(t) * base_density.eval(t)).fold(0.0, f64::max);
    if m.base().atoms().iter().any(|a| cfg.domain.contains(a.0) && a.1 > 0.0) {
        return Err(Error::GeneratorViolatesDomination("uniform integrability check needs an atomless base".into()));
    }
    let opts = HkOptions::new(cfg.hk_tol);
    let mass = set_norm_integrand(m, &cfg.grid);
    for &(eps, delta) in &cfg.uniform_integrability {
        let w = if peak > 0.0 { delta / peak } else { hull.width() };
        for k in 0..16 {
            let lo = hull.lo + (hull.width() - w).max(0.0) * k as f64 / 15.0;
            let a = MeasurableSet::closed(lo, (lo + w).min(hull.hi))?.intersect(&cfg.domain);
            for &n in &cfg.n_values {
                let v = hk_integrate(&cfg.sequence.term(n).abs().product(&mass), &a, m.base(), &opts)?.value;
                if v > eps {
                    return Err(Error::GeneratorViolatesDomination(format!(
                        "int_A |f_{n}| d|M| = {v} > {eps} on a set of |M|-mass <= {delta}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Vitali convergence for set-valued integrals.
pub fn run_vitali_sv(cfg: &SvConfig) -> Result<ConvergenceReport> {
    check_sv_common(cfg)?;
    check_uniform_integrability(cfg)?;
    sv_gaps(cfg)
}

/// Dominated convergence for set-valued integrals.
pub fn run_dct_sv(cfg: &SvConfig) -> Result<ConvergenceReport> {
    check_sv_common(cfg)?;
    let g = cfg.dominator.as_ref().ok_or_else(|| Error::GeneratorViolatesDomination("no dominating function".into()))?;
    let null = MeasurableSet::empty();
    check_domination(&cfg.sequence, g, &cfg.domain, &null, &cfg.n_values)?;
    let opts = HkOptions::new(cfg.hk_tol);
    let weighted = g.abs().product(&set_norm_integrand(&cfg.measure, &cfg.grid));
    match hk_integrate(&weighted, &cfg.domain, cfg.measure.base(), &opts) {
        Ok(r) if r.value.is_finite() => {}
        _ => return Err(Error::GeneratorViolatesDomination("dominating function is not |M|-integrable".into())),
    }
    sv_gaps(cfg)
}

/// The experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    Dct,
    Bct,
    VitaliSv,
    DctSv,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [Theorem::Dct, Theorem::Bct, Theorem::VitaliSv, Theorem::DctSv];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::Dct => "dct",
            Theorem::Bct => "bct",
            Theorem::VitaliSv => "vitali-sv",
            Theorem::DctSv => "dct-sv",
        }
    }

    /// Names of the built-in instances; the first is the default.
    pub fn instances(self) -> &'static [&'static str] {
        match self {
            Theorem::Dct => &["oscillating", "ramp", "constant"],
            Theorem::Bct => &["power", "constant", "alternating"],
            Theorem::VitaliSv => &["shift", "modulated", "constant"],
            Theorem::DctSv => &["ramp", "constant", "violating"],
        }
    }
}

impl std::str::FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Theorem::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown theorem '{s}', expected one of dct, bct, vitali-sv, dct-sv")))
    }
}

/// A configured run of one of the four harnesses.
#[derive(Debug, Clone)]
pub enum Experiment {
    Dct(DctConfig),
    Bct(BctConfig),
    VitaliSv(SvConfig),
    DctSv(SvConfig),
}

impl Experiment {
    pub fn run(&self) -> Result<ConvergenceReport> {
        match self {
            Experiment::Dct(c) => run_dct(c),
            Experiment::Bct(c) => run_bct(c),
            Experiment::VitaliSv(c) => run_vitali_sv(c),
            Experiment::DctSv(c) => run_dct_sv(c),
        }
    }
}

fn unit() -> MeasurableSet {
    MeasurableSet::closed(0.0, 1.0).expect("valid interval")
}

fn planar_grid() -> DirectionGrid {
    DirectionGrid::new(2, SpaceNorm::Euclidean, LAB_GRID_SIZE).expect("valid grid")
}

fn ramp(n: usize) -> Integrand {
    let n = n as f64;
    Integrand::new(move |t: f64| (n * t).clamp(0.0, 1.0)).with_breakpoints([1.0 / n])
}

fn ball_measure(radius: f64) -> Result<SetValuedMeasure> {
    let g = Generator::Ball { center: vec![0.0, 0.0], radius };
    SetValuedMeasure::new(SetValuedDensity::constant(&g, 0.0, 1.0), ScalarMeasure::lebesgue())
}

/// A built-in instance on `[0, 1]`.
///
/// The vector experiments use `mu = (Leb, 2t Leb)` except `bct/power`, whose
/// measure `((1 - t) Leb, t (1 - t) Leb)` vanishes at the point where `t^n`
/// fails to converge to zero; the set-valued ones use balls of radius 1/2
/// (`vitali-sv`) and 1 (`dct-sv`) under Lebesgue measure.
pub fn builtin(theorem: Theorem, instance: &str, seed: u64, n_values: Option<Vec<usize>>, tol: Option<f64>) -> Result<Experiment> {
    let tol = tol.unwrap_or(DEFAULT_TOL);
    let hk_tol = tol * HK_TOL_FRACTION;
    let ns = n_values.unwrap_or_else(|| DEFAULT_N_VALUES.to_vec());
    let id = format!("{}/{}", theorem.name(), instance);
    let unknown = || Error::InvalidArgument(format!("unknown {} instance '{instance}'", theorem.name()));
    let lin = |c: Vec<f64>| ScalarMeasure::new(Density::poly(0.0, 1.0, Poly::new(c)));
    let standard = || VectorMeasure::new(vec![ScalarMeasure::lebesgue_on(0.0, 1.0), lin(vec![0.0, 2.0])], SpaceNorm::Euclidean);
    match theorem {
        Theorem::Dct => {
            let (sequence, dominator) = match instance {
                "oscillating" => (
                    Sequence::new(|n| Integrand::new(move |t: f64| t + (n as f64 * t).sin() / n as f64), Integrand::new(|t: f64| t)),
                    Integrand::constant(2.0),
                ),
                "ramp" => (Sequence::new(ramp, Integrand::new(|t: f64| if t > 0.0 { 1.0 } else { 0.0 }).with_breakpoints([0.0])), Integrand::constant(1.0)),
                "constant" => (Sequence::new(|_| Integrand::new(|t: f64| t * t), Integrand::new(|t: f64| t * t)), Integrand::constant(1.0)),
                _ => return Err(unknown()),
            };
            Ok(Experiment::Dct(DctConfig {
                theorem_id: id,
                seed,
                measure: standard()?,
                domain: unit(),
                sequence,
                dominator,
                n_values: ns,
                tol,
                hk_tol,
                grid: planar_grid(),
                family: Vec::new(),
            }))
        }
        Theorem::Bct => {
            let (sequence, measure, ns) = match instance {
                "power" => (
                    Sequence::new(|n| Integrand::new(move |t: f64| t.powi(n as i32)), Integrand::zero()),
                    VectorMeasure::new(vec![lin(vec![1.0, -1.0]), lin(vec![0.0, 1.0, -1.0])], SpaceNorm::Euclidean)?,
                    ns,
                ),
                "constant" => (Sequence::new(|_| Integrand::constant(0.5), Integrand::constant(0.5)), standard()?, ns),
                // consecutive n so the sign actually alternates
                "alternating" => {
                    let last = *ns.last().unwrap_or(&1000);
                    let ns = (last.saturating_sub(5).max(1)..=last).collect();
                    (Sequence::new(|n| Integrand::constant(if n % 2 == 0 { 1.0 } else { -1.0 }), Integrand::constant(1.0)), standard()?, ns)
                }
                _ => return Err(unknown()),
            };
            Ok(Experiment::Bct(BctConfig {
                theorem_id: id,
                seed,
                measure,
                domain: unit(),
                sequence,
                bound: 1.0,
                n_values: ns,
                tol,
                hk_tol,
                grid: planar_grid(),
                family: Vec::new(),
            }))
        }
        Theorem::VitaliSv => {
            let sequence = match instance {
                "shift" => Sequence::new(|n| Integrand::new(move |t: f64| t + 1.0 / n as f64), Integrand::new(|t: f64| t)),
                "modulated" => Sequence::new(
                    |n| Integrand::new(move |t: f64| t * (1.0 + (n as f64 * t).sin() / n as f64)),
                    Integrand::new(|t: f64| t),
                ),
                "constant" => Sequence::new(|_| Integrand::new(|t: f64| t), Integrand::new(|t: f64| t)),
                _ => return Err(unknown()),
            };
            Ok(Experiment::VitaliSv(SvConfig {
                theorem_id: id,
                seed,
                measure: ball_measure(0.5)?,
                domain: unit(),
                sequence,
                dominator: None,
                uniform_integrability: vec![(0.1, 0.05), (0.01, 0.005)],
                n_values: ns,
                tol,
                hk_tol,
                grid: Arc::new(planar_grid()),
            }))
        }
        Theorem::DctSv => {
            let sequence = match instance {
                "ramp" => Sequence::new(ramp, Integrand::constant(1.0)),
                "constant" => Sequence::new(|_| Integrand::constant(0.5), Integrand::constant(0.5)),
                "violating" => Sequence::new(|_| Integrand::constant(2.0), Integrand::constant(2.0)),
                _ => return Err(unknown()),
            };
            Ok(Experiment::DctSv(SvConfig {
                theorem_id: id,
                seed,
                measure: ball_measure(1.0)?,
                domain: unit(),
                sequence,
                dominator: Some(Integrand::constant(1.0)),
                uniform_integrability: Vec::new(),
                n_values: ns,
                tol,
                hk_tol,
                grid: Arc::new(planar_grid()),
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rule() {
        assert_eq!(verdict(&[], 1e-3), Verdict::Fail);
        assert_eq!(verdict(&[1.0, 1.0, 1.5e-3, 5e-4], 1e-3), Verdict::Pass);
        assert_eq!(verdict(&[1.0, 1.0, 2.5e-3, 5e-4], 1e-3), Verdict::Fail);
        assert_eq!(verdict(&[1e-4, 1e-4, 1e-4, 1e-3], 1e-3), Verdict::Fail);
    }

    fn sample_report(rows: usize) -> ConvergenceReport {
        let ns: Vec<usize> = (1..=rows).map(|k| 10 * k).collect();
        let d: Vec<f64> = ns.iter().map(|n| 1.0 / *n as f64).collect();
        ConvergenceReport::new("dct/test", 7, ns, d, 0.2)
    }

    #[test]
    fn csv_layout() {
        let empty = render_report(&sample_report(0), ReportFormat::Csv).unwrap();
        assert_eq!(String::from_utf8(empty).unwrap(), "theorem_id,seed,n,discrepancy,tolerance,verdict,secondary\n");
        let three = String::from_utf8(render_report(&sample_report(3), ReportFormat::Csv).unwrap()).unwrap();
        let lines: Vec<&str> = three.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "dct/test,7,10,0.1,0.2,pass,");
        assert_eq!(three, String::from_utf8(render_report(&sample_report(3), ReportFormat::Csv).unwrap()).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let mut r = sample_report(3);
        r.secondary = Some(vec![0.5, 0.25, 1.0 / 3.0]);
        let bytes = render_report(&r, ReportFormat::Json).unwrap();
        let back: ConvergenceReport = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn emit_surfaces_io_errors() {
        let err = emit_report(&sample_report(1), ReportFormat::Csv, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert_eq!(err.kind(), std::io::ErrorKind::NotFound);
    }

    #[test]
    fn default_family_is_seeded() {
        let a = default_family(&unit(), 3).unwrap();
        assert_eq!(a.len(), 100);
        assert_eq!(a, default_family(&unit(), 3).unwrap());
        assert_ne!(a, default_family(&unit(), 4).unwrap());
    }

    #[test]
    fn constant_sequences_pass_immediately() {
        for (th, inst) in [(Theorem::Dct, "constant"), (Theorem::Bct, "constant"), (Theorem::VitaliSv, "constant"), (Theorem::DctSv, "constant")] {
            let r = builtin(th, inst, 1, Some(vec![1, 2]), None).unwrap().run().unwrap();
            assert_eq!(r.verdict, Verdict::Pass, "{th:?}");
            assert!(r.discrepancies.iter().all(|d| *d <= 3.0 * DEFAULT_TOL * HK_TOL_FRACTION), "{r:?}");
        }
    }

    #[test]
    fn preconditions_are_enforced() {
        let e = builtin(Theorem::DctSv, "violating", 1, None, None).unwrap().run().unwrap_err();
        assert!(matches!(e, Error::GeneratorViolatesDomination(_)), "{e}");
        assert!(builtin(Theorem::Dct, "nope", 1, None, None).is_err());
        assert!("dtc".parse::<Theorem>().is_err());
    }
}
