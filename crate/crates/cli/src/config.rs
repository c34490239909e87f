//! TOML configuration: named measures, integrands and experiments.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use gauge_measure::lab::{self, BctConfig, DctConfig, Experiment, Sequence, SvConfig, Theorem};
use gauge_measure::{
    DirectionGrid, Integrand, Interval, MeasurableSet, ScalarMeasure, SetValuedDensity, SetValuedMeasure, SpaceNorm,
    VectorMeasure,
};
use serde::Deserialize;

use crate::expr::Expr;

pub const DEFAULT_TOL: f64 = 1e-8;

/// A configuration problem; reported with exit code 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub type CResult<T> = Result<T, ConfigError>;

fn cerr<T>(msg: impl Into<String>) -> CResult<T> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    /// Default integration set, e.g. `"[0,1]"` or `"[0,inf]"` to include `+inf`.
    pub domain: Option<String>,
    #[serde(default)]
    pub space: Space,
    #[serde(default)]
    pub measures: BTreeMap<String, MeasureSpec>,
    #[serde(default)]
    pub integrands: BTreeMap<String, IntegrandSpec>,
    #[serde(default)]
    pub vector_measures: BTreeMap<String, VectorSpec>,
    #[serde(default)]
    pub set_measures: BTreeMap<String, SetMeasureSpec>,
    #[serde(default)]
    pub experiments: BTreeMap<String, ExperimentSpec>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Space {
    pub norm: Option<String>,
    /// Number of grid directions (planar and 3D grids).
    pub grid: Option<usize>,
    #[serde(default)]
    pub hemisphere: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureSpec {
    pub density: Option<String>,
    pub support: Option<[f64; 2]>,
    #[serde(default)]
    pub atoms: Vec<[f64; 2]>,
    pub tail_mass: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegrandSpec {
    pub expr: String,
    #[serde(default)]
    pub exempt: Vec<f64>,
    #[serde(default)]
    pub breakpoints: Vec<f64>,
    pub at_infinity: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorSpec {
    pub components: Vec<String>,
    pub norm: Option<String>,
    #[serde(default)]
    pub null_sets: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SetMeasureSpec {
    pub shape: String,
    pub center: Vec<String>,
    pub radius: Option<String>,
    pub radii: Option<Vec<String>>,
    pub generators: Option<Vec<Vec<String>>>,
    pub base: Option<String>,
    pub support: Option<[f64; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub theorem: String,
    pub instance: Option<String>,
    pub seed: Option<u64>,
    pub n: Option<Vec<usize>>,
    pub tol: Option<f64>,
    pub format: Option<String>,
    pub output: Option<String>,
    /// Custom sequence `f_n` in `t` and `n`; replaces the built-in instance.
    pub sequence: Option<String>,
    pub limit: Option<String>,
    pub dominator: Option<String>,
    pub bound: Option<f64>,
    /// Vector measure (dct, bct) or set-valued measure (vitali-sv, dct-sv).
    pub measure: Option<String>,
    pub domain: Option<String>,
    pub uniform_integrability: Option<Vec<[f64; 2]>>,
}

impl Config {
    pub fn parse(text: &str) -> CResult<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| ConfigError(format!("config error: {e}")))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
    }

    fn check(&self) -> CResult<()> {
        let mut tols: Vec<(String, f64)> = self.tol.map(|t| ("tol".to_string(), t)).into_iter().collect();
        tols.extend(self.experiments.iter().filter_map(|(k, e)| e.tol.map(|t| (format!("experiments.{k}.tol"), t))));
        for (k, t) in tols {
            if !(t > 0.0 && t.is_finite()) {
                return cerr(format!("config error: {k} must be positive, got {t}"));
            }
        }
        Ok(())
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(DEFAULT_TOL)
    }

    pub fn default_set(&self) -> CResult<MeasurableSet> {
        parse_set(self.domain.as_deref().unwrap_or("[0,1]"))
    }

    pub fn norm(&self) -> CResult<SpaceNorm> {
        parse_norm(self.space.norm.as_deref().unwrap_or("euclidean"))
    }

    pub fn grid(&self, dim: usize, norm: SpaceNorm, size: Option<usize>, hemisphere: bool) -> CResult<DirectionGrid> {
        let g = match size.or(self.space.grid) {
            Some(n) => DirectionGrid::new(dim, norm, n),
            None => DirectionGrid::default_for(dim, norm),
        }
        .map_err(|e| ConfigError(e.to_string()))?;
        Ok(if hemisphere || self.space.hemisphere { g.hemisphere() } else { g })
    }

    pub fn scalar_measure(&self, name: &str) -> CResult<ScalarMeasure> {
        match self.measures.get(name) {
            Some(spec) => build_measure(name, spec),
            None if name == "lebesgue" => Ok(ScalarMeasure::lebesgue()),
            None => cerr(format!("unknown measure '{name}'")),
        }
    }

    pub fn vector_measure(&self, name: &str) -> CResult<VectorMeasure> {
        let spec = self.vector_measures.get(name).ok_or_else(|| ConfigError(format!("unknown vector measure '{name}'")))?;
        let comps = spec.components.iter().map(|c| self.scalar_measure(c)).collect::<CResult<Vec<_>>>()?;
        let norm = match &spec.norm {
            Some(n) => parse_norm(n)?,
            None => self.norm()?,
        };
        let nulls = spec.null_sets.iter().map(|s| parse_set(s)).collect::<CResult<Vec<_>>>()?;
        Ok(VectorMeasure::new(comps, norm).map_err(|e| ConfigError(e.to_string()))?.with_null_sets(nulls))
    }

    pub fn set_measure(&self, name: &str) -> CResult<SetValuedMeasure> {
        let spec = self.set_measures.get(name).ok_or_else(|| ConfigError(format!("unknown set-valued measure '{name}'")))?;
        let base = self.scalar_measure(spec.base.as_deref().unwrap_or("lebesgue"))?;
        build_set_measure(name, spec, base)
    }

    pub fn integrand(&self, name: &str) -> CResult<Integrand> {
        let spec = self.integrands.get(name).ok_or_else(|| ConfigError(format!("unknown integrand '{name}'")))?;
        let e = parse_expr(&format!("integrands.{name}.expr"), &spec.expr)?;
        let mut f = integrand_of(&e).with_breakpoints(spec.breakpoints.iter().copied()).with_exempt(spec.exempt.iter().copied());
        if let Some(v) = spec.at_infinity {
            f = f.with_value_at_infinity(v);
        }
        Ok(f)
    }

    /// Built-in or custom experiment from an `[experiments.*]` entry.
    pub fn experiment(&self, name: &str) -> CResult<(Experiment, &ExperimentSpec)> {
        let spec = self.experiments.get(name).ok_or_else(|| ConfigError(format!("unknown experiment '{name}'")))?;
        Ok((self.build_experiment(spec)?, spec))
    }

    pub fn build_experiment(&self, spec: &ExperimentSpec) -> CResult<Experiment> {
        let theorem: Theorem = spec.theorem.parse().map_err(|e: gauge_measure::Error| ConfigError(e.to_string()))?;
        let seed = spec.seed.or(self.seed).unwrap_or(0);
        let Some(seq_src) = &spec.sequence else {
            let inst = spec.instance.as_deref().unwrap_or(theorem.instances()[0]);
            return lab::builtin(theorem, inst, seed, spec.n.clone(), spec.tol).map_err(|e| ConfigError(e.to_string()));
        };
        let seq = parse_sequence("sequence", seq_src)?;
        let limit = parse_expr("limit", spec.limit.as_deref().ok_or_else(|| ConfigError("custom experiment needs 'limit'".into()))?)?;
        let sequence = {
            let seq = seq.clone();
            Sequence::new(move |n| Integrand::new(seq.closure_at(n as f64)).with_breakpoints(seq.breakpoints()), integrand_of(&limit))
        };
        let tol = spec.tol.unwrap_or(lab::DEFAULT_TOL);
        let hk_tol = tol * lab::HK_TOL_FRACTION;
        let n_values = spec.n.clone().unwrap_or_else(|| lab::DEFAULT_N_VALUES.to_vec());
        let domain = match &spec.domain {
            Some(d) => parse_set(d)?,
            None => self.default_set()?,
        };
        let measure_name = spec.measure.as_deref().ok_or_else(|| ConfigError("custom experiment needs 'measure'".into()))?;
        let theorem_id = format!("{}/custom", theorem.name());
        let dominator = spec.dominator.as_deref().map(|d| parse_expr("dominator", d).map(|e| integrand_of(&e))).transpose()?;
        Ok(match theorem {
            Theorem::Dct | Theorem::Bct => {
                let measure = self.vector_measure(measure_name)?;
                let grid = self.grid(measure.dim(), measure.norm(), Some(lab::LAB_GRID_SIZE), false)?;
                if theorem == Theorem::Dct {
                    let dominator = dominator.ok_or_else(|| ConfigError("dct experiment needs 'dominator'".into()))?;
                    Experiment::Dct(DctConfig { theorem_id, seed, measure, domain, sequence, dominator, n_values, tol, hk_tol, grid, family: Vec::new() })
                } else {
                    let bound = spec.bound.ok_or_else(|| ConfigError("bct experiment needs 'bound'".into()))?;
                    Experiment::Bct(BctConfig { theorem_id, seed, measure, domain, sequence, bound, n_values, tol, hk_tol, grid, family: Vec::new() })
                }
            }
            Theorem::VitaliSv | Theorem::DctSv => {
                let measure = self.set_measure(measure_name)?;
                let grid = Arc::new(self.grid(measure.dim(), self.norm()?, Some(lab::LAB_GRID_SIZE), false)?);
                let ui = spec.uniform_integrability.clone().unwrap_or_default().into_iter().map(|[e, d]| (e, d)).collect();
                let cfg = SvConfig { theorem_id, seed, measure, domain, sequence, dominator, uniform_integrability: ui, n_values, tol, hk_tol, grid };
                if theorem == Theorem::VitaliSv { Experiment::VitaliSv(cfg) } else { Experiment::DctSv(cfg) }
            }
        })
    }
}

pub fn parse_norm(s: &str) -> CResult<SpaceNorm> {
    s.parse().map_err(|e: gauge_measure::Error| ConfigError(e.to_string()))
}

pub fn parse_expr(key: &str, src: &str) -> CResult<Expr> {
    Expr::parse(src).map_err(|e| ConfigError(format!("{key}: {e} in \"{src}\"")))
}

pub fn parse_sequence(key: &str, src: &str) -> CResult<Expr> {
    Expr::parse_sequence(src).map_err(|e| ConfigError(format!("{key}: {e} in \"{src}\"")))
}

/// The expression as an integrand; constants also fix the value at `+inf`.
pub fn integrand_of(e: &Expr) -> Integrand {
    let f = Integrand::new(e.closure()).with_breakpoints(e.breakpoints());
    match e.constant() {
        Some(c) => f.with_value_at_infinity(c),
        None => f,
    }
}

fn build_measure(name: &str, spec: &MeasureSpec) -> CResult<ScalarMeasure> {
    let [lo, hi] = spec.support.unwrap_or([f64::NEG_INFINITY, f64::INFINITY]);
    if !(lo <= hi) {
        return cerr(format!("measures.{name}.support: lower end exceeds upper end"));
    }
    let density = match &spec.density {
        Some(src) => parse_expr(&format!("measures.{name}.density"), src)?.density(lo, hi),
        None => gauge_measure::Density::zero(),
    };
    let mut m = ScalarMeasure::new(density).with_atoms(spec.atoms.iter().map(|[x, w]| (*x, *w)));
    if let Some(t) = spec.tail_mass {
        m = m.with_tail_mass(t);
    }
    Ok(m)
}

pub fn build_set_measure(name: &str, spec: &SetMeasureSpec, base: ScalarMeasure) -> CResult<SetValuedMeasure> {
    let [lo, hi] = spec.support.unwrap_or([0.0, 1.0]);
    let key = |k: &str| format!("set_measures.{name}.{k}");
    let dens = |k: &str, v: &[String]| -> CResult<Vec<gauge_measure::Density>> {
        v.iter().map(|s| parse_expr(&key(k), s).map(|e| e.density(lo, hi))).collect()
    };
    let center = dens("center", &spec.center)?;
    let density = match spec.shape.as_str() {
        "ball" => {
            let r = spec.radius.as_deref().ok_or_else(|| ConfigError(format!("{} is required for a ball", key("radius"))))?;
            SetValuedDensity::Ball { center, radius: parse_expr(&key("radius"), r)?.density(lo, hi) }
        }
        "box" => {
            let r = spec.radii.as_deref().ok_or_else(|| ConfigError(format!("{} is required for a box", key("radii"))))?;
            SetValuedDensity::Box { center, radii: dens("radii", r)? }
        }
        "zonotope" => {
            let g = spec.generators.as_deref().ok_or_else(|| ConfigError(format!("{} is required for a zonotope", key("generators"))))?;
            SetValuedDensity::Zonotope { center, generators: g.iter().map(|row| dens("generators", row)).collect::<CResult<_>>()? }
        }
        other => return cerr(format!("{}: unknown shape '{other}', expected ball, box or zonotope", key("shape"))),
    };
    SetValuedMeasure::new(density, base).map_err(|e| ConfigError(format!("set_measures.{name}: {e}")))
}

/// `"[0,1]"`, `"(0,1] U [2,3)"`, `"{0.5}"`, `"[0,inf]"`, `"empty"`.
pub fn parse_set(s: &str) -> CResult<MeasurableSet> {
    let s = s.trim();
    if s.is_empty() || s == "empty" || s == "{}" {
        return Ok(MeasurableSet::empty());
    }
    let mut parts = Vec::new();
    for piece in s.split(['U', '\u{222a}']) {
        let p = piece.trim();
        let bad = || ConfigError(format!("bad set '{p}': expected [a,b], (a,b], [a,b), (a,b) or {{x}}"));
        let num = |x: &str| x.trim().parse::<f64>().map_err(|_| bad());
        if let Some(inner) = p.strip_prefix('{').and_then(|r| r.strip_suffix('}')) {
            parts.push(Interval::point(num(inner)?));
            continue;
        }
        let closed_lo = match p.chars().next() {
            Some('[') => true,
            Some('(') => false,
            _ => return Err(bad()),
        };
        let closed_hi = match p.chars().last() {
            Some(']') => true,
            Some(')') => false,
            _ => return Err(bad()),
        };
        let (a, b) = p[1..p.len() - 1].split_once(',').ok_or_else(bad)?;
        let i = Interval::new(num(a)?, num(b)?, closed_lo, closed_hi).map_err(|e| ConfigError(format!("bad set '{p}': {e}")))?;
        parts.push(i);
    }
    Ok(MeasurableSet::from_intervals(parts))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sets() {
        assert!(parse_set("empty").unwrap().is_empty());
        let s = parse_set("[0,1) U (2, 3]").unwrap();
        assert_eq!(s.parts().len(), 2);
        assert!(s.contains(0.0) && !s.contains(1.0) && !s.contains(2.0) && s.contains(3.0));
        assert!(parse_set("{0.5}").unwrap().contains(0.5));
        let c = parse_set("[0,inf]").unwrap();
        assert!(c.parts()[0].closed_hi && c.parts()[0].hi == f64::INFINITY);
        assert!(parse_set("[1,0]").is_err());
        assert!(parse_set("0,1").is_err());
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let e = Config::parse("tol = 1e-6\nbogus = 3\n").unwrap_err();
        assert!(e.0.contains("bogus") && e.0.contains("line 2"), "{e}");
        assert!(Config::parse("tol = -1.0").is_err());
        assert!(Config::parse("[measures.m]\ndensity = \"t\"\ncolor = 1").is_err());
    }

    #[test]
    fn builds_named_objects() {
        let cfg = Config::parse(
            r#"
            [measures.rho]
            density = "2*t"
            support = [0.0, 1.0]
            atoms = [[0.5, 1.0]]
            [vector_measures.mu]
            components = ["lebesgue", "rho"]
            [set_measures.M]
            shape = "box"
            center = ["t", "0"]
            radii = ["0", "1"]
            [integrands.f]
            expr = "t^2"
            exempt = [0.0]
            "#,
        )
        .unwrap();
        let rho = cfg.scalar_measure("rho").unwrap();
        assert!((rho.measure_of(&parse_set("[0,1]").unwrap()) - 2.0).abs() < 1e-15);
        assert_eq!(cfg.vector_measure("mu").unwrap().dim(), 2);
        assert_eq!(cfg.set_measure("M").unwrap().dim(), 2);
        assert_eq!(cfg.integrand("f").unwrap().exempt(), &[0.0]);
        assert!(cfg.scalar_measure("nope").is_err());
    }
}
