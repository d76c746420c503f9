//! Experiment configuration: one JSON document per run, with field overrides.

use std::fmt;
use std::path::PathBuf;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};
use sharpeig_core::{Diffusion1D, Domain};

use crate::error::{CliError, Context, Result};
use crate::expr::Expression;

/// Extended real in `(−∞, ∞]`; `"inf"` in JSON stands for `∞`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extended(pub f64);

impl Extended {
    pub const INFINITY: Self = Self(f64::INFINITY);
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        if self.0 == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(self.0)
        }
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Extended;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number or \"inf\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Extended, E> {
                Ok(Extended(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Extended, E> {
                Ok(Extended(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Extended, E> {
                Ok(Extended(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Extended, E> {
                match v {
                    "inf" | "infinity" | "∞" => Ok(Extended::INFINITY),
                    _ => Err(E::invalid_value(de::Unexpected::Str(v), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { lo: f64, hi: f64 },
    Circle { length: f64 },
}

impl DomainSpec {
    pub fn to_domain(self) -> Result<Domain> {
        match self {
            Self::Interval { lo, hi } => Domain::interval(lo, hi),
            Self::Circle { length } => Domain::circle(length),
        }
        .for_field("domain")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PtrigConfig {
    pub p: Vec<f64>,
    /// Sample points per period for the identity checks and the table.
    pub samples: usize,
    pub tol: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for PtrigConfig {
    fn default() -> Self {
        Self { p: vec![1.2, 2.0, 3.0, 7.0], samples: 10_000, tol: 1e-8, out_dir: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GammaConfig {
    pub domain: DomainSpec,
    pub sigma: Expression,
    pub drift: Expression,
    /// Test function for the pointwise identities.
    pub u: Expression,
    pub p: f64,
    pub n: Extended,
    pub k: usize,
    /// Relative tolerance for closed-form versus bracket agreement.
    pub tol: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for GammaConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::Interval { lo: 0.2, hi: 2.5 },
            sigma: Expression::new("1 + 0.3*sin(x)"),
            drift: Expression::new("cos(x)"),
            u: Expression::new("sin(x)"),
            p: 2.0,
            n: Extended::INFINITY,
            k: 401,
            tol: 1e-3,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub p: f64,
    pub lambda: f64,
    pub n: Extended,
    /// Start point of the solution written to CSV; `"inf"` selects `T ≡ 0`.
    pub a: Extended,
    pub a_grid: Vec<f64>,
    pub samples: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            lambda: 1.0,
            n: Extended(3.0),
            a: Extended(0.0),
            a_grid: vec![0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0],
            samples: 401,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EigConfig {
    pub p: f64,
    pub domain: DomainSpec,
    pub sigma: Expression,
    pub drift: Expression,
    pub k: usize,
    /// Seed of the random starts; required when `random_starts > 0`.
    pub seed: Option<u64>,
    pub random_starts: usize,
    /// Relative slack of the lower bound against discretization error.
    pub bound_tol: f64,
    /// Dimension of the matched model for the gradient comparison; skipped when absent.
    pub model_n: Option<Extended>,
    pub out_dir: Option<PathBuf>,
}

impl Default for EigConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            domain: DomainSpec::Interval { lo: 0.0, hi: std::f64::consts::PI },
            sigma: Expression::new("1"),
            drift: Expression::new("0"),
            k: 2000,
            seed: None,
            random_starts: 3,
            bound_tol: 1e-3,
            model_n: None,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeConfig {
    pub p: f64,
    pub n_dim: usize,
    pub diameter: f64,
    pub d_primes: Vec<f64>,
    pub k: usize,
    /// Relative tolerance for closed form versus circle mesh.
    pub tol: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for TubeConfig {
    fn default() -> Self {
        Self {
            p: 2.0,
            n_dim: 3,
            diameter: std::f64::consts::PI,
            d_primes: vec![0.5, 0.8, 0.9, 0.95, 0.99],
            k: 800,
            tol: 5e-3,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NonsymConfig {
    pub domain: DomainSpec,
    /// Drift `X`; defaults to `-x` unless a random family is requested.
    pub drift: Option<Expression>,
    /// Size of the seeded random trigonometric drift family.
    pub random_drifts: usize,
    pub seed: Option<u64>,
    pub k: usize,
    pub tol: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for NonsymConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::Interval { lo: -1.0, hi: 1.0 },
            drift: None,
            random_drifts: 0,
            seed: None,
            k: 1500,
            tol: 1e-4,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeatConfig {
    pub domain: DomainSpec,
    pub drift: Expression,
    /// `"eigenfunction"`, `"random"`, or an expression in `x`.
    pub v0: Expression,
    pub k: usize,
    /// Time step; defaults to the mesh spacing.
    pub dt: Option<f64>,
    /// End time; defaults to `5/λ̄`.
    pub t_end: Option<f64>,
    /// Required when `v0 = "random"`.
    pub seed: Option<u64>,
    pub snapshots: usize,
    /// Relative tolerance of the decay rate against `Re λ₁`.
    pub decay_tol: f64,
    pub out_dir: Option<PathBuf>,
}

impl Default for HeatConfig {
    fn default() -> Self {
        Self {
            domain: DomainSpec::Interval { lo: 0.0, hi: 2.0 },
            drift: Expression::new("-x + 0.5*sin(3*x)"),
            v0: Expression::new("eigenfunction"),
            k: 300,
            dt: None,
            t_end: None,
            seed: None,
            snapshots: 21,
            decay_tol: 1e-2,
            out_dir: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyAllConfig {
    pub seed: Option<u64>,
    /// Random drifts in the non-symmetric family.
    pub random_drifts: usize,
    pub out_dir: Option<PathBuf>,
}

impl Default for VerifyAllConfig {
    fn default() -> Self {
        Self { seed: None, random_drifts: 5, out_dir: None }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Ptrig(PtrigConfig),
    Gamma(GammaConfig),
    Model(ModelConfig),
    Eig(EigConfig),
    Tube(TubeConfig),
    Nonsym(NonsymConfig),
    Heat(HeatConfig),
    VerifyAll(VerifyAllConfig),
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::usage(format!("field `{field}` must be positive and finite, got {v}")))
    }
}

fn exponent(v: f64) -> Result<()> {
    if v > 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::usage(format!("field `p` must exceed 1, got {v}")))
    }
}

fn dimension(field: &str, n: Extended, min: f64) -> Result<()> {
    if n.0 >= min {
        Ok(())
    } else {
        Err(CliError::usage(format!("field `{field}` must be at least {min}, got {}", n.0)))
    }
}

fn nodes(k: usize) -> Result<()> {
    let min = sharpeig_core::Mesh1D::MIN_NODES;
    if k >= min {
        Ok(())
    } else {
        Err(CliError::usage(format!("field `k` must be at least {min}, got {k}")))
    }
}

fn seed_for(seed: Option<u64>, reason: &str) -> Result<u64> {
    seed.ok_or_else(|| CliError::usage(format!("field `seed` is required when {reason}")))
}

impl ExperimentConfig {
    pub fn command(&self) -> &'static str {
        match self {
            Self::Ptrig(_) => "ptrig",
            Self::Gamma(_) => "gamma",
            Self::Model(_) => "model",
            Self::Eig(_) => "eig",
            Self::Tube(_) => "tube",
            Self::Nonsym(_) => "nonsym",
            Self::Heat(_) => "heat",
            Self::VerifyAll(_) => "verify-all",
        }
    }

    pub fn out_dir(&self) -> Option<&PathBuf> {
        match self {
            Self::Ptrig(c) => c.out_dir.as_ref(),
            Self::Gamma(c) => c.out_dir.as_ref(),
            Self::Model(c) => c.out_dir.as_ref(),
            Self::Eig(c) => c.out_dir.as_ref(),
            Self::Tube(c) => c.out_dir.as_ref(),
            Self::Nonsym(c) => c.out_dir.as_ref(),
            Self::Heat(c) => c.out_dir.as_ref(),
            Self::VerifyAll(c) => c.out_dir.as_ref(),
        }
    }

    pub fn set_out_dir(&mut self, dir: PathBuf) {
        let slot = match self {
            Self::Ptrig(c) => &mut c.out_dir,
            Self::Gamma(c) => &mut c.out_dir,
            Self::Model(c) => &mut c.out_dir,
            Self::Eig(c) => &mut c.out_dir,
            Self::Tube(c) => &mut c.out_dir,
            Self::Nonsym(c) => &mut c.out_dir,
            Self::Heat(c) => &mut c.out_dir,
            Self::VerifyAll(c) => &mut c.out_dir,
        };
        *slot = Some(dir);
    }

    /// Range checks the schema cannot express.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Ptrig(c) => {
                if c.p.is_empty() {
                    return Err(CliError::usage("field `p` must list at least one exponent"));
                }
                c.p.iter().try_for_each(|&p| exponent(p))?;
                positive("tol", c.tol)?;
                if c.samples < 2 {
                    return Err(CliError::usage("field `samples` must be at least 2"));
                }
            }
            Self::Gamma(c) => {
                exponent(c.p)?;
                dimension("n", c.n, 1.0)?;
                positive("tol", c.tol)?;
                nodes(c.k)?;
            }
            Self::Model(c) => {
                exponent(c.p)?;
                positive("lambda", c.lambda)?;
                if !(c.n.0 > 1.0) {
                    return Err(CliError::usage(format!("field `n` must exceed 1, got {}", c.n.0)));
                }
                if !(c.a.0 >= 0.0) {
                    return Err(CliError::usage(format!("field `a` must be non-negative, got {}", c.a.0)));
                }
                if c.samples < 2 {
                    return Err(CliError::usage("field `samples` must be at least 2"));
                }
                if c.a_grid.is_empty() || c.a_grid.windows(2).any(|w| !(w[1] > w[0])) || !(c.a_grid[0] >= 0.0) {
                    return Err(CliError::usage("field `a_grid` must be non-empty, non-negative and increasing"));
                }
            }
            Self::Eig(c) => {
                exponent(c.p)?;
                nodes(c.k)?;
                positive("bound_tol", c.bound_tol)?;
                if let Some(n) = c.model_n {
                    dimension("model_n", n, 1.0 + f64::EPSILON)?;
                }
                if c.random_starts > 0 {
                    seed_for(c.seed, "random_starts > 0")?;
                }
            }
            Self::Tube(c) => {
                exponent(c.p)?;
                positive("diameter", c.diameter)?;
                positive("tol", c.tol)?;
                nodes(c.k)?;
                if c.n_dim < 2 {
                    return Err(CliError::usage(format!("field `n_dim` must be at least 2, got {}", c.n_dim)));
                }
                if c.d_primes.is_empty() {
                    return Err(CliError::usage("field `d_primes` must be non-empty"));
                }
            }
            Self::Nonsym(c) => {
                nodes(c.k)?;
                positive("tol", c.tol)?;
                if c.random_drifts > 0 {
                    seed_for(c.seed, "random_drifts > 0")?;
                    if c.drift.is_some() {
                        return Err(CliError::usage("fields `drift` and `random_drifts` are mutually exclusive"));
                    }
                }
            }
            Self::Heat(c) => {
                nodes(c.k)?;
                positive("decay_tol", c.decay_tol)?;
                if let Some(dt) = c.dt {
                    positive("dt", dt)?;
                }
                if let Some(t) = c.t_end {
                    positive("t_end", t)?;
                }
                if c.v0.0 == "random" {
                    seed_for(c.seed, "v0 = \"random\"")?;
                }
                if c.snapshots < 2 {
                    return Err(CliError::usage("field `snapshots` must be at least 2"));
                }
            }
            Self::VerifyAll(c) => {
                seed_for(c.seed, "running the full suite")?;
            }
        }
        Ok(())
    }
}

/// Builds `σu'' + Xu'` from expression fields.
pub fn operator(domain: DomainSpec, sigma: &Expression, drift: &Expression) -> Result<Diffusion1D> {
    let dom = domain.to_domain()?;
    let probe = dom.uniform_grid(257);
    let s = sigma.compile_on("sigma", &probe)?;
    let x = drift.compile_on("drift", &probe)?;
    Diffusion1D::new(dom, s, x).for_field("sigma")
}

/// Parses `--field value` / `--field=value` pairs into `(path, value)`.
/// Dashes in names become underscores; dots address nested objects.
/// Values are read as JSON when they parse, and as strings otherwise.
pub fn parse_overrides(args: &[String]) -> Result<Vec<(String, Value)>> {
    let mut out = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(body) = arg.strip_prefix("--") else {
            return Err(CliError::usage(format!("expected --field value, found `{arg}`")));
        };
        let (key, raw) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| CliError::usage(format!("flag --{body} needs a value")))?;
                (body.to_string(), v.clone())
            }
        };
        if key.is_empty() {
            return Err(CliError::usage("empty flag name"));
        }
        let value = serde_json::from_str(&raw).unwrap_or(Value::String(raw));
        out.push((key.replace('-', "_"), value));
    }
    Ok(out)
}

/// Merges a config document, the subcommand name and overrides, then
/// deserializes with field paths in error messages.
pub fn build(command: &str, base: Option<Value>, overrides: &[(String, Value)]) -> Result<ExperimentConfig> {
    let mut doc = match base {
        None => Map::new(),
        Some(Value::Object(m)) => m,
        Some(_) => return Err(CliError::usage("config must be a JSON object")),
    };
    match doc.get("command") {
        Some(Value::String(c)) if c != command => {
            return Err(CliError::usage(format!("config is for `{c}`, not `{command}`")));
        }
        Some(v) if !v.is_string() => return Err(CliError::usage("field `command` must be a string")),
        _ => {}
    }
    doc.remove("command");
    let mut merged = defaults(command)?;
    merged.extend(doc);
    let mut doc = merged;
    for (path, value) in overrides {
        if path == "command" {
            return Err(CliError::usage("field `command` is set by the subcommand"));
        }
        set_path(&mut doc, path, value.clone())?;
    }
    let body = Value::Object(doc);
    let config = match command {
        "ptrig" => ExperimentConfig::Ptrig(typed(command, body)?),
        "gamma" => ExperimentConfig::Gamma(typed(command, body)?),
        "model" => ExperimentConfig::Model(typed(command, body)?),
        "eig" => ExperimentConfig::Eig(typed(command, body)?),
        "tube" => ExperimentConfig::Tube(typed(command, body)?),
        "nonsym" => ExperimentConfig::Nonsym(typed(command, body)?),
        "heat" => ExperimentConfig::Heat(typed(command, body)?),
        "verify-all" => ExperimentConfig::VerifyAll(typed(command, body)?),
        other => return Err(CliError::usage(format!("unknown command `{other}`"))),
    };
    config.validate()?;
    Ok(config)
}

fn typed<T: serde::de::DeserializeOwned>(command: &str, body: Value) -> Result<T> {
    serde_path_to_error::deserialize(body).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            CliError::usage(format!("invalid {command} config: {}", e.inner()))
        } else {
            CliError::usage(format!("invalid {command} config: field `{path}`: {}", e.inner()))
        }
    })
}

/// Default field values of a command, the base that config files and flags overlay.
fn defaults(command: &str) -> Result<Map<String, Value>> {
    let config = match command {
        "ptrig" => ExperimentConfig::Ptrig(PtrigConfig::default()),
        "gamma" => ExperimentConfig::Gamma(GammaConfig::default()),
        "model" => ExperimentConfig::Model(ModelConfig::default()),
        "eig" => ExperimentConfig::Eig(EigConfig::default()),
        "tube" => ExperimentConfig::Tube(TubeConfig::default()),
        "nonsym" => ExperimentConfig::Nonsym(NonsymConfig::default()),
        "heat" => ExperimentConfig::Heat(HeatConfig::default()),
        "verify-all" => ExperimentConfig::VerifyAll(VerifyAllConfig::default()),
        other => return Err(CliError::usage(format!("unknown command `{other}`"))),
    };
    let Value::Object(mut m) = serde_json::to_value(config).expect("serializable defaults") else {
        unreachable!("configs serialize to objects")
    };
    m.remove("command");
    Ok(m)
}

fn set_path(doc: &mut Map<String, Value>, path: &str, value: Value) -> Result<()> {
    let mut parts = path.split('.').peekable();
    let mut node = doc;
    while let Some(part) = parts.next() {
        if parts.peek().is_none() {
            // a new variant tag invalidates the variant's other fields
            if part == "kind" && node.get("kind") != Some(&value) {
                node.clear();
            }
            node.insert(part.to_string(), value);
            return Ok(());
        }
        let entry = node.entry(part.to_string()).or_insert_with(|| Value::Object(Map::new()));
        if entry.is_null() {
            *entry = Value::Object(Map::new());
        }
        node = entry.as_object_mut().ok_or_else(|| CliError::usage(format!("field `{part}` in `{path}` is not an object")))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn args(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn overrides_accept_both_spellings_and_nested_paths() {
        let o = parse_overrides(&args(&["--k", "300", "--random-starts=0", "--domain.kind", "circle", "--drift", "-x"]))
            .unwrap();
        assert_eq!(o[0], ("k".into(), json!(300)));
        assert_eq!(o[1], ("random_starts".into(), json!(0)));
        assert_eq!(o[2], ("domain.kind".into(), json!("circle")));
        assert_eq!(o[3], ("drift".into(), json!("-x")));
        assert!(parse_overrides(&args(&["k", "3"])).is_err());
        assert!(parse_overrides(&args(&["--k"])).is_err());
    }

    #[test]
    fn unknown_keys_and_bad_values_name_the_field() {
        let err = build("eig", Some(json!({"kk": 3})), &[]).unwrap_err().to_string();
        assert!(err.contains("kk"), "{err}");
        let err = build("eig", None, &[("k".into(), json!(-5))]).unwrap_err().to_string();
        assert!(err.contains("`k`"), "{err}");
        let err = build("eig", None, &[("domain.length".into(), json!(3))]).unwrap_err().to_string();
        assert!(err.contains("domain"), "{err}");
        let err = build("gamma", None, &[("tol".into(), json!(-1.0))]).unwrap_err().to_string();
        assert!(err.contains("`tol`"), "{err}");
    }

    #[test]
    fn nested_overrides_edit_the_defaults() {
        let c = build("heat", None, &[("domain.hi".into(), json!(3.0))]).unwrap();
        let ExperimentConfig::Heat(h) = c else { panic!() };
        assert_eq!(h.domain, DomainSpec::Interval { lo: 0.0, hi: 3.0 });
        let o = [("domain.kind".into(), json!("circle")), ("domain.length".into(), json!(6.0))];
        let ExperimentConfig::Heat(h) = build("heat", None, &o).unwrap() else { panic!() };
        assert_eq!(h.domain, DomainSpec::Circle { length: 6.0 });
        let file = json!({"domain": {"kind": "circle", "length": 2.0}});
        let ExperimentConfig::Eig(e) = build("eig", Some(file), &[("random_starts".into(), json!(0))]).unwrap() else {
            panic!()
        };
        assert_eq!(e.domain, DomainSpec::Circle { length: 2.0 });
    }

    #[test]
    fn randomized_runs_need_a_seed() {
        assert!(build("eig", None, &[]).unwrap_err().to_string().contains("seed"));
        assert!(build("eig", None, &[("random_starts".into(), json!(0))]).is_ok());
        assert!(build("nonsym", None, &[("random_drifts".into(), json!(3))]).is_err());
        assert!(build("heat", None, &[("v0".into(), json!("random"))]).is_err());
        assert!(build("verify-all", None, &[]).is_err());
    }

    #[test]
    fn config_command_must_match_and_infinity_is_spelled_out() {
        assert!(build("eig", Some(json!({"command": "heat"})), &[]).is_err());
        let c = build("model", None, &[("n".into(), json!("inf"))]).unwrap();
        let ExperimentConfig::Model(m) = &c else { panic!() };
        assert_eq!(m.n, Extended::INFINITY);
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["n"], json!("inf"));
        assert_eq!(v["command"], json!("model"));
    }
}
