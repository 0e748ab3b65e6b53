//! Flat key-value run configuration (TOML syntax, no tables).

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::{ConfigViolation, Error, Result};
use crate::semigroup::LameParams;
use crate::stepper::StepperConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialCondition {
    TaylorGreen2d,
    TaylorGreen3d,
    AbcFlow,
    GradientColeHopf,
    RandomSolenoidal { seed: u64, spectrum_slope: f64 },
    SnapshotFile { path: PathBuf },
}

impl InitialCondition {
    pub fn name(&self) -> &'static str {
        match self {
            InitialCondition::TaylorGreen2d => "taylor_green_2d",
            InitialCondition::TaylorGreen3d => "taylor_green_3d",
            InitialCondition::AbcFlow => "abc_flow",
            InitialCondition::GradientColeHopf => "gradient_cole_hopf",
            InitialCondition::RandomSolenoidal { .. } => "random_solenoidal",
            InitialCondition::SnapshotFile { .. } => "snapshot_file",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dim: usize,
    pub grid_n: usize,
    pub mu: f64,
    pub lambda: Option<f64>,
    pub lambda_list: Option<Vec<f64>>,
    pub t_end: f64,
    pub dt_init: f64,
    pub dt_min: f64,
    pub picard_tol: f64,
    pub picard_max: u32,
    pub cfl_constant: f64,
    pub dealias: bool,
    pub skew_symmetric: bool,
    pub initial_condition: InitialCondition,
    /// Multiplies the initial field.
    pub amplitude: f64,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
    pub abort_h1_factor: f64,
    pub hk_orders: Vec<u32>,
    /// Run the Leray-projected Navier-Stokes model instead of Lamé.
    pub navier_stokes: bool,
    /// Disable thread-level parallelism inside the solver.
    pub serial: bool,
}

pub const KNOWN_KEYS: &[&str] = &[
    "dim",
    "grid_n",
    "mu",
    "lambda",
    "lambda_list",
    "t_end",
    "dt_init",
    "dt_min",
    "picard_tol",
    "picard_max",
    "cfl_constant",
    "dealias",
    "skew_symmetric",
    "initial_condition",
    "seed",
    "spectrum_slope",
    "snapshot_path",
    "amplitude",
    "output_dir",
    "snapshot_every",
    "abort_h1_factor",
    "hk_orders",
    "navier_stokes",
    "serial",
];

struct Reader<'a> {
    table: &'a toml::Table,
    violations: Vec<ConfigViolation>,
}

impl<'a> Reader<'a> {
    fn wrong(&mut self, key: &str, expected: &'static str) {
        self.violations.push(ConfigViolation::WrongType {
            key: key.into(),
            expected,
        });
    }

    fn constraint(&mut self, key: &str, message: impl Into<String>) {
        self.violations.push(ConfigViolation::ConstraintViolation {
            key: key.into(),
            message: message.into(),
        });
    }

    fn float(&mut self, key: &str) -> Option<f64> {
        match self.table.get(key)? {
            Value::Float(f) => Some(*f),
            Value::Integer(i) => Some(*i as f64),
            _ => {
                self.wrong(key, "a number");
                None
            }
        }
    }

    fn int(&mut self, key: &str) -> Option<i64> {
        match self.table.get(key)? {
            Value::Integer(i) => Some(*i),
            _ => {
                self.wrong(key, "an integer");
                None
            }
        }
    }

    fn uint(&mut self, key: &str) -> Option<u64> {
        let i = self.int(key)?;
        if i < 0 {
            self.constraint(key, format!("must be non-negative, got {i}"));
            return None;
        }
        Some(i as u64)
    }

    fn boolean(&mut self, key: &str) -> Option<bool> {
        match self.table.get(key)? {
            Value::Boolean(b) => Some(*b),
            _ => {
                self.wrong(key, "a boolean");
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.table.get(key)? {
            Value::String(s) => Some(s.clone()),
            _ => {
                self.wrong(key, "a string");
                None
            }
        }
    }

    fn array<T>(&mut self, key: &str, expected: &'static str, f: impl Fn(&Value) -> Option<T>) -> Option<Vec<T>> {
        match self.table.get(key)? {
            Value::Array(a) => {
                let out: Option<Vec<T>> = a.iter().map(f).collect();
                if out.is_none() {
                    self.wrong(key, expected);
                }
                out
            }
            _ => {
                self.wrong(key, expected);
                None
            }
        }
    }

    fn required<T>(&mut self, key: &str, v: Option<T>) -> Option<T> {
        if v.is_none() && !self.table.contains_key(key) {
            self.violations.push(ConfigViolation::MissingKey(key.into()));
        }
        v
    }
}

/// Parse and validate a run configuration, reporting every violation found.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| {
        Error::Config(vec![ConfigViolation::ConstraintViolation {
            key: "<document>".into(),
            message: e.message().to_string(),
        }])
    })?;
    let mut r = Reader {
        table: &table,
        violations: Vec::new(),
    };
    for (k, v) in &table {
        if !KNOWN_KEYS.contains(&k.as_str()) {
            r.violations.push(ConfigViolation::UnknownKey(k.clone()));
        } else if v.is_table() {
            r.wrong(k, "a scalar or array (the config is flat)");
        }
    }

    let dim = r.uint("dim");
    let dim = r.required("dim", dim);
    let grid_n = r.uint("grid_n");
    let grid_n = r.required("grid_n", grid_n);
    let mu = r.float("mu");
    let mu = r.required("mu", mu);
    let t_end = r.float("t_end");
    let t_end = r.required("t_end", t_end);
    let lambda = r.float("lambda");
    let lambda_list = r.array("lambda_list", "an array of numbers", |v| match v {
        Value::Float(f) => Some(*f),
        Value::Integer(i) => Some(*i as f64),
        _ => None,
    });
    let navier_stokes = r.boolean("navier_stokes").unwrap_or(false);
    let dt_init = r.float("dt_init").unwrap_or(1e-3);
    let dt_min = r.float("dt_min").unwrap_or(dt_init * 1e-6);
    let defaults = StepperConfig::default();
    let picard_tol = r.float("picard_tol").unwrap_or(defaults.picard_tol);
    let picard_max = r.uint("picard_max").map_or(defaults.picard_max, |v| v as u32);
    let cfl_constant = r.float("cfl_constant").unwrap_or(defaults.cfl_constant);
    let dealias = r.boolean("dealias").unwrap_or(defaults.dealias);
    let skew_symmetric = r.boolean("skew_symmetric").unwrap_or(false);
    let amplitude = r.float("amplitude").unwrap_or(1.0);
    let output_dir = r.string("output_dir").unwrap_or_else(|| "lamens-out".into());
    let snapshot_every = r.uint("snapshot_every").map_or(defaults.snapshot_every, |v| v as usize);
    let abort_h1_factor = r.float("abort_h1_factor").unwrap_or(defaults.abort_h1_factor);
    let hk_orders = r
        .array("hk_orders", "an array of non-negative integers", |v| {
            v.as_integer().filter(|i| *i >= 0).map(|i| i as u32)
        })
        .unwrap_or(defaults.hk_orders);
    let serial = r.boolean("serial").unwrap_or(false);
    let seed = r.uint("seed");
    let spectrum_slope = r.float("spectrum_slope");
    let snapshot_path = r.string("snapshot_path");
    let ic_name = r.string("initial_condition");
    let ic_name = r.required("initial_condition", ic_name);

    let initial_condition = match ic_name.as_deref() {
        None => None,
        Some("taylor_green_2d") => Some(InitialCondition::TaylorGreen2d),
        Some("taylor_green_3d") => Some(InitialCondition::TaylorGreen3d),
        Some("abc_flow") => Some(InitialCondition::AbcFlow),
        Some("gradient_cole_hopf") => Some(InitialCondition::GradientColeHopf),
        Some("random_solenoidal") => {
            if seed.is_none() && !table.contains_key("seed") {
                r.violations.push(ConfigViolation::MissingKey("seed".into()));
            }
            Some(InitialCondition::RandomSolenoidal {
                seed: seed.unwrap_or(0),
                spectrum_slope: spectrum_slope.unwrap_or(3.0),
            })
        }
        Some("snapshot_file") => match snapshot_path {
            Some(p) => Some(InitialCondition::SnapshotFile { path: p.into() }),
            None => {
                r.required::<()>("snapshot_path", None);
                None
            }
        },
        Some(other) => {
            r.constraint(
                "initial_condition",
                format!(
                    "unknown initial condition `{other}` (expected taylor_green_2d, taylor_green_3d, \
                     abc_flow, gradient_cole_hopf, random_solenoidal or snapshot_file)"
                ),
            );
            None
        }
    };

    if let Some(d) = dim {
        if d != 2 && d != 3 {
            r.constraint("dim", format!("must be 2 or 3, got {d}"));
        }
        let needs = match initial_condition {
            Some(InitialCondition::TaylorGreen2d) => Some(2),
            Some(InitialCondition::TaylorGreen3d) | Some(InitialCondition::AbcFlow) => Some(3),
            _ => None,
        };
        if let (Some(n), Some(ic)) = (needs, &initial_condition) {
            if n != d {
                r.constraint("initial_condition", format!("{} needs dim = {n}, got {d}", ic.name()));
            }
        }
    }
    if let Some(n) = grid_n {
        if n < 4 || n % 2 != 0 {
            r.constraint("grid_n", format!("must be even and >= 4, got {n}"));
        }
    }
    let lame_rule = "Lamé constants must satisfy mu > 0 and lambda + mu >= 0";
    if let Some(m) = mu {
        if !(m > 0.0 && m.is_finite()) {
            r.constraint("mu", format!("{lame_rule}; got mu = {m}"));
        }
    }
    match (lambda, &lambda_list, navier_stokes) {
        (Some(_), Some(_), _) => r.constraint("lambda_list", "give either lambda or lambda_list, not both"),
        (None, None, false) => r.violations.push(ConfigViolation::MissingKey("lambda".into())),
        _ => {}
    }
    if let (Some(m), Some(l)) = (mu, lambda) {
        if !(l + m >= 0.0 && l.is_finite()) {
            r.constraint("lambda", format!("{lame_rule}; got mu = {m}, lambda = {l}"));
        }
    }
    if let Some(list) = &lambda_list {
        if list.is_empty() {
            r.constraint("lambda_list", "must not be empty");
        }
        if list.windows(2).any(|w| !(w[1] > w[0])) {
            r.constraint("lambda_list", "must be strictly increasing");
        }
        if let Some(m) = mu {
            if let Some(l) = list.iter().find(|l| !(**l + m >= 0.0 && l.is_finite())) {
                r.constraint("lambda_list", format!("{lame_rule}; got mu = {m}, lambda = {l}"));
            }
        }
    }
    if let Some(t) = t_end {
        if !(t > 0.0 && t.is_finite()) {
            r.constraint("t_end", format!("must be > 0, got {t}"));
        }
    }
    let positive = [
        ("dt_init", dt_init),
        ("dt_min", dt_min),
        ("picard_tol", picard_tol),
        ("cfl_constant", cfl_constant),
    ];
    for (k, v) in positive {
        if !(v > 0.0 && v.is_finite()) {
            r.constraint(k, format!("must be > 0, got {v}"));
        }
    }
    if dt_min >= dt_init {
        r.constraint("dt_min", format!("must be below dt_init = {dt_init}, got {dt_min}"));
    }
    if picard_max < 2 {
        r.constraint("picard_max", format!("must be >= 2, got {picard_max}"));
    }
    if snapshot_every == 0 {
        r.constraint("snapshot_every", "must be >= 1");
    }
    if !(abort_h1_factor > 1.0) {
        r.constraint("abort_h1_factor", format!("must be > 1, got {abort_h1_factor}"));
    }
    if !amplitude.is_finite() {
        r.constraint("amplitude", "must be finite");
    }

    if !r.violations.is_empty() {
        return Err(Error::Config(r.violations));
    }
    Ok(RunConfig {
        dim: dim.unwrap() as usize,
        grid_n: grid_n.unwrap() as usize,
        mu: mu.unwrap(),
        lambda,
        lambda_list,
        t_end: t_end.unwrap(),
        dt_init,
        dt_min,
        picard_tol,
        picard_max,
        cfl_constant,
        dealias,
        skew_symmetric,
        initial_condition: initial_condition.unwrap(),
        amplitude,
        output_dir: output_dir.into(),
        snapshot_every,
        abort_h1_factor,
        hk_orders,
        navier_stokes,
        serial,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text)
}

impl RunConfig {
    pub fn is_sweep(&self) -> bool {
        self.lambda_list.is_some()
    }

    pub fn stepper_config(&self) -> StepperConfig {
        StepperConfig {
            dt_init: self.dt_init,
            dt_min: self.dt_min,
            picard_tol: self.picard_tol,
            picard_max: self.picard_max,
            cfl_constant: self.cfl_constant,
            dealias: self.dealias,
            skew_symmetric: self.skew_symmetric,
            abort_h1_factor: self.abort_h1_factor,
            snapshot_every: self.snapshot_every,
            hk_orders: self.hk_orders.clone(),
        }
    }

    /// Lamé constants for a single run.
    pub fn params(&self) -> Result<LameParams> {
        match self.lambda {
            Some(l) => LameParams::new(self.mu, l),
            None => Err(Error::Config(vec![ConfigViolation::MissingKey("lambda".into())])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "dim = 2\ngrid_n = 64\nmu = 0.1\nlambda = 100\nt_end = 1\ninitial_condition = \"taylor_green_2d\"\n";

    #[test]
    fn minimal_config_gets_defaults() {
        let c = parse_config(MINIMAL).unwrap();
        assert_eq!(c.dim, 2);
        assert_eq!(c.grid_n, 64);
        assert_eq!(c.lambda, Some(100.0));
        assert_eq!(c.dt_init, 1e-3);
        assert_eq!(c.picard_max, 50);
        assert!(c.dealias);
        assert!(!c.is_sweep());
        assert_eq!(c.params().unwrap().penalty(), 100.1);
    }

    #[test]
    fn lame_constraint_is_named() {
        let text = MINIMAL.replace("mu = 0.1", "mu = 0.5").replace("lambda = 100", "lambda = -1");
        match parse_config(&text) {
            Err(Error::Config(v)) => {
                assert_eq!(v.len(), 1);
                let msg = v[0].to_string();
                assert!(msg.contains("ConstraintViolation") && msg.contains("lambda + mu >= 0"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sweep_mode() {
        let text = MINIMAL.replace("lambda = 100", "lambda_list = [100, 1000, 10000]");
        let c = parse_config(&text).unwrap();
        assert!(c.is_sweep());
        assert_eq!(c.lambda_list.unwrap(), vec![100.0, 1000.0, 10000.0]);
    }

    #[test]
    fn every_violation_is_reported() {
        let text = "dim = 4\ngrid_n = 63\nmu = -1\nlambda = 0\nbogus = 1\ninitial_condition = \"taylor_green_2d\"\ndealias = 3\n";
        match parse_config(text) {
            Err(Error::Config(v)) => {
                let all: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                let has = |s: &str| all.iter().any(|m| m.contains(s));
                assert!(has("UnknownKey: `bogus`"));
                assert!(has("MissingKey: `t_end`"));
                assert!(has("`dim`"));
                assert!(has("`grid_n`"));
                assert!(has("`mu`"));
                assert!(has("WrongType: `dealias`"));
                assert!(has("initial_condition"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_solenoidal_requires_seed() {
        let text = MINIMAL.replace("taylor_green_2d", "random_solenoidal");
        assert!(parse_config(&text).is_err());
        let c = parse_config(&format!("{text}seed = 7\n")).unwrap();
        assert_eq!(
            c.initial_condition,
            InitialCondition::RandomSolenoidal { seed: 7, spectrum_slope: 3.0 }
        );
    }
}
