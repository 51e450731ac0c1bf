//! The `szilard` command line: one subcommand per module, outputs written
//! to a directory together with a `manifest.json` of SHA-256 digests.
//!
//! Parameters can come from flags or from a JSON config file (`--config`),
//! whose keys are the parameter names (`t_min`, `T`, ...) plus `seed` and
//! `output_dir`. Flags win over the file.
//!
//! Sub-seeds are `seed + offset`: piston 1, sampled cycle 2, fit noise 3,
//! training 4, evaluation 5.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};

use clap::{Arg, ArgMatches, Command};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::engine::{expected_cycle, run_cycle, CycleConfig, Regime};
use crate::error::{invalid, Error, Result};
use crate::optimizer::{
    default_grid, evaluate, train, CycleTemplate, EnvSpec, EpsilonSchedule, LearningRate,
    RewardMode, TrainConfig,
};
use crate::sampler::{sample_piston, summarize_piston, PistonModel};
use crate::spectrum::{
    box_thermo, closed_form_report, split_spectrum, thermo_summary, BoxGeometry, ThermalState,
    UnitSystem,
};
use crate::surrogate::{featurize, fit_least_squares, train_net, Dataset};

pub const OUTPUT_DIR_ENV: &str = "SZILARD_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "szilard_output";
pub const MANIFEST_FILE: &str = "manifest.json";

pub const PISTON_SEED_OFFSET: u64 = 1;
pub const CYCLE_SEED_OFFSET: u64 = 2;
pub const FIT_NOISE_SEED_OFFSET: u64 = 3;
pub const TRAIN_SEED_OFFSET: u64 = 4;
pub const EVAL_SEED_OFFSET: u64 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Subcommand {
    Thermo,
    Cycle,
    Sample,
    Fit,
    Optimize,
    Report,
}

impl Subcommand {
    pub const ALL: [Subcommand; 6] = [
        Self::Thermo,
        Self::Cycle,
        Self::Sample,
        Self::Fit,
        Self::Optimize,
        Self::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Thermo => "thermo",
            Self::Cycle => "cycle",
            Self::Sample => "sample",
            Self::Fit => "fit",
            Self::Optimize => "optimize",
            Self::Report => "report",
        }
    }

    fn about(self) -> &'static str {
        match self {
            Self::Thermo => "Thermodynamics of a box over a temperature grid, plus the closed-form comparison",
            Self::Cycle => "Expected and one sampled ledger of a single engine cycle",
            Self::Sample => "Thermostatted piston trajectory and its position histogram",
            Self::Fit => "Polynomial (and optionally network) fit of the box entropy S(T)",
            Self::Optimize => "Bandit training of the wall position",
            Self::Report => "Quantum vs classical expected ledgers over a grid of positions and temperatures",
        }
    }

    fn params(self) -> &'static [ParamSpec] {
        match self {
            Self::Thermo => THERMO,
            Self::Cycle => CYCLE,
            Self::Sample => SAMPLE,
            Self::Fit => FIT,
            Self::Optimize => OPTIMIZE,
            Self::Report => REPORT,
        }
    }

    fn seed_required(self) -> bool {
        self == Self::Optimize
    }

    fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.as_str() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Int,
    Bool,
    Text,
    FloatList,
}

#[derive(Debug, Clone, Copy)]
enum Fallback {
    Required,
    Optional,
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(&'static str),
    DefaultGrid,
    FloatList(&'static [f64]),
}

#[derive(Debug, Clone, Copy)]
struct ParamSpec {
    name: &'static str,
    kind: Kind,
    default: Fallback,
    help: &'static str,
}

const fn param(name: &'static str, kind: Kind, default: Fallback, help: &'static str) -> ParamSpec {
    ParamSpec {
        name,
        kind,
        default,
        help,
    }
}

use Fallback as D;
use Kind as K;

const THERMO: &[ParamSpec] = &[
    param("t_min", K::Float, D::Required, "lowest temperature"),
    param("t_max", K::Float, D::Required, "highest temperature"),
    param("t_steps", K::Int, D::Required, "number of temperatures"),
    param("spacing", K::Text, D::Text("linear"), "grid spacing: linear or log"),
    param("length", K::Float, D::Float(1.0), "box length"),
    param("x", K::Float, D::Optional, "wall fraction; omit for the open box"),
    param("rel_tol", K::Float, D::Float(1e-12), "truncation tolerance"),
];

const CYCLE: &[ParamSpec] = &[
    param("regime", K::Text, D::Required, "quantum or classical"),
    param("x", K::Float, D::Required, "wall fraction"),
    param("T", K::Float, D::Required, "bath temperature"),
    param("length", K::Float, D::Float(1.0), "box length"),
    param("charge_erasure", K::Bool, D::Bool(true), "subtract the erasure cost from net work"),
    param("rel_tol", K::Float, D::Float(1e-12), "truncation tolerance"),
];

const SAMPLE: &[ParamSpec] = &[
    param("kappa", K::Float, D::Float(1.0), "spring stiffness"),
    param("T", K::Float, D::Float(1.0), "bath temperature"),
    param("gamma", K::Float, D::Float(1.0), "friction"),
    param("dt", K::Float, D::Float(0.01), "time step"),
    param("steps", K::Int, D::Int(100_000), "recorded steps"),
    param("burn_in", K::Int, D::Int(10_000), "discarded initial steps"),
    param("bins", K::Int, D::Int(40), "histogram bins"),
];

const FIT: &[ParamSpec] = &[
    param("t_min", K::Float, D::Float(0.5), "lowest temperature"),
    param("t_max", K::Float, D::Float(50.0), "highest temperature"),
    param("points", K::Int, D::Int(20), "number of samples"),
    param("degree", K::Int, D::Int(3), "polynomial degree in ln T"),
    param("noise", K::Float, D::Float(0.0), "standard deviation of Gaussian noise added to S"),
    param("length", K::Float, D::Float(1.0), "box length"),
    param("epochs", K::Int, D::Int(0), "network training epochs; 0 skips the network"),
    param("hidden", K::Int, D::Int(8), "hidden units of the (1, hidden, 1) network"),
    param("learning_rate", K::Float, D::Float(0.05), "network learning rate"),
];

const OPTIMIZE: &[ParamSpec] = &[
    param("regime", K::Text, D::Text("classical"), "quantum or classical"),
    param("T", K::Float, D::Float(1.0), "bath temperature"),
    param("reward", K::Text, D::Text("extraction_only"), "extraction_only or net_with_erasure"),
    param("stochastic", K::Bool, D::Bool(true), "sample cycles instead of expected ledgers"),
    param("episodes", K::Int, D::Int(20_000), "training episodes"),
    param("alpha", K::Float, D::Float(0.1), "constant learning rate"),
    param("sample_average", K::Bool, D::Bool(false), "use a 1/n learning rate instead of alpha"),
    param("eps_start", K::Float, D::Float(0.3), "initial exploration rate"),
    param("eps_end", K::Float, D::Float(0.01), "final exploration rate"),
    param("initial_value", K::Float, D::Float(0.0), "initial action value"),
    param("eval_episodes", K::Int, D::Int(1000), "evaluation episodes of the greedy policy"),
    param("grid", K::FloatList, D::DefaultGrid, "comma-separated wall fractions"),
];

const REPORT: &[ParamSpec] = &[
    param(
        "temperatures",
        K::FloatList,
        D::FloatList(&[0.05, 0.5, 5.0, 50.0, 500.0]),
        "comma-separated temperatures",
    ),
    param("fractions", K::FloatList, D::DefaultGrid, "comma-separated wall fractions"),
    param("length", K::Float, D::Float(1.0), "box length"),
];

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ParamValue {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    FloatList(Vec<f64>),
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Float(v) => write!(f, "{v}"),
            Self::Int(v) => write!(f, "{v}"),
            Self::Bool(v) => write!(f, "{v}"),
            Self::Text(v) => write!(f, "{v}"),
            Self::FloatList(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Subcommand,
    pub parameters: BTreeMap<String, ParamValue>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl RunConfig {
    fn float(&self, key: &str) -> f64 {
        match self.parameters.get(key) {
            Some(ParamValue::Float(v)) => *v,
            other => panic!("parameter {key} is not a float: {other:?}"),
        }
    }

    fn opt_float(&self, key: &str) -> Option<f64> {
        self.parameters.contains_key(key).then(|| self.float(key))
    }

    fn int(&self, key: &str) -> u64 {
        match self.parameters.get(key) {
            Some(ParamValue::Int(v)) => *v,
            other => panic!("parameter {key} is not an integer: {other:?}"),
        }
    }

    fn usize(&self, key: &str) -> Result<usize> {
        usize::try_from(self.int(key)).map_err(|_| invalid(format!("{key} is too large")))
    }

    fn boolean(&self, key: &str) -> bool {
        match self.parameters.get(key) {
            Some(ParamValue::Bool(v)) => *v,
            other => panic!("parameter {key} is not a boolean: {other:?}"),
        }
    }

    fn text(&self, key: &str) -> &str {
        match self.parameters.get(key) {
            Some(ParamValue::Text(v)) => v,
            other => panic!("parameter {key} is not text: {other:?}"),
        }
    }

    fn list(&self, key: &str) -> &[f64] {
        match self.parameters.get(key) {
            Some(ParamValue::FloatList(v)) => v,
            other => panic!("parameter {key} is not a list: {other:?}"),
        }
    }
}

/// A rejected command line. `exit_code` is 2, or 0 for `--help` and `--version`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError {
    pub message: String,
    pub exit_code: i32,
}

impl UsageError {
    fn new(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            exit_code: 2,
        }
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for UsageError {}

fn flag(name: &str) -> String {
    name.replace('_', "-")
}

fn parse_float_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| format!("{p:?} is not a number"))
        })
        .collect()
}

fn command() -> Command {
    let mut cmd = Command::new("szilard")
        .version(env!("CARGO_PKG_VERSION"))
        .about("Single-particle Szilard engine: spectra, cycle ledgers, sampling, fits and bandit optimization")
        .subcommand_required(true)
        .arg_required_else_help(true);
    for sub in Subcommand::ALL {
        let mut c = Command::new(sub.as_str())
            .about(sub.about())
            .allow_negative_numbers(true)
            .arg(
                Arg::new("config")
                    .long("config")
                    .value_name("FILE")
                    .value_parser(clap::value_parser!(PathBuf))
                    .help("JSON file of parameter values"),
            )
            .arg(
                Arg::new("seed")
                    .long("seed")
                    .value_parser(clap::value_parser!(u64))
                    .help(if sub.seed_required() {
                        "random seed (required)"
                    } else {
                        "random seed [default: 0]"
                    }),
            )
            .arg(
                Arg::new("output_dir")
                    .long("output-dir")
                    .value_name("DIR")
                    .value_parser(clap::value_parser!(PathBuf))
                    .help("output directory [default: $SZILARD_OUTPUT_DIR or szilard_output]"),
            );
        for p in sub.params() {
            let mut arg = Arg::new(p.name).long(flag(p.name)).help(p.help);
            arg = match p.kind {
                K::Float => arg.value_parser(clap::value_parser!(f64)),
                K::Int => arg.value_parser(clap::value_parser!(u64)),
                K::Bool => arg.value_parser(clap::value_parser!(bool)),
                K::Text => arg,
                K::FloatList => arg.value_parser(parse_float_list),
            };
            c = c.arg(arg.value_name(p.name.to_uppercase()));
        }
        cmd = cmd.subcommand(c);
    }
    cmd
}

fn from_matches(m: &ArgMatches, p: &ParamSpec) -> Option<ParamValue> {
    match p.kind {
        K::Float => m.get_one::<f64>(p.name).map(|v| ParamValue::Float(*v)),
        K::Int => m.get_one::<u64>(p.name).map(|v| ParamValue::Int(*v)),
        K::Bool => m.get_one::<bool>(p.name).map(|v| ParamValue::Bool(*v)),
        K::Text => m.get_one::<String>(p.name).map(|v| ParamValue::Text(v.clone())),
        K::FloatList => m.get_one::<Vec<f64>>(p.name).map(|v| ParamValue::FloatList(v.clone())),
    }
}

fn from_json(v: &serde_json::Value, p: &ParamSpec) -> std::result::Result<ParamValue, UsageError> {
    let bad = || {
        UsageError::new(format!(
            "config key {:?} (flag --{}) has the wrong type: {v}",
            p.name,
            flag(p.name)
        ))
    };
    Ok(match p.kind {
        K::Float => ParamValue::Float(v.as_f64().ok_or_else(bad)?),
        K::Int => ParamValue::Int(v.as_u64().ok_or_else(bad)?),
        K::Bool => ParamValue::Bool(v.as_bool().ok_or_else(bad)?),
        K::Text => ParamValue::Text(v.as_str().ok_or_else(bad)?.to_owned()),
        K::FloatList => ParamValue::FloatList(
            v.as_array()
                .ok_or_else(bad)?
                .iter()
                .map(|x| x.as_f64().ok_or_else(bad))
                .collect::<std::result::Result<_, _>>()?,
        ),
    })
}

fn default_value(p: &ParamSpec) -> Option<ParamValue> {
    match p.default {
        D::Required | D::Optional => None,
        D::Float(v) => Some(ParamValue::Float(v)),
        D::Int(v) => Some(ParamValue::Int(v)),
        D::Bool(v) => Some(ParamValue::Bool(v)),
        D::Text(v) => Some(ParamValue::Text(v.to_owned())),
        D::DefaultGrid => Some(ParamValue::FloatList(default_grid())),
        D::FloatList(v) => Some(ParamValue::FloatList(v.to_vec())),
    }
}

/// Parse `argv` (program name first), reading the output-directory default
/// from `SZILARD_OUTPUT_DIR`.
pub fn parse_invocation<I, T>(argv: I) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    parse_invocation_with_env(argv, env_dir)
}

/// [`parse_invocation`] with the environment default passed explicitly.
pub fn parse_invocation_with_env<I, T>(
    argv: I,
    env_output_dir: Option<PathBuf>,
) -> std::result::Result<RunConfig, UsageError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = command().try_get_matches_from(argv).map_err(|e| UsageError {
        message: e.render().to_string(),
        exit_code: if e.use_stderr() { 2 } else { 0 },
    })?;
    let (name, m) = matches.subcommand().expect("subcommand is required");
    let sub = Subcommand::from_name(name).expect("registered subcommands");

    let mut file: serde_json::Map<String, serde_json::Value> = match m.get_one::<PathBuf>("config") {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                UsageError::new(format!("cannot read --config {}: {e}", path.display()))
            })?;
            match serde_json::from_str(&text) {
                Ok(serde_json::Value::Object(map)) => map,
                Ok(_) => return Err(UsageError::new("--config file must hold a JSON object")),
                Err(e) => {
                    return Err(UsageError::new(format!(
                        "--config {} is not valid JSON: {e}",
                        path.display()
                    )))
                }
            }
        }
        None => serde_json::Map::new(),
    };

    let file_seed = file.remove("seed");
    let file_dir = file.remove("output_dir");
    if let Some(key) = file
        .keys()
        .find(|k| !sub.params().iter().any(|p| p.name == k.as_str()))
    {
        return Err(UsageError::new(format!(
            "unknown config key {key:?} for subcommand {}",
            sub.as_str()
        )));
    }

    let mut parameters = BTreeMap::new();
    for p in sub.params() {
        let value = match from_matches(m, p) {
            Some(v) => Some(v),
            None => match file.get(p.name) {
                Some(v) => Some(from_json(v, p)?),
                None => default_value(p),
            },
        };
        match value {
            Some(v) => {
                parameters.insert(p.name.to_owned(), v);
            }
            None if matches!(p.default, D::Required) => {
                return Err(UsageError::new(format!(
                    "missing required parameter --{} (config key {:?}) for subcommand {}",
                    flag(p.name),
                    p.name,
                    sub.as_str()
                )))
            }
            None => {}
        }
    }

    let seed = match (m.get_one::<u64>("seed"), file_seed) {
        (Some(s), _) => *s,
        (None, Some(v)) => v
            .as_u64()
            .ok_or_else(|| UsageError::new(format!("config key \"seed\" (flag --seed) must be a nonnegative integer, got {v}")))?,
        (None, None) if sub.seed_required() => {
            return Err(UsageError::new(format!(
                "missing required parameter --seed for subcommand {}",
                sub.as_str()
            )))
        }
        (None, None) => 0,
    };
    let output_dir = match (m.get_one::<PathBuf>("output_dir"), file_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(v)) => PathBuf::from(v.as_str().ok_or_else(|| {
            UsageError::new("config key \"output_dir\" (flag --output-dir) must be a string")
        })?),
        (None, None) => env_output_dir.unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR)),
    };

    Ok(RunConfig {
        subcommand: sub,
        parameters,
        seed,
        output_dir,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub subcommand: String,
    pub parameters: BTreeMap<String, ParamValue>,
    pub seed: u64,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<OutputRecord>,
}

/// RFC 3339 timestamp; `SOURCE_DATE_EPOCH` pins it for reproducible manifests.
fn timestamp() -> String {
    let pinned = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|secs| chrono::DateTime::from_timestamp(secs, 0));
    pinned
        .unwrap_or_else(chrono::Utc::now)
        .to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

struct Outputs {
    dir: PathBuf,
    records: Vec<OutputRecord>,
}

impl Outputs {
    fn write(&mut self, file: &str, contents: &str) -> Result<()> {
        write_file(&self.dir.join(file), contents)?;
        self.records.push(OutputRecord {
            file: file.to_owned(),
            sha256: sha256_hex(contents.as_bytes()),
        });
        Ok(())
    }

    fn json(&mut self, file: &str, value: &serde_json::Value) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Error::Io(format!("serializing {file}: {e}")))?;
        text.push('\n');
        self.write(file, &text)
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::Io(format!("writing {}: {e}", path.display())))
}

/// Run the subcommand, write its outputs and `manifest.json` into
/// `config.output_dir`, and return the manifest.
pub fn execute(config: &RunConfig) -> Result<RunManifest> {
    let started = timestamp();
    std::fs::create_dir_all(&config.output_dir).map_err(|e| {
        Error::Io(format!("creating {}: {e}", config.output_dir.display()))
    })?;
    let mut out = Outputs {
        dir: config.output_dir.clone(),
        records: Vec::new(),
    };
    match config.subcommand {
        Subcommand::Thermo => run_thermo(config, &mut out)?,
        Subcommand::Cycle => run_cycle_cmd(config, &mut out)?,
        Subcommand::Sample => run_sample(config, &mut out)?,
        Subcommand::Fit => run_fit(config, &mut out)?,
        Subcommand::Optimize => run_optimize(config, &mut out)?,
        Subcommand::Report => run_report(config, &mut out)?,
    }
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        subcommand: config.subcommand.as_str().to_owned(),
        parameters: config.parameters.clone(),
        seed: config.seed,
        started,
        finished: timestamp(),
        outputs: out.records,
    };
    let mut text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Io(format!("serializing manifest: {e}")))?;
    text.push('\n');
    write_file(&config.output_dir.join(MANIFEST_FILE), &text)?;
    Ok(manifest)
}

fn regime(config: &RunConfig) -> Result<Regime> {
    config.text("regime").parse().map_err(Error::InvalidArgument)
}

fn temperature_grid(t_min: f64, t_max: f64, steps: usize, spacing: &str) -> Result<Vec<f64>> {
    if steps == 0 {
        return Err(invalid("t_steps must be at least 1"));
    }
    if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite()) {
        return Err(invalid(format!(
            "need 0 < t_min <= t_max, got t_min = {t_min}, t_max = {t_max}"
        )));
    }
    if steps == 1 {
        return Ok(vec![t_min]);
    }
    let last = (steps - 1) as f64;
    match spacing {
        "linear" => Ok((0..steps)
            .map(|i| t_min + (t_max - t_min) * i as f64 / last)
            .collect()),
        "log" => {
            let (a, b) = (t_min.ln(), t_max.ln());
            Ok((0..steps).map(|i| (a + (b - a) * i as f64 / last).exp()).collect())
        }
        other => Err(invalid(format!("spacing must be linear or log, got {other:?}"))),
    }
}

pub const THERMO_CSV_HEADER: &str =
    "T,Z,ln_Z,free_energy,mean_energy,entropy,heat_capacity,truncation_rel_error,levels_used";

fn run_thermo(config: &RunConfig, out: &mut Outputs) -> Result<()> {
    let units = UnitSystem::natural();
    let length = config.float("length");
    let rel_tol = config.float("rel_tol");
    let geom = match config.opt_float("x") {
        Some(x) => BoxGeometry::with_wall(length, x)?,
        None => BoxGeometry::new(length)?,
    };
    let grid = temperature_grid(
        config.float("t_min"),
        config.float("t_max"),
        config.usize("t_steps")?,
        config.text("spacing"),
    )?;
    let spectrum = match geom.wall_fraction() {
        Some(_) => Some(split_spectrum(&geom, &units, 1)?),
        None => None,
    };
    let mut csv = String::from(THERMO_CSV_HEADER);
    csv.push('\n');
    for &t in &grid {
        let state = ThermalState::new(t, &units)?;
        let s = match &spectrum {
            Some(spec) => thermo_summary(spec, &state, &units, rel_tol)?,
            None => box_thermo(&geom, &state, &units, rel_tol)?,
        };
        let _ = writeln!(
            csv,
            "{t},{},{},{},{},{},{},{},{}",
            s.z,
            s.ln_z,
            s.free_energy,
            s.mean_energy,
            s.entropy,
            s.heat_capacity,
            s.truncation_rel_error,
            s.levels_used
        );
    }
    out.write("thermo.csv", &csv)?;
    let report = closed_form_report(&geom, &units, &grid, rel_tol)?;
    out.write("closed_form_report.csv", &report.to_csv())?;
    out.json(
        "closed_form_notes.json",
        &serde_json::json!({
            "heat_capacity_unit_mismatch": report.heat_capacity_unit_mismatch,
            "notes": report.notes,
        }),
    )
}

fn run_cycle_cmd(config: &RunConfig, out: &mut Outputs) -> Result<()> {
    let units = UnitSystem::natural();
    let cycle = CycleConfig::with_tolerance(
        BoxGeometry::with_wall(config.float("length"), config.float("x"))?,
        ThermalState::new(config.float("T"), &units)?,
        units,
        regime(config)?,
        config.boolean("charge_erasure"),
        config.float("rel_tol"),
    )?;
    out.json("cycle_expected.json", &expected_cycle(&cycle)?.to_json())?;
    let sampled = run_cycle(&cycle, config.seed.wrapping_add(CYCLE_SEED_OFFSET))?;
    out.json("cycle_sampled.json", &sampled.to_json())
}

fn run_sample(config: &RunConfig, out: &mut Outputs) -> Result<()> {
    let units = UnitSystem::natural();
    let model = PistonModel {
        stiffness: config.float("kappa"),
        temperature: config.float("T"),
        friction: config.float("gamma"),
        time_step: config.float("dt"),
        burn_in: config.usize("burn_in")?,
        steps: config.usize("steps")?,
    };
    let bins = config.usize("bins")?;
    let traj = sample_piston(&model, &units, config.seed.wrapping_add(PISTON_SEED_OFFSET))?;
    let hist = crate::sampler::make_histogram(&traj, bins)?;
    out.write("piston_trajectory.csv", &traj.to_csv())?;
    out.write("piston_histogram.csv", &hist.to_csv())?;
    out.write("piston_histogram.svg", &hist.to_svg("piston position density"))?;
    let summary = summarize_piston(&traj, &model, &units, bins)?;
    out.json(
        "piston_summary.json",
        &serde_json::to_value(summary).map_err(|e| Error::Io(e.to_string()))?,
    )
}

pub const ENTROPY_DATA_HEADER: &str = "T,entropy";

fn run_fit(config: &RunConfig, out: &mut Outputs) -> Result<()> {
    let units = UnitSystem::natural();
    let geom = BoxGeometry::new(config.float("length"))?;
    let points = config.usize("points")?;
    let degree = config.usize("degree")?;
    let noise = config.float("noise");
    if !(noise >= 0.0 && noise.is_finite()) {
        return Err(invalid(format!("noise must be nonnegative, got {noise}")));
    }
    let temps = temperature_grid(config.float("t_min"), config.float("t_max"), points, "linear")?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(FIT_NOISE_SEED_OFFSET));
    let gauss = Normal::new(0.0, noise).map_err(|e| invalid(e.to_string()))?;
    let mut entropy = Vec::with_capacity(points);
    for &t in &temps {
        let s = box_thermo(&geom, &ThermalState::new(t, &units)?, &units, 1e-12)?.entropy;
        entropy.push(s + if noise > 0.0 { gauss.sample(&mut rng) } else { 0.0 });
    }
    let mut data = String::from(ENTROPY_DATA_HEADER);
    data.push('\n');
    for (t, s) in temps.iter().zip(&entropy) {
        let _ = writeln!(data, "{t},{s}");
    }
    out.write("entropy_data.csv", &data)?;

    let log_t: Vec<f64> = temps.iter().map(|t| t.ln()).collect();
    let ds = Dataset::scalar(&log_t, &entropy)?;
    let fit = fit_least_squares(&featurize(&ds, degree)?, &entropy)?;
    out.json("fit_summary.json", &fit.summary_json())?;
    out.write("residuals.csv", &fit.residual_csv())?;

    let epochs = config.usize("epochs")?;
    if epochs > 0 {
        let hidden = config.usize("hidden")?;
        let trained = train_net(
            &ds,
            &[1, hidden, 1],
            epochs,
            config.float("learning_rate"),
            config.seed.wrapping_add(TRAIN_SEED_OFFSET),
        )?;
        let mut csv = String::from("T,entropy,predicted\n");
        for ((t, lt), s) in temps.iter().zip(&log_t).zip(&entropy) {
            let _ = writeln!(csv, "{t},{s},{}", trained.model.predict(&[*lt]));
        }
        out.write("network_fit.csv", &csv)?;
        out.json(
            "network_summary.json",
            &serde_json::json!({
                "layer_sizes": trained.model.layer_sizes(),
                "epochs": epochs,
                "final_loss": trained.final_loss,
            }),
        )?;
    }
    Ok(())
}

fn run_optimize(config: &RunConfig, out: &mut Outputs) -> Result<()> {
    let spec = EnvSpec::new(
        config.list("grid").to_vec(),
        CycleTemplate::natural(config.float("T"), regime(config)?)?,
        config.text("reward").parse::<RewardMode>()?,
        config.boolean("stochastic"),
    )?;
    let episodes = config.usize("episodes")?;
    let train_cfg = TrainConfig {
        episodes,
        learning_rate: if config.boolean("sample_average") {
            LearningRate::SampleAverage
        } else {
            LearningRate::Constant(config.float("alpha"))
        },
        epsilon: EpsilonSchedule::decaying(config.float("eps_start"), config.float("eps_end"), episodes),
        seed: config.seed.wrapping_add(TRAIN_SEED_OFFSET),
        initial_value: config.float("initial_value"),
    };
    let (policy, curve) = train(&spec, &train_cfg)?;
    out.write("learning_curve.csv", &curve.to_csv())?;
    out.json("policy.json", &policy.to_json(spec.action_grid()))?;
    let eval_episodes = config.usize("eval_episodes")?;
    let (mean, se) = evaluate(
        &policy,
        &spec,
        eval_episodes,
        config.seed.wrapping_add(EVAL_SEED_OFFSET),
    )?;
    out.json(
        "evaluation.json",
        &serde_json::json!({
            "greedy_action": spec.action_grid()[policy.greedy_action()],
            "episodes": eval_episodes,
            "mean_reward": mean,
            "standard_error": se,
        }),
    )
}

pub const LEDGER_COMPARISON_HEADER: &str = "regime,x,T,p_a,insertion_cost,extraction_work,erasure_cost,net_before_erasure,net_work";

fn run_report(config: &RunConfig, out: &mut Outputs) -> Result<()> {
    let units = UnitSystem::natural();
    let length = config.float("length");
    let mut csv = String::from(LEDGER_COMPARISON_HEADER);
    csv.push('\n');
    for &t in config.list("temperatures") {
        let state = ThermalState::new(t, &units)?;
        for &x in config.list("fractions") {
            for regime in [Regime::Quantum, Regime::Classical] {
                let cycle = CycleConfig::with_tolerance(
                    BoxGeometry::with_wall(length, x)?,
                    state,
                    units,
                    regime,
                    true,
                    1e-12,
                )?;
                let l = expected_cycle(&cycle)?;
                let p_a = crate::engine::side_probabilities(&cycle)?.0;
                let _ = writeln!(
                    csv,
                    "{},{x},{t},{p_a},{},{},{},{},{}",
                    regime.as_str(),
                    l.insertion_cost,
                    l.extraction_work,
                    l.erasure_cost,
                    l.net_before_erasure(),
                    l.net_work
                );
            }
        }
    }
    out.write("ledger_comparison.csv", &csv)
}

/// Parse, execute, print diagnostics, and return the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match parse_invocation(argv) {
        Ok(c) => c,
        Err(e) => {
            if e.exit_code == 0 {
                print!("{e}");
            } else {
                eprint!("{e}");
                if !e.message.ends_with('\n') {
                    eprintln!();
                }
            }
            return e.exit_code;
        }
    };
    match execute(&config) {
        Ok(m) => {
            for o in &m.outputs {
                println!("{}", config.output_dir.join(&o.file).display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// 2 for invalid arguments, 1 for computation and I/O failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> std::result::Result<RunConfig, UsageError> {
        parse_invocation_with_env(std::iter::once("szilard").chain(args.iter().copied()), None)
    }

    #[test]
    fn thermo_happy_path() {
        let c = parse(&["thermo", "--t-min", "1", "--t-max", "100", "--t-steps", "50", "--length", "1.0"]).unwrap();
        assert_eq!(c.subcommand, Subcommand::Thermo);
        assert_eq!(c.parameters["t_steps"], ParamValue::Int(50));
        assert_eq!(c.parameters["spacing"], ParamValue::Text("linear".into()));
        assert!(!c.parameters.contains_key("x"));
        assert_eq!(c.seed, 0);
        assert_eq!(c.output_dir, PathBuf::from(DEFAULT_OUTPUT_DIR));
    }

    #[test]
    fn unknown_flag_is_a_usage_error() {
        let e = parse(&["thermo", "--frobnicate"]).unwrap_err();
        assert_eq!(e.exit_code, 2);
        assert!(e.message.contains("--frobnicate"), "{}", e.message);
    }

    #[test]
    fn missing_key_names_the_flag() {
        let e = parse(&["cycle", "--regime", "quantum", "--x", "0.5"]).unwrap_err();
        assert_eq!(e.exit_code, 2);
        assert!(e.message.contains("--T"), "{}", e.message);
        let e = parse(&["optimize"]).unwrap_err();
        assert!(e.message.contains("--seed"), "{}", e.message);
    }

    #[test]
    fn help_exits_zero() {
        let e = parse(&["--help"]).unwrap_err();
        assert_eq!(e.exit_code, 0);
        assert!(e.message.contains("thermo"));
    }

    #[test]
    fn flags_override_config_and_unknown_keys_fail() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"regime": "classical", "x": 0.3, "T": 2.0, "seed": 9, "output_dir": "o"}"#).unwrap();
        let p = path.to_str().unwrap();
        let c = parse(&["cycle", "--config", p, "--x", "0.6"]).unwrap();
        assert_eq!(c.parameters["x"], ParamValue::Float(0.6));
        assert_eq!(c.parameters["T"], ParamValue::Float(2.0));
        assert_eq!((c.seed, c.output_dir.clone()), (9, PathBuf::from("o")));

        std::fs::write(&path, r#"{"regime": "classical", "x": 0.3, "T": 2.0, "colour": 1}"#).unwrap();
        let e = parse(&["cycle", "--config", p]).unwrap_err();
        assert_eq!(e.exit_code, 2);
        assert!(e.message.contains("colour"));

        std::fs::write(&path, r#"{"regime": "classical", "x": "wide", "T": 2.0}"#).unwrap();
        assert!(parse(&["cycle", "--config", p]).unwrap_err().message.contains("--x"));
    }

    #[test]
    fn environment_supplies_output_dir() {
        let c = parse_invocation_with_env(["szilard", "report"], Some(PathBuf::from("from_env"))).unwrap();
        assert_eq!(c.output_dir, PathBuf::from("from_env"));
        let c = parse_invocation_with_env(["szilard", "report", "--output-dir", "flag"], Some(PathBuf::from("from_env")))
            .unwrap();
        assert_eq!(c.output_dir, PathBuf::from("flag"));
    }

    #[test]
    fn lists_and_negative_numbers_parse() {
        let c = parse(&["report", "--temperatures", "1, 2.5,10"]).unwrap();
        assert_eq!(c.parameters["temperatures"], ParamValue::FloatList(vec![1.0, 2.5, 10.0]));
        let c = parse(&["cycle", "--regime", "classical", "--x", "0.5", "--T", "-1"]).unwrap();
        assert_eq!(c.parameters["T"], ParamValue::Float(-1.0));
        assert!(parse(&["report", "--temperatures", "1,a"]).is_err());
    }

    #[test]
    fn thermo_rows_and_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("run");
        let c = parse(&[
            "thermo", "--t-min", "1", "--t-max", "3", "--t-steps", "3",
            "--output-dir", out.to_str().unwrap(),
        ])
        .unwrap();
        let m = execute(&c).unwrap();
        let csv = std::fs::read_to_string(out.join("thermo.csv")).unwrap();
        assert_eq!(csv.lines().count(), 4);
        assert!(!csv.contains('\r'));
        for o in &m.outputs {
            let bytes = std::fs::read(out.join(&o.file)).unwrap();
            assert_eq!(sha256_hex(&bytes), o.sha256);
        }
        assert!(m.outputs.iter().any(|o| o.file == "thermo.csv"));
    }

    #[test]
    fn invalid_physics_maps_to_exit_codes() {
        let dir = tempfile::tempdir().unwrap();
        let c = parse(&[
            "cycle", "--regime", "quantum", "--x", "0.999999", "--T", "1",
            "--output-dir", dir.path().to_str().unwrap(),
        ])
        .unwrap();
        assert_eq!(exit_code(&execute(&c).unwrap_err()), 2);
        assert_eq!(exit_code(&Error::Io("x".into())), 1);
    }
}
