//! Experiment configuration: command-line flags merged over an optional flat
//! `key = value` file, then validated per subcommand. Every problem found is
//! reported together in one usage error.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use covertree_core::TreeParams;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Walk,
    Field,
    Gff,
    Scan,
    Fit,
    CompareCenterings,
    VerifyAnalytic,
    Summarize,
    PlotData,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::Walk,
        Command::Field,
        Command::Gff,
        Command::Scan,
        Command::Fit,
        Command::CompareCenterings,
        Command::VerifyAnalytic,
        Command::Summarize,
        Command::PlotData,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Walk => "walk",
            Command::Field => "field",
            Command::Gff => "gff",
            Command::Scan => "scan",
            Command::Fit => "fit",
            Command::CompareCenterings => "compare-centerings",
            Command::VerifyAnalytic => "verify-analytic",
            Command::Summarize => "summarize",
            Command::PlotData => "plot-data",
        }
    }

    /// Keys the command accepts.
    fn allowed(self) -> &'static [&'static str] {
        match self {
            Command::Walk => &[
                "depth",
                "t",
                "replicas",
                "seed",
                "workers",
                "out",
                "cover-only",
            ],
            Command::Field => &[
                "depth",
                "t",
                "replicas",
                "seed",
                "workers",
                "out",
                "emit-levels",
            ],
            Command::Gff => &["depth", "depth-range", "replicas", "seed", "workers", "out"],
            Command::Scan => &[
                "depth",
                "depth-range",
                "target",
                "tol",
                "replicas",
                "budget",
                "seed",
                "workers",
                "out",
            ],
            Command::Fit => &["in", "model", "out"],
            Command::CompareCenterings => &["cover", "gff", "out"],
            Command::VerifyAnalytic => &["seed", "workers", "out"],
            Command::Summarize => &["in"],
            Command::PlotData => &[
                "in", "engine", "depth", "t-grid", "replicas", "seed", "workers", "out",
            ],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| format!("unknown command `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Walk,
    Field,
    Gff,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Walk => "walk",
            Engine::Field => "field",
            Engine::Gff => "gff",
        }
    }
}

impl FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "walk" => Ok(Engine::Walk),
            "field" => Ok(Engine::Field),
            "gff" => Ok(Engine::Gff),
            _ => Err(format!(
                "unknown engine `{s}` (expected walk, field or gff)"
            )),
        }
    }
}

/// The only centering model `fit` understands.
pub const CENTERING_MODEL: &str = "A*n+B*log(n)+C";

/// Every configuration key, in canonical output order.
pub const KEYS: [&str; 18] = [
    "depth",
    "depth-range",
    "t",
    "t-grid",
    "replicas",
    "seed",
    "workers",
    "engine",
    "target",
    "tol",
    "budget",
    "cover-only",
    "emit-levels",
    "model",
    "in",
    "cover",
    "gff",
    "out",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub depth: Option<u32>,
    /// Inclusive.
    pub depth_range: Option<(u32, u32)>,
    pub t: Option<f64>,
    pub t_grid: Option<Vec<f64>>,
    pub replicas: Option<u64>,
    pub seed: Option<u64>,
    /// Dedicated worker count; absent means the ambient pool.
    pub workers: Option<usize>,
    pub engine: Option<Engine>,
    pub target: Option<f64>,
    pub tol: Option<f64>,
    pub budget: Option<usize>,
    pub cover_only: bool,
    pub emit_levels: bool,
    pub model: Option<String>,
    pub input: Option<PathBuf>,
    pub cover: Option<PathBuf>,
    pub gff: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn empty(command: Command) -> Self {
        Self {
            command,
            depth: None,
            depth_range: None,
            t: None,
            t_grid: None,
            replicas: None,
            seed: None,
            workers: None,
            engine: None,
            target: None,
            tol: None,
            budget: None,
            cover_only: false,
            emit_levels: false,
            model: None,
            input: None,
            cover: None,
            gff: None,
            out: None,
        }
    }

    /// Set keys as `(key, value)` strings in [`KEYS`] order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        let path = |p: &PathBuf| p.to_string_lossy().into_owned();
        let mut v: Vec<(&'static str, String)> = Vec::new();
        let mut put = |k: &'static str, val: Option<String>| {
            if let Some(val) = val {
                v.push((k, val));
            }
        };
        put("depth", self.depth.map(|d| d.to_string()));
        put(
            "depth-range",
            self.depth_range.map(|(a, b)| format!("{a}..{b}")),
        );
        put("t", self.t.map(|t| t.to_string()));
        put(
            "t-grid",
            self.t_grid
                .as_ref()
                .map(|g| g.iter().map(f64::to_string).collect::<Vec<_>>().join(",")),
        );
        put("replicas", self.replicas.map(|r| r.to_string()));
        put("seed", self.seed.map(|s| s.to_string()));
        put("workers", self.workers.map(|w| w.to_string()));
        put("engine", self.engine.map(|e| e.name().to_string()));
        put("target", self.target.map(|x| x.to_string()));
        put("tol", self.tol.map(|x| x.to_string()));
        put("budget", self.budget.map(|b| b.to_string()));
        put("cover-only", self.cover_only.then(|| "true".to_string()));
        put("emit-levels", self.emit_levels.then(|| "true".to_string()));
        put("model", self.model.clone());
        put("in", self.input.as_ref().map(path));
        put("cover", self.cover.as_ref().map(path));
        put("gff", self.gff.as_ref().map(path));
        put("out", self.out.as_ref().map(path));
        v
    }

    /// Config-file form, including the command.
    pub fn to_file_string(&self) -> String {
        let mut s = format!("command = {}\n", self.command);
        for (k, v) in self.to_pairs() {
            s.push_str(&format!("{k} = {v}\n"));
        }
        s
    }

    /// Typed config from raw pairs. Unknown keys and unparsable values are
    /// appended to `problems`.
    pub fn from_pairs(
        command: Command,
        pairs: &BTreeMap<String, String>,
        problems: &mut Vec<String>,
    ) -> Self {
        let mut c = Self::empty(command);
        for (k, v) in pairs {
            let v = v.as_str();
            let bad = |what: &str| format!("invalid value `{v}` for `{k}`: expected {what}");
            let r: std::result::Result<(), String> = match k.as_str() {
                "depth" => v
                    .parse()
                    .map(|x| c.depth = Some(x))
                    .map_err(|_| bad("an integer")),
                "depth-range" => parse_range(v)
                    .map(|x| c.depth_range = Some(x))
                    .ok_or_else(|| bad("LO..HI")),
                "t" => v
                    .parse()
                    .map(|x| c.t = Some(x))
                    .map_err(|_| bad("a number")),
                "t-grid" => parse_grid(v)
                    .map(|x| c.t_grid = Some(x))
                    .ok_or_else(|| bad("comma-separated numbers")),
                "replicas" => v
                    .parse()
                    .map(|x| c.replicas = Some(x))
                    .map_err(|_| bad("an integer")),
                "seed" => v
                    .parse()
                    .map(|x| c.seed = Some(x))
                    .map_err(|_| bad("an unsigned 64-bit integer")),
                "workers" => v
                    .parse()
                    .map(|x| c.workers = Some(x))
                    .map_err(|_| bad("an integer")),
                "engine" => v.parse().map(|x| c.engine = Some(x)),
                "target" => v
                    .parse()
                    .map(|x| c.target = Some(x))
                    .map_err(|_| bad("a number")),
                "tol" => v
                    .parse()
                    .map(|x| c.tol = Some(x))
                    .map_err(|_| bad("a number")),
                "budget" => v
                    .parse()
                    .map(|x| c.budget = Some(x))
                    .map_err(|_| bad("an integer")),
                "cover-only" => v
                    .parse()
                    .map(|x| c.cover_only = x)
                    .map_err(|_| bad("true or false")),
                "emit-levels" => v
                    .parse()
                    .map(|x| c.emit_levels = x)
                    .map_err(|_| bad("true or false")),
                "model" => {
                    c.model = Some(v.to_string());
                    Ok(())
                }
                "in" => {
                    c.input = Some(PathBuf::from(v));
                    Ok(())
                }
                "cover" => {
                    c.cover = Some(PathBuf::from(v));
                    Ok(())
                }
                "gff" => {
                    c.gff = Some(PathBuf::from(v));
                    Ok(())
                }
                "out" => {
                    c.out = Some(PathBuf::from(v));
                    Ok(())
                }
                _ => Err(format!("unknown key `{k}`")),
            };
            if let Err(e) = r {
                problems.push(e);
            }
        }
        c
    }

    /// Checks required, conflicting and out-of-domain keys for the command
    /// and fills in defaults.
    pub fn validate(&mut self, problems: &mut Vec<String>) {
        let cmd = self.command;
        let allowed = cmd.allowed();
        for (k, _) in self.to_pairs() {
            if !allowed.contains(&k) {
                problems.push(format!("key `{k}` is not used by `{cmd}`"));
            }
        }
        let missing = |p: &mut Vec<String>, k: &str| p.push(format!("missing required key `{k}`"));
        let need = |p: &mut Vec<String>, present: bool, k: &str| {
            if !present {
                missing(p, k);
            }
        };
        match cmd {
            Command::Walk => {
                need(problems, self.depth.is_some(), "depth");
                if self.cover_only {
                    if self.t.is_some() {
                        problems.push("`t` conflicts with `cover-only`".into());
                    }
                } else {
                    need(problems, self.t.is_some(), "t");
                }
                need(problems, self.replicas.is_some(), "replicas");
                need(problems, self.seed.is_some(), "seed");
            }
            Command::Field => {
                for (present, k) in [
                    (self.depth.is_some(), "depth"),
                    (self.t.is_some(), "t"),
                    (self.replicas.is_some(), "replicas"),
                    (self.seed.is_some(), "seed"),
                ] {
                    need(problems, present, k);
                }
            }
            Command::Gff | Command::Scan => {
                match (self.depth.is_some(), self.depth_range.is_some()) {
                    (true, true) => problems.push("`depth` conflicts with `depth-range`".into()),
                    (false, false) => missing(problems, "depth` or `depth-range"),
                    _ => {}
                }
                need(problems, self.seed.is_some(), "seed");
                if cmd == Command::Gff {
                    need(problems, self.replicas.is_some(), "replicas");
                } else {
                    self.target.get_or_insert(0.5);
                    self.tol.get_or_insert(0.02);
                    self.replicas.get_or_insert(2000);
                    self.budget.get_or_insert(40);
                }
            }
            Command::Fit => {
                need(problems, self.input.is_some(), "in");
                let model = self
                    .model
                    .get_or_insert_with(|| CENTERING_MODEL.to_string());
                let squeezed: String = model.chars().filter(|c| !c.is_whitespace()).collect();
                if squeezed != CENTERING_MODEL {
                    problems.push(format!(
                        "unsupported model `{model}` (only `{CENTERING_MODEL}` is available)"
                    ));
                }
            }
            Command::CompareCenterings => {
                need(problems, self.cover.is_some(), "cover");
                need(problems, self.gff.is_some(), "gff");
            }
            Command::VerifyAnalytic => need(problems, self.seed.is_some(), "seed"),
            Command::Summarize => need(problems, self.input.is_some(), "in"),
            Command::PlotData => {
                if self.input.is_some() {
                    for (present, k) in [
                        (self.engine.is_some(), "engine"),
                        (self.depth.is_some(), "depth"),
                        (self.t_grid.is_some(), "t-grid"),
                        (self.replicas.is_some(), "replicas"),
                        (self.seed.is_some(), "seed"),
                    ] {
                        if present {
                            problems.push(format!("`{k}` conflicts with `in`"));
                        }
                    }
                } else {
                    for (present, k) in [
                        (self.engine.is_some(), "engine"),
                        (self.depth.is_some(), "depth"),
                        (self.t_grid.is_some(), "t-grid"),
                        (self.replicas.is_some(), "replicas"),
                        (self.seed.is_some(), "seed"),
                    ] {
                        need(problems, present, k);
                    }
                    if self.engine == Some(Engine::Gff) {
                        problems
                            .push("engine `gff` has no local-time parameter to scan over".into());
                    }
                }
            }
        }
        self.check_domains(problems);
    }

    fn check_domains(&self, problems: &mut Vec<String>) {
        let mut domain = |msg: String| problems.push(format!("domain error: {msg}"));
        if let Some(d) = self.depth {
            if d < 1 {
                domain(format!("depth {d} must be at least 1"));
            } else if let Err(e) = TreeParams::new(d) {
                domain(e.to_string());
            }
        }
        if let Some((a, b)) = self.depth_range {
            if a < 1 || a > b {
                domain(format!("depth-range {a}..{b} must satisfy 1 <= LO <= HI"));
            } else if let Err(e) = TreeParams::new(b) {
                domain(e.to_string());
            }
        }
        if let Some(t) = self.t {
            if !(t > 0.0 && t.is_finite()) {
                domain(format!("t = {t} must be positive and finite"));
            }
        }
        if let Some(g) = &self.t_grid {
            if g.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
                domain("every t-grid value must be positive and finite".into());
            }
        }
        // a single-depth record stream may be empty
        let streams = matches!(self.command, Command::Walk | Command::Field)
            || (self.command == Command::Gff && self.depth_range.is_none());
        if self.replicas == Some(0) && !streams {
            domain("replicas must be at least 1".into());
        }
        if self.workers == Some(0) {
            domain("workers must be at least 1".into());
        }
        if let Some(x) = self.target {
            if !(x > 0.0 && x < 1.0) {
                domain(format!("target {x} must lie in (0, 1)"));
            }
        }
        if let Some(x) = self.tol {
            if !(x > 0.0) {
                domain(format!("tol {x} must be positive"));
            }
        }
        if let Some(b) = self.budget {
            if b < 2 {
                domain(format!("budget {b} must allow at least two probes"));
            }
        }
    }

    /// Depths the command runs over: `depth` alone or the whole range.
    pub fn depths(&self) -> Vec<u32> {
        match (self.depth, self.depth_range) {
            (Some(d), _) => vec![d],
            (None, Some((a, b))) => (a..=b).collect(),
            (None, None) => Vec::new(),
        }
    }
}

fn parse_range(s: &str) -> Option<(u32, u32)> {
    let (a, b) = s.split_once("..")?;
    Some((a.trim().parse().ok()?, b.trim().parse().ok()?))
}

fn parse_grid(s: &str) -> Option<Vec<f64>> {
    let v: Option<Vec<f64>> = s.split(',').map(|x| x.trim().parse().ok()).collect();
    v.filter(|g| !g.is_empty())
}

/// Parses a flat config file: `key = value` lines, `#` comments, an optional
/// `command = NAME` line.
pub fn parse_config_text(
    text: &str,
    problems: &mut Vec<String>,
) -> (Option<Command>, BTreeMap<String, String>) {
    let mut command = None;
    let mut pairs = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            problems.push(format!("config line {}: expected `key = value`", i + 1));
            continue;
        };
        let (k, v) = (k.trim(), v.trim());
        if k == "command" {
            match v.parse() {
                Ok(c) => command = Some(c),
                Err(e) => problems.push(format!("config line {}: {e}", i + 1)),
            }
        } else if pairs.insert(k.to_string(), v.to_string()).is_some() {
            problems.push(format!("config line {}: duplicate key `{k}`", i + 1));
        }
    }
    (command, pairs)
}

#[derive(Parser, Debug)]
#[command(
    name = "covertree",
    version,
    about = "Cover-time and free-field experiments on binary trees"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Continuous-time random walk replicas up to τ(t), or up to cover time
    Walk(Flags),
    /// Direct local-time field replicas at τ(t)
    Field(Flags),
    /// Gaussian free field maxima (JSONL for one depth, CSV for a range)
    Gff(Flags),
    /// Bisection for the coverage threshold t* at each depth
    Scan(Flags),
    /// Least-squares fit of A*n + B*log(n) + C to a scan or gff summary
    Fit(Flags),
    /// Table of fitted log-corrections for the cover threshold and the free field
    CompareCenterings(Flags),
    /// Runs the analytic invariant suite
    VerifyAnalytic(Flags),
    /// Recomputes the replica summary of a JSONL run
    Summarize(Flags),
    /// Emits (x, y, yerr) CSV for external plotting
    PlotData(Flags),
}

#[derive(Args, Debug)]
struct Flags {
    /// Flat `key = value` file; flags take precedence
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    depth: Option<String>,
    /// Inclusive depth range LO..HI
    #[arg(long = "depth-range", value_name = "LO..HI")]
    depth_range: Option<String>,
    /// Root local time
    #[arg(long)]
    t: Option<String>,
    /// Comma-separated root local times
    #[arg(long = "t-grid", value_name = "T1,T2,...")]
    t_grid: Option<String>,
    #[arg(long)]
    replicas: Option<String>,
    /// Master seed
    #[arg(long)]
    seed: Option<String>,
    /// Dedicated worker count (default: the ambient pool)
    #[arg(long)]
    workers: Option<String>,
    /// walk | field | gff
    #[arg(long)]
    engine: Option<String>,
    /// Coverage probability defining t*
    #[arg(long, allow_negative_numbers = true)]
    target: Option<String>,
    /// Relative bracket width on √t
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<String>,
    /// Maximum number of probes per depth
    #[arg(long)]
    budget: Option<String>,
    /// Stop at the cover time instead of τ(t)
    #[arg(long = "cover-only")]
    cover_only: bool,
    /// Add per-level min/mean arrays to field records
    #[arg(long = "emit-levels")]
    emit_levels: bool,
    #[arg(long)]
    model: Option<String>,
    #[arg(long = "in", value_name = "FILE")]
    input: Option<String>,
    /// Scan CSV
    #[arg(long, value_name = "FILE")]
    cover: Option<String>,
    /// Free-field CSV
    #[arg(long, value_name = "FILE")]
    gff: Option<String>,
    #[arg(long, value_name = "FILE")]
    out: Option<String>,
}

impl Flags {
    fn pairs(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: &Option<String>| {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        };
        put("depth", &self.depth);
        put("depth-range", &self.depth_range);
        put("t", &self.t);
        put("t-grid", &self.t_grid);
        put("replicas", &self.replicas);
        put("seed", &self.seed);
        put("workers", &self.workers);
        put("engine", &self.engine);
        put("target", &self.target);
        put("tol", &self.tol);
        put("budget", &self.budget);
        put("model", &self.model);
        put("in", &self.input);
        put("cover", &self.cover);
        put("gff", &self.gff);
        put("out", &self.out);
        if self.cover_only {
            m.insert("cover-only".into(), "true".into());
        }
        if self.emit_levels {
            m.insert("emit-levels".into(), "true".into());
        }
        m
    }
}

/// Parses and validates a command line (program name first).
pub fn parse_args<I, T>(argv: I) -> Result<ExperimentConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
            CliError::Info(e.render().to_string())
        }
        _ => CliError::Usage(e.render().to_string()),
    })?;
    let (command, flags) = match cli.command {
        Sub::Walk(f) => (Command::Walk, f),
        Sub::Field(f) => (Command::Field, f),
        Sub::Gff(f) => (Command::Gff, f),
        Sub::Scan(f) => (Command::Scan, f),
        Sub::Fit(f) => (Command::Fit, f),
        Sub::CompareCenterings(f) => (Command::CompareCenterings, f),
        Sub::VerifyAnalytic(f) => (Command::VerifyAnalytic, f),
        Sub::Summarize(f) => (Command::Summarize, f),
        Sub::PlotData(f) => (Command::PlotData, f),
    };

    let mut problems = Vec::new();
    let mut pairs = BTreeMap::new();
    if let Some(path) = &flags.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let (file_cmd, file_pairs) = parse_config_text(&text, &mut problems);
        if let Some(fc) = file_cmd.filter(|fc| *fc != command) {
            problems.push(format!(
                "config file command `{fc}` conflicts with subcommand `{command}`"
            ));
        }
        pairs = file_pairs;
    }
    pairs.extend(flags.pairs());
    let mut cfg = ExperimentConfig::from_pairs(command, &pairs, &mut problems);
    cfg.validate(&mut problems);
    if problems.is_empty() {
        Ok(cfg)
    } else {
        Err(CliError::Usage(format!(
            "error: invalid configuration for `{command}`:\n{}",
            problems
                .iter()
                .map(|p| format!("  - {p}\n"))
                .collect::<String>()
        )))
    }
}
