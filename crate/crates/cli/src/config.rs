//! Experiment configuration: a flat key-value text format with sections,
//! chosen so a config is trivially parseable from any language and diffs
//! cleanly in experiment logs.
//!
//! ```text
//! [experiment]
//! command = battery        # optional; must match the CLI command if set
//! seed = 0                 # reserved for randomized profiles; built-ins are deterministic
//!
//! [domain]
//! kind = interval          # interval | square | disk
//! x0 = 0.0                 # interval / square extents
//! x1 = 1.0
//! radius = 1.0             # disk only
//! n = 128                  # cells per axis, n >= 8
//!
//! [problem]
//! p = 2.0                  # 1 < p
//!
//! [initial]
//! profile = eigenfield     # eigenfield | sine-bump | scaled-eigenfield | custom
//! scale = 0.5              # scaled-eigenfield factor, 0 < scale <= 4
//! path = data.csv          # custom profile CSV (x[,y],value)
//!
//! [evolution]
//! t_end = 0.5
//! stride = 64              # snapshot every this many accepted steps
//! scheme = explicit        # explicit | semi-implicit
//! cfl = 0.4                # omit for the scheme default
//! eps = auto               # auto | a number >= 0
//!
//! [solver]
//! tol = 5e-3
//! max_iters = 40000
//! stages = 4
//!
//! [check]
//! beta = 1.1               # certificate margin, > 1
//! t_tail = 0.25            # asymptotics window start
//! constant = 0.5           # battery lift constant, > 0
//! bumps = 5                # battery size, >= 1
//!
//! [output]
//! dir = out
//! ```
//!
//! Unknown keys are errors (they are usually typos), and every diagnostic
//! names the offending `section.key`. [`ExperimentConfig::echo`] serializes
//! the *effective* config — defaults filled in — such that re-parsing the
//! echo reproduces the config exactly.

use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

/// The six runnable commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CommandKind {
    /// Solve the eigenproblem and export the eigenfield.
    Eigen,
    /// March the evolution and export the trace.
    Evolve,
    /// Ordering audit plus comparison certificate for g/2 against g.
    Compare,
    /// Large-time rescaled profile and decay-rate fit.
    Asymptotics,
    /// Pointwise viscosity-style audit of a solver trace.
    Audit,
    /// The full check battery on one fixture.
    Battery,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Eigen => "eigen",
            CommandKind::Evolve => "evolve",
            CommandKind::Compare => "compare",
            CommandKind::Asymptotics => "asymptotics",
            CommandKind::Audit => "audit",
            CommandKind::Battery => "battery",
        }
    }

    fn parse(raw: &str) -> Option<CommandKind> {
        Some(match raw {
            "eigen" => CommandKind::Eigen,
            "evolve" => CommandKind::Evolve,
            "compare" => CommandKind::Compare,
            "asymptotics" => CommandKind::Asymptotics,
            "audit" => CommandKind::Audit,
            "battery" => CommandKind::Battery,
            _ => return None,
        })
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DomainKind {
    Interval,
    Square,
    Disk,
}

impl DomainKind {
    fn name(self) -> &'static str {
        match self {
            DomainKind::Interval => "interval",
            DomainKind::Square => "square",
            DomainKind::Disk => "disk",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    Eigenfield,
    SineBump,
    ScaledEigenfield,
    Custom,
}

impl ProfileKind {
    fn name(self) -> &'static str {
        match self {
            ProfileKind::Eigenfield => "eigenfield",
            ProfileKind::SineBump => "sine-bump",
            ProfileKind::ScaledEigenfield => "scaled-eigenfield",
            ProfileKind::Custom => "custom",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchemeKind {
    Explicit,
    SemiImplicit,
}

impl SchemeKind {
    fn name(self) -> &'static str {
        match self {
            SchemeKind::Explicit => "explicit",
            SchemeKind::SemiImplicit => "semi-implicit",
        }
    }
}

/// Effective experiment configuration after defaults. Field-for-field this
/// mirrors the config file; see the module docs for the schema.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Option<CommandKind>,
    pub seed: u64,
    pub domain_kind: DomainKind,
    pub x0: f64,
    pub x1: f64,
    pub radius: f64,
    pub n: usize,
    pub p: f64,
    pub profile: ProfileKind,
    pub scale: f64,
    pub data_path: Option<PathBuf>,
    pub t_end: f64,
    pub stride: usize,
    pub scheme: SchemeKind,
    pub cfl: Option<f64>,
    pub eps: Option<f64>,
    pub tol: f64,
    pub max_iters: usize,
    pub stages: usize,
    pub beta: f64,
    pub t_tail: Option<f64>,
    pub constant: f64,
    pub bumps: usize,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: None,
            seed: 0,
            domain_kind: DomainKind::Interval,
            x0: 0.0,
            x1: 1.0,
            radius: 1.0,
            n: 128,
            p: 2.0,
            profile: ProfileKind::Eigenfield,
            scale: 0.5,
            data_path: None,
            t_end: 0.5,
            stride: 64,
            scheme: SchemeKind::Explicit,
            cfl: None,
            eps: None,
            tol: 5e-3,
            max_iters: 40_000,
            stages: 4,
            beta: 1.1,
            t_tail: None,
            constant: 0.5,
            bumps: 5,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: std::str::FromStr>(section: &str, key: &str, raw: &str, what: &str) -> Result<T> {
    raw.parse::<T>().map_err(|_| {
        anyhow::anyhow!("config key `{section}.{key}`: expected {what}, got `{raw}`")
    })
}

impl ExperimentConfig {
    /// Parse the text format. Every error names the offending key.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let mut section = String::new();
        for (lineno, raw_line) in text.lines().enumerate() {
            let line = match raw_line.find('#') {
                Some(i) => &raw_line[..i],
                None => raw_line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let Some(name) = name.strip_suffix(']') else {
                    bail!("line {}: malformed section header `{line}`", lineno + 1);
                };
                section = name.trim().to_string();
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("line {}: expected `key = value`, got `{line}`", lineno + 1);
            };
            let key = key.trim();
            let value = value.trim();
            cfg.apply(&section, key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read and parse a config file.
    pub fn load(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        ExperimentConfig::parse(&text)
            .with_context(|| format!("parsing config {}", path.display()))
    }

    fn apply(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        match (section, key) {
            ("experiment", "command") => {
                self.command = Some(CommandKind::parse(value).ok_or_else(|| {
                    anyhow::anyhow!(
                        "config key `experiment.command`: unknown command `{value}` \
                         (expected eigen, evolve, compare, asymptotics, audit, or battery)"
                    )
                })?);
            }
            ("experiment", "seed") => self.seed = parse_num(section, key, value, "an integer")?,
            ("domain", "kind") => {
                self.domain_kind = match value {
                    "interval" => DomainKind::Interval,
                    "square" => DomainKind::Square,
                    "disk" => DomainKind::Disk,
                    _ => bail!(
                        "config key `domain.kind`: unknown kind `{value}` \
                         (expected interval, square, or disk)"
                    ),
                };
            }
            ("domain", "x0") => self.x0 = parse_num(section, key, value, "a real number")?,
            ("domain", "x1") => self.x1 = parse_num(section, key, value, "a real number")?,
            ("domain", "radius") => {
                self.radius = parse_num(section, key, value, "a real number")?
            }
            ("domain", "n") => self.n = parse_num(section, key, value, "an integer")?,
            ("problem", "p") => self.p = parse_num(section, key, value, "a real number")?,
            ("initial", "profile") => {
                self.profile = match value {
                    "eigenfield" => ProfileKind::Eigenfield,
                    "sine-bump" => ProfileKind::SineBump,
                    "scaled-eigenfield" => ProfileKind::ScaledEigenfield,
                    "custom" => ProfileKind::Custom,
                    _ => bail!(
                        "config key `initial.profile`: unknown profile `{value}` (expected \
                         eigenfield, sine-bump, scaled-eigenfield, or custom)"
                    ),
                };
            }
            ("initial", "scale") => self.scale = parse_num(section, key, value, "a real number")?,
            ("initial", "path") => self.data_path = Some(PathBuf::from(value)),
            ("evolution", "t_end") => self.t_end = parse_num(section, key, value, "a real number")?,
            ("evolution", "stride") => self.stride = parse_num(section, key, value, "an integer")?,
            ("evolution", "scheme") => {
                self.scheme = match value {
                    "explicit" => SchemeKind::Explicit,
                    "semi-implicit" => SchemeKind::SemiImplicit,
                    _ => bail!(
                        "config key `evolution.scheme`: unknown scheme `{value}` \
                         (expected explicit or semi-implicit)"
                    ),
                };
            }
            ("evolution", "cfl") => {
                self.cfl = Some(parse_num(section, key, value, "a real number")?)
            }
            ("evolution", "eps") => {
                self.eps = if value == "auto" {
                    None
                } else {
                    Some(parse_num(section, key, value, "`auto` or a real number")?)
                };
            }
            ("solver", "tol") => self.tol = parse_num(section, key, value, "a real number")?,
            ("solver", "max_iters") => {
                self.max_iters = parse_num(section, key, value, "an integer")?
            }
            ("solver", "stages") => self.stages = parse_num(section, key, value, "an integer")?,
            ("check", "beta") => self.beta = parse_num(section, key, value, "a real number")?,
            ("check", "t_tail") => {
                self.t_tail = Some(parse_num(section, key, value, "a real number")?)
            }
            ("check", "constant") => {
                self.constant = parse_num(section, key, value, "a real number")?
            }
            ("check", "bumps") => self.bumps = parse_num(section, key, value, "an integer")?,
            ("output", "dir") => self.out_dir = PathBuf::from(value),
            _ => bail!("unknown config key `{section}.{key}`"),
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        if !(self.p > 1.0) || !self.p.is_finite() {
            bail!(
                "config key `problem.p`: the exponent requires 1 < p, got {}",
                self.p
            );
        }
        if self.n < 8 {
            bail!("config key `domain.n`: requires n >= 8, got {}", self.n);
        }
        if !(self.x1 > self.x0) {
            bail!(
                "config key `domain.x1`: extents require x0 < x1, got [{}, {}]",
                self.x0,
                self.x1
            );
        }
        if !(self.radius > 0.0) {
            bail!(
                "config key `domain.radius`: requires radius > 0, got {}",
                self.radius
            );
        }
        if !(self.t_end > 0.0) || !self.t_end.is_finite() {
            bail!(
                "config key `evolution.t_end`: requires T > 0, got {}",
                self.t_end
            );
        }
        if self.stride == 0 {
            bail!("config key `evolution.stride`: requires stride >= 1");
        }
        if let Some(c) = self.cfl {
            if !(c > 0.0 && c <= 1.0) {
                bail!(
                    "config key `evolution.cfl`: requires 0 < cfl <= 1, got {c}"
                );
            }
        }
        if let Some(e) = self.eps {
            if !(e >= 0.0) || !e.is_finite() {
                bail!("config key `evolution.eps`: requires eps >= 0, got {e}");
            }
        }
        if !(self.tol > 0.0) {
            bail!("config key `solver.tol`: requires tol > 0, got {}", self.tol);
        }
        if self.max_iters == 0 {
            bail!("config key `solver.max_iters`: requires max_iters >= 1");
        }
        if self.stages == 0 {
            bail!("config key `solver.stages`: requires stages >= 1");
        }
        if !(self.beta > 1.0) {
            bail!(
                "config key `check.beta`: the certificate margin requires beta > 1, got {}",
                self.beta
            );
        }
        if !(self.scale > 0.0 && self.scale <= 4.0) {
            bail!(
                "config key `initial.scale`: documented range is 0 < scale <= 4, got {}",
                self.scale
            );
        }
        if let Some(t) = self.t_tail {
            if !(t >= 0.0 && t < self.t_end) {
                bail!(
                    "config key `check.t_tail`: requires 0 <= t_tail < t_end, got {t}"
                );
            }
        }
        if !(self.constant > 0.0) {
            bail!(
                "config key `check.constant`: requires constant > 0, got {}",
                self.constant
            );
        }
        if self.bumps == 0 {
            bail!("config key `check.bumps`: requires bumps >= 1");
        }
        if self.profile == ProfileKind::Custom && self.data_path.is_none() {
            bail!("config key `initial.path`: required when initial.profile = custom");
        }
        Ok(())
    }

    /// Tail window start for the asymptotics command: explicit key or half
    /// the horizon.
    pub fn tail_start(&self) -> f64 {
        self.t_tail.unwrap_or(0.5 * self.t_end)
    }

    /// Serialize the effective config — every key explicit, fixed order —
    /// so that `parse(echo()) == self` and a re-run from the echo reproduces
    /// the experiment.
    pub fn echo(&self, command: CommandKind) -> String {
        let mut s = String::new();
        s.push_str("[experiment]\n");
        s.push_str(&format!("command = {}\n", command.name()));
        s.push_str(&format!("seed = {}\n", self.seed));
        s.push_str("\n[domain]\n");
        s.push_str(&format!("kind = {}\n", self.domain_kind.name()));
        s.push_str(&format!("x0 = {}\n", fmt_f64(self.x0)));
        s.push_str(&format!("x1 = {}\n", fmt_f64(self.x1)));
        s.push_str(&format!("radius = {}\n", fmt_f64(self.radius)));
        s.push_str(&format!("n = {}\n", self.n));
        s.push_str("\n[problem]\n");
        s.push_str(&format!("p = {}\n", fmt_f64(self.p)));
        s.push_str("\n[initial]\n");
        s.push_str(&format!("profile = {}\n", self.profile.name()));
        s.push_str(&format!("scale = {}\n", fmt_f64(self.scale)));
        if let Some(path) = &self.data_path {
            s.push_str(&format!("path = {}\n", path.display()));
        }
        s.push_str("\n[evolution]\n");
        s.push_str(&format!("t_end = {}\n", fmt_f64(self.t_end)));
        s.push_str(&format!("stride = {}\n", self.stride));
        s.push_str(&format!("scheme = {}\n", self.scheme.name()));
        if let Some(c) = self.cfl {
            s.push_str(&format!("cfl = {}\n", fmt_f64(c)));
        }
        match self.eps {
            Some(e) => s.push_str(&format!("eps = {}\n", fmt_f64(e))),
            None => s.push_str("eps = auto\n"),
        }
        s.push_str("\n[solver]\n");
        s.push_str(&format!("tol = {}\n", fmt_f64(self.tol)));
        s.push_str(&format!("max_iters = {}\n", self.max_iters));
        s.push_str(&format!("stages = {}\n", self.stages));
        s.push_str("\n[check]\n");
        s.push_str(&format!("beta = {}\n", fmt_f64(self.beta)));
        if let Some(t) = self.t_tail {
            s.push_str(&format!("t_tail = {}\n", fmt_f64(t)));
        }
        s.push_str(&format!("constant = {}\n", fmt_f64(self.constant)));
        s.push_str(&format!("bumps = {}\n", self.bumps));
        s.push_str("\n[output]\n");
        s.push_str(&format!("dir = {}\n", self.out_dir.display()));
        s
    }
}

/// Shortest decimal that round-trips; config echoes stay human-readable
/// without losing a bit.
fn fmt_f64(x: f64) -> String {
    let s = format!("{x}");
    debug_assert_eq!(s.parse::<f64>().unwrap(), x);
    s
}
