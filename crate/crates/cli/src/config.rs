//! Run configuration: defaults, then the INI file, then the seed variable,
//! then flags.

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use embezzle_core::universal::{FamilyMember, RationalSchmidtFamily};
use embezzle_core::TargetState;
use ini::Ini;
use num_rational::Ratio;
use serde::Serialize;

use crate::CliError;

pub const SEED_VAR: &str = "EMBEZZLE_LAB_SEED";
pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const MAX_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    ToNoinput,
    ToStandard,
    Both,
}

/// Flags shared by the pipeline subcommands. Every field is optional so
/// that unset flags fall through to the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// `bell`, or comma-separated Schmidt coefficients such as `3/5,4/5`
    #[arg(long)]
    pub target: Option<String>,
    /// Family members separated by `;`, e.g. `bell;3/5,4/5`
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub copies: Option<u32>,
    #[arg(long)]
    pub depth: Option<u32>,
    /// Catalyst sizes `lo..hi` (doubling from lo) or a single size
    #[arg(long)]
    pub m: Option<String>,
    #[arg(long, value_enum)]
    pub direction: Option<Direction>,
    /// Comparison tolerance in (0, 1e-3]
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// INI file with a `[general]` section and one section per command
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// JSON report path; stdout when absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV data path, for commands that produce tables
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub target: String,
    pub family: String,
    pub copies: u32,
    pub depth: u32,
    pub m: String,
    pub direction: Direction,
    pub tolerance: f64,
    pub seed: u64,
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub csv: Option<PathBuf>,
}

fn default_copies(command: &str) -> u32 {
    match command {
        "certify" => 6,
        "demo-hotel" => 4,
        "universal" => 3,
        _ => 2,
    }
}

fn default_depth(command: &str) -> u32 {
    match command {
        "certify" => 4,
        _ => 2,
    }
}

fn parse_field<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, CliError> {
    value
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("cannot parse {key} = {value:?}")))
}

impl RunConfig {
    pub fn resolve(command: &str, flags: &Flags, env_seed: Option<String>) -> Result<Self, CliError> {
        let mut cfg = RunConfig {
            command: command.to_string(),
            target: "bell".into(),
            family: "bell;3/5,4/5".into(),
            copies: default_copies(command),
            depth: default_depth(command),
            m: "4..4096".into(),
            direction: Direction::Both,
            tolerance: DEFAULT_TOLERANCE,
            seed: DEFAULT_SEED,
            out: None,
            csv: None,
        };
        if let Some(path) = &flags.config {
            cfg.apply_file(path)?;
        }
        if let Some(s) = env_seed {
            cfg.seed = parse_field(SEED_VAR, &s)?;
        }
        if let Some(v) = &flags.target {
            cfg.target = v.clone();
        }
        if let Some(v) = &flags.family {
            cfg.family = v.clone();
        }
        if let Some(v) = flags.copies {
            cfg.copies = v;
        }
        if let Some(v) = flags.depth {
            cfg.depth = v;
        }
        if let Some(v) = &flags.m {
            cfg.m = v.clone();
        }
        if let Some(v) = flags.direction {
            cfg.direction = v;
        }
        if let Some(v) = flags.tolerance {
            cfg.tolerance = v;
        }
        if let Some(v) = flags.seed {
            cfg.seed = v;
        }
        cfg.out = flags.out.clone().or(cfg.out);
        cfg.csv = flags.csv.clone().or(cfg.csv);
        cfg.validate()?;
        Ok(cfg)
    }

    /// `[general]` applies first, then the section named after the command.
    fn apply_file(&mut self, path: &Path) -> Result<(), CliError> {
        let ini = Ini::load_from_file(path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        for section in ["general", self.command.clone().as_str()] {
            let Some(props) = ini.section(Some(section)) else { continue };
            for (key, value) in props.iter() {
                match key {
                    "target" => self.target = value.to_string(),
                    "family" => self.family = value.to_string(),
                    "copies" => self.copies = parse_field(key, value)?,
                    "depth" => self.depth = parse_field(key, value)?,
                    "m" => self.m = value.to_string(),
                    "direction" => {
                        self.direction = Direction::from_str(value, true)
                            .map_err(|_| CliError::Usage(format!("unknown direction {value:?}")))?
                    }
                    "tolerance" => self.tolerance = parse_field(key, value)?,
                    "seed" => self.seed = parse_field(key, value)?,
                    "out" => self.out = Some(PathBuf::from(value)),
                    "csv" => self.csv = Some(PathBuf::from(value)),
                    other => return Err(CliError::Usage(format!("unknown config key {other:?} in [{section}]"))),
                }
            }
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), CliError> {
        if !(self.tolerance > 0.0 && self.tolerance <= MAX_TOLERANCE) {
            return Err(CliError::Usage(format!("tolerance {} outside (0, 1e-3]", self.tolerance)));
        }
        if self.copies == 0 || self.copies > 64 {
            return Err(CliError::Usage(format!("copies {} outside 1..=64", self.copies)));
        }
        if self.depth == 0 || self.depth > 64 {
            return Err(CliError::Usage(format!("depth {} outside 1..=64", self.depth)));
        }
        Ok(())
    }

    pub fn target_state(&self) -> Result<TargetState, CliError> {
        parse_target(&self.target).map(|m| m.target)
    }

    pub fn family_members(&self) -> Result<RationalSchmidtFamily, CliError> {
        let members = self
            .family
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(parse_target)
            .collect::<Result<Vec<_>, _>>()?;
        RationalSchmidtFamily::from_members(members).map_err(|e| CliError::Usage(e.to_string()))
    }

    /// Sizes in the sweep: `lo..hi` doubles from `lo` up to `hi`.
    pub fn m_values(&self) -> Result<Vec<u32>, CliError> {
        let bad = || CliError::Usage(format!("cannot parse m range {:?}", self.m));
        let (lo, hi) = match self.m.split_once("..") {
            Some((lo, hi)) => (lo.trim().parse::<u32>().map_err(|_| bad())?, hi.trim().parse::<u32>().map_err(|_| bad())?),
            None => {
                let m = self.m.trim().parse::<u32>().map_err(|_| bad())?;
                (m, m)
            }
        };
        if lo < 2 || hi < lo || hi > 1 << 20 {
            return Err(CliError::Usage(format!("m range {lo}..{hi} must satisfy 2 ≤ lo ≤ hi ≤ 2^20")));
        }
        let mut out = Vec::new();
        let mut m = lo;
        while m <= hi {
            out.push(m);
            m = match m.checked_mul(2) {
                Some(next) => next,
                None => break,
            };
        }
        Ok(out)
    }
}

/// `bell`, exact rationals (`3/5,4/5`) or decimals (`0.6,0.8`).
pub fn parse_target(text: &str) -> Result<FamilyMember, CliError> {
    let text = text.trim();
    if text.eq_ignore_ascii_case("bell") {
        return Ok(FamilyMember { target: TargetState::bell(), exact: None });
    }
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let usage = |e: embezzle_core::Error| CliError::Usage(format!("target {text:?}: {e}"));
    if let Ok(exact) = parts.iter().map(|p| p.parse::<Ratio<i64>>()).collect::<Result<Vec<_>, _>>() {
        let target = TargetState::from_rationals(&exact).map_err(usage)?;
        return Ok(FamilyMember { target, exact: Some(exact) });
    }
    let coeffs = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| CliError::Usage(format!("cannot parse target {text:?}")))?;
    let n = coeffs.len() as u32;
    let target = TargetState::new(coeffs, n).map_err(usage)?;
    Ok(FamilyMember { target, exact: None })
}
