use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use doublematch::verify::paper_profiles;
use doublematch::ExponentProfile;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    MatchVerify,
    ScalingVerify,
    PiDemo,
    Profiles,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Mode::MatchVerify => "match-verify",
            Mode::ScalingVerify => "scaling-verify",
            Mode::PiDemo => "pi-demo",
            Mode::Profiles => "profiles",
        };
        f.write_str(name)
    }
}

/// A profile given either by fixture name or by its exponents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProfileChoice {
    Named(String),
    Explicit(serde_json::Value),
}

impl Default for ProfileChoice {
    fn default() -> Self {
        ProfileChoice::Named("reference".into())
    }
}

/// Fixture names accepted in configs, with their profiles.
pub fn named_profiles() -> Vec<(&'static str, ExponentProfile)> {
    let mut out = vec![
        ("reference", ExponentProfile::new(1.0, 3.0, 4.0, 2.0, 2.0, 0, 1.0).expect("valid")),
        ("trivial", ExponentProfile::new(1.0, 3.0, 1.5, 1.0, 1.0, 0, 1.0).expect("valid")),
    ];
    out.extend(paper_profiles().into_iter().map(|pp| (pp.name, pp.profile)));
    out
}

impl ProfileChoice {
    pub fn resolve(&self) -> Result<ExponentProfile> {
        match self {
            ProfileChoice::Named(name) => named_profiles()
                .into_iter()
                .find(|(n, _)| n.eq_ignore_ascii_case(name))
                .map(|(_, p)| p)
                .ok_or_else(|| {
                    let known: Vec<_> = named_profiles().iter().map(|(n, _)| *n).collect();
                    anyhow!("field `profile`: unknown fixture {name:?} (known: {})", known.join(", "))
                }),
            ProfileChoice::Explicit(value) => {
                let p: ExponentProfile =
                    serde_json::from_value(value.clone()).map_err(|e| anyhow!("field `profile`: {e}"))?;
                p.validate()?;
                Ok(p)
            }
        }
    }
}

fn default_n_min() -> i32 {
    3
}
fn default_n_max() -> i32 {
    10
}
fn default_grid_m() -> usize {
    256
}
fn default_tol() -> f64 {
    0.3
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub mode: Option<Mode>,
    #[serde(default)]
    pub profile: ProfileChoice,
    #[serde(default = "default_n_min")]
    pub n_min_exp: i32,
    #[serde(default = "default_n_max")]
    pub n_max_exp: i32,
    #[serde(default = "default_grid_m")]
    pub grid_m: usize,
    #[serde(default = "default_tol")]
    pub tol_slope: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| anyhow!("config: {e}"))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode.is_none() {
            bail!("no mode given (positional argument, --mode, or field `mode`)");
        }
        if self.n_min_exp >= self.n_max_exp {
            bail!("field `n_min_exp`: must be below n_max_exp ({} >= {})", self.n_min_exp, self.n_max_exp);
        }
        if self.n_min_exp < 0 || self.n_max_exp > 20 {
            bail!("fields `n_min_exp`/`n_max_exp`: sweep exponents must lie in 0..=20");
        }
        if !self.grid_m.is_power_of_two() || self.grid_m < 16 {
            bail!("field `grid_m`: must be a power of two >= 16 (got {})", self.grid_m);
        }
        if !(self.tol_slope > 0.0 && self.tol_slope.is_finite()) {
            bail!("field `tol_slope`: must be positive (got {})", self.tol_slope);
        }
        Ok(())
    }

    pub fn n_values(&self) -> Vec<f64> {
        doublematch::verify::geometric_sweep(self.n_min_exp, self.n_max_exp)
    }
}
