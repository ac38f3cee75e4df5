//! Run configuration: TOML in, JSON echo out.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use robustq::{Claim, LognormalKernel, RobustObjective, SolveMode, SolveSettings, SolverGrid, UtilitySpec};

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    #[serde(default)]
    pub market: Market,
    pub claim: ClaimConfig,
    pub utility: UtilityConfig,
    pub alpha: f64,
    /// Initial endowment; exclusive with `lambda`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    /// Budget multiplier; exclusive with `x`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default)]
    pub numerics: Numerics,
    #[serde(default)]
    pub output: Output,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Market {
    pub r: f64,
    pub theta: f64,
    #[serde(rename = "T")]
    pub maturity: f64,
}

impl Default for Market {
    fn default() -> Self {
        Self { r: 0.02, theta: 0.25, maturity: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimConfig {
    Uniform { y: f64 },
    TruncatedNormal { mu: f64, sigma: f64, a: f64, b: f64 },
    Constant { value: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UtilityConfig {
    pub c: Vec<f64>,
    pub gamma: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeConfig {
    ActiveSet,
    Penalized,
}

impl From<ModeConfig> for SolveMode {
    fn from(m: ModeConfig) -> Self {
        match m {
            ModeConfig::ActiveSet => SolveMode::ActiveSet,
            ModeConfig::Penalized => SolveMode::Penalized,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Numerics {
    /// Number of grid nodes, endpoints included.
    pub grid_n: usize,
    pub eps_p: f64,
    pub tolerance: f64,
    pub ode_tolerance: f64,
    pub mode: ModeConfig,
    pub refine: bool,
    /// State-price points of the payoff profile.
    pub rho_points: usize,
    /// Monte Carlo samples for the budget diagnostic; 0 disables it.
    pub mc_samples: usize,
}

impl Default for Numerics {
    fn default() -> Self {
        Self {
            grid_n: 4001,
            eps_p: 1e-6,
            tolerance: 1e-6,
            ode_tolerance: 1e-5,
            mode: ModeConfig::ActiveSet,
            refine: true,
            rho_points: 2001,
            mc_samples: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub directory: PathBuf,
    pub format: String,
}

impl Default for Output {
    fn default() -> Self {
        Self { directory: PathBuf::from("out"), format: "csv".into() }
    }
}

/// Either side of the budget constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Target {
    Endowment(f64),
    Multiplier(f64),
}

/// Validated model objects built from a [`Config`].
#[derive(Debug, Clone)]
pub struct Model {
    pub objective: RobustObjective,
    pub kernel: LognormalKernel,
    pub settings: SolveSettings,
    pub target: Target,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: Config = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.model()?;
        Ok(config)
    }

    pub fn target(&self) -> Result<Target, CliError> {
        match (self.x, self.lambda) {
            (Some(_), Some(_)) => Err(CliError::Config("both x and lambda are given; set exactly one".into())),
            (None, None) => Err(CliError::Config("neither x nor lambda is given; set exactly one".into())),
            (Some(x), None) if x > 0.0 && x.is_finite() => Ok(Target::Endowment(x)),
            (None, Some(l)) if l > 0.0 && l.is_finite() => Ok(Target::Multiplier(l)),
            (Some(x), None) => Err(CliError::Config(format!("x must be positive and finite, got {x}"))),
            (None, Some(l)) => Err(CliError::Config(format!("lambda must be positive and finite, got {l}"))),
        }
    }

    pub fn kernel(&self) -> Result<LognormalKernel, CliError> {
        let m = &self.market;
        LognormalKernel::new(m.r, m.theta, m.maturity).map_err(config_error("market"))
    }

    pub fn settings(&self) -> Result<SolveSettings, CliError> {
        let n = &self.numerics;
        if n.grid_n < 3 {
            return Err(CliError::Config(format!("numerics.grid_n must be at least 3, got {}", n.grid_n)));
        }
        if !(n.tolerance > 0.0 && n.ode_tolerance > 0.0) {
            return Err(CliError::Config("numerics tolerances must be positive".into()));
        }
        if n.rho_points < 2 {
            return Err(CliError::Config("numerics.rho_points must be at least 2".into()));
        }
        let grid = SolverGrid::new(n.grid_n - 1, n.eps_p).map_err(config_error("numerics"))?;
        Ok(SolveSettings {
            grid,
            tolerance: n.tolerance,
            ode_tolerance: n.ode_tolerance,
            mode: n.mode.into(),
            refine: n.refine,
        })
    }

    pub fn model(&self) -> Result<Model, CliError> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(CliError::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        let claim = match self.claim {
            ClaimConfig::Uniform { y } => Claim::uniform(y),
            ClaimConfig::TruncatedNormal { mu, sigma, a, b } => Claim::truncated_normal(mu, sigma, a, b),
            ClaimConfig::Constant { value } => Claim::constant(value),
        }
        .map_err(config_error("claim"))?;
        let utility =
            UtilitySpec::new(self.utility.c.clone(), self.utility.gamma.clone()).map_err(config_error("utility"))?;
        let objective = RobustObjective::new(self.alpha, claim, utility).map_err(config_error("alpha"))?;
        if self.output.format != "csv" {
            return Err(CliError::Config(format!("output.format must be \"csv\", got {:?}", self.output.format)));
        }
        Ok(Model { objective, kernel: self.kernel()?, settings: self.settings()?, target: self.target()? })
    }

    /// Replace one parameter by name. Pairs (`gamma`, `c`) take `v1:v2`.
    pub fn with_parameter(&self, name: &str, value: &str) -> Result<Self, CliError> {
        let mut out = self.clone();
        let scalar = || parse_number(name, value);
        match name {
            "theta" => out.market.theta = scalar()?,
            "r" => out.market.r = scalar()?,
            "T" => out.market.maturity = scalar()?,
            "alpha" => out.alpha = scalar()?,
            "x" => {
                out.x = Some(scalar()?);
                out.lambda = None;
            }
            "lambda" => {
                out.lambda = Some(scalar()?);
                out.x = None;
            }
            "gamma" => out.utility.gamma = parse_list(name, value)?,
            "c" => out.utility.c = parse_list(name, value)?,
            "y" | "mu" | "sigma" | "a" | "b" | "value" => {
                let v = scalar()?;
                let slot = match (&mut out.claim, name) {
                    (ClaimConfig::Uniform { y }, "y") => y,
                    (ClaimConfig::TruncatedNormal { mu, .. }, "mu") => mu,
                    (ClaimConfig::TruncatedNormal { sigma, .. }, "sigma") => sigma,
                    (ClaimConfig::TruncatedNormal { a, .. }, "a") => a,
                    (ClaimConfig::TruncatedNormal { b, .. }, "b") => b,
                    (ClaimConfig::Constant { value }, "value") => value,
                    _ => {
                        return Err(CliError::Config(format!(
                            "parameter {name} does not apply to the configured claim"
                        )))
                    }
                };
                *slot = v;
            }
            _ => return Err(CliError::Config(format!("unknown sweep parameter {name:?}"))),
        }
        Ok(out)
    }
}

fn config_error(section: &'static str) -> impl Fn(robustq::Error) -> CliError {
    move |e| CliError::Config(format!("{section}: {e}"))
}

fn parse_number(name: &str, value: &str) -> Result<f64, CliError> {
    value.trim().parse::<f64>().map_err(|_| CliError::Config(format!("{name}: cannot parse {value:?} as a number")))
}

fn parse_list(name: &str, value: &str) -> Result<Vec<f64>, CliError> {
    value.split(':').map(|v| parse_number(name, v)).collect()
}
