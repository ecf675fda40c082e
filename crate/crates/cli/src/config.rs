use std::fmt;
use std::str::FromStr;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use weylroof::{
    phase_damping, weyl_channel, BoundConfig, ChannelSpec, OptimizerConfig, QuantumChannel, SuperaddConfig, WeylParams,
};

use crate::args::{Command, StateKind};

/// Everything that determines a run's results. Echoed into every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "kebab-case")]
pub enum RunConfig {
    ChannelShow(WeylParams),
    VerifyBound(BoundConfig),
    Hhat(HhatConfig),
    Superadd(SuperaddConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct HhatConfig {
    pub channel: ChannelChoice,
    pub d: usize,
    pub state: StateKind,
    pub optimizer: OptimizerConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ConfigEcho {
    #[serde(flatten)]
    pub run: RunConfig,
    pub threads: usize,
}

/// Channels accepted by `hhat`: the Ψ grammar plus `weyl:<r>,<p>` and `xi:<λ>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ChannelChoice {
    Spec(ChannelSpec),
    Weyl { r: f64, p: f64 },
    PhaseDamping(f64),
}

impl ChannelChoice {
    /// Resolves `--channel` together with the loose parameter flags.
    pub fn from_flags(
        name: &str,
        q: Option<f64>,
        r: Option<f64>,
        p: Option<f64>,
        lambda: Option<f64>,
    ) -> anyhow::Result<Self> {
        let need = |v: Option<f64>, flag: &str| v.with_context(|| format!("--channel {name} requires --{flag}"));
        Ok(match name {
            "dep" => Self::Spec(ChannelSpec::Depolarizing(need(q, "q")?)),
            "qc" => Self::Spec(ChannelSpec::Qc(need(q, "q")?)),
            "weyl" => Self::Weyl {
                r: need(r, "r")?,
                p: need(p, "p")?,
            },
            "xi" => Self::PhaseDamping(need(lambda, "lambda")?),
            other => other.parse()?,
        })
    }

    pub fn build(&self, d: usize) -> weylroof::Result<QuantumChannel> {
        match self {
            Self::Spec(s) => s.build(d),
            Self::Weyl { r, p } => weyl_channel(&WeylParams::new(d, *r, *p)?),
            Self::PhaseDamping(lambda) => phase_damping(d, *lambda),
        }
    }
}

impl FromStr for ChannelChoice {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        if let Some(rest) = s.strip_prefix("weyl:") {
            let Some((r, p)) = rest.split_once(',') else {
                bail!("channel `{s}`: expected weyl:<r>,<p>");
            };
            return Ok(Self::Weyl {
                r: r.trim().parse().with_context(|| format!("channel `{s}`: bad r"))?,
                p: p.trim().parse().with_context(|| format!("channel `{s}`: bad p"))?,
            });
        }
        if let Some(l) = s.strip_prefix("xi:") {
            return Ok(Self::PhaseDamping(
                l.parse().with_context(|| format!("channel `{s}`: bad lambda"))?,
            ));
        }
        Ok(Self::Spec(s.parse()?))
    }
}

impl fmt::Display for ChannelChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Spec(s) => s.fmt(f),
            Self::Weyl { r, p } => write!(f, "weyl:{r},{p}"),
            Self::PhaseDamping(l) => write!(f, "xi:{l}"),
        }
    }
}

impl From<ChannelChoice> for String {
    fn from(c: ChannelChoice) -> String {
        c.to_string()
    }
}

impl TryFrom<String> for ChannelChoice {
    type Error = anyhow::Error;

    fn try_from(s: String) -> anyhow::Result<Self> {
        s.parse()
    }
}

/// Builds the run configuration for every subcommand except `replay`.
pub fn from_command(cmd: &Command) -> anyhow::Result<Option<RunConfig>> {
    Ok(Some(match cmd {
        Command::ChannelShow { d, r, p, .. } => RunConfig::ChannelShow(WeylParams {
            dim: *d,
            shift_weight: *r,
            displacement_weight: *p,
        }),
        Command::VerifyBound {
            d,
            q,
            dimk,
            samples,
            seed,
            tolerance,
            ..
        } => RunConfig::VerifyBound(BoundConfig {
            tolerance: *tolerance,
            ..BoundConfig::new(*d, *q, *dimk, *samples, *seed)
        }),
        Command::Hhat {
            channel,
            d,
            q,
            r,
            p,
            lambda,
            state,
            opt,
            ..
        } => RunConfig::Hhat(HhatConfig {
            channel: ChannelChoice::from_flags(channel, *q, *r, *p, *lambda)?,
            d: *d,
            state: *state,
            optimizer: opt.into(),
        }),
        Command::Superadd {
            d,
            r,
            p,
            psi,
            dimk,
            samples,
            tolerance,
            product_probe,
            opt,
            ..
        } => {
            let weyl = WeylParams::new(*d, *r, *p)?;
            let mut cfg = SuperaddConfig::new(weyl, psi.clone(), *dimk, *samples, opt.into());
            cfg.tolerance = *tolerance;
            cfg.product_probe = *product_probe;
            RunConfig::Superadd(cfg)
        }
        Command::Replay { .. } => return Ok(None),
    }))
}
