//! Textual channel descriptions: `dep:<q>`, `qc:<q>`, `id`, `kraus:<path>`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::{parse_kraus, QuantumChannel};
use crate::error::{mismatch, Error, Result};
use crate::weyl::{depolarizing, qc_channel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum ChannelSpec {
    Depolarizing(f64),
    Qc(f64),
    Identity,
    Kraus(PathBuf),
}

impl ChannelSpec {
    /// Instantiates the channel on a `dim`-dimensional space. Kraus files
    /// must match `dim` on both sides.
    pub fn build(&self, dim: usize) -> Result<QuantumChannel> {
        match self {
            Self::Depolarizing(q) => depolarizing(dim, *q),
            Self::Qc(q) => qc_channel(dim, *q),
            Self::Identity => Ok(QuantumChannel::identity(dim)),
            Self::Kraus(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
                    line: 0,
                    msg: format!("cannot read {}: {e}", path.display()),
                })?;
                let ch = parse_kraus(&text)?;
                if ch.dim_in() != dim || ch.dim_out() != dim {
                    return Err(mismatch(
                        format!("{dim} -> {dim} channel"),
                        format!("{} -> {}", ch.dim_in(), ch.dim_out()),
                    ));
                }
                Ok(ch)
            }
        }
    }
}

impl FromStr for ChannelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |msg: &str| Error::Parse {
            line: 0,
            msg: format!("channel spec `{s}`: {msg}"),
        };
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| bad("missing parameter"))?
                .parse::<f64>()
                .map_err(|_| bad("parameter is not a number"))
        };
        match head {
            "dep" => Ok(Self::Depolarizing(number(arg)?)),
            "qc" => Ok(Self::Qc(number(arg)?)),
            "id" if arg.is_none() => Ok(Self::Identity),
            "kraus" => match arg {
                Some(p) if !p.is_empty() => Ok(Self::Kraus(PathBuf::from(p))),
                _ => Err(bad("missing path")),
            },
            _ => Err(bad("expected dep:<q> | qc:<q> | id | kraus:<path>")),
        }
    }
}

impl fmt::Display for ChannelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Depolarizing(q) => write!(f, "dep:{q}"),
            Self::Qc(q) => write!(f, "qc:{q}"),
            Self::Identity => write!(f, "id"),
            Self::Kraus(p) => write!(f, "kraus:{}", p.display()),
        }
    }
}

impl From<ChannelSpec> for String {
    fn from(s: ChannelSpec) -> String {
        s.to_string()
    }
}

impl TryFrom<String> for ChannelSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grammar() {
        assert_eq!(
            "dep:0.5".parse::<ChannelSpec>().unwrap(),
            ChannelSpec::Depolarizing(0.5)
        );
        assert_eq!("qc:1".parse::<ChannelSpec>().unwrap(), ChannelSpec::Qc(1.0));
        assert_eq!("id".parse::<ChannelSpec>().unwrap(), ChannelSpec::Identity);
        assert_eq!(
            "kraus:/tmp/k.txt".parse::<ChannelSpec>().unwrap(),
            ChannelSpec::Kraus("/tmp/k.txt".into())
        );
        for bad in ["dep", "dep:x", "id:3", "kraus:", "amp:0.1", ""] {
            assert!(bad.parse::<ChannelSpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn display_roundtrips() {
        for s in ["dep:0.25", "qc:0.5", "id", "kraus:a/b.txt"] {
            assert_eq!(s.parse::<ChannelSpec>().unwrap().to_string(), s);
        }
    }

    #[test]
    fn missing_file_is_an_error() {
        let spec: ChannelSpec = "kraus:/nonexistent/file".parse().unwrap();
        assert!(matches!(spec.build(2), Err(Error::Parse { .. })));
    }
}
