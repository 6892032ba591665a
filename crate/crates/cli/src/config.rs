//! Run configuration: a TOML file with the same fields as the flags.
//! Flags win over the file; the file wins over built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::Exit;

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Option<String>,
    pub target: Option<String>,
    pub backend: Option<String>,
    pub window: Option<i64>,
    pub witness: Option<String>,
    pub dims: Option<String>,
    pub restarts: Option<usize>,
    pub seed: Option<u64>,
    pub max_iters: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
    pub length: Option<usize>,
    pub exp: Option<i64>,
    pub path: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<RunConfig, Exit> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Exit::usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Exit::usage(format!("config {}: {e}", path.display())))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
    Csv,
}

pub fn parse_format(s: &str) -> Result<Format, Exit> {
    match s {
        "text" => Ok(Format::Text),
        "json" => Ok(Format::Json),
        "csv" => Ok(Format::Csv),
        _ => Err(Exit::usage(format!("unknown format `{s}` (expected text, json or csv)"))),
    }
}

/// `2x2,3x3,4x5`.
pub fn parse_dims(s: &str) -> Result<Vec<(usize, usize)>, Exit> {
    s.split(',')
        .map(|part| {
            let bad = || Exit::usage(format!("bad dimension `{part}` (expected e.g. 2x3)"));
            let (a, b) = part.trim().split_once(['x', 'X']).ok_or_else(bad)?;
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().parse().map_err(|_| bad())?;
            if a == 0 || b == 0 {
                return Err(bad());
            }
            Ok((a, b))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_parse() {
        assert_eq!(parse_dims("2x2, 3X4").unwrap(), vec![(2, 2), (3, 4)]);
        assert!(parse_dims("0x2").is_err());
        assert!(parse_dims("2").is_err());
    }

    #[test]
    fn unknown_fields_rejected() {
        assert!(toml::from_str::<RunConfig>("restarts = 3\nbogus = 1").is_err());
        let c: RunConfig = toml::from_str("command = \"optimize\"\ndims = \"2x2\"").unwrap();
        assert_eq!(c.dims.as_deref(), Some("2x2"));
    }
}
