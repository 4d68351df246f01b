//! Run configuration: global flags, an optional JSON config file carrying
//! the same keys, and the merge rule (explicit flags win over the file,
//! the file wins over defaults).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use lacuna_core::LacunarySequence;
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => bail!("unknown format {other:?}, expected json or csv"),
        }
    }
}

/// Effective run parameters after merging flags, file, and defaults.
#[derive(Debug, Clone)]
pub struct Settings {
    pub resolution: u32,
    pub seq_spec: String,
    pub seed: u64,
    pub trials: u32,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            resolution: 6,
            seq_spec: "pow2:5".into(),
            seed: 7,
            trials: 20,
            out: None,
            format: OutputFormat::Json,
        }
    }
}

impl Settings {
    /// The sequence as written, before dropping terms the grid cannot hold.
    pub fn sequence(&self) -> Result<LacunarySequence> {
        parse_seq(&self.seq_spec)
    }

    /// The sequence restricted to frequencies below `2^resolution`.
    pub fn retained_sequence(&self) -> Result<LacunarySequence> {
        Ok(self.sequence()?.retained(self.resolution)?)
    }
}

/// Optional config file; every field mirrors a flag.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub resolution: Option<u32>,
    pub seq: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        serde_json::from_str(&text)
            .with_context(|| format!("parsing config file {}", path.display()))
    }
}

/// Flag values exactly as given on the command line (all optional).
#[derive(Debug, Clone, Default)]
pub struct FlagOverrides {
    pub resolution: Option<u32>,
    pub seq: Option<String>,
    pub seed: Option<u64>,
    pub trials: Option<u32>,
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

pub fn resolve(flags: FlagOverrides, file: Option<FileConfig>) -> Result<Settings> {
    let file = file.unwrap_or_default();
    let defaults = Settings::default();
    let format = match flags.format.or(file.format) {
        Some(s) => OutputFormat::parse(&s)?,
        None => defaults.format,
    };
    let settings = Settings {
        resolution: flags.resolution.or(file.resolution).unwrap_or(defaults.resolution),
        seq_spec: flags.seq.or(file.seq).unwrap_or(defaults.seq_spec),
        seed: flags.seed.or(file.seed).unwrap_or(defaults.seed),
        trials: flags.trials.or(file.trials).unwrap_or(defaults.trials),
        out: flags.out.or(file.out),
        format,
    };
    if settings.resolution == 0 || settings.resolution > 20 {
        bail!(
            "resolution {} outside the supported range 1..=20",
            settings.resolution
        );
    }
    settings.retained_sequence().context("validating --seq")?;
    Ok(settings)
}

/// `pow2:J` means the first `J` powers of two starting at 1; otherwise a
/// comma-separated strictly increasing list of positive integers.
pub fn parse_seq(spec: &str) -> Result<LacunarySequence> {
    if let Some(j) = spec.strip_prefix("pow2:") {
        let j: u32 = j
            .parse()
            .with_context(|| format!("bad pow2 exponent in --seq {spec:?}"))?;
        if j == 0 || j > 62 {
            bail!("pow2 exponent must lie in 1..=62, got {j}");
        }
        return Ok(LacunarySequence::pow2(j - 1));
    }
    let terms: Vec<u64> = spec
        .split(',')
        .map(|t| {
            t.trim()
                .parse::<u64>()
                .with_context(|| format!("bad term {t:?} in --seq {spec:?}"))
        })
        .collect::<Result<_>>()?;
    Ok(LacunarySequence::new(terms)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pow2_spec_counts_terms() {
        let seq = parse_seq("pow2:5").unwrap();
        assert_eq!(seq.terms(), &[1, 2, 4, 8, 16]);
    }

    #[test]
    fn explicit_terms_parse_and_validate() {
        let seq = parse_seq("3, 6, 12, 24").unwrap();
        assert_eq!(seq.terms(), &[3, 6, 12, 24]);
        assert!((seq.theta() - 2.0).abs() < 1e-15);
        assert!(parse_seq("4,4").is_err());
        assert!(parse_seq("0,1").is_err());
        assert!(parse_seq("pow2:0").is_err());
        assert!(parse_seq("a,b").is_err());
    }

    #[test]
    fn flags_beat_file_beats_defaults() {
        let file = FileConfig {
            resolution: Some(8),
            seed: Some(99),
            ..Default::default()
        };
        let flags = FlagOverrides {
            seed: Some(3),
            ..Default::default()
        };
        let s = resolve(flags, Some(file)).unwrap();
        assert_eq!(s.resolution, 8);
        assert_eq!(s.seed, 3);
        assert_eq!(s.trials, 20);
        assert_eq!(s.seq_spec, "pow2:5");
    }

    #[test]
    fn bad_format_is_rejected() {
        let flags = FlagOverrides {
            format: Some("yaml".into()),
            ..Default::default()
        };
        assert!(resolve(flags, None).is_err());
    }
}
