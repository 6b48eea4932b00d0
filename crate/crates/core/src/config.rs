//! Pipeline settings from a flat `key = value` file.
//!
//! Blank lines and lines starting with `#` are ignored. List values are
//! comma-separated. Command-line overrides go through [`PipelineConfig::set`]
//! after the file is applied.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::corpus::LexiconFormat;
use crate::error::{Error, Result};
use crate::hedonometer::{Bin, Lens};
use crate::sift::FilterConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub filter: FilterConfig,
    pub lens: Lens,
    pub lexicon_path: Option<PathBuf>,
    pub lexicon_format: LexiconFormat,
    pub logistic_model: Option<PathBuf>,
    pub cnn_model: Option<PathBuf>,
    pub bin: Bin,
    pub top_k: usize,
    pub seed: Option<u64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            filter: FilterConfig::default(),
            lens: Lens::default(),
            lexicon_path: None,
            lexicon_format: LexiconFormat::PAIRS,
            logistic_model: None,
            cnn_model: None,
            bin: Bin::Day,
            top_k: 50,
            seed: None,
        }
    }
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(|s| s.trim().to_lowercase())
        .filter(|s| !s.is_empty())
        .collect()
}

fn flag(value: &str) -> std::result::Result<bool, String> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(format!("expected a boolean, found {other:?}")),
    }
}

fn number<T: std::str::FromStr>(value: &str) -> std::result::Result<T, String> {
    value.parse().map_err(|_| format!("expected a number, found {value:?}"))
}

impl PipelineConfig {
    pub const KEYS: &'static [&'static str] = &[
        "drop_urls",
        "drop_retweets",
        "horoscope_terms",
        "allowed_langs",
        "keyword_query",
        "lens_center",
        "lens_delta",
        "lexicon",
        "lexicon_format",
        "logistic_model",
        "cnn_model",
        "bin",
        "top_k",
        "seed",
    ];

    /// Applies one setting. `line` is reported in errors (0 for overrides).
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let value = value.trim();
        let applied: std::result::Result<(), String> = (|| {
            match key {
                "drop_urls" => self.filter.drop_urls = flag(value)?,
                "drop_retweets" => self.filter.drop_retweets = flag(value)?,
                "horoscope_terms" => self.filter.horoscope_terms = list(value),
                "allowed_langs" => self.filter.allowed_langs = list(value).into_iter().collect::<BTreeSet<_>>(),
                "keyword_query" => self.filter.keyword_query = list(value),
                "lens_center" => self.lens.center = number(value)?,
                "lens_delta" => self.lens.delta = number(value)?,
                "lexicon" => self.lexicon_path = Some(PathBuf::from(value)),
                "lexicon_format" => {
                    self.lexicon_format = match value {
                        "pairs" => LexiconFormat::PAIRS,
                        "labmt" => LexiconFormat::LABMT,
                        other => return Err(format!("unknown lexicon format {other:?}")),
                    }
                }
                "logistic_model" => self.logistic_model = Some(PathBuf::from(value)),
                "cnn_model" => self.cnn_model = Some(PathBuf::from(value)),
                "bin" => self.bin = value.parse()?,
                "top_k" => {
                    self.top_k = number(value)?;
                    if self.top_k == 0 {
                        return Err("top_k must be at least 1".into());
                    }
                }
                "seed" => self.seed = Some(number(value)?),
                other => return Err(format!("unknown key {other:?}")),
            }
            Ok(())
        })();
        applied.map_err(|reason| Error::Config { line, reason })
    }

    pub fn parse(text: &str) -> Result<PipelineConfig> {
        let mut cfg = PipelineConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
                line: i + 1,
                reason: format!("expected key = value, found {line:?}"),
            })?;
            cfg.set(k.trim(), v, i + 1)?;
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<PipelineConfig> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        PipelineConfig::parse(&text)
    }
}
