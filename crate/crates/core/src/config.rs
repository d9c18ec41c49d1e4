//! Runtime configuration.
//!
//! Read from a flat `key = value` file (TOML syntax). Every key is optional;
//! missing keys take the defaults below and the whole struct is validated
//! after loading.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chaptermatch::CountRule;
use crate::indexer::MatchMode;
use crate::{Error, Fraction, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Corpus directory; usually supplied on the command line instead.
    pub corpus: Option<PathBuf>,
    /// Apply the partial stemmer to transcripts and index phrases.
    pub stem: bool,
    /// Also remove stop words inside index phrases, not only at the edges.
    pub strip_interior_stopwords: bool,
    /// Replacement stop-word list, one word per line.
    pub stopwords_file: Option<PathBuf>,
    pub match_mode: MatchMode,
    /// Theme threshold as a fraction of transcripts, e.g. `"1/4"`.
    pub theme_fraction: String,
    pub window: usize,
    /// Minimum course-level G² for a pair to count as a collocation.
    pub g2_min: f64,
    pub zoom: usize,
    pub focus: usize,
    pub contrast: usize,
    pub count_rule: CountRule,
    /// Score with ln(1 + tf) instead of ln(tf).
    pub smoothing: bool,
    pub t_strong: f64,
    pub t_weak: f64,
    pub port: u16,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            corpus: None,
            stem: true,
            strip_interior_stopwords: false,
            stopwords_file: None,
            match_mode: MatchMode::Independent,
            theme_fraction: "1/4".into(),
            window: 10,
            g2_min: 3.84,
            zoom: 15,
            focus: 1,
            contrast: 1,
            count_rule: CountRule::ChapterLog,
            smoothing: false,
            t_strong: 0.5,
            t_weak: 0.8,
            port: 8080,
        }
    }
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        text.parse()
    }

    pub fn theme_fraction(&self) -> Result<Fraction> {
        parse_fraction(&self.theme_fraction)
    }

    pub fn validate(&self) -> Result<()> {
        let frac = self.theme_fraction()?;
        if *frac.numer() == 0 || frac > Fraction::from_integer(1) {
            return Err(Error::Config(format!(
                "theme_fraction must lie in (0, 1], got {frac}"
            )));
        }
        if self.window == 0 {
            return Err(Error::Config("window must be at least 1".into()));
        }
        if self.zoom == 0 || self.focus == 0 || self.contrast == 0 {
            return Err(Error::Config(
                "zoom, focus and contrast must be at least 1".into(),
            ));
        }
        if !self.g2_min.is_finite() || self.g2_min < 0.0 {
            return Err(Error::Config("g2_min must be a non-negative number".into()));
        }
        let in_unit = |x: f64| (0.0..=1.0).contains(&x);
        if !in_unit(self.t_strong) || !in_unit(self.t_weak) || self.t_strong > self.t_weak {
            return Err(Error::Config(format!(
                "similarity thresholds need 0 <= t_strong <= t_weak <= 1, got {} and {}",
                self.t_strong, self.t_weak
            )));
        }
        Ok(())
    }
}

impl FromStr for Config {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(s).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `"1/4"`, `"0.25"` or `"1"` into an exact fraction.
pub fn parse_fraction(s: &str) -> Result<Fraction> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse fraction {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: u32 = n.trim().parse().map_err(|_| bad())?;
        let d: u32 = d.trim().parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Fraction::new(n, d));
    }
    if let Ok(n) = s.parse::<u32>() {
        return Ok(Fraction::from_integer(n));
    }
    // Decimal form: scale by a power of ten so the value stays exact.
    let (int, frac) = s.split_once('.').ok_or_else(bad)?;
    if frac.len() > 6 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let int: u32 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
    let scale = 10u32.pow(frac.len() as u32);
    let frac_val: u32 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    Ok(Fraction::new(int * scale + frac_val, scale))
}
