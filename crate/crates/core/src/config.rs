//! Pipeline parameters: a flat TOML file, overridden key by key by flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::dedup::EditionNames;
use crate::export::{GlyphOptions, ReportOptions};
use crate::factor::DEFAULT_LOADING_CUTOFF;
use crate::ingest::JournalId;
use crate::layout::{DistanceMode, LayoutParams};
use crate::network::DEFAULT_COSINE_CUTOFF;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("config: {0}")]
    Syntax(String),
    #[error("{key}: {message}")]
    Invalid { key: &'static str, message: String },
}

fn invalid(key: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        message: message.into(),
    }
}

/// Raw key/value settings. Every field is optional so a file and a set of
/// flags can be layered.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed_journal: Option<String>,
    pub total_cites: Option<u64>,
    pub self_cites: Option<u64>,
    pub intl_name: Option<String>,
    pub german_name: Option<String>,
    pub cosine_cutoff: Option<f64>,
    pub loading_cutoff: Option<f64>,
    pub include_diagonal: Option<bool>,
    /// Build the matrix from raw link counts even when records are given.
    pub raw_counts: Option<bool>,
    pub links: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
    pub layout_length: Option<f64>,
    pub layout_strength: Option<f64>,
    pub layout_eps: Option<f64>,
    pub layout_max_moves: Option<usize>,
    pub layout_seed: Option<u64>,
    /// `hops` or `cosine`.
    pub distance_mode: Option<String>,
    pub decimal_comma: Option<bool>,
    pub swap_axes: Option<bool>,
}

macro_rules! overlay {
    ($base:ident, $over:ident; $($f:ident),*) => {
        $( if $over.$f.is_some() { $base.$f = $over.$f; } )*
    };
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.message().to_string()))
    }

    /// Relative paths are taken relative to `dir`.
    pub fn relative_to(mut self, dir: &Path) -> Self {
        for p in [
            &mut self.links,
            &mut self.records,
            &mut self.metadata,
            &mut self.out_dir,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
        self
    }

    /// Values set in `over` win.
    pub fn overlay(mut self, over: PipelineConfig) -> Self {
        overlay!(self, over; seed_journal, total_cites, self_cites, intl_name, german_name,
            cosine_cutoff, loading_cutoff, include_diagonal, raw_counts, links, records,
            metadata, out_dir, layout_length, layout_strength, layout_eps, layout_max_moves,
            layout_seed, distance_mode, decimal_comma, swap_axes);
        self
    }

    pub fn resolve(self) -> Result<Settings, ConfigError> {
        let journal = |key: &'static str, v: Option<String>| {
            v.map(|s| JournalId::new(&s).map_err(|e| invalid(key, e.to_string())))
                .transpose()
        };
        let path = |key: &'static str, v: Option<PathBuf>| match v {
            Some(p) if p.as_os_str().is_empty() => Err(invalid(key, "empty path")),
            v => Ok(v),
        };
        let defaults = EditionNames::default();
        let editions = EditionNames::new(
            journal("intl_name", self.intl_name)?.unwrap_or(defaults.intl),
            journal("german_name", self.german_name)?.unwrap_or(defaults.german),
        );
        if editions.intl == editions.german {
            return Err(invalid("german_name", "must differ from intl_name"));
        }
        let cosine_cutoff = self.cosine_cutoff.unwrap_or(DEFAULT_COSINE_CUTOFF);
        if !(0.0..1.0).contains(&cosine_cutoff) {
            return Err(invalid("cosine_cutoff", "must lie in [0, 1)"));
        }
        let loading_cutoff = self.loading_cutoff.unwrap_or(DEFAULT_LOADING_CUTOFF);
        if !(loading_cutoff > 0.0 && loading_cutoff < 1.0) {
            return Err(invalid("loading_cutoff", "must lie in (0, 1)"));
        }
        if let (Some(t), Some(s)) = (self.total_cites, self.self_cites) {
            if s > t {
                return Err(invalid("self_cites", "exceeds total_cites"));
            }
        }
        let d = LayoutParams::default();
        let layout = LayoutParams {
            length: self.layout_length.unwrap_or(d.length),
            strength: self.layout_strength.unwrap_or(d.strength),
            eps: self.layout_eps.unwrap_or(d.eps),
            max_outer: self.layout_max_moves.unwrap_or(d.max_outer),
            seed: self.layout_seed.unwrap_or(d.seed),
        };
        layout
            .validate()
            .map_err(|e| invalid("layout", e.to_string()))?;
        let distance_mode = match self.distance_mode.as_deref() {
            None | Some("hops") => DistanceMode::Hops,
            Some("cosine") => DistanceMode::CosineWeighted,
            Some(other) => {
                return Err(invalid(
                    "distance_mode",
                    format!("`{other}` is not `hops` or `cosine`"),
                ))
            }
        };
        Ok(Settings {
            seed: journal("seed_journal", self.seed_journal)?,
            total_cites: self.total_cites,
            self_cites: self.self_cites,
            editions,
            cosine_cutoff,
            loading_cutoff,
            include_diagonal: self.include_diagonal.unwrap_or(true),
            raw_counts: self.raw_counts.unwrap_or(false),
            links: path("links", self.links)?,
            records: path("records", self.records)?,
            metadata: path("metadata", self.metadata)?,
            out_dir: path("out_dir", self.out_dir)?.unwrap_or_else(|| PathBuf::from(".")),
            layout,
            distance_mode,
            report: ReportOptions {
                decimal_comma: self.decimal_comma.unwrap_or(false),
            },
            glyphs: GlyphOptions {
                swap_axes: self.swap_axes.unwrap_or(false),
                cutoff: cosine_cutoff,
                ..GlyphOptions::default()
            },
        })
    }
}

/// Validated settings with defaults filled in. Inputs a stage needs but
/// that were never given stay `None` and are reported by that stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub seed: Option<JournalId>,
    pub total_cites: Option<u64>,
    pub self_cites: Option<u64>,
    pub editions: EditionNames,
    pub cosine_cutoff: f64,
    pub loading_cutoff: f64,
    pub include_diagonal: bool,
    pub raw_counts: bool,
    pub links: Option<PathBuf>,
    pub records: Option<PathBuf>,
    pub metadata: Option<PathBuf>,
    pub out_dir: PathBuf,
    pub layout: LayoutParams,
    pub distance_mode: DistanceMode,
    pub report: ReportOptions,
    pub glyphs: GlyphOptions,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled_in() {
        let s = PipelineConfig::default().resolve().unwrap();
        assert_eq!(s.cosine_cutoff, 0.2);
        assert_eq!(s.loading_cutoff, 0.4);
        assert!(s.include_diagonal);
        assert!(!s.raw_counts);
        assert_eq!(s.editions, EditionNames::default());
        assert_eq!(s.distance_mode, DistanceMode::Hops);
    }

    #[test]
    fn flags_win_over_file() {
        let file = PipelineConfig::parse("seed_journal = \"J Am Chem Soc\"\ncosine_cutoff = 0.3\n")
            .unwrap();
        let flags = PipelineConfig {
            cosine_cutoff: Some(0.5),
            ..Default::default()
        };
        let s = file.overlay(flags).resolve().unwrap();
        assert_eq!(s.cosine_cutoff, 0.5);
        assert_eq!(s.seed.unwrap().as_str(), "J AM CHEM SOC");
    }

    #[test]
    fn relative_paths_follow_the_file() {
        let c = PipelineConfig::parse("links = \"links.csv\"\nout_dir = \"/abs\"\n")
            .unwrap()
            .relative_to(Path::new("/data"));
        assert_eq!(c.links.unwrap(), Path::new("/data/links.csv"));
        assert_eq!(c.out_dir.unwrap(), Path::new("/abs"));
    }

    #[test]
    fn rejects_bad_values() {
        assert!(PipelineConfig::parse("no_such_key = 1").is_err());
        assert!(PipelineConfig::parse("cosine_cutoff = \"x\"").is_err());
        for text in [
            "cosine_cutoff = 1.0",
            "loading_cutoff = 0.0",
            "total_cites = 5\nself_cites = 6",
            "distance_mode = \"euclid\"",
            "links = \"\"",
            "layout_eps = -1.0",
            "seed_journal = \"...\"",
            "intl_name = \"Angew Chem\"",
        ] {
            let c = PipelineConfig::parse(text).unwrap();
            assert!(c.resolve().is_err(), "{text}");
        }
    }
}
