//! Runtime configuration: every tunable of the pipeline, loadable from a
//! TOML file with unknown keys rejected and numeric ranges validated.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear_svm::Multiclass;
use crate::textprep::{StopList, TextPipeline, DEFAULT_EXCEPTIONS};
use crate::title_cluster::ClusterParams;

/// Multiclass strategy selector for the coarse classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "ova")]
    Ova,
    #[serde(rename = "crammer-singer")]
    CrammerSinger,
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Strategy::Ova => write!(f, "ova"),
            Strategy::CrammerSinger => write!(f, "crammer-singer"),
        }
    }
}

impl Strategy {
    pub fn parse(s: &str) -> Result<Strategy> {
        match s {
            "ova" => Ok(Strategy::Ova),
            "crammer-singer" => Ok(Strategy::CrammerSinger),
            other => Err(Error::Format(format!("unknown strategy {other:?}"))),
        }
    }
}

impl From<Strategy> for Multiclass {
    fn from(s: Strategy) -> Multiclass {
        match s {
            Strategy::Ova => Multiclass::OneVsAll,
            Strategy::CrammerSinger => Multiclass::CrammerSinger,
        }
    }
}

/// All pipeline tunables. See the README for the per-key documentation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Master seed for every randomized step.
    pub seed: u64,
    /// Vocabulary: minimum number of distinct documents containing a term.
    pub min_df: u32,
    /// Clustering: minimum occurrences of a title to enter clustering.
    pub min_title_freq: u32,
    /// Clustering: fraction of spectral energy the SVD retains, in (0, 1].
    pub quality_q: f64,
    /// Clustering: cosine threshold for cluster membership, in (0, 1].
    pub assignment_threshold: f64,
    /// Clustering: cap on induced labels.
    pub max_labels: usize,
    /// k-NN: number of labels returned per classification.
    pub k: usize,
    /// k-NN: minimum in-document term frequency for query terms.
    pub min_tf: u32,
    /// SVM: regularization weight C.
    pub c: f64,
    /// SVM: multiclass strategy.
    pub strategy: Strategy,
    /// SVM: append an always-on bias feature.
    pub bias: bool,
    /// SVM: epoch cap.
    pub max_iters: usize,
    /// SVM: stop when the per-epoch objective decrease falls below this.
    pub tol: f64,
    /// SVD: iterate-change tolerance.
    pub svd_tol: f64,
    /// SVD: iteration cap per singular triplet.
    pub svd_max_iters: usize,
    /// Balancing: per-class training document cap.
    pub base_count: usize,
    /// Cascade: groups with fewer documents get no vertical classifier.
    pub min_group_size: usize,
    /// Optional stop-list file; the built-in English list otherwise.
    pub stoplist: Option<PathBuf>,
    /// Tokens preserved verbatim by normalization.
    pub exceptions: Vec<String>,
    /// Group aliases: name → SOC major groups merged under it.
    pub aliases: BTreeMap<String, Vec<u8>>,
}

impl Default for Config {
    fn default() -> Self {
        let mut exceptions: Vec<String> =
            DEFAULT_EXCEPTIONS.iter().map(|s| s.to_string()).collect();
        exceptions.sort();
        Config {
            seed: 42,
            min_df: 2,
            min_title_freq: 4,
            quality_q: 0.9,
            assignment_threshold: 0.2,
            max_labels: 256,
            k: 5,
            min_tf: 1,
            c: 1.0,
            strategy: Strategy::Ova,
            bias: false,
            max_iters: 1000,
            tol: 1e-6,
            svd_tol: 1e-9,
            svd_max_iters: 1000,
            base_count: 150_000,
            min_group_size: 5,
            stoplist: None,
            exceptions,
            aliases: BTreeMap::from([("healthcare".to_string(), vec![29, 31])]),
        }
    }
}

impl Config {
    /// Loads and validates a TOML config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Config> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io_at(path, e))?;
        let mut config: Config =
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        config.normalize();
        config.validate()?;
        Ok(config)
    }

    /// Parses a TOML string (used for config snapshots inside models).
    pub fn from_toml(text: &str) -> Result<Config> {
        let mut config: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.normalize();
        config.validate()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn normalize(&mut self) {
        for e in &mut self.exceptions {
            *e = e.to_lowercase();
        }
        self.exceptions.sort();
        self.exceptions.dedup();
    }

    /// Range checks for every numeric knob plus alias-table sanity.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.min_df < 1 {
            return bad(format!("min_df must be >= 1, got {}", self.min_df));
        }
        if self.min_title_freq < 1 {
            return bad(format!(
                "min_title_freq must be >= 1, got {}",
                self.min_title_freq
            ));
        }
        if self.quality_q <= 0.0 || self.quality_q > 1.0 {
            return bad(format!(
                "quality_q must be in (0, 1], got {}",
                self.quality_q
            ));
        }
        if self.assignment_threshold <= 0.0 || self.assignment_threshold > 1.0 {
            return bad(format!(
                "assignment_threshold must be in (0, 1], got {}",
                self.assignment_threshold
            ));
        }
        if self.max_labels < 1 {
            return bad("max_labels must be >= 1".into());
        }
        if self.k < 1 {
            return bad(format!("k must be >= 1, got {}", self.k));
        }
        if self.min_tf < 1 {
            return bad(format!("min_tf must be >= 1, got {}", self.min_tf));
        }
        if self.c <= 0.0 || self.c.is_nan() {
            return bad(format!("c must be > 0, got {}", self.c));
        }
        if self.tol <= 0.0 || self.tol.is_nan() {
            return bad(format!("tol must be > 0, got {}", self.tol));
        }
        if self.svd_tol <= 0.0 || self.svd_tol.is_nan() {
            return bad(format!("svd_tol must be > 0, got {}", self.svd_tol));
        }
        if self.max_iters < 1 || self.svd_max_iters < 1 {
            return bad("iteration caps must be >= 1".into());
        }
        if self.base_count < 1 {
            return bad(format!("base_count must be >= 1, got {}", self.base_count));
        }
        if self.min_group_size < 1 {
            return bad(format!(
                "min_group_size must be >= 1, got {}",
                self.min_group_size
            ));
        }
        let mut seen: BTreeMap<u8, &str> = BTreeMap::new();
        for (name, majors) in &self.aliases {
            if name.is_empty()
                || !name
                    .chars()
                    .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
            {
                return bad(format!("alias name {name:?} must be lowercase [a-z0-9_-]"));
            }
            if name.parse::<u8>().is_ok() {
                return bad(format!(
                    "alias name {name:?} collides with a numeric major group"
                ));
            }
            if majors.is_empty() {
                return bad(format!("alias {name:?} lists no major groups"));
            }
            for &m in majors {
                if !(11..=55).contains(&m) {
                    return bad(format!("alias {name:?} lists invalid major group {m}"));
                }
                if let Some(other) = seen.insert(m, name) {
                    return bad(format!(
                        "major group {m} appears in aliases {other:?} and {name:?}"
                    ));
                }
            }
        }
        Ok(())
    }

    /// Builds the text pipeline, loading the stop list if configured.
    pub fn pipeline(&self) -> Result<TextPipeline> {
        let stops = match &self.stoplist {
            Some(path) => StopList::from_file(path)?,
            None => StopList::default_english(),
        };
        Ok(TextPipeline {
            stops,
            exceptions: self.exceptions.iter().cloned().collect(),
            max_n: 2,
        })
    }

    /// Clustering parameters derived from this config.
    pub fn cluster_params(&self) -> ClusterParams {
        ClusterParams {
            min_title_freq: self.min_title_freq,
            quality_q: self.quality_q,
            threshold: self.assignment_threshold,
            max_labels: self.max_labels,
            min_df: self.min_df,
            seed: self.seed,
            svd_tol: self.svd_tol,
            svd_max_iters: self.svd_max_iters,
        }
    }
}
