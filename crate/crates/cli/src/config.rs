//! Run configuration: a TOML file whose relative paths resolve against the
//! file's directory, then command-line overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stepscript::synthgen::SynthConfig;
use stepscript::textalign::{MsaOptions, DEFAULT_MATCH_REWARD, DEFAULT_MISMATCH_PENALTY};
use stepscript::vidcluster::{LocalizeOptions, DEFAULT_AFTER_S, DEFAULT_BEFORE_S};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Steps from the narration, localized under caption windows.
    Full,
    /// Steps placed at their caption windows, features unused.
    TextOnly,
    /// Discriminative clustering under the order constraint only.
    VideoOnly,
    /// Steps spread evenly over each item.
    Uniform,
    /// Cross-validated training on annotated intervals.
    Supervised,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Full => "full",
            Method::TextOnly => "text-only",
            Method::VideoOnly => "video-only",
            Method::Uniform => "uniform",
            Method::Supervised => "supervised",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SupervisedConfig {
    pub folds: usize,
    pub inner_folds: usize,
    pub lambda_grid: Vec<f64>,
}

impl Default for SupervisedConfig {
    fn default() -> Self {
        SupervisedConfig {
            folds: 5,
            inner_folds: 4,
            lambda_grid: vec![1e-4, 1e-3, 1e-2, 1e-1, 1.0],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// First column of the result table.
    pub task: String,
    /// Narration token file.
    pub tokens: Option<PathBuf>,
    /// External token cost CSV; exact-match costs are used otherwise.
    pub cost: Option<PathBuf>,
    /// Precomputed step file; the narration is aligned otherwise.
    pub steps: Option<PathBuf>,
    /// Directory of `<item_id>.saln` or `<item_id>.csv` feature files.
    pub features: Option<PathBuf>,
    pub annotation: Option<PathBuf>,
    /// Ground-truth script: a JSON list of `verb object` labels.
    pub script: Option<PathBuf>,
    /// JSON object mapping recovered labels to script labels.
    pub equivalence: Option<PathBuf>,
    pub output: PathBuf,
    /// Step counts to run, one result row each.
    pub k: Vec<usize>,
    pub methods: Vec<Method>,
    pub before_s: f64,
    pub after_s: f64,
    /// Fixed ridge regularization; `1 / (N K)` when absent.
    pub lambda: Option<f64>,
    /// Drives every random choice: alignment restarts, folds, synthesis.
    pub seed: u64,
    pub interval_duration_s: f64,
    pub match_reward: f64,
    pub mismatch_penalty: f64,
    pub msa: MsaOptions,
    pub localize: LocalizeOptions,
    pub supervised: SupervisedConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            task: "task".into(),
            tokens: None,
            cost: None,
            steps: None,
            features: None,
            annotation: None,
            script: None,
            equivalence: None,
            output: PathBuf::from("out"),
            k: vec![10],
            methods: vec![Method::Full],
            before_s: DEFAULT_BEFORE_S,
            after_s: DEFAULT_AFTER_S,
            lambda: None,
            seed: 0,
            interval_duration_s: 1.0,
            match_reward: DEFAULT_MATCH_REWARD,
            mismatch_penalty: DEFAULT_MISMATCH_PENALTY,
            msa: MsaOptions::default(),
            localize: LocalizeOptions::default(),
            supervised: SupervisedConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    /// Defaults, or the file at `path` with its relative paths resolved.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut config: RunConfig = toml::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.tokens,
            &mut config.cost,
            &mut config.steps,
            &mut config.features,
            &mut config.annotation,
            &mut config.script,
            &mut config.equivalence,
        ]
        .into_iter()
        .flatten()
        {
            *p = base.join(&*p);
        }
        config.output = base.join(&config.output);
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k.is_empty() || self.k.contains(&0) {
            return Err(CliError::Usage(format!("K values must be at least 1, got {:?}", self.k)));
        }
        if self.task.is_empty() || self.task.contains([',', '"', '\n']) {
            return Err(CliError::Usage(format!("task name `{}` must be non-empty plain text", self.task)));
        }
        if let Some(l) = self.lambda {
            if !(l > 0.0 && l.is_finite()) {
                return Err(CliError::Usage(format!("lambda must be positive, got {l}")));
            }
        }
        if !(self.interval_duration_s > 0.0 && self.interval_duration_s.is_finite()) {
            return Err(CliError::Usage("interval_duration_s must be positive".into()));
        }
        for p in [
            &self.tokens,
            &self.cost,
            &self.steps,
            &self.features,
            &self.annotation,
            &self.script,
            &self.equivalence,
        ]
        .into_iter()
        .flatten()
        {
            if !p.exists() {
                return Err(CliError::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "referenced path does not exist"),
                ));
            }
        }
        Ok(())
    }

    pub fn msa_options(&self) -> MsaOptions {
        MsaOptions {
            seed: self.seed,
            ..self.msa.clone()
        }
    }

    pub fn localize_options(&self) -> LocalizeOptions {
        LocalizeOptions {
            lambda: self.lambda,
            ..self.localize.clone()
        }
    }

    /// Fails with a usage error naming `what` when `path` is unset.
    pub fn require<'a>(path: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
        path.as_deref()
            .ok_or_else(|| CliError::Usage(format!("{what} is required (config key or flag)")))
    }
}
