// SPDX-License-Identifier: Apache-2.0

use flexclass::dse::DseConfig;
use flexclass::hweval::CostModel;
use flexclass::signalio::BlobSpec;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    #[default]
    Synthetic,
    Recordings,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Recordings {
    /// Channel manifest; relative paths resolve against the config file.
    pub manifest: PathBuf,
    #[serde(default = "default_window")]
    pub window_s: f64,
    #[serde(default = "default_stride")]
    pub stride_s: f64,
}

fn default_window() -> f64 {
    60.0
}

fn default_stride() -> f64 {
    30.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DataConfig {
    pub source: Source,
    pub synthetic: BlobSpec,
    /// Seed of the synthetic generator; the run seed when absent.
    pub synthetic_seed: Option<u64>,
    pub recordings: Option<Recordings>,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: Source::Synthetic,
            synthetic: BlobSpec::bundled(),
            synthetic_seed: None,
            recordings: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub data: DataConfig,
    pub dse: DseConfig,
    /// Replaces `dse.cost` when present.
    pub cost: Option<CostModel>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Command-line overrides applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub precision: Option<Vec<u32>>,
    pub sparsity: Option<Vec<f64>>,
    pub fs: Option<Vec<flexclass::FsMethod>>,
    pub k: Option<Vec<usize>>,
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("{origin}: {}", e.to_string().trim_end()))
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// Folds overrides into the DSE settings and validates everything.
    pub fn resolve(mut self, o: &Overrides) -> Result<Self, String> {
        if let Some(s) = o.seed {
            self.seed = Some(s);
        }
        if let Some(w) = o.workers {
            self.workers = Some(w);
        }
        if let Some(out) = &o.out {
            self.out = Some(out.clone());
        }
        if let Some(s) = self.seed {
            self.dse.seed = s;
        }
        if let Some(w) = self.workers {
            self.dse.workers = w;
        }
        if let Some(c) = &self.cost {
            self.dse.cost = c.clone();
        }
        if let Some(p) = &o.precision {
            self.dse.precisions = p.clone();
        }
        if let Some(s) = &o.sparsity {
            self.dse.sparsities = s.clone();
        }
        if let Some(f) = &o.fs {
            self.dse.fs_methods = f.clone();
        }
        if let Some(k) = &o.k {
            self.dse.k_grid = k.clone();
        }
        self.dse.validate().map_err(|e| e.to_string())?;
        if self.data.source == Source::Recordings && self.data.recordings.is_none() {
            return Err("data.source = \"recordings\" needs a [data.recordings] table".into());
        }
        Ok(self)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    /// Hash over everything that influences results.
    pub fn hash(&self) -> String {
        #[derive(Serialize)]
        struct Key<'a> {
            data: &'a DataConfig,
            dse: &'a DseConfig,
        }
        let mut dse = self.dse.clone();
        // worker count never changes results
        dse.workers = 1;
        flexclass::dse::config_hash(&Key { data: &self.data, dse: &dse })
    }
}
