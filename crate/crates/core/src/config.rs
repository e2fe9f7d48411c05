use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Normalized transcoding loads of the three mediation paths.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LoadShares {
    pub pc_to_ipad: f64,
    pub pc_to_iphone: f64,
    pub ipad_to_iphone: f64,
}

impl Default for LoadShares {
    fn default() -> Self {
        Self {
            pc_to_ipad: 0.5,
            pc_to_iphone: 0.3,
            ipad_to_iphone: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BackendConfig {
    /// Copies bytes and sleeps `latency_unit_ms * load share`.
    Simulated { latency_unit_ms: u64 },
    /// Runs an external encoder. Placeholders: `{src} {dst} {w} {h}
    /// {vcodec} {acodec}`.
    External { template: String },
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Simulated {
            latency_unit_ms: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CmsConfig {
    pub data_dir: PathBuf,
    pub crid_authority: String,
    pub crid_service: String,
    pub aggregation_workers: usize,
    pub mediation_workers: usize,
    pub deployment_workers: usize,
    pub load_shares: LoadShares,
    pub backend: BackendConfig,
    /// Seed of the mock SNS post id source.
    pub sns_seed: u64,
    pub http_timeout_secs: u64,
    /// Directories besides the data directory whose files may be named
    /// as local sources (`file://` feeds, upload and metadata paths).
    pub local_roots: Vec<PathBuf>,
}

impl Default for CmsConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            crid_authority: "etri.re.kr".into(),
            crid_service: "webtv".into(),
            aggregation_workers: 2,
            mediation_workers: 2,
            deployment_workers: 2,
            load_shares: LoadShares::default(),
            backend: BackendConfig::default(),
            sns_seed: 2012,
            http_timeout_secs: 30,
            local_roots: Vec::new(),
        }
    }
}

impl CmsConfig {
    pub fn with_data_dir(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            ..Self::default()
        }
    }

    pub fn http_timeout(&self) -> Duration {
        Duration::from_secs(self.http_timeout_secs.max(1))
    }
}
