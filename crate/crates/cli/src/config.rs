//! TOML configuration file. Every section and key is optional.
//!
//! ```toml
//! [server]
//! listen = "127.0.0.1:8080"
//! users_file = "data/users.txt"
//!
//! [cms]
//! data_dir = "data"
//! mediation_workers = 4
//! backend = { kind = "external", template = "ffmpeg -y -i {src} -s {w}x{h} {dst}" }
//!
//! [cost]
//! content_count = 1000
//! zipf_exponent = 0.271
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use webtv_core::CmsConfig;
use webtv_costmodel::CostParams;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub server: ServerSection,
    pub cms: CmsConfig,
    pub cost: CostSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServerSection {
    pub listen: String,
    pub users_file: Option<PathBuf>,
    pub session_ttl_secs: u64,
}

impl Default for ServerSection {
    fn default() -> Self {
        Self {
            listen: "127.0.0.1:8080".into(),
            users_file: None,
            session_ttl_secs: webtv_api::DEFAULT_SESSION_TTL.as_secs(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostSection {
    pub content_count: Option<usize>,
    pub subscribers: Option<u64>,
    pub zipf_exponent: Option<f64>,
    pub aggregation_cost: Option<f64>,
    pub mediation_cost: Option<f64>,
    pub deployment_cost: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub idle_cost: Option<f64>,
}

impl CostSection {
    pub fn apply(&self, p: &mut CostParams) {
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = self.$field { p.$target = v; })*
            };
        }
        set!(
            content_count => content_count,
            subscribers => subscribers,
            zipf_exponent => zipf_exponent,
            aggregation_cost => aggregation_cost,
            mediation_cost => mediation_cost,
            deployment_cost => deployment_cost,
            alpha => pc_to_ipad_share,
            beta => pc_to_iphone_share,
            gamma => ipad_to_iphone_share,
            idle_cost => idle_cost,
        );
    }
}

impl FileConfig {
    /// Reads `path`, or returns defaults when no file is given.
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}
