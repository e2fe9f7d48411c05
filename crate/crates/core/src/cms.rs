use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::Utc;

use crate::aggregation::ContentAggregation;
use crate::config::CmsConfig;
use crate::deployment::ContentDeployment;
use crate::domain::{ContentRecord, Crid};
use crate::error::{CmsError, Result};
use crate::jobs::JobStore;
use crate::mediation::{backend_from_config, ContentMediation, TranscoderBackend};
use crate::registry::Registry;
use crate::storage::{public_media_path, DataLayout};

/// State shared by the three enablers.
pub(crate) struct Context {
    pub config: CmsConfig,
    pub layout: DataLayout,
    pub registry: Arc<Registry>,
    pub jobs: Arc<JobStore>,
    pub http: reqwest::Client,
}

impl Context {
    pub fn next_crid(&self) -> Result<Crid> {
        self.registry.next_crid(
            &self.config.crid_authority,
            &self.config.crid_service,
            Utc::now().date_naive(),
        )
    }

    /// Rejects an existing local file outside the data directory and the
    /// configured roots. Missing files pass; reading them fails later.
    pub fn check_local(&self, path: &Path) -> Result<()> {
        let Ok(real) = path.canonicalize() else {
            return Ok(());
        };
        let allowed = std::iter::once(self.layout.root())
            .chain(self.config.local_roots.iter().map(PathBuf::as_path))
            .filter_map(|r| r.canonicalize().ok())
            .any(|r| real.starts_with(r));
        if allowed {
            Ok(())
        } else {
            Err(CmsError::Validation(format!(
                "{} is outside the directories open to local sources",
                path.display()
            )))
        }
    }

    /// Looks up a record by CRID, storage location, public media URL, source
    /// URL, or a file under the temp or media directory of its serial.
    pub fn find_record(&self, reference: &str) -> Result<Option<ContentRecord>> {
        let reference = reference.trim();
        if reference.starts_with("crid://") {
            let crid: Crid = reference.parse()?;
            return Ok(self.registry.get_content_record(&crid).ok());
        }
        let normalized = public_media_path(reference).unwrap_or(reference);
        if let Some(r) = self.registry.find_by_location(normalized) {
            return Ok(Some(r));
        }
        if let Some(stripped) = reference.strip_prefix("file://") {
            if let Some(r) = self.registry.find_by_location(stripped) {
                return Ok(Some(r));
            }
        }
        let path = self.layout.local_path(reference);
        let Some(filename) = path.file_name().and_then(|f| f.to_str()) else {
            return Ok(None);
        };
        for base in [self.layout.mediator_tmp(), self.layout.media_dir()] {
            let Ok(rest) = path.strip_prefix(&base) else {
                continue;
            };
            let Some(serial) = rest.iter().next().and_then(|s| s.to_str()) else {
                continue;
            };
            return Ok(self
                .registry
                .list_content()
                .into_iter()
                .find(|r| r.crid.serial() == serial && r.filename() == filename));
        }
        Ok(None)
    }
}

/// The content management system: registry, job store and the
/// aggregation, mediation and deployment enablers over one data directory.
pub struct Cms {
    ctx: Arc<Context>,
    aggregation: ContentAggregation,
    mediation: ContentMediation,
    deployment: ContentDeployment,
}

impl Cms {
    /// Opens the data directory with the backend named in the config.
    pub fn open(config: CmsConfig) -> Result<Self> {
        let backend = backend_from_config(&config.backend);
        Self::open_with_backend(config, backend)
    }

    pub fn open_with_backend(
        config: CmsConfig,
        backend: Arc<dyn TranscoderBackend>,
    ) -> Result<Self> {
        let layout = DataLayout::new(&config.data_dir);
        std::fs::create_dir_all(layout.root())?;
        std::fs::create_dir_all(layout.mediator_tmp())?;
        std::fs::create_dir_all(layout.media_dir())?;
        let registry = Arc::new(Registry::open(layout.registry_dir())?);
        let jobs = Arc::new(JobStore::open(layout.jobs_journal())?);
        let http = reqwest::Client::builder()
            .timeout(config.http_timeout())
            .build()
            .map_err(|e| CmsError::Validation(format!("http client: {e}")))?;
        let ctx = Arc::new(Context {
            config,
            layout,
            registry,
            jobs,
            http,
        });
        Ok(Self {
            aggregation: ContentAggregation::new(ctx.clone()),
            mediation: ContentMediation::new(ctx.clone(), backend),
            deployment: ContentDeployment::new(ctx.clone())?,
            ctx,
        })
    }

    pub fn config(&self) -> &CmsConfig {
        &self.ctx.config
    }

    pub fn layout(&self) -> &DataLayout {
        &self.ctx.layout
    }

    pub fn registry(&self) -> &Arc<Registry> {
        &self.ctx.registry
    }

    pub fn jobs(&self) -> &Arc<JobStore> {
        &self.ctx.jobs
    }

    pub fn aggregation(&self) -> &ContentAggregation {
        &self.aggregation
    }

    pub fn mediation(&self) -> &ContentMediation {
        &self.mediation
    }

    pub fn deployment(&self) -> &ContentDeployment {
        &self.deployment
    }
}
