//! ContentDeployment enabler: publish content to the media store or a
//! mock FTP remote, replace or delete published objects, and share links
//! to mock SNS sinks.

mod sink;
mod sns;

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use tracing::warn;

pub use sink::{place, put_ftp, put_media, Destination, Published, SinkKind};
pub use sns::{read_ledger, SharePost, SnsKind, SnsLedger};

use crate::cms::Context;
use crate::domain::{ContentRecord, Crid, JobKind, JobRecord};
use crate::error::{CmsError, Result};
use crate::jobs::WorkerPool;
use crate::storage::{remove_dir_if_exists, safe_segment};

#[derive(Default)]
struct CridLocks(Mutex<HashMap<Crid, Arc<tokio::sync::Mutex<()>>>>);

impl CridLocks {
    fn get(&self, crid: &Crid) -> Arc<tokio::sync::Mutex<()>> {
        let mut map = self.0.lock().unwrap_or_else(|e| e.into_inner());
        map.entry(crid.clone()).or_default().clone()
    }
}

enum UploadSource {
    Registered(Crid),
    Unregistered { path: PathBuf, filename: String },
}

pub struct ContentDeployment {
    ctx: Arc<Context>,
    pool: WorkerPool,
    locks: Arc<CridLocks>,
    failing: Arc<Mutex<HashSet<SinkKind>>>,
    sns: Mutex<SnsLedger>,
}

impl ContentDeployment {
    pub(crate) fn new(ctx: Arc<Context>) -> Result<Self> {
        let pool = WorkerPool::new(ctx.config.deployment_workers);
        let sns = SnsLedger::open(ctx.layout.sns_ledger(), ctx.config.sns_seed)?;
        Ok(Self {
            ctx,
            pool,
            locks: Arc::default(),
            failing: Arc::default(),
            sns: Mutex::new(sns),
        })
    }

    /// Makes a mock sink fail every call until cleared. The media store
    /// cannot be failed.
    pub fn set_sink_failing(&self, kind: SinkKind, failing: bool) -> Result<()> {
        if kind == SinkKind::MediaStore {
            return Err(CmsError::Validation(
                "the media store is always available".into(),
            ));
        }
        let mut set = self.failing.lock().unwrap_or_else(|e| e.into_inner());
        if failing {
            set.insert(kind);
        } else {
            set.remove(&kind);
        }
        Ok(())
    }

    fn is_failing(&self, kind: SinkKind) -> bool {
        self.failing
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .contains(&kind)
    }

    fn source_file(&self, reference: &str) -> Result<(Option<ContentRecord>, PathBuf)> {
        if let Some(record) = self.ctx.find_record(reference)? {
            let path = self.ctx.layout.local_path(&record.storage_location);
            if !path.is_file() {
                return Err(CmsError::Validation(format!(
                    "bytes of {} are missing from storage",
                    record.crid
                )));
            }
            return Ok((Some(record), path));
        }
        let reference = reference.trim();
        if reference.starts_with("crid://") {
            return Err(CmsError::NotFound(format!("content {reference}")));
        }
        let path = self.ctx.layout.local_path(reference);
        if !path.is_file() {
            return Err(CmsError::Validation(format!(
                "source {reference:?} does not exist"
            )));
        }
        self.ctx.check_local(&path)?;
        Ok((None, path))
    }

    /// Queues publication of `src` to `dst`. An unregistered source file
    /// becomes a new original once published.
    pub fn upload_content(
        &self,
        reference: &str,
        src_location: &str,
        dst_location: &str,
    ) -> Result<JobRecord> {
        let dest = Destination::parse(dst_location)?;
        let source = match self.source_file(src_location)? {
            (Some(record), _) => UploadSource::Registered(record.crid),
            (None, path) => {
                let filename = path
                    .file_name()
                    .and_then(|f| f.to_str())
                    .filter(|f| safe_segment(f))
                    .ok_or_else(|| {
                        CmsError::Validation(format!("unusable file name in {src_location:?}"))
                    })?
                    .to_string();
                UploadSource::Unregistered { path, filename }
            }
        };
        let job = self.ctx.jobs.create(JobKind::Upload, reference)?;
        let id = job.event_identifier.clone();
        let ctx = self.ctx.clone();
        let locks = self.locks.clone();
        let failing = self.is_failing(dest.kind());
        self.pool.spawn(async move {
            let result = match upload(&ctx, &locks, &id, source, &dest, failing).await {
                Ok((published, crid)) => {
                    let detail = if published.unchanged {
                        "already published with identical bytes"
                    } else {
                        "published"
                    };
                    ctx.jobs.succeed(
                        &id,
                        detail,
                        Some(published.location),
                        vec![crid.to_string()],
                    )
                }
                Err(e) => ctx.jobs.fail(&id, e.to_string()),
            };
            if let Err(e) = result {
                warn!(event = %id, error = %e, "could not record upload outcome");
            }
        });
        Ok(job)
    }

    pub fn uploading_status(&self, event_identifier: &str) -> Result<JobRecord> {
        self.ctx.jobs.status(event_identifier, &[JobKind::Upload])
    }

    /// Queues replacement of the bytes published for `dst` (a CRID or its
    /// public URL) with the bytes of `src`.
    pub fn update_content(
        &self,
        reference: &str,
        src_location: &str,
        dst_location: &str,
    ) -> Result<JobRecord> {
        let target = self
            .ctx
            .find_record(dst_location)?
            .filter(|r| {
                self.ctx
                    .layout
                    .media_file_for_url(&r.storage_location)
                    .is_some_and(|p| p.is_file())
            })
            .ok_or_else(|| {
                CmsError::NothingToUpdate(format!("no published object at {}", dst_location.trim()))
            })?;
        let (_, src) = self.source_file(src_location)?;
        let job = self.ctx.jobs.create(JobKind::Update, reference)?;
        let id = job.event_identifier.clone();
        let ctx = self.ctx.clone();
        let locks = self.locks.clone();
        self.pool.spawn(async move {
            let result = match update(&ctx, &locks, &id, &src, &target).await {
                Ok(unchanged) => ctx.jobs.succeed(
                    &id,
                    if unchanged {
                        "identical bytes; nothing replaced"
                    } else {
                        "published bytes replaced"
                    },
                    Some(target.storage_location.clone()),
                    vec![target.crid.to_string()],
                ),
                Err(e) => ctx.jobs.fail(&id, e.to_string()),
            };
            if let Err(e) = result {
                warn!(event = %id, error = %e, "could not record update outcome");
            }
        });
        Ok(job)
    }

    pub fn updating_status(&self, event_identifier: &str) -> Result<JobRecord> {
        self.ctx.jobs.status(event_identifier, &[JobKind::Update])
    }

    /// Removes a record with its published and temporary bytes. Originals
    /// that still have variants are kept.
    pub fn delete_content(&self, _reference: &str, crid: &str) -> Result<ContentRecord> {
        let crid: Crid = crid.trim().parse()?;
        let record = self.ctx.registry.get_content_record(&crid)?;
        let variants = self.ctx.registry.variants_of(&crid);
        if !variants.is_empty() {
            return Err(CmsError::Conflict(format!(
                "{crid} still has {} variant(s)",
                variants.len()
            )));
        }
        remove_dir_if_exists(&self.ctx.layout.media_dir().join(crid.serial()))?;
        remove_dir_if_exists(&self.ctx.layout.temp_dir_for(&crid))?;
        self.ctx.registry.delete_content_record(&crid)?;
        Ok(record)
    }

    /// Posts a review with a link to registered content on a mock sink.
    pub fn share_to_sns(
        &self,
        sink: &str,
        account: &str,
        review: &str,
        content_url: &str,
    ) -> Result<SharePost> {
        let kind: SnsKind = sink.parse()?;
        if account.trim().is_empty() {
            return Err(CmsError::Validation("account must not be empty".into()));
        }
        if review.trim().is_empty() {
            return Err(CmsError::Validation("review must not be empty".into()));
        }
        let record = self.ctx.find_record(content_url)?.ok_or_else(|| {
            CmsError::Validation(format!(
                "{:?} is not registered content",
                content_url.trim()
            ))
        })?;
        let url = if content_url.trim().starts_with("crid://") {
            record.storage_location
        } else {
            content_url.trim().to_string()
        };
        let sink_kind = match kind {
            SnsKind::Twitter => SinkKind::SnsTwitterLike,
            SnsKind::Me2day => SinkKind::SnsMe2dayLike,
        };
        if self.is_failing(sink_kind) {
            return Err(CmsError::SinkUnavailable(format!(
                "{kind} sink rejected the post"
            )));
        }
        let mut ledger = self.sns.lock().unwrap_or_else(|e| e.into_inner());
        ledger.record(kind, account.trim(), review, &url)
    }

    pub fn sns_ledger_path(&self) -> PathBuf {
        self.ctx.layout.sns_ledger()
    }
}

async fn upload(
    ctx: &Context,
    locks: &CridLocks,
    id: &str,
    source: UploadSource,
    dest: &Destination,
    failing: bool,
) -> Result<(Published, Crid)> {
    ctx.jobs.start(id, "uploading")?;
    if failing {
        return Err(CmsError::SinkUnavailable(format!("{:?}", dest.kind())));
    }
    match source {
        UploadSource::Registered(crid) => {
            let lock = locks.get(&crid);
            let _guard = lock.lock().await;
            let record = ctx.registry.get_content_record(&crid)?;
            let src = ctx.layout.local_path(&record.storage_location);
            let published = publish(ctx, &src, &record.crid, record.filename(), dest)?;
            if matches!(dest, Destination::MediaStore)
                && record.storage_location != published.location
            {
                let location = published.location.clone();
                ctx.registry
                    .update_content_record(&record.crid, |r| r.storage_location = location)?;
            }
            Ok((published, record.crid))
        }
        UploadSource::Unregistered { path, filename } => {
            let crid = ctx.next_crid()?;
            let lock = locks.get(&crid);
            let _guard = lock.lock().await;
            let published = publish(ctx, &path, &crid, &filename, dest)?;
            let location = match dest {
                Destination::MediaStore => published.location.clone(),
                Destination::Ftp { .. } => path.display().to_string(),
            };
            let title = Path::new(&filename)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or(&filename)
                .to_string();
            let record =
                ContentRecord::original(crid.clone(), title, path.display().to_string(), location);
            if let Err(e) = ctx.registry.upsert_content_record(record) {
                if matches!(dest, Destination::MediaStore) {
                    let _ = remove_dir_if_exists(&ctx.layout.media_dir().join(crid.serial()));
                }
                return Err(e);
            }
            Ok((published, crid))
        }
    }
}

fn publish(
    ctx: &Context,
    src: &Path,
    crid: &Crid,
    filename: &str,
    dest: &Destination,
) -> Result<Published> {
    match dest {
        Destination::MediaStore => put_media(&ctx.layout, src, crid, filename, false),
        Destination::Ftp { host, dir } => put_ftp(&ctx.layout, src, host, dir, filename),
    }
}

async fn update(
    ctx: &Context,
    locks: &CridLocks,
    id: &str,
    src: &Path,
    target: &ContentRecord,
) -> Result<bool> {
    ctx.jobs.start(id, "replacing published bytes")?;
    let lock = locks.get(&target.crid);
    let _guard = lock.lock().await;
    let dst = ctx
        .layout
        .media_file_for_url(&target.storage_location)
        .filter(|p| p.is_file())
        .ok_or_else(|| {
            CmsError::NothingToUpdate(format!("{} is no longer published", target.crid))
        })?;
    let unchanged = place(src, &dst, true)?;
    if !unchanged {
        ctx.registry.update_content_record(&target.crid, |_| {})?;
    }
    Ok(unchanged)
}
