//! ContentMediation enabler: on-demand transcoding keyed by device
//! profile, with existence-check deduplication.
//!
//! A transcode request first claims its (original, profile hash) pair.
//! While a claim is held, identical requests attach to the claim holder's
//! outcome instead of running the backend again; once the variant is
//! registered, requests complete immediately from the registry.

mod backend;
mod metadata;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex, MutexGuard};

use serde::{Deserialize, Serialize};
use tokio::sync::watch;
use tracing::{info, warn};

pub use backend::{
    backend_from_config, ExternalCommandBackend, SimulatedBackend, TargetProfile, TranscodeTask,
    TranscoderBackend,
};
pub use metadata::{transformed_path, TransformRules};

use crate::cms::Context;
use crate::config::LoadShares;
use crate::domain::{
    transcoded_filename, ContentRecord, Crid, DeviceClass, JobKind, JobRecord, ProfileHash,
};
use crate::error::{CmsError, Result};
use crate::jobs::WorkerPool;
use crate::storage::{remove_dir_if_exists, write_atomic};

/// Target of a transcode: a registered device or inline parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TranscodingInfo {
    #[serde(rename_all = "camelCase")]
    Device {
        #[serde(alias = "deviceID")]
        device_id: String,
    },
    #[serde(rename_all = "camelCase")]
    Inline {
        width: u32,
        height: u32,
        video_encoding: String,
        audio_encoding: String,
    },
}

impl TranscodingInfo {
    pub fn device(id: impl Into<String>) -> Self {
        TranscodingInfo::Device {
            device_id: id.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedProfile {
    pub hash: ProfileHash,
    pub target: TargetProfile,
    pub device_class: DeviceClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ExistResult {
    pub exists: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crid: Option<Crid>,
}

/// Load share of converting from one screen to another. Conversions
/// outside the three modelled paths are charged the lightest share.
pub fn load_share(shares: &LoadShares, from: DeviceClass, to: DeviceClass) -> f64 {
    match (from, to) {
        (DeviceClass::Pc, DeviceClass::Ipad) => shares.pc_to_ipad,
        (DeviceClass::Pc, DeviceClass::Iphone) => shares.pc_to_iphone,
        _ => shares.ipad_to_iphone,
    }
}

type VariantKey = (Crid, ProfileHash);
type Outcome = Option<std::result::Result<(String, Crid), String>>;

struct Source {
    record: ContentRecord,
    root: Crid,
    root_filename: String,
    path: PathBuf,
}

pub struct ContentMediation {
    ctx: Arc<Context>,
    backend: Arc<dyn TranscoderBackend>,
    pool: WorkerPool,
    claims: Arc<Mutex<HashMap<VariantKey, watch::Receiver<Outcome>>>>,
}

impl ContentMediation {
    pub(crate) fn new(ctx: Arc<Context>, backend: Arc<dyn TranscoderBackend>) -> Self {
        let pool = WorkerPool::new(ctx.config.mediation_workers);
        Self {
            ctx,
            backend,
            pool,
            claims: Arc::new(Mutex::new(HashMap::new())),
        }
    }

    pub fn backend(&self) -> &Arc<dyn TranscoderBackend> {
        &self.backend
    }

    fn lock_claims(&self) -> MutexGuard<'_, HashMap<VariantKey, watch::Receiver<Outcome>>> {
        self.claims.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn resolve_profile(&self, info: &TranscodingInfo) -> Result<ResolvedProfile> {
        match info {
            TranscodingInfo::Device { device_id } => {
                let p = self
                    .ctx
                    .registry
                    .get_device_profile(device_id)
                    .map_err(|_| CmsError::Validation(format!("unknown deviceId {device_id:?}")))?;
                Ok(ResolvedProfile {
                    hash: p.profile_hash(),
                    device_class: p.device_class,
                    target: TargetProfile {
                        width: p.width,
                        height: p.height,
                        video_encoding: p.video_encoding,
                        audio_encoding: p.audio_encoding,
                    },
                })
            }
            TranscodingInfo::Inline {
                width,
                height,
                video_encoding,
                audio_encoding,
            } => {
                if *width == 0 || *height == 0 {
                    return Err(CmsError::Validation(
                        "transcodingInfo resolution must be positive".into(),
                    ));
                }
                if video_encoding.trim().is_empty() || audio_encoding.trim().is_empty() {
                    return Err(CmsError::Validation(
                        "transcodingInfo must name both codecs".into(),
                    ));
                }
                Ok(ResolvedProfile {
                    hash: ProfileHash::new(*width, *height, video_encoding, audio_encoding),
                    device_class: DeviceClass::from_resolution(*width, *height),
                    target: TargetProfile {
                        width: *width,
                        height: *height,
                        video_encoding: video_encoding.clone(),
                        audio_encoding: audio_encoding.clone(),
                    },
                })
            }
        }
    }

    /// Finds the registered record behind a CRID, storage location or
    /// public media URL.
    pub fn resolve_record(&self, reference: &str) -> Result<ContentRecord> {
        self.ctx
            .find_record(reference)?
            .ok_or_else(|| CmsError::NotFound(format!("content {}", reference.trim())))
    }

    fn resolve_source(&self, reference: &str) -> Result<Source> {
        let record = self.resolve_record(reference)?;
        let root = record
            .original_crid
            .clone()
            .unwrap_or_else(|| record.crid.clone());
        let root_filename = if root == record.crid {
            record.filename().to_string()
        } else {
            self.ctx
                .registry
                .get_content_record(&root)?
                .filename()
                .to_string()
        };
        let path = self.ctx.layout.local_path(&record.storage_location);
        if !path.is_file() {
            return Err(CmsError::Validation(format!(
                "bytes of {} are missing from storage",
                record.crid
            )));
        }
        Ok(Source {
            record,
            root,
            root_filename,
            path,
        })
    }

    /// Whether a variant of the source for this profile is registered.
    pub fn is_exist_content(
        &self,
        src_content_url: &str,
        transcoding_info: &TranscodingInfo,
        original_content: Option<&str>,
    ) -> Result<ExistResult> {
        let src = match (src_content_url.trim(), original_content) {
            ("", Some(o)) => o,
            (s, _) => s,
        };
        let profile = self.resolve_profile(transcoding_info)?;
        let record = self.resolve_record(src)?;
        let root = record.original_crid.unwrap_or(record.crid);
        Ok(match self.ctx.registry.find_variant(&root, &profile.hash) {
            Some(v) => ExistResult {
                exists: true,
                location: Some(v.storage_location),
                crid: Some(v.crid),
            },
            None => ExistResult {
                exists: false,
                location: None,
                crid: None,
            },
        })
    }

    /// Queues a transcode of the source for the target profile, or
    /// completes at once when the variant already exists.
    pub fn transcode_content(
        &self,
        reference: &str,
        src_content_url: &str,
        transcoding_info: &TranscodingInfo,
    ) -> Result<JobRecord> {
        let profile = self.resolve_profile(transcoding_info)?;
        let source = self.resolve_source(src_content_url)?;
        let key: VariantKey = (source.root.clone(), profile.hash.clone());
        let jobs = &self.ctx.jobs;

        let mut claims = self.lock_claims();
        if let Some(existing) = self.ctx.registry.find_variant(&key.0, &key.1) {
            drop(claims);
            let job = jobs.create(JobKind::Transcode, reference)?;
            jobs.start(&job.event_identifier, "checking for an existing variant")?;
            return jobs.succeed(
                &job.event_identifier,
                format!("variant already exists as {}", existing.crid),
                Some(existing.storage_location),
                vec![existing.crid.to_string()],
            );
        }

        let job = jobs.create(JobKind::Transcode, reference)?;
        let id = job.event_identifier.clone();

        if let Some(rx) = claims.get(&key).cloned() {
            drop(claims);
            let jobs = jobs.clone();
            tokio::spawn(follow_claim(jobs, id, rx));
            return Ok(job);
        }

        let (tx, rx) = watch::channel(None);
        claims.insert(key.clone(), rx);
        drop(claims);

        let source_class = match &source.record.profile_hash {
            Some(h) => h
                .resolution()
                .map(|(w, h)| DeviceClass::from_resolution(w, h))
                .unwrap_or(DeviceClass::Pc),
            None => DeviceClass::Pc,
        };
        let share = load_share(
            &self.ctx.config.load_shares,
            source_class,
            profile.device_class,
        );
        let work = TranscodeWork {
            ctx: self.ctx.clone(),
            backend: self.backend.clone(),
            claims: self.claims.clone(),
            key,
            id,
            source,
            profile,
            share,
            tx,
        };
        self.pool.spawn(work.run());
        Ok(job)
    }

    /// Status of a transcode or metadata transformation job.
    pub fn transcoding_status(&self, event_identifier: &str) -> Result<JobRecord> {
        self.ctx.jobs.status(
            event_identifier,
            &[JobKind::Transcode, JobKind::MetadataTransform],
        )
    }

    /// Queues a rename/drop transformation of an XML metadata document.
    /// The source may be a path, a `file://` URL or a CRID (its registry
    /// document).
    pub fn transform_metadata(
        &self,
        reference: &str,
        src_metadata_url: &str,
        transformation_rule: &str,
    ) -> Result<JobRecord> {
        let src = src_metadata_url.trim();
        let path = if src.starts_with("crid://") {
            self.ctx.registry.content_document_path(&src.parse()?)?
        } else {
            PathBuf::from(src.strip_prefix("file://").unwrap_or(src))
        };
        if !path.is_file() {
            return Err(CmsError::NotFound(format!("metadata document {src}")));
        }
        self.ctx.check_local(&path)?;
        let job = self
            .ctx
            .jobs
            .create(JobKind::MetadataTransform, reference)?;
        let ctx = self.ctx.clone();
        let id = job.event_identifier.clone();
        let rule = transformation_rule.to_string();
        self.pool.spawn(async move {
            let run = || -> std::result::Result<PathBuf, String> {
                ctx.jobs
                    .start(&id, "transforming metadata")
                    .map_err(|e| e.to_string())?;
                let rules = TransformRules::parse(&rule)?;
                let text = std::fs::read_to_string(&path)
                    .map_err(|e| format!("{}: {e}", path.display()))?;
                let out = rules.apply(&text)?;
                let dst = transformed_path(&path);
                write_atomic(&dst, out.as_bytes()).map_err(|e| e.to_string())?;
                Ok(dst)
            };
            let result = match run() {
                Ok(dst) => ctx.jobs.succeed(
                    &id,
                    "metadata transformed",
                    Some(dst.display().to_string()),
                    vec![],
                ),
                Err(detail) => ctx.jobs.fail(&id, detail),
            };
            if let Err(e) = result {
                warn!(event = %id, error = %e, "could not record transform outcome");
            }
        });
        Ok(job)
    }
}

async fn follow_claim(
    jobs: Arc<crate::jobs::JobStore>,
    id: String,
    mut rx: watch::Receiver<Outcome>,
) {
    let _ = jobs.start(&id, "waiting for an identical transcode in progress");
    let outcome = match rx.wait_for(Option::is_some).await {
        Ok(v) => v.clone().expect("checked"),
        Err(_) => Err("transcode in progress was abandoned".to_string()),
    };
    let result = match outcome {
        Ok((location, crid)) => jobs.succeed(
            &id,
            format!("variant produced by a concurrent request as {crid}"),
            Some(location),
            vec![crid.to_string()],
        ),
        Err(e) => jobs.fail(&id, e),
    };
    if let Err(e) = result {
        warn!(event = %id, error = %e, "could not record transcode outcome");
    }
}

struct TranscodeWork {
    ctx: Arc<Context>,
    backend: Arc<dyn TranscoderBackend>,
    claims: Arc<Mutex<HashMap<VariantKey, watch::Receiver<Outcome>>>>,
    key: VariantKey,
    id: String,
    source: Source,
    profile: ResolvedProfile,
    share: f64,
    tx: watch::Sender<Outcome>,
}

impl TranscodeWork {
    async fn run(self) {
        let outcome = self.produce().await;
        let mut claims = self.claims.lock().unwrap_or_else(|e| e.into_inner());
        let outcome = outcome.and_then(|(crid, target)| self.register(crid, target));
        claims.remove(&self.key);
        self.tx.send_replace(Some(outcome.clone()));
        drop(claims);

        let jobs = &self.ctx.jobs;
        let result = match outcome {
            Ok((location, crid)) => {
                info!(event = %self.id, %crid, backend = self.backend.name(), "transcode finished");
                jobs.succeed(
                    &self.id,
                    format!("transcoded to {}", self.profile.hash),
                    Some(location),
                    vec![crid.to_string()],
                )
            }
            Err(detail) => {
                warn!(event = %self.id, %detail, "transcode failed");
                jobs.fail(&self.id, detail)
            }
        };
        if let Err(e) = result {
            warn!(event = %self.id, error = %e, "could not record transcode outcome");
        }
    }

    async fn produce(&self) -> std::result::Result<(Crid, PathBuf), String> {
        self.ctx
            .jobs
            .start(
                &self.id,
                &format!("transcoding with {}", self.backend.name()),
            )
            .map_err(|e| e.to_string())?;
        let crid = self.ctx.next_crid().map_err(|e| e.to_string())?;
        let filename = transcoded_filename(
            &self.source.root_filename,
            &crid,
            &self.profile.target.video_encoding,
        );
        let dir = self.ctx.layout.temp_dir_for(&crid);
        let task = TranscodeTask {
            source: self.source.path.clone(),
            target: dir.join(&filename),
            profile: self.profile.target.clone(),
            load_share: self.share,
        };
        match self.backend.transcode(&task).await {
            Ok(_) => Ok((crid, task.target)),
            Err(e) => {
                let _ = remove_dir_if_exists(&dir);
                Err(format!("transcoder failed: {e}"))
            }
        }
    }

    /// Registers the variant; called with the claim table locked.
    fn register(&self, crid: Crid, target: PathBuf) -> std::result::Result<(String, Crid), String> {
        let original = self.ctx.registry.get_content_record(&self.key.0).ok();
        let location = target.display().to_string();
        let mut record = ContentRecord::original(
            crid.clone(),
            original
                .as_ref()
                .map(|o| o.title.clone())
                .unwrap_or_else(|| self.source.record.title.clone()),
            self.source.record.source_url.clone(),
            location.clone(),
        );
        record.original_crid = Some(self.key.0.clone());
        record.profile_hash = Some(self.key.1.clone());
        if let Err(e) = self.ctx.registry.upsert_content_record(record) {
            let _ = remove_dir_if_exists(&self.ctx.layout.temp_dir_for(&crid));
            return Err(format!("could not register variant: {e}"));
        }
        if original.is_some() {
            let _ = self
                .ctx
                .registry
                .update_content_record(&self.key.0, |o| o.mediation_count += 1);
        }
        Ok((location, crid))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transcoding_info_wire_forms() {
        let d: TranscodingInfo = serde_json::from_str(r#"{"deviceId":"iphone-1"}"#).unwrap();
        assert_eq!(d, TranscodingInfo::device("iphone-1"));
        let d: TranscodingInfo = serde_json::from_str(r#"{"deviceID":"ipad-1"}"#).unwrap();
        assert_eq!(d, TranscodingInfo::device("ipad-1"));
        let i: TranscodingInfo = serde_json::from_str(
            r#"{"width":960,"height":640,"videoEncoding":"H.264","audioEncoding":"faac"}"#,
        )
        .unwrap();
        assert!(matches!(i, TranscodingInfo::Inline { width: 960, .. }));
        assert!(serde_json::from_str::<TranscodingInfo>(r#"{"width":1}"#).is_err());
    }

    #[test]
    fn load_shares_by_path() {
        let s = LoadShares::default();
        assert_eq!(load_share(&s, DeviceClass::Pc, DeviceClass::Ipad), 0.5);
        assert_eq!(load_share(&s, DeviceClass::Pc, DeviceClass::Iphone), 0.3);
        assert_eq!(load_share(&s, DeviceClass::Ipad, DeviceClass::Iphone), 0.2);
        assert_eq!(load_share(&s, DeviceClass::Pc, DeviceClass::Pc), 0.2);
    }
}
