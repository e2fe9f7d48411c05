//! ContentAggregation enabler: list feed entries and copy selected items
//! into the mediator's temporary storage.

mod feed;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use tracing::{info, warn};
use url::Url;

pub use feed::{fetch_bytes, parse_feed, Credentials, FeedEntry, FeedError};

use crate::cms::Context;
use crate::domain::{ContentRecord, Crid, JobKind, JobRecord};
use crate::error::{CmsError, Result};
use crate::jobs::WorkerPool;
use crate::storage::{remove_dir_if_exists, safe_segment, write_atomic};

/// One selected feed entry, by position in the feed or by content URL.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Selection {
    Index(usize),
    Url(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationRequest {
    pub reference: String,
    #[serde(rename = "feedURL")]
    pub feed_url: String,
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default)]
    pub password: Option<String>,
    pub selection: Vec<Selection>,
}

impl AggregationRequest {
    pub fn credentials(&self) -> Option<Credentials> {
        self.id.as_ref().map(|id| Credentials {
            id: id.clone(),
            password: self.password.clone().unwrap_or_default(),
        })
    }
}

pub struct ContentAggregation {
    ctx: Arc<Context>,
    pool: WorkerPool,
}

impl ContentAggregation {
    pub(crate) fn new(ctx: Arc<Context>) -> Self {
        let pool = WorkerPool::new(ctx.config.aggregation_workers);
        Self { ctx, pool }
    }

    /// Reads a feed and returns its entries in document order.
    pub async fn fetch_feed(
        &self,
        feed_url: &str,
        credentials: Option<&Credentials>,
    ) -> Result<Vec<FeedEntry>> {
        let url = parse_url(feed_url)?;
        if let Ok(path) = url.to_file_path() {
            self.ctx.check_local(&path)?;
        }
        let bytes = fetch_bytes(&self.ctx.http, &url, credentials).await?;
        let text = String::from_utf8(bytes)
            .map_err(|_| FeedError::NotAFeed("payload is not UTF-8 text".into()))?;
        Ok(parse_feed(&text, &url)?)
    }

    /// Validates the request against the live feed, then queues the
    /// download job and returns its Pending record.
    pub async fn aggregate_content(&self, request: AggregationRequest) -> Result<JobRecord> {
        if request.selection.is_empty() {
            return Err(CmsError::Validation("selection must not be empty".into()));
        }
        let credentials = request.credentials();
        let entries = self
            .fetch_feed(&request.feed_url, credentials.as_ref())
            .await?;
        let mut chosen = Vec::with_capacity(request.selection.len());
        for sel in &request.selection {
            let entry = match sel {
                Selection::Index(i) => entries.get(*i).ok_or_else(|| {
                    CmsError::Validation(format!(
                        "selection index {i} out of range (feed has {} entries)",
                        entries.len()
                    ))
                })?,
                Selection::Url(u) => {
                    entries
                        .iter()
                        .find(|e| &e.content_url == u)
                        .ok_or_else(|| {
                            CmsError::Validation(format!("selection url {u} is not in the feed"))
                        })?
                }
            };
            chosen.push(entry.clone());
        }

        let job = self
            .ctx
            .jobs
            .create(JobKind::Aggregation, &request.reference)?;
        let ctx = self.ctx.clone();
        let id = job.event_identifier.clone();
        self.pool.spawn(async move {
            let outcome = run_aggregation(&ctx, &id, chosen, credentials).await;
            let result = match outcome {
                Ok(crids) => {
                    info!(event = %id, items = crids.len(), "aggregation finished");
                    ctx.jobs.succeed(
                        &id,
                        format!("aggregated {} item(s)", crids.len()),
                        Some(ctx.layout.mediator_tmp().display().to_string()),
                        crids.iter().map(Crid::to_string).collect(),
                    )
                }
                Err(detail) => {
                    warn!(event = %id, %detail, "aggregation failed");
                    ctx.jobs.fail(&id, detail)
                }
            };
            if let Err(e) = result {
                warn!(event = %id, error = %e, "could not record aggregation outcome");
            }
        });
        Ok(job)
    }

    pub fn aggregation_status(&self, event_identifier: &str) -> Result<JobRecord> {
        self.ctx
            .jobs
            .status(event_identifier, &[JobKind::Aggregation])
    }
}

fn parse_url(text: &str) -> Result<Url> {
    let url =
        Url::parse(text).map_err(|e| CmsError::Validation(format!("feedURL {text:?}: {e}")))?;
    match url.scheme() {
        "http" | "https" | "file" => Ok(url),
        other => Err(CmsError::Validation(format!(
            "unsupported feed scheme {other}"
        ))),
    }
}

/// Download every entry into a staging directory; only if all succeed,
/// move them into place and register them.
async fn run_aggregation(
    ctx: &Context,
    id: &str,
    entries: Vec<FeedEntry>,
    credentials: Option<Credentials>,
) -> std::result::Result<Vec<Crid>, String> {
    ctx.jobs
        .start(id, &format!("downloading {} item(s)", entries.len()))
        .map_err(|e| e.to_string())?;
    let staging = ctx.layout.mediator_tmp().join(format!(".staging-{id}"));
    let result = stage_and_commit(ctx, &staging, &entries, credentials.as_ref()).await;
    let _ = remove_dir_if_exists(&staging);
    result
}

async fn stage_and_commit(
    ctx: &Context,
    staging: &Path,
    entries: &[FeedEntry],
    credentials: Option<&Credentials>,
) -> std::result::Result<Vec<Crid>, String> {
    std::fs::create_dir_all(staging).map_err(|e| e.to_string())?;
    let mut staged: Vec<(PathBuf, String)> = Vec::with_capacity(entries.len());
    let mut failures = Vec::new();
    for (i, entry) in entries.iter().enumerate() {
        let filename = filename_from_url(&entry.content_url);
        let target = staging.join(format!("{i}-{filename}"));
        let fetched = match Url::parse(&entry.content_url) {
            Ok(url) => match url.to_file_path().map(|p| ctx.check_local(&p)) {
                Ok(Err(e)) => Err(e.to_string()),
                _ => fetch_bytes(&ctx.http, &url, credentials)
                    .await
                    .map_err(|e| e.to_string()),
            },
            Err(e) => Err(e.to_string()),
        };
        match fetched.and_then(|bytes| write_atomic(&target, &bytes).map_err(|e| e.to_string())) {
            Ok(()) => staged.push((target, filename)),
            Err(e) => failures.push(format!("{} ({e})", entry.content_url)),
        }
    }
    if !failures.is_empty() {
        return Err(format!("failed to download: {}", failures.join("; ")));
    }

    let mut committed: Vec<(Crid, PathBuf)> = Vec::new();
    let rollback = |committed: &[(Crid, PathBuf)]| {
        for (crid, dir) in committed {
            let _ = ctx.registry.delete_content_record(crid);
            let _ = remove_dir_if_exists(dir);
        }
    };
    for ((path, filename), entry) in staged.into_iter().zip(entries) {
        let step = (|| -> Result<(Crid, PathBuf)> {
            let crid = ctx.next_crid()?;
            let dir = ctx.layout.temp_dir_for(&crid);
            std::fs::create_dir_all(&dir)?;
            let final_path = dir.join(&filename);
            std::fs::rename(&path, &final_path)?;
            let title = if entry.title.is_empty() {
                filename.clone()
            } else {
                entry.title.clone()
            };
            let record = ContentRecord::original(
                crid.clone(),
                title,
                entry.content_url.clone(),
                final_path.display().to_string(),
            );
            if let Err(e) = ctx.registry.upsert_content_record(record) {
                let _ = remove_dir_if_exists(&dir);
                return Err(e);
            }
            Ok((crid, dir))
        })();
        match step {
            Ok(done) => committed.push(done),
            Err(e) => {
                rollback(&committed);
                return Err(format!("failed to register {}: {e}", entry.content_url));
            }
        }
    }
    Ok(committed.into_iter().map(|(c, _)| c).collect())
}

/// Local file name for downloaded content: the last URL path segment,
/// percent-decoded and restricted to a safe character set.
pub fn filename_from_url(url: &str) -> String {
    let segment = Url::parse(url)
        .ok()
        .and_then(|u| {
            u.path_segments()
                .and_then(|mut s| s.next_back().map(str::to_string))
        })
        .unwrap_or_default();
    let decoded = percent_encoding::percent_decode_str(&segment).decode_utf8_lossy();
    let cleaned: String = decoded
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '_') {
                c
            } else {
                '_'
            }
        })
        .collect();
    let cleaned = cleaned.trim_start_matches('.').to_string();
    if safe_segment(&cleaned) {
        cleaned
    } else {
        "content".to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filenames_from_urls() {
        assert_eq!(
            filename_from_url("http://a.example/v/movie.mp4"),
            "movie.mp4"
        );
        assert_eq!(
            filename_from_url("http://a.example/v/my%20clip.mp4?x=1"),
            "my_clip.mp4"
        );
        assert_eq!(filename_from_url("http://a.example/"), "content");
        assert_eq!(
            filename_from_url("http://a.example/..%2F..%2Fetc"),
            "_.._etc"
        );
        assert_eq!(filename_from_url("not a url"), "content");
    }

    #[test]
    fn selection_accepts_indices_and_urls() {
        let req: AggregationRequest = serde_json::from_str(
            r#"{"reference":"r","feedURL":"http://x/f.rss","id":"u","password":"p","selection":[0,"http://x/a.mp4"]}"#,
        )
        .unwrap();
        assert_eq!(
            req.selection,
            vec![Selection::Index(0), Selection::Url("http://x/a.mp4".into())]
        );
        assert_eq!(
            req.credentials(),
            Some(Credentials {
                id: "u".into(),
                password: "p".into()
            })
        );
    }
}
