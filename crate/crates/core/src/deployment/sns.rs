//! Mock SNS sinks backed by an append-only ledger file.

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CmsError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnsKind {
    Twitter,
    Me2day,
}

impl SnsKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SnsKind::Twitter => "twitter",
            SnsKind::Me2day => "me2day",
        }
    }
}

impl fmt::Display for SnsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SnsKind {
    type Err = CmsError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "twitter" | "snstwitterlike" => Ok(SnsKind::Twitter),
            "me2day" | "snsme2daylike" => Ok(SnsKind::Me2day),
            _ => Err(CmsError::Validation(format!("unknown SNS sink {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SharePost {
    pub sink: SnsKind,
    pub account: String,
    pub review: String,
    pub content_url: String,
    pub posted_at: DateTime<Utc>,
    pub post_id: String,
}

/// Ledger plus the seeded post-id source. Ids continue the sequence of
/// an existing ledger, so a reopened store never repeats one.
pub struct SnsLedger {
    path: PathBuf,
    rng: ChaCha8Rng,
    sequence: u64,
}

impl SnsLedger {
    pub fn open(path: impl Into<PathBuf>, seed: u64) -> Result<Self> {
        let path = path.into();
        let existing = match fs::read_to_string(&path) {
            Ok(text) => text.lines().filter(|l| !l.trim().is_empty()).count() as u64,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => 0,
            Err(e) => return Err(e.into()),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..existing {
            rng.next_u64();
        }
        Ok(Self {
            path,
            rng,
            sequence: existing,
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn record(
        &mut self,
        sink: SnsKind,
        account: &str,
        review: &str,
        content_url: &str,
    ) -> Result<SharePost> {
        let post_id = format!(
            "{}-{:06}-{:016x}",
            sink.as_str(),
            self.sequence + 1,
            self.rng.next_u64()
        );
        let posted_at = Utc::now();
        let line = format!(
            "{}\t{}\t{}\t{}\t{}\n",
            posted_at.to_rfc3339_opts(SecondsFormat::Millis, true),
            sink,
            one_line(account),
            post_id,
            one_line(content_url)
        );
        if let Some(dir) = self.path.parent() {
            fs::create_dir_all(dir)?;
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        f.write_all(line.as_bytes())?;
        f.flush()?;
        self.sequence += 1;
        Ok(SharePost {
            sink,
            account: account.to_string(),
            review: review.to_string(),
            content_url: content_url.to_string(),
            posted_at,
            post_id,
        })
    }
}

fn one_line(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Reads the ledger back as (timestamp, sink, account, postId, contentUrl).
pub fn read_ledger(path: &Path) -> Result<Vec<[String; 5]>> {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(e.into()),
    };
    Ok(text
        .lines()
        .filter_map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (f.len() == 5).then(|| std::array::from_fn(|i| f[i].to_string()))
        })
        .collect())
}
