//! Publication targets: the local media store and a mock FTP remote.

use std::fs::{self, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use chrono::Utc;
use serde::{Deserialize, Serialize};

use crate::domain::Crid;
use crate::error::{CmsError, Result};
use crate::storage::{copy_atomic, public_media_url, safe_segment, sha256_file, DataLayout};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SinkKind {
    MediaStore,
    FtpRemote,
    SnsTwitterLike,
    SnsMe2dayLike,
}

/// Where an upload goes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Destination {
    MediaStore,
    Ftp { host: String, dir: Vec<String> },
}

impl Destination {
    /// Accepts `media`, `media:<anything>`, a `/media...` path, or
    /// `ftp://host/dir/...`.
    pub fn parse(dst: &str) -> Result<Self> {
        let dst = dst.trim();
        if dst == "media"
            || dst.starts_with("media:")
            || dst == "/media"
            || dst.starts_with("/media/")
        {
            return Ok(Destination::MediaStore);
        }
        if let Some(rest) = dst.strip_prefix("ftp://") {
            let mut parts = rest.split('/');
            let host = parts.next().unwrap_or_default();
            if host.is_empty() || !safe_segment(host) {
                return Err(CmsError::Validation(format!(
                    "ftp destination {dst:?} has no host"
                )));
            }
            let mut dir = Vec::new();
            for seg in parts.filter(|s| !s.is_empty()) {
                if !safe_segment(seg) {
                    return Err(CmsError::Validation(format!(
                        "bad ftp path segment {seg:?}"
                    )));
                }
                dir.push(seg.to_string());
            }
            return Ok(Destination::Ftp {
                host: host.to_string(),
                dir,
            });
        }
        Err(CmsError::Validation(format!(
            "unsupported destination {dst:?}; use media or ftp://host/path"
        )))
    }

    pub fn kind(&self) -> SinkKind {
        match self {
            Destination::MediaStore => SinkKind::MediaStore,
            Destination::Ftp { .. } => SinkKind::FtpRemote,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Published {
    pub location: String,
    pub path: PathBuf,
    pub unchanged: bool,
}

/// Copies `src` to `dst` unless an identical file is already there.
/// A different file at `dst` is an error unless `replace` is set.
pub fn place(src: &Path, dst: &Path, replace: bool) -> Result<bool> {
    if dst.is_file() {
        if sha256_file(src)? == sha256_file(dst)? {
            return Ok(true);
        }
        if !replace {
            return Err(CmsError::Conflict(format!(
                "{} already holds different content",
                dst.display()
            )));
        }
    }
    copy_atomic(src, dst)?;
    Ok(false)
}

pub fn put_media(
    layout: &DataLayout,
    src: &Path,
    crid: &Crid,
    filename: &str,
    replace: bool,
) -> Result<Published> {
    let path = layout.media_path(crid, filename);
    let unchanged = place(src, &path, replace)?;
    Ok(Published {
        location: public_media_url(crid, filename),
        path,
        unchanged,
    })
}

pub fn put_ftp(
    layout: &DataLayout,
    src: &Path,
    host: &str,
    dir: &[String],
    filename: &str,
) -> Result<Published> {
    let mut path = layout.ftp_remote_dir().join(host);
    for seg in dir {
        path.push(seg);
    }
    path.push(filename);
    let remote_dir = format!("/{}", dir.join("/"));
    let unchanged = place(src, &path, false)?;
    let size = fs::metadata(src)?.len();
    let mut commands = vec![
        format!("OPEN {host}"),
        "USER anonymous".to_string(),
        format!("CWD {remote_dir}"),
    ];
    if unchanged {
        commands.push(format!("SIZE {filename} {size} (unchanged, skipped)"));
    } else {
        commands.push(format!("STOR {filename} {size}"));
    }
    commands.push("QUIT".to_string());
    append_transcript(&layout.ftp_remote_dir().join("transcript.log"), &commands)?;
    let location = if dir.is_empty() {
        format!("ftp://{host}/{filename}")
    } else {
        format!("ftp://{host}{remote_dir}/{filename}")
    };
    Ok(Published {
        location,
        path,
        unchanged,
    })
}

fn append_transcript(path: &Path, commands: &[String]) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let now = Utc::now().to_rfc3339();
    let mut text = String::new();
    for c in commands {
        text.push_str(&format!("{now} {c}\n"));
    }
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(text.as_bytes())
}
