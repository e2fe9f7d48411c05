//! Data directory layout and small file helpers.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::domain::Crid;

/// Paths under the configured data directory.
#[derive(Debug, Clone)]
pub struct DataLayout {
    root: PathBuf,
}

impl DataLayout {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Self { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn registry_dir(&self) -> PathBuf {
        self.root.join("registry")
    }

    pub fn jobs_journal(&self) -> PathBuf {
        self.root.join("jobs").join("journal.jsonl")
    }

    pub fn mediator_tmp(&self) -> PathBuf {
        self.root.join("mediator-tmp")
    }

    pub fn temp_dir_for(&self, crid: &Crid) -> PathBuf {
        self.mediator_tmp().join(crid.serial())
    }

    pub fn media_dir(&self) -> PathBuf {
        self.root.join("media")
    }

    pub fn media_path(&self, crid: &Crid, filename: &str) -> PathBuf {
        self.media_dir().join(crid.serial()).join(filename)
    }

    pub fn ftp_remote_dir(&self) -> PathBuf {
        self.root.join("ftp-remote")
    }

    pub fn sns_ledger(&self) -> PathBuf {
        self.root.join("sns-ledger.log")
    }

    pub fn fixtures_dir(&self) -> PathBuf {
        self.root.join("fixtures")
    }

    /// Maps a public `/media/<serial>/<filename>` URL (or an absolute
    /// `http(s)://host/media/...` URL) to the backing file.
    pub fn media_file_for_url(&self, url: &str) -> Option<PathBuf> {
        let path = public_media_path(url)?;
        let rest = path.strip_prefix("/media/")?;
        let (serial, filename) = rest.split_once('/')?;
        if !safe_segment(serial) || !safe_segment(filename) {
            return None;
        }
        Some(self.media_dir().join(serial).join(filename))
    }

    /// Local file holding the bytes behind a storage location.
    pub fn local_path(&self, storage_location: &str) -> PathBuf {
        if let Some(p) = self.media_file_for_url(storage_location) {
            return p;
        }
        if let Some(p) = storage_location.strip_prefix("file://") {
            return PathBuf::from(p);
        }
        PathBuf::from(storage_location)
    }
}

/// Public URL of a published object.
pub fn public_media_url(crid: &Crid, filename: &str) -> String {
    format!("/media/{}/{filename}", crid.serial())
}

/// The `/media/...` path of a public URL, absolute or not.
pub fn public_media_path(url: &str) -> Option<&str> {
    let path = if url.starts_with("http://") || url.starts_with("https://") {
        let after_scheme = &url[url.find("://")? + 3..];
        &after_scheme[after_scheme.find('/')?..]
    } else {
        url
    };
    path.starts_with("/media/").then_some(path)
}

pub fn safe_segment(s: &str) -> bool {
    !s.is_empty() && s != "." && s != ".." && !s.contains(['/', '\\', '\0'])
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename,
/// so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".tmp-{}", uuid::Uuid::new_v4().simple()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// Copies `src` to `dst` atomically.
pub fn copy_atomic(src: &Path, dst: &Path) -> io::Result<()> {
    let dir = dst.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(".tmp-{}", uuid::Uuid::new_v4().simple()));
    let result = fs::copy(src, &tmp).and_then(|_| fs::rename(&tmp, dst));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}

pub fn sha256_file(path: &Path) -> io::Result<String> {
    let mut f = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex::encode(hasher.finalize()))
}

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Removes a directory tree, treating "already gone" as success.
pub fn remove_dir_if_exists(path: &Path) -> io::Result<()> {
    match fs::remove_dir_all(path) {
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(()),
        other => other,
    }
}

pub fn remove_file_if_exists(path: &Path) -> io::Result<()> {
    match fs::remove_file(path) {
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(()),
        other => other,
    }
}
