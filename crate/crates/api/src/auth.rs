//! Static user store and bearer-token sessions.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::RwLock;

use chrono::{DateTime, Duration, Utc};
use rand::RngCore;
use serde::Serialize;
use thiserror::Error;
use webtv_core::device::{page_variant, PageVariant};
use webtv_core::storage::sha256_bytes;
use webtv_core::DeviceClass;

#[derive(Debug, Error)]
pub enum UserFileError {
    #[error("cannot read user file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("user file line {line}: {reason}")]
    Malformed { line: usize, reason: String },
}

pub fn hash_password(password: &str) -> String {
    sha256_bytes(password.as_bytes())
}

/// One `userId:sha256hex` entry per line; blank lines and `#` comments
/// are skipped.
#[derive(Debug, Clone, Default)]
pub struct UserStore {
    users: HashMap<String, String>,
}

impl UserStore {
    pub fn load(path: &Path) -> Result<Self, UserFileError> {
        let text = std::fs::read_to_string(path).map_err(|source| UserFileError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, UserFileError> {
        let mut users = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| UserFileError::Malformed {
                line: i + 1,
                reason: reason.to_string(),
            };
            let (user, hash) = line
                .rsplit_once(':')
                .ok_or_else(|| malformed("expected userId:sha256hex"))?;
            if user.is_empty() || user.contains(':') {
                return Err(malformed("empty or invalid user id"));
            }
            if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
                return Err(malformed("password hash must be 64 hex digits"));
            }
            users.insert(user.to_string(), hash.to_ascii_lowercase());
        }
        Ok(Self { users })
    }

    pub fn entry(user_id: &str, password: &str) -> String {
        format!("{user_id}:{}", hash_password(password))
    }

    pub fn len(&self) -> usize {
        self.users.len()
    }

    pub fn is_empty(&self) -> bool {
        self.users.is_empty()
    }

    pub fn verify(&self, user_id: &str, password: &str) -> bool {
        let Some(expected) = self.users.get(user_id) else {
            return false;
        };
        let given = hash_password(password);
        expected
            .bytes()
            .zip(given.bytes())
            .fold(0u8, |acc, (a, b)| acc | (a ^ b))
            == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Session {
    pub token: String,
    pub user_id: String,
    pub issued_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    pub device_class: DeviceClass,
    pub page_variant: PageVariant,
}

impl Session {
    pub fn is_expired(&self, now: DateTime<Utc>) -> bool {
        now >= self.expires_at
    }
}

pub struct SessionStore {
    ttl: Duration,
    sessions: RwLock<HashMap<String, Session>>,
}

impl SessionStore {
    pub fn new(ttl: std::time::Duration) -> Self {
        Self {
            ttl: Duration::from_std(ttl).unwrap_or(Duration::hours(12)),
            sessions: RwLock::default(),
        }
    }

    pub fn issue(&self, user_id: &str, device_class: DeviceClass) -> Session {
        let mut bytes = [0u8; 32];
        rand::rng().fill_bytes(&mut bytes);
        let now = Utc::now();
        let session = Session {
            token: hex::encode(bytes),
            user_id: user_id.to_string(),
            issued_at: now,
            expires_at: now + self.ttl,
            device_class,
            page_variant: page_variant(device_class),
        };
        let mut map = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        map.retain(|_, s| !s.is_expired(now));
        map.insert(session.token.clone(), session.clone());
        session
    }

    pub fn get(&self, token: &str) -> Option<Session> {
        let now = Utc::now();
        let found = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(token)
            .cloned()?;
        if found.is_expired(now) {
            self.revoke(token);
            return None;
        }
        Some(found)
    }

    pub fn revoke(&self, token: &str) -> bool {
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .remove(token)
            .is_some()
    }

    /// Drops expired sessions; returns how many remain.
    pub fn sweep(&self) -> usize {
        let now = Utc::now();
        let mut map = self.sessions.write().unwrap_or_else(|e| e.into_inner());
        map.retain(|_, s| !s.is_expired(now));
        map.len()
    }
}
