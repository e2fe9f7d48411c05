//! Device and content profile registry.
//!
//! Every profile and content record is stored as its own XML document;
//! an append-only index names the committed documents. On open the index
//! is replayed (a torn trailing line is ignored) and then compacted.
//! All mutations go through one mutex, so the variant uniqueness check
//! and the insert happen as a single step.

use std::collections::{BTreeMap, HashMap};
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::{Mutex, MutexGuard};

use chrono::{NaiveDate, Utc};
use tracing::warn;

use crate::domain::{ContentRecord, Crid, DailyCounter, DeviceProfile, ProfileHash};
use crate::error::{CmsError, Result};
use crate::storage::{remove_file_if_exists, write_atomic};

const INDEX_FILE: &str = "index.log";
const COUNTER_FILE: &str = "crid-counter.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Profile,
    Content,
}

impl Kind {
    fn as_str(self) -> &'static str {
        match self {
            Kind::Profile => "profile",
            Kind::Content => "content",
        }
    }
}

pub struct Registry {
    dir: PathBuf,
    state: Mutex<State>,
}

struct State {
    profiles: BTreeMap<String, DeviceProfile>,
    content: BTreeMap<Crid, ContentRecord>,
    variants: HashMap<(Crid, ProfileHash), Crid>,
    counter: DailyCounter,
    index: File,
}

impl Registry {
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(dir.join("profiles"))?;
        fs::create_dir_all(dir.join("content"))?;

        let mut live_profiles = Vec::new();
        let mut live_content = Vec::new();
        let index_path = dir.join(INDEX_FILE);
        if index_path.exists() {
            let text = fs::read_to_string(&index_path)?;
            let complete = match text.rfind('\n') {
                Some(i) => &text[..=i],
                None => "",
            };
            for line in complete.lines() {
                let mut parts = line.splitn(3, ' ');
                let (Some(op), Some(kind), Some(key)) = (parts.next(), parts.next(), parts.next())
                else {
                    warn!(line, "skipping malformed registry index line");
                    continue;
                };
                let list = match kind {
                    "profile" => &mut live_profiles,
                    "content" => &mut live_content,
                    _ => continue,
                };
                list.retain(|k: &String| k != key);
                if op == "put" {
                    list.push(key.to_string());
                }
            }
        }

        let mut profiles = BTreeMap::new();
        for id in live_profiles {
            match read_doc(&profile_path(&dir, &id)).and_then(|t| DeviceProfile::from_xml(&t)) {
                Ok(p) => {
                    profiles.insert(p.device_id.clone(), p);
                }
                Err(e) => warn!(%id, error = %e, "indexed device profile unreadable"),
            }
        }

        let today = Utc::now().date_naive();
        let mut counter = read_counter(&dir).unwrap_or_else(|| DailyCounter::new(today));
        let mut content = BTreeMap::new();
        let mut variants = HashMap::new();
        for key in live_content {
            let Ok(crid) = key.parse::<Crid>() else {
                warn!(%key, "indexed content key is not a crid");
                continue;
            };
            match read_doc(&content_path(&dir, &crid)).and_then(|t| ContentRecord::from_xml(&t)) {
                Ok(r) => {
                    counter.observe(r.crid.date(), r.crid.counter());
                    if let Some(k) = r.variant_key() {
                        variants.insert(k, r.crid.clone());
                    }
                    content.insert(r.crid.clone(), r);
                }
                Err(e) => warn!(%crid, error = %e, "indexed content record unreadable"),
            }
        }

        let mut compacted = String::new();
        for id in profiles.keys() {
            compacted.push_str(&format!("put profile {id}\n"));
        }
        for crid in content.keys() {
            compacted.push_str(&format!("put content {crid}\n"));
        }
        write_atomic(&index_path, compacted.as_bytes())?;
        let index = OpenOptions::new().append(true).open(&index_path)?;

        Ok(Self {
            dir,
            state: Mutex::new(State {
                profiles,
                content,
                variants,
                counter,
                index,
            }),
        })
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn put_device_profile(&self, profile: DeviceProfile) -> Result<DeviceProfile> {
        profile.validate()?;
        let mut st = self.lock();
        write_atomic(
            &profile_path(&self.dir, &profile.device_id),
            profile.to_xml()?.as_bytes(),
        )?;
        append_index(&mut st.index, "put", Kind::Profile, &profile.device_id)?;
        st.profiles
            .insert(profile.device_id.clone(), profile.clone());
        Ok(profile)
    }

    pub fn get_device_profile(&self, device_id: &str) -> Result<DeviceProfile> {
        self.lock()
            .profiles
            .get(device_id)
            .cloned()
            .ok_or_else(|| CmsError::NotFound(format!("device profile {device_id}")))
    }

    pub fn delete_device_profile(&self, device_id: &str) -> Result<DeviceProfile> {
        let mut st = self.lock();
        let Some(profile) = st.profiles.remove(device_id) else {
            return Err(CmsError::NotFound(format!("device profile {device_id}")));
        };
        append_index(&mut st.index, "del", Kind::Profile, device_id)?;
        remove_file_if_exists(&profile_path(&self.dir, device_id))?;
        Ok(profile)
    }

    pub fn list_device_profiles(&self) -> Vec<DeviceProfile> {
        self.lock().profiles.values().cloned().collect()
    }

    /// Inserts or replaces the record stored under its CRID.
    ///
    /// Fails with a conflict when another record already holds the same
    /// (original, profile hash) pair.
    pub fn upsert_content_record(&self, record: ContentRecord) -> Result<ContentRecord> {
        record.validate()?;
        let mut st = self.lock();
        self.commit_content(&mut st, record)
    }

    fn commit_content(&self, st: &mut State, record: ContentRecord) -> Result<ContentRecord> {
        if let Some(key) = record.variant_key() {
            if let Some(holder) = st.variants.get(&key) {
                if *holder != record.crid {
                    return Err(CmsError::Conflict(format!(
                        "variant of {} for profile {} already registered as {holder}",
                        key.0, key.1
                    )));
                }
            }
        }
        write_atomic(
            &content_path(&self.dir, &record.crid),
            record.to_xml()?.as_bytes(),
        )?;
        append_index(
            &mut st.index,
            "put",
            Kind::Content,
            &record.crid.to_string(),
        )?;
        if let Some(previous) = st.content.insert(record.crid.clone(), record.clone()) {
            if let Some(old_key) = previous.variant_key() {
                st.variants.remove(&old_key);
            }
        }
        if let Some(key) = record.variant_key() {
            st.variants.insert(key, record.crid.clone());
        }
        st.counter
            .observe(record.crid.date(), record.crid.counter());
        Ok(record)
    }

    /// Applies `change` to the stored record and persists the result.
    pub fn update_content_record<F>(&self, crid: &Crid, change: F) -> Result<ContentRecord>
    where
        F: FnOnce(&mut ContentRecord),
    {
        let mut st = self.lock();
        let mut record = st
            .content
            .get(crid)
            .cloned()
            .ok_or_else(|| CmsError::NotFound(format!("content {crid}")))?;
        change(&mut record);
        record.crid = crid.clone();
        record.updated_at = chrono::Utc::now();
        record.validate()?;
        self.commit_content(&mut st, record)
    }

    pub fn get_content_record(&self, crid: &Crid) -> Result<ContentRecord> {
        self.lock()
            .content
            .get(crid)
            .cloned()
            .ok_or_else(|| CmsError::NotFound(format!("content {crid}")))
    }

    pub fn delete_content_record(&self, crid: &Crid) -> Result<ContentRecord> {
        let mut st = self.lock();
        let Some(record) = st.content.remove(crid) else {
            return Err(CmsError::NotFound(format!("content {crid}")));
        };
        if let Some(key) = record.variant_key() {
            st.variants.remove(&key);
        }
        append_index(&mut st.index, "del", Kind::Content, &crid.to_string())?;
        remove_file_if_exists(&content_path(&self.dir, crid))?;
        Ok(record)
    }

    pub fn list_content(&self) -> Vec<ContentRecord> {
        self.lock().content.values().cloned().collect()
    }

    pub fn find_variant(&self, original: &Crid, hash: &ProfileHash) -> Option<ContentRecord> {
        let st = self.lock();
        let crid = st.variants.get(&(original.clone(), hash.clone()))?;
        st.content.get(crid).cloned()
    }

    pub fn variants_of(&self, original: &Crid) -> Vec<ContentRecord> {
        self.lock()
            .content
            .values()
            .filter(|r| r.original_crid.as_ref() == Some(original))
            .cloned()
            .collect()
    }

    /// Record stored at `location`, else the original fetched from it.
    pub fn find_by_location(&self, location: &str) -> Option<ContentRecord> {
        let st = self.lock();
        st.content
            .values()
            .find(|r| r.storage_location == location)
            .or_else(|| {
                st.content
                    .values()
                    .find(|r| !r.is_variant() && r.source_url == location)
            })
            .cloned()
    }

    /// Allocates the next CRID for `date`; the counter survives restarts.
    pub fn next_crid(&self, authority: &str, service: &str, date: NaiveDate) -> Result<Crid> {
        let mut st = self.lock();
        let mut counter = st.counter;
        let n = counter.next(date)?;
        let crid = Crid::generate(authority, service, date, n)?;
        write_atomic(
            &self.dir.join(COUNTER_FILE),
            serde_json::to_string(&counter)
                .expect("counter serializes")
                .as_bytes(),
        )?;
        st.counter = counter;
        Ok(crid)
    }

    /// XML document backing a committed content record.
    pub fn content_document_path(&self, crid: &Crid) -> Result<PathBuf> {
        if !self.lock().content.contains_key(crid) {
            return Err(CmsError::NotFound(format!("content {crid}")));
        }
        Ok(content_path(&self.dir, crid))
    }
}

fn profile_path(dir: &Path, device_id: &str) -> PathBuf {
    dir.join("profiles").join(format!("{device_id}.xml"))
}

fn content_path(dir: &Path, crid: &Crid) -> PathBuf {
    dir.join("content")
        .join(format!("{}.xml", crid.storage_key()))
}

fn read_doc(path: &Path) -> Result<String> {
    Ok(fs::read_to_string(path)?)
}

fn read_counter(dir: &Path) -> Option<DailyCounter> {
    let text = fs::read_to_string(dir.join(COUNTER_FILE)).ok()?;
    serde_json::from_str(&text).ok()
}

fn append_index(index: &mut File, op: &str, kind: Kind, key: &str) -> io::Result<()> {
    index.write_all(format!("{op} {} {key}\n", kind.as_str()).as_bytes())?;
    index.flush()
}
