use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{Crid, ProfileHash};
use crate::error::{CmsError, Result};

/// Metadata of an original or transcoded content item.
///
/// Originals carry neither `original_crid` nor `profile_hash`; transcoded
/// variants carry both, and the pair is unique across the registry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename = "ContentRecord")]
pub struct ContentRecord {
    #[serde(rename = "CRID")]
    pub crid: Crid,
    #[serde(rename = "Title")]
    pub title: String,
    #[serde(rename = "SourceURL")]
    pub source_url: String,
    #[serde(rename = "StorageLocation")]
    pub storage_location: String,
    #[serde(
        rename = "OriginalCRID",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub original_crid: Option<Crid>,
    #[serde(
        rename = "ProfileHash",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub profile_hash: Option<ProfileHash>,
    #[serde(rename = "CreatedAt")]
    pub created_at: DateTime<Utc>,
    #[serde(rename = "UpdatedAt")]
    pub updated_at: DateTime<Utc>,
    #[serde(rename = "ViewCount", default)]
    pub view_count: u64,
    #[serde(rename = "MediationCount", default)]
    pub mediation_count: u64,
}

impl ContentRecord {
    pub fn original(
        crid: Crid,
        title: impl Into<String>,
        source_url: impl Into<String>,
        storage_location: impl Into<String>,
    ) -> Self {
        let now = Utc::now();
        Self {
            crid,
            title: title.into(),
            source_url: source_url.into(),
            storage_location: storage_location.into(),
            original_crid: None,
            profile_hash: None,
            created_at: now,
            updated_at: now,
            view_count: 0,
            mediation_count: 0,
        }
    }

    pub fn is_variant(&self) -> bool {
        self.original_crid.is_some()
    }

    /// The (original, profile) pair of a transcoded variant.
    pub fn variant_key(&self) -> Option<(Crid, ProfileHash)> {
        match (&self.original_crid, &self.profile_hash) {
            (Some(o), Some(h)) => Some((o.clone(), h.clone())),
            _ => None,
        }
    }

    /// Last path segment of the storage location.
    pub fn filename(&self) -> &str {
        self.storage_location
            .rsplit(['/', '\\'])
            .next()
            .unwrap_or(&self.storage_location)
    }

    pub fn validate(&self) -> Result<()> {
        if self.original_crid.is_some() != self.profile_hash.is_some() {
            return Err(CmsError::Validation(format!(
                "record {} must carry both originalCrid and profileHash or neither",
                self.crid
            )));
        }
        if self.original_crid.as_ref() == Some(&self.crid) {
            return Err(CmsError::Validation(format!(
                "record {} cannot be its own original",
                self.crid
            )));
        }
        if self.storage_location.is_empty() {
            return Err(CmsError::Validation(format!(
                "record {} has no storage location",
                self.crid
            )));
        }
        Ok(())
    }

    pub fn to_xml(&self) -> Result<String> {
        crate::xmldoc::to_document(self)
    }

    pub fn from_xml(text: &str) -> Result<Self> {
        crate::xmldoc::from_document(text)
    }
}
